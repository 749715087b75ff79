use alloc::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::config::SimConfig;
use crate::domain::{Order, OrderId, VehicleId};
use crate::sim::RunLedger;
use crate::Seconds;

/// Objective values of one run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScoreReport {
    /// False when the run aborted; totals then cover completed orders only.
    pub complete: bool,
    /// Total order timeout, seconds.
    pub f1: Seconds,
    /// Mean distance per vehicle over the whole fleet, km.
    pub f2: f64,
    pub lambda: f64,
    pub f: f64,
    pub orders_total: usize,
    pub orders_completed: usize,
    pub order_timeouts: BTreeMap<OrderId, Seconds>,
    pub vehicle_distances: BTreeMap<VehicleId, f64>,
}

impl ScoreReport {
    /// Builds a report from per-order completion times and per-vehicle distances.
    pub fn from_totals(
        completions: &BTreeMap<OrderId, Seconds>,
        distances: &BTreeMap<VehicleId, f64>,
        orders: &[Order],
        lambda: f64,
        complete: bool,
    ) -> Self {
        let mut order_timeouts = BTreeMap::new();
        for order in orders {
            if let Some(&done) = completions.get(&order.id) {
                order_timeouts.insert(order.id.clone(), (done - order.committed_completion_time).max(0));
            }
        }
        let f1 = order_timeouts.values().sum();
        let f2 = if distances.is_empty() { 0.0 } else { distances.values().sum::<f64>() / distances.len() as f64 };
        ScoreReport {
            complete,
            f1,
            f2,
            lambda,
            f: lambda * f1 as f64 + f2,
            orders_total: orders.len(),
            orders_completed: order_timeouts.len(),
            order_timeouts,
            vehicle_distances: distances.clone(),
        }
    }

    /// Same totals under a different weight.
    pub fn with_lambda(&self, lambda: f64) -> Self {
        ScoreReport { lambda, f: lambda * self.f1 as f64 + self.f2, ..self.clone() }
    }
}

/// Scores a run from the totals the engine tracked while simulating.
pub fn score(ledger: &RunLedger, orders: &[Order], config: &SimConfig, complete: bool) -> ScoreReport {
    ScoreReport::from_totals(&ledger.completions, &ledger.distances, orders, config.lambda, complete)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{FactoryId, PalletQuantity};

    fn order(id: &str, committed: Seconds) -> Order {
        Order {
            id: OrderId::from(id),
            pickup: FactoryId::from("a"),
            delivery: FactoryId::from("b"),
            quantity: PalletQuantity { standard: 1, small: 0, boxes: 0 },
            creation_time: 0,
            committed_completion_time: committed,
            load_time: 0,
            unload_time: 0,
        }
    }

    fn distances(values: &[(&str, f64)]) -> BTreeMap<VehicleId, f64> {
        values.iter().map(|(k, d)| (VehicleId::from(*k), *d)).collect()
    }

    #[test]
    fn on_time_orders_have_zero_timeout() {
        let orders = [order("o1", 1000), order("o2", 2000)];
        let completions = [("o1", 1000), ("o2", 1500)].iter().map(|(k, t)| (OrderId::from(*k), *t)).collect();
        let r = ScoreReport::from_totals(&completions, &distances(&[("v", 0.0)]), &orders, 10_000.0, true);
        assert_eq!(r.f1, 0);
        assert_eq!(r.orders_completed, 2);
    }

    #[test]
    fn f2_is_mean_over_fleet() {
        let r = ScoreReport::from_totals(
            &BTreeMap::new(),
            &distances(&[("v1", 10.0), ("v2", 30.0)]),
            &[],
            10_000.0,
            true,
        );
        assert_eq!(r.f2, 20.0);
    }

    #[test]
    fn combined_objective() {
        let orders = [order("o1", 1000)];
        let completions = [(OrderId::from("o1"), 1600)].into_iter().collect();
        let r = ScoreReport::from_totals(&completions, &distances(&[("v1", 10.0), ("v2", 30.0)]), &orders, 10_000.0, true);
        assert_eq!(r.f1, 600);
        assert_eq!(r.f, 6_000_020.0);
        let r1 = r.with_lambda(1.0);
        assert_eq!((r1.f1, r1.f2, r1.f), (600, 20.0, 620.0));
    }

    #[test]
    fn idle_fleet_scores_zero_distance() {
        let r = ScoreReport::from_totals(&BTreeMap::new(), &distances(&[("v1", 0.0)]), &[], 1.0, true);
        assert_eq!(r.f2, 0.0);
        assert_eq!(r.f, 0.0);
    }
}
