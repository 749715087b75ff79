use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::fleet::{delivery_stop, pending_orders, Fleet};
use super::route::Planner;
use crate::domain::{FactoryId, ItemId, Quarters};
use crate::plan::{DispatchPlan, Stop};
use crate::sim::{DispatchPolicy, PlanningContext, PolicyError};
use crate::snapshot::{ItemInfo, Snapshot};
use crate::Seconds;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ThresholdConfig {
    /// Release an order once its committed time is this close.
    pub time_threshold: Seconds,
    /// Release a pickup factory's orders once their demand reaches this
    /// fraction of vehicle capacity.
    pub fill_threshold: f64,
    /// Let held orders ride along with routes already passing by.
    pub hitch_ride: bool,
}

impl Default for ThresholdConfig {
    fn default() -> Self {
        ThresholdConfig { time_threshold: 10_800, fill_threshold: 0.8, hitch_ride: true }
    }
}

/// Holds orders back until a time or fill threshold is reached, then ships
/// each pickup factory's released orders together.
#[derive(Clone, Copy, Debug, Default)]
pub struct ThresholdPolicy {
    pub config: ThresholdConfig,
}

impl ThresholdPolicy {
    pub fn new(config: ThresholdConfig) -> Self {
        ThresholdPolicy { config }
    }
}

impl DispatchPolicy for ThresholdPolicy {
    fn dispatch(&mut self, ctx: &PlanningContext<'_>, snapshot: &Snapshot) -> Result<DispatchPlan, PolicyError> {
        Ok(threshold_plan(ctx, snapshot, &self.config))
    }
}

/// Whether an order is released this epoch.
pub fn should_release(
    cfg: &ThresholdConfig,
    now: Seconds,
    committed: Seconds,
    creation: Seconds,
    pickup_demand: Quarters,
    capacity: Quarters,
    dispatch_deadline: Seconds,
    epoch_length: Seconds,
) -> bool {
    committed - now <= cfg.time_threshold
        || f64::from(pickup_demand.0) >= cfg.fill_threshold * f64::from(capacity.0) - 1e-9
        || now - creation >= dispatch_deadline - epoch_length
}

pub fn threshold_plan(ctx: &PlanningContext<'_>, snapshot: &Snapshot, cfg: &ThresholdConfig) -> DispatchPlan {
    let planner = Planner::new(ctx, snapshot);
    let mut fleet = Fleet::new(&planner);
    let capacity = snapshot.fleet_capacity();
    let orders = pending_orders(&planner);

    let mut pickup_demand: BTreeMap<&FactoryId, Quarters> = BTreeMap::new();
    for order in &orders {
        *pickup_demand.entry(&order[0].pickup_factory_id).or_default() += order_demand(order);
    }

    let mut released = Vec::new();
    for order in orders {
        let head = order[0];
        let release = should_release(
            cfg,
            snapshot.now,
            head.committed_completion_time,
            head.creation_time,
            pickup_demand[&head.pickup_factory_id],
            capacity,
            ctx.config.dispatch_deadline,
            ctx.config.epoch_length,
        );
        if cfg.hitch_ride && order_demand(&order) <= capacity && fleet.holders(&head.order_id).is_none() && hitch(&mut fleet, &order) {
            continue;
        }
        if release {
            released.push(order);
        }
    }

    // Batch small released orders per pickup factory; big ones go alone.
    let mut groups: BTreeMap<&FactoryId, Vec<Vec<&ItemInfo>>> = BTreeMap::new();
    let mut singles = Vec::new();
    for order in &released {
        if order_demand(order) > capacity || fleet.holders(&order[0].order_id).is_some() {
            singles.push(order.clone());
        } else {
            groups.entry(&order[0].pickup_factory_id).or_default().push(order.clone());
        }
    }
    for order in singles {
        fleet.assign_order(&order);
    }
    for (pickup, group) in groups {
        for batch in pack(group, capacity) {
            if !ship_batch(&mut fleet, pickup, &batch) {
                for order in batch {
                    fleet.assign_order(&order);
                }
            }
        }
    }
    fleet.into_plan()
}

fn order_demand(items: &[&ItemInfo]) -> Quarters {
    items.iter().map(|i| i.demand).sum()
}

/// First-fit in committed order.
fn pack(group: Vec<Vec<&ItemInfo>>, capacity: Quarters) -> Vec<Vec<Vec<&ItemInfo>>> {
    let mut batches: Vec<(Quarters, Vec<Vec<&ItemInfo>>)> = Vec::new();
    for order in group {
        let d = order_demand(&order);
        match batches.iter_mut().find(|(load, _)| *load + d <= capacity) {
            Some((load, batch)) => {
                *load += d;
                batch.push(order);
            }
            None => batches.push((d, alloc::vec![order])),
        }
    }
    batches.into_iter().map(|(_, b)| b).collect()
}

/// Delivery stops visited nearest-neighbour from the pickup, and the load
/// order that puts the first delivery on top.
fn batch_route(planner: &Planner<'_>, pickup: &FactoryId, batch: &[Vec<&ItemInfo>]) -> (Vec<ItemId>, Vec<Stop>) {
    let mut by_dest: BTreeMap<&FactoryId, Vec<ItemId>> = BTreeMap::new();
    for order in batch {
        by_dest.entry(&order[0].delivery_factory_id).or_default().extend(order.iter().map(|i| i.id.clone()));
    }
    let mut at = planner.idx(pickup);
    let mut stops = Vec::new();
    while !by_dest.is_empty() {
        let next = *by_dest
            .keys()
            .min_by_key(|f| (planner.network.travel_time_idx(at, planner.idx(f)), **f))
            .expect("non-empty");
        let items = by_dest.remove(next).expect("present");
        at = planner.idx(next);
        stops.push(delivery_stop(next, items));
    }
    let pickups: Vec<ItemId> =
        stops.iter().flat_map(|s| s.delivery_items.iter()).rev().cloned().collect();
    (pickups, stops)
}

fn ship_batch(fleet: &mut Fleet<'_, '_>, pickup: &FactoryId, batch: &[Vec<&ItemInfo>]) -> bool {
    let (pickups, deliveries) = batch_route(fleet.planner, pickup, batch);
    match fleet.best(pickup, &pickups, &deliveries, &BTreeSet::new()) {
        Some(q) => {
            fleet.append(q.vehicle, pickup, &pickups, deliveries);
            true
        }
        None => false,
    }
}

/// Inserts a small order into a route that already stops at its pickup
/// factory, when that adds less driving than a dedicated trip and makes
/// nothing later.
fn hitch(fleet: &mut Fleet<'_, '_>, order: &[&ItemInfo]) -> bool {
    let planner = fleet.planner;
    let head = order[0];
    let ids: Vec<ItemId> = order.iter().map(|i| i.id.clone()).collect();
    let direct = planner.network.distance_idx(planner.idx(&head.pickup_factory_id), planner.idx(&head.delivery_factory_id));
    let mut best: Option<(f64, usize, crate::plan::VehiclePlan)> = None;
    for &v in fleet.vehicles_by_id() {
        let plan = &fleet.plans[v];
        let frame = planner.frame(v, plan, false);
        let stops: Vec<Stop> = plan.stops().cloned().collect();
        let before = planner.evaluate(frame.anchor, &stops[frame.frozen..], 0, None);
        for i in frame.frozen..stops.len() {
            if stops[i].factory_id != head.pickup_factory_id {
                continue;
            }
            let mut cand = stops.clone();
            cand[i].pickup_items.extend(ids.iter().cloned());
            let reversed: Vec<ItemId> = ids.iter().rev().cloned().collect();
            match cand.get_mut(i + 1) {
                Some(next) if next.factory_id == head.delivery_factory_id => {
                    let rest = core::mem::take(&mut next.delivery_items);
                    next.delivery_items = reversed.into_iter().chain(rest).collect();
                }
                _ => cand.insert(i + 1, delivery_stop(&head.delivery_factory_id, reversed)),
            }
            if !planner.feasible(v, &frame, &cand[frame.frozen..]) {
                continue;
            }
            let after = planner.evaluate(frame.anchor, &cand[frame.frozen..], 0, None);
            let added = after.distance - before.distance;
            if after.lateness > before.lateness || added > direct {
                continue;
            }
            if best.as_ref().is_none_or(|(b, _, _)| added < *b) {
                let mut it = cand.into_iter();
                let destination = it.next();
                best = Some((added, v, crate::plan::VehiclePlan { destination, route: it.collect() }));
            }
        }
    }
    match best {
        Some((_, v, plan)) => {
            fleet.replace(v, plan, &ids);
            true
        }
        None => false,
    }
}
