//! Tail-append bookkeeping used by the constructive policies.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;

use super::route::{Anchor, Planner};
use crate::domain::{FactoryId, ItemId, OrderId, Quarters};
use crate::plan::{DispatchPlan, Stop, VehiclePlan};
use crate::snapshot::ItemInfo;
use crate::Seconds;

#[derive(Clone, Copy, Debug)]
struct Tail {
    anchor: Anchor,
    load: Quarters,
    /// The last stop is editable, so a pickup there can be merged into it.
    mergeable: bool,
}

/// Estimated effect of appending a shipment to one vehicle.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub(crate) struct Quote {
    pub lateness: Seconds,
    pub added_travel: Seconds,
    pub vehicle: usize,
}

#[derive(Clone)]
pub(crate) struct Fleet<'p, 'a> {
    pub planner: &'p Planner<'a>,
    pub plans: Vec<VehiclePlan>,
    tails: Vec<Tail>,
    /// Vehicles carrying or planned to pick up items of each order.
    holders: BTreeMap<OrderId, BTreeSet<usize>>,
    /// Vehicle indices sorted by id, for tie-breaking.
    by_id: Vec<usize>,
}

impl<'p, 'a> Fleet<'p, 'a> {
    pub fn new(planner: &'p Planner<'a>) -> Self {
        let plans = planner.current_plans();
        let mut holders: BTreeMap<OrderId, BTreeSet<usize>> = BTreeMap::new();
        for (v, (view, plan)) in planner.snapshot.vehicles.iter().zip(&plans).enumerate() {
            let picked = plan.stops().flat_map(|s| &s.pickup_items);
            for id in view.carrying_items.iter().chain(picked) {
                if let Some(info) = planner.items.get(id) {
                    holders.entry(info.order_id.clone()).or_default().insert(v);
                }
            }
        }
        let mut by_id: Vec<usize> = (0..plans.len()).collect();
        by_id.sort_by(|&a, &b| planner.view(a).id.cmp(&planner.view(b).id));
        let mut fleet = Fleet { planner, tails: Vec::with_capacity(plans.len()), plans, holders, by_id };
        for v in 0..fleet.plans.len() {
            let tail = fleet.compute_tail(v);
            fleet.tails.push(tail);
        }
        fleet
    }

    fn compute_tail(&self, v: usize) -> Tail {
        let plan = &self.plans[v];
        let frame = self.planner.frame(v, plan, false);
        let editable: Vec<&Stop> = plan.stops().skip(frame.frozen).collect();
        let cost = self.planner.evaluate(frame.anchor, editable.iter().copied(), 0, None);
        Tail {
            anchor: cost.end.unwrap_or(frame.anchor),
            load: self.planner.end_load(&frame, editable.iter().copied()),
            mergeable: !editable.is_empty(),
        }
    }

    pub fn len(&self) -> usize {
        self.plans.len()
    }

    /// Vehicle indices in id order.
    pub fn vehicles_by_id(&self) -> &[usize] {
        &self.by_id
    }

    pub fn holders(&self, order: &OrderId) -> Option<&BTreeSet<usize>> {
        self.holders.get(order)
    }

    /// Quote for appending a pickup of `pickups` (load order) at `pickup`
    /// followed by `deliveries`, or `None` when capacity rules it out.
    pub fn quote(&self, v: usize, pickup: &FactoryId, pickups: &[ItemId], deliveries: &[Stop], margin: Seconds) -> Option<Quote> {
        let planner = self.planner;
        let tail = self.tails[v];
        let demand: Quarters = pickups.iter().filter_map(|id| planner.demand(id)).sum();
        if tail.load + demand > planner.view(v).capacity_quarters() {
            return None;
        }
        let f = planner.idx(pickup);
        let load: Seconds = pickups.iter().map(|id| planner.info(id).load_time).sum();
        let merge = tail.mergeable && tail.anchor.factory == f;
        let (to_pickup, start) = if merge {
            (0, tail.anchor.time + load)
        } else {
            let leg = planner.network.travel_time_idx(tail.anchor.factory, f);
            (leg, tail.anchor.time + leg + planner.config.dock_approach_time + load)
        };
        let rest = planner.evaluate(Anchor { factory: f, time: start }, deliveries, margin, None);
        Some(Quote { lateness: rest.lateness, added_travel: to_pickup + rest.travel_time, vehicle: v })
    }

    /// Cheapest vehicle for a shipment among those not excluded.
    pub fn best(
        &self,
        pickup: &FactoryId,
        pickups: &[ItemId],
        deliveries: &[Stop],
        excluded: &BTreeSet<usize>,
    ) -> Option<Quote> {
        let margin = self.planner.config.dock_approach_time;
        let mut best: Option<(Quote, usize)> = None;
        for (rank, &v) in self.by_id.iter().enumerate() {
            if excluded.contains(&v) {
                continue;
            }
            if let Some(q) = self.quote(v, pickup, pickups, deliveries, margin) {
                let key = (q.lateness, q.added_travel, rank);
                if best.is_none_or(|(b, r)| key < (b.lateness, b.added_travel, r)) {
                    best = Some((q, rank));
                }
            }
        }
        best.map(|(q, _)| q)
    }

    /// Appends the shipment to vehicle `v`, merging the pickup into the last
    /// stop when it is editable and at the same factory.
    pub fn append(&mut self, v: usize, pickup: &FactoryId, pickups: &[ItemId], deliveries: Vec<Stop>) {
        let tail = self.tails[v];
        let f = self.planner.idx(pickup);
        let plan = &mut self.plans[v];
        let merge = tail.mergeable && tail.anchor.factory == f;
        if merge {
            let last = plan.route.last_mut().or(plan.destination.as_mut()).expect("mergeable tail has a stop");
            last.pickup_items.extend(pickups.iter().cloned());
        } else {
            let mut stop = Stop::new(pickup.clone());
            stop.pickup_items = pickups.to_vec();
            push_stop(plan, stop);
        }
        for d in deliveries {
            push_stop(plan, d);
        }
        for id in pickups {
            let order = self.planner.info(id).order_id.clone();
            self.holders.entry(order).or_default().insert(v);
        }
        self.tails[v] = self.compute_tail(v);
    }

    /// Replaces vehicle `v`'s plan wholesale.
    pub fn replace(&mut self, v: usize, plan: VehiclePlan, new_items: &[ItemId]) {
        self.plans[v] = plan;
        for id in new_items {
            let order = self.planner.info(id).order_id.clone();
            self.holders.entry(order).or_default().insert(v);
        }
        self.tails[v] = self.compute_tail(v);
    }

    /// Assigns one order's unallocated items by tail append, splitting into
    /// capacity-sized chunks when the order is too big for one vehicle. A
    /// vehicle may take several chunks in turn. All chunks are placed or
    /// none.
    pub fn assign_order(&mut self, items: &[&ItemInfo]) -> bool {
        let Some(first) = items.first() else { return true };
        let capacity = self.planner.snapshot.fleet_capacity();
        let chunks = chunk(items, capacity);
        let mut excluded = BTreeSet::new();
        if chunks.len() == 1 {
            if let Some(h) = self.holders.get(&first.order_id) {
                // A part already rides elsewhere: keep the order on that vehicle.
                if h.len() == 1 {
                    excluded = (0..self.len()).filter(|v| !h.contains(v)).collect();
                }
            }
        }
        let backup = if chunks.len() > 1 { Some(self.clone_state()) } else { None };
        for c in &chunks {
            let pickups: Vec<ItemId> = c.iter().map(|i| i.id.clone()).collect();
            let deliveries = [delivery_stop(&first.delivery_factory_id, pickups.iter().rev().cloned().collect())];
            let Some(q) = self.best(&first.pickup_factory_id, &pickups, &deliveries, &excluded) else {
                if let Some(state) = backup {
                    self.restore(state);
                }
                return false;
            };
            let [d] = deliveries;
            self.append(q.vehicle, &first.pickup_factory_id, &pickups, alloc::vec![d]);
        }
        true
    }

    fn clone_state(&self) -> (Vec<VehiclePlan>, Vec<Tail>, BTreeMap<OrderId, BTreeSet<usize>>) {
        (self.plans.clone(), self.tails.clone(), self.holders.clone())
    }

    fn restore(&mut self, (plans, tails, holders): (Vec<VehiclePlan>, Vec<Tail>, BTreeMap<OrderId, BTreeSet<usize>>)) {
        self.plans = plans;
        self.tails = tails;
        self.holders = holders;
    }

    /// The plan with estimated times filled in.
    pub fn into_plan(self) -> DispatchPlan {
        let planner = self.planner;
        let vehicles = self
            .plans
            .into_iter()
            .enumerate()
            .map(|(v, mut plan)| {
                planner.annotate(v, &mut plan);
                (planner.view(v).id.clone(), plan)
            })
            .collect();
        DispatchPlan { vehicles }
    }
}

pub(crate) fn push_stop(plan: &mut VehiclePlan, stop: Stop) {
    if plan.destination.is_none() {
        plan.destination = Some(stop);
    } else {
        plan.route.push(stop);
    }
}

pub(crate) fn delivery_stop(factory: &FactoryId, items: Vec<ItemId>) -> Stop {
    let mut stop = Stop::new(factory.clone());
    stop.delivery_items = items;
    stop
}

/// Splits items (in order) into consecutive runs of at most `capacity`.
pub(crate) fn chunk<'i>(items: &[&'i ItemInfo], capacity: Quarters) -> Vec<Vec<&'i ItemInfo>> {
    let total: Quarters = items.iter().map(|i| i.demand).sum();
    if total <= capacity {
        return alloc::vec![items.to_vec()];
    }
    let mut out: Vec<Vec<&ItemInfo>> = Vec::new();
    let mut load = Quarters::ZERO;
    for &item in items {
        match out.last_mut() {
            Some(last) if load + item.demand <= capacity => {
                last.push(item);
                load += item.demand;
            }
            _ => {
                out.push(alloc::vec![item]);
                load = item.demand;
            }
        }
    }
    out
}

/// Unallocated items grouped by order, orders sorted by committed time,
/// then creation time, then id. Items keep snapshot order.
pub(crate) fn pending_orders<'a>(planner: &Planner<'a>) -> Vec<Vec<&'a ItemInfo>> {
    let mut by_order: BTreeMap<&OrderId, Vec<&ItemInfo>> = BTreeMap::new();
    for info in &planner.snapshot.unallocated_items {
        by_order.entry(&info.order_id).or_default().push(info);
    }
    let mut orders: Vec<Vec<&ItemInfo>> = by_order.into_values().collect();
    orders.sort_by(|a, b| {
        let key = |o: &Vec<&ItemInfo>| (o[0].committed_completion_time, o[0].creation_time, o[0].order_id.clone());
        key(a).cmp(&key(b))
    });
    orders
}
