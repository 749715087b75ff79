//! Route timing and feasibility helpers shared by the policies.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::config::{CompletionSemantics, SimConfig};
use crate::domain::{FactoryId, ItemId, OrderId, Quarters, RoadNetwork};
use crate::eval::StackWalker;
use crate::plan::{Stop, VehiclePlan};
use crate::sim::PlanningContext;
use crate::snapshot::{ItemInfo, PositionView, Snapshot, VehicleView};
use crate::Seconds;

/// Where and when a vehicle becomes free to follow its editable stops.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) struct Anchor {
    pub factory: usize,
    pub time: Seconds,
}

/// The fixed part of a vehicle's situation.
#[derive(Clone, Debug)]
pub(crate) struct Frame<'a> {
    pub anchor: Anchor,
    /// Cargo after the frozen stops, bottom first. The flag marks items
    /// loaded by a frozen stop that the editable stops must deliver.
    pub cargo: Vec<(&'a ItemId, bool)>,
    /// Number of leading plan stops that are frozen.
    pub frozen: usize,
    /// Factory the first editable stop must use, if any.
    pub locked_first: Option<usize>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub(crate) struct RouteCost {
    pub distance: f64,
    pub travel_time: Seconds,
    pub lateness: Seconds,
    pub end: Option<Anchor>,
}

/// A stop visit on the estimated timeline: factory, arrival, service time.
pub(crate) type Visit = (usize, Seconds, Seconds);

pub(crate) struct Planner<'a> {
    pub network: &'a RoadNetwork,
    pub config: &'a SimConfig,
    pub snapshot: &'a Snapshot,
    pub items: BTreeMap<&'a ItemId, &'a ItemInfo>,
}

impl<'a> Planner<'a> {
    pub fn new(ctx: &PlanningContext<'a>, snapshot: &'a Snapshot) -> Self {
        Planner {
            network: ctx.network,
            config: ctx.config,
            snapshot,
            items: snapshot.items().map(|i| (&i.id, i)).collect(),
        }
    }

    pub fn idx(&self, f: &FactoryId) -> usize {
        self.network.index_of(f).expect("snapshot factories are in the network")
    }

    pub fn info(&self, id: &ItemId) -> &'a ItemInfo {
        self.items[id]
    }

    pub fn demand(&self, id: &ItemId) -> Option<Quarters> {
        self.items.get(id).map(|i| i.demand)
    }

    pub fn view(&self, v: usize) -> &'a VehicleView {
        &self.snapshot.vehicles[v]
    }

    pub fn service(&self, stop: &Stop) -> Seconds {
        if stop.is_empty() {
            return 0;
        }
        let unload: Seconds = stop.delivery_items.iter().map(|i| self.items.get(i).map_or(0, |i| i.unload_time)).sum();
        let load: Seconds = stop.pickup_items.iter().map(|i| self.items.get(i).map_or(0, |i| i.load_time)).sum();
        self.config.dock_approach_time + unload + load
    }

    /// Current plans in fleet order.
    pub fn current_plans(&self) -> Vec<VehiclePlan> {
        self.snapshot
            .vehicles
            .iter()
            .map(|v| VehiclePlan { destination: v.destination.clone(), route: v.route.clone() })
            .collect()
    }

    /// Frame of vehicle `v` under `plan`. With `freeze_destination`, an
    /// in-transit destination counts as frozen; otherwise only its factory
    /// is locked.
    pub fn frame<'p>(&self, v: usize, plan: &'p VehiclePlan, freeze_destination: bool) -> Frame<'p>
    where
        'a: 'p,
    {
        let view = self.view(v);
        let mut cargo: Vec<(&'p ItemId, bool)> = view.carrying_items.iter().map(|id| (id, false)).collect();
        match view.position() {
            Some(PositionView::AtFactory { factory, .. }) => {
                let stop = plan.destination.as_ref().expect("committed stop is echoed");
                replay_stop(&mut cargo, stop);
                let anchor = Anchor { factory: self.idx(factory), time: view.leave_time.max(self.snapshot.now) };
                Frame { anchor, cargo, frozen: 1, locked_first: None }
            }
            Some(PositionView::InTransit { destination, eta }) => {
                let factory = self.idx(&destination.factory_id);
                if freeze_destination {
                    let stop = plan.destination.as_ref().expect("in-transit destination is echoed");
                    replay_stop(&mut cargo, stop);
                    let anchor = Anchor { factory, time: eta + self.service(stop) };
                    Frame { anchor, cargo, frozen: 1, locked_first: None }
                } else {
                    Frame { anchor: Anchor { factory, time: eta }, cargo, frozen: 0, locked_first: Some(factory) }
                }
            }
            Some(PositionView::Parked { .. }) | None => {
                let factory = view.cur_factory_id.as_ref().map_or(0, |f| self.idx(f));
                Frame { anchor: Anchor { factory, time: self.snapshot.now }, cargo, frozen: 0, locked_first: None }
            }
        }
    }

    /// Estimated cost of visiting `stops` from `anchor`, with `margin`
    /// seconds added to every completion before measuring lateness.
    pub fn evaluate<'s>(
        &self,
        anchor: Anchor,
        stops: impl IntoIterator<Item = &'s Stop>,
        margin: Seconds,
        mut visits: Option<&mut Vec<Visit>>,
    ) -> RouteCost {
        let mut loc = anchor.factory;
        let mut t = anchor.time;
        let mut distance = 0.0;
        let mut travel_time = 0;
        let mut done: Vec<(&OrderId, Seconds, Seconds)> = Vec::new();
        for stop in stops {
            let f = self.idx(&stop.factory_id);
            distance += self.network.distance_idx(loc, f);
            let leg = self.network.travel_time_idx(loc, f);
            travel_time += leg;
            let arrive = t + leg;
            let mut cursor = arrive;
            if !stop.is_empty() {
                cursor += self.config.dock_approach_time;
                for id in &stop.delivery_items {
                    let Some(info) = self.items.get(id) else { continue };
                    cursor += info.unload_time;
                    let at = match self.config.completion {
                        CompletionSemantics::UnloadDone => cursor,
                        CompletionSemantics::Arrival => arrive,
                    };
                    match done.iter_mut().find(|d| *d.0 == info.order_id) {
                        Some(d) => d.1 = d.1.max(at),
                        None => done.push((&info.order_id, at, info.committed_completion_time)),
                    }
                }
                for id in &stop.pickup_items {
                    cursor += self.items.get(id).map_or(0, |i| i.load_time);
                }
                if let Some(v) = visits.as_deref_mut() {
                    v.push((f, arrive, cursor - arrive));
                }
            }
            loc = f;
            t = cursor;
        }
        let lateness = done.iter().map(|(_, at, committed)| (at + margin - committed).max(0)).sum();
        RouteCost { distance, travel_time, lateness, end: Some(Anchor { factory: loc, time: t }) }
    }

    /// Whether `stops` can follow `frame` for vehicle `v`: LIFO and
    /// capacity hold, every item loaded on the way is delivered, and so is
    /// everything the frozen stops loaded.
    pub fn feasible<'s>(&self, v: usize, frame: &Frame<'_>, stops: impl IntoIterator<Item = &'s Stop>) -> bool {
        self.feasible_from(v, &frame.cargo, frame.locked_first, stops)
    }

    pub fn feasible_from<'s>(
        &self,
        v: usize,
        cargo: &[(&ItemId, bool)],
        locked_first: Option<usize>,
        stops: impl IntoIterator<Item = &'s Stop>,
    ) -> bool {
        let mut walker = StackWalker::new(
            self.view(v).capacity_quarters(),
            cargo.iter().map(|(id, _)| (*id, self.demand(id).unwrap_or_default())),
        );
        let mut ok = true;
        let demand = |id: &ItemId| self.demand(id);
        for (k, stop) in stops.into_iter().enumerate() {
            if k == 0 && locked_first.is_some_and(|f| self.idx(&stop.factory_id) != f) {
                return false;
            }
            walker.visit(&stop.delivery_items, &stop.pickup_items, demand, |_| ok = false);
            if !ok {
                return false;
            }
        }
        if cargo.iter().any(|(id, must)| *must && walker.stack().any(|s| s == *id)) {
            return false;
        }
        walker.finish(|_| ok = false);
        ok
    }

    /// Load left on board after the editable stops.
    pub fn end_load<'s>(&self, frame: &Frame<'_>, stops: impl IntoIterator<Item = &'s Stop>) -> Quarters {
        let mut walker = StackWalker::new(
            Quarters(u32::MAX),
            frame.cargo.iter().map(|(id, _)| (*id, self.demand(id).unwrap_or_default())),
        );
        let demand = |id: &ItemId| self.demand(id);
        for stop in stops {
            walker.visit(&stop.delivery_items, &stop.pickup_items, demand, |_| {});
        }
        walker.load()
    }

    /// Fills in estimated arrive/leave times on every editable stop.
    pub fn annotate(&self, v: usize, plan: &mut VehiclePlan) {
        let view = self.view(v);
        let mut loc;
        let mut t;
        let skip;
        match view.position() {
            Some(PositionView::AtFactory { factory, .. }) => {
                loc = self.idx(factory);
                t = view.leave_time;
                skip = 1;
            }
            Some(PositionView::InTransit { destination, eta }) => {
                loc = self.idx(&destination.factory_id);
                t = eta;
                skip = 0;
            }
            _ => {
                loc = view.cur_factory_id.as_ref().map_or(0, |f| self.idx(f));
                t = self.snapshot.now;
                skip = 0;
            }
        }
        let stops = plan.destination.iter_mut().chain(plan.route.iter_mut());
        for (k, stop) in stops.enumerate() {
            if k < skip {
                continue;
            }
            let f = self.idx(&stop.factory_id);
            let arrive = t + self.network.travel_time_idx(loc, f);
            stop.arrive_time = arrive;
            stop.leave_time = arrive + self.service(stop);
            loc = f;
            t = stop.leave_time;
        }
    }
}

/// Applies a frozen stop to a cargo stack: deliveries leave, pickups not
/// yet on board are pushed and flagged.
fn replay_stop<'a>(cargo: &mut Vec<(&'a ItemId, bool)>, stop: &'a Stop) {
    for id in &stop.delivery_items {
        if let Some(pos) = cargo.iter().rposition(|(c, _)| *c == id) {
            cargo.remove(pos);
        }
    }
    for id in &stop.pickup_items {
        if !cargo.iter().any(|(c, _)| *c == id) {
            cargo.push((id, true));
        }
    }
}

/// Total queueing time if every visit is served first come first served at
/// its factory's docks. Later stops are not shifted by the waits.
pub(crate) fn dock_wait(network: &RoadNetwork, visits: &mut [Visit]) -> Seconds {
    visits.sort_unstable();
    let mut total = 0;
    let mut start = 0;
    while start < visits.len() {
        let f = visits[start].0;
        let end = start + visits[start..].iter().take_while(|v| v.0 == f).count();
        let docks = network.factory(f).dock_count.max(1) as usize;
        let mut free: Vec<Seconds> = alloc::vec![Seconds::MIN; docks];
        for &(_, arrive, service) in &visits[start..end] {
            let (slot, at) = free.iter().copied().enumerate().min_by_key(|&(_, t)| t).expect("docks > 0");
            let begin = arrive.max(at);
            total += begin - arrive;
            free[slot] = begin + service;
        }
        start = end;
    }
    total
}
