use alloc::collections::{BTreeMap, BinaryHeap, VecDeque};
use alloc::vec::Vec;
use core::cmp::Reverse;

use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::event::{EventKind, EventLog};
use super::run::PolicyError;
use crate::config::{CompletionSemantics, ServiceTimes, SimConfig};
use crate::domain::{
    explode_order, explode_order_with_table_times, ItemId, ItemStatus, OrderId, OrderItem, Quarters, VehicleId,
};
use crate::eval::{normalized_plan, validate_dispatch, Violation};
use crate::instance::Instance;
use crate::plan::{DispatchPlan, Stop};
use crate::rng::KeyHasher;
use crate::snapshot::{ItemInfo, Snapshot, VehicleView};
use crate::Seconds;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "reason", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum AbortReason {
    /// An order stayed unassigned past the dispatch deadline.
    DispatchDeadline { order_id: OrderId, epoch: u32, time: Seconds },
    /// `max_epochs` elapsed with orders still open.
    HorizonExceeded { epoch: u32 },
    /// The dispatcher returned a plan that failed validation.
    Validation { epoch: u32, violations: Vec<Violation> },
    /// The dispatcher failed to produce a plan.
    Policy { epoch: u32, error: PolicyError },
}

#[derive(Clone, Debug, PartialEq)]
pub enum EpochOutcome {
    Continue(Snapshot),
    Finished,
    Aborted(AbortReason),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum RunOutcome {
    Finished,
    Aborted(AbortReason),
}

/// Totals tracked by the engine while it runs; the primary scoring input.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RunLedger {
    pub completions: BTreeMap<OrderId, Seconds>,
    pub distances: BTreeMap<VehicleId, f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum Action {
    Release(usize),
    Unload { vehicle: usize, item: usize },
    Load { vehicle: usize, item: usize },
    ServiceDone(usize),
    ShiftOpen(usize),
    Arrive(usize),
}

impl Action {
    /// Same-time ordering: releases, service progress (frees docks), shift
    /// openings, then arrivals.
    fn class(&self) -> u8 {
        match self {
            Action::Release(_) => 0,
            Action::Unload { .. } | Action::Load { .. } | Action::ServiceDone(_) => 1,
            Action::ShiftOpen(_) => 2,
            Action::Arrive(_) => 3,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
struct Scheduled {
    time: Seconds,
    class: u8,
    seq: u64,
    action: Action,
}

#[derive(Clone, Debug)]
struct ItemRt {
    item: OrderItem,
    order: usize,
    assigned: bool,
}

#[derive(Clone, Debug)]
struct OrderRt {
    released: bool,
    remaining: usize,
    latest_arrival: Seconds,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum DockPhase {
    Queued,
    Serving { end: Seconds },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Position {
    Parked { factory: usize },
    AtFactory { factory: usize, phase: DockPhase },
    InTransit { to: usize, eta: Seconds },
}

#[derive(Clone, Debug)]
struct Committed {
    stop: Stop,
    deliveries: Vec<usize>,
    pickups: Vec<usize>,
}

#[derive(Clone, Debug)]
struct VehicleRt {
    position: Position,
    /// Item indices, bottom first.
    cargo: Vec<usize>,
    load: Quarters,
    committed: Option<Committed>,
    /// Future stops. In transit, the first one is the locked destination.
    plan: Vec<Stop>,
    arrive_time: Seconds,
    leave_time: Seconds,
}

#[derive(Clone, Debug, Default)]
struct DockRt {
    in_use: u32,
    queue: VecDeque<usize>,
    wake_scheduled: bool,
}

#[derive(Clone, Debug, PartialEq)]
enum Status {
    Running,
    Finished,
    Aborted(AbortReason),
}

/// Single-owner simulation state machine.
#[derive(Clone, Debug)]
pub struct SimState {
    instance: Instance,
    now: Seconds,
    epoch: u32,
    items: Vec<ItemRt>,
    item_index: BTreeMap<ItemId, usize>,
    orders: Vec<OrderRt>,
    vehicles: Vec<VehicleRt>,
    docks: Vec<DockRt>,
    agenda: BinaryHeap<Reverse<Scheduled>>,
    seq: u64,
    log: EventLog,
    ledger: RunLedger,
    status: Status,
}

impl SimState {
    /// Places every vehicle at a random factory (seeded by
    /// `config.rng_seed`) and releases orders created at time 0.
    pub fn new(instance: Instance) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(instance.config.rng_seed);
        let n = instance.network.len();
        let placement: Vec<usize> = instance.fleet.iter().map(|_| rng.gen_range(0..n)).collect();
        Self::start(instance, placement)
    }

    /// Like [`SimState::new`] with explicit start factories, one per vehicle
    /// in fleet order. `None` if the count or an id does not match.
    pub fn with_placement(instance: Instance, placement: &[crate::domain::FactoryId]) -> Option<Self> {
        if placement.len() != instance.fleet.len() {
            return None;
        }
        let idx: Option<Vec<usize>> = placement.iter().map(|f| instance.network.index_of(f)).collect();
        Some(Self::start(instance, idx?))
    }

    fn start(instance: Instance, placement: Vec<usize>) -> Self {
        let config = &instance.config;
        let mut items = Vec::new();
        let mut item_index = BTreeMap::new();
        let mut orders = Vec::with_capacity(instance.orders.len());
        for (k, order) in instance.orders.iter().enumerate() {
            let exploded = match config.service_times {
                ServiceTimes::Omega => explode_order(order, config.omega),
                ServiceTimes::OrderTable => explode_order_with_table_times(order),
            }
            .expect("instance orders are validated non-empty");
            orders.push(OrderRt { released: false, remaining: exploded.len(), latest_arrival: 0 });
            for mut item in exploded {
                item.status = ItemStatus::Initialized;
                item_index.insert(item.id.clone(), items.len());
                items.push(ItemRt { item, order: k, assigned: false });
            }
        }

        let n = instance.network.len();
        let mut log = EventLog::default();
        let mut ledger = RunLedger::default();
        let vehicles = instance
            .fleet
            .iter()
            .zip(placement)
            .map(|(v, factory)| {
                log.push(
                    0,
                    EventKind::VehicleArrived {
                        vehicle_id: v.id.clone(),
                        factory_id: instance.network.factory(factory).id.clone(),
                    },
                );
                ledger.distances.insert(v.id.clone(), 0.0);
                VehicleRt {
                    position: Position::Parked { factory },
                    cargo: Vec::new(),
                    load: Quarters::ZERO,
                    committed: None,
                    plan: Vec::new(),
                    arrive_time: 0,
                    leave_time: 0,
                }
            })
            .collect();

        let mut state = SimState {
            docks: alloc::vec![DockRt::default(); n],
            instance,
            now: 0,
            epoch: 0,
            items,
            item_index,
            orders,
            vehicles,
            agenda: BinaryHeap::new(),
            seq: 0,
            log,
            ledger,
            status: Status::Running,
        };
        for k in 0..state.instance.orders.len() {
            let t = state.instance.orders[k].creation_time;
            state.schedule(t, Action::Release(k));
        }
        state.process_while(|t| t <= 0);
        state
    }

    pub fn now(&self) -> Seconds {
        self.now
    }

    pub fn epoch(&self) -> u32 {
        self.epoch
    }

    pub fn instance(&self) -> &Instance {
        &self.instance
    }

    pub fn config(&self) -> &SimConfig {
        &self.instance.config
    }

    pub fn log(&self) -> &EventLog {
        &self.log
    }

    pub fn ledger(&self) -> &RunLedger {
        &self.ledger
    }

    pub fn is_running(&self) -> bool {
        self.status == Status::Running
    }

    /// Number of orders whose items have all been delivered.
    pub fn orders_completed(&self) -> usize {
        self.ledger.completions.len()
    }

    fn schedule(&mut self, time: Seconds, action: Action) {
        self.seq += 1;
        self.agenda.push(Reverse(Scheduled { time, class: action.class(), seq: self.seq, action }));
    }

    fn factory_id(&self, idx: usize) -> &crate::domain::FactoryId {
        &self.instance.network.factory(idx).id
    }

    fn vehicle_id(&self, v: usize) -> &VehicleId {
        &self.instance.fleet[v].id
    }

    fn service_time(&self, deliveries: &[usize], pickups: &[usize]) -> Seconds {
        if deliveries.is_empty() && pickups.is_empty() {
            return 0;
        }
        self.instance.config.dock_approach_time
            + deliveries.iter().map(|&i| self.items[i].item.unload_time).sum::<Seconds>()
            + pickups.iter().map(|&i| self.items[i].item.load_time).sum::<Seconds>()
    }

    fn stop_indices(&self, stop: &Stop) -> (Vec<usize>, Vec<usize>) {
        let map = |ids: &[ItemId]| ids.iter().map(|id| self.item_index[id]).collect();
        (map(&stop.delivery_items), map(&stop.pickup_items))
    }

    fn item_info(&self, rt: &ItemRt) -> ItemInfo {
        let order = &self.instance.orders[rt.order];
        ItemInfo {
            id: rt.item.id.clone(),
            pallet_type: rt.item.pallet_type,
            order_id: rt.item.order_id.clone(),
            demand: rt.item.demand,
            pickup_factory_id: order.pickup.clone(),
            delivery_factory_id: order.delivery.clone(),
            creation_time: order.creation_time,
            committed_completion_time: order.committed_completion_time,
            load_time: rt.item.load_time,
            unload_time: rt.item.unload_time,
            status: rt.item.status,
        }
    }

    fn vehicle_view(&self, v: usize) -> VehicleView {
        let rt = &self.vehicles[v];
        let vehicle = &self.instance.fleet[v];
        let (cur_factory_id, leave_time, destination, route) = match rt.position {
            Position::Parked { factory } => (Some(self.factory_id(factory).clone()), rt.leave_time, None, rt.plan.clone()),
            Position::AtFactory { factory, phase } => {
                let committed = rt.committed.as_ref().expect("vehicle at factory has a committed stop");
                let leave = match phase {
                    DockPhase::Serving { end } => end,
                    DockPhase::Queued => {
                        self.now + self.service_time(&committed.deliveries, &committed.pickups)
                    }
                };
                let mut stop = committed.stop.clone();
                stop.arrive_time = rt.arrive_time;
                stop.leave_time = leave;
                (Some(self.factory_id(factory).clone()), leave, Some(stop), rt.plan.clone())
            }
            Position::InTransit { eta, .. } => {
                let mut dest = rt.plan[0].clone();
                let (d, p) = self.stop_indices(&dest);
                dest.arrive_time = eta;
                dest.leave_time = eta + self.service_time(&d, &p);
                (None, rt.leave_time, Some(dest), rt.plan[1..].to_vec())
            }
        };
        VehicleView {
            id: vehicle.id.clone(),
            operation_time: vehicle.operation_time,
            capacity: vehicle.capacity,
            update_time: self.now,
            cur_factory_id,
            arrive_time: rt.arrive_time,
            leave_time,
            carrying_items: rt.cargo.iter().map(|&i| self.items[i].item.id.clone()).collect(),
            destination,
            route,
        }
    }

    /// Pure view of the current state.
    pub fn snapshot(&self) -> Snapshot {
        let mut unallocated_items = Vec::new();
        let mut ongoing_items = Vec::new();
        for rt in &self.items {
            match rt.item.status {
                ItemStatus::Generated if !rt.assigned => unallocated_items.push(self.item_info(rt)),
                ItemStatus::Generated | ItemStatus::Loaded => ongoing_items.push(self.item_info(rt)),
                _ => {}
            }
        }
        Snapshot {
            now: self.now,
            vehicles: (0..self.vehicles.len()).map(|v| self.vehicle_view(v)).collect(),
            unallocated_items,
            ongoing_items,
        }
    }

    /// Validates and installs a plan. On rejection the state is unchanged.
    pub fn apply_dispatch(&mut self, plan: &DispatchPlan) -> Result<(), Vec<Violation>> {
        let snapshot = self.snapshot();
        validate_dispatch(&self.instance.network, &snapshot, plan)?;
        for (v, (_, vplan)) in normalized_plan(&snapshot, plan).into_iter().enumerate() {
            let stops: Vec<Stop> = vplan.destination.into_iter().chain(vplan.route).collect();
            match self.vehicles[v].position {
                Position::InTransit { .. } | Position::Parked { .. } => self.vehicles[v].plan = stops,
                Position::AtFactory { .. } => self.vehicles[v].plan = stops.into_iter().skip(1).collect(),
            }
            if matches!(self.vehicles[v].position, Position::Parked { .. }) && !self.vehicles[v].plan.is_empty() {
                let now = self.now;
                self.depart(v, now);
            }
        }
        self.refresh_assignments();
        Ok(())
    }

    fn refresh_assignments(&mut self) {
        for rt in &mut self.items {
            rt.assigned = false;
        }
        let mut marks = Vec::new();
        for rt in &self.vehicles {
            let committed = rt.committed.iter().map(|c| &c.stop);
            for stop in committed.chain(rt.plan.iter()) {
                marks.extend(stop.pickup_items.iter().map(|id| self.item_index[id]));
            }
        }
        for k in marks {
            self.items[k].assigned = true;
        }
    }

    /// Simulates one epoch.
    pub fn advance_epoch(&mut self) -> EpochOutcome {
        match &self.status {
            Status::Finished => return EpochOutcome::Finished,
            Status::Aborted(r) => return EpochOutcome::Aborted(r.clone()),
            Status::Running => {}
        }
        let end = self.now + self.instance.config.epoch_length;
        self.process_while(|t| t < end);
        self.now = end;
        let epoch = self.epoch;
        self.log.push(end, EventKind::EpochBoundary { epoch });
        self.epoch += 1;

        if self.orders.iter().all(|o| o.released && o.remaining == 0) {
            self.status = Status::Finished;
            return EpochOutcome::Finished;
        }
        let deadline = self.instance.config.dispatch_deadline;
        let late = self.items.iter().find(|rt| {
            rt.item.status == ItemStatus::Generated
                && !rt.assigned
                && end - self.instance.orders[rt.order].creation_time > deadline
        });
        if let Some(rt) = late {
            let reason = AbortReason::DispatchDeadline { order_id: rt.item.order_id.clone(), epoch, time: end };
            return self.abort(reason);
        }
        if self.epoch >= self.instance.config.max_epochs {
            return self.abort(AbortReason::HorizonExceeded { epoch });
        }
        EpochOutcome::Continue(self.snapshot())
    }

    /// Stops the run; later calls to `advance_epoch` report the same reason.
    pub fn abort(&mut self, reason: AbortReason) -> EpochOutcome {
        self.status = Status::Aborted(reason.clone());
        EpochOutcome::Aborted(reason)
    }

    pub fn outcome(&self) -> Option<RunOutcome> {
        match &self.status {
            Status::Running => None,
            Status::Finished => Some(RunOutcome::Finished),
            Status::Aborted(r) => Some(RunOutcome::Aborted(r.clone())),
        }
    }

    pub fn into_parts(self) -> (EventLog, RunLedger, Option<RunOutcome>, u32) {
        let outcome = self.outcome();
        (self.log, self.ledger, outcome, self.epoch)
    }

    fn process_while(&mut self, before: impl Fn(Seconds) -> bool) {
        while let Some(Reverse(next)) = self.agenda.peek().copied() {
            if !before(next.time) {
                break;
            }
            self.agenda.pop();
            if let Action::Arrive(v) = next.action {
                let mut batch = alloc::vec![v];
                while let Some(Reverse(more)) = self.agenda.peek().copied() {
                    match more.action {
                        Action::Arrive(w) if more.time == next.time => {
                            self.agenda.pop();
                            batch.push(w);
                        }
                        _ => break,
                    }
                }
                self.arrive_batch(next.time, batch);
                continue;
            }
            match next.action {
                Action::Release(o) => self.release(o, next.time),
                Action::Unload { vehicle, item } => self.unload(vehicle, item, next.time),
                Action::Load { vehicle, item } => self.load(vehicle, item, next.time),
                Action::ServiceDone(v) => self.service_done(v, next.time),
                Action::ShiftOpen(f) => {
                    self.docks[f].wake_scheduled = false;
                    self.try_allocate(f, next.time);
                }
                Action::Arrive(_) => unreachable!(),
            }
        }
    }

    fn release(&mut self, o: usize, t: Seconds) {
        self.orders[o].released = true;
        for rt in self.items.iter_mut().filter(|rt| rt.order == o) {
            rt.item.status = rt.item.status.advance(ItemStatus::Generated).expect("release happens once");
        }
        self.log.push(t, EventKind::OrderReleased { order_id: self.instance.orders[o].id.clone() });
    }

    fn depart(&mut self, v: usize, t: Seconds) {
        let from = match self.vehicles[v].position {
            Position::Parked { factory } | Position::AtFactory { factory, .. } => factory,
            Position::InTransit { .. } => panic!("vehicle {} departs while in transit", self.vehicle_id(v)),
        };
        let to_id = &self.vehicles[v].plan[0].factory_id;
        let to = self.instance.network.index_of(to_id).expect("validated factory");
        let network = &self.instance.network;
        let eta = t + network.travel_time_idx(from, to);
        *self.ledger.distances.get_mut(&self.instance.fleet[v].id).expect("vehicle in ledger") +=
            network.distance_idx(from, to);
        self.log.push(
            t,
            EventKind::VehicleDeparted {
                vehicle_id: self.vehicle_id(v).clone(),
                from_factory_id: self.factory_id(from).clone(),
                to_factory_id: self.factory_id(to).clone(),
            },
        );
        let rt = &mut self.vehicles[v];
        rt.leave_time = t;
        rt.position = Position::InTransit { to, eta };
        self.schedule(eta, Action::Arrive(v));
    }

    fn arrive_batch(&mut self, t: Seconds, mut batch: Vec<usize>) {
        batch.sort_unstable();
        let mut arrivals: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for v in batch {
            let Position::InTransit { to, eta } = self.vehicles[v].position else {
                panic!("arrival for vehicle {} that is not in transit", self.vehicle_id(v));
            };
            assert_eq!(eta, t, "arrival time differs from eta");
            self.log.push(
                t,
                EventKind::VehicleArrived { vehicle_id: self.vehicle_id(v).clone(), factory_id: self.factory_id(to).clone() },
            );
            let stop = self.vehicles[v].plan.remove(0);
            assert_eq!(stop.factory_id, *self.factory_id(to), "destination changed in transit");
            let (deliveries, pickups) = self.stop_indices(&stop);
            let rt = &mut self.vehicles[v];
            rt.arrive_time = t;
            if stop.is_empty() {
                rt.position = Position::AtFactory { factory: to, phase: DockPhase::Serving { end: t } };
                self.finish_stop(v, to, t);
            } else {
                rt.committed = Some(Committed { stop, deliveries, pickups });
                rt.position = Position::AtFactory { factory: to, phase: DockPhase::Queued };
                arrivals.entry(to).or_default().push(v);
            }
        }
        for (f, mut group) in arrivals {
            if group.len() > 1 {
                // Simultaneous arrivals: random but reproducible order.
                let mut key = KeyHasher::new(self.instance.config.rng_seed);
                key.write_str(self.factory_id(f).as_str());
                key.write(&t.to_le_bytes());
                for &v in &group {
                    key.write_str(self.vehicle_id(v).as_str());
                }
                group.shuffle(&mut key.rng());
            }
            self.docks[f].queue.extend(group);
            self.try_allocate(f, t);
        }
    }

    fn try_allocate(&mut self, f: usize, t: Seconds) {
        let open = self.instance.config.next_shift_open(t);
        if open > t {
            if !self.docks[f].queue.is_empty() && !self.docks[f].wake_scheduled {
                self.docks[f].wake_scheduled = true;
                self.schedule(open, Action::ShiftOpen(f));
            }
            return;
        }
        let capacity = self.instance.network.factory(f).dock_count;
        while self.docks[f].in_use < capacity {
            let Some(v) = self.docks[f].queue.pop_front() else { break };
            self.allocate(v, f, t);
        }
    }

    fn allocate(&mut self, v: usize, f: usize, t: Seconds) {
        self.docks[f].in_use += 1;
        self.log.push(
            t,
            EventKind::DockAllocated { vehicle_id: self.vehicle_id(v).clone(), factory_id: self.factory_id(f).clone() },
        );
        let committed = self.vehicles[v].committed.clone().expect("queued vehicle has a committed stop");
        let mut cursor = t + self.instance.config.dock_approach_time;
        for &item in &committed.deliveries {
            cursor += self.items[item].item.unload_time;
            self.schedule(cursor, Action::Unload { vehicle: v, item });
        }
        for &item in &committed.pickups {
            cursor += self.items[item].item.load_time;
            self.schedule(cursor, Action::Load { vehicle: v, item });
        }
        self.schedule(cursor, Action::ServiceDone(v));
        self.vehicles[v].position = Position::AtFactory { factory: f, phase: DockPhase::Serving { end: cursor } };
    }

    fn current_factory(&self, v: usize) -> usize {
        match self.vehicles[v].position {
            Position::AtFactory { factory, .. } | Position::Parked { factory } => factory,
            Position::InTransit { .. } => panic!("vehicle {} is not at a factory", self.vehicle_id(v)),
        }
    }

    fn unload(&mut self, v: usize, item: usize, t: Seconds) {
        let f = self.current_factory(v);
        let rt = &mut self.vehicles[v];
        assert_eq!(rt.cargo.last(), Some(&item), "LIFO breach: unloading an item that is not on top");
        rt.cargo.pop();
        rt.load -= self.items[item].item.demand;
        let arrive = rt.arrive_time;
        let it = &mut self.items[item];
        it.item.status = it.item.status.advance(ItemStatus::Delivered).expect("unload follows load");
        let order = it.order;
        self.log.push(
            t,
            EventKind::ItemDelivered {
                vehicle_id: self.vehicle_id(v).clone(),
                factory_id: self.factory_id(f).clone(),
                item_id: self.items[item].item.id.clone(),
            },
        );
        let o = &mut self.orders[order];
        o.remaining -= 1;
        o.latest_arrival = o.latest_arrival.max(arrive);
        if o.remaining == 0 {
            let done = match self.instance.config.completion {
                CompletionSemantics::UnloadDone => t,
                CompletionSemantics::Arrival => o.latest_arrival,
            };
            self.ledger.completions.insert(self.instance.orders[order].id.clone(), done);
        }
    }

    fn load(&mut self, v: usize, item: usize, t: Seconds) {
        let f = self.current_factory(v);
        let capacity = self.instance.fleet[v].capacity_quarters();
        let it = &mut self.items[item];
        it.item.status = it.item.status.advance(ItemStatus::Loaded).expect("load follows release");
        let demand = it.item.demand;
        let rt = &mut self.vehicles[v];
        rt.cargo.push(item);
        rt.load += demand;
        assert!(rt.load <= capacity, "capacity breach on vehicle {}", self.instance.fleet[v].id);
        self.log.push(
            t,
            EventKind::ItemLoaded {
                vehicle_id: self.vehicle_id(v).clone(),
                factory_id: self.factory_id(f).clone(),
                item_id: self.items[item].item.id.clone(),
            },
        );
    }

    fn service_done(&mut self, v: usize, t: Seconds) {
        let f = self.current_factory(v);
        self.docks[f].in_use -= 1;
        self.log.push(
            t,
            EventKind::ServiceDone { vehicle_id: self.vehicle_id(v).clone(), factory_id: self.factory_id(f).clone() },
        );
        self.vehicles[v].committed = None;
        self.try_allocate(f, t);
        self.finish_stop(v, f, t);
    }

    fn finish_stop(&mut self, v: usize, f: usize, t: Seconds) {
        self.vehicles[v].leave_time = t;
        if self.vehicles[v].plan.is_empty() {
            self.vehicles[v].position = Position::Parked { factory: f };
        } else {
            self.depart(v, t);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{Order, PalletQuantity};
    use crate::plan::VehiclePlan;
    use crate::testkit::{fid, instance, order, vid};
    use crate::ViolationCode;
    use alloc::vec;

    fn stop(f: usize, pick: &[&str], del: &[&str]) -> Stop {
        let mut s = Stop::new(fid(f));
        s.pickup_items = pick.iter().map(|i| ItemId::from(*i)).collect();
        s.delivery_items = del.iter().map(|i| ItemId::from(*i)).collect();
        s
    }

    fn plan(entries: Vec<(usize, Vec<Stop>)>) -> DispatchPlan {
        let vehicles = entries
            .into_iter()
            .map(|(k, stops)| {
                let mut it = stops.into_iter();
                (vid(k), VehiclePlan { destination: it.next(), route: it.collect() })
            })
            .collect();
        DispatchPlan { vehicles }
    }

    fn one_pallet() -> PalletQuantity {
        PalletQuantity::new(1, 0, 0)
    }

    fn kinds(log: &EventLog) -> Vec<(Seconds, &'static str)> {
        log.iter()
            .map(|e| {
                let k = match &e.kind {
                    EventKind::OrderReleased { .. } => "release",
                    EventKind::VehicleArrived { .. } => "arrive",
                    EventKind::DockAllocated { .. } => "dock",
                    EventKind::ItemDelivered { .. } => "unload",
                    EventKind::ItemLoaded { .. } => "load",
                    EventKind::ServiceDone { .. } => "done",
                    EventKind::VehicleDeparted { .. } => "depart",
                    EventKind::EpochBoundary { .. } => "epoch",
                };
                (e.time, k)
            })
            .filter(|(_, k)| *k != "epoch")
            .collect()
    }

    fn run_until_done(sim: &mut SimState) -> EpochOutcome {
        loop {
            match sim.advance_epoch() {
                EpochOutcome::Continue(_) => {
                    sim.apply_dispatch(&DispatchPlan::default()).unwrap();
                }
                other => return other,
            }
        }
    }

    #[test]
    fn single_order_timeline() {
        let inst = instance(3, 2, 1, 15, vec![order("o1", 0, 2, one_pallet(), 0, 14_400)]);
        let mut sim = SimState::with_placement(inst, &[fid(0)]).unwrap();
        sim.apply_dispatch(&plan(vec![(1, vec![stop(0, &["o1-0001"], &[]), stop(2, &[], &["o1-0001"])])])).unwrap();
        assert_eq!(run_until_done(&mut sim), EpochOutcome::Finished);
        assert_eq!(
            kinds(sim.log()),
            vec![
                (0, "arrive"),
                (0, "release"),
                (0, "depart"),
                (0, "arrive"),
                (0, "dock"),
                (1980, "load"),
                (1980, "done"),
                (1980, "depart"),
                (3780, "arrive"),
                (3780, "dock"),
                (5760, "unload"),
                (5760, "done"),
            ]
        );
        assert_eq!(sim.ledger().completions[&OrderId::from("o1")], 5760);
        assert_eq!(sim.ledger().distances[&vid(1)], 20.0);
        assert_eq!(sim.epoch(), 10);
    }

    #[test]
    fn arrival_semantics_uses_arrival_time() {
        let mut inst = instance(3, 2, 1, 15, vec![order("o1", 0, 2, one_pallet(), 0, 14_400)]);
        inst.config.completion = CompletionSemantics::Arrival;
        let mut sim = SimState::with_placement(inst, &[fid(0)]).unwrap();
        sim.apply_dispatch(&plan(vec![(1, vec![stop(0, &["o1-0001"], &[]), stop(2, &[], &["o1-0001"])])])).unwrap();
        run_until_done(&mut sim);
        assert_eq!(sim.ledger().completions[&OrderId::from("o1")], 3780);
    }

    #[test]
    fn single_dock_serves_first_come_first_served() {
        let orders = vec![
            order("a", 1, 2, one_pallet(), 0, 14_400),
            order("b", 1, 2, one_pallet(), 0, 14_400),
        ];
        let inst = instance(3, 1, 2, 15, orders);
        let mut sim = SimState::with_placement(inst, &[fid(0), fid(2)]).unwrap();
        sim.apply_dispatch(&plan(vec![
            (1, vec![stop(1, &["a-0001"], &[]), stop(2, &[], &["a-0001"])]),
            (2, vec![stop(1, &["b-0001"], &[]), stop(2, &[], &["b-0001"])]),
        ]))
        .unwrap();
        run_until_done(&mut sim);
        let docks: Vec<Seconds> = sim
            .log()
            .iter()
            .filter(|e| matches!(&e.kind, EventKind::DockAllocated { factory_id, .. } if *factory_id == fid(1)))
            .map(|e| e.time)
            .collect();
        // Both arrive at 900; the second waits for the first to finish.
        assert_eq!(docks, vec![900, 900 + 1980]);
    }

    fn tie_order(seed: u64) -> Vec<VehicleId> {
        let orders: Vec<Order> = (0..4).map(|k| order(&alloc::format!("o{k}"), 1, 2, one_pallet(), 0, 14_400)).collect();
        let mut inst = instance(3, 1, 4, 15, orders);
        inst.config.rng_seed = seed;
        let mut sim = SimState::with_placement(inst, &[fid(0), fid(0), fid(2), fid(2)]).unwrap();
        let entries = (0..4)
            .map(|k| {
                let item = alloc::format!("o{k}-0001");
                (k + 1, vec![stop(1, &[item.as_str()], &[]), stop(2, &[], &[item.as_str()])])
            })
            .collect();
        sim.apply_dispatch(&plan(entries)).unwrap();
        run_until_done(&mut sim);
        sim.log()
            .iter()
            .filter_map(|e| match &e.kind {
                EventKind::DockAllocated { vehicle_id, factory_id } if *factory_id == fid(1) => Some(vehicle_id.clone()),
                _ => None,
            })
            .collect()
    }

    #[test]
    fn simultaneous_arrivals_are_seeded() {
        assert_eq!(tie_order(5), tie_order(5));
        let orders: alloc::collections::BTreeSet<Vec<VehicleId>> = (0..16).map(tie_order).collect();
        assert!(orders.len() > 1, "tie-breaking ignores the seed");
    }

    #[test]
    fn rejected_plan_changes_nothing() {
        let orders = vec![order("o1", 0, 2, one_pallet(), 0, 14_400), order("o2", 1, 3, one_pallet(), 0, 14_400)];
        let inst = instance(4, 2, 1, 15, orders);
        let mut sim = SimState::with_placement(inst, &[fid(0)]).unwrap();
        let before = sim.snapshot();
        let crossed = plan(vec![(
            1,
            vec![stop(0, &["o1-0001"], &[]), stop(1, &["o2-0001"], &[]), stop(2, &[], &["o1-0001"]), stop(3, &[], &["o2-0001"])],
        )]);
        let err = sim.apply_dispatch(&crossed).unwrap_err();
        assert_eq!(err[0].code, ViolationCode::LifoViolation);
        assert_eq!(sim.snapshot(), before);
        assert_eq!(sim.log().len(), 3);
    }

    #[test]
    fn in_transit_destination_is_locked() {
        let inst = instance(3, 2, 1, 15, vec![order("o1", 0, 2, one_pallet(), 0, 14_400)]);
        let mut sim = SimState::with_placement(inst, &[fid(0)]).unwrap();
        sim.apply_dispatch(&plan(vec![(1, vec![stop(0, &["o1-0001"], &[]), stop(2, &[], &["o1-0001"])])])).unwrap();
        for _ in 0..4 {
            sim.advance_epoch();
        }
        let snap = sim.snapshot();
        assert!(matches!(snap.vehicles[0].position(), Some(crate::PositionView::InTransit { .. })));
        let moved = plan(vec![(1, vec![stop(1, &[], &[])])]);
        let err = sim.apply_dispatch(&moved).unwrap_err();
        assert_eq!(err[0].code, ViolationCode::DestinationLocked);
        // Leaving the vehicle out keeps the locked destination.
        sim.apply_dispatch(&DispatchPlan::default()).unwrap();
        assert_eq!(run_until_done(&mut sim), EpochOutcome::Finished);
    }

    #[test]
    fn committed_lists_cannot_change() {
        let orders = vec![order("o1", 0, 2, one_pallet(), 0, 14_400), order("o2", 0, 2, one_pallet(), 0, 14_400)];
        let inst = instance(3, 2, 1, 15, orders);
        let mut sim = SimState::with_placement(inst, &[fid(0)]).unwrap();
        sim.apply_dispatch(&plan(vec![(1, vec![stop(0, &["o1-0001"], &[]), stop(2, &[], &["o1-0001"])])])).unwrap();
        let EpochOutcome::Continue(snap) = sim.advance_epoch() else { panic!() };
        assert!(snap.vehicles[0].is_destination_committed());
        let grown = plan(vec![(1, vec![stop(0, &["o1-0001", "o2-0001"], &[]), stop(2, &[], &["o2-0001", "o1-0001"])])]);
        let err = sim.apply_dispatch(&grown).unwrap_err();
        assert!(err.iter().any(|v| v.code == ViolationCode::ListCommitted));
    }

    #[test]
    fn undispatched_order_aborts_after_four_hours() {
        let inst = instance(3, 2, 1, 15, vec![order("o1", 0, 2, one_pallet(), 0, 14_400)]);
        let mut sim = SimState::with_placement(inst, &[fid(0)]).unwrap();
        let outcome = run_until_done(&mut sim);
        assert_eq!(
            outcome,
            EpochOutcome::Aborted(AbortReason::DispatchDeadline { order_id: OrderId::from("o1"), epoch: 24, time: 15_000 })
        );
        assert_eq!(sim.advance_epoch(), outcome);
    }

    #[test]
    fn horizon_cap_aborts() {
        let mut inst = instance(3, 2, 1, 15, vec![order("o1", 0, 2, one_pallet(), 0, 14_400)]);
        inst.config.max_epochs = 3;
        let mut sim = SimState::with_placement(inst, &[fid(0)]).unwrap();
        sim.apply_dispatch(&plan(vec![(1, vec![stop(0, &["o1-0001"], &[]), stop(2, &[], &["o1-0001"])])])).unwrap();
        assert_eq!(run_until_done(&mut sim), EpochOutcome::Aborted(AbortReason::HorizonExceeded { epoch: 2 }));
    }

    #[test]
    fn orders_appear_when_released() {
        let orders = vec![order("o1", 0, 2, one_pallet(), 0, 14_400), order("o2", 0, 2, one_pallet(), 700, 15_100)];
        let inst = instance(3, 2, 1, 15, orders);
        let mut sim = SimState::with_placement(inst, &[fid(0)]).unwrap();
        assert_eq!(sim.snapshot().unallocated_items.len(), 1);
        let EpochOutcome::Continue(s1) = sim.advance_epoch() else { panic!() };
        assert_eq!(s1.unallocated_items.len(), 1);
        let EpochOutcome::Continue(s2) = sim.advance_epoch() else { panic!() };
        assert_eq!(s2.unallocated_items.len(), 2);
        assert!(s2.unallocated_items.iter().all(|i| i.status == ItemStatus::Generated));
    }
}
