use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::vec::Vec;

use super::violation::{Locus, Violation, ViolationCode};
use super::walk::{StackWalker, WalkIssue};
use crate::domain::{split_legality, ItemId, OrderId, OrderItem, Quarters, RoadNetwork, SplitVerdict, VehicleId};
use crate::plan::{DispatchPlan, Stop, VehiclePlan};
use crate::snapshot::{ItemInfo, PositionView, Snapshot, VehicleView};

/// A vehicle the plan leaves out keeps its current plan.
fn default_plan(view: &VehicleView) -> VehiclePlan {
    VehiclePlan { destination: view.destination.clone(), route: view.route.clone() }
}

/// The plan with every snapshot vehicle present, in fleet order.
pub fn normalized_plan(snapshot: &Snapshot, plan: &DispatchPlan) -> Vec<(VehicleId, VehiclePlan)> {
    snapshot
        .vehicles
        .iter()
        .map(|v| (v.id.clone(), plan.get(&v.id).cloned().unwrap_or_else(|| default_plan(v))))
        .collect()
}

/// The part of a committed stop that has not happened yet: deliveries still
/// on board and pickups not yet loaded.
fn remaining_committed(view: &VehicleView, stop: &Stop) -> Stop {
    let on_board: BTreeSet<&ItemId> = view.carrying_items.iter().collect();
    Stop {
        factory_id: stop.factory_id.clone(),
        delivery_items: stop.delivery_items.iter().filter(|i| on_board.contains(i)).cloned().collect(),
        pickup_items: stop.pickup_items.iter().filter(|i| !on_board.contains(i)).cloned().collect(),
        arrive_time: stop.arrive_time,
        leave_time: stop.leave_time,
    }
}

#[derive(Default)]
struct Findings {
    ids: Vec<Violation>,
    locks: Vec<Violation>,
    commits: Vec<Violation>,
    walks: Vec<Violation>,
    splits: Vec<Violation>,
    assignment: Vec<Violation>,
}

impl Findings {
    fn into_vec(self) -> Vec<Violation> {
        let mut all = self.ids;
        all.extend(self.locks);
        all.extend(self.commits);
        all.extend(self.walks);
        all.extend(self.splits);
        all.extend(self.assignment);
        all
    }
}

/// Checks a dispatch plan against the snapshot it answers.
///
/// Checks run in this order and every violation found is returned: id
/// resolution, destination locks, committed-list echo, a per-vehicle cargo
/// stack walk (capacity at every prefix and LIFO for every delivery), order
/// split legality, and single assignment of every item.
pub fn validate_dispatch(
    network: &RoadNetwork,
    snapshot: &Snapshot,
    plan: &DispatchPlan,
) -> Result<(), Vec<Violation>> {
    let mut out = Findings::default();
    let items: BTreeMap<&ItemId, &ItemInfo> = snapshot.items().map(|i| (&i.id, i)).collect();
    let demand = |id: &ItemId| items.get(id).map(|i| i.demand);

    for id in plan.vehicles.keys() {
        if snapshot.vehicle(id).is_none() {
            out.ids.push(Violation::new(ViolationCode::UnknownId, Locus::Vehicle(id.clone()), "unknown vehicle"));
        }
    }
    let plans = normalized_plan(snapshot, plan);

    // Who owns committed items: (vehicle, is_pickup).
    let mut committed: BTreeMap<&ItemId, (&VehicleId, bool)> = BTreeMap::new();
    for v in &snapshot.vehicles {
        if let Some(PositionView::AtFactory { committed: stop, .. }) = v.position() {
            for id in &stop.pickup_items {
                committed.insert(id, (&v.id, true));
            }
            for id in &stop.delivery_items {
                committed.insert(id, (&v.id, false));
            }
        }
    }

    let mut pickup_seen: BTreeMap<&ItemId, &VehicleId> = BTreeMap::new();
    let mut delivery_seen: BTreeSet<&ItemId> = BTreeSet::new();
    let mut parts: BTreeMap<&OrderId, BTreeMap<&VehicleId, Vec<&ItemId>>> = BTreeMap::new();

    for (view, (vid, vplan)) in snapshot.vehicles.iter().zip(&plans) {
        let stop_locus = |index: usize| Locus::Stop { vehicle: vid.clone(), index };
        let position = view.position();
        let is_echo = |index: usize| index == 0 && matches!(position, Some(PositionView::AtFactory { .. }));

        if position.is_none() {
            out.ids.push(Violation::new(
                ViolationCode::MalformedRoute,
                Locus::Vehicle(vid.clone()),
                "snapshot position is inconsistent",
            ));
            continue;
        }
        if vplan.destination.is_none() && !vplan.route.is_empty() {
            out.ids.push(Violation::new(
                ViolationCode::MalformedRoute,
                Locus::Vehicle(vid.clone()),
                "route given without a destination",
            ));
        }

        // 1. id resolution and endpoint sanity
        for (index, stop) in vplan.stops().enumerate() {
            if !network.contains(&stop.factory_id) {
                out.ids.push(Violation::new(
                    ViolationCode::UnknownId,
                    stop_locus(index),
                    format!("unknown factory {}", stop.factory_id),
                ));
            }
            if is_echo(index) {
                continue;
            }
            for (id, is_pickup) in
                stop.pickup_items.iter().map(|i| (i, true)).chain(stop.delivery_items.iter().map(|i| (i, false)))
            {
                match items.get(id) {
                    None => out.ids.push(Violation::new(
                        ViolationCode::UnknownId,
                        stop_locus(index),
                        format!("unknown or already delivered item {id}"),
                    )),
                    Some(info) => {
                        let expected =
                            if is_pickup { &info.pickup_factory_id } else { &info.delivery_factory_id };
                        if *expected != stop.factory_id {
                            out.ids.push(Violation::new(
                                ViolationCode::MalformedRoute,
                                stop_locus(index),
                                format!(
                                    "item {id} is {} at {expected}, not {}",
                                    if is_pickup { "picked up" } else { "delivered" },
                                    stop.factory_id
                                ),
                            ));
                        }
                    }
                }
            }
        }

        // 2. destination lock and 3. committed echo
        match position {
            Some(PositionView::InTransit { destination, .. }) => match &vplan.destination {
                Some(d) if d.factory_id == destination.factory_id => {}
                _ => out.locks.push(Violation::new(
                    ViolationCode::DestinationLocked,
                    Locus::Vehicle(vid.clone()),
                    format!("in transit to {}; destination cannot change", destination.factory_id),
                )),
            },
            Some(PositionView::AtFactory { factory, committed: stop }) => match &vplan.destination {
                Some(d) if d.factory_id == *factory => {
                    if !d.same_work(stop) {
                        out.commits.push(Violation::new(
                            ViolationCode::ListCommitted,
                            stop_locus(0),
                            "committed pickup/delivery lists must be echoed unchanged",
                        ));
                    }
                }
                _ => out.locks.push(Violation::new(
                    ViolationCode::DestinationLocked,
                    Locus::Vehicle(vid.clone()),
                    format!("serving committed stop at {factory}; it must stay the destination"),
                )),
            },
            _ => {}
        }

        // reassignment of committed items and duplicates
        for (index, stop) in vplan.stops().enumerate() {
            if is_echo(index) {
                for id in &stop.pickup_items {
                    pickup_seen.insert(id, vid);
                }
                delivery_seen.extend(stop.delivery_items.iter());
                continue;
            }
            for id in &stop.pickup_items {
                if committed.contains_key(id) {
                    out.commits.push(Violation::new(
                        ViolationCode::ListCommitted,
                        stop_locus(index),
                        format!("item {id} is on a generated pickup/delivery list"),
                    ));
                } else if pickup_seen.insert(id, vid).is_some() {
                    out.assignment.push(Violation::new(
                        ViolationCode::DuplicateItem,
                        stop_locus(index),
                        format!("item {id} is picked up more than once"),
                    ));
                }
            }
            for id in &stop.delivery_items {
                match committed.get(id) {
                    Some((owner, true)) if *owner == vid => {}
                    Some(_) => out.commits.push(Violation::new(
                        ViolationCode::ListCommitted,
                        stop_locus(index),
                        format!("item {id} is on another generated pickup/delivery list"),
                    )),
                    None => {}
                }
                if !delivery_seen.insert(id) {
                    out.assignment.push(Violation::new(
                        ViolationCode::DuplicateItem,
                        stop_locus(index),
                        format!("item {id} is delivered more than once"),
                    ));
                }
            }
        }

        // 4. stack walk
        let mut walker = StackWalker::new(
            view.capacity_quarters(),
            view.carrying_items.iter().map(|id| (id, demand(id).unwrap_or_default())),
        );
        let remaining = match position {
            Some(PositionView::AtFactory { committed: stop, .. }) => Some(remaining_committed(view, stop)),
            _ => None,
        };
        let stops: Vec<&Stop> = match (&remaining, &vplan.destination) {
            (Some(rem), Some(d)) if d.factory_id == rem.factory_id => {
                core::iter::once(rem).chain(vplan.route.iter()).collect()
            }
            _ => vplan.stops().collect(),
        };
        for (index, stop) in stops.iter().enumerate() {
            walker.visit(&stop.delivery_items, &stop.pickup_items, demand, |issue| match issue {
                // already reported during id resolution
                WalkIssue::Unknown(_) => {}
                WalkIssue::Orphaned(id) if !items.contains_key(id) => {}
                issue => out.walks.push(walk_violation(stop_locus(index), issue)),
            });
        }
        walker.finish(|issue| out.walks.push(walk_violation(Locus::Vehicle(vid.clone()), issue)));

        // collect the parts of each order carried or picked by this vehicle
        let mut mine: BTreeSet<&ItemId> = view.carrying_items.iter().collect();
        for stop in vplan.stops() {
            mine.extend(stop.pickup_items.iter());
        }
        for id in mine {
            if let Some(info) = items.get(id) {
                parts.entry(&info.order_id).or_default().entry(vid).or_default().push(id);
            }
        }
    }

    // 5. split legality
    let capacity = snapshot.fleet_capacity();
    let mut order_demand: BTreeMap<&OrderId, Quarters> = BTreeMap::new();
    for info in snapshot.items() {
        *order_demand.entry(&info.order_id).or_default() += info.demand;
    }
    // Splits already present in the snapshot were checked when introduced;
    // partial delivery may since have shrunk the visible demand below Q.
    let mut holders: BTreeMap<&OrderId, BTreeSet<&VehicleId>> = BTreeMap::new();
    for v in &snapshot.vehicles {
        let planned = v.destination.iter().chain(&v.route).flat_map(|s| &s.pickup_items);
        for id in v.carrying_items.iter().chain(planned) {
            if let Some(info) = items.get(id) {
                holders.entry(&info.order_id).or_default().insert(&v.id);
            }
        }
    }
    for (order, by_vehicle) in &parts {
        if by_vehicle.len() < 2 {
            continue;
        }
        let assigned: Vec<OrderItem> = by_vehicle
            .values()
            .flatten()
            .filter_map(|id| items.get(*id))
            .map(|info| OrderItem {
                id: info.id.clone(),
                order_id: info.order_id.clone(),
                pallet_type: info.pallet_type,
                demand: info.demand,
                load_time: info.load_time,
                unload_time: info.unload_time,
                status: info.status,
            })
            .collect();
        let split: Vec<Vec<ItemId>> =
            by_vehicle.values().map(|ids| ids.iter().map(|i| (*i).clone()).collect()).collect();
        let mut total = order_demand.get(order).copied().unwrap_or_default();
        if holders.get(order).is_some_and(|h| h.len() > 1) {
            total = total.max(capacity + Quarters(1));
        }
        if let Ok(SplitVerdict::Violation(why)) = split_legality(total, &assigned, capacity, &split) {
            out.splits.push(Violation::new(
                ViolationCode::IllegalSplit,
                Locus::Order((*order).clone()),
                format!("order of demand {total} split over {} vehicles ({why:?})", by_vehicle.len()),
            ));
        }
    }

    let all = out.into_vec();
    if all.is_empty() {
        Ok(())
    } else {
        Err(all)
    }
}

fn walk_violation(locus: Locus, issue: WalkIssue<'_>) -> Violation {
    match issue {
        WalkIssue::Lifo(id) => {
            Violation::new(ViolationCode::LifoViolation, locus, format!("item {id} is not on top of the stack"))
        }
        WalkIssue::Orphaned(id) => Violation::new(
            ViolationCode::OrphanedItem,
            locus,
            format!("item {id} is delivered but neither on board nor picked up earlier"),
        ),
        WalkIssue::AlreadyOnBoard(id) => {
            Violation::new(ViolationCode::DuplicateItem, locus, format!("item {id} is already on board"))
        }
        WalkIssue::Unknown(id) => Violation::new(ViolationCode::UnknownId, locus, format!("unknown item {id}")),
        WalkIssue::Capacity { load } => {
            Violation::new(ViolationCode::CapacityExceeded, locus, format!("load reaches {load} pallets"))
        }
        WalkIssue::Undelivered(id) => Violation::new(
            ViolationCode::OrphanedItem,
            locus,
            format!("item {id} is picked up but never delivered by this route"),
        ),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::PalletQuantity;
    use crate::sim::{EpochOutcome, SimState};
    use crate::testkit::{fid, instance, order, vid};
    use crate::Order;
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

    fn setup(vehicles: usize, capacity: u32, orders: Vec<Order>) -> (SimState, Snapshot) {
        let inst = instance(4, 2, vehicles, capacity, orders);
        let sim = SimState::with_placement(inst, &vec![fid(0); vehicles]).unwrap();
        let snap = sim.snapshot();
        (sim, snap)
    }

    fn codes(sim: &SimState, snap: &Snapshot, p: &DispatchPlan) -> Vec<ViolationCode> {
        match validate_dispatch(&sim.instance().network, snap, p) {
            Ok(()) => Vec::new(),
            Err(v) => v.into_iter().map(|v| v.code).collect(),
        }
    }

    fn q(std: u32, small: u32, boxes: u32) -> PalletQuantity {
        PalletQuantity::new(std, small, boxes)
    }

    #[test]
    fn four_stop_lifo_example() {
        let (sim, snap) = setup(1, 15, vec![order("o1", 0, 2, q(1, 0, 0), 0, 9_000), order("o2", 1, 3, q(1, 0, 0), 0, 9_000)]);
        let crossed = plan(vec![(
            1,
            vec![stop(0, &["o1-0001"], &[]), stop(1, &["o2-0001"], &[]), stop(2, &[], &["o1-0001"]), stop(3, &[], &["o2-0001"])],
        )]);
        assert_eq!(codes(&sim, &snap, &crossed), vec![ViolationCode::LifoViolation]);
        let nested = plan(vec![(
            1,
            vec![stop(0, &["o1-0001"], &[]), stop(1, &["o2-0001"], &[]), stop(3, &[], &["o2-0001"]), stop(2, &[], &["o1-0001"])],
        )]);
        assert_eq!(codes(&sim, &snap, &nested), vec![]);
    }

    #[test]
    fn two_ten_pallet_orders_exceed_fifteen() {
        let (sim, snap) = setup(1, 15, vec![order("a", 0, 2, q(10, 0, 0), 0, 9_000), order("b", 0, 2, q(10, 0, 0), 0, 9_000)]);
        let a: Vec<String> = (1..=10).map(|k| alloc::format!("a-{k:04}")).collect();
        let b: Vec<String> = (1..=10).map(|k| alloc::format!("b-{k:04}")).collect();
        let picks: Vec<&str> = a.iter().chain(&b).map(|s| s.as_str()).collect();
        let drops: Vec<&str> = picks.iter().rev().copied().collect();
        let p = plan(vec![(1, vec![stop(0, &picks, &[]), stop(2, &[], &drops)])]);
        assert_eq!(codes(&sim, &snap, &p), vec![ViolationCode::CapacityExceeded]);
    }

    #[test]
    fn small_order_cannot_be_split() {
        let (sim, snap) = setup(2, 15, vec![order("o", 0, 2, q(1, 1, 1), 0, 9_000)]);
        let p = plan(vec![
            (1, vec![stop(0, &["o-0001", "o-0002"], &[]), stop(2, &[], &["o-0002", "o-0001"])]),
            (2, vec![stop(0, &["o-0003"], &[]), stop(2, &[], &["o-0003"])]),
        ]);
        assert_eq!(codes(&sim, &snap, &p), vec![ViolationCode::IllegalSplit]);
    }

    #[test]
    fn large_order_split_is_legal() {
        let (sim, snap) = setup(2, 15, vec![order("o", 0, 2, q(13, 7, 1), 0, 9_000)]);
        let ids: Vec<String> = (1..=21).map(|k| alloc::format!("o-{k:04}")).collect();
        let first: Vec<&str> = ids[..17].iter().map(|s| s.as_str()).collect();
        let second: Vec<&str> = ids[17..].iter().map(|s| s.as_str()).collect();
        let first_rev: Vec<&str> = first.iter().rev().copied().collect();
        let second_rev: Vec<&str> = second.iter().rev().copied().collect();
        let p = plan(vec![
            (1, vec![stop(0, &first, &[]), stop(2, &[], &first_rev)]),
            (2, vec![stop(0, &second, &[]), stop(2, &[], &second_rev)]),
        ]);
        assert_eq!(codes(&sim, &snap, &p), vec![]);
    }

    #[test]
    fn id_and_shape_errors() {
        let (sim, snap) = setup(2, 15, vec![order("o1", 0, 2, q(1, 0, 0), 0, 9_000)]);
        let unknown_vehicle = DispatchPlan {
            vehicles: [(VehicleId::from("ghost"), VehiclePlan::default())].into_iter().collect(),
        };
        assert_eq!(codes(&sim, &snap, &unknown_vehicle), vec![ViolationCode::UnknownId]);
        let unknown_item = plan(vec![(1, vec![stop(0, &["zz-0001"], &[]), stop(2, &[], &["zz-0001"])])]);
        assert!(codes(&sim, &snap, &unknown_item).contains(&ViolationCode::UnknownId));
        let wrong_factory = plan(vec![(1, vec![stop(1, &["o1-0001"], &[]), stop(2, &[], &["o1-0001"])])]);
        assert_eq!(codes(&sim, &snap, &wrong_factory), vec![ViolationCode::MalformedRoute]);
        let no_destination = DispatchPlan {
            vehicles: [(vid(1), VehiclePlan { destination: None, route: vec![stop(0, &[], &[])] })].into_iter().collect(),
        };
        assert_eq!(codes(&sim, &snap, &no_destination), vec![ViolationCode::MalformedRoute]);
        let orphan = plan(vec![(1, vec![stop(2, &[], &["o1-0001"])])]);
        assert_eq!(codes(&sim, &snap, &orphan), vec![ViolationCode::OrphanedItem]);
        let never_delivered = plan(vec![(1, vec![stop(0, &["o1-0001"], &[])])]);
        assert_eq!(codes(&sim, &snap, &never_delivered), vec![ViolationCode::OrphanedItem]);
        let twice = plan(vec![
            (1, vec![stop(0, &["o1-0001"], &[]), stop(2, &[], &["o1-0001"])]),
            (2, vec![stop(0, &["o1-0001"], &[]), stop(2, &[], &["o1-0001"])]),
        ]);
        assert!(codes(&sim, &snap, &twice).contains(&ViolationCode::DuplicateItem));
    }

    #[test]
    fn all_violations_are_reported() {
        let (sim, snap) = setup(2, 15, vec![order("o1", 0, 2, q(1, 0, 0), 0, 9_000), order("o2", 1, 3, q(1, 0, 0), 0, 9_000)]);
        let p = plan(vec![
            (
                1,
                vec![stop(0, &["o1-0001"], &[]), stop(1, &["o2-0001"], &[]), stop(2, &[], &["o1-0001"]), stop(3, &[], &["o2-0001"])],
            ),
            (2, vec![stop(2, &[], &["zz-0001"])]),
        ]);
        let found = codes(&sim, &snap, &p);
        assert!(found.contains(&ViolationCode::LifoViolation));
        assert!(found.contains(&ViolationCode::UnknownId));
    }

    #[test]
    fn validation_is_pure() {
        let (sim, snap) = setup(1, 15, vec![order("o1", 0, 2, q(1, 0, 0), 0, 9_000)]);
        let p = plan(vec![(1, vec![stop(0, &["o1-0001"], &[]), stop(2, &[], &["o1-0001"])])]);
        let first = validate_dispatch(&sim.instance().network, &snap, &p);
        assert_eq!(first, validate_dispatch(&sim.instance().network, &snap, &p));
        assert!(first.is_ok());
    }

    #[test]
    fn split_survives_partial_delivery() {
        // 16.75 pallets on two vehicles; once one part is partly unloaded the
        // visible remainder fits one vehicle but the split stays legal.
        let inst = instance(4, 2, 2, 15, vec![order("o", 0, 1, q(13, 7, 1), 0, 90_000)]);
        let mut sim = SimState::with_placement(inst, &[fid(0), fid(3)]).unwrap();
        let ids: Vec<String> = (1..=21).map(|k| alloc::format!("o-{k:04}")).collect();
        let first: Vec<&str> = ids[..17].iter().map(|s| s.as_str()).collect();
        let second: Vec<&str> = ids[17..].iter().map(|s| s.as_str()).collect();
        let first_rev: Vec<&str> = first.iter().rev().copied().collect();
        let second_rev: Vec<&str> = second.iter().rev().copied().collect();
        sim.apply_dispatch(&plan(vec![
            (1, vec![stop(0, &first, &[]), stop(1, &[], &first_rev)]),
            (2, vec![stop(0, &second, &[]), stop(1, &[], &second_rev)]),
        ]))
        .unwrap();
        let mut partial = false;
        loop {
            match sim.advance_epoch() {
                EpochOutcome::Continue(snap) => {
                    let visible: Quarters = snap.items().map(|i| i.demand).sum();
                    let holders = snap.vehicles.iter().filter(|v| !v.carrying_items.is_empty()).count();
                    partial |= visible <= Quarters::from_pallets(15) && holders == 2;
                    sim.apply_dispatch(&DispatchPlan::default()).unwrap();
                }
                EpochOutcome::Finished => break,
                other => panic!("{other:?}"),
            }
        }
        assert!(partial, "scenario never reached a partly delivered split");
    }
}
