//! Variable neighbourhood search over the editable part of each route.
//!
//! Each route suffix is broken into nodes: a pickup node loads one order's
//! items at a stop and its partner delivery node unloads them, in reverse,
//! later in the same route. Items already on board (or loaded by a frozen
//! stop) form delivery-only nodes. Moves rearrange nodes and rebuild stops
//! by merging neighbouring nodes at the same factory.

use alloc::boxed::Box;
use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::greedy::greedy_plan;
use super::route::{dock_wait, Anchor, Planner, Visit};
use crate::domain::{ItemId, OrderId};
use crate::eval::{validate_dispatch, Violation};
use crate::plan::{DispatchPlan, Stop, VehiclePlan};
use crate::sim::{DispatchPolicy, PlanningContext, PolicyError};
use crate::snapshot::Snapshot;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Neighborhood {
    /// Move an order to another nearby vehicle, or swap two orders between
    /// vehicles.
    InterRouteSwap,
    /// Reinsert an order's pickup and delivery elsewhere in its own route.
    IntraRouteRelocate,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct VnsConfig {
    /// Neighbourhood scans per call.
    pub max_iterations: u32,
    /// Wall-clock allowance per call, enforced by the caller's budget.
    pub time_budget_ms: u64,
    pub neighborhoods: Vec<Neighborhood>,
    pub rng_seed: u64,
    /// Weight of estimated lateness (seconds); defaults to the objective's λ.
    pub lateness_weight: Option<f64>,
    /// Weight of estimated dock queueing (seconds).
    pub dock_wait_weight: f64,
    /// Vehicles considered for inter-route moves, nearest first.
    pub neighbor_vehicles: usize,
}

impl Default for VnsConfig {
    fn default() -> Self {
        VnsConfig {
            max_iterations: 200,
            time_budget_ms: 10_000,
            neighborhoods: alloc::vec![Neighborhood::InterRouteSwap, Neighborhood::IntraRouteRelocate],
            rng_seed: 0,
            lateness_weight: None,
            dock_wait_weight: 0.0,
            neighbor_vehicles: 5,
        }
    }
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum VnsError {
    #[error("initial plan is invalid ({} violations)", .0.len())]
    InvalidInitial(Vec<Violation>),
    #[error("invalid configuration: {0}")]
    Config(&'static str),
}

#[derive(Clone, Debug, PartialEq)]
pub struct VnsOutcome {
    pub plan: DispatchPlan,
    pub initial_cost: f64,
    pub final_cost: f64,
    /// Cost after every accepted move.
    pub trace: Vec<f64>,
    pub iterations: u32,
}

/// Decides when a search must stop early.
pub trait Budget {
    /// Called once before the search starts.
    fn start(&mut self) {}
    fn exhausted(&mut self) -> bool;
}

/// Stops only on the iteration cap.
#[derive(Clone, Copy, Debug, Default)]
pub struct Unlimited;

impl Budget for Unlimited {
    fn exhausted(&mut self) -> bool {
        false
    }
}

#[derive(Clone, Debug)]
struct Node {
    factory: usize,
    pickup: bool,
    request: usize,
    order: OrderId,
    /// Load order for pickups, unload order for deliveries.
    items: Vec<ItemId>,
}

#[derive(Clone, Debug)]
struct Route {
    vehicle: usize,
    anchor: Anchor,
    cargo: Vec<(ItemId, bool)>,
    frozen: Vec<Stop>,
    /// Editable stops as given, used when the route cannot be decomposed.
    original: Vec<Stop>,
    nodes: Vec<Node>,
    movable: bool,
}

struct Search<'p, 'a> {
    planner: &'p Planner<'a>,
    lateness_weight: f64,
    wait_weight: f64,
}

impl Search<'_, '_> {
    fn stops(&self, route: &Route, nodes: &[Node]) -> Vec<Stop> {
        if !route.movable {
            return route.original.clone();
        }
        rebuild(self.planner, nodes)
    }

    fn feasible(&self, route: &Route, stops: &[Stop]) -> bool {
        let cargo: Vec<(&ItemId, bool)> = route.cargo.iter().map(|(id, m)| (id, *m)).collect();
        self.planner.feasible_from(route.vehicle, &cargo, None, stops)
    }

    /// Separable part of the cost of one route.
    fn route_cost(&self, route: &Route, stops: &[Stop], visits: Option<&mut Vec<Visit>>) -> f64 {
        let c = self.planner.evaluate(route.anchor, stops, 0, visits);
        self.lateness_weight * c.lateness as f64 + c.distance
    }

    fn total(&self, routes: &[Route], costs: &[f64]) -> f64 {
        let mut sum: f64 = costs.iter().sum();
        if self.wait_weight > 0.0 {
            let mut visits = Vec::new();
            for r in routes {
                let stops = self.stops(r, &r.nodes);
                self.planner.evaluate(r.anchor, &stops, 0, Some(&mut visits));
            }
            sum += self.wait_weight * dock_wait(self.planner.network, &mut visits) as f64;
        }
        sum
    }
}

/// Merges adjacent nodes at one factory into a stop unless a delivery would
/// follow a pickup there.
fn rebuild(planner: &Planner<'_>, nodes: &[Node]) -> Vec<Stop> {
    let mut stops: Vec<(usize, Stop)> = Vec::new();
    for n in nodes {
        let fits = matches!(stops.last(), Some((f, s)) if *f == n.factory && (n.pickup || s.pickup_items.is_empty()));
        if !fits {
            stops.push((n.factory, Stop::new(planner.network.factory(n.factory).id.clone())));
        }
        let stop = &mut stops.last_mut().expect("pushed").1;
        if n.pickup {
            stop.pickup_items.extend(n.items.iter().cloned());
        } else {
            stop.delivery_items.extend(n.items.iter().cloned());
        }
    }
    stops.into_iter().map(|(_, s)| s).collect()
}

/// Splits editable stops into nodes; `None` when the stops do not follow
/// the one-block-per-order pattern the moves rely on.
fn decompose(planner: &Planner<'_>, stops: &[Stop], next_request: &mut usize) -> Option<Vec<Node>> {
    struct Run {
        stop: usize,
        order: OrderId,
        items: Vec<ItemId>,
        delivered_at: usize,
    }
    let delivered_at = |id: &ItemId, from: usize| (from + 1..stops.len()).find(|&k| stops[k].delivery_items.contains(id));
    let mut runs: Vec<Run> = Vec::new();
    let mut owner: BTreeMap<&ItemId, usize> = BTreeMap::new();
    for (k, stop) in stops.iter().enumerate() {
        if stop.is_empty() {
            return None;
        }
        for id in &stop.pickup_items {
            let order = &planner.items.get(id)?.order_id;
            let at = delivered_at(id, k)?;
            match runs.last_mut() {
                Some(r) if r.stop == k && r.order == *order && r.delivered_at == at => r.items.push(id.clone()),
                _ => runs.push(Run { stop: k, order: order.clone(), items: alloc::vec![id.clone()], delivered_at: at }),
            }
            owner.insert(id, runs.len() - 1);
        }
    }
    let base = *next_request;
    let mut nodes = Vec::new();
    let mut lone = runs.len();
    for (k, stop) in stops.iter().enumerate() {
        let factory = planner.idx(&stop.factory_id);
        let mut i = 0;
        while i < stop.delivery_items.len() {
            let id = &stop.delivery_items[i];
            match owner.get(id) {
                Some(&r) => {
                    let run = &runs[r];
                    let len = run.items.len();
                    let block = stop.delivery_items.get(i..i + len)?;
                    if !block.iter().eq(run.items.iter().rev()) {
                        return None;
                    }
                    nodes.push(Node { factory, pickup: false, request: base + r, order: run.order.clone(), items: block.to_vec() });
                    i += len;
                }
                None => {
                    let order = planner.items.get(id)?.order_id.clone();
                    let mut block = alloc::vec![id.clone()];
                    i += 1;
                    while let Some(next) = stop.delivery_items.get(i) {
                        if owner.contains_key(next) || planner.items.get(next).map(|n| &n.order_id) != Some(&order) {
                            break;
                        }
                        block.push(next.clone());
                        i += 1;
                    }
                    nodes.push(Node { factory, pickup: false, request: base + lone, order, items: block });
                    lone += 1;
                }
            }
        }
        for (r, run) in runs.iter().enumerate().filter(|(_, r)| r.stop == k) {
            nodes.push(Node { factory, pickup: true, request: base + r, order: run.order.clone(), items: run.items.clone() });
        }
    }
    *next_request = base + lone;
    Some(nodes)
}

/// Removes a request's nodes; returns the remaining nodes, the pickup node
/// (if any), the delivery node, and the former pickup position.
fn extract(nodes: &[Node], request: usize) -> (Vec<Node>, Option<Node>, Node, usize) {
    let mut rest = Vec::with_capacity(nodes.len());
    let mut pickup = None;
    let mut delivery = None;
    let mut at = 0;
    for n in nodes {
        if n.request == request {
            if n.pickup {
                at = rest.len();
                pickup = Some(n.clone());
            } else {
                if pickup.is_none() {
                    at = rest.len();
                }
                delivery = Some(n.clone());
            }
        } else {
            rest.push(n.clone());
        }
    }
    (rest, pickup, delivery.expect("every request has a delivery"), at)
}

fn with_pair(base: &[Node], p: usize, q: usize, pickup: &Option<Node>, delivery: &Node) -> Vec<Node> {
    let mut out = Vec::with_capacity(base.len() + 2);
    for (k, n) in base.iter().enumerate() {
        if k == p {
            if let Some(pk) = pickup {
                out.push(pk.clone());
            }
        }
        if k == q {
            out.push(delivery.clone());
        }
        out.push(n.clone());
    }
    if p == base.len() {
        if let Some(pk) = pickup {
            out.push(pk.clone());
        }
    }
    if q == base.len() {
        out.push(delivery.clone());
    }
    out
}

struct Candidate {
    total: f64,
    changes: Vec<(usize, Vec<Node>, f64)>,
}

fn requests(route: &Route) -> Vec<(usize, bool)> {
    let mut seen: Vec<(usize, bool)> = Vec::new();
    for n in &route.nodes {
        match seen.iter_mut().find(|(r, _)| *r == n.request) {
            Some(e) => e.1 |= n.pickup,
            None => seen.push((n.request, n.pickup)),
        }
    }
    seen
}

/// Pickup/delivery pairs of `order` in a route, plus one if some of its
/// items ride in the fixed cargo.
fn order_presence(route: &Route, planner: &Planner<'_>, order: &OrderId) -> usize {
    let fixed = route.cargo.iter().any(|(id, _)| planner.items.get(id).is_some_and(|i| i.order_id == *order));
    let pairs = route.nodes.iter().filter(|n| n.pickup && n.order == *order).count();
    pairs + usize::from(fixed)
}

impl Search<'_, '_> {
    fn consider(&self, best: &mut Option<Candidate>, routes: &[Route], costs: &[f64], changes: Vec<(usize, Vec<Node>)>) {
        let mut new_costs = costs.to_vec();
        let mut evaluated = Vec::with_capacity(changes.len());
        for (r, nodes) in changes {
            let stops = self.stops(&routes[r], &nodes);
            if !self.feasible(&routes[r], &stops) {
                return;
            }
            let c = self.route_cost(&routes[r], &stops, None);
            new_costs[r] = c;
            evaluated.push((r, nodes, c));
        }
        let total = if self.wait_weight > 0.0 {
            let mut trial = routes.to_vec();
            for (r, nodes, _) in &evaluated {
                trial[*r].nodes = nodes.clone();
            }
            self.total(&trial, &new_costs)
        } else {
            new_costs.iter().sum()
        };
        if best.as_ref().is_none_or(|b| total < b.total) {
            *best = Some(Candidate { total, changes: evaluated });
        }
    }

    fn intra(&self, routes: &[Route], costs: &[f64], order: &[usize]) -> Option<Candidate> {
        let mut best = None;
        for &r in order {
            let route = &routes[r];
            if !route.movable {
                continue;
            }
            for (req, _) in requests(route) {
                let (base, pickup, delivery, _) = extract(&route.nodes, req);
                let n = base.len();
                let starts = if pickup.is_some() { 0..=n } else { 0..=0 };
                for p in starts {
                    let lo = if pickup.is_some() { p } else { 0 };
                    for q in lo..=n {
                        let nodes = with_pair(&base, p, q, &pickup, &delivery);
                        if same_sequence(&nodes, &route.nodes) {
                            continue;
                        }
                        self.consider(&mut best, routes, costs, alloc::vec![(r, nodes)]);
                    }
                }
            }
        }
        best
    }

    fn inter(&self, routes: &[Route], costs: &[f64], order: &[usize], width: usize) -> Option<Candidate> {
        let mut best = None;
        let net = self.planner.network;
        for &r1 in order {
            let a = &routes[r1];
            if !a.movable {
                continue;
            }
            let mut near: Vec<usize> = (0..routes.len()).filter(|&r| r != r1 && routes[r].movable).collect();
            near.sort_by_key(|&r| (net.travel_time_idx(a.anchor.factory, routes[r].anchor.factory), r));
            near.truncate(width);
            for (req, has_pick) in requests(a) {
                if !has_pick {
                    continue;
                }
                let (base_a, pickup, delivery, at_a) = extract(&a.nodes, req);
                if order_presence(a, self.planner, &delivery.order) != 1 {
                    continue;
                }
                for &r2 in &near {
                    let b = &routes[r2];
                    if order_presence(b, self.planner, &delivery.order) == 0 {
                        for p in 0..=b.nodes.len() {
                            let nodes_b = with_pair(&b.nodes, p, p, &pickup, &delivery);
                            self.consider(&mut best, routes, costs, alloc::vec![(r1, base_a.clone()), (r2, nodes_b)]);
                        }
                    }
                    if r2 < r1 {
                        continue;
                    }
                    for (req_b, pick_b) in requests(b) {
                        if !pick_b {
                            continue;
                        }
                        let (base_b, pickup_b, delivery_b, at_b) = extract(&b.nodes, req_b);
                        if delivery_b.order == delivery.order
                            || order_presence(b, self.planner, &delivery_b.order) != 1
                            || order_presence(a, self.planner, &delivery_b.order) != 0
                            || order_presence(b, self.planner, &delivery.order) != 0
                        {
                            continue;
                        }
                        let nodes_a = with_pair(&base_a, at_a, at_a, &pickup_b, &delivery_b);
                        let nodes_b = with_pair(&base_b, at_b, at_b, &pickup, &delivery);
                        self.consider(&mut best, routes, costs, alloc::vec![(r1, nodes_a), (r2, nodes_b)]);
                    }
                }
            }
        }
        best
    }
}

fn same_sequence(a: &[Node], b: &[Node]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x.request == y.request && x.pickup == y.pickup)
}

/// The search's internal cost of a plan: weighted estimated lateness plus
/// distance of every editable route part, plus weighted dock queueing.
pub fn plan_cost(ctx: &PlanningContext<'_>, snapshot: &Snapshot, plan: &DispatchPlan, cfg: &VnsConfig) -> f64 {
    let planner = Planner::new(ctx, snapshot);
    let search = Search {
        planner: &planner,
        lateness_weight: cfg.lateness_weight.unwrap_or(ctx.config.lambda),
        wait_weight: cfg.dock_wait_weight,
    };
    let plans: Vec<VehiclePlan> = crate::eval::normalized_plan(snapshot, plan).into_iter().map(|(_, p)| p).collect();
    let routes: Vec<Route> = plans
        .iter()
        .enumerate()
        .map(|(v, plan)| {
            let frame = planner.frame(v, plan, true);
            let stops: Vec<Stop> = plan.stops().cloned().collect();
            let (frozen, editable) = stops.split_at(frame.frozen.min(stops.len()));
            Route {
                vehicle: v,
                anchor: frame.anchor,
                cargo: Vec::new(),
                frozen: frozen.to_vec(),
                original: editable.to_vec(),
                nodes: Vec::new(),
                movable: false,
            }
        })
        .collect();
    let costs: Vec<f64> = routes.iter().map(|r| search.route_cost(r, &r.original, None)).collect();
    search.total(&routes, &costs)
}

/// Improves `initial` by best-improvement VNS on the editable route parts.
/// The returned plan never costs more than `initial` under the search's
/// internal cost.
pub fn vns_improve(
    ctx: &PlanningContext<'_>,
    snapshot: &Snapshot,
    initial: &DispatchPlan,
    cfg: &VnsConfig,
) -> Result<VnsOutcome, VnsError> {
    vns_improve_with(ctx, snapshot, initial, cfg, &mut Unlimited)
}

pub fn vns_improve_with(
    ctx: &PlanningContext<'_>,
    snapshot: &Snapshot,
    initial: &DispatchPlan,
    cfg: &VnsConfig,
    budget: &mut dyn Budget,
) -> Result<VnsOutcome, VnsError> {
    if cfg.dock_wait_weight < 0.0 || cfg.lateness_weight.is_some_and(|w| w < 0.0) {
        return Err(VnsError::Config("weights must be non-negative"));
    }
    validate_dispatch(ctx.network, snapshot, initial).map_err(VnsError::InvalidInitial)?;
    budget.start();
    let planner = Planner::new(ctx, snapshot);
    let search = Search {
        planner: &planner,
        lateness_weight: cfg.lateness_weight.unwrap_or(ctx.config.lambda),
        wait_weight: cfg.dock_wait_weight,
    };
    let plans: Vec<VehiclePlan> = crate::eval::normalized_plan(snapshot, initial).into_iter().map(|(_, p)| p).collect();

    let mut next_request = 0;
    let mut routes: Vec<Route> = Vec::with_capacity(plans.len());
    for (v, plan) in plans.iter().enumerate() {
        let frame = planner.frame(v, plan, true);
        let stops: Vec<Stop> = plan.stops().cloned().collect();
        let (frozen, editable) = stops.split_at(frame.frozen.min(stops.len()));
        let nodes = decompose(&planner, editable, &mut next_request);
        routes.push(Route {
            vehicle: v,
            anchor: frame.anchor,
            cargo: frame.cargo.iter().map(|(id, m)| ((*id).clone(), *m)).collect(),
            frozen: frozen.to_vec(),
            original: editable.to_vec(),
            movable: nodes.is_some(),
            nodes: nodes.unwrap_or_default(),
        });
    }
    let initial_costs: Vec<f64> = routes
        .iter()
        .map(|r| search.route_cost(r, &r.original, None))
        .collect();
    let initial_cost = {
        let originals: Vec<Route> = routes.iter().map(|r| Route { movable: false, ..r.clone() }).collect();
        search.total(&originals, &initial_costs)
    };
    let mut costs: Vec<f64> = routes.iter().map(|r| search.route_cost(r, &search.stops(r, &r.nodes), None)).collect();
    let mut current = search.total(&routes, &costs);
    if current > initial_cost {
        // Re-merging never adds travel or service, but stay safe on ties.
        for r in &mut routes {
            r.movable = false;
        }
        costs = initial_costs.clone();
        current = initial_cost;
    }

    let mut scan: Vec<usize> = (0..routes.len()).collect();
    scan.shuffle(&mut ChaCha8Rng::seed_from_u64(cfg.rng_seed));
    let mut trace = Vec::new();
    let mut iterations = 0;
    let mut k = 0;
    while k < cfg.neighborhoods.len() {
        if iterations >= cfg.max_iterations || budget.exhausted() {
            break;
        }
        iterations += 1;
        let found = match cfg.neighborhoods[k] {
            Neighborhood::IntraRouteRelocate => search.intra(&routes, &costs, &scan),
            Neighborhood::InterRouteSwap => search.inter(&routes, &costs, &scan, cfg.neighbor_vehicles),
        };
        match found {
            Some(c) if c.total < current - 1e-9 => {
                for (r, nodes, cost) in c.changes {
                    routes[r].nodes = nodes;
                    costs[r] = cost;
                }
                current = c.total;
                trace.push(current);
                k = 0;
            }
            _ => k += 1,
        }
    }

    if trace.is_empty() {
        return Ok(VnsOutcome { plan: initial.clone(), initial_cost, final_cost: initial_cost, trace, iterations });
    }
    let mut vehicles = BTreeMap::new();
    for r in &routes {
        let stops: Vec<Stop> = r.frozen.iter().cloned().chain(search.stops(r, &r.nodes)).collect();
        let mut it = stops.into_iter();
        let mut plan = VehiclePlan { destination: it.next(), route: it.collect() };
        planner.annotate(r.vehicle, &mut plan);
        vehicles.insert(snapshot.vehicles[r.vehicle].id.clone(), plan);
    }
    let plan = DispatchPlan { vehicles };
    debug_assert!(validate_dispatch(ctx.network, snapshot, &plan).is_ok(), "search produced an invalid plan");
    Ok(VnsOutcome { plan, initial_cost, final_cost: current, trace, iterations })
}

/// Greedy construction followed by VNS improvement, every epoch.
pub struct VnsPolicy {
    pub config: VnsConfig,
    budget: Box<dyn Budget + Send>,
}

impl VnsPolicy {
    pub fn new(config: VnsConfig) -> Self {
        VnsPolicy { config, budget: Box::new(Unlimited) }
    }

    pub fn with_budget(config: VnsConfig, budget: Box<dyn Budget + Send>) -> Self {
        VnsPolicy { config, budget }
    }
}

impl Default for VnsPolicy {
    fn default() -> Self {
        VnsPolicy::new(VnsConfig::default())
    }
}

impl core::fmt::Debug for VnsPolicy {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("VnsPolicy").field("config", &self.config).finish_non_exhaustive()
    }
}

impl DispatchPolicy for VnsPolicy {
    fn dispatch(&mut self, ctx: &PlanningContext<'_>, snapshot: &Snapshot) -> Result<DispatchPlan, PolicyError> {
        let seed = greedy_plan(ctx, snapshot);
        match vns_improve_with(ctx, snapshot, &seed, &self.config, self.budget.as_mut()) {
            Ok(out) => Ok(out.plan),
            Err(e) => Err(PolicyError::Other(alloc::format!("{e}"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::PalletQuantity;
    use crate::sim::SimState;
    use crate::testkit::{fid, instance, order, vid};
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

    /// Two vehicles at opposite ends of a line, each given the order at the
    /// other end.
    fn crossed() -> (SimState, DispatchPlan) {
        let orders = vec![
            order("a", 0, 1, PalletQuantity::new(1, 0, 0), 0, 86_000),
            order("b", 5, 4, PalletQuantity::new(1, 0, 0), 0, 86_000),
        ];
        let sim = SimState::with_placement(instance(6, 2, 2, 15, orders), &[fid(5), fid(0)]).unwrap();
        let p = plan(vec![
            (1, vec![stop(0, &["a-0001"], &[]), stop(1, &[], &["a-0001"])]),
            (2, vec![stop(5, &["b-0001"], &[]), stop(4, &[], &["b-0001"])]),
        ]);
        (sim, p)
    }

    fn ctx(sim: &SimState) -> PlanningContext<'_> {
        PlanningContext { network: &sim.instance().network, config: sim.config() }
    }

    #[test]
    fn zero_budget_returns_initial() {
        let (sim, p) = crossed();
        let snap = sim.snapshot();
        let cfg = VnsConfig { max_iterations: 0, ..VnsConfig::default() };
        let out = vns_improve(&ctx(&sim), &snap, &p, &cfg).unwrap();
        assert_eq!(out.plan, p);
        assert_eq!(out.iterations, 0);
    }

    #[test]
    fn finds_the_swap() {
        let (sim, p) = crossed();
        let snap = sim.snapshot();
        let out = vns_improve(&ctx(&sim), &snap, &p, &VnsConfig::default()).unwrap();
        assert!(out.final_cost < out.initial_cost);
        assert_eq!(out.plan.vehicles[&vid(1)].destination.as_ref().unwrap().factory_id, fid(5));
        assert_eq!(out.plan.vehicles[&vid(2)].destination.as_ref().unwrap().factory_id, fid(0));
        assert_eq!(validate_dispatch(ctx(&sim).network, &snap, &out.plan), Ok(()));
    }

    #[test]
    fn optimal_plan_is_a_fixed_point() {
        let (sim, _) = crossed();
        let snap = sim.snapshot();
        let good = plan(vec![
            (1, vec![stop(5, &["b-0001"], &[]), stop(4, &[], &["b-0001"])]),
            (2, vec![stop(0, &["a-0001"], &[]), stop(1, &[], &["a-0001"])]),
        ]);
        let out = vns_improve(&ctx(&sim), &snap, &good, &VnsConfig::default()).unwrap();
        assert_eq!(out.plan, good);
        assert!(out.trace.is_empty());
    }

    #[test]
    fn invalid_initial_is_rejected() {
        let (sim, _) = crossed();
        let snap = sim.snapshot();
        let bad = plan(vec![(1, vec![stop(1, &[], &["a-0001"])])]);
        assert!(matches!(vns_improve(&ctx(&sim), &snap, &bad, &VnsConfig::default()), Err(VnsError::InvalidInitial(_))));
    }

    /// Every pickup-before-delivery node sequence of the given orders.
    fn sequences(orders: &[(&'static str, usize, usize)]) -> Vec<Vec<Stop>> {
        fn go(orders: &[(&'static str, usize, usize)], state: &mut Vec<u8>, cur: &mut Vec<Stop>, out: &mut Vec<Vec<Stop>>) {
            if state.iter().all(|&s| s == 2) {
                out.push(cur.clone());
                return;
            }
            for k in 0..orders.len() {
                let (item, p, d) = orders[k];
                if state[k] == 2 {
                    continue;
                }
                let s = if state[k] == 0 { stop(p, &[item], &[]) } else { stop(d, &[], &[item]) };
                state[k] += 1;
                cur.push(s);
                go(orders, state, cur, out);
                cur.pop();
                state[k] -= 1;
            }
        }
        let mut out = Vec::new();
        go(orders, &mut vec![0; orders.len()], &mut Vec::new(), &mut out);
        out
    }

    #[test]
    fn matches_brute_force_on_a_toy() {
        let orders = vec![
            order("a", 0, 2, PalletQuantity::new(1, 0, 0), 0, 86_000),
            order("b", 3, 1, PalletQuantity::new(1, 0, 0), 0, 86_000),
            order("c", 4, 5, PalletQuantity::new(1, 0, 0), 0, 86_000),
        ];
        let sim = SimState::with_placement(instance(6, 2, 2, 15, orders), &[fid(5), fid(0)]).unwrap();
        let snap = sim.snapshot();
        let c = ctx(&sim);
        let spec = [("a-0001", 0, 2), ("b-0001", 3, 1), ("c-0001", 4, 5)];
        let initial = plan(vec![(
            1,
            vec![
                stop(0, &["a-0001"], &[]),
                stop(2, &[], &["a-0001"]),
                stop(3, &["b-0001"], &[]),
                stop(1, &[], &["b-0001"]),
                stop(4, &["c-0001"], &[]),
                stop(5, &[], &["c-0001"]),
            ],
        )]);
        let cfg = VnsConfig::default();
        let out = vns_improve(&c, &snap, &initial, &cfg).unwrap();

        let mut best = f64::INFINITY;
        for mask in 0..8u32 {
            let mine: Vec<_> = (0..3).filter(|k| mask & (1 << k) != 0).map(|k| spec[k]).collect();
            let theirs: Vec<_> = (0..3).filter(|k| mask & (1 << k) == 0).map(|k| spec[k]).collect();
            for r1 in sequences(&mine) {
                for r2 in sequences(&theirs) {
                    let candidate = plan(vec![(1, r1.clone()), (2, r2.clone())]);
                    if validate_dispatch(c.network, &snap, &candidate).is_ok() {
                        best = best.min(plan_cost(&c, &snap, &candidate, &cfg));
                    }
                }
            }
        }
        assert!(out.final_cost <= best + 1e-6, "vns {} vs brute force {}", out.final_cost, best);
        assert!((plan_cost(&c, &snap, &out.plan, &cfg) - out.final_cost).abs() < 1e-6);
        assert!(out.trace.windows(2).all(|w| w[1] < w[0]));
    }
}
