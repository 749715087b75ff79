//! Properties that must hold at every epoch of every run.

use dpdp_core::solvers::{plan_cost, vns_improve, ThresholdConfig, ThresholdPolicy, VnsConfig};
use dpdp_core::{
    generate_instance, validate_dispatch, DispatchPolicy, EpochOutcome, EventKind, GeneratorParams, Instance,
    PlanningContext, SimConfig, SimState,
};
use proptest::prelude::*;

fn instance(seed: u64, orders: usize, vehicles: usize, factories: usize, sim_seed: u64) -> Instance {
    let p = GeneratorParams { seed, orders, vehicles, factories, ..GeneratorParams::default() };
    generate_instance(&p, SimConfig { rng_seed: sim_seed, ..SimConfig::default() }).unwrap()
}

/// Steps `inst` epoch by epoch with `policy`, handing every snapshot and
/// plan to `check` before the plan is applied.
fn drive(inst: &Instance, policy: &mut dyn DispatchPolicy, mut check: impl FnMut(&PlanningContext<'_>, &dpdp_core::Snapshot, &dpdp_core::DispatchPlan)) {
    let mut sim = SimState::new(inst.clone());
    let ctx = PlanningContext { network: &inst.network, config: &inst.config };
    let mut snapshot = sim.snapshot();
    loop {
        let plan = policy.dispatch(&ctx, &snapshot).expect("reference policies do not fail");
        check(&ctx, &snapshot, &plan);
        sim.apply_dispatch(&plan).expect("checked above");
        match sim.advance_epoch() {
            EpochOutcome::Continue(next) => snapshot = next,
            EpochOutcome::Finished => break,
            EpochOutcome::Aborted(reason) => panic!("{reason:?}"),
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn policy_plans_always_validate(
        seed in any::<u64>(),
        sim_seed in any::<u64>(),
        orders in 3usize..30,
        vehicles in 1usize..6,
        factories in 3usize..10,
        threshold in any::<bool>(),
    ) {
        let inst = instance(seed, orders, vehicles, factories, sim_seed);
        let mut greedy = dpdp_core::solvers::GreedyPolicy;
        let mut thr = ThresholdPolicy::new(ThresholdConfig::default());
        let policy: &mut dyn DispatchPolicy = if threshold { &mut thr } else { &mut greedy };
        drive(&inst, policy, |ctx, snap, plan| {
            let first = validate_dispatch(ctx.network, snap, plan);
            assert_ok(&first);
            // Validation is a pure function of its inputs.
            assert_eq!(first, validate_dispatch(ctx.network, snap, plan));
        });
    }

    #[test]
    fn vns_never_raises_the_epoch_cost(seed in any::<u64>(), orders in 5usize..25, vehicles in 2usize..5) {
        let inst = instance(seed, orders, vehicles, 6, seed);
        let cfg = VnsConfig { max_iterations: 30, ..VnsConfig::default() };
        drive(&inst, &mut dpdp_core::solvers::GreedyPolicy, |ctx, snap, plan| {
            let out = vns_improve(ctx, snap, plan, &cfg).unwrap();
            validate_dispatch(ctx.network, snap, &out.plan).unwrap();
            let before = plan_cost(ctx, snap, plan, &cfg);
            let after = plan_cost(ctx, snap, &out.plan, &cfg);
            assert!(after <= before + 1e-6, "{after} > {before}");
            assert!(out.trace.windows(2).all(|w| w[1] < w[0]));
        });
    }

    #[test]
    fn event_log_is_time_ordered_and_balanced(seed in any::<u64>(), orders in 3usize..30, vehicles in 1usize..6) {
        let inst = instance(seed, orders, vehicles, 6, seed);
        let run = dpdp_core::run_to_completion(&inst, &mut dpdp_core::solvers::GreedyPolicy);
        prop_assert!(run.is_finished());
        prop_assert!(run.log.iter().zip(run.log.iter().skip(1)).all(|(a, b)| a.time <= b.time));
        let loaded = run.log.iter().filter(|e| matches!(e.kind, EventKind::ItemLoaded { .. })).count();
        let delivered = run.log.iter().filter(|e| matches!(e.kind, EventKind::ItemDelivered { .. })).count();
        let items: u32 = inst.orders.iter().map(|o| o.quantity.item_count()).sum();
        prop_assert_eq!(loaded, items as usize);
        prop_assert_eq!(delivered, items as usize);
    }
}

fn assert_ok<E: std::fmt::Debug>(r: &Result<(), E>) {
    assert!(r.is_ok(), "{r:?}");
}
