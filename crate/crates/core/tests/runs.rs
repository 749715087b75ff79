use dpdp_core::eval::verify_run;
use dpdp_core::solvers::{GreedyPolicy, IdlePolicy, ThresholdPolicy};
use dpdp_core::{generate_instance, run_to_completion, AbortReason, GeneratorParams, RunOutcome, SimConfig};

fn instance(seed: u64, orders: usize, vehicles: usize) -> dpdp_core::Instance {
    let p = GeneratorParams { seed, orders, vehicles, ..GeneratorParams::default() };
    generate_instance(&p, SimConfig { rng_seed: seed, ..SimConfig::default() }).unwrap()
}

#[test]
fn greedy_finishes_and_replays() {
    for seed in 0..8 {
        let inst = instance(seed, 40, 5);
        let run = run_to_completion(&inst, &mut GreedyPolicy);
        assert_eq!(run.outcome, RunOutcome::Finished, "seed {seed}: {:?}", run.outcome);
        assert_eq!(run.report.orders_completed, 40);
        verify_run(&run, &inst).unwrap();
    }
}

#[test]
fn threshold_finishes_and_replays() {
    for seed in 0..8 {
        let inst = instance(seed, 40, 5);
        let run = run_to_completion(&inst, &mut ThresholdPolicy::default());
        assert_eq!(run.outcome, RunOutcome::Finished, "seed {seed}: {:?}", run.outcome);
        verify_run(&run, &inst).unwrap();
    }
}

#[test]
fn idle_policy_hits_dispatch_deadline() {
    let inst = instance(3, 10, 2);
    let first = inst.orders[0].creation_time;
    let run = run_to_completion(&inst, &mut IdlePolicy);
    let RunOutcome::Aborted(AbortReason::DispatchDeadline { epoch, time, .. }) = run.outcome else {
        panic!("{:?}", run.outcome)
    };
    assert_eq!(time, (i64::from(epoch) + 1) * 600);
    assert!(time - first > 14_400 && time - 600 - first <= 14_400);
    assert!(!run.report.complete);
    verify_run(&run, &inst).unwrap();
}

#[test]
fn vns_finishes_and_replays() {
    use dpdp_core::solvers::VnsPolicy;
    for seed in 0..4 {
        let inst = instance(seed, 40, 5);
        let run = run_to_completion(&inst, &mut VnsPolicy::default());
        assert_eq!(run.outcome, RunOutcome::Finished, "seed {seed}: {:?}", run.outcome);
        verify_run(&run, &inst).unwrap();
        let greedy = run_to_completion(&inst, &mut GreedyPolicy);
        println!("seed {seed}: greedy f={} f1={} f2={:.1} | vns f={} f1={} f2={:.1}", greedy.report.f, greedy.report.f1, greedy.report.f2, run.report.f, run.report.f1, run.report.f2);
    }
}
