use std::io::BufRead;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use dpdp::harness::{
    exit, run_bench, simulate, write_bench_csv, ExternalConfig, PolicySpec, ProcessMode, RunReport,
    INTERACTION_DIR_ENV, SUCCESS_TOKEN,
};
use dpdp::io::{self, DispatchDocs, SnapshotDocs};
use dpdp_core::solvers::{ThresholdConfig, VnsConfig};
use dpdp_core::{
    generate_instance, replay_score, validate_dispatch, CompletionSemantics, GeneratorParams, Instance,
    PlanningContext, ServiceTimes, ShiftWindow, SimConfig,
};

#[derive(Parser)]
#[command(name = "dpdp", version, about = "Dynamic pickup and delivery simulator and benchmark harness")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a synthetic instance as four CSV tables.
    Generate {
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        gen: GenArgs,
    },
    /// Run one policy on one instance.
    Simulate {
        #[arg(long)]
        instance: PathBuf,
        #[command(flatten)]
        policy: PolicyArgs,
        #[arg(long, default_value = "report.json")]
        report: PathBuf,
        #[arg(long, default_value = "events.jsonl")]
        log: PathBuf,
        #[command(flatten)]
        sim: SimArgs,
    },
    /// Check the output documents in an interaction directory against its
    /// input documents.
    Validate {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, env = INTERACTION_DIR_ENV)]
        dir: PathBuf,
        #[command(flatten)]
        sim: SimArgs,
    },
    /// Recompute the score of a saved event log.
    Score {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        log: PathBuf,
        /// Report written by `simulate`; the replayed score must match it.
        #[arg(long)]
        report: Option<PathBuf>,
        /// The run did not finish; score completed orders only.
        #[arg(long, conflicts_with = "report")]
        incomplete: bool,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        sim: SimArgs,
    },
    /// Run a matrix of instances and policies and write a CSV summary.
    Bench {
        /// Instance directories; each becomes one matrix row group.
        #[arg(long = "instance")]
        instances: Vec<PathBuf>,
        /// Also generate this many instances, with seeds counting up from
        /// `--seed`.
        #[arg(long, default_value_t = 0)]
        generate: u64,
        #[command(flatten)]
        gen: GenArgs,
        #[arg(long, value_delimiter = ',', default_value = "greedy,threshold,vns")]
        policies: Vec<PolicyName>,
        #[command(flatten)]
        tuning: TuningArgs,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Add a wall-clock runtime column.
        #[arg(long)]
        timing: bool,
        #[command(flatten)]
        sim: SimArgs,
    },
    /// Act as an external algorithm: read the input documents, write a plan
    /// and print the success token.
    Algorithm {
        /// Instance directory; only the factory and route tables are read.
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, env = INTERACTION_DIR_ENV, default_value = "algorithm/data_interaction")]
        dir: PathBuf,
        #[arg(long, value_enum, default_value_t = PolicyName::Greedy)]
        policy: PolicyName,
        #[command(flatten)]
        tuning: TuningArgs,
        /// Serve one round per line read from standard input.
        #[arg(long)]
        persistent: bool,
        #[command(flatten)]
        sim: SimArgs,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum PolicyName {
    Idle,
    Greedy,
    Threshold,
    Vns,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Completion {
    Arrival,
    UnloadDone,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ServiceTimeSource {
    Omega,
    OrderTable,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Mode {
    Fresh,
    Persistent,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(u64).range(1..))]
    factories: u64,
    #[arg(long, default_value_t = 5, value_parser = clap::value_parser!(u64).range(1..))]
    vehicles: u64,
    #[arg(long, default_value_t = 50, value_parser = clap::value_parser!(u64).range(1..))]
    orders: u64,
    #[arg(long, default_value_t = 15)]
    capacity: u32,
    #[arg(long, default_value_t = 1)]
    min_docks: u32,
    #[arg(long, default_value_t = 4)]
    max_docks: u32,
    #[arg(long, default_value_t = 86_400)]
    horizon: i64,
    #[arg(long, default_value_t = 14_400)]
    lead_time: i64,
    #[arg(long, default_value_t = 60.0)]
    region_km: f64,
    #[arg(long, default_value_t = 1.0)]
    min_distance_km: f64,
    #[arg(long, default_value_t = 40.0)]
    speed_kmh: f64,
    #[arg(long, default_value_t = 0.2)]
    slack: f64,
    #[arg(long, default_value_t = 0.03)]
    large_order_rate: f64,
}

impl GenArgs {
    fn params(&self, seed: u64) -> GeneratorParams {
        GeneratorParams {
            seed,
            factories: self.factories as usize,
            vehicles: self.vehicles as usize,
            orders: self.orders as usize,
            capacity: self.capacity,
            min_docks: self.min_docks,
            max_docks: self.max_docks,
            horizon: self.horizon,
            lead_time: self.lead_time,
            region_km: self.region_km,
            min_distance_km: self.min_distance_km,
            speed_kmh: self.speed_kmh,
            slack: self.slack,
            large_order_rate: self.large_order_rate,
        }
    }
}

/// Simulation parameters. Unset flags keep the value from `--config`, or
/// the built-in default.
#[derive(Args)]
struct SimArgs {
    /// JSON file with simulation parameters.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    epoch_length: Option<i64>,
    #[arg(long)]
    epochs_per_day: Option<u32>,
    #[arg(long)]
    dock_approach_time: Option<i64>,
    /// Seconds per standard pallet to load or unload.
    #[arg(long)]
    omega: Option<i64>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    dispatch_deadline: Option<i64>,
    /// Per-round limit for external algorithms, seconds.
    #[arg(long)]
    round_limit: Option<u64>,
    /// Seed for dock tie-breaks and initial vehicle placement.
    #[arg(long)]
    sim_seed: Option<u64>,
    #[arg(long, value_enum)]
    completion: Option<Completion>,
    #[arg(long, value_enum)]
    service_times: Option<ServiceTimeSource>,
    /// Unix timestamp of simulation time zero.
    #[arg(long)]
    horizon_start: Option<i64>,
    #[arg(long)]
    max_epochs: Option<u32>,
    /// Dock opening window, `HH:MM:SS-HH:MM:SS`; repeat for several.
    #[arg(long = "work-shift", value_parser = parse_shift)]
    work_shifts: Vec<ShiftWindow>,
}

fn parse_shift(s: &str) -> Result<ShiftWindow, String> {
    let (a, b) = s.split_once('-').ok_or("expected START-END")?;
    let clock = |t: &str| io::tables::parse_clock(t).ok_or_else(|| format!("bad clock time {t:?}"));
    let end = if b.trim() == "24:00:00" { 86_400 } else { clock(b)? };
    Ok(ShiftWindow { start: clock(a)?, end })
}

impl SimArgs {
    fn config(&self) -> anyhow::Result<SimConfig> {
        let mut c: SimConfig = match &self.config {
            Some(p) => serde_json::from_slice(&std::fs::read(p).with_context(|| format!("reading {}", p.display()))?)
                .with_context(|| format!("parsing {}", p.display()))?,
            None => SimConfig::default(),
        };
        macro_rules! set {
            ($($field:ident <- $arg:expr),* $(,)?) => {$(
                if let Some(v) = $arg { c.$field = v; }
            )*};
        }
        set!(
            epoch_length <- self.epoch_length,
            epochs_per_day <- self.epochs_per_day,
            dock_approach_time <- self.dock_approach_time,
            omega <- self.omega,
            lambda <- self.lambda,
            dispatch_deadline <- self.dispatch_deadline,
            algorithm_time_limit <- self.round_limit,
            rng_seed <- self.sim_seed,
            horizon_start_unix <- self.horizon_start,
            max_epochs <- self.max_epochs,
        );
        if let Some(m) = self.completion {
            c.completion = match m {
                Completion::Arrival => CompletionSemantics::Arrival,
                Completion::UnloadDone => CompletionSemantics::UnloadDone,
            };
        }
        if let Some(s) = self.service_times {
            c.service_times = match s {
                ServiceTimeSource::Omega => ServiceTimes::Omega,
                ServiceTimeSource::OrderTable => ServiceTimes::OrderTable,
            };
        }
        if !self.work_shifts.is_empty() {
            c.work_shifts = Some(self.work_shifts.clone());
        }
        c.validate().map_err(|e| Usage(e.to_string()))?;
        Ok(c)
    }
}

#[derive(Args)]
struct TuningArgs {
    /// Threshold: release orders due within this many seconds.
    #[arg(long)]
    time_threshold: Option<i64>,
    /// Threshold: release a pickup factory's orders at this share of capacity.
    #[arg(long)]
    fill_threshold: Option<f64>,
    /// Threshold: do not add held orders to passing routes.
    #[arg(long)]
    no_hitch_ride: bool,
    #[arg(long)]
    vns_iterations: Option<u32>,
    #[arg(long)]
    vns_seed: Option<u64>,
    /// Wall-clock cap per VNS call. Unset means iteration cap only.
    #[arg(long)]
    vns_time_ms: Option<u64>,
    #[arg(long)]
    vns_lateness_weight: Option<f64>,
    #[arg(long)]
    vns_dock_wait_weight: Option<f64>,
    #[arg(long)]
    vns_neighbors: Option<usize>,
}

impl TuningArgs {
    fn spec(&self, name: PolicyName) -> PolicySpec {
        match name {
            PolicyName::Idle => PolicySpec::Idle,
            PolicyName::Greedy => PolicySpec::Greedy,
            PolicyName::Threshold => {
                let mut c = ThresholdConfig::default();
                if let Some(t) = self.time_threshold {
                    c.time_threshold = t;
                }
                if let Some(f) = self.fill_threshold {
                    c.fill_threshold = f;
                }
                c.hitch_ride = !self.no_hitch_ride;
                PolicySpec::Threshold(c)
            }
            PolicyName::Vns => {
                let mut c = VnsConfig::default();
                if let Some(n) = self.vns_iterations {
                    c.max_iterations = n;
                }
                if let Some(s) = self.vns_seed {
                    c.rng_seed = s;
                }
                if let Some(ms) = self.vns_time_ms {
                    c.time_budget_ms = ms;
                }
                c.lateness_weight = self.vns_lateness_weight.or(c.lateness_weight);
                if let Some(w) = self.vns_dock_wait_weight {
                    c.dock_wait_weight = w;
                }
                if let Some(n) = self.vns_neighbors {
                    c.neighbor_vehicles = n;
                }
                PolicySpec::Vns { config: c, wall_clock: self.vns_time_ms.map(Duration::from_millis) }
            }
        }
    }
}

#[derive(Args)]
struct PolicyArgs {
    #[arg(long, value_enum, default_value_t = PolicyName::Greedy)]
    policy: PolicyName,
    #[command(flatten)]
    tuning: TuningArgs,
    /// Interaction directory for an external algorithm.
    #[arg(long, env = INTERACTION_DIR_ENV, default_value = "algorithm/data_interaction")]
    dir: PathBuf,
    #[arg(long, value_enum, default_value_t = Mode::Fresh)]
    mode: Mode,
    /// External algorithm command line, after `--`. Overrides `--policy`.
    #[arg(last = true)]
    external: Vec<String>,
}

#[derive(Debug)]
struct Usage(String);

impl std::fmt::Display for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

fn load(dir: &Path, config: SimConfig) -> anyhow::Result<Instance> {
    io::read_instance(dir, config).with_context(|| format!("reading instance {}", dir.display()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            let code = if e.downcast_ref::<Usage>().is_some() { exit::USAGE } else { exit::FAILURE };
            ExitCode::from(code as u8)
        }
    }
}

fn run(command: Command) -> anyhow::Result<i32> {
    match command {
        Command::Generate { out, gen } => {
            let instance = generate_instance(&gen.params(gen.seed), SimConfig::default()).map_err(|e| Usage(e.to_string()))?;
            std::fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
            io::write_instance(&out, &instance)?;
            Ok(exit::OK)
        }
        Command::Simulate { instance, policy, report, log, sim } => {
            let config = sim.config()?;
            let limit = Duration::from_secs(config.algorithm_time_limit);
            let instance = load(&instance, config)?;
            let spec = if policy.external.is_empty() {
                policy.tuning.spec(policy.policy)
            } else {
                PolicySpec::External(ExternalConfig {
                    command: policy.external,
                    dir: policy.dir,
                    limit,
                    mode: match policy.mode {
                        Mode::Fresh => ProcessMode::Fresh,
                        Mode::Persistent => ProcessMode::Persistent,
                    },
                })
            };
            let run = simulate(&instance, &spec);
            let rep = RunReport::new(&run, spec.name());
            io::write_json(&report, &rep)?;
            io::write_event_log(&log, &run.log)?;
            eprintln!("{}: f = {} (f1 = {}, f2 = {})", rep.status, rep.score.f, rep.score.f1, rep.score.f2);
            Ok(rep.exit_code)
        }
        Command::Validate { instance, dir, sim } => {
            let config = sim.config()?;
            let network = io::read_network(&instance)?;
            let snapshot = SnapshotDocs::read(&dir)?.to_snapshot(&network, &config)?;
            let plan = match DispatchDocs::read(&dir).and_then(|d| d.to_plan(&snapshot, &network, &config)) {
                Ok(plan) => plan,
                Err(e) => {
                    eprintln!("{e}");
                    return Ok(exit::PROTOCOL);
                }
            };
            match validate_dispatch(&network, &snapshot, &plan) {
                Ok(()) => Ok(exit::OK),
                Err(violations) => {
                    println!("{}", serde_json::to_string_pretty(&violations)?);
                    Ok(exit::VALIDATION)
                }
            }
        }
        Command::Score { instance, log, report, incomplete, out, sim } => {
            let config = sim.config()?;
            let instance = load(&instance, config.clone())?;
            let events = io::read_event_log(&log)?;
            let expected: Option<RunReport> = match &report {
                Some(p) => Some(serde_json::from_slice(&std::fs::read(p)?).with_context(|| format!("parsing {}", p.display()))?),
                None => None,
            };
            let complete = expected.as_ref().map_or(!incomplete, |r| r.score.complete);
            let scored = match replay_score(&events, &instance, &config, complete) {
                Ok(s) => s,
                Err(e) => {
                    eprintln!("replay failed at event {}: {}", e.index, e.message);
                    return Ok(exit::FAILURE);
                }
            };
            match &out {
                Some(p) => io::write_json(p, &scored)?,
                None => println!("{}", serde_json::to_string_pretty(&scored)?),
            }
            if let Some(expected) = expected {
                if expected.score != scored {
                    eprintln!("replayed score differs from the run report");
                    return Ok(exit::FAILURE);
                }
            }
            Ok(exit::OK)
        }
        Command::Bench { instances, generate, gen, policies, tuning, out, timing, sim } => {
            let config = sim.config()?;
            let mut matrix = Vec::new();
            for dir in &instances {
                let name = dir.file_name().map_or_else(|| dir.display().to_string(), |n| n.to_string_lossy().into_owned());
                matrix.push((name, load(dir, config.clone())?));
            }
            for k in 0..generate {
                let seed = gen.seed + k;
                let inst = generate_instance(&gen.params(seed), config.clone()).map_err(|e| Usage(e.to_string()))?;
                matrix.push((format!("seed{seed}"), inst));
            }
            if matrix.is_empty() {
                bail!(Usage("no instances: pass --instance or --generate".into()));
            }
            let specs: Vec<PolicySpec> = policies.iter().map(|p| tuning.spec(*p)).collect();
            let rows = run_bench(&matrix, &specs);
            match out {
                Some(p) => {
                    let f = std::fs::File::create(&p).with_context(|| format!("creating {}", p.display()))?;
                    write_bench_csv(&rows, timing, f)?;
                }
                None => write_bench_csv(&rows, timing, std::io::stdout().lock())?,
            }
            Ok(exit::OK)
        }
        Command::Algorithm { instance, dir, policy, tuning, persistent, sim } => {
            let config = sim.config()?;
            let network = io::read_network(&instance)?;
            let mut algo = tuning.spec(policy).build();
            let ctx = PlanningContext { network: &network, config: &config };
            let mut round = || -> anyhow::Result<()> {
                let snapshot = SnapshotDocs::read(&dir)?.to_snapshot(&network, &config)?;
                let plan = algo.dispatch(&ctx, &snapshot)?;
                DispatchDocs::from_plan(&plan, &network, &config).write(&dir)?;
                println!("{SUCCESS_TOKEN}");
                Ok(())
            };
            if persistent {
                for line in std::io::stdin().lock().lines() {
                    line?;
                    round()?;
                }
            } else {
                round()?;
            }
            Ok(exit::OK)
        }
    }
}
