//! `simulate`: Monte Carlo attacks plus full supersession runs.
//!
//! One CSV, one header, a leading `record` column:
//!
//! - `attack` rows fill `mode`, `trials` .. `exact`;
//! - `run` rows fill `run` and the fairness, awake-time, overhead and
//!   delivery columns.
//!
//! Unused cells are empty. Attack rows depend only on the seed and worker
//! count; run `i` draws from the ChaCha stream `RUN_STREAM_BASE + i` of the
//! same seed, disjoint from the worker streams.

use std::io::Write;
use std::path::PathBuf;

use anonsched::analytic::{outage_network, outage_single};
use anonsched::attacker::{monte_carlo_attack_parallel, AttackMode, AttackResult, PARTITION_RULE};
use anonsched::exact::to_f64;
use anonsched::metrics::{direction_unfairness, empirical_overhead, mean_awake_fraction, node_unfairness};
use anonsched::sim::{run_supersession_with, SimOptions, Transcript};
use anonsched::{validate_params, SchemeKind, SystemParams};
use clap::Args;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::config::Config;
use crate::error::CliError;
use crate::grid::{ModeChoice, SchemeList};

pub const RUN_STREAM_BASE: u64 = 1 << 32;

const CONFIG_KEYS: &[&str] =
    &["scheme", "n", "k", "f", "l", "t", "p", "q", "trials", "seed", "mode", "workers", "runs", "loss"];

pub const COLUMNS: [&str; 16] = [
    "record",
    "scheme",
    "mode",
    "run",
    "trials",
    "successes",
    "estimate",
    "ci95_halfwidth",
    "node_stage",
    "direction_stage",
    "exact",
    "node_unfairness",
    "direction_unfairness",
    "mean_awake_fraction",
    "overhead",
    "delivered",
];

#[derive(Debug, Clone, Default, Args)]
pub struct SimulateArgs {
    /// `all` or a comma list of schemes.
    #[arg(long)]
    pub scheme: Option<SchemeList>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub f: Option<usize>,
    #[arg(long)]
    pub l: Option<usize>,
    #[arg(long)]
    pub t: Option<usize>,
    /// Flip probability of a jammed 0.
    #[arg(long)]
    pub p: Option<f64>,
    /// Flip probability of a jammed 1.
    #[arg(long)]
    pub q: Option<f64>,
    /// Monte Carlo trials per scheme and mode.
    #[arg(long)]
    pub trials: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// `single`, `network` or `both`.
    #[arg(long)]
    pub mode: Option<ModeChoice>,
    /// Worker threads; part of the replay key together with the seed.
    #[arg(long)]
    pub workers: Option<usize>,
    /// Full supersession runs per scheme.
    #[arg(long)]
    pub runs: Option<usize>,
    /// Data frame loss probability in the runs.
    #[arg(long)]
    pub loss: Option<f64>,
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulatePlan {
    pub schemes: SchemeList,
    pub params: SystemParams,
    pub trials: u64,
    pub seed: u64,
    pub mode: ModeChoice,
    pub workers: usize,
    pub runs: usize,
    pub loss: f64,
}

impl SimulatePlan {
    pub fn resolve(args: &SimulateArgs) -> Result<Self, CliError> {
        let cfg = Config::load(args.config.as_deref(), CONFIG_KEYS)?;
        let d = SystemParams::reference();
        let params = SystemParams {
            n: cfg.pick(args.n, "n", d.n)?,
            k: cfg.pick(args.k, "k", d.k)?,
            f: cfg.pick(args.f, "f", d.f)?,
            l: cfg.pick(args.l, "l", d.l)?,
            t: cfg.pick(args.t, "t", d.t)?,
            p: cfg.pick(args.p, "p", d.p)?,
            q: cfg.pick(args.q, "q", d.q)?,
        };
        let plan = Self {
            schemes: cfg.pick(args.scheme.clone(), "scheme", SchemeList(SchemeKind::ALL.to_vec()))?,
            params,
            trials: cfg.pick(args.trials, "trials", 10_000)?,
            seed: cfg.pick(args.seed, "seed", 0)?,
            mode: cfg.pick(args.mode, "mode", ModeChoice::Single)?,
            workers: cfg.pick(args.workers, "workers", 4)?,
            runs: cfg.pick(args.runs, "runs", 1)?,
            loss: cfg.pick(args.loss, "loss", 0.0)?,
        };
        if plan.trials == 0 {
            return Err(CliError::Usage("trials must be at least 1".into()));
        }
        if plan.workers == 0 {
            return Err(CliError::Usage("workers must be at least 1".into()));
        }
        if !(0.0..=1.0).contains(&plan.loss) {
            return Err(CliError::Usage(format!("loss {} is outside [0, 1]", plan.loss)));
        }
        for &scheme in &plan.schemes.0 {
            validate_params(params, scheme)
                .map_err(|source| CliError::InvalidPoint { point: format!("scheme={scheme} {params}"), source })?;
        }
        Ok(plan)
    }
}

/// Measurements of one supersession run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRow {
    pub scheme: SchemeKind,
    pub run: usize,
    /// `None` when nodes own fewer than two sessions.
    pub node_unfairness: Option<f64>,
    pub direction_unfairness: f64,
    pub mean_awake_fraction: f64,
    pub overhead: num_rational::BigRational,
    pub delivered: bool,
}

pub fn run_rng(seed: u64, run: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(RUN_STREAM_BASE + run as u64);
    rng
}

fn measure(scheme: SchemeKind, run: usize, tr: &Transcript) -> Result<RunRow, CliError> {
    Ok(RunRow {
        scheme,
        run,
        node_unfairness: node_unfairness(&tr.truth).ok(),
        direction_unfairness: direction_unfairness(&tr.truth),
        mean_awake_fraction: to_f64(&mean_awake_fraction(&tr.truth)),
        overhead: empirical_overhead(tr)?,
        delivered: tr.all_delivered(),
    })
}

pub fn attack_rows(plan: &SimulatePlan) -> Result<Vec<AttackResult>, CliError> {
    let mut out = Vec::new();
    for &scheme in &plan.schemes.0 {
        for &mode in plan.mode.modes() {
            out.push(monte_carlo_attack_parallel(scheme, plan.params, mode, plan.trials, plan.seed, plan.workers)?);
        }
    }
    Ok(out)
}

pub fn run_rows(plan: &SimulatePlan) -> Result<Vec<RunRow>, CliError> {
    let options = SimOptions { loss_probability: plan.loss, ..SimOptions::default() };
    let mut out = Vec::new();
    for &scheme in &plan.schemes.0 {
        for run in 0..plan.runs {
            let tr = run_supersession_with(scheme, plan.params, &options, &mut run_rng(plan.seed, run))?;
            out.push(measure(scheme, run, &tr)?);
        }
    }
    Ok(out)
}

fn exact_value(scheme: SchemeKind, p: &SystemParams, mode: AttackMode) -> Result<String, CliError> {
    let value = match mode {
        AttackMode::SingleNode => outage_single(scheme, p.n, p.k, p.f).map(|r| r.value),
        AttackMode::NetworkWide => outage_network(scheme, p.n, p.k, p.f),
    };
    value
        .map(|v| v.to_string())
        .map_err(|source| CliError::InvalidPoint { point: format!("scheme={scheme} {p}"), source })
}

pub fn write_csv(plan: &SimulatePlan, out: &mut dyn Write) -> Result<(), CliError> {
    let attacks = attack_rows(plan)?;
    let runs = run_rows(plan)?;
    writeln!(
        out,
        "# anonsched simulate schemes={} {} trials={} seed={} workers={} partition={} mode={} runs={} loss={} run_stream_base={}",
        plan.schemes,
        plan.params,
        plan.trials,
        plan.seed,
        plan.workers,
        PARTITION_RULE,
        plan.mode,
        plan.runs,
        plan.loss,
        RUN_STREAM_BASE
    )?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(COLUMNS)?;
    for a in &attacks {
        let mut row = vec![String::new(); COLUMNS.len()];
        row[0] = "attack".into();
        row[1] = a.scheme.name().into();
        row[2] = a.mode.name().into();
        row[4] = a.trials.to_string();
        row[5] = a.successes.to_string();
        row[6] = a.estimate.to_string();
        row[7] = a.ci95_halfwidth.to_string();
        row[8] = a.stage_estimates.node.to_string();
        row[9] = a.stage_estimates.direction.to_string();
        row[10] = exact_value(a.scheme, &plan.params, a.mode)?;
        w.write_record(&row)?;
    }
    for r in &runs {
        let mut row = vec![String::new(); COLUMNS.len()];
        row[0] = "run".into();
        row[1] = r.scheme.name().into();
        row[3] = r.run.to_string();
        row[11] = r.node_unfairness.map(|v| v.to_string()).unwrap_or_default();
        row[12] = r.direction_unfairness.to_string();
        row[13] = r.mean_awake_fraction.to_string();
        row[14] = r.overhead.to_string();
        row[15] = r.delivered.to_string();
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn run(args: &SimulateArgs, out: &mut dyn Write) -> Result<(), CliError> {
    write_csv(&SimulatePlan::resolve(args)?, out)
}
