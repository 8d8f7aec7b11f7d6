//! `analytic`: exact outage and overhead over a parameter grid.
//!
//! Columns: `scheme,n,k,f,outage,log10_outage,network_outage,overhead`.
//! Outages and overhead are exact fractions; `log10_outage` is a float.

use std::io::Write;
use std::path::PathBuf;

use anonsched::analytic::{outage_network, outage_single, overhead};
use anonsched::{SchemeKind, SystemParams};
use clap::Args;
use num_rational::BigRational;

use crate::config::Config;
use crate::error::CliError;
use crate::grid::{IntList, SchemeList};

const CONFIG_KEYS: &[&str] = &["scheme", "n", "k", "f", "l", "t"];

#[derive(Debug, Clone, Default, Args)]
pub struct AnalyticArgs {
    /// Schemes to evaluate: `all` or a comma list such as `RN_RD,FN_FD`.
    #[arg(long)]
    pub scheme: Option<SchemeList>,
    /// Node counts, e.g. `8`, `2,4,8` or `2..16`.
    #[arg(long)]
    pub n: Option<IntList>,
    /// Messages per node direction.
    #[arg(long)]
    pub k: Option<IntList>,
    /// Data slots per session.
    #[arg(long)]
    pub f: Option<IntList>,
    /// Data frame length in bits.
    #[arg(long)]
    pub l: Option<usize>,
    /// Dialog bits per secret bit.
    #[arg(long)]
    pub t: Option<usize>,
    /// Drop invalid grid points (listed in the header) instead of failing.
    #[arg(long)]
    pub skip_invalid: bool,
    /// key=value experiment file; flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Write CSV here instead of stdout.
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

/// Fully resolved sweep.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnalyticPlan {
    pub schemes: SchemeList,
    pub n: IntList,
    pub k: IntList,
    pub f: IntList,
    pub l: usize,
    pub t: usize,
    pub skip_invalid: bool,
}

impl AnalyticPlan {
    pub fn resolve(args: &AnalyticArgs) -> Result<Self, CliError> {
        let cfg = Config::load(args.config.as_deref(), CONFIG_KEYS)?;
        let d = SystemParams::reference();
        Ok(Self {
            schemes: cfg.pick(args.scheme.clone(), "scheme", SchemeList(SchemeKind::ALL.to_vec()))?,
            n: cfg.pick(args.n.clone(), "n", IntList(vec![d.n]))?,
            k: cfg.pick(args.k.clone(), "k", IntList(vec![d.k]))?,
            f: cfg.pick(args.f.clone(), "f", IntList(vec![d.f]))?,
            l: cfg.pick(args.l, "l", d.l)?,
            t: cfg.pick(args.t, "t", d.t)?,
            skip_invalid: args.skip_invalid,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnalyticRow {
    pub scheme: SchemeKind,
    pub n: usize,
    pub k: usize,
    pub f: usize,
    pub outage: BigRational,
    pub log10_outage: f64,
    pub network_outage: BigRational,
    pub overhead: BigRational,
}

/// Rows in grid order (scheme, then n, k, f) plus the skipped points.
pub fn analytic_rows(plan: &AnalyticPlan) -> Result<(Vec<AnalyticRow>, Vec<String>), CliError> {
    let mut rows = Vec::new();
    let mut skipped = Vec::new();
    for &scheme in &plan.schemes.0 {
        for &n in &plan.n.0 {
            for &k in &plan.k.0 {
                for &f in &plan.f.0 {
                    let point = format!("scheme={scheme} n={n} k={k} f={f}");
                    let evaluated = outage_single(scheme, n, k, f).and_then(|single| {
                        Ok(AnalyticRow {
                            scheme,
                            n,
                            k,
                            f,
                            network_outage: outage_network(scheme, n, k, f)?,
                            overhead: overhead(n, f, plan.l, plan.t)?,
                            log10_outage: single.log10_value,
                            outage: single.value,
                        })
                    });
                    match evaluated {
                        Ok(row) => rows.push(row),
                        Err(source) if plan.skip_invalid => skipped.push(format!("{point}: {source}")),
                        Err(source) => return Err(CliError::InvalidPoint { point, source }),
                    }
                }
            }
        }
    }
    Ok((rows, skipped))
}

pub fn write_csv(plan: &AnalyticPlan, out: &mut dyn Write) -> Result<(), CliError> {
    let (rows, skipped) = analytic_rows(plan)?;
    writeln!(
        out,
        "# anonsched analytic schemes={} n={} k={} f={} l={} t={}",
        plan.schemes, plan.n, plan.k, plan.f, plan.l, plan.t
    )?;
    for point in &skipped {
        writeln!(out, "# skipped {point}")?;
    }
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["scheme", "n", "k", "f", "outage", "log10_outage", "network_outage", "overhead"])?;
    for r in rows {
        w.write_record([
            r.scheme.name().to_string(),
            r.n.to_string(),
            r.k.to_string(),
            r.f.to_string(),
            r.outage.to_string(),
            r.log10_outage.to_string(),
            r.network_outage.to_string(),
            r.overhead.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn run(args: &AnalyticArgs, out: &mut dyn Write) -> Result<(), CliError> {
    write_csv(&AnalyticPlan::resolve(args)?, out)
}
