//! `validate`: exhaustive enumeration against the closed forms at every
//! enumerable point, in both attack modes.
//!
//! Columns: `scheme,n,k,f,mode,brute_force,closed_form,agree`. A trailing
//! comment line gives the totals. Any disagreement makes the command fail.

use std::io::Write;
use std::path::PathBuf;

use anonsched::analytic::{outage_network, outage_single};
use anonsched::attacker::{enumerate_attack_space, AttackMode, MAX_ENUM_SESSIONS, MAX_ENUM_SESSION_LEN};
use anonsched::{derive_counts, validate_params, ParamError, SchemeKind, SystemParams};
use clap::Args;
use num_rational::BigRational;

use crate::error::CliError;

#[derive(Debug, Clone, Args)]
pub struct ValidateArgs {
    /// Largest total session count to enumerate (at most 8).
    #[arg(long, default_value_t = MAX_ENUM_SESSIONS)]
    pub max_size: usize,
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

/// Closed-form success probability for one point and mode.
pub type ClosedForm = dyn Fn(SchemeKind, usize, usize, usize, AttackMode) -> Result<BigRational, ParamError> + Sync;

pub fn closed_form(
    scheme: SchemeKind,
    n: usize,
    k: usize,
    f: usize,
    mode: AttackMode,
) -> Result<BigRational, ParamError> {
    match mode {
        AttackMode::SingleNode => outage_single(scheme, n, k, f).map(|r| r.value),
        AttackMode::NetworkWide => outage_network(scheme, n, k, f),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckedPoint {
    pub scheme: SchemeKind,
    pub n: usize,
    pub k: usize,
    pub f: usize,
    pub mode: AttackMode,
    pub brute_force: BigRational,
    pub closed_form: BigRational,
}

impl CheckedPoint {
    pub fn agrees(&self) -> bool {
        self.brute_force == self.closed_form
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ValidationReport {
    pub points: Vec<CheckedPoint>,
}

impl ValidationReport {
    pub fn mismatches(&self) -> usize {
        self.points.iter().filter(|p| !p.agrees()).count()
    }
}

fn probe(n: usize, k: usize, f: usize) -> SystemParams {
    SystemParams { n, k, f, l: 1, t: 1, p: 0.5, q: 0.5 }
}

/// Every valid `(scheme, n, k, f)` with at most `max_size` sessions and
/// sessions of at most four slots, in scheme, f, n, k order.
pub fn enumerable_points(max_size: usize) -> Vec<(SchemeKind, usize, usize, usize)> {
    let mut out = Vec::new();
    for scheme in SchemeKind::ALL {
        for f in 1..=MAX_ENUM_SESSION_LEN {
            for n in 1..=max_size {
                for k in 1..=max_size * f {
                    let p = probe(n, k, f);
                    if validate_params(p, scheme).is_ok() && derive_counts(&p).sessions_total <= max_size {
                        out.push((scheme, n, k, f));
                    }
                }
            }
        }
    }
    out
}

type Checked = Result<[CheckedPoint; 2], CliError>;

fn check_point((scheme, n, k, f): (SchemeKind, usize, usize, usize), closed: &ClosedForm) -> Checked {
    let report = enumerate_attack_space(scheme, probe(n, k, f))?;
    let point = |mode, brute_force| -> Result<CheckedPoint, CliError> {
        let closed_form = closed(scheme, n, k, f, mode)
            .map_err(|source| CliError::InvalidPoint { point: format!("scheme={scheme} n={n} k={k} f={f}"), source })?;
        Ok(CheckedPoint { scheme, n, k, f, mode, brute_force, closed_form })
    };
    Ok([point(AttackMode::SingleNode, report.single_success)?, point(AttackMode::NetworkWide, report.network_success)?])
}

/// Checks every enumerable point against `closed`. Points are spread over
/// threads; the report keeps grid order.
pub fn validate_with(max_size: usize, closed: &ClosedForm) -> Result<ValidationReport, CliError> {
    if max_size == 0 {
        return Err(CliError::Usage("max-size must be at least 1".into()));
    }
    if max_size > MAX_ENUM_SESSIONS {
        return Err(CliError::Usage(format!(
            "max-size {max_size} exceeds the enumeration feasibility guard of {MAX_ENUM_SESSIONS} sessions"
        )));
    }
    let points = enumerable_points(max_size);
    let threads = std::thread::available_parallelism().map_or(1, |n| n.get()).min(points.len().max(1));
    let results: Vec<Vec<(usize, Checked)>> = std::thread::scope(|scope| {
        let handles: Vec<_> = (0..threads)
            .map(|w| {
                let points = &points;
                scope.spawn(move || {
                    (w..points.len()).step_by(threads).map(|i| (i, check_point(points[i], closed))).collect()
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("validation worker panicked")).collect()
    });
    let mut ordered: Vec<(usize, Checked)> = results.into_iter().flatten().collect();
    ordered.sort_by_key(|(i, _)| *i);
    let mut report = ValidationReport::default();
    for (_, pair) in ordered {
        report.points.extend(pair?);
    }
    Ok(report)
}

pub fn write_report(report: &ValidationReport, max_size: usize, out: &mut dyn Write) -> Result<(), CliError> {
    writeln!(out, "# anonsched validate max_size={max_size} session_len<={MAX_ENUM_SESSION_LEN}")?;
    {
        let mut w = csv::Writer::from_writer(&mut *out);
        w.write_record(["scheme", "n", "k", "f", "mode", "brute_force", "closed_form", "agree"])?;
        for p in &report.points {
            w.write_record([
                p.scheme.name().to_string(),
                p.n.to_string(),
                p.k.to_string(),
                p.f.to_string(),
                p.mode.name().to_string(),
                p.brute_force.to_string(),
                p.closed_form.to_string(),
                p.agrees().to_string(),
            ])?;
        }
        w.flush()?;
    }
    writeln!(out, "# checked={} mismatches={}", report.points.len(), report.mismatches())?;
    Ok(())
}

pub fn run(args: &ValidateArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let report = validate_with(args.max_size, &closed_form)?;
    write_report(&report, args.max_size, out)?;
    match report.mismatches() {
        0 => Ok(()),
        bad => Err(CliError::ValidationFailed(bad)),
    }
}
