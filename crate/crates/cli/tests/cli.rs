use std::process::{Command, Output};

use anonsched::analytic::outage_single;
use anonsched::attacker::AttackMode;
use anonsched::{ParamError, SchemeKind};
use anonsched_cli::commands::validate::{closed_form, validate_with, write_report};
use anonsched_cli::{main_with, CliError, EXIT_FAILURE, EXIT_OK, EXIT_USAGE};
use num_rational::BigRational;

fn bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_anonsched")).args(args).output().expect("run binary")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

/// Data rows (comments and header skipped), split on commas.
fn rows(csv: &str) -> Vec<Vec<String>> {
    csv.lines().filter(|l| !l.starts_with('#')).skip(1).map(|l| l.split(',').map(str::to_string).collect()).collect()
}

fn header(csv: &str) -> &str {
    csv.lines().find(|l| !l.starts_with('#')).unwrap()
}

#[test]
fn analytic_sweep_in_n_is_strictly_decreasing() {
    let o = bin(&["analytic", "--n", "2,4,8,16"]);
    assert_eq!(o.status.code(), Some(EXIT_OK));
    let out = stdout(&o);
    assert!(out.starts_with("# anonsched analytic schemes=RN_RD,RN_FD,FN_RD,FN_FD n=2,4,8,16 k=32 f=4 l=1024 t=6\n"));
    assert_eq!(header(&out), "scheme,n,k,f,outage,log10_outage,network_outage,overhead");
    let rows = rows(&out);
    assert_eq!(rows.len(), 16);
    for chunk in rows.chunks(4) {
        let logs: Vec<f64> = chunk.iter().map(|r| r[5].parse().unwrap()).collect();
        assert!(logs.windows(2).all(|w| w[1] < w[0]), "{logs:?}");
    }
}

#[test]
fn analytic_sweep_in_f_is_increasing() {
    let out = stdout(&bin(&["analytic", "--n", "6", "--k", "8", "--f", "2,4,8"]));
    for chunk in rows(&out).chunks(3) {
        let values: Vec<BigRational> = chunk.iter().map(|r| r[4].parse().unwrap()).collect();
        assert!(values.windows(2).all(|w| w[1] > w[0]), "{values:?}");
    }
}

#[test]
fn analytic_point_passes_through_exactly() {
    let out = stdout(&bin(&["analytic", "--scheme", "RN_RD"]));
    let rows = rows(&out);
    assert_eq!(rows.len(), 1);
    let expected = outage_single(SchemeKind::RnRd, 8, 32, 4).unwrap().value;
    assert_eq!(rows[0][4].parse::<BigRational>().unwrap(), expected);
    assert_eq!(rows[0][7], "9/521");
}

#[test]
fn invalid_grid_point_is_named() {
    let o = bin(&["analytic", "--n", "2", "--k", "2", "--f", "1,2"]);
    assert_eq!(o.status.code(), Some(EXIT_USAGE));
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(err.contains("scheme=RN_FD n=2 k=2 f=1"), "{err}");

    let o = bin(&["analytic", "--n", "2", "--k", "2", "--f", "1,2", "--skip-invalid"]);
    assert_eq!(o.status.code(), Some(EXIT_OK));
    let out = stdout(&o);
    assert!(out.contains("# skipped scheme=FN_FD n=2 k=2 f=1"));
    assert_eq!(rows(&out).len(), 6);
}

#[test]
fn usage_errors_exit_with_two() {
    for args in [
        vec!["simulate", "--trials", "0"],
        vec!["simulate", "--n", "2", "--k", "2", "--f", "2", "--loss", "2"],
        vec!["simulate", "--scheme", "XX"],
        vec!["analytic", "--n", "5..2"],
        vec!["validate", "--max-size", "9"],
        vec!["frobnicate"],
        vec![],
    ] {
        let o = bin(&args);
        assert_eq!(o.status.code(), Some(EXIT_USAGE), "{args:?}");
        assert!(!o.stderr.is_empty());
    }
    let o = bin(&["validate", "--max-size", "9"]);
    assert!(String::from_utf8(o.stderr).unwrap().contains("feasibility guard"));
}

#[test]
fn simulate_csv_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    let args = |p: &std::path::Path| {
        bin(&[
            "simulate",
            "--n",
            "3",
            "--k",
            "2",
            "--f",
            "2",
            "--l",
            "64",
            "--trials",
            "3000",
            "--seed",
            "11",
            "--runs",
            "3",
            "--mode",
            "both",
            "--workers",
            "3",
            "--out",
            p.to_str().unwrap(),
        ])
    };
    assert_eq!(args(&a).status.code(), Some(EXIT_OK));
    assert_eq!(args(&b).status.code(), Some(EXIT_OK));
    let (a, b) = (std::fs::read(a).unwrap(), std::fs::read(b).unwrap());
    assert_eq!(a, b);
    let text = String::from_utf8(a).unwrap();
    assert!(text.starts_with("# anonsched simulate schemes=RN_RD,RN_FD,FN_RD,FN_FD n=3 f=2 l=64 k=2 t=6"));
    assert!(text.contains("seed=11 workers=3 partition=contiguous-chunks"));
    let rows = rows(&text);
    assert_eq!(rows.iter().filter(|r| r[0] == "attack").count(), 8);
    assert_eq!(rows.iter().filter(|r| r[0] == "run").count(), 12);
    assert!(rows.iter().all(|r| r.len() == 16));
    assert!(rows.iter().filter(|r| r[0] == "run").all(|r| r[15] == "true"));
}

#[test]
fn simulate_estimate_matches_exact_value() {
    let out = stdout(&bin(&[
        "simulate", "--scheme", "RN_RD", "--n", "2", "--k", "2", "--f", "2", "--trials", "100000", "--seed", "3",
        "--runs", "0",
    ]));
    let rows = rows(&out);
    assert_eq!(rows.len(), 1);
    let estimate: f64 = rows[0][6].parse().unwrap();
    assert_eq!(rows[0][10], "1/36");
    let p = 1.0 / 36.0;
    assert!((estimate - p).abs() <= 3.0 * (p * (1.0 - p) / 1e5).sqrt(), "{estimate}");
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("exp.cfg");
    std::fs::write(&cfg, "# small\nscheme = FN_FD\nn = 2\nk = 2\nf = 2\ntrials = 500\nseed = 4\nruns = 1\n").unwrap();
    let out = stdout(&bin(&["simulate", "--config", cfg.to_str().unwrap(), "--seed", "5"]));
    assert!(out.contains("schemes=FN_FD n=2 f=2"));
    assert!(out.contains("trials=500 seed=5"));

    std::fs::write(&cfg, "bogus = 1\n").unwrap();
    let o = bin(&["analytic", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(EXIT_USAGE));
}

#[test]
fn validate_reports_every_point() {
    let o = bin(&["validate", "--max-size", "4"]);
    assert_eq!(o.status.code(), Some(EXIT_OK));
    let out = stdout(&o);
    assert_eq!(header(&out), "scheme,n,k,f,mode,brute_force,closed_form,agree");
    let rows = rows(&out);
    assert!(rows.iter().all(|r| r[7] == "true"));
    assert!(rows.iter().any(|r| r[4] == "network"));
    assert!(out.trim_end().ends_with(&format!("# checked={} mismatches=0", rows.len())));
}

#[test]
fn injected_formula_error_is_detected() {
    let off_by_one =
        |scheme: SchemeKind, n: usize, k: usize, f: usize, mode: AttackMode| -> Result<BigRational, ParamError> {
            // Uses n+1 nodes for random-node schemes.
            let n = if scheme.fair_nodes() { n } else { n + 1 };
            closed_form(scheme, n, k, f, mode)
        };
    let report = validate_with(4, &off_by_one).unwrap();
    assert!(report.mismatches() > 0);
    let mut buf = Vec::new();
    write_report(&report, 4, &mut buf).unwrap();
    assert!(String::from_utf8(buf).unwrap().contains(",false\n"));
    assert_eq!(CliError::ValidationFailed(report.mismatches()).exit_code(), EXIT_FAILURE);

    let clean = validate_with(4, &closed_form).unwrap();
    assert_eq!(clean.mismatches(), 0);
}

#[test]
fn in_process_entry_point() {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = main_with(
        ["anonsched", "analytic", "--scheme", "FN_FD", "--n", "2", "--k", "2", "--f", "2"],
        &mut out,
        &mut err,
    );
    assert_eq!(code, EXIT_OK);
    assert!(String::from_utf8(out).unwrap().contains("FN_FD,2,2,2,1/16,"));
    let mut help = Vec::new();
    let code = main_with(["anonsched", "--help"], &mut help, &mut Vec::new());
    assert_eq!(code, EXIT_OK);
    assert!(String::from_utf8(help).unwrap().contains("validate"));
}
