//! Acceptance gate: one PASS/FAIL line per criterion, nonzero exit if any
//! criterion fails. Runs without the libtest harness so the lines are always
//! printed.

use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use anonsched::analytic::{outage_single, overhead};
use anonsched::attacker::{brute_force_success, monte_carlo_attack_parallel, AttackMode};
use anonsched::dialog::{encode_bit, eve_success_analytic, transmit};
use anonsched::erasure::{decode_message, encode_message, gf256, CodedFrame};
use anonsched::exact::to_f64;
use anonsched::metrics::{direction_unfairness, empirical_overhead, node_unfairness};
use anonsched::scheduler::{check_schedule, generate_schedule};
use anonsched::sim::run_supersession;
use anonsched::{derive_counts, Direction, Schedule, SchemeKind, SystemParams};
use anonsched_cli::commands::validate::{closed_form, validate_with};
use num_rational::BigRational;
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const MINUTE: Duration = Duration::from_secs(60);

type Criterion = (&'static str, fn() -> Verdict);

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict { pass, detail: detail.into() }
}

fn small(n: usize, k: usize, f: usize) -> SystemParams {
    SystemParams { n, k, f, l: 16, t: 2, p: 0.5, q: 0.5 }
}

fn frac(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

fn three_sigma(p: f64, trials: f64) -> f64 {
    3.0 * (p * (1.0 - p) / trials).sqrt()
}

fn oracle_equivalence() -> Verdict {
    let start = Instant::now();
    let report = match validate_with(8, &closed_form) {
        Ok(r) => r,
        Err(e) => return verdict(false, e.to_string()),
    };
    let elapsed = start.elapsed();
    let bad = report.mismatches();
    verdict(
        bad == 0 && elapsed < MINUTE && !report.points.is_empty(),
        format!("{} checks (single + network), {bad} mismatches, {:.1}s", report.points.len(), elapsed.as_secs_f64()),
    )
}

fn monte_carlo_consistency() -> Verdict {
    const TRIALS: u64 = 100_000;
    let start = Instant::now();
    let frozen = [
        (SchemeKind::RnRd, frac(1, 36)),
        (SchemeKind::FnFd, frac(1, 16)),
        (SchemeKind::RnFd, frac(1, 24)),
        (SchemeKind::FnRd, frac(1, 24)),
    ];
    let mut pass = true;
    let mut parts = Vec::new();
    for (i, (scheme, expected)) in frozen.into_iter().enumerate() {
        let oracle = brute_force_success(scheme, small(2, 2, 2), AttackMode::SingleNode).ok();
        let p = to_f64(&expected);
        let Ok(r) =
            monte_carlo_attack_parallel(scheme, small(2, 2, 2), AttackMode::SingleNode, TRIALS, 2024 + i as u64, 4)
        else {
            return verdict(false, format!("{scheme}: attack failed"));
        };
        let ok = oracle.as_ref() == Some(&expected) && (r.estimate - p).abs() <= three_sigma(p, TRIALS as f64);
        pass &= ok;
        parts.push(format!("{scheme} {:.5} vs {expected}", r.estimate));
    }
    let elapsed = start.elapsed();
    pass &= elapsed < MINUTE;
    verdict(pass, format!("{}; {:.1}s", parts.join(", "), elapsed.as_secs_f64()))
}

fn scheme_ordering() -> Verdict {
    let p = SystemParams::reference();
    let v = |s| outage_single(s, p.n, p.k, p.f).map(|r| r.value);
    let (Ok(rr), Ok(rf), Ok(fr), Ok(ff)) =
        (v(SchemeKind::RnRd), v(SchemeKind::RnFd), v(SchemeKind::FnRd), v(SchemeKind::FnFd))
    else {
        return verdict(false, "reference point rejected");
    };
    let pass = rr < rf && rr < fr && rf < ff && fr < ff;
    let log = |x: &BigRational| anonsched::exact::log10_rational(x);
    verdict(
        pass,
        format!("log10: RN_RD {:.2} RN_FD {:.2} FN_RD {:.2} FN_FD {:.2}", log(&rr), log(&rf), log(&fr), log(&ff)),
    )
}

fn monotonicity() -> Verdict {
    let ks = [4usize, 8, 16, 32, 64];
    let fs = [2usize, 4, 8];
    let mut violations = 0;
    let mut comparisons = 0;
    for scheme in SchemeKind::ALL {
        for n in 2..=16 {
            for (ki, &k) in ks.iter().enumerate() {
                for (fi, &f) in fs.iter().enumerate() {
                    if 2 * k % f != 0 {
                        continue;
                    }
                    let Ok(here) = outage_single(scheme, n, k, f).map(|r| r.value) else {
                        violations += 1;
                        continue;
                    };
                    let mut cmp = |next: Option<BigRational>, ok: &dyn Fn(&BigRational) -> bool| {
                        if let Some(next) = next {
                            comparisons += 1;
                            violations += usize::from(!ok(&next));
                        }
                    };
                    let at = |n, k, f| outage_single(scheme, n, k, f).ok().map(|r| r.value);
                    cmp((n < 16).then(|| at(n + 1, k, f)).flatten(), &|x| *x <= here);
                    cmp(ks.get(ki + 1).and_then(|&k2| at(n, k2, f)), &|x| *x <= here);
                    cmp(fs.get(fi + 1).filter(|&&f2| 2 * k % f2 == 0).and_then(|&f2| at(n, k, f2)), &|x| *x >= here);
                }
            }
        }
    }
    verdict(violations == 0, format!("{comparisons} comparisons, {violations} violations"))
}

fn overhead_identity() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(55);
    let mut mismatches = 0;
    for _ in 0..100 {
        let scheme = SchemeKind::ALL[rng.gen_range(0..4)];
        let f = if scheme.fair_directions() { 2 * rng.gen_range(1..4) } else { rng.gen_range(1..6) };
        let mult = rng.gen_range(1..3);
        let two_k = if f * mult % 2 == 0 { f * mult } else { 2 * f * mult };
        let p = SystemParams {
            n: rng.gen_range(1..7),
            f,
            k: two_k / 2,
            l: rng.gen_range(8..256),
            t: rng.gen_range(1..9),
            p: 0.5,
            q: 0.5,
        };
        let measured = run_supersession(scheme, p, &mut rng).ok().and_then(|tr| empirical_overhead(&tr).ok());
        if measured != overhead(p.n, p.f, p.l, p.t).ok() {
            mismatches += 1;
        }
    }
    let reference = run_supersession(SchemeKind::RnRd, SystemParams::reference(), &mut rng)
        .ok()
        .and_then(|tr| empirical_overhead(&tr).ok());
    let reference_ok = reference == Some(frac(72, 4168));
    let o = |n, f, l| overhead(n, f, l, 6).unwrap();
    let mut trend_ok = true;
    for n in 1..20 {
        for f in [1, 2, 4, 8] {
            for l in [64, 512, 1024] {
                trend_ok &= o(n + 1, f, l) > o(n, f, l) && o(n, f + 1, l) < o(n, f, l) && o(n, f, l + 1) < o(n, f, l);
            }
        }
    }
    verdict(
        mismatches == 0 && reference_ok && trend_ok,
        format!(
            "{mismatches}/100 mismatches; defaults {} (~{:.4}); trends {}",
            reference.map_or("n/a".into(), |r| r.to_string()),
            to_f64(&frac(72, 4168)),
            if trend_ok { "ok" } else { "violated" }
        ),
    )
}

fn dialog_codes() -> Verdict {
    const TRIALS: usize = 100_000;
    let mut rng = ChaCha8Rng::seed_from_u64(66);
    let mut pass = true;
    let mut parts = Vec::new();
    let mut receiver_errors = 0usize;
    for t in [1usize, 3, 5, 6, 7, 8] {
        let mut hits = 0usize;
        for _ in 0..TRIALS {
            let Ok(cw) = encode_bit(rng.gen(), t, &mut rng) else { return verdict(false, "encode failed") };
            let ex = transmit(cw, 0.5, 0.5, &mut rng);
            hits += usize::from(ex.eve_guess == ex.codeword.source_bit);
            receiver_errors += usize::from(ex.receiver_bit != ex.codeword.source_bit);
        }
        let rate = hits as f64 / TRIALS as f64;
        if [1, 3, 5, 7].contains(&t) {
            let bound = eve_success_analytic(t, 0.5, 0.5);
            pass &= rate <= bound + three_sigma(bound, TRIALS as f64);
            parts.push(format!("t={t} {rate:.4}<=~{bound:.4}"));
        }
        if [6, 8].contains(&t) {
            pass &= (rate - 0.5).abs() <= 0.05;
            parts.push(format!("t={t} {rate:.4}~0.5"));
        }
    }
    pass &= receiver_errors == 0;
    verdict(pass, format!("{}; receiver errors {receiver_errors}", parts.join(", ")))
}

fn all_schedules(scheme: SchemeKind, p: SystemParams) -> Vec<Schedule> {
    let c = derive_counts(&p);
    let (s, slots) = (c.sessions_total, c.data_slots_total);
    let mut out = Vec::new();
    for owner_code in 0..p.n.pow(s as u32) {
        let owners: Vec<usize> = (0..s).map(|i| owner_code / p.n.pow(i as u32) % p.n).collect();
        for dir_code in 0u32..1 << slots {
            let dirs = (0..slots).map(|i| Direction::from_bit(dir_code >> i & 1 == 1)).collect();
            let candidate = Schedule::from_parts(p, scheme, owners.clone(), dirs);
            if check_schedule(&candidate).is_empty() {
                out.push(candidate);
            }
        }
    }
    out
}

fn fairness() -> Verdict {
    const SCHEDULES: usize = 1000;
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut node = [0.0; 4];
    let mut dir = [0.0; 4];
    for (i, scheme) in SchemeKind::ALL.into_iter().enumerate() {
        for _ in 0..SCHEDULES {
            let Ok(s) = generate_schedule(scheme, SystemParams::reference(), &mut rng) else {
                return verdict(false, "generation failed");
            };
            node[i] += node_unfairness(&s).unwrap_or(f64::NAN) / SCHEDULES as f64;
            dir[i] += direction_unfairness(&s) / SCHEDULES as f64;
        }
    }
    let mean = |xs: &[f64; 4], pick: &dyn Fn(SchemeKind) -> bool| {
        let chosen: Vec<f64> = SchemeKind::ALL.iter().zip(xs).filter(|(s, _)| pick(**s)).map(|(_, v)| *v).collect();
        chosen.iter().sum::<f64>() / chosen.len() as f64
    };
    let (fn_node, rn_node) = (mean(&node, &|s| s.fair_nodes()), mean(&node, &|s| !s.fair_nodes()));
    let (fd_dir, rd_dir) = (mean(&dir, &|s| s.fair_directions()), mean(&dir, &|s| !s.fair_directions()));
    let mut worst_ok = true;
    let mut worst = Vec::new();
    for f in [2, 4] {
        let p = small(2, 2, f);
        let max = |scheme| all_schedules(scheme, p).iter().map(direction_unfairness).fold(f64::MIN, f64::max);
        let (fd, rd) = (max(SchemeKind::RnFd), max(SchemeKind::RnRd));
        worst_ok &= fd <= rd;
        worst.push(format!("f={f} FD {fd} <= RD {rd}"));
    }
    verdict(
        fn_node < rn_node && fd_dir < rd_dir && worst_ok,
        format!(
            "node FN {fn_node:.2} < RN {rn_node:.2}; direction FD {fd_dir:.1} < RD {rd_dir:.1}; worst {}",
            worst.join(", ")
        ),
    )
}

fn network_attack() -> Verdict {
    let brute = brute_force_success(SchemeKind::RnRd, small(2, 2, 2), AttackMode::NetworkWide).ok();
    let report = validate_with(8, &closed_form);
    let network_mismatches = report
        .as_ref()
        .ok()
        .map(|r| r.points.iter().filter(|p| p.mode == AttackMode::NetworkWide && !p.agrees()).count());
    let checked =
        report.as_ref().map(|r| r.points.iter().filter(|p| p.mode == AttackMode::NetworkWide).count()).unwrap_or(0);
    verdict(
        brute == Some(frac(1, 216)) && network_mismatches == Some(0),
        format!(
            "RN_RD (2,2,2) = {}; literal vs product form: {checked} points, {} discrepancies reported",
            brute.map_or("n/a".into(), |b| b.to_string()),
            network_mismatches.map_or("n/a".into(), |m| m.to_string())
        ),
    )
}

fn rank(frames: &[CodedFrame], k: usize) -> usize {
    let mut rows: Vec<Vec<u8>> = frames.iter().map(|f| f.coefficients.clone()).collect();
    let mut r = 0;
    for col in 0..k {
        let Some(p) = (r..rows.len()).find(|&i| rows[i][col] != 0) else { continue };
        rows.swap(r, p);
        let inv = gf256::inv(rows[r][col]);
        let pivot: Vec<u8> = rows[r].iter().map(|&v| gf256::mul(v, inv)).collect();
        for (i, row) in rows.iter_mut().enumerate() {
            if i != r && row[col] != 0 {
                let c = row[col];
                for (v, &pv) in row.iter_mut().zip(&pivot) {
                    *v ^= gf256::mul(c, pv);
                }
            }
        }
        rows[r] = pivot;
        r += 1;
    }
    r
}

fn erasure_code() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let msg: Vec<u8> = (0..131u8).collect();
    let (mut subsets, mut invertible, mut failures) = (0usize, 0usize, 0usize);
    for k in 1..=8usize {
        for m in k + 1..=16usize {
            let Ok(frames) = encode_message(&msg, k, m, &mut rng) else { return verdict(false, "encode failed") };
            for mask in 0u32..1 << m {
                if mask.count_ones() as usize != k {
                    continue;
                }
                subsets += 1;
                let pick: Vec<CodedFrame> = (0..m).filter(|i| mask >> i & 1 == 1).map(|i| frames[i].clone()).collect();
                if rank(&pick, k) == k {
                    invertible += 1;
                    failures += usize::from(decode_message(&pick, k).as_ref() != Ok(&msg));
                }
            }
        }
    }
    const RANDOM: usize = 10_000;
    let Ok(frames) = encode_message(&msg, 8, 16, &mut rng) else { return verdict(false, "encode failed") };
    let decoded = (0..RANDOM)
        .filter(|_| {
            let pick: Vec<CodedFrame> = sample(&mut rng, 16, 8).into_iter().map(|i| frames[i].clone()).collect();
            decode_message(&pick, 8).as_ref() == Ok(&msg)
        })
        .count();
    let rate = decoded as f64 / RANDOM as f64;
    verdict(
        failures == 0 && rate >= 0.99,
        format!("{invertible}/{subsets} subsets invertible, {failures} round-trip failures; random k=8 m=16 success {rate:.4}"),
    )
}

fn determinism() -> Verdict {
    let transcript = |seed| {
        run_supersession(SchemeKind::RnRd, small(3, 2, 2), &mut ChaCha8Rng::seed_from_u64(seed)).map(|t| t.to_text())
    };
    let transcripts_ok = transcript(5).ok().is_some_and(|a| Some(a) == transcript(5).ok());
    let cli = |args: &[&str]| Command::new(env!("CARGO_BIN_EXE_anonsched")).args(args).output().ok().map(|o| o.stdout);
    let sim_args = [
        "simulate", "--n", "2", "--k", "2", "--f", "2", "--l", "64", "--trials", "20000", "--seed", "9", "--runs", "2",
    ];
    let sim = cli(&sim_args);
    let analytic = cli(&["analytic", "--n", "2..6"]);
    let csv_ok =
        sim.is_some() && sim == cli(&sim_args) && analytic.is_some() && analytic == cli(&["analytic", "--n", "2..6"]);
    verdict(
        transcripts_ok && csv_ok,
        format!(
            "transcripts {}, simulate/analytic CSV {}",
            if transcripts_ok { "identical" } else { "differ" },
            if csv_ok { "identical" } else { "differ" }
        ),
    )
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("oracle equivalence", oracle_equivalence),
        ("Monte Carlo consistency", monte_carlo_consistency),
        ("scheme ordering at defaults", scheme_ordering),
        ("monotonicity sweeps", monotonicity),
        ("overhead identity", overhead_identity),
        ("dialog codes", dialog_codes),
        ("fairness orderings", fairness),
        ("network-wide attack", network_attack),
        ("erasure code", erasure_code),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let v = check();
        failed += usize::from(!v.pass);
        println!("criterion {:>2} {} {name}: {}", i + 1, if v.pass { "PASS" } else { "FAIL" }, v.detail);
    }
    println!("acceptance: {}/{} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
