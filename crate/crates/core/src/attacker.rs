//! Passive eavesdropper against the hidden schedule.
//!
//! Eve knows the scheme and every parameter but none of the coordinator's
//! random draws. Schedules are uniform over the scheme's constraint set, so
//! her best strategy is a uniform guess over that set; she succeeds only if
//! she places every frame of the target (or of every node) correctly.
//!
//! Two evaluators live here: an exhaustive enumeration of the guessing space
//! for small instances, and a Monte Carlo harness for any size.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::model::{derive_counts, validate_params, NodeId, ParamError, Schedule, SchemeKind, SystemParams};
use crate::scheduler::generate_schedule;

/// Node attacked in single-node mode. All nodes are exchangeable.
pub const TARGET_NODE: NodeId = 0;

/// Enumeration guard: at most this many sessions per supersession.
pub const MAX_ENUM_SESSIONS: usize = 8;
/// Enumeration guard: at most this many data slots per session.
pub const MAX_ENUM_SESSION_LEN: usize = 4;

/// How parallel Monte Carlo trials are split across workers.
pub const PARTITION_RULE: &str = "contiguous-chunks";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AttackMode {
    SingleNode,
    NetworkWide,
}

impl AttackMode {
    pub const fn name(self) -> &'static str {
        match self {
            AttackMode::SingleNode => "single",
            AttackMode::NetworkWide => "network",
        }
    }
}

impl std::fmt::Display for AttackMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for AttackMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "single" | "single-node" | "singlenode" => Ok(AttackMode::SingleNode),
            "network" | "network-wide" | "networkwide" => Ok(AttackMode::NetworkWide),
            _ => Err(format!("unknown attack mode `{s}` (expected single or network)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AttackError {
    #[error(transparent)]
    Params(#[from] ParamError),
    #[error("instance too large to enumerate: {sessions} sessions of {session_len} slots (limits {MAX_ENUM_SESSIONS} and {MAX_ENUM_SESSION_LEN})")]
    TooLargeToEnumerate { sessions: usize, session_len: usize },
    #[error("at least one trial is required")]
    NoTrials,
}

/// Component-wise success rates of the two guessing stages.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StageEstimates {
    pub node: f64,
    pub direction: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AttackResult {
    pub mode: AttackMode,
    pub scheme: SchemeKind,
    pub trials: u64,
    pub successes: u64,
    pub node_successes: u64,
    pub direction_successes: u64,
    pub estimate: f64,
    pub ci95_halfwidth: f64,
    pub stage_estimates: StageEstimates,
}

impl AttackResult {
    pub fn from_counts(
        mode: AttackMode,
        scheme: SchemeKind,
        trials: u64,
        successes: u64,
        node_successes: u64,
        direction_successes: u64,
    ) -> Self {
        assert!(trials > 0 && successes <= trials);
        let n = trials as f64;
        let estimate = successes as f64 / n;
        Self {
            mode,
            scheme,
            trials,
            successes,
            node_successes,
            direction_successes,
            estimate,
            ci95_halfwidth: 1.96 * (estimate * (1.0 - estimate) / n).sqrt(),
            stage_estimates: StageEstimates {
                node: node_successes as f64 / n,
                direction: direction_successes as f64 / n,
            },
        }
    }

    /// Sums the counts of two results over the same attack.
    pub fn merge(&self, other: &AttackResult) -> AttackResult {
        assert_eq!((self.mode, self.scheme), (other.mode, other.scheme));
        Self::from_counts(
            self.mode,
            self.scheme,
            self.trials + other.trials,
            self.successes + other.successes,
            self.node_successes + other.node_successes,
            self.direction_successes + other.direction_successes,
        )
    }
}

/// Outcome of comparing one guess with the truth.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrialOutcome {
    pub node_hit: bool,
    pub direction_hit: bool,
}

impl TrialOutcome {
    pub const fn success(self) -> bool {
        self.node_hit && self.direction_hit
    }
}

/// Compares a guessed schedule with the true one. The direction stage
/// compares each node's directions in the order of its own slots, so it is
/// judged independently of the node stage.
pub fn judge(mode: AttackMode, truth: &Schedule, guess: &Schedule) -> TrialOutcome {
    match mode {
        AttackMode::SingleNode => TrialOutcome {
            node_hit: truth.sessions_of(TARGET_NODE) == guess.sessions_of(TARGET_NODE),
            direction_hit: truth.directions_of(TARGET_NODE) == guess.directions_of(TARGET_NODE),
        },
        AttackMode::NetworkWide => {
            let n = truth.params().n;
            TrialOutcome {
                node_hit: truth.session_owner() == guess.session_owner(),
                direction_hit: (0..n).all(|node| truth.directions_of(node) == guess.directions_of(node)),
            }
        }
    }
}

/// Eve's uniform guess over the constraint set: an independent schedule
/// draw from her own randomness.
pub fn eve_guess<R: Rng + ?Sized>(
    scheme: SchemeKind,
    params: SystemParams,
    rng: &mut R,
) -> Result<Schedule, ParamError> {
    generate_schedule(scheme, params, rng)
}

/// Each trial draws a fresh schedule and an independent guess.
pub fn monte_carlo_attack<R: Rng + ?Sized>(
    scheme: SchemeKind,
    params: SystemParams,
    mode: AttackMode,
    trials: u64,
    rng: &mut R,
) -> Result<AttackResult, AttackError> {
    if trials == 0 {
        return Err(AttackError::NoTrials);
    }
    let params = validate_params(params, scheme)?;
    let (mut hits, mut node_hits, mut dir_hits) = (0u64, 0u64, 0u64);
    for _ in 0..trials {
        let truth = generate_schedule(scheme, params, rng)?;
        let guess = eve_guess(scheme, params, rng)?;
        let outcome = judge(mode, &truth, &guess);
        hits += u64::from(outcome.success());
        node_hits += u64::from(outcome.node_hit);
        dir_hits += u64::from(outcome.direction_hit);
    }
    Ok(AttackResult::from_counts(mode, scheme, trials, hits, node_hits, dir_hits))
}

/// Independent stream for one worker: `seed` selects the key, `worker` the
/// ChaCha stream.
pub fn worker_rng(seed: u64, worker: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(worker as u64);
    rng
}

/// Splits `trials` into `workers` contiguous chunks of `ceil(trials/workers)`
/// (the last one shorter), runs each on [`worker_rng`] in its own thread and
/// sums the counts. The result depends only on `(seed, workers)`.
pub fn monte_carlo_attack_parallel(
    scheme: SchemeKind,
    params: SystemParams,
    mode: AttackMode,
    trials: u64,
    seed: u64,
    workers: usize,
) -> Result<AttackResult, AttackError> {
    if trials == 0 {
        return Err(AttackError::NoTrials);
    }
    let workers = workers.max(1);
    let chunk = trials.div_ceil(workers as u64);
    let shares: Vec<(usize, u64)> = (0..workers)
        .map(|w| (w, trials.saturating_sub(w as u64 * chunk).min(chunk)))
        .filter(|&(_, share)| share > 0)
        .collect();

    let partials: Vec<Result<AttackResult, AttackError>> = std::thread::scope(|scope| {
        let handles: Vec<_> = shares
            .iter()
            .map(|&(w, share)| {
                scope.spawn(move || monte_carlo_attack(scheme, params, mode, share, &mut worker_rng(seed, w)))
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("worker panicked")).collect()
    });

    let mut merged: Option<AttackResult> = None;
    for partial in partials {
        let partial = partial?;
        merged = Some(match merged {
            None => partial,
            Some(acc) => acc.merge(&partial),
        });
    }
    Ok(merged.expect("at least one worker"))
}

/// Exhaustive description of the eavesdropper's guessing space.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleReport {
    pub scheme: SchemeKind,
    pub params: SystemParams,
    /// Ownership sequences satisfying the scheme's node constraint.
    pub ownerships: u64,
    /// Distinct session sets of the target node.
    pub node_hypotheses: u64,
    /// Direction patterns over the target's slots, if the same for every
    /// session set (it always is for the four schemes).
    pub direction_hypotheses: Option<u64>,
    /// Distinct (session set, direction pattern) pairs for the target.
    pub single_hypotheses: BigUint,
    /// Distinct complete schedules.
    pub network_hypotheses: BigUint,
    pub single_success: BigRational,
    pub network_success: BigRational,
}

fn check_enumerable(params: &SystemParams) -> Result<(), AttackError> {
    let sessions = derive_counts(params).sessions_total;
    if sessions > MAX_ENUM_SESSIONS || params.f > MAX_ENUM_SESSION_LEN {
        return Err(AttackError::TooLargeToEnumerate { sessions, session_len: params.f });
    }
    Ok(())
}

fn ownership_allowed(scheme: SchemeKind, owners: &[NodeId], n: usize, per_node: usize) -> bool {
    let mut count = [0usize; MAX_ENUM_SESSIONS];
    for &o in owners {
        count[o] += 1;
    }
    if count[..n].iter().any(|&c| c != per_node) {
        return false;
    }
    if scheme.fair_nodes() {
        for round in owners.chunks(n) {
            let mut seen = 0u16;
            for &o in round {
                if seen & (1 << o) != 0 {
                    return false;
                }
                seen |= 1 << o;
            }
        }
    }
    true
}

type DirectionKey = (bool, usize, usize, u16);

fn direction_memo() -> &'static Mutex<HashMap<DirectionKey, u64>> {
    static MEMO: OnceLock<Mutex<HashMap<DirectionKey, u64>>> = OnceLock::new();
    MEMO.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Counts, leaf by leaf, the direction assignments of a node owning the
/// sessions in `mask`: every session balanced (`fair`) or exactly `k`
/// from-coordinator slots overall.
fn count_direction_patterns(fair: bool, f: usize, k: usize, mask: u16) -> u64 {
    let key = (fair, f, k, mask);
    if let Some(&hit) = direction_memo().lock().unwrap().get(&key) {
        return hit;
    }
    let sessions = mask.count_ones() as usize;
    let count = if fair {
        fn per_session(remaining: usize, f: usize) -> u64 {
            if remaining == 0 {
                return 1;
            }
            (0u32..1 << f)
                .filter(|pattern| pattern.count_ones() as usize == f / 2)
                .map(|_| per_session(remaining - 1, f))
                .sum()
        }
        per_session(sessions, f)
    } else {
        fn walk(remaining: usize, from_left: usize, to_left: usize) -> u64 {
            if remaining == 0 {
                return u64::from(from_left == 0 && to_left == 0);
            }
            let mut total = 0;
            if from_left > 0 {
                total += walk(remaining - 1, from_left - 1, to_left);
            }
            if to_left > 0 {
                total += walk(remaining - 1, from_left, to_left - 1);
            }
            total
        }
        walk(sessions * f, k, k)
    };
    direction_memo().lock().unwrap().insert(key, count);
    count
}

/// Enumerates every ownership sequence and every direction pattern allowed
/// by the scheme and reports the size of Eve's guessing space in both modes.
pub fn enumerate_attack_space(scheme: SchemeKind, params: SystemParams) -> Result<OracleReport, AttackError> {
    let params = validate_params(params, scheme)?;
    check_enumerable(&params)?;
    let counts = derive_counts(&params);
    let (n, f, k) = (params.n, params.f, params.k);
    let sessions = counts.sessions_total;
    let fair_dirs = scheme.fair_directions();

    let mut owners = vec![0usize; sessions];
    let mut ownerships = 0u64;
    let mut target_sets: HashMap<u16, u64> = HashMap::new();
    let mut network_hypotheses = BigUint::zero();

    'odometer: loop {
        if ownership_allowed(scheme, &owners, n, counts.sessions_per_node) {
            ownerships += 1;
            let mut masks = vec![0u16; n];
            for (s, &o) in owners.iter().enumerate() {
                masks[o] |= 1 << s;
            }
            *target_sets.entry(masks[TARGET_NODE]).or_default() += 1;
            let mut joint = BigUint::one();
            for &mask in &masks {
                joint *= count_direction_patterns(fair_dirs, f, k, mask);
            }
            network_hypotheses += joint;
        }
        for digit in owners.iter_mut() {
            *digit += 1;
            if *digit < n {
                continue 'odometer;
            }
            *digit = 0;
        }
        break;
    }

    let per_set: Vec<(u64, u64)> =
        target_sets.iter().map(|(&mask, &weight)| (weight, count_direction_patterns(fair_dirs, f, k, mask))).collect();
    let single_hypotheses: BigUint = per_set.iter().map(|&(_, d)| BigUint::from(d)).sum();
    let direction_hypotheses = match per_set.first() {
        Some(&(_, d)) if per_set.iter().all(|&(_, other)| other == d) => Some(d),
        _ => None,
    };

    // Truth is drawn by the generator; the guess is uniform over the
    // distinct hypotheses. Sum P(truth projects to h) * P(guess = h).
    let total_owners = BigUint::from(ownerships);
    let single_guess = BigRational::new(1.into(), single_hypotheses.clone().into());
    let mut single_success = BigRational::zero();
    for &(weight, _) in &per_set {
        // Within one session set every direction pattern is equally likely.
        let p_set = BigRational::new(weight.into(), total_owners.clone().into());
        single_success += p_set * &single_guess;
    }
    let network_success = BigRational::new(1.into(), network_hypotheses.clone().into());

    Ok(OracleReport {
        scheme,
        params,
        ownerships,
        node_hypotheses: target_sets.len() as u64,
        direction_hypotheses,
        single_hypotheses,
        network_hypotheses,
        single_success,
        network_success,
    })
}

/// Exact success probability of Eve's uniform guess, by exhaustive
/// enumeration.
pub fn brute_force_success(
    scheme: SchemeKind,
    params: SystemParams,
    mode: AttackMode,
) -> Result<BigRational, AttackError> {
    let report = enumerate_attack_space(scheme, params)?;
    Ok(match mode {
        AttackMode::SingleNode => report.single_success,
        AttackMode::NetworkWide => report.network_success,
    })
}
