//! Supersession schedule generation for the four schemes, a structural
//! checker, the size of the eavesdropper's guessing space, and a plain-text
//! schedule format.
//!
//! Text format, one session per line after a two-line header:
//!
//! ```text
//! # anonsched schedule v1
//! # scheme=RN_RD n=2 f=2 l=1024 k=2 t=6 p=0.5 q=0.5
//! 0 1 10
//! 1 0 01
//! ```
//!
//! Columns are the session index, the owning node and `f` direction flags
//! (`1` = from coordinator, `0` = to coordinator).

use std::fmt::Write as _;

use num_bigint::BigUint;
use rand::seq::{index, SliceRandom};
use rand::Rng;
use thiserror::Error;

use crate::exact::{binomial, pow};
use crate::model::{derive_counts, validate_params, Direction, NodeId, ParamError, Schedule, SchemeKind, SystemParams};

/// Draws a schedule uniformly from the scheme's constraint set.
///
/// Node assignment: fair schemes draw an independent uniform permutation of
/// the nodes for every round; random schemes shuffle a multiset holding each
/// node `2k/f` times. Directions: fair schemes mark a uniform `f/2`-subset of
/// every session as from-coordinator; random schemes mark a uniform
/// `k`-subset of each node's `2k` slots.
pub fn generate_schedule<R: Rng + ?Sized>(
    scheme: SchemeKind,
    params: SystemParams,
    rng: &mut R,
) -> Result<Schedule, ParamError> {
    let params = validate_params(params, scheme)?;
    let counts = derive_counts(&params);
    let (n, f, k) = (params.n, params.f, params.k);

    let owners: Vec<NodeId> = if scheme.fair_nodes() {
        let mut owners = Vec::with_capacity(counts.sessions_total);
        let mut round: Vec<NodeId> = (0..n).collect();
        for _ in 0..counts.rounds {
            round.shuffle(rng);
            owners.extend_from_slice(&round);
        }
        owners
    } else {
        let mut owners: Vec<NodeId> =
            (0..n).flat_map(|node| std::iter::repeat_n(node, counts.sessions_per_node)).collect();
        owners.shuffle(rng);
        owners
    };

    let mut directions = vec![Direction::ToCo; counts.data_slots_total];
    if scheme.fair_directions() {
        for session in 0..counts.sessions_total {
            for j in index::sample(rng, f, f / 2) {
                directions[session * f + j] = Direction::FromCo;
            }
        }
    } else {
        let mut slots_of: Vec<Vec<usize>> = vec![Vec::with_capacity(2 * k); n];
        for (session, &owner) in owners.iter().enumerate() {
            slots_of[owner].extend(session * f..(session + 1) * f);
        }
        for slots in &slots_of {
            for j in index::sample(rng, 2 * k, k) {
                directions[slots[j]] = Direction::FromCo;
            }
        }
    }

    Ok(Schedule::from_parts(params, scheme, owners, directions))
}

/// A broken schedule invariant, with its location.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ScheduleViolation {
    InvalidParams(String),
    SessionCount { expected: usize, actual: usize },
    SlotCount { expected: usize, actual: usize },
    UnknownNode { session: usize, node: NodeId },
    NodeSessionCount { node: NodeId, expected: usize, actual: usize },
    NodeDirectionCount { node: NodeId, from_co: usize, to_co: usize, expected: usize },
    RoundMembership { round: usize, node: NodeId, appearances: usize },
    SessionDirectionBalance { session: usize, from_co: usize, expected: usize },
}

/// Lists every violated invariant; empty iff the schedule is valid for its
/// scheme.
pub fn check_schedule(schedule: &Schedule) -> Vec<ScheduleViolation> {
    let params = *schedule.params();
    let scheme = schedule.scheme();
    if let Err(e) = validate_params(params, scheme) {
        return vec![ScheduleViolation::InvalidParams(e.to_string())];
    }
    let counts = derive_counts(&params);
    let (n, f, k) = (params.n, params.f, params.k);
    let owners = schedule.session_owner();
    let directions = schedule.slot_direction();

    let mut out = Vec::new();
    if owners.len() != counts.sessions_total {
        out.push(ScheduleViolation::SessionCount { expected: counts.sessions_total, actual: owners.len() });
    }
    if directions.len() != owners.len() * f {
        out.push(ScheduleViolation::SlotCount { expected: owners.len() * f, actual: directions.len() });
        return out;
    }

    let mut sessions = vec![0usize; n];
    let mut from_co = vec![0usize; n];
    let mut to_co = vec![0usize; n];
    for (session, &owner) in owners.iter().enumerate() {
        if owner >= n {
            out.push(ScheduleViolation::UnknownNode { session, node: owner });
            continue;
        }
        sessions[owner] += 1;
        for &dir in &directions[session * f..(session + 1) * f] {
            match dir {
                Direction::FromCo => from_co[owner] += 1,
                Direction::ToCo => to_co[owner] += 1,
            }
        }
    }
    for node in 0..n {
        if sessions[node] != counts.sessions_per_node {
            out.push(ScheduleViolation::NodeSessionCount {
                node,
                expected: counts.sessions_per_node,
                actual: sessions[node],
            });
        }
        if from_co[node] != k || to_co[node] != k {
            out.push(ScheduleViolation::NodeDirectionCount {
                node,
                from_co: from_co[node],
                to_co: to_co[node],
                expected: k,
            });
        }
    }

    if scheme.fair_nodes() {
        for (round, block) in owners.chunks(n).enumerate() {
            let mut seen = vec![0usize; n];
            for &owner in block.iter().filter(|&&o| o < n) {
                seen[owner] += 1;
            }
            for (node, &appearances) in seen.iter().enumerate() {
                if appearances != 1 {
                    out.push(ScheduleViolation::RoundMembership { round, node, appearances });
                }
            }
        }
    }

    if scheme.fair_directions() {
        for (session, block) in directions.chunks(f).enumerate() {
            let from = block.iter().filter(|&&d| d == Direction::FromCo).count();
            if from != f / 2 {
                out.push(ScheduleViolation::SessionDirectionBalance { session, from_co: from, expected: f / 2 });
            }
        }
    }
    out
}

/// Size of the eavesdropper's guessing space for one target node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HypothesisCounts {
    /// Possible session sets of the target node.
    pub node: BigUint,
    /// Possible direction patterns over the target node's data slots.
    pub direction: BigUint,
}

impl HypothesisCounts {
    pub fn joint(&self) -> BigUint {
        &self.node * &self.direction
    }
}

pub fn hypothesis_counts(scheme: SchemeKind, params: SystemParams) -> Result<HypothesisCounts, ParamError> {
    let params = validate_params(params, scheme)?;
    let counts = derive_counts(&params);
    let node = if scheme.fair_nodes() {
        pow(BigUint::from(params.n), counts.sessions_per_node)
    } else {
        binomial(counts.sessions_total, counts.sessions_per_node)
    };
    let direction = if scheme.fair_directions() {
        pow(binomial(params.f, params.f / 2), counts.sessions_per_node)
    } else {
        binomial(2 * params.k, params.k)
    };
    Ok(HypothesisCounts { node, direction })
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScheduleTextError {
    #[error("missing or malformed header line: {0}")]
    Header(String),
    #[error("line {line}: {reason}")]
    Row { line: usize, reason: String },
    #[error(transparent)]
    Params(#[from] ParamError),
}

const TEXT_MAGIC: &str = "# anonsched schedule v1";

pub fn schedule_to_text(schedule: &Schedule) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{TEXT_MAGIC}");
    let _ = writeln!(out, "# scheme={} {}", schedule.scheme(), schedule.params());
    for (session, &owner) in schedule.session_owner().iter().enumerate() {
        let flags: String =
            schedule.session_directions(session).iter().map(|d| if d.as_bit() { '1' } else { '0' }).collect();
        let _ = writeln!(out, "{session} {owner} {flags}");
    }
    out
}

fn parse_header(line: &str) -> Result<(SchemeKind, SystemParams), ScheduleTextError> {
    let bad = || ScheduleTextError::Header(line.to_string());
    let body = line.strip_prefix('#').ok_or_else(bad)?;
    let mut scheme = None;
    let mut params = SystemParams { n: 0, f: 0, l: 0, k: 0, t: 0, p: f64::NAN, q: f64::NAN };
    for token in body.split_whitespace() {
        let (key, value) = token.split_once('=').ok_or_else(bad)?;
        let int = || value.parse::<usize>().map_err(|_| bad());
        let real = || value.parse::<f64>().map_err(|_| bad());
        match key {
            "scheme" => scheme = Some(value.parse::<SchemeKind>().map_err(|_| bad())?),
            "n" => params.n = int()?,
            "f" => params.f = int()?,
            "l" => params.l = int()?,
            "k" => params.k = int()?,
            "t" => params.t = int()?,
            "p" => params.p = real()?,
            "q" => params.q = real()?,
            _ => return Err(bad()),
        }
    }
    Ok((scheme.ok_or_else(bad)?, params))
}

/// Parses the text format. Structural validity is left to [`check_schedule`].
pub fn schedule_from_text(text: &str) -> Result<Schedule, ScheduleTextError> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, line)) if line.trim() == TEXT_MAGIC => {}
        other => return Err(ScheduleTextError::Header(other.map(|(_, l)| l.to_string()).unwrap_or_default())),
    }
    let header = lines.next().map(|(_, l)| l).unwrap_or_default();
    let (scheme, params) = parse_header(header)?;
    validate_params(params, scheme)?;

    let mut owners = Vec::new();
    let mut directions = Vec::new();
    for (idx, line) in lines {
        let line_no = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let row_err = |reason: &str| ScheduleTextError::Row { line: line_no, reason: reason.to_string() };
        let mut cols = line.split_whitespace();
        let (Some(index), Some(owner), Some(flags), None) = (cols.next(), cols.next(), cols.next(), cols.next()) else {
            return Err(row_err("expected `index owner flags`"));
        };
        let index: usize = index.parse().map_err(|_| row_err("bad session index"))?;
        if index != owners.len() {
            return Err(row_err("session indices must be consecutive from 0"));
        }
        owners.push(owner.parse::<NodeId>().map_err(|_| row_err("bad owner"))?);
        if flags.len() != params.f {
            return Err(row_err("flag count differs from f"));
        }
        for c in flags.chars() {
            directions.push(match c {
                '1' => Direction::FromCo,
                '0' => Direction::ToCo,
                _ => return Err(row_err("direction flags must be 0 or 1")),
            });
        }
    }
    Ok(Schedule::from_parts(params, scheme, owners, directions))
}
