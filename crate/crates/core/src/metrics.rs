//! Fairness and air-time measurements over schedules and transcripts.

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::Zero;
use thiserror::Error;

use crate::model::{Direction, NodeId, Schedule};
use crate::sim::{Phase, Transcript};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MetricsError {
    #[error("node unfairness needs at least 2 sessions per node, got {0}")]
    TooFewSessions(usize),
    #[error("transcript does not cover whole sessions: {0}")]
    IncompleteSession(String),
}

/// Population variance of the gaps between consecutive session indices.
/// `None` for fewer than two sessions.
pub fn gap_variance(sessions: &[usize]) -> Option<f64> {
    if sessions.len() < 2 {
        return None;
    }
    let gaps: Vec<f64> = sessions.windows(2).map(|w| (w[1] - w[0]) as f64).collect();
    let mean = gaps.iter().sum::<f64>() / gaps.len() as f64;
    Some(gaps.iter().map(|g| (g - mean).powi(2)).sum::<f64>() / gaps.len() as f64)
}

/// Mean over nodes of the variance of gaps between the node's sessions.
pub fn node_unfairness(schedule: &Schedule) -> Result<f64, MetricsError> {
    let n = schedule.params().n;
    let per_node = schedule.num_sessions() / n;
    if per_node < 2 {
        return Err(MetricsError::TooFewSessions(per_node));
    }
    let mut total = 0.0;
    for node in 0..n {
        total += gap_variance(&schedule.sessions_of(node)).ok_or(MetricsError::TooFewSessions(per_node))?;
    }
    Ok(total / n as f64)
}

/// `|Σ from-coordinator slot indices − Σ to-coordinator slot indices|` over
/// one node's data slots (global data-slot numbering).
pub fn direction_imbalance(schedule: &Schedule, node: NodeId) -> u64 {
    let (mut from, mut to) = (0u64, 0u64);
    for slot in schedule.data_slots_of(node) {
        match schedule.slot_direction()[slot] {
            Direction::FromCo => from += slot as u64,
            Direction::ToCo => to += slot as u64,
        }
    }
    from.abs_diff(to)
}

/// Mean of [`direction_imbalance`] over nodes.
pub fn direction_unfairness(schedule: &Schedule) -> f64 {
    let n = schedule.params().n;
    (0..n).map(|node| direction_imbalance(schedule, node) as f64).sum::<f64>() / n as f64
}

/// Closed-form share of air time `node` must be awake for: its own
/// selection exchange (`t` bits) every session, plus the direction phase
/// (`t·f`) and data phase (`f·l`) of the sessions it owns.
pub fn awake_fraction(schedule: &Schedule, node: NodeId) -> BigRational {
    let p = schedule.params();
    let sessions = schedule.num_sessions() as u64;
    let owned = schedule.sessions_of(node).len() as u64;
    let (n, f, l, t) = (p.n as u64, p.f as u64, p.l as u64, p.t as u64);
    let per_session = t * (n + f) + f * l;
    let awake = BigUint::from(t) * sessions + BigUint::from(owned) * (t * f + f * l);
    let total = BigUint::from(per_session) * sessions;
    BigRational::new(awake.into(), total.into())
}

pub fn mean_awake_fraction(schedule: &Schedule) -> BigRational {
    let n = schedule.params().n;
    let sum = (0..n).fold(BigRational::zero(), |acc, node| acc + awake_fraction(schedule, node));
    sum / BigRational::from_integer(n.into())
}

/// Control bits over all bits, counted slot by slot from a transcript.
pub fn empirical_overhead(transcript: &Transcript) -> Result<BigRational, MetricsError> {
    let sessions = transcript.complete_sessions().map_err(|e| MetricsError::IncompleteSession(e.to_string()))?;
    if sessions == 0 || transcript.events.len() != transcript.eve_view.len() {
        return Err(MetricsError::IncompleteSession("no complete session".into()));
    }
    let mut control = BigUint::zero();
    let mut data = BigUint::zero();
    for ev in &transcript.events {
        match ev.phase {
            Phase::Selection | Phase::Direction => control += ev.cost_bits,
            Phase::Data => data += ev.cost_bits,
        }
    }
    let total = &control + data;
    Ok(BigRational::new(control.into(), total.into()))
}
