//! Parameters, derived counts and the schedule data model shared by every
//! other module.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

/// Legitimate node identifier, `0..n`. The coordinator is not a node.
pub type NodeId = usize;

/// Errors raised when a parameter set is not usable for a scheme.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParamError {
    #[error("parameter `{0}` must be at least 1")]
    NonPositive(&'static str),
    #[error("session length f={f} does not divide 2k={two_k}")]
    DivisibilityViolation { f: usize, two_k: usize },
    #[error("session length f={0} must be even for fair direction division")]
    OddSessionLength(usize),
    #[error("probability `{field}`={value} is outside [0, 1]")]
    ProbabilityOutOfRange { field: &'static str, value: f64 },
}

/// The tuple governing every formula and simulation run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemParams {
    /// Number of legitimate nodes.
    pub n: usize,
    /// Data frames per session.
    pub f: usize,
    /// Bits per data frame.
    pub l: usize,
    /// Frames per direction needed to rebuild one message.
    pub k: usize,
    /// Dialog-code preamble plus secret bit length.
    pub t: usize,
    /// Probability that jamming turns a 0 into a 1.
    pub p: f64,
    /// Probability that jamming turns a 1 into a 0.
    pub q: f64,
}

impl SystemParams {
    /// The reference operating point: n=8, f=4, l=1024, k=32, t=6, p=q=0.5.
    pub const fn reference() -> Self {
        Self { n: 8, f: 4, l: 1024, k: 32, t: 6, p: 0.5, q: 0.5 }
    }

    pub fn validate(self, scheme: SchemeKind) -> Result<Self, ParamError> {
        validate_params(self, scheme)
    }

    pub fn counts(&self) -> DerivedCounts {
        derive_counts(self)
    }
}

impl Default for SystemParams {
    fn default() -> Self {
        Self::reference()
    }
}

impl fmt::Display for SystemParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "n={} f={} l={} k={} t={} p={} q={}", self.n, self.f, self.l, self.k, self.t, self.p, self.q)
    }
}

/// Checks the structural part of the invariants (n, k, f and the scheme's
/// session-length rule). Used directly by the analytic formulas, which do
/// not depend on `l`, `t`, `p`, `q`.
pub fn validate_shape(scheme: SchemeKind, n: usize, k: usize, f: usize) -> Result<(), ParamError> {
    for (name, value) in [("n", n), ("f", f), ("k", k)] {
        if value == 0 {
            return Err(ParamError::NonPositive(name));
        }
    }
    if !(2 * k).is_multiple_of(f) {
        return Err(ParamError::DivisibilityViolation { f, two_k: 2 * k });
    }
    if scheme.fair_directions() && !f.is_multiple_of(2) {
        return Err(ParamError::OddSessionLength(f));
    }
    Ok(())
}

/// Returns `params` unchanged iff every invariant holds for `scheme`.
pub fn validate_params(params: SystemParams, scheme: SchemeKind) -> Result<SystemParams, ParamError> {
    for (name, value) in [("n", params.n), ("f", params.f), ("l", params.l), ("k", params.k), ("t", params.t)] {
        if value == 0 {
            return Err(ParamError::NonPositive(name));
        }
    }
    validate_shape(scheme, params.n, params.k, params.f)?;
    for (field, value) in [("p", params.p), ("q", params.q)] {
        if !(0.0..=1.0).contains(&value) {
            return Err(ParamError::ProbabilityOutOfRange { field, value });
        }
    }
    Ok(params)
}

/// Counts that follow from a valid parameter set.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DerivedCounts {
    /// Sessions in one supersession, 2nk/f.
    pub sessions_total: usize,
    /// Sessions owned by each node, 2k/f.
    pub sessions_per_node: usize,
    /// Rounds of n sessions (only meaningful for fair node selection), 2k/f.
    pub rounds: usize,
    /// Data slots in one supersession, 2nk.
    pub data_slots_total: usize,
    pub send_slots_per_node: usize,
    pub recv_slots_per_node: usize,
}

/// Expects validated params; f must divide 2k.
pub fn derive_counts(params: &SystemParams) -> DerivedCounts {
    let sessions_per_node = 2 * params.k / params.f;
    DerivedCounts {
        sessions_total: params.n * sessions_per_node,
        sessions_per_node,
        rounds: sessions_per_node,
        data_slots_total: 2 * params.n * params.k,
        send_slots_per_node: params.k,
        recv_slots_per_node: params.k,
    }
}

/// Direction of a data slot relative to the coordinator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Direction {
    /// Coordinator transmits to the node. Signalled by a 1 bit.
    FromCo,
    /// Node transmits to the coordinator. Signalled by a 0 bit.
    ToCo,
}

impl Direction {
    pub const fn as_bit(self) -> bool {
        matches!(self, Direction::FromCo)
    }

    pub const fn from_bit(bit: bool) -> Self {
        if bit {
            Direction::FromCo
        } else {
            Direction::ToCo
        }
    }
}

/// The four node-selection / direction-division combinations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SchemeKind {
    RnRd,
    RnFd,
    FnRd,
    FnFd,
}

impl SchemeKind {
    pub const ALL: [SchemeKind; 4] = [SchemeKind::RnRd, SchemeKind::RnFd, SchemeKind::FnRd, SchemeKind::FnFd];

    /// Node selection is constrained to rounds in which each node appears once.
    pub const fn fair_nodes(self) -> bool {
        matches!(self, SchemeKind::FnRd | SchemeKind::FnFd)
    }

    /// Every session carries f/2 slots in each direction.
    pub const fn fair_directions(self) -> bool {
        matches!(self, SchemeKind::RnFd | SchemeKind::FnFd)
    }

    pub const fn name(self) -> &'static str {
        match self {
            SchemeKind::RnRd => "RN_RD",
            SchemeKind::RnFd => "RN_FD",
            SchemeKind::FnRd => "FN_RD",
            SchemeKind::FnFd => "FN_FD",
        }
    }
}

impl fmt::Display for SchemeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown scheme `{0}` (expected RN_RD, RN_FD, FN_RD or FN_FD)")]
pub struct UnknownScheme(pub String);

impl FromStr for SchemeKind {
    type Err = UnknownScheme;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let norm = s.trim().to_ascii_uppercase().replace('-', "_");
        SchemeKind::ALL.into_iter().find(|kind| kind.name() == norm).ok_or_else(|| UnknownScheme(s.to_string()))
    }
}

/// A complete supersession assignment: the owner of every session and the
/// direction of every data slot (grouped by session, f per session).
///
/// `Schedule` values are not validated on construction so that malformed
/// schedules can be fed to [`crate::scheduler::check_schedule`].
#[derive(Debug, Clone, PartialEq)]
pub struct Schedule {
    params: SystemParams,
    scheme: SchemeKind,
    session_owner: Vec<NodeId>,
    slot_direction: Vec<Direction>,
}

impl Schedule {
    pub fn from_parts(
        params: SystemParams,
        scheme: SchemeKind,
        session_owner: Vec<NodeId>,
        slot_direction: Vec<Direction>,
    ) -> Self {
        Self { params, scheme, session_owner, slot_direction }
    }

    pub fn params(&self) -> &SystemParams {
        &self.params
    }

    pub fn scheme(&self) -> SchemeKind {
        self.scheme
    }

    pub fn session_owner(&self) -> &[NodeId] {
        &self.session_owner
    }

    pub fn slot_direction(&self) -> &[Direction] {
        &self.slot_direction
    }

    pub fn num_sessions(&self) -> usize {
        self.session_owner.len()
    }

    /// Directions of the f data slots of `session`.
    pub fn session_directions(&self, session: usize) -> &[Direction] {
        let f = self.params.f;
        &self.slot_direction[session * f..(session + 1) * f]
    }

    /// Session indices owned by `node`, ascending.
    pub fn sessions_of(&self, node: NodeId) -> Vec<usize> {
        self.session_owner.iter().enumerate().filter(|&(_, &owner)| owner == node).map(|(s, _)| s).collect()
    }

    /// Global data-slot indices owned by `node`, ascending.
    pub fn data_slots_of(&self, node: NodeId) -> Vec<usize> {
        let f = self.params.f;
        self.sessions_of(node).into_iter().flat_map(|s| s * f..(s + 1) * f).collect()
    }

    /// Directions of `node`'s data slots in slot order.
    pub fn directions_of(&self, node: NodeId) -> Vec<Direction> {
        self.data_slots_of(node).into_iter().map(|slot| self.slot_direction[slot]).collect()
    }
}
