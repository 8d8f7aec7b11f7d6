//! Simulator and exact analysis toolkit for identity-hiding multi-node
//! communication through a coordinator.
//!
//! A coordinator serves `n` nodes in slotted sessions. In every session it
//! secretly selects one node with dialog-coded bits, secretly tells it the
//! direction of each of the `f` data slots, and then exchanges ID-free,
//! erasure-coded frames with it. A passive eavesdropper sees every frame but
//! must guess who sent or received it.
//!
//! Modules, bottom-up:
//!
//! - [`model`]: parameters, derived counts, schedules;
//! - [`dialog`]: the secret bit channel and its eavesdropper decoder;
//! - [`scheduler`]: the four scheduling schemes;
//! - [`analytic`]: exact outage and overhead expressions;
//! - [`attacker`]: exhaustive and Monte Carlo eavesdroppers;
//! - [`erasure`]: any-k-of-m frame coding;
//! - [`sim`]: slot-by-slot supersession runs;
//! - [`metrics`]: fairness, awake time and measured overhead.

pub mod analytic;
pub mod attacker;
pub mod dialog;
pub mod erasure;
pub mod exact;
pub mod metrics;
pub mod model;
pub mod scheduler;
pub mod sim;

pub use model::{
    derive_counts, validate_params, DerivedCounts, Direction, NodeId, ParamError, Schedule, SchemeKind, SystemParams,
};
