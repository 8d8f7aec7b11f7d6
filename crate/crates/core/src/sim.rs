//! Slot-accurate execution of one supersession.
//!
//! Every session runs three phases on a shared slot clock:
//!
//! 1. selection: the coordinator dialog-sends one bit to each node in ID
//!    order (1 to the session owner, 0 to everyone else); each node is awake
//!    only for its own exchange and goes back to sleep on a 0;
//! 2. direction: `f` dialog-coded bits tell the owner the direction of each
//!    data slot (1 = from coordinator);
//! 3. data: `f` erasure-coded frames, none of which carries a node ID.
//!
//! Dialog exchanges cost `t` bits of air time each and data frames `l` bits.

use std::fmt::Write as _;

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::Zero;
use rand::Rng;
use thiserror::Error;

use crate::attacker::{eve_guess, judge, AttackMode, AttackResult};
use crate::dialog::{encode_bit, transmit, DialogError, DialogExchange};
use crate::erasure::{decode_message, encode_message, CodedFrame, ErasureError};
use crate::model::{derive_counts, validate_params, Direction, NodeId, ParamError, Schedule, SchemeKind, SystemParams};
use crate::scheduler::generate_schedule;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error(transparent)]
    Params(#[from] ParamError),
    #[error(transparent)]
    Dialog(#[from] DialogError),
    #[error(transparent)]
    Erasure(#[from] ErasureError),
    #[error("loss probability {0} is outside [0, 1]")]
    LossOutOfRange(f64),
    #[error("transcript is incomplete: {0}")]
    IncompleteTranscript(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimOptions {
    /// Probability that a data frame is lost on the air.
    pub loss_probability: f64,
    /// Coded frames per message (`m`); `None` means `2k`.
    pub frames_per_message: Option<usize>,
}

impl Default for SimOptions {
    fn default() -> Self {
        Self { loss_probability: 0.0, frames_per_message: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    Selection,
    Direction,
    Data,
}

impl Phase {
    pub const fn name(self) -> &'static str {
        match self {
            Phase::Selection => "SEL",
            Phase::Direction => "DIR",
            Phase::Data => "DATA",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SlotPayload {
    Selection { node: NodeId, exchange: DialogExchange },
    Direction { position: usize, exchange: DialogExchange },
    Data { data_slot: usize, direction: Direction, owner: NodeId, frame: Vec<u8>, delivered: bool },
}

/// One slot as seen by the legitimate parties.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SlotEvent {
    pub slot: usize,
    pub session: usize,
    pub phase: Phase,
    pub cost_bits: u64,
    /// Nodes awake during the slot. The coordinator is always awake.
    pub awake: Vec<NodeId>,
    pub payload: SlotPayload,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Observation {
    /// Jam-corrupted dialog pairs.
    Dialog(Vec<bool>),
    /// Serialized coded frame.
    Frame(Vec<u8>),
}

/// One slot as seen by the eavesdropper.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EveSlot {
    pub slot: usize,
    pub session: usize,
    pub phase: Phase,
    pub cost_bits: u64,
    pub observed: Observation,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodeDelivery {
    pub node: NodeId,
    /// Frames the node received from the coordinator.
    pub from_co_frames: usize,
    /// Frames the coordinator received from the node.
    pub to_co_frames: usize,
    pub from_co_decoded: bool,
    pub to_co_decoded: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Transcript {
    pub params: SystemParams,
    pub scheme: SchemeKind,
    pub events: Vec<SlotEvent>,
    pub eve_view: Vec<EveSlot>,
    pub truth: Schedule,
    pub delivery: Vec<NodeDelivery>,
}

#[derive(Debug)]
enum NodeState {
    Asleep,
    Selected { directions: Vec<Direction> },
}

#[derive(Debug)]
struct NodeMachine {
    state: NodeState,
    outbox: Vec<CodedFrame>,
    sent: usize,
    inbox: Vec<CodedFrame>,
    message_to_co: Vec<u8>,
}

#[derive(Debug)]
struct Coordinator {
    outbox: Vec<Vec<CodedFrame>>,
    sent: Vec<usize>,
    inbox: Vec<Vec<CodedFrame>>,
    message_from_co: Vec<Vec<u8>>,
}

fn message_len(params: &SystemParams) -> usize {
    // Sized so each of the k blocks carries about l/8 bytes after the
    // 4-byte length prefix.
    (params.k * params.l.div_ceil(8)).saturating_sub(4).max(1)
}

pub fn run_supersession<R: Rng + ?Sized>(
    scheme: SchemeKind,
    params: SystemParams,
    rng: &mut R,
) -> Result<Transcript, SimError> {
    run_supersession_with(scheme, params, &SimOptions::default(), rng)
}

pub fn run_supersession_with<R: Rng + ?Sized>(
    scheme: SchemeKind,
    params: SystemParams,
    options: &SimOptions,
    rng: &mut R,
) -> Result<Transcript, SimError> {
    let params = validate_params(params, scheme)?;
    if !(0.0..=1.0).contains(&options.loss_probability) {
        return Err(SimError::LossOutOfRange(options.loss_probability));
    }
    let (n, f, k, t) = (params.n, params.f, params.k, params.t);
    let m = options.frames_per_message.unwrap_or(2 * k);
    let schedule = generate_schedule(scheme, params, rng)?;

    let mut coordinator = Coordinator {
        outbox: Vec::with_capacity(n),
        sent: vec![0; n],
        inbox: vec![Vec::new(); n],
        message_from_co: Vec::with_capacity(n),
    };
    let mut nodes = Vec::with_capacity(n);
    for _ in 0..n {
        let down: Vec<u8> = (0..message_len(&params)).map(|_| rng.gen()).collect();
        let up: Vec<u8> = (0..message_len(&params)).map(|_| rng.gen()).collect();
        coordinator.outbox.push(encode_message(&down, k, m, rng)?);
        coordinator.message_from_co.push(down);
        nodes.push(NodeMachine {
            state: NodeState::Asleep,
            outbox: encode_message(&up, k, m, rng)?,
            sent: 0,
            inbox: Vec::new(),
            message_to_co: up,
        });
    }

    let mut events = Vec::new();
    let mut eve_view = Vec::new();
    let mut slot = 0usize;
    let mut record = |session: usize, phase: Phase, cost_bits: u64, awake: Vec<NodeId>, payload: SlotPayload| {
        let observed = match &payload {
            SlotPayload::Selection { exchange, .. } | SlotPayload::Direction { exchange, .. } => {
                Observation::Dialog(exchange.air_bits.clone())
            }
            SlotPayload::Data { frame, .. } => Observation::Frame(frame.clone()),
        };
        eve_view.push(EveSlot { slot, session, phase, cost_bits, observed });
        events.push(SlotEvent { slot, session, phase, cost_bits, awake, payload });
        slot += 1;
    };

    for (session, &owner) in schedule.session_owner().iter().enumerate() {
        for (node, machine) in nodes.iter_mut().enumerate() {
            let codeword = encode_bit(node == owner, t, rng)?;
            let exchange = transmit(codeword, params.p, params.q, rng);
            machine.state = if exchange.receiver_bit {
                NodeState::Selected { directions: Vec::with_capacity(f) }
            } else {
                NodeState::Asleep
            };
            record(session, Phase::Selection, t as u64, vec![node], SlotPayload::Selection { node, exchange });
        }

        let selected: Vec<NodeId> = nodes
            .iter()
            .enumerate()
            .filter(|(_, m)| matches!(m.state, NodeState::Selected { .. }))
            .map(|(id, _)| id)
            .collect();
        debug_assert_eq!(selected, vec![owner]);

        for (position, &dir) in schedule.session_directions(session).iter().enumerate() {
            let codeword = encode_bit(dir.as_bit(), t, rng)?;
            let exchange = transmit(codeword, params.p, params.q, rng);
            if let NodeState::Selected { directions } = &mut nodes[owner].state {
                directions.push(Direction::from_bit(exchange.receiver_bit));
            }
            record(
                session,
                Phase::Direction,
                t as u64,
                selected.clone(),
                SlotPayload::Direction { position, exchange },
            );
        }

        let directions = match &nodes[owner].state {
            NodeState::Selected { directions } => directions.clone(),
            NodeState::Asleep => Vec::new(),
        };
        for (position, &direction) in directions.iter().enumerate() {
            let data_slot = session * f + position;
            let frame = match direction {
                Direction::FromCo => {
                    let idx = coordinator.sent[owner];
                    coordinator.sent[owner] += 1;
                    coordinator.outbox[owner][idx].clone()
                }
                Direction::ToCo => {
                    let machine = &mut nodes[owner];
                    let idx = machine.sent;
                    machine.sent += 1;
                    machine.outbox[idx].clone()
                }
            };
            let bytes = frame.to_bytes();
            let lost = options.loss_probability > 0.0 && rng.gen_bool(options.loss_probability);
            let delivered = !lost && CodedFrame::from_bytes(&bytes, k, frame.frame_index).is_ok();
            if delivered {
                match direction {
                    Direction::FromCo => nodes[owner].inbox.push(frame),
                    Direction::ToCo => coordinator.inbox[owner].push(frame),
                }
            }
            record(
                session,
                Phase::Data,
                params.l as u64,
                selected.clone(),
                SlotPayload::Data { data_slot, direction, owner, frame: bytes, delivered },
            );
        }
        nodes[owner].state = NodeState::Asleep;
    }

    let delivery = nodes
        .iter()
        .enumerate()
        .map(|(node, machine)| NodeDelivery {
            node,
            from_co_frames: machine.inbox.len(),
            to_co_frames: coordinator.inbox[node].len(),
            from_co_decoded: decode_message(&machine.inbox, k).as_ref() == Ok(&coordinator.message_from_co[node]),
            to_co_decoded: decode_message(&coordinator.inbox[node], k).as_ref() == Ok(&machine.message_to_co),
        })
        .collect();

    Ok(Transcript { params, scheme, events, eve_view, truth: schedule, delivery })
}

fn bits(bits: &[bool]) -> String {
    bits.iter().map(|&b| if b { '1' } else { '0' }).collect()
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().fold(String::with_capacity(2 * bytes.len()), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

fn exchange_text(ex: &DialogExchange) -> String {
    let jams: String = ex.jam_positions.iter().map(|j| char::from(b'0' + j)).collect();
    format!(
        "src={} jam={} air={} rx={} eve={}",
        u8::from(ex.codeword.source_bit),
        jams,
        bits(&ex.air_bits),
        u8::from(ex.receiver_bit),
        u8::from(ex.eve_guess)
    )
}

impl Transcript {
    /// Sessions the transcript covers completely (`n` selection, `f`
    /// direction and `f` data slots each, in order). Fails on any partial
    /// or out-of-order session.
    pub fn complete_sessions(&self) -> Result<usize, SimError> {
        let (n, f) = (self.params.n, self.params.f);
        let per_session = n + 2 * f;
        if !self.eve_view.len().is_multiple_of(per_session) {
            return Err(SimError::IncompleteTranscript(format!(
                "{} slots is not a multiple of {per_session} slots per session",
                self.eve_view.len()
            )));
        }
        for (i, slot) in self.eve_view.iter().enumerate() {
            let (session, offset) = (i / per_session, i % per_session);
            let expected = if offset < n {
                Phase::Selection
            } else if offset < n + f {
                Phase::Direction
            } else {
                Phase::Data
            };
            if slot.session != session || slot.phase != expected {
                return Err(SimError::IncompleteTranscript(format!("slot {i} out of place")));
            }
        }
        Ok(self.eve_view.len() / per_session)
    }

    /// Fraction of air-time bits during which `node` is awake.
    pub fn awake_fraction(&self, node: NodeId) -> BigRational {
        let mut awake = BigUint::zero();
        let mut total = BigUint::zero();
        for ev in &self.events {
            total += ev.cost_bits;
            if ev.awake.contains(&node) {
                awake += ev.cost_bits;
            }
        }
        BigRational::new(awake.into(), total.into())
    }

    pub fn all_delivered(&self) -> bool {
        let k = self.params.k;
        self.delivery
            .iter()
            .all(|d| d.from_co_frames == k && d.to_co_frames == k && d.from_co_decoded && d.to_co_decoded)
    }

    /// Line-oriented dump of the full transcript, one slot per line.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# anonsched transcript v1");
        let _ = writeln!(out, "# scheme={} {}", self.scheme, self.params);
        for ev in &self.events {
            let awake: Vec<String> = ev.awake.iter().map(|a| a.to_string()).collect();
            let _ = write!(
                out,
                "{} s={} {} cost={} awake={} ",
                ev.slot,
                ev.session,
                ev.phase.name(),
                ev.cost_bits,
                awake.join(",")
            );
            let _ = match &ev.payload {
                SlotPayload::Selection { node, exchange } => writeln!(out, "node={node} {}", exchange_text(exchange)),
                SlotPayload::Direction { position, exchange } => {
                    writeln!(out, "pos={position} {}", exchange_text(exchange))
                }
                SlotPayload::Data { data_slot, direction, owner, frame, delivered } => writeln!(
                    out,
                    "ds={data_slot} dir={} owner={owner} ok={} frame={}",
                    if direction.as_bit() { 'F' } else { 'T' },
                    u8::from(*delivered),
                    hex(frame)
                ),
            };
        }
        out
    }

    /// Line-oriented dump of the eavesdropper's view.
    pub fn eve_view_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# anonsched eve view v1");
        let _ = writeln!(out, "# scheme={} {}", self.scheme, self.params);
        for slot in &self.eve_view {
            let body = match &slot.observed {
                Observation::Dialog(air) => format!("air={}", bits(air)),
                Observation::Frame(frame) => format!("frame={}", hex(frame)),
            };
            let _ =
                writeln!(out, "{} s={} {} cost={} {body}", slot.slot, slot.session, slot.phase.name(), slot.cost_bits);
        }
        out
    }
}

/// One attack trial driven by a simulated transcript. Eve sees only
/// `eve_view` (plus the public parameters); the guess is scored against
/// `truth`.
pub fn replay_attack<R: Rng + ?Sized>(
    transcript: &Transcript,
    mode: AttackMode,
    rng: &mut R,
) -> Result<AttackResult, SimError> {
    let expected = derive_counts(&transcript.params).sessions_total;
    let sessions = transcript.complete_sessions()?;
    if sessions != expected {
        return Err(SimError::IncompleteTranscript(format!("{sessions} of {expected} sessions present")));
    }
    let guess = eve_guess(transcript.scheme, transcript.params, rng)?;
    let outcome = judge(mode, &transcript.truth, &guess);
    Ok(AttackResult::from_counts(
        mode,
        transcript.scheme,
        1,
        u64::from(outcome.success()),
        u64::from(outcome.node_hit),
        u64::from(outcome.direction_hit),
    ))
}
