//! Dialog-code secret bit channel.
//!
//! A secret bit is sent as `t` complementary bit pairs (0 → `01`, 1 → `10`).
//! The first `t - 1` pairs carry a uniformly random preamble; the last pair
//! carries the secret bit masked by the preamble's parity, so the secret is
//! the XOR of all `t` encoded bits. The receiver jams one uniformly chosen
//! element of every pair; a jammed 0 is read as 1 with probability `p` and a
//! jammed 1 as 0 with probability `q`. The receiver knows where it jammed and
//! reads the clean element, so it never errs. An eavesdropper sees the
//! corrupted pairs and nothing else.

use rand::Rng;
use thiserror::Error;

/// Largest `t` accepted; the eavesdropper's decoder enumerates `2^t`
/// hypotheses.
pub const MAX_DIALOG_BITS: usize = 16;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DialogError {
    #[error("dialog length t must be at least 1")]
    EmptyCodeword,
    #[error("dialog length t={0} exceeds the supported maximum of {MAX_DIALOG_BITS}")]
    TooLong(usize),
    #[error("observed {0} air bits; expected an even, non-zero count")]
    BadAirLength(usize),
}

fn check_len(t: usize) -> Result<(), DialogError> {
    match t {
        0 => Err(DialogError::EmptyCodeword),
        t if t > MAX_DIALOG_BITS => Err(DialogError::TooLong(t)),
        _ => Ok(()),
    }
}

/// Complementary pair for one encoded bit.
pub const fn pair_for(bit: bool) -> [bool; 2] {
    [bit, !bit]
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DialogCodeword {
    pub source_bit: bool,
    /// `t - 1` random bits.
    pub preamble: Vec<bool>,
    /// `t` complementary pairs.
    pub pairs: Vec<[bool; 2]>,
}

impl DialogCodeword {
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// The bits carried by the pairs: the preamble followed by the masked
    /// source bit.
    pub fn encoded_bits(&self) -> Vec<bool> {
        self.pairs.iter().map(|pair| pair[0]).collect()
    }

    /// Flattened `2t` bits as sent before jamming.
    pub fn air_bits(&self) -> Vec<bool> {
        self.pairs.iter().flatten().copied().collect()
    }
}

fn parity(bits: &[bool]) -> bool {
    bits.iter().fold(false, |acc, &b| acc ^ b)
}

/// Encodes `bit` with a fresh random preamble of `t - 1` bits.
pub fn encode_bit<R: Rng + ?Sized>(bit: bool, t: usize, rng: &mut R) -> Result<DialogCodeword, DialogError> {
    check_len(t)?;
    let preamble: Vec<bool> = (0..t - 1).map(|_| rng.gen()).collect();
    let last = bit ^ parity(&preamble);
    let pairs = preamble.iter().copied().chain(std::iter::once(last)).map(pair_for).collect();
    Ok(DialogCodeword { source_bit: bit, preamble, pairs })
}

/// Recovers `(preamble, source_bit)` from uncorrupted pairs. Returns `None`
/// if any pair is not complementary.
pub fn decode_clean(pairs: &[[bool; 2]]) -> Option<(Vec<bool>, bool)> {
    if pairs.is_empty() || pairs.iter().any(|pair| pair[0] == pair[1]) {
        return None;
    }
    let bits: Vec<bool> = pairs.iter().map(|pair| pair[0]).collect();
    let (preamble, _) = bits.split_at(bits.len() - 1);
    Some((preamble.to_vec(), parity(&bits)))
}

/// One secret-bit transfer as seen by every party.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DialogExchange {
    pub codeword: DialogCodeword,
    /// Jammed element (0 or 1) of every pair.
    pub jam_positions: Vec<u8>,
    /// The `2t` bits on the air after jamming.
    pub air_bits: Vec<bool>,
    pub receiver_bit: bool,
    pub eve_guess: bool,
}

/// Jams, corrupts and decodes one codeword. Randomness is drawn in a fixed
/// order (per pair: jam position, corruption; then any eavesdropper tie-break).
pub fn transmit<R: Rng + ?Sized>(codeword: DialogCodeword, p: f64, q: f64, rng: &mut R) -> DialogExchange {
    let mut jam_positions = Vec::with_capacity(codeword.len());
    let mut air_bits = Vec::with_capacity(2 * codeword.len());
    let mut decoded = Vec::with_capacity(codeword.len());

    for pair in &codeword.pairs {
        let jam = usize::from(rng.gen::<bool>());
        let mut observed = *pair;
        let flip_prob = if pair[jam] { q } else { p };
        if rng.gen_bool(flip_prob) {
            observed[jam] = !observed[jam];
        }
        // The clean element is at 1 - jam; recover the pair's first element.
        decoded.push(if jam == 0 { !observed[1] } else { observed[0] });
        jam_positions.push(jam as u8);
        air_bits.extend_from_slice(&observed);
    }

    let receiver_bit = parity(&decoded);
    let eve_guess = eve_decode(&air_bits, p, q, rng).expect("codeword length already checked");
    DialogExchange { codeword, jam_positions, air_bits, receiver_bit, eve_guess }
}

/// Probability of observing `obs` for an encoded bit, averaged over the two
/// equally likely jam positions.
fn pair_likelihood(obs: [bool; 2], bit: bool, p: f64, q: f64) -> f64 {
    let sent = pair_for(bit);
    let mut total = 0.0;
    for jam in 0..2 {
        let clean = 1 - jam;
        if obs[clean] != sent[clean] {
            continue;
        }
        let flip = if sent[jam] { q } else { p };
        total += if obs[jam] == sent[jam] { 1.0 - flip } else { flip };
    }
    0.5 * total
}

/// Relative gap below which the two source-bit likelihoods count as a tie.
const TIE_TOLERANCE: f64 = 1e-9;

/// Maximum-likelihood guess of the source bit from the air bits alone.
///
/// Every preamble/bit hypothesis is scored by its likelihood summed over all
/// jam patterns (the sum factorises per pair); hypotheses are grouped by the
/// source bit they imply. Ties are broken with a fair coin from `rng`.
pub fn eve_decode<R: Rng + ?Sized>(air_bits: &[bool], p: f64, q: f64, rng: &mut R) -> Result<bool, DialogError> {
    if air_bits.is_empty() || !air_bits.len().is_multiple_of(2) {
        return Err(DialogError::BadAirLength(air_bits.len()));
    }
    let t = air_bits.len() / 2;
    check_len(t)?;

    let per_pair: Vec<[f64; 2]> = air_bits
        .chunks_exact(2)
        .map(|obs| {
            let obs = [obs[0], obs[1]];
            [pair_likelihood(obs, false, p, q), pair_likelihood(obs, true, p, q)]
        })
        .collect();

    let mut score = [0.0f64; 2];
    for hypothesis in 0u32..(1 << t) {
        let mut likelihood = 1.0;
        for (i, l) in per_pair.iter().enumerate() {
            likelihood *= l[((hypothesis >> i) & 1) as usize];
        }
        let source = hypothesis.count_ones() % 2 == 1;
        score[usize::from(source)] += likelihood;
    }

    let scale = score[0].max(score[1]);
    if scale == 0.0 || (score[0] - score[1]).abs() <= TIE_TOLERANCE * scale {
        return Ok(rng.gen());
    }
    Ok(score[1] > score[0])
}

/// Closed-form eavesdropper success probability
/// `½(1 + (1 - w)^((t+1)/2))` with `w = min(p, q)`.
pub fn eve_success_analytic(t: usize, p: f64, q: f64) -> f64 {
    let w = p.min(q);
    0.5 * (1.0 + (1.0 - w).powf((t as f64 + 1.0) / 2.0))
}
