//! Any-k-of-m message coding over GF(256).
//!
//! A message is prefixed with its length (u32, little endian), zero padded
//! and cut into `k` equal blocks. Frames `0..k` carry the blocks unchanged
//! (unit coefficient vectors); frames `k..m` carry random non-zero linear
//! combinations. Any `k` frames with independent coefficient rows rebuild
//! the message.
//!
//! Wire layout of a frame, with no node identifier anywhere:
//!
//! ```text
//! [coefficients: k bytes][payload: block bytes][crc32 (IEEE), little endian: 4 bytes]
//! ```

pub mod gf256;

use rand::Rng;
use thiserror::Error;

const LEN_PREFIX: usize = 4;
const CRC_LEN: usize = 4;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ErasureError {
    #[error("message is empty")]
    EmptyMessage,
    #[error("need m > k >= 1, got k={k} m={m}")]
    InvalidShape { k: usize, m: usize },
    #[error("have {have} frames, need at least {need}")]
    InsufficientFrames { have: usize, need: usize },
    #[error("coefficient rows have rank {rank} < {need}")]
    RankDeficient { rank: usize, need: usize },
    #[error("frame checksum mismatch")]
    Corrupted,
    #[error("malformed frame or message: {0}")]
    Malformed(&'static str),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CodedFrame {
    pub coefficients: Vec<u8>,
    pub payload: Vec<u8>,
    /// Position in the coded sequence; not part of the wire format.
    pub frame_index: usize,
}

impl CodedFrame {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.coefficients.len() + self.payload.len() + CRC_LEN);
        out.extend_from_slice(&self.coefficients);
        out.extend_from_slice(&self.payload);
        let crc = crc32fast::hash(&out);
        out.extend_from_slice(&crc.to_le_bytes());
        out
    }

    /// Parses a frame for a `k`-block code; fails on checksum mismatch.
    pub fn from_bytes(bytes: &[u8], k: usize, frame_index: usize) -> Result<Self, ErasureError> {
        if bytes.len() < k + CRC_LEN + 1 {
            return Err(ErasureError::Malformed("frame shorter than header"));
        }
        let (body, crc) = bytes.split_at(bytes.len() - CRC_LEN);
        let crc = u32::from_le_bytes(crc.try_into().expect("4 bytes"));
        if crc32fast::hash(body) != crc {
            return Err(ErasureError::Corrupted);
        }
        let (coefficients, payload) = body.split_at(k);
        Ok(Self { coefficients: coefficients.to_vec(), payload: payload.to_vec(), frame_index })
    }
}

/// Block size used for a message of `len` bytes split `k` ways.
pub fn block_len(len: usize, k: usize) -> usize {
    (len + LEN_PREFIX).div_ceil(k)
}

pub fn encode_message<R: Rng + ?Sized>(
    message: &[u8],
    k: usize,
    m: usize,
    rng: &mut R,
) -> Result<Vec<CodedFrame>, ErasureError> {
    if message.is_empty() {
        return Err(ErasureError::EmptyMessage);
    }
    if k == 0 || m <= k {
        return Err(ErasureError::InvalidShape { k, m });
    }
    let len = u32::try_from(message.len()).map_err(|_| ErasureError::Malformed("message longer than 4 GiB"))?;
    let bl = block_len(message.len(), k);
    let mut data = Vec::with_capacity(k * bl);
    data.extend_from_slice(&len.to_le_bytes());
    data.extend_from_slice(message);
    data.resize(k * bl, 0);
    let blocks: Vec<&[u8]> = data.chunks_exact(bl).collect();

    let mut frames = Vec::with_capacity(m);
    for (i, block) in blocks.iter().enumerate() {
        let mut coefficients = vec![0u8; k];
        coefficients[i] = 1;
        frames.push(CodedFrame { coefficients, payload: block.to_vec(), frame_index: i });
    }
    for frame_index in k..m {
        let coefficients = loop {
            let c: Vec<u8> = (0..k).map(|_| rng.gen()).collect();
            if c.iter().any(|&x| x != 0) {
                break c;
            }
        };
        let mut payload = vec![0u8; bl];
        for (&c, block) in coefficients.iter().zip(&blocks) {
            gf256::mul_add(&mut payload, c, block);
        }
        frames.push(CodedFrame { coefficients, payload, frame_index });
    }
    Ok(frames)
}

/// Gaussian elimination over every supplied frame; succeeds once `k`
/// independent rows are found.
pub fn decode_message(frames: &[CodedFrame], k: usize) -> Result<Vec<u8>, ErasureError> {
    if k == 0 {
        return Err(ErasureError::InvalidShape { k, m: frames.len() });
    }
    if frames.len() < k {
        return Err(ErasureError::InsufficientFrames { have: frames.len(), need: k });
    }
    let bl = frames[0].payload.len();
    if frames.iter().any(|fr| fr.coefficients.len() != k || fr.payload.len() != bl) {
        return Err(ErasureError::Malformed("inconsistent frame shapes"));
    }

    let mut rows: Vec<Vec<u8>> =
        frames.iter().map(|fr| fr.coefficients.iter().chain(&fr.payload).copied().collect()).collect();

    for col in 0..k {
        let Some(pivot) = (col..rows.len()).find(|&r| rows[r][col] != 0) else {
            return Err(ErasureError::RankDeficient { rank: col, need: k });
        };
        rows.swap(col, pivot);
        let lead = gf256::inv(rows[col][col]);
        gf256::scale(&mut rows[col], lead);
        let pivot_row = rows[col].clone();
        for (r, row) in rows.iter_mut().enumerate() {
            if r != col && row[col] != 0 {
                let c = row[col];
                gf256::mul_add(row, c, &pivot_row);
            }
        }
    }

    let data: Vec<u8> = rows[..k].iter().flat_map(|row| row[k..].iter().copied()).collect();
    if data.len() < LEN_PREFIX {
        return Err(ErasureError::Malformed("decoded data shorter than length prefix"));
    }
    let len = u32::from_le_bytes(data[..LEN_PREFIX].try_into().expect("4 bytes")) as usize;
    if len == 0 || LEN_PREFIX + len > data.len() {
        return Err(ErasureError::Malformed("length prefix out of range"));
    }
    Ok(data[LEN_PREFIX..LEN_PREFIX + len].to_vec())
}
