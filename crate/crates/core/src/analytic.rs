//! Closed-form secrecy outage and overhead, evaluated exactly.
//!
//! Single-node outage for an `n`-node network, with `S = 2nk/f` sessions and
//! `2k/f` sessions per node:
//!
//! | scheme | node part            | direction part          |
//! |--------|----------------------|-------------------------|
//! | RN_FD  | 1 / C(S, 2k/f)       | 1 / C(f, f/2)^(2k/f)    |
//! | FN_RD  | (1/n)^(2k/f)         | 1 / C(2k, k)            |
//! | RN_RD  | 1 / C(S, 2k/f)       | 1 / C(2k, k)            |
//! | FN_FD  | (1/n)^(2k/f)         | 1 / C(f, f/2)^(2k/f)    |
//!
//! Network-wide outage is the product of single-node outages for network
//! sizes `n, n-1, ..., 1` at fixed `k` and `f`. Overhead is
//! `t(n+f) / (fl + t(n+f))`.

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::One;

use crate::exact::{binomial, log10_rational, pow, ratio, recip};
use crate::model::{validate_shape, ParamError, SchemeKind};

#[derive(Debug, Clone, PartialEq)]
pub struct OutageResult {
    pub scheme: SchemeKind,
    pub n: usize,
    pub k: usize,
    pub f: usize,
    pub value: BigRational,
    pub log10_value: f64,
}

fn node_part(scheme: SchemeKind, n: usize, k: usize, f: usize) -> BigRational {
    let per_node = 2 * k / f;
    if scheme.fair_nodes() {
        recip(pow(BigUint::from(n), per_node))
    } else {
        recip(binomial(2 * n * k / f, per_node))
    }
}

fn direction_part(scheme: SchemeKind, k: usize, f: usize) -> BigRational {
    if scheme.fair_directions() {
        recip(pow(binomial(f, f / 2), 2 * k / f))
    } else {
        recip(binomial(2 * k, k))
    }
}

/// Probability that an eavesdropper recovers one target node's message.
pub fn outage_single(scheme: SchemeKind, n: usize, k: usize, f: usize) -> Result<OutageResult, ParamError> {
    validate_shape(scheme, n, k, f)?;
    let value = node_part(scheme, n, k, f) * direction_part(scheme, k, f);
    let log10_value = log10_rational(&value);
    Ok(OutageResult { scheme, n, k, f, value, log10_value })
}

/// Probability that an eavesdropper recovers every node's message.
pub fn outage_network(scheme: SchemeKind, n: usize, k: usize, f: usize) -> Result<BigRational, ParamError> {
    validate_shape(scheme, n, k, f)?;
    let mut acc = BigRational::one();
    for size in (1..=n).rev() {
        acc *= outage_single(scheme, size, k, f)?.value;
    }
    Ok(acc)
}

/// Fraction of air time spent on selection and direction signalling.
/// `t = 0` is allowed and yields zero.
pub fn overhead(n: usize, f: usize, l: usize, t: usize) -> Result<BigRational, ParamError> {
    for (name, value) in [("n", n), ("f", f), ("l", l)] {
        if value == 0 {
            return Err(ParamError::NonPositive(name));
        }
    }
    let control = BigUint::from(t) * BigUint::from(n + f);
    let data = BigUint::from(f) * BigUint::from(l);
    Ok(ratio(control.clone(), data + control))
}
