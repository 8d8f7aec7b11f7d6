//! Big-integer combinatorics and logarithms of exact rationals.

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Binomial coefficient C(n, r); zero when r > n.
pub fn binomial(n: usize, r: usize) -> BigUint {
    if r > n {
        return BigUint::zero();
    }
    let r = r.min(n - r);
    let mut acc = BigUint::one();
    // acc * (n - i) is divisible by (i + 1) at every step.
    for i in 0..r {
        acc *= n - i;
        acc /= i + 1;
    }
    acc
}

pub fn pow(base: BigUint, exp: usize) -> BigUint {
    num_traits::pow(base, exp)
}

/// log10 of a positive big integer, from its bit length plus the leading
/// 64 bits.
pub fn log10_biguint(x: &BigUint) -> f64 {
    assert!(!x.is_zero(), "log10 of zero");
    let bits = x.bits();
    if bits <= 64 {
        return (x.to_u64().expect("fits in u64") as f64).log10();
    }
    let shift = bits - 64;
    let top = (x >> shift).to_u64().expect("64 leading bits") as f64;
    top.log10() + shift as f64 * std::f64::consts::LOG10_2
}

/// log10 of a positive rational.
pub fn log10_rational(x: &BigRational) -> f64 {
    assert!(x.is_positive(), "log10 of a non-positive rational");
    let numer = x.numer().magnitude();
    let denom = x.denom().magnitude();
    log10_biguint(numer) - log10_biguint(denom)
}

pub fn ratio(numer: BigUint, denom: BigUint) -> BigRational {
    BigRational::new(numer.into(), denom.into())
}

pub fn recip(denom: BigUint) -> BigRational {
    ratio(BigUint::one(), denom)
}

pub fn to_f64(x: &BigRational) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}
