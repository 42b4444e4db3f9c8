//! Scalar kernels: binary entropy `h`, the pair objective `f`, the
//! auxiliary function `g`, the multiplier `kappa` and the Lagrangian `L`.
//!
//! Base conventions: `h` and `f` are in bits (base-2 logarithms); `g` and
//! the denominator `log 2` in `kappa` use the natural logarithm. Mixing the
//! bases this way is what makes the sign analysis of the multiplier work
//! out, so it is deliberate and load-bearing.
//!
//! `h` and `f` return exactly zero at the probability endpoints instead of
//! relying on float `0 * (-inf)`. `g` is left undefined at its endpoints
//! (the callers never need `g(0)` or `g(1)` and extending by continuity
//! would silently hide range bugs).

use thiserror::Error;

use crate::real::Real;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EntropyError {
    #[error("probability {0} outside [0, 1]")]
    OutOfRange(f64),
    #[error("argument {0} outside the open interval (0, 1)")]
    OutsideOpenUnit(f64),
    #[error("kappa is undefined at p0 = q0 = {0}")]
    DegenerateKappa(f64),
    #[error("multiplier {0} is negative")]
    NegativeMultiplier(f64),
}

/// A point `(p, q)` in the unit square; holds the per-coordinate
/// frequencies of the two families.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbPair<T> {
    p: T,
    q: T,
}

impl<T: Real> ProbPair<T> {
    pub fn new(p: T, q: T) -> Result<Self, EntropyError> {
        check_unit(p)?;
        check_unit(q)?;
        Ok(Self { p, q })
    }

    pub fn p(&self) -> T {
        self.p
    }

    pub fn q(&self) -> T {
        self.q
    }

    /// `(q, p)`.
    pub fn swap(&self) -> Self {
        Self { p: self.q, q: self.p }
    }
}

fn check_unit<T: Real>(p: T) -> Result<(), EntropyError> {
    if p >= T::zero() && p <= T::one() {
        Ok(())
    } else {
        Err(EntropyError::OutOfRange(p.as_f64()))
    }
}

/// Binary entropy `h(p) = -p log2 p - (1-p) log2 (1-p)`, with `0 log2 0 = 0`.
pub fn binary_entropy<T: Real>(p: T) -> Result<T, EntropyError> {
    check_unit(p)?;
    Ok(binary_entropy_unchecked(p))
}

pub(crate) fn binary_entropy_unchecked<T: Real>(p: T) -> T {
    if p == T::zero() || p == T::one() {
        return T::zero();
    }
    let q = T::one() - p;
    -(p * p.log2()) - q * q.log2()
}

/// Pair objective `f(p, q) = p h(q) + q h(p)`; symmetric in its arguments.
pub fn pair_objective<T: Real>(pq: ProbPair<T>) -> T {
    pq.p * binary_entropy_unchecked(pq.q) + pq.q * binary_entropy_unchecked(pq.p)
}

/// `g(x) = ln(1 - x) / x` on the open interval `(0, 1)`.
///
/// Strictly decreasing, with limit -1 as `x -> 0+`.
pub fn log_ratio<T: Real>(x: T) -> Result<T, EntropyError> {
    if !(x > T::zero() && x < T::one()) {
        return Err(EntropyError::OutsideOpenUnit(x.as_f64()));
    }
    Ok((-x).ln_1p() / x)
}

/// The multiplier `kappa = (p0 q0 / ln 2) * (g(p0) - g(q0)) / (q0 - p0)`.
///
/// Positive for any `0 < p0, q0 < 1` with `p0 != q0`, because `g` is
/// strictly decreasing; symmetric under swapping the arguments.
pub fn kappa_for<T: Real>(p0: T, q0: T) -> Result<T, EntropyError> {
    if p0 == q0 {
        return Err(EntropyError::DegenerateKappa(p0.as_f64()));
    }
    let gp = log_ratio(p0)?;
    let gq = log_ratio(q0)?;
    let ln2 = T::of(std::f64::consts::LN_2);
    Ok(p0 * q0 / ln2 * ((gp - gq) / (q0 - p0)))
}

/// Lagrangian `L_kappa(p, q) = f(p, q) + kappa (p + q)` for `kappa >= 0`.
pub fn lagrangian<T: Real>(pq: ProbPair<T>, kappa: T) -> Result<T, EntropyError> {
    if !(kappa >= T::zero()) {
        return Err(EntropyError::NegativeMultiplier(kappa.as_f64()));
    }
    Ok(pair_objective(pq) + kappa * (pq.p + pq.q))
}
