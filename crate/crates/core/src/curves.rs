//! Bound curves for uniform pairs as the ratio `x = n/k` varies: the
//! certified upper curve from a run, the asymptotic construction rate as
//! the lower curve, the exact regime `x <= 2`, and the exact symmetric
//! counting bound.

use std::io::{self, Write};

use num_rational::Ratio;
use thiserror::Error;

use crate::entropy::binary_entropy_unchecked;
use crate::pipeline::BoundCertificate;
use crate::real::Real;

/// Exact rational value of the symmetric bound.
pub type ExactBound = Ratio<u128>;

/// Exact integer arithmetic for the symmetric bound is guaranteed up to
/// this ground-set size.
pub const MAX_SYMMETRIC_N: u32 = 64;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CurveError {
    #[error("x = {x} outside [{lo}, {hi}]")]
    XOutOfRange { x: f64, lo: f64, hi: f64 },
    #[error("x = {x} beyond the certificate grid ending at {grid_end}")]
    BeyondCertificate { x: f64, grid_end: f64 },
    #[error("need at least 2 samples, got {0}")]
    TooFewSamples(usize),
    #[error("symmetric bound needs 1 <= k and 2k <= n <= {MAX_SYMMETRIC_N}, got k = {k}, n = {n}")]
    SymmetricDomain { k: u32, n: u32 },
    #[error("symmetric bound overflows exact arithmetic at k = {k}, n = {n}")]
    SymmetricOverflow { k: u32, n: u32 },
    #[error("lower bound {lower} exceeds upper bound {upper} at x = {x}")]
    BoundOrder { x: f64, lower: f64, upper: f64 },
}

/// One sample of the two curves at the ratio `x = n/k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvePoint<T> {
    pub x: T,
    pub upper: T,
    pub lower: T,
}

/// Construction rate `2^(2 (h(1/x) - 1/x))` for `x > 2`: the asymptotic
/// per-element value of the best known uniform pairs (the vanishing
/// correction term is dropped). Peaks at exactly 9/4 at `x = 3`.
pub fn lower_rate<T: Real>(x: T) -> Result<T, CurveError> {
    if !(x > T::of(2.0) && x.is_finite()) {
        return Err(CurveError::XOutOfRange { x: x.as_f64(), lo: 2.0, hi: f64::INFINITY });
    }
    let u = x.recip();
    Ok((T::of(2.0) * (binary_entropy_unchecked(u) - u)).exp2())
}

/// Exact value `2^(2 (1 - 1/x))` of the per-element maximum for
/// `1 <= x <= 2`, where the elementary size bound is attained.
pub fn exact_rate_small_x<T: Real>(x: T) -> Result<T, CurveError> {
    if !(x >= T::one() && x <= T::of(2.0)) {
        return Err(CurveError::XOutOfRange { x: x.as_f64(), lo: 1.0, hi: 2.0 });
    }
    Ok((T::of(2.0) * (T::one() - x.recip())).exp2())
}

/// Certified upper value at ratio `x`: the `rho_out` of the grid interval
/// containing `x` (piecewise constant, non-decreasing), and the base value
/// at `x = 2`. The certificate is assumed verified.
pub fn upper_curve<T: Real>(cert: &BoundCertificate<T>, x: T) -> Result<T, CurveError> {
    let two = T::of(2.0);
    if !(x >= two && x <= T::of(crate::pipeline::LAMBDA_CEILING)) {
        return Err(CurveError::XOutOfRange {
            x: x.as_f64(),
            lo: 2.0,
            hi: crate::pipeline::LAMBDA_CEILING,
        });
    }
    if x == two {
        return Ok(cert.schedule().rho0());
    }
    let lambdas = cert.schedule().lambdas();
    let grid_end = *lambdas.last().expect("validated certificate");
    if x > grid_end {
        return Err(CurveError::BeyondCertificate {
            x: x.as_f64(),
            grid_end: grid_end.as_f64(),
        });
    }
    // the unique interval with lambda_lo < x <= lambda_hi
    let idx = lambdas.partition_point(|&l| l < x);
    Ok(cert.steps()[idx - 1].rho_out)
}

/// Exact symmetric k-uniform bound `2^k C(n, k) / C(2k, k)` for `n >= 2k`,
/// as an exact rational.
pub fn symmetric_bound(k: u32, n: u32) -> Result<ExactBound, CurveError> {
    if k == 0 || n < 2 * k || n > MAX_SYMMETRIC_N {
        return Err(CurveError::SymmetricDomain { k, n });
    }
    let overflow = || CurveError::SymmetricOverflow { k, n };
    let cnk = binomial(n, k).ok_or_else(overflow)?;
    let num = 1u128
        .checked_shl(k)
        .and_then(|p| p.checked_mul(cnk))
        .ok_or_else(overflow)?;
    let den = binomial(2 * k, k).ok_or_else(overflow)?;
    Ok(Ratio::new(num, den))
}

fn binomial(n: u32, k: u32) -> Option<u128> {
    let k = k.min(n - k);
    let mut out: u128 = 1;
    for i in 1..=k as u128 {
        // incremental form stays integral at every step
        out = out.checked_mul(n as u128 - k as u128 + i)? / i;
    }
    Some(out)
}

/// Samples both curves on a uniform grid over `[1, 3.6]`: the exact rate
/// below 2 (where the two curves coincide), the construction rate and the
/// certified bound above.
pub fn emit_curve<T: Real>(
    cert: &BoundCertificate<T>,
    samples: usize,
) -> Result<Vec<CurvePoint<T>>, CurveError> {
    if samples < 2 {
        return Err(CurveError::TooFewSamples(samples));
    }
    let two = T::of(2.0);
    let mut out = Vec::with_capacity(samples);
    for j in 0..samples {
        let frac = j as f64 / (samples - 1) as f64;
        let x = T::of(1.0 + frac * (crate::pipeline::LAMBDA_CEILING - 1.0));
        let (lower, upper) = if x <= two {
            let exact = exact_rate_small_x(x)?;
            (exact, exact)
        } else {
            (lower_rate(x)?, upper_curve(cert, x)?)
        };
        if !(lower <= upper + T::of(1e-9)) {
            return Err(CurveError::BoundOrder {
                x: x.as_f64(),
                lower: lower.as_f64(),
                upper: upper.as_f64(),
            });
        }
        out.push(CurvePoint { x, upper, lower });
    }
    Ok(out)
}

/// CSV with header `x,upper,lower`, 12 significant digits, rows in
/// increasing `x`.
pub fn write_csv<T: Real, W: Write>(points: &[CurvePoint<T>], w: &mut W) -> io::Result<()> {
    writeln!(w, "x,upper,lower")?;
    for p in points {
        writeln!(
            w,
            "{:.11e},{:.11e},{:.11e}",
            p.x.as_f64(),
            p.upper.as_f64(),
            p.lower.as_f64()
        )?;
    }
    Ok(())
}
