//! Upper bounds for the constrained optimization value `phi(gamma, x)`:
//! the supremum of the average of `f(p_i, q_i)` over configurations with
//! per-coordinate product caps `p_i q_i <= 1/gamma` and mean constraint
//! `sum p_i = sum q_i >= n (1 - 1/x)`, the number of coordinates free.
//!
//! Three regimes:
//!
//! 1. [`closed_form_candidate`] solves `t^2 - 2(1 - 1/x) t + 1/gamma = 0`;
//!    when the roots are distinct and inside `[0, 1]`, `phi` equals
//!    `f(p0, q0)` exactly.
//! 2. When even the relaxed problem `max {p + q : pq <= 1/gamma}` cannot
//!    reach `2(1 - 1/x)`, the constraint region is empty and `phi = -inf`.
//! 3. Otherwise a Lagrangian dual point certifies an upper bound:
//!    `phi <= psi - 2 kappa (1 - 1/x)` with `psi` the maximum of
//!    `L_kappa` on the region, attained on the hyperbola `pq = 1/gamma`.
//!
//! [`phi_oracle`] is an independent check: it solves the same problem
//! exactly over mixtures of grid points and never goes through the
//! dual machinery above.

use rayon::prelude::*;
use thiserror::Error;

use crate::entropy::{
    binary_entropy_unchecked, kappa_for, lagrangian, pair_objective, EntropyError, ProbPair,
};
use crate::real::Real;

/// The dual argument needs `gamma >= 2.25`; queries below the floor are
/// rejected at construction.
pub const GAMMA_FLOOR: f64 = 2.25;

/// Number of trial points for the regime-3 multiplier scan. Any admissible
/// point is sound; the grid density only affects tightness.
const FALLBACK_GRID: usize = 512;

/// Crude global Lipschitz constant for `f` on the unit square, used only
/// for the diagnostic `upper_hint` of the oracle.
const ORACLE_LIPSCHITZ: f64 = 8.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PhiError {
    #[error("gamma = {0} below the floor {GAMMA_FLOOR}")]
    GammaBelowFloor(f64),
    #[error("x = {0} below 2")]
    XBelowTwo(f64),
    #[error("p0 = {p0} outside the admissible range [{lo}, {hi})")]
    P0OutOfRange { p0: f64, lo: f64, hi: f64 },
    #[error("oracle resolution {0} below the minimum of 100")]
    ResolutionTooSmall(usize),
    #[error("query (gamma = {gamma}, x = {x}) has an empty constraint region")]
    InfeasibleQuery { gamma: f64, x: f64 },
    #[error(transparent)]
    Entropy(#[from] EntropyError),
}

/// A query point `(gamma, x)` with `gamma >= 2.25` and `x >= 2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhiQuery<T> {
    gamma: T,
    x: T,
}

impl<T: Real> PhiQuery<T> {
    pub fn new(gamma: T, x: T) -> Result<Self, PhiError> {
        if !(gamma >= T::of(GAMMA_FLOOR) && gamma.is_finite()) {
            return Err(PhiError::GammaBelowFloor(gamma.as_f64()));
        }
        if !(x >= T::of(2.0) && x.is_finite()) {
            return Err(PhiError::XBelowTwo(x.as_f64()));
        }
        Ok(Self { gamma, x })
    }

    pub fn gamma(&self) -> T {
        self.gamma
    }

    pub fn x(&self) -> T {
        self.x
    }

    /// `2 (1 - 1/x)`: the required value of `p0 + q0`.
    fn mean_sum(&self) -> T {
        let two = T::of(2.0);
        two * (T::one() - self.x.recip())
    }
}

/// Which of the three regimes produced a bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    ClosedForm,
    Infeasible,
    LagrangianFallback,
}

/// Dual data backing a finite bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhiCertificate<T> {
    pub p0: T,
    pub q0: T,
    pub kappa: T,
    pub psi: T,
}

/// Result of bounding `phi(gamma, x)`: a finite value or negative
/// infinity, tagged with the regime that produced it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhiBound<T> {
    value: T,
    regime: Regime,
    certificate: Option<PhiCertificate<T>>,
}

impl<T: Real> PhiBound<T> {
    fn infeasible() -> Self {
        Self {
            value: T::neg_infinity(),
            regime: Regime::Infeasible,
            certificate: None,
        }
    }

    pub fn value(&self) -> T {
        self.value
    }

    pub fn regime(&self) -> Regime {
        self.regime
    }

    pub fn certificate(&self) -> Option<&PhiCertificate<T>> {
        self.certificate.as_ref()
    }

    pub fn is_infeasible(&self) -> bool {
        self.regime == Regime::Infeasible
    }
}

/// Roots `(p0, q0)` of `t^2 - 2(1 - 1/x) t + 1/gamma`, when they are
/// distinct and both lie in `[0, 1]`.
///
/// Absence is a regular outcome: it covers a negative discriminant, the
/// double root, and roots outside the unit interval. The discriminant
/// must clear a small noise threshold so that an exact double root is
/// never mistaken for a split one (the fallback regime covers the sliver
/// this gives up, and is sound there).
pub fn closed_form_candidate<T: Real>(q: &PhiQuery<T>) -> Option<ProbPair<T>> {
    let s = q.mean_sum();
    let c = q.gamma.recip();
    let four = T::of(4.0);
    let disc = s * s - four * c;
    let noise = (s * s + four * c) * T::epsilon() * T::of(64.0);
    if !(disc > noise) {
        return None;
    }
    let sq = disc.sqrt();
    let half = T::of(0.5);
    let p0 = (s - sq) * half;
    let q0 = (s + sq) * half;
    if p0 >= T::zero() && q0 <= T::one() && p0 < q0 {
        Some(ProbPair::new(p0, q0).expect("roots in the unit interval"))
    } else {
        None
    }
}

/// Whether the constraint region of the optimization problem is non-empty:
/// `max {p + q : pq <= 1/gamma, 0 <= p, q <= 1} = 1 + 1/gamma` must reach
/// `2 (1 - 1/x)`.
pub fn is_feasible<T: Real>(q: &PhiQuery<T>) -> bool {
    T::one() + q.gamma.recip() >= q.mean_sum()
}

/// Dual bound from one admissible hyperbola point: given `p0` with
/// `1/gamma < p0 < 1/sqrt(gamma)`, sets `q0 = 1/(gamma p0)`, computes the
/// multiplier and returns `psi - 2 kappa (1 - 1/x)` as a certified upper
/// bound on `phi`.
///
/// The exact left endpoint `p0 = 1/gamma` is rejected: it forces `q0 = 1`
/// where `g` (and with it the multiplier formula) is undefined.
pub fn lagrangian_phi_bound<T: Real>(q: &PhiQuery<T>, p0: T) -> Result<PhiBound<T>, PhiError> {
    let lo = q.gamma.recip();
    let hi = q.gamma.sqrt().recip();
    let out_of_range = || PhiError::P0OutOfRange {
        p0: p0.as_f64(),
        lo: lo.as_f64(),
        hi: hi.as_f64(),
    };
    if !(p0 >= lo && p0 < hi) {
        return Err(out_of_range());
    }
    let q0 = (q.gamma * p0).recip();
    if !(q0 < T::one() && q0 > p0) {
        return Err(out_of_range());
    }
    let kappa = kappa_for(p0, q0)?;
    let pair = ProbPair::new(p0, q0).expect("hyperbola point in the unit square");
    let psi = lagrangian(pair, kappa)?;
    let value = psi - kappa * q.mean_sum();
    Ok(PhiBound {
        value,
        regime: Regime::LagrangianFallback,
        certificate: Some(PhiCertificate { p0, q0, kappa, psi }),
    })
}

/// Certified upper bound on `phi(gamma, x)`, dispatching over the three
/// regimes. The returned value is exact in the closed-form regime and an
/// upper bound otherwise.
pub fn phi_upper<T: Real>(q: &PhiQuery<T>) -> PhiBound<T> {
    if let Some(pair) = closed_form_candidate(q) {
        let value = pair_objective(pair);
        let (p0, q0) = (pair.p(), pair.q());
        // kappa is only metadata here; at q0 = 1 the multiplier formula
        // degenerates and kappa = 0, psi = value keeps the record consistent.
        let (kappa, psi) = match kappa_for(p0, q0) {
            Ok(k) => (k, lagrangian(pair, k).expect("kappa positive")),
            Err(_) => (T::zero(), value),
        };
        return PhiBound {
            value,
            regime: Regime::ClosedForm,
            certificate: Some(PhiCertificate { p0, q0, kappa, psi }),
        };
    }
    if !is_feasible(q) {
        return PhiBound::infeasible();
    }
    let lo = q.gamma.recip();
    let hi = q.gamma.sqrt().recip();
    let width = hi - lo;
    let step = width / T::of(FALLBACK_GRID as f64);
    let mut best: Option<PhiBound<T>> = None;
    for j in 0..FALLBACK_GRID {
        // midpoints keep the scan strictly inside the admissible range
        let p0 = lo + (T::of(j as f64) + T::of(0.5)) * step;
        if let Ok(bound) = lagrangian_phi_bound(q, p0) {
            match &best {
                Some(b) if b.value() <= bound.value() => {}
                _ => best = Some(bound),
            }
        }
    }
    best.expect("admissible range is non-empty for gamma >= 2.25")
}

/// `sigma(p) = (g(p) - g(q(p))) / (q(p) - p)` with `q(p) = 1/(gamma p)`,
/// on `1/gamma < p < 1/sqrt(gamma)`. Strictly decreasing there, which is
/// what makes the multiplier choice in [`lagrangian_phi_bound`] optimal
/// along the hyperbola.
pub fn sigma<T: Real>(p: T, gamma: T) -> Result<T, PhiError> {
    if !(gamma >= T::of(GAMMA_FLOOR) && gamma.is_finite()) {
        return Err(PhiError::GammaBelowFloor(gamma.as_f64()));
    }
    let lo = gamma.recip();
    let hi = gamma.sqrt().recip();
    let out_of_range = || PhiError::P0OutOfRange {
        p0: p.as_f64(),
        lo: lo.as_f64(),
        hi: hi.as_f64(),
    };
    if !(p >= lo && p < hi) {
        return Err(out_of_range());
    }
    let q = (gamma * p).recip();
    if !(q < T::one() && q > p) {
        return Err(out_of_range());
    }
    let gp = crate::entropy::log_ratio(p)?;
    let gq = crate::entropy::log_ratio(q)?;
    Ok((gp - gq) / (q - p))
}

/// Exact grid estimate of `phi`: `lower` is attainable (hence a true lower
/// bound) and `upper_hint` adds a crude Lipschitz term for diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleEstimate<T> {
    pub lower: T,
    pub upper_hint: T,
}

/// Independent brute-force estimate of `phi(gamma, x)`.
///
/// Because the number of coordinates is free, `phi` equals the supremum of
/// `E[f]` over probability mixtures of points of the region
/// `{(p, q) : pq <= 1/gamma}` subject to `E[p] = E[q] >= 1 - 1/x`; supports
/// of size at most 3 suffice (two effective linear constraints plus
/// normalization). On a finite grid that linear program is solved exactly
/// by symmetrizing `(p, q) <-> (q, p)` and taking the upper concave
/// envelope of the points `((p + q)/2, f(p, q))`, which is what this does.
/// The grid is the `resolution x resolution` lattice of the unit square
/// restricted to the region, plus the exact hyperbola points above each
/// lattice column so the constraint boundary is represented.
pub fn phi_oracle<T: Real>(
    q: &PhiQuery<T>,
    resolution: usize,
) -> Result<OracleEstimate<T>, PhiError> {
    if resolution < 100 {
        return Err(PhiError::ResolutionTooSmall(resolution));
    }
    if !is_feasible(q) {
        return Err(PhiError::InfeasibleQuery {
            gamma: q.gamma.as_f64(),
            x: q.x.as_f64(),
        });
    }
    let n = resolution;
    let inv_gamma = q.gamma.recip();
    let target = q.mean_sum() * T::of(0.5); // required mean (p + q)/2
    let coord = |i: usize| T::of(i as f64 / (n - 1) as f64);
    let half = T::of(0.5);
    let f_raw = |a: T, b: T| a * binary_entropy_unchecked(b) + b * binary_entropy_unchecked(a);

    // One entry per unordered pair {a_i, b_j} inside the region (f and the
    // mean are symmetric, so ordered duplicates would add nothing).
    let mut points: Vec<(T, T)> = (0..n)
        .into_par_iter()
        .map(|i| {
            let a = coord(i);
            let mut row = Vec::new();
            let mut jm = if a == T::zero() {
                n - 1
            } else {
                let cap = (inv_gamma / a).as_f64() * (n - 1) as f64;
                cap.min((n - 1) as f64).max(0.0) as usize
            };
            // float fix-up so the cut sits exactly on `a * b <= 1/gamma`
            while jm > 0 && a * coord(jm) > inv_gamma {
                jm -= 1;
            }
            while jm + 1 < n && a * coord(jm + 1) <= inv_gamma {
                jm += 1;
            }
            for j in 0..=jm.min(i) {
                let b = coord(j);
                if a * b <= inv_gamma {
                    row.push(((a + b) * half, f_raw(a, b)));
                }
            }
            // exact boundary point over this column
            if a > T::zero() {
                let pb = inv_gamma / a;
                if pb <= T::one() {
                    row.push(((a + pb) * half, f_raw(a, pb)));
                }
            }
            row
        })
        .flatten()
        .collect();

    points.par_sort_unstable_by(|u, v| {
        u.0.partial_cmp(&v.0)
            .expect("finite grid values")
            .then(u.1.partial_cmp(&v.1).expect("finite grid values"))
    });
    // collapse equal means, keeping the best value
    let mut dedup: Vec<(T, T)> = Vec::with_capacity(points.len());
    for pt in points {
        match dedup.last_mut() {
            Some(last) if last.0 == pt.0 => {
                if pt.1 > last.1 {
                    last.1 = pt.1;
                }
            }
            _ => dedup.push(pt),
        }
    }

    let hull = upper_hull(&dedup);
    let m_max = hull.last().expect("region contains grid points").0;
    if target > m_max {
        // cannot happen for feasible queries: the boundary point over the
        // last column realizes the maximal mean (1 + 1/gamma)/2
        return Err(PhiError::InfeasibleQuery {
            gamma: q.gamma.as_f64(),
            x: q.x.as_f64(),
        });
    }
    let at_target = envelope_at(&hull, target);
    let best_right = hull
        .iter()
        .filter(|pt| pt.0 >= target)
        .map(|pt| pt.1)
        .fold(T::neg_infinity(), T::max);
    let lower = at_target.max(best_right);
    let grid_err = T::of(ORACLE_LIPSCHITZ) / T::of((n - 1) as f64);
    Ok(OracleEstimate {
        lower,
        upper_hint: lower + grid_err,
    })
}

/// Upper convex-hull chain of points sorted by strictly increasing first
/// coordinate.
fn upper_hull<T: Real>(points: &[(T, T)]) -> Vec<(T, T)> {
    let mut hull: Vec<(T, T)> = Vec::new();
    for &pt in points {
        while hull.len() >= 2 {
            let a = hull[hull.len() - 2];
            let b = hull[hull.len() - 1];
            let cross = (b.0 - a.0) * (pt.1 - a.1) - (b.1 - a.1) * (pt.0 - a.0);
            if cross >= T::zero() {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(pt);
    }
    hull
}

/// Value of the concave envelope at `m`; clamps to the end vertices.
fn envelope_at<T: Real>(hull: &[(T, T)], m: T) -> T {
    let k = hull.partition_point(|pt| pt.0 < m);
    if k == 0 {
        return hull[0].1;
    }
    if k == hull.len() {
        return hull[hull.len() - 1].1;
    }
    let (m0, v0) = hull[k - 1];
    let (m1, v1) = hull[k];
    if m1 == m0 {
        return v0.max(v1);
    }
    v0 + (v1 - v0) * ((m - m0) / (m1 - m0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q64(gamma: f64, x: f64) -> PhiQuery<f64> {
        PhiQuery::new(gamma, x).unwrap()
    }

    const H_THIRD: f64 = 0.9182958340544896;
    const F_DIAG_2_3: f64 = 1.224394445405986; // f(2/3, 2/3)

    #[test]
    fn query_validation() {
        assert!(PhiQuery::new(2.24, 2.0).is_err());
        assert!(PhiQuery::new(2.25, 1.99).is_err());
        assert!(PhiQuery::new(f64::INFINITY, 2.0).is_err());
        assert!(PhiQuery::new(2.25, 2.0).is_ok());
    }

    #[test]
    fn closed_form_examples() {
        let pair = closed_form_candidate(&q64(4.5, 2.0)).unwrap();
        assert!((pair.p() - 1.0 / 3.0).abs() < 1e-12);
        assert!((pair.q() - 2.0 / 3.0).abs() < 1e-12);

        // discriminant zero: double root 2/3 is excluded
        assert!(closed_form_candidate(&q64(2.25, 3.0)).is_none());

        let pair = closed_form_candidate(&q64(2.3, 3.2)).unwrap();
        assert!((pair.p() - 0.4928884861978926).abs() < 1e-12);
        assert!((pair.q() - 0.8821115138021074).abs() < 1e-12);
    }

    #[test]
    fn feasibility_examples() {
        assert!(!is_feasible(&q64(2.26, 3.6)));
        assert!(is_feasible(&q64(2.25, 3.6)));
        assert!(is_feasible(&q64(3.0, 2.0)));
    }

    #[test]
    fn lagrangian_bound_known_value() {
        let b = lagrangian_phi_bound(&q64(2.5, 3.0), 0.45).unwrap();
        let cert = b.certificate().unwrap();
        assert!((cert.kappa - 1.5033479609723657).abs() < 1e-12);
        assert!((cert.psi - 3.1217483130512042).abs() < 1e-12);
        assert!((b.value() - 1.11728436508805).abs() < 1e-12);
        assert_eq!(b.regime(), Regime::LagrangianFallback);
        assert_eq!(b.value(), cert.psi - 2.0 * cert.kappa * (1.0 - 1.0 / 3.0));
    }

    #[test]
    fn lagrangian_bound_collapses_to_objective_on_matching_sum() {
        // p0 + q0 = 1 = 2(1 - 1/2): the correction cancels kappa (p0 + q0)
        let b = lagrangian_phi_bound(&q64(4.5, 2.0), 1.0 / 3.0).unwrap();
        assert!((b.value() - H_THIRD).abs() < 1e-12);
    }

    #[test]
    fn lagrangian_bound_rejects_out_of_range() {
        let q = q64(2.5, 3.0);
        assert!(lagrangian_phi_bound(&q, 0.3).is_err()); // below 1/gamma
        assert!(lagrangian_phi_bound(&q, 0.6324555320336759).is_err()); // at 1/sqrt(gamma)
        assert!(lagrangian_phi_bound(&q, 0.4).is_err()); // q0 = 1
    }

    #[test]
    fn phi_upper_three_regimes() {
        let b = phi_upper(&q64(4.5, 2.0));
        assert_eq!(b.regime(), Regime::ClosedForm);
        assert!((b.value() - H_THIRD).abs() < 1e-12);
        let cert = b.certificate().unwrap();
        assert!((cert.p0 * cert.q0 - 1.0 / 4.5).abs() < 1e-12);
        assert!((cert.p0 + cert.q0 - 1.0).abs() < 1e-12);

        let b = phi_upper(&q64(2.26, 3.6));
        assert_eq!(b.regime(), Regime::Infeasible);
        assert_eq!(b.value(), f64::NEG_INFINITY);
        assert!(b.certificate().is_none());

        // double root blocks the closed form; the feasible diagonal point
        // (2/3, 2/3) lower-bounds phi
        let b = phi_upper(&q64(2.25, 3.0));
        assert_eq!(b.regime(), Regime::LagrangianFallback);
        assert!(b.value() >= F_DIAG_2_3 - 1e-9);
        assert!(b.value() <= F_DIAG_2_3 + 1e-3);
        let cert = b.certificate().unwrap();
        assert!((cert.p0 * cert.q0 - 1.0 / 2.25).abs() < 1e-12);
        assert_eq!(
            b.value(),
            cert.psi - 2.0 * cert.kappa * (1.0 - 1.0 / 3.0)
        );
    }

    #[test]
    fn phi_upper_monotone_in_gamma() {
        for &x in &[2.0, 2.5, 3.0, 3.5] {
            let mut prev = f64::INFINITY;
            let mut gamma = 2.25;
            while gamma <= 5.0 {
                let v = phi_upper(&q64(gamma, x)).value();
                assert!(
                    v <= prev + 1e-9,
                    "phi_upper increased at gamma = {gamma}, x = {x}"
                );
                prev = v;
                gamma += 0.05;
            }
        }
    }

    #[test]
    fn sigma_examples() {
        // strict decrease on sampled points for gamma = 2.5
        let s1 = sigma(0.41, 2.5).unwrap();
        let s2 = sigma(0.48, 2.5).unwrap();
        let s3 = sigma(0.55, 2.5).unwrap();
        assert!(s1 > s2 && s2 > s3);

        // near the diagonal endpoint sigma stays finite
        let hi = 1.0 / 2.5f64.sqrt();
        let s = sigma(hi - 1e-6, 2.5).unwrap();
        assert!(s.is_finite());

        // kappa relation: kappa = (1/(gamma ln 2)) * sigma, both positive
        let p = 0.47;
        let gamma = 2.5;
        let q0 = 1.0 / (gamma * p);
        let k = kappa_for(p, q0).unwrap();
        let s = sigma(p, gamma).unwrap();
        assert!(s > 0.0 && k > 0.0);
        assert!((k - s / (gamma * std::f64::consts::LN_2)).abs() < 1e-12);

        assert!(sigma(0.3, 2.5).is_err());
        assert!(sigma(0.7, 2.5).is_err());
        assert!(sigma(0.5, 2.0).is_err());
    }

    #[test]
    fn oracle_matches_closed_form() {
        let q = q64(4.5, 2.0);
        let est = phi_oracle(&q, 400).unwrap();
        assert!((est.lower - H_THIRD).abs() < 1e-3);
        assert!(est.lower <= H_THIRD + 1e-9); // never above the true value
        assert!(est.upper_hint >= est.lower);
    }

    #[test]
    fn oracle_collapses_toward_axes_for_large_gamma() {
        let est = phi_oracle(&q64(1000.0, 2.0), 400).unwrap();
        assert!(est.lower < 0.1);
        assert!(est.lower >= 0.0);
    }

    #[test]
    fn oracle_rejects_bad_inputs() {
        assert!(matches!(
            phi_oracle(&q64(2.26, 3.6), 400),
            Err(PhiError::InfeasibleQuery { .. })
        ));
        assert!(matches!(
            phi_oracle(&q64(4.5, 2.0), 50),
            Err(PhiError::ResolutionTooSmall(50))
        ));
    }

    #[test]
    fn oracle_never_exceeds_fallback_bound() {
        // spot check of soundness in the fallback regime
        for &(gamma, x) in &[(2.25, 3.0), (3.0, 2.0), (2.5, 2.2)] {
            let q = q64(gamma, x);
            let bound = phi_upper(&q).value();
            let est = phi_oracle(&q, 400).unwrap();
            assert!(
                bound >= est.lower - 1e-9,
                "bound {bound} below oracle {} at ({gamma}, {x})",
                est.lower
            );
        }
    }

    mod fuzz {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(48))]

            // the certified bound never dips below what a feasible grid
            // mixture achieves, anywhere in the query box
            #[test]
            fn bound_dominates_oracle(gamma in 2.25f64..6.0, x in 2.0f64..3.6) {
                let q = PhiQuery::new(gamma, x).unwrap();
                prop_assume!(is_feasible(&q));
                let bound = phi_upper(&q).value();
                let est = phi_oracle(&q, 128).unwrap();
                prop_assert!(
                    bound >= est.lower - 1e-9,
                    "bound {} below oracle {} at ({}, {})",
                    bound, est.lower, gamma, x
                );
            }
        }
    }
}
