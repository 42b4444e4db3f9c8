//! The inductive certification run: chain minimal growth factors `rho_i`
//! across a grid of ratio values `lambda_i`, certify every interval with a
//! `phi` bound, and assemble the final theorem constant.
//!
//! One step certifies `c_k(n) <= rho_out^n` for `lambda_lo <= n/k <=
//! lambda_hi`, given `c_k(n) <= rho_in^n` at the left endpoint, where
//! `gamma = (rho_out^lambda_hi / rho_in^lambda_lo)^(1/(lambda_hi -
//! lambda_lo))` and `log2(rho_in) - phi(gamma, lambda_lo) >= delta`. The
//! `delta` margin is what lets plain 64-bit arithmetic stand in for
//! interval arithmetic; on top of it every `phi` bound is inflated by
//! [`PHI_FLOAT_GUARD`] before the margin test, so the float-vs-real gap is
//! an explicit allowance rather than a silent assumption.

use std::io::{self, BufRead, Write};

use rayon::prelude::*;
use thiserror::Error;

use crate::phi::{phi_upper, PhiError, PhiQuery};
use crate::real::Real;

/// Grid defaults reproducing the headline run.
pub const DEFAULT_INTERVALS: usize = 100_000;
pub const DEFAULT_DELTA: f64 = 1e-8;
/// Ratios above this ceiling are handled by the growth-speed extension in
/// [`final_bound`], never by the grid.
pub const LAMBDA_CEILING: f64 = 3.6;
/// Search cap for `rho_out`. The answer is known to lie well below prior
/// bounds near 2.33, so failing above the cap aborts loudly instead of
/// wandering.
pub const RHO_SEARCH_CAP: f64 = 2.5;
/// Absolute bisection tolerance on `rho_out`.
pub const BISECTION_TOL: f64 = 1e-12;
/// Additive inflation applied to every `phi` bound before margin tests.
pub const PHI_FLOAT_GUARD: f64 = 1e-10;

/// Base growth bound: `c_k(2k) <= 2^(2k)`, so the chain starts at 2.
pub const RHO_BASE: f64 = 2.0;

/// Candidate `gamma` values beyond this are clamped during the search;
/// `phi` is non-increasing in `gamma`, so clamping is conservative.
const GAMMA_SEARCH_CAP: f64 = 1e9;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("no rho_out <= {cap} certifies the interval starting at lambda = {lambda_lo}")]
    NoAdmissibleRho { lambda_lo: f64, cap: f64 },
    #[error("interval {index} failed: {source}")]
    Step {
        index: usize,
        #[source]
        source: Box<PipelineError>,
    },
    #[error(transparent)]
    Phi(#[from] PhiError),
    #[error("certificate failed verification: {summary}")]
    VerificationFailed { summary: String },
    #[error("extension past the grid needs final_rho >= {required}, got {final_rho}")]
    ExtensionUnsound { final_rho: f64, required: f64 },
    #[error("certificate parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// The `lambda` grid, margin `delta` and base value `rho0` of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct Schedule<T> {
    lambdas: Vec<T>,
    delta: T,
    rho0: T,
}

impl<T: Real> Schedule<T> {
    pub fn new(lambdas: Vec<T>, delta: T, rho0: T) -> Result<Self, PipelineError> {
        let s = Self { lambdas, delta, rho0 };
        s.validate().map_err(PipelineError::InvalidSchedule)?;
        Ok(s)
    }

    pub(crate) fn new_unchecked(lambdas: Vec<T>, delta: T, rho0: T) -> Self {
        Self { lambdas, delta, rho0 }
    }

    fn validate(&self) -> Result<(), String> {
        if self.lambdas.len() < 2 {
            return Err("need at least one interval".into());
        }
        if self.lambdas[0] != T::of(2.0) {
            return Err(format!(
                "grid must start at 2, got {}",
                self.lambdas[0]
            ));
        }
        let last = *self.lambdas.last().expect("non-empty");
        if !(last <= T::of(LAMBDA_CEILING)) {
            return Err(format!("grid must end at or below {LAMBDA_CEILING}, got {last}"));
        }
        if !self.lambdas.windows(2).all(|w| w[0] < w[1]) {
            return Err("grid values must be strictly increasing".into());
        }
        if !(self.delta > T::zero() && self.delta.is_finite()) {
            return Err(format!("delta must be positive, got {}", self.delta));
        }
        if !(self.rho0.is_finite() && self.rho0 > T::zero()) {
            return Err(format!("rho0 must be positive, got {}", self.rho0));
        }
        Ok(())
    }

    /// Uniform grid `lambda_i = 2 + (i/n)(lambda_max - 2)` with `rho0 = 2`.
    pub fn uniform(n: usize, lambda_max: f64, delta: f64) -> Result<Self, PipelineError> {
        if n == 0 {
            return Err(PipelineError::InvalidSchedule("need at least one interval".into()));
        }
        let lambdas = (0..=n)
            .map(|i| T::of(2.0 + (i as f64 / n as f64) * (lambda_max - 2.0)))
            .collect();
        Self::new(lambdas, T::of(delta), T::of(RHO_BASE))
    }

    /// The run behind the headline constant: 100000 uniform intervals over
    /// `[2, 3.6]` with `delta = 1e-8`.
    pub fn standard() -> Self {
        Self::uniform(DEFAULT_INTERVALS, LAMBDA_CEILING, DEFAULT_DELTA)
            .expect("default schedule is valid")
    }

    pub fn lambdas(&self) -> &[T] {
        &self.lambdas
    }

    pub fn delta(&self) -> T {
        self.delta
    }

    pub fn rho0(&self) -> T {
        self.rho0
    }

    pub fn n_intervals(&self) -> usize {
        self.lambdas.len() - 1
    }
}

/// One certified interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RhoStep<T> {
    pub lambda_lo: T,
    pub lambda_hi: T,
    pub rho_in: T,
    pub rho_out: T,
    pub gamma: T,
    /// `phi` bound at `(gamma, lambda_lo)`, inflated by [`PHI_FLOAT_GUARD`]
    /// (negative infinity when the query is infeasible).
    pub phi_value: T,
    /// `log2(rho_in) - phi_value`; a step is certified when this is at
    /// least `delta`.
    pub margin: T,
}

/// A full run: schedule, per-interval steps, and the resulting constant.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundCertificate<T> {
    schedule: Schedule<T>,
    steps: Vec<RhoStep<T>>,
    final_rho: T,
    theorem_bound: T,
}

impl<T: Real> BoundCertificate<T> {
    pub fn schedule(&self) -> &Schedule<T> {
        &self.schedule
    }

    pub fn steps(&self) -> &[RhoStep<T>] {
        &self.steps
    }

    pub fn final_rho(&self) -> T {
        self.final_rho
    }

    pub fn theorem_bound(&self) -> T {
        self.theorem_bound
    }

    /// Test-and-tooling hook: rebuild a certificate from raw parts.
    pub fn from_parts(
        schedule: Schedule<T>,
        steps: Vec<RhoStep<T>>,
        final_rho: T,
        theorem_bound: T,
    ) -> Self {
        Self { schedule, steps, final_rho, theorem_bound }
    }
}

/// `gamma = (r2^mu / r1^lam)^(1/(mu - lam))`, the growth rate that turns a
/// bound of `r1` at `lam` into `r2` at `mu`.
pub fn gamma_from<T: Real>(r1: T, r2: T, lam: T, mu: T) -> Result<T, PipelineError> {
    let two = T::of(2.0);
    if !(r1 >= two && r2 >= r1 && r1.is_finite() && r2.is_finite()) {
        return Err(PipelineError::Precondition(format!(
            "need 2 <= r1 <= r2, got r1 = {r1}, r2 = {r2}"
        )));
    }
    if !(lam >= two && mu > lam && mu.is_finite()) {
        return Err(PipelineError::Precondition(format!(
            "need 2 <= lam < mu, got lam = {lam}, mu = {mu}"
        )));
    }
    // r1 * exp(mu * ln(r2/r1) / (mu - lam)); ln_1p on the exact difference
    // keeps full precision when r2 - r1 is tiny
    let dln = ((r2 - r1) / r1).ln_1p();
    Ok(r1 * (mu * dln / (mu - lam)).exp())
}

/// Inflated bound value used everywhere a margin is taken.
fn assessed_phi<T: Real>(q: &PhiQuery<T>) -> T {
    let b = phi_upper(q);
    if b.is_infeasible() {
        T::neg_infinity()
    } else {
        b.value() + T::of(PHI_FLOAT_GUARD)
    }
}

/// Whether `r1` certifies the interval at `lam` with growth rate `gamma`:
/// `log2(r1) - phi(gamma, lam) >= delta`, an infeasible `phi` always
/// passing.
pub fn step_ok<T: Real>(r1: T, gamma: T, lam: T, delta: T) -> Result<bool, PipelineError> {
    if !(r1 >= T::of(2.0) && gamma >= r1) {
        return Err(PipelineError::Precondition(format!(
            "need 2 <= r1 <= gamma, got r1 = {r1}, gamma = {gamma}"
        )));
    }
    let q = PhiQuery::new(gamma, lam)?;
    Ok(r1.log2() - assessed_phi(&q) >= delta)
}

/// Minimal `rho_out` in `[rho_in, 2.5]` certifying the interval
/// `[lam, mu]`, found by bisection over the monotone predicate.
pub fn next_rho<T: Real>(rho_in: T, lam: T, mu: T, delta: T) -> Result<RhoStep<T>, PipelineError> {
    let cap = T::of(RHO_SEARCH_CAP);
    if !(rho_in >= T::of(2.0) && rho_in <= cap) {
        return Err(PipelineError::Precondition(format!(
            "need 2 <= rho_in <= {RHO_SEARCH_CAP}, got {rho_in}"
        )));
    }
    if !(lam >= T::of(2.0) && lam < mu && mu <= T::of(LAMBDA_CEILING)) {
        return Err(PipelineError::Precondition(format!(
            "need 2 <= lam < mu <= {LAMBDA_CEILING}, got lam = {lam}, mu = {mu}"
        )));
    }

    // Monotone in rho_out: gamma grows with rho_out and phi shrinks with
    // gamma. Below the query floor nothing can be certified.
    let pred = |rho_out: T| -> Result<bool, PipelineError> {
        let gamma = gamma_from(rho_in, rho_out, lam, mu)?;
        if gamma < T::of(crate::phi::GAMMA_FLOOR) {
            return Ok(false);
        }
        let gamma = gamma.min(T::of(GAMMA_SEARCH_CAP));
        step_ok(rho_in, gamma, lam, delta)
    };

    let rho_out = if pred(rho_in)? {
        rho_in
    } else if !pred(cap)? {
        return Err(PipelineError::NoAdmissibleRho {
            lambda_lo: lam.as_f64(),
            cap: RHO_SEARCH_CAP,
        });
    } else {
        let mut lo = rho_in;
        let mut hi = cap;
        let tol = T::of(BISECTION_TOL);
        while hi - lo > tol {
            let mid = (lo + hi) * T::of(0.5);
            if mid <= lo || mid >= hi {
                break; // float resolution exhausted
            }
            if pred(mid)? {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        hi
    };

    let gamma = gamma_from(rho_in, rho_out, lam, mu)?;
    let q = PhiQuery::new(gamma, lam)?;
    let phi_value = assessed_phi(&q);
    let margin = rho_in.log2() - phi_value;
    debug_assert!(margin >= delta, "accepted step lost its margin");
    Ok(RhoStep {
        lambda_lo: lam,
        lambda_hi: mu,
        rho_in,
        rho_out,
        gamma,
        phi_value,
        margin,
    })
}

/// Runs the full chain. `on_step` sees each finished interval, for
/// progress reporting.
pub fn run_schedule_with<T, F>(s: &Schedule<T>, mut on_step: F) -> Result<BoundCertificate<T>, PipelineError>
where
    T: Real,
    F: FnMut(usize, &RhoStep<T>),
{
    s.validate().map_err(PipelineError::InvalidSchedule)?;
    let n = s.n_intervals();
    let mut steps = Vec::with_capacity(n);
    let mut rho = s.rho0;
    for i in 0..n {
        let step = next_rho(rho, s.lambdas[i], s.lambdas[i + 1], s.delta).map_err(|e| {
            PipelineError::Step { index: i, source: Box::new(e) }
        })?;
        rho = step.rho_out;
        on_step(i, &step);
        steps.push(step);
    }
    let final_rho = rho;
    let theorem_bound = round_up_4dp(final_rho);
    Ok(BoundCertificate { schedule: s.clone(), steps, final_rho, theorem_bound })
}

pub fn run_schedule<T: Real>(s: &Schedule<T>) -> Result<BoundCertificate<T>, PipelineError> {
    run_schedule_with(s, |_, _| {})
}

/// `x` rounded up at the fourth decimal, never below `x`.
pub fn round_up_4dp<T: Real>(x: T) -> T {
    let mut k = (x.as_f64() * 1e4).ceil();
    while T::of(k / 1e4) < x {
        k += 1.0;
    }
    T::of(k / 1e4)
}

/// Outcome of an independent certificate check.
#[derive(Debug, Clone, Default)]
pub struct VerifyReport {
    /// Failed checks, each tagged with the step index where applicable.
    pub failures: Vec<(Option<usize>, String)>,
    /// Proof-side conditions that hold by construction and carry no
    /// numeric content; recorded for the record.
    pub notes: Vec<String>,
}

impl VerifyReport {
    pub fn ok(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn failed_steps(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self.failures.iter().filter_map(|(i, _)| *i).collect();
        v.dedup();
        v
    }
}

/// Recomputes every step of a certificate from scratch: grid and chain
/// structure, the base anchor `rho0 = 2` at `lambda = 2`, each `gamma`
/// from its defining identity, and a fresh `phi` bound with margin at
/// least `delta`.
pub fn verify_certificate_report<T: Real>(c: &BoundCertificate<T>) -> VerifyReport {
    let mut report = VerifyReport::default();

    let s = &c.schedule;
    if let Err(msg) = s.validate() {
        report.failures.push((None, msg));
    }
    if c.steps.is_empty() {
        report.failures.push((None, "certificate has no steps".into()));
        return report;
    }
    if c.steps.len() != s.lambdas.len().saturating_sub(1) {
        report.failures.push((
            None,
            format!(
                "{} steps do not match {} grid values",
                c.steps.len(),
                s.lambdas.len()
            ),
        ));
        return report;
    }
    // base case: growth 2 at ratio 2 comes from the 2^(2(n-k)) bound on
    // uniform pairs, so a smaller rho0 has no anchor
    if !(s.rho0 >= T::of(RHO_BASE)) {
        report
            .failures
            .push((None, format!("rho0 = {} below the base anchor 2", s.rho0)));
    }
    if s.lambdas[0] != T::of(2.0) {
        report.failures.push((
            None,
            format!("grid starts at {}, base case needs 2", s.lambdas[0]),
        ));
    }
    if c.steps[0].rho_in != s.rho0 {
        report.failures.push((
            Some(0),
            format!(
                "first step starts at {}, schedule rho0 is {}",
                c.steps[0].rho_in, s.rho0
            ),
        ));
    }
    for i in 0..c.steps.len() - 1 {
        if c.steps[i].rho_out != c.steps[i + 1].rho_in {
            report.failures.push((
                Some(i + 1),
                format!(
                    "chain broken: step {} ends at {} but step {} starts at {}",
                    i,
                    c.steps[i].rho_out,
                    i + 1,
                    c.steps[i + 1].rho_in
                ),
            ));
        }
    }

    let mut step_failures: Vec<(Option<usize>, String)> = c
        .steps
        .par_iter()
        .enumerate()
        .flat_map_iter(|(i, st)| check_step(s, i, st).into_iter().map(move |m| (Some(i), m)))
        .collect();
    report.failures.append(&mut step_failures);

    let last = c.steps.last().expect("non-empty");
    if c.final_rho != last.rho_out {
        report.failures.push((
            None,
            format!(
                "final_rho = {} but the last step ends at {}",
                c.final_rho, last.rho_out
            ),
        ));
    }
    let rounded = round_up_4dp(c.final_rho);
    if !(c.theorem_bound >= c.final_rho) || c.theorem_bound != rounded {
        report.failures.push((
            None,
            format!(
                "theorem_bound = {} inconsistent with final_rho = {} (rounded {})",
                c.theorem_bound, c.final_rho, rounded
            ),
        ));
    }

    report.notes.push(
        "grid values are finite binary fractions, hence rational; a single fixed \
         integer divisor for k makes every lambda_i * k integral"
            .into(),
    );
    report.notes.push(
        "base anchor: uniform pairs on n = 2k points satisfy the 2^(2(n-k)) size \
         bound, giving rho0 = 2 at lambda = 2"
            .into(),
    );
    report
}

fn check_step<T: Real>(s: &Schedule<T>, i: usize, st: &RhoStep<T>) -> Vec<String> {
    let mut msgs = Vec::new();
    if st.lambda_lo != s.lambdas[i] || st.lambda_hi != s.lambdas[i + 1] {
        msgs.push(format!(
            "interval [{}, {}] does not match grid [{}, {}]",
            st.lambda_lo,
            st.lambda_hi,
            s.lambdas[i],
            s.lambdas[i + 1]
        ));
        return msgs;
    }
    if !(st.rho_out >= st.rho_in) {
        msgs.push(format!("rho_out = {} below rho_in = {}", st.rho_out, st.rho_in));
        return msgs;
    }
    let gamma = match gamma_from(st.rho_in, st.rho_out, st.lambda_lo, st.lambda_hi) {
        Ok(g) => g,
        Err(e) => {
            msgs.push(format!("gamma recomputation failed: {e}"));
            return msgs;
        }
    };
    let rel = ((gamma - st.gamma) / gamma).abs();
    if !(rel <= T::of(1e-12)) {
        msgs.push(format!(
            "stored gamma = {} off the recomputed {} by relative {rel}",
            st.gamma, gamma
        ));
    }
    if !(gamma >= T::of(crate::phi::GAMMA_FLOOR)) {
        msgs.push(format!("gamma = {gamma} below the 2.25 floor"));
        return msgs;
    }
    if !(gamma >= st.rho_in) {
        msgs.push(format!("gamma = {gamma} below rho_in = {}", st.rho_in));
        return msgs;
    }
    let q = match PhiQuery::new(gamma, st.lambda_lo) {
        Ok(q) => q,
        Err(e) => {
            msgs.push(format!("phi query rejected: {e}"));
            return msgs;
        }
    };
    let fresh_phi = assessed_phi(&q);
    let fresh_margin = st.rho_in.log2() - fresh_phi;
    if !(fresh_margin >= s.delta) {
        msgs.push(format!(
            "recomputed margin {fresh_margin} below delta = {}",
            s.delta
        ));
    }
    // stored record must be internally consistent as well
    let stored_margin_ok = if st.phi_value == T::neg_infinity() {
        st.margin == T::infinity()
    } else {
        (st.margin - (st.rho_in.log2() - st.phi_value)).abs() <= T::of(1e-12)
    };
    if !stored_margin_ok {
        msgs.push(format!(
            "stored margin {} inconsistent with log2(rho_in) - phi_value",
            st.margin
        ));
    }
    if !(st.margin >= s.delta) {
        msgs.push(format!("stored margin {} below delta = {}", st.margin, s.delta));
    }
    msgs
}

pub fn verify_certificate<T: Real>(c: &BoundCertificate<T>) -> bool {
    verify_certificate_report(c).ok()
}

/// The all-ratios constant certified by `c`.
///
/// The grid covers `2 <= n/k <= lambda_N`; below 2 the elementary
/// `2^(2(n-k))` bound is within `rho^n` for any `rho >= 2`; above
/// `lambda_N` the coordinate-removal argument bounds the growth speed by
/// `lambda_N / (lambda_N - 2)` (which is 2.25 at the 3.6 ceiling), so the
/// extension is sound exactly when `final_rho` reaches that rate. The
/// product construction then lifts the uniform bound to arbitrary pairs.
pub fn final_bound<T: Real>(c: &BoundCertificate<T>) -> Result<T, PipelineError> {
    let report = verify_certificate_report(c);
    if !report.ok() {
        let mut summary: Vec<String> = report
            .failures
            .iter()
            .take(3)
            .map(|(i, m)| match i {
                Some(i) => format!("step {i}: {m}"),
                None => m.clone(),
            })
            .collect();
        if report.failures.len() > 3 {
            summary.push(format!("... and {} more", report.failures.len() - 3));
        }
        return Err(PipelineError::VerificationFailed { summary: summary.join("; ") });
    }
    let lambda_n = *c.schedule.lambdas.last().expect("validated");
    let required = lambda_n / (lambda_n - T::of(2.0));
    if !(c.final_rho >= required) {
        return Err(PipelineError::ExtensionUnsound {
            final_rho: c.final_rho.as_f64(),
            required: required.as_f64(),
        });
    }
    Ok(c.theorem_bound)
}

fn fmt_real<T: Real>(x: T) -> String {
    // 17 significant digits: enough to round-trip an f64 exactly
    format!("{:.16e}", x.as_f64())
}

impl<T: Real> BoundCertificate<T> {
    /// Line-oriented text format: `N`, `delta`, `rho0` headers, one line
    /// per step (`i lambda_lo lambda_hi rho_in rho_out gamma phi_value
    /// margin`, space separated), then `final_rho` and `theorem_bound`.
    /// Reals carry 17 significant digits so parsing is lossless.
    pub fn write_text<W: Write>(&self, w: &mut W) -> io::Result<()> {
        writeln!(w, "N={}", self.steps.len())?;
        writeln!(w, "delta={}", fmt_real(self.schedule.delta))?;
        writeln!(w, "rho0={}", fmt_real(self.schedule.rho0))?;
        for (i, st) in self.steps.iter().enumerate() {
            writeln!(
                w,
                "{} {} {} {} {} {} {} {}",
                i,
                fmt_real(st.lambda_lo),
                fmt_real(st.lambda_hi),
                fmt_real(st.rho_in),
                fmt_real(st.rho_out),
                fmt_real(st.gamma),
                fmt_real(st.phi_value),
                fmt_real(st.margin),
            )?;
        }
        writeln!(w, "final_rho={}", fmt_real(self.final_rho))?;
        writeln!(w, "theorem_bound={}", fmt_real(self.theorem_bound))?;
        Ok(())
    }

    pub fn read_text<R: BufRead>(r: &mut R) -> Result<Self, PipelineError> {
        let mut lines = r.lines().enumerate();
        let mut next_line = |what: &str| -> Result<(usize, String), PipelineError> {
            match lines.next() {
                Some((no, Ok(line))) => Ok((no + 1, line)),
                Some((no, Err(e))) => Err(PipelineError::Parse { line: no + 1, msg: e.to_string() }),
                None => Err(PipelineError::Parse { line: 0, msg: format!("missing {what}") }),
            }
        };

        let (no, line) = next_line("N header")?;
        let n: usize = parse_kv(no, &line, "N")?;
        let (no, line) = next_line("delta header")?;
        let delta: T = parse_real_kv(no, &line, "delta")?;
        let (no, line) = next_line("rho0 header")?;
        let rho0: T = parse_real_kv(no, &line, "rho0")?;

        let mut steps: Vec<RhoStep<T>> = Vec::with_capacity(n);
        for i in 0..n {
            let (no, line) = next_line("step line")?;
            let fields: Vec<&str> = line.split_ascii_whitespace().collect();
            if fields.len() != 8 {
                return Err(PipelineError::Parse {
                    line: no,
                    msg: format!("expected 8 fields, got {}", fields.len()),
                });
            }
            let idx: usize = fields[0].parse().map_err(|e| PipelineError::Parse {
                line: no,
                msg: format!("bad step index: {e}"),
            })?;
            if idx != i {
                return Err(PipelineError::Parse {
                    line: no,
                    msg: format!("expected step {i}, found {idx}"),
                });
            }
            let mut reals = [T::zero(); 7];
            for (slot, field) in reals.iter_mut().zip(&fields[1..]) {
                *slot = parse_real(no, field)?;
            }
            steps.push(RhoStep {
                lambda_lo: reals[0],
                lambda_hi: reals[1],
                rho_in: reals[2],
                rho_out: reals[3],
                gamma: reals[4],
                phi_value: reals[5],
                margin: reals[6],
            });
        }

        let (no, line) = next_line("final_rho line")?;
        let final_rho: T = parse_real_kv(no, &line, "final_rho")?;
        let (no, line) = next_line("theorem_bound line")?;
        let theorem_bound: T = parse_real_kv(no, &line, "theorem_bound")?;
        if let Some((no, line)) = lines.next() {
            let line = line.map_err(|e| PipelineError::Parse { line: no + 1, msg: e.to_string() })?;
            if !line.trim().is_empty() {
                return Err(PipelineError::Parse {
                    line: no + 1,
                    msg: "trailing content after theorem_bound".into(),
                });
            }
        }

        // grid reconstructed from the step intervals; semantic consistency
        // (chaining, monotonicity) is the verifier's job
        let mut lambdas: Vec<T> = steps.iter().map(|s| s.lambda_lo).collect();
        if let Some(last) = steps.last() {
            lambdas.push(last.lambda_hi);
        }
        Ok(BoundCertificate {
            schedule: Schedule::new_unchecked(lambdas, delta, rho0),
            steps,
            final_rho,
            theorem_bound,
        })
    }
}

fn parse_kv(line_no: usize, line: &str, key: &str) -> Result<usize, PipelineError> {
    let value = expect_kv(line_no, line, key)?;
    value.parse().map_err(|e| PipelineError::Parse {
        line: line_no,
        msg: format!("bad {key}: {e}"),
    })
}

fn parse_real_kv<T: Real>(line_no: usize, line: &str, key: &str) -> Result<T, PipelineError> {
    let value = expect_kv(line_no, line, key)?;
    parse_real(line_no, value)
}

fn expect_kv<'a>(line_no: usize, line: &'a str, key: &str) -> Result<&'a str, PipelineError> {
    line.strip_prefix(key)
        .and_then(|rest| rest.strip_prefix('='))
        .ok_or_else(|| PipelineError::Parse {
            line: line_no,
            msg: format!("expected `{key}=...`, got `{line}`"),
        })
}

fn parse_real<T: Real>(line_no: usize, s: &str) -> Result<T, PipelineError> {
    let v: f64 = s.parse().map_err(|e| PipelineError::Parse {
        line: line_no,
        msg: format!("bad real `{s}`: {e}"),
    })?;
    Ok(T::of(v))
}
