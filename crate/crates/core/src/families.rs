//! Concrete pairs of set families over small ground sets: property
//! checkers, constructions, products, the entropy inequality, and
//! exhaustive desk-scale searches.
//!
//! Subsets are characteristic bit masks (`u32`, element `i` of `[n]` at
//! bit `i - 1`), with the ground set capped at 24 elements so everything
//! fits comfortably in one word. Empty families are rejected at
//! construction throughout.

use std::collections::HashMap;
use std::io::{self, BufRead, Write};

use thiserror::Error;

use crate::entropy::{pair_objective, ProbPair};
use crate::real::Real;

/// Ground sets larger than this are out of desk scale.
pub const MAX_GROUND_SET: u32 = 24;

/// Full enumeration of arbitrary families is feasible only this far.
pub const MAX_EXHAUSTIVE_N: u32 = 3;

/// Cap on the number of k-subsets for the uniform search.
pub const MAX_UNIFORM_UNIVERSE: usize = 12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FamilyError {
    #[error("ground set size {0} outside 1..={MAX_GROUND_SET}")]
    InvalidGroundSet(u32),
    #[error("families must be non-empty")]
    EmptyFamily,
    #[error("duplicate subset {0:#b}")]
    DuplicateSubset(u32),
    #[error("subset {mask:#b} has support outside [{n}]")]
    SubsetOutOfRange { mask: u32, n: u32 },
    #[error("product ground set {0} exceeds {MAX_GROUND_SET}")]
    GroundSetOverflow(u32),
    #[error("pair is not cancellative")]
    NotCancellative,
    #[error("search out of range: {0}")]
    SearchTooLarge(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

/// A pair of duplicate-free subset families over `[n]`, stored as sorted
/// mask lists.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FamilyPair {
    n: u32,
    a: Vec<u32>,
    b: Vec<u32>,
}

impl FamilyPair {
    pub fn new(n: u32, mut a: Vec<u32>, mut b: Vec<u32>) -> Result<Self, FamilyError> {
        if n == 0 || n > MAX_GROUND_SET {
            return Err(FamilyError::InvalidGroundSet(n));
        }
        if a.is_empty() || b.is_empty() {
            return Err(FamilyError::EmptyFamily);
        }
        let limit = 1u32 << n;
        for list in [&mut a, &mut b] {
            for &mask in list.iter() {
                if mask >= limit {
                    return Err(FamilyError::SubsetOutOfRange { mask, n });
                }
            }
            list.sort_unstable();
            if let Some(w) = list.windows(2).find(|w| w[0] == w[1]) {
                return Err(FamilyError::DuplicateSubset(w[0]));
            }
        }
        Ok(Self { n, a, b })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn a(&self) -> &[u32] {
        &self.a
    }

    pub fn b(&self) -> &[u32] {
        &self.b
    }

    /// `|A| * |B|`.
    pub fn size_product(&self) -> u64 {
        self.a.len() as u64 * self.b.len() as u64
    }

    /// The pair with the two families exchanged.
    pub fn swap(&self) -> Self {
        Self { n: self.n, a: self.b.clone(), b: self.a.clone() }
    }

    /// Union-cancellation in both directions: for fixed `B` the unions
    /// `A | B` are pairwise distinct over `A`, and symmetrically.
    pub fn is_cancellative(&self) -> bool {
        unions_injective(&self.a, &self.b) && unions_injective(&self.b, &self.a)
    }

    /// The equivalent set-difference form: for fixed `B` the differences
    /// `A \ B` are pairwise distinct over `A`, and symmetrically.
    /// Cross-check twin of [`Self::is_cancellative`].
    pub fn is_cancellative_by_differences(&self) -> bool {
        differences_injective(&self.a, &self.b) && differences_injective(&self.b, &self.a)
    }

    /// Recovering property: `A \ B` determines `A` across all choices of
    /// `B` from the other family, and symmetrically. Strictly stronger
    /// than cancellative.
    pub fn is_recovering(&self) -> bool {
        difference_determines(&self.a, &self.b) && difference_determines(&self.b, &self.a)
    }

    /// Product over disjoint ground sets (the second pair's elements are
    /// shifted past `self.n`); family sizes multiply.
    pub fn product(&self, other: &FamilyPair) -> Result<FamilyPair, FamilyError> {
        let n = self.n + other.n;
        if n > MAX_GROUND_SET {
            return Err(FamilyError::GroundSetOverflow(n));
        }
        let combine = |xs: &[u32], ys: &[u32]| -> Vec<u32> {
            let mut out = Vec::with_capacity(xs.len() * ys.len());
            for &x in xs {
                for &y in ys {
                    out.push(x | (y << self.n));
                }
            }
            out
        };
        FamilyPair::new(n, combine(&self.a, &other.a), combine(&self.b, &other.b))
    }

    /// Reduction to a uniform pair: multiply the pair with its own swap
    /// (equalizing the two sides), keep the most popular size class `k0`
    /// (smallest on ties), then raise the result to the `m`-th product
    /// power for an `(m * k0)`-uniform pair.
    ///
    /// The selected class retains at least `|A||B| / (n_out + 1)` sets per
    /// side before the power step.
    pub fn symmetrize_uniformize(&self, m: u32) -> Result<FamilyPair, FamilyError> {
        if m == 0 {
            return Err(FamilyError::InvalidArgument("m must be positive".into()));
        }
        if !self.is_cancellative() {
            return Err(FamilyError::NotCancellative);
        }
        let squared = self.product(&self.swap())?;
        let mut counts = vec![0usize; squared.n as usize + 1];
        for &mask in &squared.a {
            counts[mask.count_ones() as usize] += 1;
        }
        // most popular class, smallest size on ties
        let k0 = counts
            .iter()
            .enumerate()
            .min_by_key(|&(k, &c)| (std::cmp::Reverse(c), k))
            .map(|(k, _)| k as u32)
            .expect("non-empty histogram");
        let keep = |list: &[u32]| -> Vec<u32> {
            list.iter().copied().filter(|m| m.count_ones() == k0).collect()
        };
        let uniform = FamilyPair::new(squared.n, keep(&squared.a), keep(&squared.b))?;
        debug_assert_eq!(uniform.a.len(), uniform.b.len());
        let mut out = uniform.clone();
        for _ in 1..m {
            out = out.product(&uniform)?;
        }
        Ok(out)
    }

    /// Per-coordinate frequency of the sets avoiding each element:
    /// `p_i = |{A : i not in A}| / |A|`.
    fn avoidance_frequencies<T: Real>(list: &[u32], n: u32) -> Vec<T> {
        (0..n)
            .map(|i| {
                let missing = list.iter().filter(|&&m| m & (1 << i) == 0).count();
                T::of(missing as f64 / list.len() as f64)
            })
            .collect()
    }
}

fn unions_injective(keys: &[u32], others: &[u32]) -> bool {
    let mut buf = Vec::with_capacity(keys.len());
    for &o in others {
        buf.clear();
        buf.extend(keys.iter().map(|&k| k | o));
        buf.sort_unstable();
        if buf.windows(2).any(|w| w[0] == w[1]) {
            return false;
        }
    }
    true
}

fn differences_injective(keys: &[u32], others: &[u32]) -> bool {
    let mut buf = Vec::with_capacity(keys.len());
    for &o in others {
        buf.clear();
        buf.extend(keys.iter().map(|&k| k & !o));
        buf.sort_unstable();
        if buf.windows(2).any(|w| w[0] == w[1]) {
            return false;
        }
    }
    true
}

fn difference_determines(keys: &[u32], others: &[u32]) -> bool {
    let mut seen: HashMap<u32, u32> = HashMap::with_capacity(keys.len() * others.len());
    for &k in keys {
        for &o in others {
            match seen.insert(k & !o, k) {
                Some(prev) if prev != k => return false,
                _ => {}
            }
        }
    }
    true
}

/// Left- and right-hand side of the entropy inequality
/// `log2(|A||B|) <= sum_i f(p_i, q_i)` for a cancellative pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntropyCheck<T> {
    pub lhs: T,
    pub rhs: T,
    pub holds: bool,
}

pub fn entropy_inequality_check<T: Real>(fp: &FamilyPair) -> Result<EntropyCheck<T>, FamilyError> {
    if !fp.is_cancellative() {
        return Err(FamilyError::NotCancellative);
    }
    let lhs = T::of(fp.size_product() as f64).log2();
    let p = FamilyPair::avoidance_frequencies::<T>(&fp.a, fp.n);
    let q = FamilyPair::avoidance_frequencies::<T>(&fp.b, fp.n);
    let rhs = p
        .iter()
        .zip(&q)
        .map(|(&pi, &qi)| pair_objective(ProbPair::new(pi, qi).expect("frequencies in [0,1]")))
        .fold(T::zero(), |acc, v| acc + v);
    Ok(EntropyCheck { lhs, rhs, holds: lhs <= rhs + T::of(1e-12) })
}

/// Exact maximum of `|A||B|` with one witness.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchResult {
    pub value: u64,
    pub witness: FamilyPair,
}

/// Exact maximum over all cancellative pairs on `[n]`, `n <= 3`.
pub fn exhaustive_max_c(n: u32) -> Result<SearchResult, FamilyError> {
    if n == 0 || n > MAX_EXHAUSTIVE_N {
        return Err(FamilyError::SearchTooLarge(format!(
            "full enumeration supported for n in 1..={MAX_EXHAUSTIVE_N}, got {n}"
        )));
    }
    let universe: Vec<u32> = (0..1u32 << n).collect();
    let (value, a, b) = max_product_over(&universe);
    Ok(SearchResult { value, witness: FamilyPair::new(n, a, b)? })
}

/// Exact maximum over k-uniform cancellative pairs on `[n]`.
pub fn exhaustive_max_ck(n: u32, k: u32) -> Result<SearchResult, FamilyError> {
    if n == 0 || n > MAX_GROUND_SET || k == 0 || k > n {
        return Err(FamilyError::SearchTooLarge(format!(
            "need 1 <= k <= n <= {MAX_GROUND_SET}, got n = {n}, k = {k}"
        )));
    }
    let universe: Vec<u32> = (0..1u32 << n).filter(|m| m.count_ones() == k).collect();
    if universe.len() > MAX_UNIFORM_UNIVERSE {
        return Err(FamilyError::SearchTooLarge(format!(
            "C({n}, {k}) = {} k-subsets exceed the cap of {MAX_UNIFORM_UNIVERSE}",
            universe.len()
        )));
    }
    let (value, a, b) = max_product_over(&universe);
    Ok(SearchResult { value, witness: FamilyPair::new(n, a, b)? })
}

/// Branch-and-bound over pairs of subfamilies of `universe`, extending
/// families in sorted order. Cancellativity is hereditary downward, so a
/// branch dies as soon as one added set breaks it; branches whose best
/// possible product cannot beat the incumbent are discarded. Ties keep
/// the lexicographically first pair visited.
fn max_product_over(universe: &[u32]) -> (u64, Vec<u32>, Vec<u32>) {
    struct Search<'u> {
        universe: &'u [u32],
        best: u64,
        best_a: Vec<u32>,
        best_b: Vec<u32>,
    }

    impl Search<'_> {
        fn extend_a(&mut self, a: &mut Vec<u32>, from: usize) {
            let m = self.universe.len() as u64;
            for idx in from..self.universe.len() {
                let remaining = (self.universe.len() - idx) as u64;
                if (a.len() as u64 + remaining) * m <= self.best {
                    break; // even completing A cannot beat the incumbent
                }
                a.push(self.universe[idx]);
                if (a.len() as u64) * m > self.best {
                    let mut b = Vec::new();
                    self.extend_b(a, &mut b, 0);
                }
                self.extend_a(a, idx + 1);
                a.pop();
            }
        }

        fn extend_b(&mut self, a: &[u32], b: &mut Vec<u32>, from: usize) {
            for idx in from..self.universe.len() {
                let remaining = (self.universe.len() - idx) as u64;
                if (b.len() as u64 + remaining) * a.len() as u64 <= self.best {
                    break;
                }
                let cand = self.universe[idx];
                if !extension_keeps_cancellative(a, b, cand) {
                    continue;
                }
                b.push(cand);
                let value = a.len() as u64 * b.len() as u64;
                if value > self.best {
                    self.best = value;
                    self.best_a = a.to_vec();
                    self.best_b = b.clone();
                }
                self.extend_b(a, b, idx + 1);
                b.pop();
            }
        }
    }

    let mut search = Search { universe, best: 0, best_a: Vec::new(), best_b: Vec::new() };
    let mut a = Vec::new();
    search.extend_a(&mut a, 0);
    (search.best, search.best_a, search.best_b)
}

/// Whether `(keys, others + [cand])` stays cancellative given that
/// `(keys, others)` already is.
fn extension_keeps_cancellative(keys: &[u32], others: &[u32], cand: u32) -> bool {
    // unions with cand must stay distinct across keys
    for (i, &x) in keys.iter().enumerate() {
        for &y in &keys[i + 1..] {
            if x | cand == y | cand {
                return false;
            }
        }
    }
    // for each key, cand's union must differ from every existing one
    for &x in keys {
        for &o in others {
            if o | x == cand | x {
                return false;
            }
        }
    }
    true
}

/// `m`-fold product of the blocks `A = B = {{1}, {2}, {3}}`, the
/// one-per-class construction with `|A||B| = 3^(2n/3)`.
pub fn triple_blocks(m: u32) -> Result<FamilyPair, FamilyError> {
    if m == 0 || 3 * m > MAX_GROUND_SET {
        return Err(FamilyError::InvalidArgument(format!(
            "need 1 <= m <= {}, got {m}",
            MAX_GROUND_SET / 3
        )));
    }
    let block = FamilyPair::new(3, vec![0b001, 0b010, 0b100], vec![0b001, 0b010, 0b100])?;
    let mut out = block.clone();
    for _ in 1..m {
        out = out.product(&block)?;
    }
    Ok(out)
}

/// The recovering pair `A = P(S1)`, `B = P(S \ S1)` with `S1` the first
/// `s1` elements; attains `|A||B| = 2^n`.
pub fn powerset_split(n: u32, s1: u32) -> Result<FamilyPair, FamilyError> {
    if n == 0 || n > MAX_GROUND_SET || s1 > n {
        return Err(FamilyError::InvalidArgument(format!(
            "need s1 <= n <= {MAX_GROUND_SET}, got n = {n}, s1 = {s1}"
        )));
    }
    let low: u32 = (1u32 << s1) - 1;
    let a: Vec<u32> = (0..=low).collect();
    let b: Vec<u32> = (0..1u32 << (n - s1)).map(|m| m << s1).collect();
    FamilyPair::new(n, a, b)
}

/// Deterministic pseudo-random cancellative pair: greedily accumulates
/// random subsets on alternating sides, keeping only extensions that
/// preserve cancellativity. Intended for test corpora; the same seed
/// always yields the same pair.
pub fn random_cancellative_pair(n: u32, target_side_size: usize, seed: u64) -> FamilyPair {
    assert!((1..=MAX_GROUND_SET).contains(&n));
    assert!(target_side_size >= 1);
    let mut rng = SplitMix64::new(seed);
    let mask = |rng: &mut SplitMix64| (rng.next() % (1u64 << n)) as u32;
    let mut a = vec![mask(&mut rng)];
    let mut b = vec![mask(&mut rng)];
    let budget = 16 * target_side_size.max(4);
    for _ in 0..budget {
        if a.len() >= target_side_size && b.len() >= target_side_size {
            break;
        }
        let cand = mask(&mut rng);
        let to_a = rng.next() & 1 == 0;
        let (grown, fixed) = if to_a { (&mut a, &b) } else { (&mut b, &a) };
        if grown.len() >= target_side_size || grown.contains(&cand) {
            continue;
        }
        if extension_keeps_cancellative(fixed, grown, cand) {
            grown.push(cand);
        }
    }
    let fp = FamilyPair::new(n, a, b).expect("incremental construction stays valid");
    debug_assert!(fp.is_cancellative());
    fp
}

pub(crate) struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub(crate) fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    pub(crate) fn next(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9e3779b97f4a7c15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        z ^ (z >> 31)
    }
}

impl FamilyPair {
    /// Text form: `n=<int>`, an `A:` section and a `B:` section, one
    /// subset per line as comma-separated elements in ascending order,
    /// `-` for the empty set.
    pub fn write_text<W: Write>(&self, w: &mut W) -> io::Result<()> {
        writeln!(w, "n={}", self.n)?;
        for (label, list) in [("A:", &self.a), ("B:", &self.b)] {
            writeln!(w, "{label}")?;
            for &mask in list.iter() {
                writeln!(w, "{}", format_subset(mask))?;
            }
        }
        Ok(())
    }

    /// Strict parser for [`Self::write_text`]'s format; duplicate subset
    /// lines are an error.
    pub fn read_text<R: BufRead>(r: &mut R) -> Result<Self, FamilyError> {
        let mut lines = Vec::new();
        for (no, line) in r.lines().enumerate() {
            let line = line.map_err(|e| FamilyError::Parse { line: no + 1, msg: e.to_string() })?;
            lines.push(line);
        }
        while lines.last().is_some_and(|l| l.trim().is_empty()) {
            lines.pop();
        }
        let mut it = lines.iter().enumerate();
        let (no, first) = it.next().ok_or(FamilyError::Parse { line: 1, msg: "empty file".into() })?;
        let n: u32 = first
            .strip_prefix("n=")
            .and_then(|v| v.parse().ok())
            .ok_or_else(|| FamilyError::Parse { line: no + 1, msg: format!("expected `n=<int>`, got `{first}`") })?;
        let (no, header) = it.next().ok_or(FamilyError::Parse { line: 2, msg: "missing A: section".into() })?;
        if header != "A:" {
            return Err(FamilyError::Parse { line: no + 1, msg: format!("expected `A:`, got `{header}`") });
        }
        let mut a = Vec::new();
        let mut b = Vec::new();
        let mut current = &mut a;
        let mut seen_b = false;
        for (no, line) in it {
            if line == "B:" {
                if seen_b {
                    return Err(FamilyError::Parse { line: no + 1, msg: "repeated B: section".into() });
                }
                seen_b = true;
                current = &mut b;
                continue;
            }
            let mask = parse_subset(no + 1, line, n)?;
            if current.contains(&mask) {
                return Err(FamilyError::Parse {
                    line: no + 1,
                    msg: format!("duplicate subset `{line}`"),
                });
            }
            current.push(mask);
        }
        if !seen_b {
            return Err(FamilyError::Parse { line: lines.len(), msg: "missing B: section".into() });
        }
        FamilyPair::new(n, a, b).map_err(|e| FamilyError::Parse {
            line: lines.len(),
            msg: e.to_string(),
        })
    }
}

fn format_subset(mask: u32) -> String {
    if mask == 0 {
        return "-".into();
    }
    let mut parts = Vec::new();
    for i in 0..32 {
        if mask & (1 << i) != 0 {
            parts.push((i + 1).to_string());
        }
    }
    parts.join(",")
}

fn parse_subset(line_no: usize, line: &str, n: u32) -> Result<u32, FamilyError> {
    if line == "-" {
        return Ok(0);
    }
    let mut mask = 0u32;
    for part in line.split(',') {
        let e: u32 = part.trim().parse().map_err(|err| FamilyError::Parse {
            line: line_no,
            msg: format!("bad element `{part}`: {err}"),
        })?;
        if e == 0 || e > n {
            return Err(FamilyError::Parse {
                line: line_no,
                msg: format!("element {e} outside [1, {n}]"),
            });
        }
        let bit = 1u32 << (e - 1);
        if mask & bit != 0 {
            return Err(FamilyError::Parse {
                line: line_no,
                msg: format!("element {e} repeated"),
            });
        }
        mask |= bit;
    }
    Ok(mask)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pair(n: u32, a: &[u32], b: &[u32]) -> FamilyPair {
        FamilyPair::new(n, a.to_vec(), b.to_vec()).unwrap()
    }

    fn triple() -> FamilyPair {
        pair(3, &[1, 2, 4], &[1, 2, 4])
    }

    #[test]
    fn construction_rejects_bad_input() {
        assert_eq!(FamilyPair::new(0, vec![0], vec![0]), Err(FamilyError::InvalidGroundSet(0)));
        assert_eq!(FamilyPair::new(25, vec![0], vec![0]), Err(FamilyError::InvalidGroundSet(25)));
        assert_eq!(FamilyPair::new(2, vec![], vec![0]), Err(FamilyError::EmptyFamily));
        assert_eq!(
            FamilyPair::new(2, vec![1, 1], vec![0]),
            Err(FamilyError::DuplicateSubset(1))
        );
        assert!(matches!(
            FamilyPair::new(2, vec![4], vec![0]),
            Err(FamilyError::SubsetOutOfRange { .. })
        ));
    }

    #[test]
    fn cancellative_examples() {
        assert!(triple().is_cancellative());
        // {∅, {1}} against itself collides: ∅ ∪ {1} = {1} ∪ {1}
        assert!(!pair(1, &[0, 1], &[0, 1]).is_cancellative());
        assert!(pair(2, &[1, 2], &[1, 2]).is_cancellative());
    }

    #[test]
    fn recovering_examples() {
        assert!(powerset_split(2, 1).unwrap().is_recovering());
        // {1} \ {2} = {1} \ {4}: the difference does not determine B
        assert!(!triple().is_recovering());
        assert!(pair(3, &[3], &[5]).is_recovering());
    }

    #[test]
    fn recovering_implies_cancellative_on_samples() {
        let mut found = 0;
        for seed in 0..200u64 {
            let fp = random_cancellative_pair(5, 4, seed);
            if fp.is_recovering() {
                found += 1;
                assert!(fp.is_cancellative());
            }
        }
        assert!(found > 0, "sampler produced no recovering pairs");
        let ps = powerset_split(4, 2).unwrap();
        assert!(ps.is_recovering() && ps.is_cancellative());
    }

    #[test]
    fn definition_equivalence_on_random_pairs() {
        let mut rng = SplitMix64::new(0xfeed);
        for _ in 0..1000 {
            let n = 1 + (rng.next() % 5) as u32;
            let size = 1 + (rng.next() as usize) % (1usize << n).min(6);
            let mut draw = |k: usize| -> Vec<u32> {
                let mut v = Vec::new();
                while v.len() < k {
                    let m = (rng.next() % (1u64 << n)) as u32;
                    if !v.contains(&m) {
                        v.push(m);
                    }
                }
                v
            };
            let fp = FamilyPair::new(n, draw(size), draw(size)).unwrap();
            assert_eq!(fp.is_cancellative(), fp.is_cancellative_by_differences());
        }
    }

    #[test]
    fn product_multiplies_and_preserves() {
        let t = triple();
        let p = t.product(&t).unwrap();
        assert_eq!(p.n(), 6);
        assert_eq!(p.size_product(), 81); // 3^(2*6/3)
        assert!(p.is_cancellative());

        let singleton = pair(2, &[1], &[2]);
        let q = t.product(&singleton).unwrap();
        assert_eq!(q.size_product(), t.size_product());
        assert_eq!(q.n(), 5);

        let r1 = powerset_split(2, 1).unwrap();
        let r2 = powerset_split(2, 1).unwrap();
        let pr = r1.product(&r2).unwrap();
        assert!(pr.is_recovering());
        assert_eq!(pr.size_product(), 16); // 2^4

        let too_big = triple_blocks(8).unwrap();
        assert!(matches!(
            too_big.product(&triple()),
            Err(FamilyError::GroundSetOverflow(27))
        ));
    }

    #[test]
    fn random_cancellative_pairs_are_cancellative() {
        for seed in 0..100u64 {
            let fp = random_cancellative_pair(6, 5, seed);
            assert!(fp.is_cancellative());
            let p = fp.product(&fp.swap()).unwrap();
            assert!(p.is_cancellative());
            assert_eq!(p.size_product(), fp.size_product() * fp.size_product());
        }
    }

    #[test]
    fn symmetrize_uniformize_triple() {
        let u = triple().symmetrize_uniformize(1).unwrap();
        assert_eq!(u.n(), 6);
        assert_eq!(u.a().len(), 9);
        assert_eq!(u.b().len(), 9);
        assert!(u.a().iter().all(|m| m.count_ones() == 2));
        assert!(u.is_cancellative());
    }

    #[test]
    fn symmetrize_uniformize_powerset_and_singleton() {
        let u = powerset_split(2, 1).unwrap().symmetrize_uniformize(1).unwrap();
        // size histogram over the squared pair is (1, 2, 1): the mode is 1
        assert!(u.a().iter().all(|m| m.count_ones() == 1));
        assert_eq!(u.a().len(), 2);
        assert!(u.size_product() >= 16 / (4 + 1) as u64);

        let s = pair(2, &[1], &[2]).symmetrize_uniformize(1).unwrap();
        assert_eq!(s.size_product(), 1);

        let m2 = triple().symmetrize_uniformize(2).unwrap();
        assert_eq!(m2.n(), 12);
        assert!(m2.a().iter().all(|m| m.count_ones() == 4));
        assert_eq!(m2.a().len(), 81);
    }

    #[test]
    fn entropy_inequality_known_pairs() {
        let c = entropy_inequality_check::<f64>(&triple()).unwrap();
        assert!((c.lhs - 9f64.log2()).abs() < 1e-12);
        assert!((c.rhs - 3.6731833362179581).abs() < 1e-12);
        assert!(c.holds);

        let c = entropy_inequality_check::<f64>(&pair(2, &[1, 2], &[1, 2])).unwrap();
        assert!((c.lhs - 2.0).abs() < 1e-15);
        assert!((c.rhs - 2.0).abs() < 1e-12);
        assert!(c.holds); // equality case

        let c = entropy_inequality_check::<f64>(&pair(2, &[1], &[2])).unwrap();
        assert_eq!(c.lhs, 0.0);
        assert!(c.holds);

        assert_eq!(
            entropy_inequality_check::<f64>(&pair(1, &[0, 1], &[0, 1])),
            Err(FamilyError::NotCancellative)
        );
    }

    #[test]
    fn exhaustive_small_ground_sets() {
        let r1 = exhaustive_max_c(1).unwrap();
        assert_eq!(r1.value, 2);
        assert!(r1.witness.is_cancellative());

        let r2 = exhaustive_max_c(2).unwrap();
        assert_eq!(r2.value, 4);

        let r3 = exhaustive_max_c(3).unwrap();
        assert_eq!(r3.value, 9);
        assert!(r3.witness.is_cancellative());
        assert_eq!(r3.witness.size_product(), 9);

        assert!(exhaustive_max_c(4).is_err());
        assert!(exhaustive_max_c(0).is_err());
    }

    #[test]
    fn pruned_search_matches_naive_enumeration() {
        for n in 1..=2u32 {
            let masks: Vec<u32> = (0..1u32 << n).collect();
            let mut families: Vec<Vec<u32>> = Vec::new();
            for bits in 1u32..1 << masks.len() {
                families.push(
                    masks
                        .iter()
                        .enumerate()
                        .filter(|(i, _)| bits & (1 << i) != 0)
                        .map(|(_, &m)| m)
                        .collect(),
                );
            }
            let mut naive = 0;
            for a in &families {
                for b in &families {
                    let fp = FamilyPair::new(n, a.clone(), b.clone()).unwrap();
                    if fp.is_cancellative() {
                        naive = naive.max(fp.size_product());
                    }
                }
            }
            assert_eq!(exhaustive_max_c(n).unwrap().value, naive);
        }
    }

    #[test]
    fn exhaustive_uniform_cases() {
        assert_eq!(exhaustive_max_ck(2, 1).unwrap().value, 4);
        assert_eq!(exhaustive_max_ck(3, 1).unwrap().value, 9);
        assert_eq!(exhaustive_max_ck(3, 3).unwrap().value, 1);
        // the elementary bound 2^(2(n-k)) caps every uniform value and is
        // attained whenever n <= 2k
        for &(n, k) in &[(2u32, 1u32), (3, 1), (3, 2), (4, 2)] {
            let r = exhaustive_max_ck(n, k).unwrap();
            assert!(r.value <= 1 << (2 * (n - k)));
            if n <= 2 * k {
                assert_eq!(r.value, 1 << (2 * (n - k)), "no equality at ({n}, {k})");
            }
            assert!(r.witness.is_cancellative());
        }
        assert!(exhaustive_max_ck(13, 1).is_err()); // 13 singletons exceed the cap
        assert!(exhaustive_max_ck(3, 4).is_err());
    }

    #[test]
    fn constructions() {
        let t = triple_blocks(2).unwrap();
        assert_eq!(t.n(), 6);
        assert_eq!(t.size_product(), 81);
        assert!(t.is_cancellative());
        assert!(triple_blocks(0).is_err());
        assert!(triple_blocks(9).is_err());

        for n in [2u32, 4, 6] {
            let p = powerset_split(n, n / 2).unwrap();
            assert!(p.is_recovering());
            assert_eq!(p.size_product(), 1 << n);
        }
        assert!(powerset_split(3, 4).is_err());
    }

    #[test]
    fn text_round_trip_and_errors() {
        let t = triple_blocks(1).unwrap();
        let mut buf = Vec::new();
        t.write_text(&mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf.clone()).unwrap(),
            "n=3\nA:\n1\n2\n3\nB:\n1\n2\n3\n"
        );
        let parsed = FamilyPair::read_text(&mut buf.as_slice()).unwrap();
        assert_eq!(parsed, t);

        let ps = powerset_split(4, 2).unwrap();
        let mut buf = Vec::new();
        ps.write_text(&mut buf).unwrap();
        let parsed = FamilyPair::read_text(&mut buf.as_slice()).unwrap();
        assert_eq!(parsed, ps);

        let dup = "n=2\nA:\n1\n1\nB:\n2\n";
        assert!(matches!(
            FamilyPair::read_text(&mut dup.as_bytes()),
            Err(FamilyError::Parse { line: 4, .. })
        ));
        let bad = "n=2\nA:\n3\nB:\n2\n";
        assert!(FamilyPair::read_text(&mut bad.as_bytes()).is_err());
        let repeated = "n=2\nA:\n1,1\nB:\n2\n";
        assert!(FamilyPair::read_text(&mut repeated.as_bytes()).is_err());
    }
}
