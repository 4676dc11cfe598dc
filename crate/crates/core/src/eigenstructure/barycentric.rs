//! Zeros of the barycentric system on the unit simplex and the closed-form
//! eigenvalues they induce.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use nalgebra::DVector;
use serde::Serialize;

use super::poly::{roots_of_r, RootsOfR, BOUNDARY_TOL};
use super::scalar::ScalarFunctions;
use crate::frames::SimplexFrame;
use crate::{Error, Result};

/// Structure of a barycentric zero. Indices are 0-based frame indices; for
/// canonical solutions they are all `< n`, after symmetry expansion they may
/// reach `n`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SolutionKind {
    /// `s_k = 1/|K|` on `K`, zero elsewhere.
    UniformOnK { support: Vec<usize> },
    /// `s_low` on `low`, `s_high` on `high`, zero elsewhere.
    TwoLevel {
        low: Vec<usize>,
        high: Vec<usize>,
        s_low: f64,
        s_high: f64,
    },
}

impl SolutionKind {
    /// Nonzero barycentric weights `(index, s_k)`.
    pub fn weights(&self) -> Vec<(usize, f64)> {
        match self {
            SolutionKind::UniformOnK { support } => {
                let s = 1.0 / support.len() as f64;
                support.iter().map(|&k| (k, s)).collect()
            }
            SolutionKind::TwoLevel {
                low,
                high,
                s_low,
                s_high,
            } => low
                .iter()
                .map(|&k| (k, *s_low))
                .chain(high.iter().map(|&k| (k, *s_high)))
                .collect(),
        }
    }

    /// Same shape with indices relabelled through `map`.
    pub fn relabel(&self, map: impl Fn(usize) -> usize) -> SolutionKind {
        let apply = |set: &[usize]| {
            let mut out: Vec<usize> = set.iter().map(|&k| map(k)).collect();
            out.sort_unstable();
            out
        };
        match self {
            SolutionKind::UniformOnK { support } => SolutionKind::UniformOnK {
                support: apply(support),
            },
            SolutionKind::TwoLevel {
                low,
                high,
                s_low,
                s_high,
            } => SolutionKind::TwoLevel {
                low: apply(low),
                high: apply(high),
                s_low: *s_low,
                s_high: *s_high,
            },
        }
    }

    /// Unnormalized vector `Σ_k s_k v_k`.
    pub fn assemble(&self, frame: &SimplexFrame) -> DVector<f64> {
        frame.combine(self.weights())
    }
}

/// A zero of the barycentric system for a fixed `(n, d)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BarycentricSolution {
    n: usize,
    d: usize,
    kind: SolutionKind,
}

impl BarycentricSolution {
    pub fn uniform(n: usize, d: usize, support: Vec<usize>) -> Result<Self> {
        if support.is_empty() || support.len() > n || support.iter().any(|&k| k > n) {
            return Err(Error::InvalidInput(format!(
                "uniform support {support:?} must be nonempty with at most n = {n} indices"
            )));
        }
        Ok(Self {
            n,
            d,
            kind: SolutionKind::UniformOnK { support },
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn kind(&self) -> &SolutionKind {
        &self.kind
    }

    /// Full coordinates `(s_1, …, s_n)` on the first `n` frame vectors.
    pub fn coordinates(&self) -> Vec<f64> {
        let mut s = vec![0.0; self.n];
        for (k, w) in self.kind.weights() {
            s[k] = w;
        }
        s
    }

    /// Reduced coordinates `(s_1, …, s_{n-1})`, the point in `Δ_{n-1}`.
    pub fn reduced(&self) -> Vec<f64> {
        let mut s = self.coordinates();
        s.pop();
        s
    }

    /// Unit eigenvector `Σ s_k v_k / ‖Σ s_k v_k‖`.
    pub fn eigenvector(&self, frame: &SimplexFrame) -> DVector<f64> {
        self.kind.assemble(frame).normalize()
    }

    /// Eigenvalue belonging to [`Self::eigenvector`].
    pub fn eigenvalue(&self) -> f64 {
        match &self.kind {
            SolutionKind::UniformOnK { support } => eigenvalue_uniform(self.n, self.d, support.len()),
            SolutionKind::TwoLevel {
                low,
                high,
                s_low,
                s_high,
            } => eigenvalue_two_level(self.n, self.d, low.len(), high.len(), *s_low, *s_high),
        }
    }

    /// Shape key: solutions with equal keys lie in one symmetry orbit.
    pub(crate) fn shape(&self) -> Shape {
        match &self.kind {
            SolutionKind::UniformOnK { support } => Shape::Uniform(support.len()),
            SolutionKind::TwoLevel {
                low, high, s_low, ..
            } => Shape::TwoLevel(low.len(), high.len(), s_low.to_bits()),
        }
    }

    /// Point label in reduced coordinates, with small fractions spelled out,
    /// e.g. `(1/2, 1/4)`.
    pub fn label(&self) -> String {
        let mut out = String::from("(");
        for (i, s) in self.reduced().iter().enumerate() {
            if i > 0 {
                out.push_str(", ");
            }
            out.push_str(&fraction_label(*s));
        }
        out.push(')');
        out
    }

    /// Checks the structural invariants of the solution.
    pub fn validate(&self) -> Result<()> {
        let f = ScalarFunctions::new(self.n, self.d)?;
        match &self.kind {
            SolutionKind::UniformOnK { support } => {
                if support.is_empty() || support.len() > self.n {
                    return Err(Error::InvalidInput(format!("bad uniform support {support:?}")));
                }
            }
            SolutionKind::TwoLevel {
                low,
                high,
                s_low,
                s_high,
            } => {
                let s_star = f.s_star()?;
                let total = low.len() as f64 * s_low + high.len() as f64 * s_high;
                let p_low = f.p(*s_low);
                let p_gap = (p_low - f.p(*s_high)).abs();
                let ok = !low.is_empty()
                    && !high.is_empty()
                    && low.iter().all(|k| !high.contains(k))
                    && low.len() + high.len() <= self.n
                    && (total - 1.0).abs() <= 1e-12
                    && *s_low > 0.0
                    && *s_low <= s_star
                    && s_star < *s_high
                    && *s_high <= 1.0 + 1e-12
                    && p_gap <= TWO_LEVEL_P_TOL * p_low.abs().max(1.0);
                if !ok {
                    return Err(Error::InvalidInput(format!(
                        "two-level solution violates invariants: {:?} (s* = {s_star}, |p gap| = {p_gap:e})",
                        self.kind
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Relative tolerance on `p(s_low) = p(s_high)`.
pub const TWO_LEVEL_P_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub(crate) enum Shape {
    Uniform(usize),
    TwoLevel(usize, usize, u64),
}

fn fraction_label(s: f64) -> String {
    for q in 1..=64u32 {
        let p = (s * q as f64).round();
        if (s - p / q as f64).abs() < 1e-9 {
            return if q == 1 {
                format!("{}", p as i64)
            } else {
                format!("{}/{}", p as i64, q)
            };
        }
    }
    let mut out = String::new();
    let _ = write!(out, "{s:.6}");
    out
}

/// A curve of two-level zeros, present when `r` vanishes identically for the
/// level sizes `(|low|, |high|)`. For `d = 4` this happens exactly when
/// `|low| = |high| = (n+1)/3`; every `s_low` in [`Self::range`] then gives a
/// zero with `s_high = (1 - |low| s_low)/|high|`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TwoLevelFamily {
    n: usize,
    d: usize,
    low: Vec<usize>,
    high: Vec<usize>,
    s_star: f64,
}

impl TwoLevelFamily {
    pub fn low(&self) -> &[usize] {
        &self.low
    }

    pub fn high(&self) -> &[usize] {
        &self.high
    }

    /// Open interval of admissible `s_low`.
    pub fn range(&self) -> (f64, f64) {
        let (k1, k2) = (self.low.len() as f64, self.high.len() as f64);
        let lower = ((1.0 - k2) / k1).max(0.0);
        let upper = self.s_star.min((1.0 - k2 * self.s_star) / k1);
        (lower, upper)
    }

    /// The member with `s_low = t`.
    pub fn member(&self, t: f64) -> Result<BarycentricSolution> {
        let (lo, hi) = self.range();
        if !(t > lo && t < hi) {
            return Err(Error::Domain(format!("s_low = {t} outside ({lo}, {hi})")));
        }
        let s_high = (1.0 - self.low.len() as f64 * t) / self.high.len() as f64;
        Ok(BarycentricSolution {
            n: self.n,
            d: self.d,
            kind: SolutionKind::TwoLevel {
                low: self.low.clone(),
                high: self.high.clone(),
                s_low: t,
                s_high,
            },
        })
    }
}

/// Outcome of solving the barycentric system.
#[derive(Debug, Clone, PartialEq)]
pub enum BarycentricZeros {
    /// The system vanishes on the whole simplex (`d = 2` or `(n, d) = (2, 4)`).
    WholeSimplex,
    /// Isolated zeros, plus any curves of zeros.
    Discrete {
        solutions: Vec<BarycentricSolution>,
        families: Vec<TwoLevelFamily>,
    },
}

impl BarycentricZeros {
    /// Isolated zeros; empty for the whole simplex.
    pub fn solutions(&self) -> &[BarycentricSolution] {
        match self {
            BarycentricZeros::WholeSimplex => &[],
            BarycentricZeros::Discrete { solutions, .. } => solutions,
        }
    }
}

fn check_nd(n: usize, d: usize) -> Result<ScalarFunctions> {
    ScalarFunctions::new(n, d)
}

/// True when every point of the simplex solves the system.
pub fn is_continuum(n: usize, d: usize) -> bool {
    d == 2 || (n == 2 && d == 4)
}

fn mask_indices(mask: u64) -> Vec<usize> {
    (0..64).filter(|&i| mask & (1 << i) != 0).collect()
}

/// Enumerates every zero of the barycentric system in `Δ_{n-1}`.
///
/// Supports are subsets of the first `n` frame indices. Odd `d` yields the
/// uniform solutions only; even `d >= 4` adds the two-level solutions whose
/// low level is a zero of `r` in `(0, s*)` and whose high level falls in
/// `(s*, 1]`.
pub fn enumerate_barycentric(n: usize, d: usize) -> Result<BarycentricZeros> {
    let f = check_nd(n, d)?;
    if n >= 63 {
        return Err(Error::InvalidDimension(n));
    }
    if is_continuum(n, d) {
        return Ok(BarycentricZeros::WholeSimplex);
    }
    let full: u64 = (1u64 << n) - 1;
    let mut solutions: Vec<BarycentricSolution> = (1..=full)
        .map(|mask| BarycentricSolution {
            n,
            d,
            kind: SolutionKind::UniformOnK {
                support: mask_indices(mask),
            },
        })
        .collect();
    solutions.sort_by_key(|s| match &s.kind {
        SolutionKind::UniformOnK { support } => (support.len(), support.clone()),
        SolutionKind::TwoLevel { .. } => unreachable!(),
    });

    if d % 2 == 1 {
        return Ok(BarycentricZeros::Discrete {
            solutions,
            families: Vec::new(),
        });
    }

    let s_star = f.s_star()?;
    let mut levels: BTreeMap<(usize, usize), Vec<(f64, f64)>> = BTreeMap::new();
    let mut degenerate = Vec::new();
    for k1 in 1..n {
        for k2 in 1..=(n - k1) {
            let roots = match roots_of_r(f, k1, k2)? {
                RootsOfR::Roots(r) => r,
                RootsOfR::Degenerate => {
                    degenerate.push((k1, k2));
                    continue;
                }
            };
            let valid: Vec<(f64, f64)> = roots
                .into_iter()
                .map(|s| (s, (1.0 - k1 as f64 * s) / k2 as f64))
                .filter(|&(_, u)| u > s_star + BOUNDARY_TOL && u <= 1.0 + BOUNDARY_TOL)
                .collect();
            if !valid.is_empty() {
                levels.insert((k1, k2), valid);
            }
        }
    }

    for (&(k1, k2), roots) in &levels {
        for (low, high) in disjoint_masks(full, k1, k2) {
            for &(s_low, s_high) in roots {
                solutions.push(BarycentricSolution {
                    n,
                    d,
                    kind: SolutionKind::TwoLevel {
                        low: mask_indices(low),
                        high: mask_indices(high),
                        s_low,
                        s_high,
                    },
                });
            }
        }
    }
    let families = degenerate
        .into_iter()
        .flat_map(|(k1, k2)| disjoint_masks(full, k1, k2))
        .map(|(low, high)| TwoLevelFamily {
            n,
            d,
            low: mask_indices(low),
            high: mask_indices(high),
            s_star,
        })
        .collect();
    Ok(BarycentricZeros::Discrete { solutions, families })
}

/// Pairs of disjoint submasks of `full` with `k1` and `k2` bits, ordered by
/// the first mask and then the second.
fn disjoint_masks(full: u64, k1: usize, k2: usize) -> Vec<(u64, u64)> {
    let mut out = Vec::new();
    for low in 1..=full {
        if low & !full != 0 || low.count_ones() as usize != k1 {
            continue;
        }
        let rest = full & !low;
        let mut high = rest;
        let mut highs = Vec::new();
        while high != 0 {
            if high.count_ones() as usize == k2 {
                highs.push(high);
            }
            high = (high - 1) & rest;
        }
        highs.sort_unstable();
        out.extend(highs.into_iter().map(|h| (low, h)));
    }
    out
}

/// Eigenvalue of the normalized `Σ_{k∈K} v_k` with `|K| = k`:
///
/// ```text
/// μ = ((n+1-k)^{d-1} ∓ k^{d-1}) / (n^{d/2} (k(n+1-k))^{d/2-1})
/// ```
///
/// with `-` for odd `d` and `+` for even `d`.
pub fn eigenvalue_uniform(n: usize, d: usize, k: usize) -> f64 {
    let nf = n as f64;
    let kf = k as f64;
    let rest = nf + 1.0 - kf;
    let head = rest.powi(d as i32 - 1);
    let tail = kf.powi(d as i32 - 1);
    let numerator = if d.is_multiple_of(2) { head + tail } else { head - tail };
    let half = d as f64 / 2.0;
    numerator / (nf.powf(half) * (kf * rest).powf(half - 1.0))
}

/// Eigenvalue of the normalized two-level vector
/// `(s_low Σ_{K1} v_k + s_high Σ_{K2} v_k) / ‖…‖`.
pub fn eigenvalue_two_level(n: usize, d: usize, k1: usize, k2: usize, s_low: f64, s_high: f64) -> f64 {
    let np1 = n as f64 + 1.0;
    let (k1f, k2f) = (k1 as f64, k2 as f64);
    let di = d as i32;
    let numerator = k1f * (np1 * s_low - 1.0).powi(di)
        + k2f * (np1 * s_high - 1.0).powi(di)
        + np1
        - k1f
        - k2f;
    let gram = np1 * s_low * s_low * k1f + np1 * s_high * s_high * k2f - 1.0;
    let half = d as f64 / 2.0;
    numerator / ((n as f64).powf(half) * gram.powf(half))
}

#[cfg(test)]
mod tests {
    use approx::assert_abs_diff_eq;

    use super::*;

    fn discrete(n: usize, d: usize) -> Vec<BarycentricSolution> {
        match enumerate_barycentric(n, d).unwrap() {
            BarycentricZeros::Discrete { solutions, .. } => solutions,
            BarycentricZeros::WholeSimplex => panic!("unexpected continuum"),
        }
    }

    fn sorted_points(sols: &[BarycentricSolution]) -> Vec<Vec<f64>> {
        let mut pts: Vec<Vec<f64>> = sols.iter().map(|s| s.reduced()).collect();
        pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        pts
    }

    #[test]
    fn odd_n3_midpoints() {
        for d in [3, 5, 7] {
            let sols = discrete(3, d);
            assert_eq!(sols.len(), 7);
            let pts = sorted_points(&sols);
            let third = 1.0 / 3.0;
            let expected = [
                vec![0.0, 0.0],
                vec![0.0, 0.5],
                vec![0.0, 1.0],
                vec![third, third],
                vec![0.5, 0.0],
                vec![0.5, 0.5],
                vec![1.0, 0.0],
            ];
            for (p, e) in pts.iter().zip(expected.iter()) {
                assert_abs_diff_eq!(p[0], e[0], epsilon = 1e-15);
                assert_abs_diff_eq!(p[1], e[1], epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn even_n3_d4_includes_two_level_points() {
        let sols = discrete(3, 4);
        assert_eq!(sols.len(), 10);
        let two_level: Vec<_> = sols
            .iter()
            .filter(|s| matches!(s.kind(), SolutionKind::TwoLevel { .. }))
            .collect();
        assert_eq!(two_level.len(), 3);
        let mut labels: Vec<String> = two_level.iter().map(|s| s.label()).collect();
        labels.sort();
        assert_eq!(labels, vec!["(1/2, 1/4)", "(1/4, 1/2)", "(1/4, 1/4)"]);
        for s in &sols {
            s.validate().unwrap();
        }
    }

    #[test]
    fn n2_d6_scalar_zeros() {
        let pts = sorted_points(&discrete(2, 6));
        let expected = [0.0, 1.0 / 3.0, 0.5, 2.0 / 3.0, 1.0];
        assert_eq!(pts.len(), 5);
        for (p, e) in pts.iter().zip(expected) {
            assert_abs_diff_eq!(p[0], e, epsilon = 1e-13);
        }
    }

    #[test]
    fn continuum_cases() {
        for n in 2..6 {
            assert_eq!(enumerate_barycentric(n, 2).unwrap(), BarycentricZeros::WholeSimplex);
        }
        assert_eq!(enumerate_barycentric(2, 4).unwrap(), BarycentricZeros::WholeSimplex);
        assert!(matches!(enumerate_barycentric(3, 4).unwrap(), BarycentricZeros::Discrete { .. }));
    }

    #[test]
    fn invalid_arguments() {
        assert!(enumerate_barycentric(1, 3).is_err());
        assert!(enumerate_barycentric(3, 1).is_err());
    }

    #[test]
    fn uniform_eigenvalues() {
        for d in [3, 5, 7, 9] {
            let expected = 1.0 - 2f64.powi(1 - d as i32);
            assert_abs_diff_eq!(eigenvalue_uniform(2, d, 1), expected, epsilon = 1e-15);
            assert_abs_diff_eq!(eigenvalue_uniform(2, d, 2), -expected, epsilon = 1e-15);
            assert_abs_diff_eq!(eigenvalue_uniform(3, d, 2), 0.0, epsilon = 1e-15);
        }
        assert_abs_diff_eq!(eigenvalue_uniform(3, 4, 1), 28.0 / 27.0, epsilon = 1e-15);
        assert_abs_diff_eq!(eigenvalue_uniform(3, 4, 2), 4.0 / 9.0, epsilon = 1e-15);
        assert_abs_diff_eq!(eigenvalue_uniform(3, 4, 3), 28.0 / 27.0, epsilon = 1e-15);
    }

    #[test]
    fn two_level_eigenvalues() {
        assert_abs_diff_eq!(
            eigenvalue_two_level(3, 4, 2, 1, 0.25, 0.5),
            8.0 / 9.0,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            eigenvalue_two_level(2, 6, 1, 1, 1.0 / 3.0, 2.0 / 3.0),
            27.0 / 32.0,
            epsilon = 1e-15
        );
    }

    #[test]
    fn labels() {
        let s = BarycentricSolution::uniform(3, 3, vec![0, 1, 2]).unwrap();
        assert_eq!(s.label(), "(1/3, 1/3)");
        let s = BarycentricSolution::uniform(3, 3, vec![2]).unwrap();
        assert_eq!(s.label(), "(0, 0)");
        assert!(BarycentricSolution::uniform(3, 3, vec![]).is_err());
    }

    #[test]
    fn two_level_invariants_hold_broadly() {
        for n in 2..=6 {
            for d in (4..=12).step_by(2) {
                if is_continuum(n, d) {
                    continue;
                }
                for s in discrete(n, d) {
                    s.validate().unwrap_or_else(|e| panic!("n={n} d={d}: {e}"));
                }
            }
        }
    }

    #[test]
    fn quartic_families_appear_when_three_divides_n_plus_one() {
        for n in 2..=9 {
            let zeros = enumerate_barycentric(n, 4).unwrap();
            let families = match &zeros {
                BarycentricZeros::Discrete { families, .. } => families.clone(),
                BarycentricZeros::WholeSimplex => {
                    assert_eq!(n, 2);
                    continue;
                }
            };
            assert_eq!(!families.is_empty(), (n + 1) % 3 == 0, "n={n}");
            for fam in &families {
                assert_eq!(fam.low().len(), (n + 1) / 3);
                assert_eq!(fam.high().len(), (n + 1) / 3);
            }
        }
        for d in [6, 8, 10] {
            for n in 2..=8 {
                if let BarycentricZeros::Discrete { families, .. } = enumerate_barycentric(n, d).unwrap() {
                    assert!(families.is_empty());
                }
            }
        }
    }

    #[test]
    fn family_members_are_zeros() {
        let BarycentricZeros::Discrete { families, .. } = enumerate_barycentric(5, 4).unwrap() else {
            unreachable!()
        };
        // {K1, K2} pairs of 2-subsets of {0..4}: 5!/(2! 2! 1!) = 30
        assert_eq!(families.len(), 30);
        let f = ScalarFunctions::new(5, 4).unwrap();
        let (lo, hi) = families[0].range();
        assert_abs_diff_eq!(lo, 0.0);
        assert_abs_diff_eq!(hi, 0.25, epsilon = 1e-13);
        for fam in &families {
            for t in [0.01, 0.1, 0.2, 0.249] {
                let s = fam.member(t).unwrap();
                s.validate().unwrap();
                let h = f.h(&s.reduced());
                assert!(h.iter().all(|v| v.abs() < 1e-12), "{h:?}");
            }
            assert!(fam.member(0.3).is_err());
        }
    }
}
