//! Brute-force solver for the barycentric system `h(s) = 0`, independent of
//! the structural enumeration: grid scan over `Δ_{n-1}`, damped Newton
//! refinement and deduplication.
//!
//! Some zeros are degenerate (for `n = 4, d = 6` the point `(1/5, 2/5, 2/5, 0)`
//! is a triple root along a two-level path), where `‖h‖` stays at double
//! rounding level over a neighbourhood of radius `~1e-5`. Newton therefore
//! evaluates `h` in double-double arithmetic and keeps polishing after the
//! acceptance tolerance is met until `‖h‖` stops decreasing.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use twofloat::TwoFloat;

use crate::eigenstructure::{BarycentricZeros, ScalarFunctions};
use crate::tensor_ops::SimplexTensor;
use crate::{Error, Result};

pub const DEFAULT_GRID: usize = 400;
/// Refined zeros must satisfy `‖h‖ <= NEWTON_TOL`.
pub const NEWTON_TOL: f64 = 1e-12;
/// Zeros closer than this are merged.
pub const DEDUP_TOL: f64 = 1e-8;
/// One-to-one matching radius against the enumeration.
pub const MATCH_TOL: f64 = 1e-6;
const SIMPLEX_TOL: f64 = 1e-12;
const CONTINUUM_TOL: f64 = 1e-13;
const CONTINUUM_SAMPLES: usize = 50;
const MAX_NEWTON_STEPS: usize = 300;
const MAX_HALVINGS: usize = 60;
const FD_STEP: f64 = 1e-7;
const MIN_FD_STEP: f64 = 1e-12;

/// Zeros of `h` found by brute force, in reduced coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleZeroSet {
    pub n: usize,
    pub d: usize,
    /// `h` vanished at every random interior sample.
    pub continuum: bool,
    pub zeros: Vec<Vec<f64>>,
    /// `‖h‖` at each zero.
    pub residuals: Vec<f64>,
    /// Grid local minima handed to Newton.
    pub candidates: usize,
    /// Candidates dropped because Newton did not reach the tolerance or left
    /// the simplex.
    pub warnings: usize,
}

impl OracleZeroSet {
    /// `‖T z^{d-1} - μ z‖` for `z = Σ s_k v_k` and `μ = n^{1-d} Σ g(s_k)`.
    pub fn eigen_residuals(&self) -> Result<Vec<f64>> {
        let tensor = SimplexTensor::regular(self.n, self.d)?;
        let f = ScalarFunctions::new(self.n, self.d)?;
        Ok(self
            .zeros
            .iter()
            .map(|s| {
                let full = full_coordinates(s);
                let z = tensor.frame().combine(full.iter().copied().enumerate());
                let mu = f.barycentric_eigenvalue(&full);
                (tensor.contract_pow(&z) - z * mu).norm()
            })
            .collect())
    }
}

fn full_coordinates(reduced: &[f64]) -> Vec<f64> {
    let mut full = reduced.to_vec();
    full.push(1.0 - reduced.iter().sum::<f64>());
    full
}

/// `g(s) = ((n+1)s - 1)^{d-1} - (-1)^{d-1}` in double-double arithmetic.
fn g_precise(n: usize, d: usize, s: TwoFloat) -> TwoFloat {
    let x = s * (n + 1) as f64 - 1.0;
    let mut power = TwoFloat::from(1.0);
    for _ in 0..d - 1 {
        power *= x;
    }
    let sign = if (d - 1).is_multiple_of(2) { 1.0 } else { -1.0 };
    power - sign
}

/// `h(s)` for reduced coordinates, evaluated in double-double arithmetic.
fn h_precise(f: &ScalarFunctions, reduced: &[TwoFloat]) -> Vec<TwoFloat> {
    let (n, d) = (f.n(), f.d());
    let last = reduced.iter().fold(TwoFloat::from(1.0), |acc, &s| acc - s);
    let total = reduced
        .iter()
        .fold(g_precise(n, d, last), |acc, &s| acc + g_precise(n, d, s));
    reduced.iter().map(|&s| total * s - g_precise(n, d, s)).collect()
}

fn norm_of(h: &[TwoFloat]) -> f64 {
    h.iter()
        .map(|v| {
            let v = f64::from(*v);
            v * v
        })
        .sum::<f64>()
        .sqrt()
}

fn lift(s: &[f64]) -> Vec<TwoFloat> {
    s.iter().map(|&v| TwoFloat::from(v)).collect()
}

fn h_norm(f: &ScalarFunctions, reduced: &[f64]) -> f64 {
    norm_of(&h_precise(f, &lift(reduced)))
}

/// Visits every lattice point `(i_1, …, i_n)` with `Σ i_k = grid`, where the
/// first coordinate is fixed to `first`.
fn for_each_point(n: usize, grid: usize, first: usize, mut visit: impl FnMut(&[usize])) {
    let mut idx = vec![0usize; n];
    idx[0] = first;
    fn rec(idx: &mut Vec<usize>, pos: usize, remaining: usize, visit: &mut dyn FnMut(&[usize])) {
        let n = idx.len();
        if pos == n - 1 {
            idx[pos] = remaining;
            visit(idx);
            return;
        }
        for i in 0..=remaining {
            idx[pos] = i;
            rec(idx, pos + 1, remaining - i, visit);
        }
    }
    if n == 1 {
        visit(&idx);
        return;
    }
    rec(&mut idx, 1, grid - first, &mut visit);
}

/// `‖h‖` at a lattice point, using a table of `g(i/grid)`.
fn lattice_h_norm(table: &[f64], grid: usize, idx: &[usize]) -> f64 {
    let total: f64 = idx.iter().map(|&i| table[i]).sum();
    idx[..idx.len() - 1]
        .iter()
        .map(|&i| {
            let v = (i as f64 / grid as f64) * total - table[i];
            v * v
        })
        .sum::<f64>()
        .sqrt()
}

fn is_local_minimum(table: &[f64], grid: usize, idx: &[usize], value: f64) -> bool {
    let n = idx.len();
    let mut neighbour = idx.to_vec();
    for a in 0..n {
        if idx[a] == grid {
            continue;
        }
        for b in 0..n {
            if a == b || idx[b] == 0 {
                continue;
            }
            neighbour[a] += 1;
            neighbour[b] -= 1;
            let other = lattice_h_norm(table, grid, &neighbour);
            neighbour[a] -= 1;
            neighbour[b] += 1;
            if other < value {
                return false;
            }
        }
    }
    true
}

fn fd_jacobian(f: &ScalarFunctions, s: &[TwoFloat], step: f64) -> DMatrix<f64> {
    let m = s.len();
    let mut jac = DMatrix::zeros(m, m);
    let mut plus = s.to_vec();
    let mut minus = s.to_vec();
    for j in 0..m {
        plus[j] = s[j] + step;
        minus[j] = s[j] - step;
        let hp = h_precise(f, &plus);
        let hm = h_precise(f, &minus);
        for i in 0..m {
            jac[(i, j)] = f64::from((hp[i] - hm[i]) / (2.0 * step));
        }
        plus[j] = s[j];
        minus[j] = s[j];
    }
    jac
}

/// Damped Newton on `h` with the iterate held in double-double; `None` when
/// the tolerance is not reached. The difference step shrinks with the Newton
/// step so the Jacobian stays accurate near degenerate zeros.
fn newton(f: &ScalarFunctions, start: &[f64]) -> Option<(Vec<f64>, f64)> {
    let mut s = lift(start);
    let mut h = h_precise(f, &s);
    let mut norm = norm_of(&h);
    let mut fd_step = FD_STEP;
    for _ in 0..MAX_NEWTON_STEPS {
        if norm == 0.0 {
            break;
        }
        let rhs = DVector::from_iterator(s.len(), h.iter().map(|&v| -f64::from(v)));
        let Some(step) = fd_jacobian(f, &s, fd_step).lu().solve(&rhs) else {
            break;
        };
        let mut lambda = 1.0;
        let mut accepted = false;
        for _ in 0..=MAX_HALVINGS {
            let trial: Vec<TwoFloat> = s.iter().zip(step.iter()).map(|(&a, &b)| a + lambda * b).collect();
            let trial_h = h_precise(f, &trial);
            let trial_norm = norm_of(&trial_h);
            if trial_norm < norm {
                s = trial;
                h = trial_h;
                norm = trial_norm;
                accepted = true;
                break;
            }
            lambda *= 0.5;
        }
        if !accepted {
            break;
        }
        fd_step = (0.1 * lambda * step.norm()).clamp(MIN_FD_STEP, FD_STEP);
    }
    let s: Vec<f64> = s.into_iter().map(f64::from).collect();
    (norm <= NEWTON_TOL).then(|| {
        let rounded = h_norm(f, &s);
        (s, rounded.max(norm))
    })
}

fn in_simplex(s: &[f64]) -> bool {
    s.iter().all(|&v| v >= -SIMPLEX_TOL) && s.iter().sum::<f64>() <= 1.0 + SIMPLEX_TOL
}

fn random_interior_point(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let e: Vec<f64> = (0..n).map(|_| -(1.0 - rng.gen::<f64>()).ln()).collect();
    let total: f64 = e.iter().sum();
    e[..n - 1].iter().map(|v| v / total).collect()
}

/// Finds all zeros of `h` in `Δ_{n-1}` for `n ∈ {2, 3, 4}`.
///
/// `h` is scanned on the lattice `{i/grid}` of the simplex; every discrete
/// local minimum of `‖h‖` is refined by damped Newton with a
/// finite-difference Jacobian, and refined points within [`DEDUP_TOL`] are
/// merged. `seed` drives the random interior samples of the continuum test.
pub fn brute_force_zeros(n: usize, d: usize, grid: usize, seed: u64) -> Result<OracleZeroSet> {
    let f = ScalarFunctions::new(n, d)?;
    if !(2..=4).contains(&n) {
        return Err(Error::InvalidInput(format!("the oracle supports n in 2..=4, got {n}")));
    }
    if grid < 100 {
        return Err(Error::InvalidInput(format!("grid must be at least 100, got {grid}")));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let continuum = (0..CONTINUUM_SAMPLES).all(|_| h_norm(&f, &random_interior_point(&mut rng, n)) < CONTINUUM_TOL);
    if continuum {
        return Ok(OracleZeroSet {
            n,
            d,
            continuum,
            zeros: Vec::new(),
            residuals: Vec::new(),
            candidates: 0,
            warnings: 0,
        });
    }

    let table: Vec<f64> = (0..=grid).map(|i| f.g(i as f64 / grid as f64)).collect();
    let starts: Vec<Vec<f64>> = (0..=grid)
        .into_par_iter()
        .flat_map_iter(|first| {
            let mut found = Vec::new();
            for_each_point(n, grid, first, |idx| {
                let value = lattice_h_norm(&table, grid, idx);
                if is_local_minimum(&table, grid, idx, value) {
                    found.push(idx[..n - 1].iter().map(|&i| i as f64 / grid as f64).collect());
                }
            });
            found
        })
        .collect();

    let refined: Vec<Option<(Vec<f64>, f64)>> = starts.par_iter().map(|s| newton(&f, s)).collect();
    let mut zeros: Vec<Vec<f64>> = Vec::new();
    let mut residuals = Vec::new();
    let mut warnings = 0;
    for r in refined {
        match r {
            Some((s, norm)) if in_simplex(&s) => {
                let duplicate = zeros.iter().any(|z| distance(z, &s) <= DEDUP_TOL);
                if !duplicate {
                    zeros.push(s);
                    residuals.push(norm);
                }
            }
            _ => warnings += 1,
        }
    }
    let mut order: Vec<usize> = (0..zeros.len()).collect();
    order.sort_by(|&a, &b| {
        zeros[a]
            .iter()
            .zip(&zeros[b])
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    Ok(OracleZeroSet {
        n,
        d,
        continuum,
        zeros: order.iter().map(|&i| zeros[i].clone()).collect(),
        residuals: order.iter().map(|&i| residuals[i]).collect(),
        candidates: starts.len(),
        warnings,
    })
}

fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Result of matching oracle zeros against enumerated zeros.
#[derive(Debug, Clone, PartialEq)]
pub struct MatchReport {
    /// `(oracle index, enumeration index, distance)`.
    pub matched: Vec<(usize, usize, f64)>,
    pub unmatched_oracle: Vec<usize>,
    pub unmatched_enumeration: Vec<usize>,
    /// Both sides flag the continuum, or neither does.
    pub continuum_agrees: bool,
}

impl MatchReport {
    pub fn is_clean(&self) -> bool {
        self.continuum_agrees && self.unmatched_oracle.is_empty() && self.unmatched_enumeration.is_empty()
    }
}

/// One-to-one greedy matching by increasing distance, up to [`MATCH_TOL`].
pub fn compare_with_enumeration(oracle: &OracleZeroSet, enumeration: &BarycentricZeros) -> MatchReport {
    let whole = matches!(enumeration, BarycentricZeros::WholeSimplex);
    let points: Vec<Vec<f64>> = enumeration.solutions().iter().map(|s| s.reduced()).collect();
    let mut candidates: Vec<(usize, usize, f64)> = Vec::new();
    for (i, z) in oracle.zeros.iter().enumerate() {
        for (j, p) in points.iter().enumerate() {
            let dist = distance(z, p);
            if dist <= MATCH_TOL {
                candidates.push((i, j, dist));
            }
        }
    }
    candidates.sort_by(|a, b| a.2.total_cmp(&b.2).then(a.0.cmp(&b.0)).then(a.1.cmp(&b.1)));
    let mut used_oracle = vec![false; oracle.zeros.len()];
    let mut used_enum = vec![false; points.len()];
    let mut matched = Vec::new();
    for (i, j, dist) in candidates {
        if !used_oracle[i] && !used_enum[j] {
            used_oracle[i] = true;
            used_enum[j] = true;
            matched.push((i, j, dist));
        }
    }
    matched.sort_by_key(|m| m.0);
    MatchReport {
        matched,
        unmatched_oracle: (0..used_oracle.len()).filter(|&i| !used_oracle[i]).collect(),
        unmatched_enumeration: (0..used_enum.len()).filter(|&j| !used_enum[j]).collect(),
        continuum_agrees: whole == oracle.continuum,
    }
}

#[cfg(test)]
mod tests {
    use approx::assert_abs_diff_eq;

    use super::*;
    use crate::eigenstructure::enumerate_barycentric;

    #[test]
    fn n2_d5_zeros() {
        let z = brute_force_zeros(2, 5, 1000, 0).unwrap();
        assert!(!z.continuum);
        assert_eq!(z.zeros.len(), 3);
        for (found, expected) in z.zeros.iter().zip([0.0, 0.5, 1.0]) {
            assert_abs_diff_eq!(found[0], expected, epsilon = 1e-10);
        }
        assert!(z.residuals.iter().all(|r| *r <= NEWTON_TOL));
    }

    #[test]
    fn n3_d4_has_ten_zeros() {
        let z = brute_force_zeros(3, 4, 400, 0).unwrap();
        assert_eq!(z.zeros.len(), 10);
        for target in [[0.25, 0.25], [0.25, 0.5], [0.5, 0.25]] {
            assert!(z.zeros.iter().any(|s| distance(s, &target) < 1e-10));
        }
        assert!(z.eigen_residuals().unwrap().iter().all(|r| *r <= 1e-9));
    }

    #[test]
    fn continuum_detection() {
        assert!(brute_force_zeros(2, 4, 100, 0).unwrap().continuum);
        assert!(brute_force_zeros(3, 2, 100, 1).unwrap().continuum);
        assert!(!brute_force_zeros(3, 4, 100, 0).unwrap().continuum);
    }

    #[test]
    fn matches_enumeration() {
        for (n, d, count) in [(3, 5, 7), (2, 6, 5)] {
            let z = brute_force_zeros(n, d, 400, 0).unwrap();
            let report = compare_with_enumeration(&z, &enumerate_barycentric(n, d).unwrap());
            assert!(report.is_clean(), "{report:?}");
            assert_eq!(report.matched.len(), count);
        }
        let z = brute_force_zeros(2, 4, 400, 0).unwrap();
        assert!(compare_with_enumeration(&z, &enumerate_barycentric(2, 4).unwrap()).is_clean());
    }

    #[test]
    fn mismatch_is_reported() {
        let z = brute_force_zeros(3, 5, 200, 0).unwrap();
        let report = compare_with_enumeration(&z, &enumerate_barycentric(3, 4).unwrap());
        assert!(!report.is_clean());
        assert_eq!(report.unmatched_enumeration.len(), 3);
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(brute_force_zeros(5, 3, 400, 0).is_err());
        assert!(brute_force_zeros(3, 3, 50, 0).is_err());
        assert!(brute_force_zeros(1, 3, 400, 0).is_err());
    }
}
