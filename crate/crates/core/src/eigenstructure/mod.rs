//! Complete enumeration of the normalized eigenpairs of `T = Σ_k v_k^{⊗d}`.
//!
//! Every eigenvector is, up to scaling, a convex combination `Σ_{k≤n} s_k v_k`
//! whose barycentric coordinates solve `h(s) = 0`. [`enumerate_barycentric`]
//! lists those zeros in canonical form and [`expand_symmetry`] pushes them
//! through all relabellings of the frame to obtain every eigenvector line.

pub mod barycentric;
pub mod poly;
pub mod scalar;

use std::collections::HashSet;

use itertools::Itertools;
use nalgebra::DVector;
use rayon::prelude::*;

pub use barycentric::{
    eigenvalue_two_level, eigenvalue_uniform, enumerate_barycentric, is_continuum,
    BarycentricSolution, BarycentricZeros, SolutionKind, TwoLevelFamily,
};
pub use poly::{roots_of_r, RootsOfR, TwoLevelPolynomial};
pub use scalar::ScalarFunctions;

use crate::tensor_ops::SimplexTensor;
use crate::{Error, Result};

/// Largest admissible `‖T v^{d-1} - μ v‖` for an emitted eigenpair.
pub const RESIDUAL_TOL: f64 = 1e-10;
/// Coordinates smaller than this are treated as zero when fixing the sign.
const SIGN_TOL: f64 = 1e-10;
/// Grid used to merge numerically identical vectors.
const MERGE_SCALE: f64 = (1u64 << 20) as f64;

/// Where an eigenpair came from.
#[derive(Debug, Clone, PartialEq)]
pub struct PairSource {
    /// Index of the generating canonical solution.
    pub canonical: usize,
    /// The relabelled solution whose assembled vector is `±vector`.
    pub kind: SolutionKind,
    /// True when `vector` is the negated assembly.
    pub flipped: bool,
}

/// A unit eigenvector with its eigenvalue.
///
/// For even `d` the record stands for both `±vector` with the same
/// eigenvalue; for odd `d` it stands for `(vector, μ)` and `(-vector, -μ)`.
/// The stored vector has its first nonzero coordinate positive.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenPair {
    pub vector: DVector<f64>,
    pub eigenvalue: f64,
    pub source: PairSource,
    pub residual: f64,
}

/// All normalized eigenpairs of a regular simplex tensor.
#[derive(Debug, Clone, PartialEq)]
pub enum EigenStructure {
    /// Every unit vector is an eigenvector with this eigenvalue.
    WholeSphere { eigenvalue: f64 },
    /// Isolated eigenvector lines. `families` lists curves of barycentric
    /// zeros whose eigenvectors are not isolated and therefore not in `pairs`.
    Discrete {
        canonical: Vec<BarycentricSolution>,
        pairs: Vec<EigenPair>,
        families: Vec<TwoLevelFamily>,
    },
}

impl EigenStructure {
    pub fn pairs(&self) -> &[EigenPair] {
        match self {
            EigenStructure::WholeSphere { .. } => &[],
            EigenStructure::Discrete { pairs, .. } => pairs,
        }
    }

    pub fn canonical(&self) -> &[BarycentricSolution] {
        match self {
            EigenStructure::WholeSphere { .. } => &[],
            EigenStructure::Discrete { canonical, .. } => canonical,
        }
    }

    pub fn families(&self) -> &[TwoLevelFamily] {
        match self {
            EigenStructure::WholeSphere { .. } => &[],
            EigenStructure::Discrete { families, .. } => families,
        }
    }

    pub fn is_whole_sphere(&self) -> bool {
        matches!(self, EigenStructure::WholeSphere { .. })
    }

    /// Number of isolated normalized eigenpairs `(x, μ)`, counting `x` and
    /// `-x` separately. `None` for the continuum.
    pub fn normalized_pair_count(&self) -> Option<usize> {
        match self {
            EigenStructure::WholeSphere { .. } => None,
            EigenStructure::Discrete { pairs, .. } => Some(2 * pairs.len()),
        }
    }

    /// Index of the eigenvector line closest to `x`, with the distance
    /// `min(‖x - v‖, ‖x + v‖)` and whether `-v` was the nearer point.
    pub fn nearest_line(&self, x: &DVector<f64>) -> Option<(usize, f64, bool)> {
        self.pairs()
            .iter()
            .enumerate()
            .map(|(i, p)| {
                let plus = (x - &p.vector).norm();
                let minus = (x + &p.vector).norm();
                if minus < plus {
                    (i, minus, true)
                } else {
                    (i, plus, false)
                }
            })
            .min_by(|a, b| a.1.total_cmp(&b.1))
    }
}

/// Eigenvalue shared by the whole sphere in the continuum cases.
pub fn continuum_eigenvalue(n: usize, d: usize) -> Result<f64> {
    ScalarFunctions::new(n, d)?;
    if d == 2 {
        Ok(1.0 + 1.0 / n as f64)
    } else if n == 2 && d == 4 {
        Ok(9.0 / 8.0)
    } else {
        Err(Error::Domain(format!(
            "(n, d) = ({n}, {d}) has finitely many eigenvector lines"
        )))
    }
}

/// Enumerates all normalized eigenpairs of the regular simplex tensor.
pub fn enumerate_eigenpairs(n: usize, d: usize) -> Result<EigenStructure> {
    let tensor = SimplexTensor::regular(n, d)?;
    match enumerate_barycentric(n, d)? {
        BarycentricZeros::WholeSimplex => Ok(EigenStructure::WholeSphere {
            eigenvalue: continuum_eigenvalue(n, d)?,
        }),
        BarycentricZeros::Discrete { solutions, families } => {
            let pairs = expand_symmetry(&tensor, &solutions)?;
            Ok(EigenStructure::Discrete {
                canonical: solutions,
                pairs,
                families,
            })
        }
    }
}

fn relabellings(n: usize, kind: &SolutionKind) -> Vec<SolutionKind> {
    let all = 0..=n;
    match kind {
        SolutionKind::UniformOnK { support } => all
            .combinations(support.len())
            .map(|support| SolutionKind::UniformOnK { support })
            .collect(),
        SolutionKind::TwoLevel {
            low,
            high,
            s_low,
            s_high,
        } => {
            let mut out = Vec::new();
            for low in all.clone().combinations(low.len()) {
                let rest = (0..=n).filter(|k| !low.contains(k));
                for high in rest.combinations(high.len()) {
                    out.push(SolutionKind::TwoLevel {
                        low: low.clone(),
                        high,
                        s_low: *s_low,
                        s_high: *s_high,
                    });
                }
            }
            out
        }
    }
}

/// Flips `x` so that its first clearly nonzero coordinate is positive.
/// Returns true when a flip happened.
fn canonical_sign(x: &mut DVector<f64>) -> bool {
    match x.iter().find(|v| v.abs() > SIGN_TOL) {
        Some(&v) if v < 0.0 => {
            x.neg_mut();
            true
        }
        _ => false,
    }
}

fn merge_key(x: &DVector<f64>) -> Vec<i64> {
    x.iter().map(|v| (v * MERGE_SCALE).round() as i64).collect()
}

fn orbit(tensor: &SimplexTensor, index: usize, solution: &BarycentricSolution) -> Vec<(Vec<i64>, EigenPair)> {
    let odd = tensor.order() % 2 == 1;
    let mu = solution.eigenvalue();
    let mut seen: HashSet<Vec<i64>> = HashSet::new();
    let mut out = Vec::new();
    for kind in relabellings(tensor.dim(), solution.kind()) {
        let mut vector = kind.assemble(tensor.frame()).normalize();
        let flipped = canonical_sign(&mut vector);
        let key = merge_key(&vector);
        if !seen.insert(key.clone()) {
            continue;
        }
        let eigenvalue = if odd && flipped { -mu } else { mu };
        out.push((
            key,
            EigenPair {
                vector,
                eigenvalue,
                source: PairSource {
                    canonical: index,
                    kind,
                    flipped,
                },
                residual: f64::NAN,
            },
        ));
    }
    out
}

/// Expands canonical barycentric zeros into every eigenvector line under the
/// relabellings of `{v_1, …, v_{n+1}}`, merges collinear duplicates, checks
/// each residual and sorts by descending eigenvalue, then by vector.
pub fn expand_symmetry(tensor: &SimplexTensor, canonical: &[BarycentricSolution]) -> Result<Vec<EigenPair>> {
    let mut representatives: Vec<usize> = Vec::new();
    for (i, s) in canonical.iter().enumerate() {
        if !representatives.iter().any(|&j| canonical[j].shape() == s.shape()) {
            representatives.push(i);
        }
    }
    let orbits: Vec<Vec<(Vec<i64>, EigenPair)>> = representatives
        .par_iter()
        .map(|&i| orbit(tensor, i, &canonical[i]))
        .collect();

    let mut seen: HashSet<Vec<i64>> = HashSet::new();
    let mut pairs: Vec<EigenPair> = Vec::new();
    for (key, pair) in orbits.into_iter().flatten() {
        if seen.insert(key) {
            pairs.push(pair);
        }
    }

    pairs.par_iter_mut().for_each(|p| {
        let image = tensor.contract_pow(&p.vector);
        p.residual = (image - &p.vector * p.eigenvalue).norm();
    });
    if let Some(worst) = pairs.iter().max_by(|a, b| a.residual.total_cmp(&b.residual)) {
        if !(worst.residual <= RESIDUAL_TOL) {
            return Err(Error::Residual {
                residual: worst.residual,
                limit: RESIDUAL_TOL,
            });
        }
    }

    pairs.sort_by(|a, b| {
        b.eigenvalue.total_cmp(&a.eigenvalue).then_with(|| {
            a.vector
                .iter()
                .zip(b.vector.iter())
                .map(|(x, y)| x.total_cmp(y))
                .find(|o| o.is_ne())
                .unwrap_or(std::cmp::Ordering::Equal)
        })
    });
    Ok(pairs)
}
