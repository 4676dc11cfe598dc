//! Tensor power iteration `x ↦ φ(x) = T x^{d-1} / ‖T x^{d-1}‖`, the Jacobian
//! of `φ`, and the robustness classification of eigenvectors by the spectral
//! radius of that Jacobian.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;

use crate::eigenstructure::{
    continuum_eigenvalue, enumerate_barycentric, enumerate_eigenpairs, BarycentricSolution, BarycentricZeros,
    EigenPair, EigenStructure, SolutionKind,
};
use crate::linalg::spectral_radius_sym;
use crate::tensor_ops::SimplexTensor;
use crate::{Error, Result};

/// `φ` is undefined once `‖T x^{d-1}‖` drops to this level.
pub const MAP_TOL: f64 = 1e-14;
pub const DEFAULT_TOL: f64 = 1e-12;
pub const DEFAULT_MAX_ITER: usize = 10_000;
/// Half-width of the band around `ρ = 1` reported as marginal.
pub const ROBUST_MARGIN: f64 = 1e-9;
/// Eigenvalues at or below this magnitude leave `φ` undefined.
pub const ZERO_EIGENVALUE_TOL: f64 = 1e-12;

/// One step of the power map.
pub fn phi(tensor: &SimplexTensor, x: &DVector<f64>) -> Result<DVector<f64>> {
    let y = tensor.contract_pow(x);
    let norm = y.norm();
    if norm <= MAP_TOL {
        return Err(Error::MapUndefined { norm });
    }
    Ok(y / norm)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TpiOptions {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for TpiOptions {
    fn default() -> Self {
        Self {
            tol: DEFAULT_TOL,
            max_iter: DEFAULT_MAX_ITER,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TpiStatus {
    Converged,
    MaxIterations,
    MapUndefined,
}

/// The enumerated eigenvector line a limit landed on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineMatch {
    /// Index into [`EigenStructure::pairs`].
    pub pair: usize,
    /// True when the limit is `-vector` rather than `vector`.
    pub negated: bool,
    pub distance: f64,
}

impl LineMatch {
    /// Distinguishes the two unit vectors on a line: `2 · pair + negated`.
    pub fn limit_index(&self) -> usize {
        2 * self.pair + usize::from(self.negated)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TpiResult {
    pub limit: Option<DVector<f64>>,
    pub status: TpiStatus,
    pub iterations: usize,
    pub matched: Option<LineMatch>,
}

/// Runs tensor power iteration from the unit vector `x0`.
///
/// For odd `d`, `φ(-x) = φ(x)`, so plain iteration forgets which half of a
/// line it started on. Each new iterate is therefore oriented to make a
/// nonnegative inner product with its predecessor; for even `d` this never
/// changes anything away from negative eigenvalues. Convergence is declared
/// when `min(‖x_{j+1} - x_j‖, ‖x_{j+1} + x_j‖) < tol`. When `structure` is
/// given, the limit is matched to the nearest eigenvector line within
/// `10 · tol`.
pub fn tpi_run(
    tensor: &SimplexTensor,
    structure: Option<&EigenStructure>,
    x0: &DVector<f64>,
    options: TpiOptions,
) -> Result<TpiResult> {
    if x0.len() != tensor.dim() {
        return Err(Error::InvalidInput(format!(
            "start vector has length {}, expected {}",
            x0.len(),
            tensor.dim()
        )));
    }
    if (x0.norm() - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidInput(format!(
            "start vector must be a unit vector, norm is {}",
            x0.norm()
        )));
    }
    if !(options.tol > 0.0) {
        return Err(Error::InvalidInput(format!("tolerance must be positive, got {}", options.tol)));
    }
    let mut x = x0.clone();
    for iteration in 1..=options.max_iter {
        let mut next = match phi(tensor, &x) {
            Ok(v) => v,
            Err(Error::MapUndefined { .. }) => {
                return Ok(TpiResult {
                    limit: None,
                    status: TpiStatus::MapUndefined,
                    iterations: iteration,
                    matched: None,
                })
            }
            Err(e) => return Err(e),
        };
        if next.dot(&x) < 0.0 {
            next.neg_mut();
        }
        let step = (&next - &x).norm().min((&next + &x).norm());
        x = next;
        if step < options.tol {
            let matched = structure
                .and_then(|s| s.nearest_line(&x))
                .filter(|&(_, distance, _)| distance <= 10.0 * options.tol)
                .map(|(pair, distance, negated)| LineMatch {
                    pair,
                    negated,
                    distance,
                });
            return Ok(TpiResult {
                limit: Some(x),
                status: TpiStatus::Converged,
                iterations: iteration,
                matched,
            });
        }
    }
    Ok(TpiResult {
        limit: Some(x),
        status: TpiStatus::MaxIterations,
        iterations: options.max_iter,
        matched: None,
    })
}

/// Jacobian of `φ` at an arbitrary `x`:
/// `(d-1)/‖y‖ (I - ŷŷᵀ) T x^{d-2}` with `y = T x^{d-1}`.
pub fn jacobian(tensor: &SimplexTensor, x: &DVector<f64>) -> Result<DMatrix<f64>> {
    let y = tensor.contract_pow(x);
    let norm = y.norm();
    if norm <= MAP_TOL {
        return Err(Error::MapUndefined { norm });
    }
    let y_hat = y / norm;
    let n = x.len();
    let projector = DMatrix::identity(n, n) - &y_hat * y_hat.transpose();
    let scale = (tensor.order() - 1) as f64 / norm;
    Ok(projector * tensor.contract_matrix(x) * scale)
}

/// Jacobian of `φ` at a unit eigenvector with eigenvalue `μ ≠ 0`, in the
/// symmetric form `(d-1)/|μ| (T x^{d-2} - μ x xᵀ)`.
pub fn jacobian_at_eigenpair(tensor: &SimplexTensor, x: &DVector<f64>, mu: f64) -> Result<DMatrix<f64>> {
    if mu.abs() <= ZERO_EIGENVALUE_TOL {
        return Err(Error::MapUndefined { norm: mu.abs() });
    }
    let m = tensor.contract_matrix(x) - x * x.transpose() * mu;
    Ok(m * ((tensor.order() - 1) as f64 / mu.abs()))
}

/// Central-difference approximation of the Jacobian of `φ`.
pub fn finite_difference_jacobian(tensor: &SimplexTensor, x: &DVector<f64>, step: f64) -> Result<DMatrix<f64>> {
    let n = x.len();
    let mut out = DMatrix::zeros(n, n);
    for j in 0..n {
        let mut plus = x.clone();
        let mut minus = x.clone();
        plus[j] += step;
        minus[j] -= step;
        let column = (phi(tensor, &plus)? - phi(tensor, &minus)?) / (2.0 * step);
        out.set_column(j, &column);
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RobustnessClass {
    Robust,
    NonRobust,
    Marginal,
    /// `μ = 0`, so `φ` is not defined at the eigenvector.
    Undefined,
}

impl RobustnessClass {
    pub fn from_radius(radius: Option<f64>) -> Self {
        match radius {
            None => RobustnessClass::Undefined,
            Some(r) if r < 1.0 - ROBUST_MARGIN => RobustnessClass::Robust,
            Some(r) if r > 1.0 + ROBUST_MARGIN => RobustnessClass::NonRobust,
            Some(_) => RobustnessClass::Marginal,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            RobustnessClass::Robust => "robust",
            RobustnessClass::NonRobust => "not robust",
            RobustnessClass::Marginal => "marginal",
            RobustnessClass::Undefined => "undefined",
        }
    }
}

/// Spectral radius of `φ'` at a unit eigenvector, or `None` when `μ = 0`.
pub fn eigenvector_radius(tensor: &SimplexTensor, x: &DVector<f64>, mu: f64) -> Result<Option<f64>> {
    if mu.abs() <= ZERO_EIGENVALUE_TOL {
        return Ok(None);
    }
    spectral_radius_sym(&jacobian_at_eigenpair(tensor, x, mu)?).map(Some)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RobustnessRecord {
    pub pair: EigenPair,
    pub spectral_radius: Option<f64>,
    pub class: RobustnessClass,
}

/// Robustness of every eigenvector line, or the continuum report.
#[derive(Debug, Clone, PartialEq)]
pub enum Classification {
    /// Every unit vector is an eigenvector and `φ'` has spectral radius
    /// `spectral_radius` (numerically 1) everywhere.
    Continuum { eigenvalue: f64, spectral_radius: f64 },
    Discrete {
        structure: EigenStructure,
        records: Vec<RobustnessRecord>,
    },
}

fn continuum_radius(tensor: &SimplexTensor, mu: f64) -> Result<f64> {
    let n = tensor.dim();
    let x = DVector::from_fn(n, |i, _| 1.0 + i as f64 * 0.618).normalize();
    spectral_radius_sym(&jacobian_at_eigenpair(tensor, &x, mu)?)
}

/// Classifies every enumerated eigenvector line of the `(n, d)` simplex tensor.
pub fn classify_all(n: usize, d: usize) -> Result<Classification> {
    let tensor = SimplexTensor::regular(n, d)?;
    let structure = enumerate_eigenpairs(n, d)?;
    if let EigenStructure::WholeSphere { eigenvalue } = structure {
        return Ok(Classification::Continuum {
            eigenvalue,
            spectral_radius: continuum_radius(&tensor, eigenvalue)?,
        });
    }
    let records = structure
        .pairs()
        .par_iter()
        .map(|pair| {
            let spectral_radius = eigenvector_radius(&tensor, &pair.vector, pair.eigenvalue)?;
            Ok(RobustnessRecord {
                pair: pair.clone(),
                spectral_radius,
                class: RobustnessClass::from_radius(spectral_radius),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Classification::Discrete { structure, records })
}

/// One row per canonical barycentric zero, in the layout of a
/// `(s_1, …, s_{n-1}) | μ | ρ | class` table.
#[derive(Debug, Clone, PartialEq)]
pub struct TableRow {
    pub label: String,
    pub solution: BarycentricSolution,
    pub eigenvalue: f64,
    pub spectral_radius: Option<f64>,
    pub class: RobustnessClass,
}

/// Rows for the canonical zeros, or the continuum report.
#[derive(Debug, Clone, PartialEq)]
pub enum CanonicalTable {
    Continuum { eigenvalue: f64, spectral_radius: f64 },
    Rows(Vec<TableRow>),
}

pub fn canonical_table(n: usize, d: usize) -> Result<CanonicalTable> {
    let tensor = SimplexTensor::regular(n, d)?;
    let canonical = match enumerate_barycentric(n, d)? {
        BarycentricZeros::WholeSimplex => {
            let eigenvalue = continuum_eigenvalue(n, d)?;
            return Ok(CanonicalTable::Continuum {
                eigenvalue,
                spectral_radius: continuum_radius(&tensor, eigenvalue)?,
            });
        }
        BarycentricZeros::Discrete { solutions, .. } => solutions,
    };
    let rows = canonical
        .into_par_iter()
        .map(|solution| {
            let x = solution.eigenvector(tensor.frame());
            let eigenvalue = solution.eigenvalue();
            let spectral_radius = eigenvector_radius(&tensor, &x, eigenvalue)?;
            Ok(TableRow {
                label: solution.label(),
                solution,
                eigenvalue,
                spectral_radius,
                class: RobustnessClass::from_radius(spectral_radius),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CanonicalTable::Rows(rows))
}

/// Eigenvector families of the planar (`n = 2`) simplex tensor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PlanarFamily {
    /// `±v_k`.
    Vertex,
    /// `±(v_k + 2 v_j)/√3`, present for even `d >= 6`.
    Mixed,
}

impl PlanarFamily {
    pub fn of(kind: &SolutionKind) -> Self {
        match kind {
            SolutionKind::UniformOnK { .. } => PlanarFamily::Vertex,
            SolutionKind::TwoLevel { .. } => PlanarFamily::Mixed,
        }
    }
}

/// Closed-form spectral radius of `φ'` for `n = 2`.
pub fn closed_form_radius_n2(d: usize, family: PlanarFamily) -> Result<f64> {
    let dm1 = (d - 1) as f64;
    let power = 2f64.powi(d as i32 - 1);
    match family {
        _ if d < 3 => Err(Error::InvalidOrder(d)),
        PlanarFamily::Vertex if d.is_multiple_of(2) => Ok(3.0 * dm1 / (power + 1.0)),
        PlanarFamily::Vertex => Ok(3.0 * dm1 / (power - 1.0)),
        PlanarFamily::Mixed if d.is_multiple_of(2) && d >= 6 => Ok(dm1 / 3.0),
        PlanarFamily::Mixed => Err(Error::InvalidInput(format!(
            "the mixed family exists only for even d >= 6, got d = {d}"
        ))),
    }
}
