//! One-shot consistency report for a given `(n, d)`.
//!
//! Each check yields a PASS, FAIL or SKIP line. The report contains no
//! timings or addresses, and every random choice comes from the seed, so
//! repeated runs print identical bytes.

use std::fmt::Write as _;

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dynamics::{
    canonical_table, classify_all, closed_form_radius_n2, finite_difference_jacobian, jacobian, CanonicalTable,
    Classification, PlanarFamily, RobustnessClass,
};
use crate::eigenstructure::{enumerate_barycentric, enumerate_eigenpairs, EigenStructure, RESIDUAL_TOL};
use crate::oracle::{brute_force_zeros, compare_with_enumeration, DEFAULT_GRID};
use crate::output::float;
use crate::{Error, Result, SimplexTensor};

/// Largest `n` the brute-force oracle handles.
pub const ORACLE_MAX_N: usize = 4;
/// Agreement required between analytic and finite-difference Jacobians.
pub const JACOBIAN_FD_TOL: f64 = 1e-6;
/// `‖φ'(x) x‖` bound at eigenvectors.
pub const JACOBIAN_KERNEL_TOL: f64 = 1e-11;
/// Agreement required for closed-form and tabulated spectral radii.
pub const RADIUS_TOL: f64 = 1e-10;
const FD_STEP: f64 = 1e-6;
const JACOBIAN_SAMPLES: usize = 20;
const FAMILY_SAMPLES: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckStatus {
    Pass,
    Fail,
    Skip,
}

impl CheckStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            CheckStatus::Pass => "PASS",
            CheckStatus::Fail => "FAIL",
            CheckStatus::Skip => "SKIP",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub status: CheckStatus,
    pub detail: String,
    /// Extra indented lines, e.g. mismatching table rows.
    pub notes: Vec<String>,
}

impl Check {
    fn new(name: &'static str, ok: bool, detail: String) -> Self {
        Self {
            name,
            status: if ok { CheckStatus::Pass } else { CheckStatus::Fail },
            detail,
            notes: Vec::new(),
        }
    }

    fn skip(name: &'static str, detail: impl Into<String>) -> Self {
        Self {
            name,
            status: CheckStatus::Skip,
            detail: detail.into(),
            notes: Vec::new(),
        }
    }

    fn error(name: &'static str, err: &Error) -> Self {
        Self::new(name, false, err.to_string())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub n: usize,
    pub d: usize,
    pub seed: u64,
    pub checks: Vec<Check>,
}

impl Report {
    /// True when no check failed.
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.status != CheckStatus::Fail)
    }

    pub fn failures(&self) -> Vec<&'static str> {
        self.checks
            .iter()
            .filter(|c| c.status == CheckStatus::Fail)
            .map(|c| c.name)
            .collect()
    }

    pub fn render(&self) -> String {
        let mut out = format!("verify n={} d={} seed={}\n", self.n, self.d, self.seed);
        for check in &self.checks {
            let _ = writeln!(out, "{} {:<10} {}", check.status.as_str(), check.name, check.detail);
            for note in &check.notes {
                let _ = writeln!(out, "     {note}");
            }
        }
        let (pass, fail, skip) = self.checks.iter().fold((0, 0, 0), |(p, f, s), c| match c.status {
            CheckStatus::Pass => (p + 1, f, s),
            CheckStatus::Fail => (p, f + 1, s),
            CheckStatus::Skip => (p, f, s + 1),
        });
        let _ = writeln!(out, "summary: {pass} passed, {fail} failed, {skip} skipped");
        out
    }
}

/// One published row of the `n = 3` robustness table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PublishedRow {
    /// Reduced barycentric coordinates `(s_1, s_2)`, in the format of
    /// [`crate::eigenstructure::BarycentricSolution::label`].
    pub label: &'static str,
    /// `None` where the eigenvalue is zero and `ρ` is undefined.
    pub radius: Option<f64>,
    pub class: RobustnessClass,
}

/// The published `n = 3` table for `d ∈ {3, …, 7}`.
pub fn published_table(d: usize) -> Option<Vec<PublishedRow>> {
    use RobustnessClass::{NonRobust, Robust, Undefined};
    const VERTICES: [&str; 4] = ["(0, 0)", "(1, 0)", "(0, 1)", "(1/3, 1/3)"];
    const MIDPOINTS: [&str; 3] = ["(1/2, 0)", "(0, 1/2)", "(1/2, 1/2)"];
    const TWO_LEVEL: [&str; 3] = ["(1/2, 1/4)", "(1/4, 1/2)", "(1/4, 1/4)"];
    let row = |label, radius, class| PublishedRow { label, radius, class };
    let mut rows = Vec::new();
    let (vertex, vertex_class) = match d {
        3 => (2.0, NonRobust),
        4 => (5.0 / 7.0, Robust),
        5 => (3.0 / 10.0, Robust),
        6 => (7.0 / 61.0, Robust),
        7 => (4.0 / 91.0, Robust),
        _ => return None,
    };
    rows.extend(VERTICES.map(|l| row(l, Some(vertex), vertex_class)));
    if d % 2 == 1 {
        rows.extend(MIDPOINTS.map(|l| row(l, None, Undefined)));
    } else {
        let (mid, two) = if d == 4 { (5.0, 2.5) } else { (7.0, 3.5) };
        rows.extend(MIDPOINTS.map(|l| row(l, Some(mid), NonRobust)));
        rows.extend(TWO_LEVEL.map(|l| row(l, Some(two), NonRobust)));
    }
    Some(rows)
}

/// A published row next to the computed one.
#[derive(Debug, Clone, PartialEq)]
pub struct RowComparison {
    pub published: PublishedRow,
    /// `None` when no computed row carries the label.
    pub observed: Option<(Option<f64>, RobustnessClass)>,
}

impl RowComparison {
    pub fn agrees(&self) -> bool {
        let Some((radius, class)) = self.observed else {
            return false;
        };
        let radius_ok = match (self.published.radius, radius) {
            (None, None) => true,
            (Some(a), Some(b)) => (a - b).abs() <= RADIUS_TOL,
            _ => false,
        };
        radius_ok && class == self.published.class
    }

    pub fn describe(&self) -> String {
        let show = |r: Option<f64>| r.map(float).unwrap_or_else(|| "--".into());
        let observed = match self.observed {
            Some((r, c)) => format!("{} {}", show(r), c.as_str()),
            None => "missing".into(),
        };
        format!(
            "{}: published {} {}, computed {}",
            self.published.label,
            show(self.published.radius),
            self.published.class.as_str(),
            observed
        )
    }
}

/// Computes the `n = 3` canonical table and lines it up with the published
/// rows. `None` when `d` is outside the published range.
pub fn compare_published_table(d: usize) -> Result<Option<Vec<RowComparison>>> {
    let Some(published) = published_table(d) else {
        return Ok(None);
    };
    let CanonicalTable::Rows(rows) = canonical_table(3, d)? else {
        return Ok(None);
    };
    Ok(Some(
        published
            .into_iter()
            .map(|p| RowComparison {
                published: p,
                observed: rows
                    .iter()
                    .find(|r| r.label == p.label)
                    .map(|r| (r.spectral_radius, r.class)),
            })
            .collect(),
    ))
}

fn random_unit(rng: &mut ChaCha8Rng, n: usize) -> DVector<f64> {
    DVector::from_fn(n, |_, _| rng.gen_range(-1.0..1.0)).normalize()
}

fn check_frame(tensor: &SimplexTensor) -> Check {
    let dev = tensor.frame().deviations();
    Check::new(
        "frame",
        dev.within_tolerance(),
        format!(
            "unit {} gram {} sum {} tight {}",
            float(dev.unit_norm),
            float(dev.inner_product),
            float(dev.column_sum),
            float(dev.tight)
        ),
    )
}

fn check_residuals(tensor: &SimplexTensor, structure: &EigenStructure) -> Check {
    match structure {
        EigenStructure::WholeSphere { eigenvalue } => {
            let x = DVector::from_fn(tensor.dim(), |i, _| 1.0 + 0.5 * i as f64).normalize();
            let residual = (tensor.contract_pow(&x) - &x * *eigenvalue).norm();
            Check::new(
                "residuals",
                residual <= RESIDUAL_TOL,
                format!("whole sphere, residual at a sample point {}", float(residual)),
            )
        }
        EigenStructure::Discrete { pairs, families, .. } => {
            let mut worst = pairs.iter().map(|p| p.residual).fold(0.0, f64::max);
            let mut family_error = None;
            for family in families {
                let (lo, hi) = family.range();
                for i in 1..=FAMILY_SAMPLES {
                    let t = lo + (hi - lo) * i as f64 / (FAMILY_SAMPLES + 1) as f64;
                    match family.member(t) {
                        Ok(s) => {
                            let x = s.eigenvector(tensor.frame());
                            let residual = (tensor.contract_pow(&x) - &x * s.eigenvalue()).norm();
                            worst = worst.max(residual);
                        }
                        Err(e) => family_error = Some(e),
                    }
                }
            }
            if let Some(e) = family_error {
                return Check::error("residuals", &e);
            }
            let mut detail = format!("{} lines, {} normalized pairs", pairs.len(), 2 * pairs.len());
            if !families.is_empty() {
                let _ = write!(detail, ", {} curves", families.len());
            }
            let _ = write!(detail, ", max residual {}", float(worst));
            Check::new("residuals", worst <= RESIDUAL_TOL, detail)
        }
    }
}

fn check_continuum(tensor: &SimplexTensor, classification: &Classification) -> Check {
    match classification {
        Classification::Continuum {
            eigenvalue,
            spectral_radius,
        } => Check::new(
            "continuum",
            (spectral_radius - 1.0).abs() <= RADIUS_TOL,
            format!(
                "whole sphere (n={}, d={}): mu {} rho {}",
                tensor.dim(),
                tensor.order(),
                float(*eigenvalue),
                float(*spectral_radius)
            ),
        ),
        Classification::Discrete { .. } => Check::skip("continuum", "isolated eigenvectors"),
    }
}

fn check_oracle(n: usize, d: usize, seed: u64) -> Check {
    if n > ORACLE_MAX_N {
        return Check::skip("oracle", format!("brute force is limited to n <= {ORACLE_MAX_N}"));
    }
    let run = || -> Result<Check> {
        let oracle = brute_force_zeros(n, d, DEFAULT_GRID, seed)?;
        let enumeration = enumerate_barycentric(n, d)?;
        let report = compare_with_enumeration(&oracle, &enumeration);
        let detail = if oracle.continuum {
            format!(
                "continuum flagged by oracle, enumeration agrees: {}",
                report.continuum_agrees
            )
        } else {
            let worst = report.matched.iter().map(|m| m.2).fold(0.0, f64::max);
            format!(
                "{} matched, {} unmatched oracle, {} unmatched enumerated, max distance {}",
                report.matched.len(),
                report.unmatched_oracle.len(),
                report.unmatched_enumeration.len(),
                float(worst)
            )
        };
        Ok(Check::new("oracle", report.is_clean(), detail))
    };
    run().unwrap_or_else(|e| Check::error("oracle", &e))
}

fn check_jacobian(tensor: &SimplexTensor, structure: &EigenStructure, seed: u64) -> Check {
    let run = || -> Result<Check> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut fd_worst: f64 = 0.0;
        let mut samples = 0;
        for _ in 0..JACOBIAN_SAMPLES {
            let x = random_unit(&mut rng, tensor.dim());
            let (Ok(analytic), Ok(numeric)) = (jacobian(tensor, &x), finite_difference_jacobian(tensor, &x, FD_STEP))
            else {
                continue;
            };
            fd_worst = fd_worst.max((analytic - numeric).amax());
            samples += 1;
        }
        let mut kernel_worst: f64 = 0.0;
        for pair in structure.pairs() {
            if pair.eigenvalue.abs() <= crate::dynamics::ZERO_EIGENVALUE_TOL {
                continue;
            }
            let j = jacobian(tensor, &pair.vector)?;
            kernel_worst = kernel_worst.max((j * &pair.vector).norm());
        }
        Ok(Check::new(
            "jacobian",
            samples > 0 && fd_worst <= JACOBIAN_FD_TOL && kernel_worst <= JACOBIAN_KERNEL_TOL,
            format!(
                "max |J - J_fd| {} over {samples} points, max |J x| at eigenvectors {}",
                float(fd_worst),
                float(kernel_worst)
            ),
        ))
    };
    run().unwrap_or_else(|e| Check::error("jacobian", &e))
}

fn check_planar_radii(classification: &Classification, n: usize, d: usize) -> Check {
    if n != 2 {
        return Check::skip("radii", "closed forms exist for n = 2 only");
    }
    let Classification::Discrete { records, .. } = classification else {
        return Check::skip("radii", "whole sphere");
    };
    let mut worst: f64 = 0.0;
    let mut compared = 0;
    for record in records {
        let Some(radius) = record.spectral_radius else {
            continue;
        };
        let family = PlanarFamily::of(&record.pair.source.kind);
        match closed_form_radius_n2(d, family) {
            Ok(expected) => {
                worst = worst.max((radius - expected).abs());
                compared += 1;
            }
            Err(e) => return Check::error("radii", &e),
        }
    }
    Check::new(
        "radii",
        worst <= RADIUS_TOL,
        format!("{compared} eigenvectors against closed forms, max deviation {}", float(worst)),
    )
}

fn check_table(n: usize, d: usize) -> Check {
    if n != 3 {
        return Check::skip("table", "published table covers n = 3 only");
    }
    match compare_published_table(d) {
        Ok(None) => Check::skip("table", "published table covers d = 3..7 only"),
        Ok(Some(rows)) => {
            let bad: Vec<&RowComparison> = rows.iter().filter(|r| !r.agrees()).collect();
            let mut check = Check::new(
                "table",
                bad.is_empty(),
                format!("{} of {} published rows reproduced", rows.len() - bad.len(), rows.len()),
            );
            check.notes = bad.iter().map(|r| r.describe()).collect();
            check
        }
        Err(e) => Check::error("table", &e),
    }
}

/// Runs every applicable check for the `(n, d)` simplex tensor. `seed`
/// drives the random sample points.
pub fn verify(n: usize, d: usize, seed: u64) -> Result<Report> {
    let tensor = SimplexTensor::regular(n, d)?;
    let mut checks = vec![check_frame(&tensor)];
    let structure = match enumerate_eigenpairs(n, d) {
        Ok(s) => s,
        Err(e) => {
            checks.push(Check::error("residuals", &e));
            return Ok(Report { n, d, seed, checks });
        }
    };
    checks.push(check_residuals(&tensor, &structure));
    let classification = classify_all(n, d);
    match &classification {
        Ok(c) => checks.push(check_continuum(&tensor, c)),
        Err(e) => checks.push(Check::error("continuum", e)),
    }
    checks.push(check_oracle(n, d, seed));
    checks.push(check_jacobian(&tensor, &structure, seed));
    match &classification {
        Ok(c) => checks.push(check_planar_radii(c, n, d)),
        Err(e) => checks.push(Check::error("radii", e)),
    }
    checks.push(check_table(n, d));
    Ok(Report { n, d, seed, checks })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn status(report: &Report, name: &str) -> CheckStatus {
        report.checks.iter().find(|c| c.name == name).unwrap().status
    }

    #[test]
    fn planar_report_passes() {
        let report = verify(2, 6, 0).unwrap();
        assert!(report.passed(), "{}", report.render());
        assert_eq!(status(&report, "radii"), CheckStatus::Pass);
        assert_eq!(status(&report, "table"), CheckStatus::Skip);
    }

    #[test]
    fn continuum_report() {
        let report = verify(2, 4, 0).unwrap();
        assert!(report.passed(), "{}", report.render());
        let text = report.render();
        assert!(text.contains("PASS continuum"));
        assert!(text.contains(&float(9.0 / 8.0)));
    }

    #[test]
    fn large_n_skips_oracle() {
        let report = verify(5, 3, 0).unwrap();
        assert_eq!(status(&report, "oracle"), CheckStatus::Skip);
        assert_eq!(status(&report, "frame"), CheckStatus::Pass);
        assert_eq!(status(&report, "residuals"), CheckStatus::Pass);
        assert!(report.passed());
    }

    #[test]
    fn quartic_curves_are_checked() {
        let report = verify(5, 4, 0).unwrap();
        let residuals = report.checks.iter().find(|c| c.name == "residuals").unwrap();
        assert_eq!(residuals.status, CheckStatus::Pass);
        assert!(residuals.detail.contains("curves"));
    }

    #[test]
    fn report_is_deterministic() {
        assert_eq!(verify(3, 5, 7).unwrap().render(), verify(3, 5, 7).unwrap().render());
    }

    #[test]
    fn published_table_shape() {
        for d in 3..=7 {
            let rows = published_table(d).unwrap();
            assert_eq!(rows.len(), if d % 2 == 1 { 7 } else { 10 });
        }
        assert!(published_table(8).is_none());
    }

    #[test]
    fn computed_table_has_every_published_label() {
        for d in 3..=7 {
            for row in compare_published_table(d).unwrap().unwrap() {
                assert!(row.observed.is_some(), "d={d} {}", row.published.label);
            }
        }
    }

    #[test]
    fn table_rows_differ_by_a_constant_factor() {
        // every published radius is (d+1)/(d-1) times the computed one
        for d in 3..=7 {
            let factor = (d + 1) as f64 / (d - 1) as f64;
            for row in compare_published_table(d).unwrap().unwrap() {
                let computed = row.observed.unwrap().0;
                match (row.published.radius, computed) {
                    (Some(p), Some(c)) => assert!((p - factor * c).abs() < 1e-12, "d={d} {}", row.describe()),
                    (None, None) => {}
                    _ => panic!("d={d} {}", row.describe()),
                }
            }
        }
    }
}
