//! Small dense symmetric eigenvalue routines.

use nalgebra::{DMatrix, DVector};

use crate::{Error, Result};

/// Relative asymmetry accepted by [`spectral_radius_sym`].
pub const SYMMETRY_TOL: f64 = 1e-10;
const OFF_DIAGONAL_TOL: f64 = 1e-14;
const MAX_SWEEPS: usize = 100;

fn asymmetry(m: &DMatrix<f64>) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..m.nrows() {
        for j in i + 1..m.ncols() {
            worst = worst.max((m[(i, j)] - m[(j, i)]).abs());
        }
    }
    worst
}

fn off_diagonal_norm(a: &DMatrix<f64>) -> f64 {
    let mut sum = 0.0;
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            if i != j {
                sum += a[(i, j)] * a[(i, j)];
            }
        }
    }
    sum.sqrt()
}

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, in
/// ascending order. Only the upper triangle is read.
pub fn jacobi_eigenvalues(m: &DMatrix<f64>) -> DVector<f64> {
    let size = m.nrows();
    let mut a = DMatrix::from_fn(size, size, |i, j| if i <= j { m[(i, j)] } else { m[(j, i)] });
    let scale = a.norm();
    if scale == 0.0 {
        return DVector::zeros(size);
    }
    for _ in 0..MAX_SWEEPS {
        if off_diagonal_norm(&a) < OFF_DIAGONAL_TOL * scale {
            break;
        }
        for p in 0..size {
            for q in p + 1..size {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..size {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..size {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
                a[(p, q)] = 0.0;
                a[(q, p)] = 0.0;
            }
        }
    }
    let mut values: Vec<f64> = (0..size).map(|i| a[(i, i)]).collect();
    values.sort_by(f64::total_cmp);
    DVector::from_vec(values)
}

/// `max |λ|` over the eigenvalues of a symmetric matrix. Uses the closed
/// form for sizes up to 2 and Jacobi rotations otherwise.
pub fn spectral_radius_sym(m: &DMatrix<f64>) -> Result<f64> {
    if !m.is_square() {
        return Err(Error::InvalidInput(format!(
            "matrix is {}x{}, not square",
            m.nrows(),
            m.ncols()
        )));
    }
    let asym = asymmetry(m);
    if asym > SYMMETRY_TOL * m.norm().max(1.0) {
        return Err(Error::NotSymmetric { asymmetry: asym });
    }
    Ok(match m.nrows() {
        0 => 0.0,
        1 => m[(0, 0)].abs(),
        2 => {
            let (a, b, c) = (m[(0, 0)], 0.5 * (m[(0, 1)] + m[(1, 0)]), m[(1, 1)]);
            let mean = 0.5 * (a + c);
            let radius = (0.25 * (a - c) * (a - c) + b * b).sqrt();
            mean.abs() + radius
        }
        _ => jacobi_eigenvalues(m).amax(),
    })
}

#[cfg(test)]
mod tests {
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    use super::*;

    #[test]
    fn diagonal() {
        let m = DMatrix::from_diagonal(&DVector::from_vec(vec![3.0, -5.0]));
        assert_eq!(spectral_radius_sym(&m).unwrap(), 5.0);
        let m = DMatrix::from_diagonal(&DVector::from_vec(vec![3.0, -5.0, 4.0]));
        assert_eq!(spectral_radius_sym(&m).unwrap(), 5.0);
    }

    #[test]
    fn projector() {
        for size in 2..=6 {
            let x = DVector::from_fn(size, |i, _| (i as f64 + 1.0).sin()).normalize();
            let m = DMatrix::identity(size, size) - &x * x.transpose();
            assert_abs_diff_eq!(spectral_radius_sym(&m).unwrap(), 1.0, epsilon = 1e-14);
            let ev = jacobi_eigenvalues(&m);
            assert_abs_diff_eq!(ev[0], 0.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn rejects_asymmetric() {
        let m = DMatrix::from_row_slice(3, 3, &[1.0, 2.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0]);
        assert!(matches!(spectral_radius_sym(&m), Err(Error::NotSymmetric { .. })));
        let m = DMatrix::from_row_slice(2, 3, &[1.0; 6]);
        assert!(spectral_radius_sym(&m).is_err());
    }

    proptest! {
        #[test]
        fn matches_nalgebra(entries in prop::collection::vec(-10.0f64..10.0, 36), size in 1usize..=6) {
            let raw = DMatrix::from_fn(size, size, |i, j| entries[i * 6 + j]);
            let m = &raw + raw.transpose();
            let reference = m.clone().symmetric_eigen().eigenvalues.amax();
            let ours = spectral_radius_sym(&m).unwrap();
            prop_assert!((ours - reference).abs() <= 1e-10 * reference.max(1.0));
        }
    }
}
