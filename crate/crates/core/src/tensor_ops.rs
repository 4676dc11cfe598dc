//! The simplex tensor `T = Σ_k λ_k v_k^{⊗d}` in rank-one-sum form.
//!
//! Every contraction reduces to inner products `⟨v_k, x⟩`, so the dense
//! `n^d` array is never needed outside of tests. [`DenseTensor`] exists as an
//! independent oracle for the decomposed formulas.

use nalgebra::{DMatrix, DVector};

use crate::frames::SimplexFrame;
use crate::{Error, Result};

/// Largest dense tensor [`SimplexTensor::dense`] will materialize.
pub const DENSE_LIMIT: u128 = 10_000_000;

/// Order-`d` symmetric tensor `Σ_k λ_k v_k^{⊗d}` over a simplex frame.
#[derive(Debug, Clone, PartialEq)]
pub struct SimplexTensor {
    order: usize,
    frame: SimplexFrame,
    weights: Vec<f64>,
}

impl SimplexTensor {
    /// The regular simplex tensor: all weights equal to one.
    pub fn new(frame: SimplexFrame, order: usize) -> Result<Self> {
        let weights = vec![1.0; frame.len()];
        Self::with_weights(frame, order, weights)
    }

    /// Convenience constructor building the frame as well.
    pub fn regular(n: usize, order: usize) -> Result<Self> {
        Self::new(SimplexFrame::new(n)?, order)
    }

    pub fn with_weights(frame: SimplexFrame, order: usize, weights: Vec<f64>) -> Result<Self> {
        if order < 2 {
            return Err(Error::InvalidOrder(order));
        }
        if weights.len() != frame.len() {
            return Err(Error::InvalidInput(format!(
                "expected {} weights, got {}",
                frame.len(),
                weights.len()
            )));
        }
        Ok(Self {
            order,
            frame,
            weights,
        })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn dim(&self) -> usize {
        self.frame.dim()
    }

    pub fn frame(&self) -> &SimplexFrame {
        &self.frame
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// True when every weight is exactly one.
    pub fn is_regular(&self) -> bool {
        self.weights.iter().all(|&w| w == 1.0)
    }

    fn inner_products<'a>(&'a self, x: &'a DVector<f64>) -> impl Iterator<Item = (usize, f64, f64)> + 'a {
        self.weights
            .iter()
            .enumerate()
            .map(move |(k, &w)| (k, w, self.frame.vector(k).dot(x)))
    }

    /// `T·x^{d-1} = Σ_k λ_k ⟨v_k, x⟩^{d-1} v_k`.
    pub fn contract_pow(&self, x: &DVector<f64>) -> DVector<f64> {
        let e = (self.order - 1) as i32;
        let mut out = DVector::zeros(self.dim());
        for (k, w, t) in self.inner_products(x) {
            out.axpy(w * t.powi(e), &self.frame.vector(k), 1.0);
        }
        out
    }

    /// `T·x^{d-2} = Σ_k λ_k ⟨v_k, x⟩^{d-2} v_k v_kᵀ`; for `d = 2` this is
    /// the matrix `Σ_k λ_k v_k v_kᵀ` itself.
    pub fn contract_matrix(&self, x: &DVector<f64>) -> DMatrix<f64> {
        let e = (self.order - 2) as i32;
        let n = self.dim();
        let mut out = DMatrix::zeros(n, n);
        for (k, w, t) in self.inner_products(x) {
            let c = w * t.powi(e);
            let v = self.frame.vector(k);
            for j in 0..n {
                for i in j..n {
                    out[(i, j)] += c * v[i] * v[j];
                }
            }
        }
        for j in 0..n {
            for i in j + 1..n {
                out[(j, i)] = out[(i, j)];
            }
        }
        out
    }

    /// Energy `J(x) = ⟨T, x^{⊗d}⟩ = Σ_k λ_k ⟨v_k, x⟩^d`.
    pub fn energy(&self, x: &DVector<f64>) -> f64 {
        let e = self.order as i32;
        self.inner_products(x).map(|(_, w, t)| w * t.powi(e)).sum()
    }

    /// Materializes the full supersymmetric array. Test oracle only.
    pub fn dense(&self) -> Result<DenseTensor> {
        let n = self.dim();
        let size = (n as u128).checked_pow(self.order as u32).unwrap_or(u128::MAX);
        if size > DENSE_LIMIT {
            return Err(Error::Capacity {
                size,
                limit: DENSE_LIMIT,
            });
        }
        let mut data = vec![0.0; size as usize];
        for (k, &w) in self.weights.iter().enumerate() {
            let v = self.frame.vector(k);
            let mut power = vec![w];
            for _ in 0..self.order {
                power = power
                    .iter()
                    .flat_map(|&a| v.iter().map(move |&b| a * b))
                    .collect();
            }
            for (slot, p) in data.iter_mut().zip(power) {
                *slot += p;
            }
        }
        Ok(DenseTensor {
            n,
            order: self.order,
            data,
        })
    }
}

/// Row-major dense storage of an order-`d` tensor on `ℝⁿ`.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseTensor {
    n: usize,
    order: usize,
    data: Vec<f64>,
}

impl DenseTensor {
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Entry at the multi-index `idx` (length `d`).
    pub fn get(&self, idx: &[usize]) -> f64 {
        assert_eq!(idx.len(), self.order);
        let flat = idx.iter().fold(0, |acc, &i| acc * self.n + i);
        self.data[flat]
    }

    /// Contracts the first `d - 1` modes with `x`, by brute-force summation
    /// over all multi-indices.
    pub fn contract_pow(&self, x: &DVector<f64>) -> DVector<f64> {
        let n = self.n;
        let mut out = DVector::zeros(n);
        for (flat, &value) in self.data.iter().enumerate() {
            let j = flat % n;
            let mut rest = flat / n;
            let mut prod = value;
            for _ in 1..self.order {
                prod *= x[rest % n];
                rest /= n;
            }
            out[j] += prod;
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use super::*;

    fn random_vector(rng: &mut ChaCha8Rng, n: usize) -> DVector<f64> {
        DVector::from_fn(n, |_, _| rng.gen_range(-1.0..1.0))
    }

    #[test]
    fn rejects_order_below_two() {
        assert!(matches!(SimplexTensor::regular(3, 1), Err(Error::InvalidOrder(1))));
    }

    #[test]
    fn matrix_case_is_scaled_identity() {
        let t = SimplexTensor::regular(2, 2).unwrap();
        let v1 = t.frame().vector(0).into_owned();
        let y = t.contract_pow(&v1);
        assert!((y - 1.5 * &v1).amax() < 1e-15);

        let x = DVector::from_vec(vec![0.3, -0.7]);
        let m = t.contract_matrix(&x);
        assert!((m - DMatrix::identity(2, 2) * 1.5).amax() < 1e-15);
    }

    #[test]
    fn zero_vector_contracts_to_zero() {
        for d in 2..6 {
            let t = SimplexTensor::regular(3, d).unwrap();
            let zero = DVector::zeros(3);
            if d > 2 {
                assert_eq!(t.contract_pow(&zero).amax(), 0.0);
            }
            assert_eq!(t.energy(&zero), 0.0);
        }
    }

    #[test]
    fn frame_vector_contractions() {
        // T v_1^{d-1} = (1 - (-1/n)^{d-1}) v_1; 3/4 for (2, 3), 8/9 for (3, 3)
        let t = SimplexTensor::regular(2, 3).unwrap();
        let v1 = t.frame().vector(0).into_owned();
        assert!((t.contract_pow(&v1) - 0.75 * &v1).amax() < 1e-14);

        let t = SimplexTensor::regular(3, 3).unwrap();
        let v1 = t.frame().vector(0).into_owned();
        let y = t.contract_pow(&v1);
        assert!((&y - (8.0 / 9.0) * &v1).amax() < 1e-14);
        let dense = t.dense().unwrap().contract_pow(&v1);
        assert!((dense - y).amax() < 1e-14);
    }

    #[test]
    fn contract_matrix_at_vertex_n2() {
        for d in [4, 6, 8] {
            let t = SimplexTensor::regular(2, d).unwrap();
            let v = t.frame().vector(0).into_owned();
            let m = t.contract_matrix(&v);
            let a = 1.0 - 2f64.powi(2 - d as i32);
            let b = 3.0 / 2f64.powi(d as i32 - 1);
            let expected = a * &v * v.transpose() + DMatrix::identity(2, 2) * b;
            assert!((m - expected).amax() < 1e-14);
        }
    }

    #[test]
    fn energy_values() {
        let t = SimplexTensor::regular(2, 2).unwrap();
        let v = t.frame().vector(0).into_owned();
        assert_relative_eq!(t.energy(&v), 1.5, epsilon = 1e-15);

        let t = SimplexTensor::regular(3, 4).unwrap();
        let v = t.frame().vector(0).into_owned();
        assert_relative_eq!(t.energy(&v), 28.0 / 27.0, epsilon = 1e-15);
    }

    #[test]
    fn contract_matrix_matches_hessian_of_energy() {
        // Hess J = d(d-1) T·x^{d-2}
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let t = SimplexTensor::regular(3, 4).unwrap();
        let x = random_vector(&mut rng, 3).normalize();
        let h = 1e-4;
        let mut hess = DMatrix::zeros(3, 3);
        for i in 0..3 {
            for j in 0..3 {
                let shifted = |si: f64, sj: f64| {
                    let mut y = x.clone();
                    y[i] += si;
                    y[j] += sj;
                    t.energy(&y)
                };
                hess[(i, j)] = (shifted(h, h) - shifted(h, -h) - shifted(-h, h) + shifted(-h, -h))
                    / (4.0 * h * h);
            }
        }
        let m = t.contract_matrix(&x);
        assert!((hess / 12.0 - m).amax() < 1e-6);
    }

    #[test]
    fn dense_tensor_is_supersymmetric() {
        let t = SimplexTensor::regular(3, 3).unwrap();
        let dense = t.dense().unwrap();
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    let a = dense.get(&[i, j, k]);
                    for p in [[i, k, j], [j, i, k], [j, k, i], [k, i, j], [k, j, i]] {
                        assert!((dense.get(&p) - a).abs() < 1e-15);
                    }
                }
            }
        }
        let m = SimplexTensor::regular(2, 2).unwrap().dense().unwrap();
        assert!((m.get(&[0, 0]) - 1.5).abs() < 1e-15);
        assert!(m.get(&[0, 1]).abs() < 1e-15);
    }

    #[test]
    fn dense_matches_decomposed() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in 2..=6 {
            for d in 2..=9 {
                if (n as u128).pow(d as u32) > 100_000 {
                    continue;
                }
                let t = SimplexTensor::regular(n, d).unwrap();
                let dense = t.dense().unwrap();
                let x = random_vector(&mut rng, n);
                let a = dense.contract_pow(&x);
                let b = t.contract_pow(&x);
                assert!((a - &b).amax() <= 1e-12 * b.amax().max(1.0), "n={n} d={d}");
            }
        }
    }

    #[test]
    fn dense_guard() {
        let t = SimplexTensor::regular(12, 8).unwrap();
        assert!(matches!(t.dense(), Err(Error::Capacity { .. })));
    }

    #[test]
    fn gradient_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for (n, d) in [(2, 3), (3, 4), (4, 5), (5, 6)] {
            let t = SimplexTensor::regular(n, d).unwrap();
            let x = random_vector(&mut rng, n);
            let h = 1e-5 * x.norm().max(1.0);
            let grad = DVector::from_fn(n, |i, _| {
                let mut p = x.clone();
                let mut m = x.clone();
                p[i] += h;
                m[i] -= h;
                (t.energy(&p) - t.energy(&m)) / (2.0 * h)
            });
            let analytic = t.contract_pow(&x) * d as f64;
            assert!((grad - analytic).amax() < 1e-6, "n={n} d={d}");
        }
    }

    #[test]
    fn homogeneity() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for (n, d) in [(2, 5), (3, 3), (4, 6)] {
            let t = SimplexTensor::regular(n, d).unwrap();
            let x = random_vector(&mut rng, n);
            let base = t.contract_pow(&x);
            for s in [-2.0, 0.5, 3.0] {
                let scaled = t.contract_pow(&(&x * s));
                let expected = &base * f64::powi(s, d as i32 - 1);
                assert!((scaled - &expected).amax() <= 1e-12 * expected.amax());
            }
        }
    }
}
