//! The regular simplex frame `{v_1, …, v_{n+1}} ⊂ ℝⁿ`.
//!
//! The vectors are the renormalized orthogonal projections of the unit
//! vectors `e_k ∈ ℝ^{n+1}` onto the complement of `𝟙_{n+1}`, written out in
//! closed form:
//!
//! ```text
//! v_k     = sqrt(1 + 1/n) e_k - (sqrt(n+1) - 1) / n^{3/2} 𝟙_n,   1 <= k <= n
//! v_{n+1} = -𝟙_n / sqrt(n)
//! ```
//!
//! They are unit vectors with pairwise inner products `-1/n`, they sum to
//! zero and form a tight frame with `V Vᵀ = (n+1)/n · I`.

use nalgebra::{DMatrix, DVector, DVectorView};

use crate::{Error, Result};

/// Tolerance for `‖v_k‖ = 1` and the Gramian entries.
pub const UNIT_TOL: f64 = 1e-14;
/// Tolerance for `Σ v_k = 0` and `V Vᵀ = (n+1)/n · I`.
pub const SUM_TOL: f64 = 1e-13;

/// The `n + 1` equiangular unit vectors of the regular simplex in `ℝⁿ`,
/// stored column-wise in an `n × (n+1)` matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SimplexFrame {
    n: usize,
    vectors: DMatrix<f64>,
}

impl SimplexFrame {
    /// Builds the frame for dimension `n >= 2`.
    pub fn new(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidDimension(n));
        }
        let nf = n as f64;
        let scale = (1.0 + 1.0 / nf).sqrt();
        let shift = ((nf + 1.0).sqrt() - 1.0) / nf.powf(1.5);
        let last = -1.0 / nf.sqrt();

        let vectors = DMatrix::from_fn(n, n + 1, |i, k| {
            if k == n {
                last
            } else if i == k {
                scale - shift
            } else {
                -shift
            }
        });
        Ok(Self { n, vectors })
    }

    /// Dimension of the ambient space.
    pub fn dim(&self) -> usize {
        self.n
    }

    /// Number of frame vectors, `n + 1`.
    pub fn len(&self) -> usize {
        self.n + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// The `k`-th frame vector (0-based, `k <= n`).
    pub fn vector(&self, k: usize) -> DVectorView<'_, f64> {
        self.vectors.column(k)
    }

    /// The synthesis matrix `V = (v_1 ⋯ v_{n+1})`.
    pub fn vectors(&self) -> &DMatrix<f64> {
        &self.vectors
    }

    /// `Σ_{k∈support} coeffs[k] v_k` for a sparse set of coefficients.
    pub fn combine(&self, terms: impl IntoIterator<Item = (usize, f64)>) -> DVector<f64> {
        let mut out = DVector::zeros(self.n);
        for (k, c) in terms {
            out.axpy(c, &self.vectors.column(k), 1.0);
        }
        out
    }

    /// Gramian `VᵀV`, built symmetric entry by entry.
    pub fn gramian(&self) -> DMatrix<f64> {
        let m = self.len();
        let mut g = DMatrix::zeros(m, m);
        for j in 0..m {
            for k in j..m {
                let value = self.vectors.column(j).dot(&self.vectors.column(k));
                g[(j, k)] = value;
                g[(k, j)] = value;
            }
        }
        g
    }

    /// Frame operator `V Vᵀ`.
    pub fn frame_operator(&self) -> DMatrix<f64> {
        &self.vectors * self.vectors.transpose()
    }

    /// Measures how far the stored vectors are from the exact frame.
    pub fn deviations(&self) -> FrameDeviations {
        let nf = self.n as f64;
        let gram = self.gramian();
        let mut unit_norm: f64 = 0.0;
        let mut inner_product: f64 = 0.0;
        for j in 0..self.len() {
            unit_norm = unit_norm.max((self.vectors.column(j).norm() - 1.0).abs());
            for k in 0..self.len() {
                if j != k {
                    inner_product = inner_product.max((gram[(j, k)] + 1.0 / nf).abs());
                }
            }
        }
        let column_sum = self.vectors.column_sum().amax();
        let target = (nf + 1.0) / nf;
        let frame_op = self.frame_operator();
        let tight = DMatrix::from_fn(self.n, self.n, |i, j| {
            let expected = if i == j { target } else { 0.0 };
            (frame_op[(i, j)] - expected).abs()
        })
        .max();
        FrameDeviations {
            unit_norm,
            inner_product,
            column_sum,
            tight,
        }
    }
}

/// Worst-case deviations from the four frame invariants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameDeviations {
    /// `max_k |‖v_k‖ - 1|`
    pub unit_norm: f64,
    /// `max_{j≠k} |⟨v_j, v_k⟩ + 1/n|`
    pub inner_product: f64,
    /// `max_i |(Σ_k v_k)_i|`
    pub column_sum: f64,
    /// `max_{ij} |(V Vᵀ - (n+1)/n I)_{ij}|`
    pub tight: f64,
}

impl FrameDeviations {
    pub fn within_tolerance(&self) -> bool {
        self.unit_norm <= UNIT_TOL
            && self.inner_product <= UNIT_TOL
            && self.column_sum <= SUM_TOL
            && self.tight <= SUM_TOL
    }
}

#[cfg(test)]
mod tests {
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use super::*;

    #[test]
    fn rejects_small_dimensions() {
        assert!(matches!(SimplexFrame::new(0), Err(Error::InvalidDimension(0))));
        assert!(matches!(SimplexFrame::new(1), Err(Error::InvalidDimension(1))));
    }

    #[test]
    fn last_vector_for_plane() {
        let frame = SimplexFrame::new(2).unwrap();
        let h = -1.0 / 2f64.sqrt();
        assert_abs_diff_eq!(frame.vector(2)[0], h, epsilon = 1e-16);
        assert_abs_diff_eq!(frame.vector(2)[1], h, epsilon = 1e-16);
        assert_abs_diff_eq!(frame.vector(0).dot(&frame.vector(1)), -0.5, epsilon = 1e-15);
    }

    #[test]
    fn vectors_sum_to_zero_in_space() {
        let frame = SimplexFrame::new(3).unwrap();
        let sum = frame.vectors().column_sum();
        assert!(sum.amax() <= SUM_TOL, "{sum}");
    }

    #[test]
    fn gramian_entries() {
        for n in 2..=12 {
            let frame = SimplexFrame::new(n).unwrap();
            let g = frame.gramian();
            assert_eq!(g, g.transpose());
            for j in 0..=n {
                for k in 0..=n {
                    let expected = if j == k { 1.0 } else { -1.0 / n as f64 };
                    assert_abs_diff_eq!(g[(j, k)], expected, epsilon = UNIT_TOL);
                }
            }
        }
    }

    #[test]
    fn gramian_has_rank_n() {
        let frame = SimplexFrame::new(3).unwrap();
        let g = frame.gramian();
        let ones = DVector::from_element(4, 1.0);
        assert!((&g * &ones).amax() < 1e-14);
        let svd = g.svd(false, false);
        assert_eq!(svd.rank(1e-10), 3);
    }

    #[test]
    fn invariants_hold_up_to_twelve() {
        for n in 2..=12 {
            let dev = SimplexFrame::new(n).unwrap().deviations();
            assert!(dev.within_tolerance(), "n = {n}: {dev:?}");
        }
    }

    #[test]
    fn tight_frame_identity_on_random_vectors() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in 2..=12 {
            let frame = SimplexFrame::new(n).unwrap();
            let constant = (n as f64 + 1.0) / n as f64;
            for _ in 0..100 {
                let v = DVector::from_fn(n, |_, _| rng.gen_range(-1.0..1.0)).normalize();
                let energy: f64 = (0..=n).map(|k| frame.vector(k).dot(&v).powi(2)).sum();
                assert!((energy - constant).abs() <= 1e-12 * constant);
            }
        }
    }
}
