//! The scalar auxiliaries of the barycentric reduction.
//!
//! For `s ∈ ℝ`:
//!
//! ```text
//! g(s) = ((n+1)s - 1)^{d-1} - (-1)^{d-1}
//! p(s) = g(s) / s
//! ```
//!
//! A convex combination `Σ_{k≤n} s_k v_k` is an eigenvector exactly when
//! `s_k Σ_j g(s_j) = g(s_k)` for every `k`; `h` collects those residuals.

use crate::{Error, Result};

const S_STAR_TOL: f64 = 1e-14;

/// `g`, `p` and `h` for a fixed `(n, d)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ScalarFunctions {
    n: usize,
    d: usize,
}

impl ScalarFunctions {
    pub fn new(n: usize, d: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidDimension(n));
        }
        if d < 2 {
            return Err(Error::InvalidOrder(d));
        }
        let f = Self { n, d };
        debug_assert_eq!(f.g(0.0), 0.0);
        Ok(f)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    fn np1(&self) -> f64 {
        self.n as f64 + 1.0
    }

    fn sign_dm1(&self) -> f64 {
        if (self.d - 1).is_multiple_of(2) {
            1.0
        } else {
            -1.0
        }
    }

    /// `g(s) = ((n+1)s - 1)^{d-1} - (-1)^{d-1}`.
    pub fn g(&self, s: f64) -> f64 {
        (self.np1() * s - 1.0).powi(self.d as i32 - 1) - self.sign_dm1()
    }

    /// `g'(s) = (d-1)(n+1)((n+1)s - 1)^{d-2}`.
    pub fn g_prime(&self, s: f64) -> f64 {
        (self.d - 1) as f64 * self.np1() * (self.np1() * s - 1.0).powi(self.d as i32 - 2)
    }

    /// `p(s) = g(s)/s`, evaluated without the division as
    /// `(n+1) Σ_{i=0}^{d-2} x^i (-1)^{d-2-i}` with `x = (n+1)s - 1`.
    pub fn p(&self, s: f64) -> f64 {
        let x = self.np1() * s - 1.0;
        // Horner, leading coefficient +1, signs alternating downwards.
        let mut acc = 1.0;
        let mut sign = 1.0;
        for _ in 0..self.d - 2 {
            sign = -sign;
            acc = acc * x + sign;
        }
        self.np1() * acc
    }

    /// `p'(s) = (g'(s) s - g(s)) / s²`; only the sign of the numerator is
    /// used by [`Self::s_star`].
    fn p_prime_numerator(&self, s: f64) -> f64 {
        self.g_prime(s) * s - self.g(s)
    }

    /// `p'(s)` via the derivative of the geometric sum.
    pub fn p_prime(&self, s: f64) -> f64 {
        let x = self.np1() * s - 1.0;
        let m = self.d - 2;
        let mut acc = 0.0;
        for i in (1..=m).rev() {
            let sign = if (m - i).is_multiple_of(2) { 1.0 } else { -1.0 };
            acc = acc * x + sign * i as f64;
        }
        self.np1() * self.np1() * acc
    }

    /// The unique minimizer of `p` on `(0, ∞)` for even `d >= 4`, located in
    /// `[1/n, 2/(n+1))`. Found by bisection on the sign of `p'` over
    /// `[1/(n+1), 2/(n+1)]`.
    pub fn s_star(&self) -> Result<f64> {
        if self.d < 4 || self.d % 2 == 1 {
            return Err(Error::Domain(format!(
                "s* is only defined for even d >= 4, got d = {}",
                self.d
            )));
        }
        let mut lo = 1.0 / self.np1();
        let mut hi = 2.0 / self.np1();
        debug_assert!(self.p_prime_numerator(lo) < 0.0);
        debug_assert!(self.p_prime_numerator(hi) > 0.0);
        while hi - lo > S_STAR_TOL {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.p_prime_numerator(mid) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }

    /// Residual vector `h(s)` for reduced coordinates `s = (s_1, …, s_{n-1})`;
    /// `s_n = 1 - Σ s_k` is implied.
    pub fn h(&self, reduced: &[f64]) -> Vec<f64> {
        assert_eq!(reduced.len(), self.n - 1);
        let last = 1.0 - reduced.iter().sum::<f64>();
        let total: f64 = reduced.iter().map(|&s| self.g(s)).sum::<f64>() + self.g(last);
        reduced.iter().map(|&s| s * total - self.g(s)).collect()
    }

    /// Eigenvalue of the unnormalized vector `Σ_{k≤n} s_k v_k` for full
    /// barycentric coordinates: `μ = n^{1-d} Σ_k g(s_k)`.
    pub fn barycentric_eigenvalue(&self, full: &[f64]) -> f64 {
        let total: f64 = full.iter().map(|&s| self.g(s)).sum();
        total / (self.n as f64).powi(self.d as i32 - 1)
    }
}
