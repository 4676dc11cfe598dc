//! The two-level matching polynomial for even `d`.
//!
//! Two barycentric levels `s` (on `k1` indices) and `u = (1 - k1 s)/k2` (on
//! `k2` indices) solve the eigen-system exactly when `p(s) = p(u)`, i.e. when
//! `s` is a zero of
//!
//! ```text
//! r(s) = p(s) - p((1 - k1 s) / k2).
//! ```
//!
//! Since `p` is a polynomial of degree `d - 2`, so is `r`. Multiplying by
//! `k2^{d-2}` clears denominators, so the monomial coefficients are exact
//! integers. Root isolation works on the square-free part of that integer
//! polynomial and decides signs exactly, so multiple roots are located to the
//! last bit like simple ones.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Float, One, Signed, ToPrimitive, Zero};

use super::scalar::ScalarFunctions;
use crate::{Error, Result};

/// Grid points per unit of degree for the sign-change scan.
const GRID_PER_DEGREE: usize = 64;
/// Roots closer than this to either end of `(0, s*)` are discarded.
pub const BOUNDARY_TOL: f64 = 1e-12;

/// `k2^{d-2} · r(s)` in monomial form.
#[derive(Debug, Clone)]
pub struct TwoLevelPolynomial {
    f: ScalarFunctions,
    k1: usize,
    k2: usize,
    exact: Vec<BigInt>,
}

impl TwoLevelPolynomial {
    pub fn new(f: ScalarFunctions, k1: usize, k2: usize) -> Result<Self> {
        if k1 == 0 || k2 == 0 || k1 + k2 > f.n() {
            return Err(Error::Domain(format!(
                "level sizes ({k1}, {k2}) must be positive with k1 + k2 <= n = {}",
                f.n()
            )));
        }
        Ok(Self {
            f,
            k1,
            k2,
            exact: exact_coefficients(f, k1, k2),
        })
    }

    pub fn level_sizes(&self) -> (usize, usize) {
        (self.k1, self.k2)
    }

    /// Monomial coefficients of `r` itself, lowest degree first.
    pub fn coefficients(&self) -> Vec<f64> {
        let scale = (self.k2 as f64).powi(self.f.d() as i32 - 2);
        self.exact
            .iter()
            .map(|c| c.to_f64().unwrap_or(f64::NAN) / scale)
            .collect()
    }

    /// Exact integer coefficients of `k2^{d-2} r`, lowest degree first.
    pub fn exact_coefficients(&self) -> &[BigInt] {
        &self.exact
    }

    /// True when `r` vanishes identically.
    pub fn is_zero(&self) -> bool {
        self.exact.iter().all(Zero::is_zero)
    }

    /// `r(s)`, using the cancellation-free form of `p`.
    pub fn eval(&self, s: f64) -> f64 {
        let u = (1.0 - self.k1 as f64 * s) / self.k2 as f64;
        self.f.p(s) - self.f.p(u)
    }

    /// Horner evaluation of the monomial form; used to cross-check [`Self::eval`].
    pub fn eval_monomial(&self, s: f64) -> f64 {
        self.coefficients().iter().rev().fold(0.0, |acc, &c| acc * s + c)
    }
}

fn binomial(n: usize, k: usize) -> BigInt {
    let k = k.min(n.saturating_sub(k));
    (0..k).fold(BigInt::one(), |acc, i| acc * (n - i) / (i + 1))
}

/// Coefficients `c_j` of `p(s) = Σ_j c_j s^j`.
fn p_coefficients(f: ScalarFunctions) -> Vec<BigInt> {
    let (n, d) = (f.n(), f.d());
    let m = d - 2;
    (0..=m)
        .map(|j| {
            let c = binomial(d - 1, j + 1) * BigInt::from(n + 1).pow(j as u32 + 1);
            if (m - j) % 2 == 0 {
                c
            } else {
                -c
            }
        })
        .collect()
}

fn exact_coefficients(f: ScalarFunctions, k1: usize, k2: usize) -> Vec<BigInt> {
    let m = f.d() - 2;
    let k1 = BigInt::from(k1);
    let k2 = BigInt::from(k2);
    let mut out = vec![BigInt::zero(); m + 1];
    for (j, cj) in p_coefficients(f).iter().enumerate() {
        out[j] += cj * k2.pow(m as u32);
        // - c_j k2^{m-j} (1 - k1 s)^j
        let outer = cj * k2.pow((m - j) as u32);
        for (i, slot) in out.iter_mut().enumerate().take(j + 1) {
            let term = binomial(j, i) * k1.pow(i as u32) * &outer;
            if i % 2 == 0 {
                *slot -= term;
            } else {
                *slot += term;
            }
        }
    }
    out
}

fn trim(mut c: Vec<BigInt>) -> Vec<BigInt> {
    while c.len() > 1 && c.last().is_some_and(Zero::is_zero) {
        c.pop();
    }
    c
}

/// Divides out the content and makes the leading coefficient positive.
fn primitive(c: Vec<BigInt>) -> Vec<BigInt> {
    let g = c.iter().fold(BigInt::zero(), |g, v| g.gcd(v));
    if g.is_zero() {
        return c;
    }
    let g = if c.last().is_some_and(Signed::is_negative) { -g } else { g };
    c.into_iter().map(|v| v / &g).collect()
}

fn is_zero_poly(c: &[BigInt]) -> bool {
    c.iter().all(Zero::is_zero)
}

/// Pseudo-remainder of `a` by `b`, made primitive.
fn pseudo_remainder(a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
    let lead = &b[b.len() - 1];
    let mut r = a.to_vec();
    while r.len() >= b.len() && !is_zero_poly(&r) {
        let shift = r.len() - b.len();
        let top = r[r.len() - 1].clone();
        for (i, v) in r.iter_mut().enumerate() {
            *v *= lead;
            if i >= shift {
                *v -= &top * &b[i - shift];
            }
        }
        r.pop();
        r = primitive(trim(r));
    }
    r
}

/// `a / b` when `b` divides `a` exactly.
fn exact_quotient(a: &[BigInt], b: &[BigInt]) -> Option<Vec<BigInt>> {
    let lead = &b[b.len() - 1];
    let mut r = a.to_vec();
    let mut q = vec![BigInt::zero(); a.len().checked_sub(b.len())? + 1];
    for shift in (0..q.len()).rev() {
        let (factor, rem) = r[shift + b.len() - 1].div_rem(lead);
        if !rem.is_zero() {
            return None;
        }
        for (i, bv) in b.iter().enumerate() {
            r[shift + i] -= &factor * bv;
        }
        q[shift] = factor;
    }
    is_zero_poly(&r).then_some(q)
}

/// `c / gcd(c, c')`: the same real roots, all of them simple.
fn square_free_part(c: &[BigInt]) -> Vec<BigInt> {
    let c = primitive(trim(c.to_vec()));
    if c.len() <= 2 {
        return c;
    }
    let derivative: Vec<BigInt> = c.iter().enumerate().skip(1).map(|(i, v)| v * i).collect();
    let (mut a, mut b) = (c.clone(), primitive(trim(derivative)));
    while !is_zero_poly(&b) {
        if b.len() == 1 {
            return c;
        }
        let r = pseudo_remainder(&a, &b);
        a = b;
        b = r;
    }
    if a.len() == 1 {
        return c;
    }
    exact_quotient(&c, &a).map(primitive).unwrap_or(c)
}

/// Exact sign of `Σ c_i x^i` at a finite `x`.
fn sign_at(c: &[BigInt], x: f64) -> i8 {
    let (mantissa, exponent, sign) = x.integer_decode();
    // x = num / 2^shift exactly
    let (num, shift) = if exponent >= 0 {
        (BigInt::from(mantissa) << exponent as usize, 0usize)
    } else {
        (BigInt::from(mantissa), (-exponent) as usize)
    };
    let num = if sign < 0 { -num } else { num };
    // 2^{shift·deg} Σ c_i x^i = Σ c_i num^i 2^{shift (deg - i)}
    let mut acc = c[c.len() - 1].clone();
    let mut scale = 0usize;
    for ci in c.iter().rev().skip(1) {
        scale += shift;
        acc = acc * &num + (ci << scale);
    }
    match acc.sign() {
        num_bigint::Sign::Minus => -1,
        num_bigint::Sign::NoSign => 0,
        num_bigint::Sign::Plus => 1,
    }
}

/// Real zeros of `r` strictly inside `(0, s*)`.
#[derive(Debug, Clone, PartialEq)]
pub enum RootsOfR {
    /// `r ≡ 0`; happens for `d = 4` with `k1 = k2 = k` and `n + 1 = 3k`.
    Degenerate,
    Roots(Vec<f64>),
}

/// Isolates the zeros of `r` in `(0, s*)`. The square-free part of `r` is
/// scanned for sign changes on a uniform grid, and each bracket is bisected
/// with exact sign evaluation down to adjacent floats.
pub fn roots_of_r(f: ScalarFunctions, k1: usize, k2: usize) -> Result<RootsOfR> {
    let s_star = f.s_star()?;
    let poly = TwoLevelPolynomial::new(f, k1, k2)?;
    if poly.is_zero() {
        return Ok(RootsOfR::Degenerate);
    }
    let square_free = square_free_part(poly.exact_coefficients());
    let sign = |x: f64| sign_at(&square_free, x);
    let cells = GRID_PER_DEGREE * (f.d() - 1);
    let xs: Vec<f64> = (0..=cells)
        .map(|i| s_star * i as f64 / cells as f64)
        .collect();
    let signs: Vec<i8> = xs.iter().map(|&x| sign(x)).collect();

    let mut roots = Vec::new();
    for i in 0..=cells {
        if signs[i] == 0 {
            roots.push(xs[i]);
            continue;
        }
        if i > 0 && signs[i - 1] != 0 && signs[i - 1] != signs[i] {
            roots.push(bisect(sign, xs[i - 1], xs[i], signs[i - 1]));
        }
    }
    roots.retain(|&r| r > BOUNDARY_TOL && r < s_star - BOUNDARY_TOL);
    Ok(RootsOfR::Roots(roots))
}

fn bisect(sign: impl Fn(f64) -> i8, mut lo: f64, mut hi: f64, sign_lo: i8) -> f64 {
    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        match sign(mid) {
            0 => return mid,
            s if s == sign_lo => lo = mid,
            _ => hi = mid,
        }
    }
    0.5 * (lo + hi)
}
