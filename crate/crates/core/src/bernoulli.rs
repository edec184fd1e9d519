//! Bernoulli polynomials, the Sobolev reproducing kernels built from them,
//! and the exact Walsh coefficients of `b_r = B_r / r!`.

use std::sync::OnceLock;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::badic::KExpansion;
use crate::error::{Result, WalshError};
use crate::wfunc::{build_w_extra, WCache};

/// Largest supported degree.
pub const BERNOULLI_CAP: usize = 30;

/// `B_r` and `b_r = B_r / r!` with exact rational coefficients (ascending
/// powers of `x`).
#[derive(Debug, Clone, PartialEq)]
pub struct BernoulliPoly {
    r: usize,
    coeffs: Vec<BigRational>,
    normalized: Vec<BigRational>,
}

fn binomial(n: usize, k: usize) -> BigInt {
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

fn factorial(n: usize) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, i| acc * BigInt::from(i))
}

/// Bernoulli numbers `B_0..=B_n` with `B_1 = -1/2`, from
/// `sum_{j=0}^{m} C(m+1, j) B_j = 0`.
pub fn bernoulli_numbers(n: usize) -> Vec<BigRational> {
    let mut out: Vec<BigRational> = Vec::with_capacity(n + 1);
    out.push(BigRational::one());
    for m in 1..=n {
        let s: BigRational = (0..m)
            .map(|j| BigRational::from_integer(binomial(m + 1, j)) * &out[j])
            .fold(BigRational::zero(), |a, t| a + t);
        out.push(-s / BigRational::from_integer(BigInt::from(m + 1)));
    }
    out
}

impl BernoulliPoly {
    pub fn new(r: usize) -> Result<Self> {
        if r > BERNOULLI_CAP {
            return Err(WalshError::BernoulliCap(r, BERNOULLI_CAP));
        }
        let numbers = bernoulli_numbers(r);
        // coefficient of x^i is C(r, i) B_{r-i}
        let coeffs: Vec<BigRational> = (0..=r)
            .map(|i| BigRational::from_integer(binomial(r, i)) * &numbers[r - i])
            .collect();
        let fact = BigRational::from_integer(factorial(r));
        let normalized = coeffs.iter().map(|c| c / &fact).collect();
        Ok(BernoulliPoly { r, coeffs, normalized })
    }

    pub fn degree(&self) -> usize {
        self.r
    }

    /// Coefficients of `B_r`.
    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    /// Coefficients of `b_r = B_r / r!`.
    pub fn normalized(&self) -> &[BigRational] {
        &self.normalized
    }

    pub fn normalized_f64(&self) -> Vec<f64> {
        self.normalized
            .iter()
            .map(|c| c.to_f64().expect("finite coefficient"))
            .collect()
    }

    /// `b_r(x)` in floating point.
    pub fn eval(&self, x: f64) -> f64 {
        horner(&self.normalized_f64(), x)
    }

    /// Exact value of `b_r` at a rational point.
    pub fn eval_exact(&self, x: &BigRational) -> BigRational {
        self.normalized
            .iter()
            .rev()
            .fold(BigRational::zero(), |acc, c| acc * x + c)
    }

    /// Exact derivative coefficients of `b_r`.
    pub fn derivative_exact(&self) -> Vec<BigRational> {
        self.normalized
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, c)| c * BigRational::from_integer(BigInt::from(i)))
            .collect()
    }

    /// Exact `int_0^1 b_r`.
    pub fn integral_exact(&self) -> BigRational {
        self.normalized
            .iter()
            .enumerate()
            .map(|(i, c)| c / BigRational::from_integer(BigInt::from(i + 1)))
            .fold(BigRational::zero(), |a, t| a + t)
    }
}

/// Convenience wrapper for [`BernoulliPoly::new`].
pub fn bernoulli(r: usize) -> Result<BernoulliPoly> {
    BernoulliPoly::new(r)
}

fn horner(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &ci| acc * x + ci)
}

fn table() -> &'static [Vec<f64>] {
    static TABLE: OnceLock<Vec<Vec<f64>>> = OnceLock::new();
    TABLE.get_or_init(|| {
        (0..=BERNOULLI_CAP)
            .map(|r| BernoulliPoly::new(r).expect("within cap").normalized_f64())
            .collect()
    })
}

/// `b_r(x)` from a process-wide coefficient table.
pub fn b_value(r: usize, x: f64) -> Result<f64> {
    table()
        .get(r)
        .map(|c| horner(c, x))
        .ok_or(WalshError::BernoulliCap(r, BERNOULLI_CAP))
}

pub(crate) fn b_value_unchecked(r: usize, x: f64) -> f64 {
    horner(&table()[r], x)
}

/// `b~_alpha(x - y)`: `b_alpha(|x - y|)`, with an extra sign `-1` when
/// `alpha` is odd and `x < y`.
pub fn b_tilde(alpha: usize, x: f64, y: f64) -> Result<f64> {
    if alpha < 1 {
        return Err(WalshError::Config("b~_alpha needs alpha >= 1".into()));
    }
    if alpha > BERNOULLI_CAP {
        return Err(WalshError::BernoulliCap(alpha, BERNOULLI_CAP));
    }
    Ok(b_tilde_unchecked(alpha, x, y))
}

pub(crate) fn b_tilde_unchecked(alpha: usize, x: f64, y: f64) -> f64 {
    let v = b_value_unchecked(alpha, (x - y).abs());
    if alpha % 2 == 1 && x < y {
        -v
    } else {
        v
    }
}

fn check_kernel_order(alpha: usize) -> Result<()> {
    if alpha < 1 {
        return Err(WalshError::Config("kernel needs alpha >= 1".into()));
    }
    if 2 * alpha > BERNOULLI_CAP {
        return Err(WalshError::BernoulliCap(2 * alpha, BERNOULLI_CAP));
    }
    Ok(())
}

fn sign(n: usize) -> f64 {
    if n.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// Reproducing kernel of the unanchored Sobolev space of smoothness `alpha`:
/// `sum_{i=0..alpha} b_i(x) b_i(y) - (-1)^alpha b~_{2 alpha}(x - y)`.
pub fn kernel(alpha: usize, x: f64, y: f64) -> Result<f64> {
    kernel_dx(alpha, 0, x, y)
}

/// `i`-th partial derivative of [`kernel`] in `x` (`i <= alpha`).
pub fn kernel_dx(alpha: usize, i: usize, x: f64, y: f64) -> Result<f64> {
    check_kernel_order(alpha)?;
    if i > alpha {
        return Err(WalshError::OutOfRange(i, format!("derivative order must be <= {alpha}")));
    }
    let smooth: f64 = (i..=alpha)
        .map(|j| b_value_unchecked(j - i, x) * b_value_unchecked(j, y))
        .sum();
    Ok(smooth - sign(alpha) * b_tilde_unchecked(2 * alpha - i, x, y))
}

/// Reproducing kernel of the periodic subspace:
/// `b_alpha(x) b_alpha(y) + (-1)^(alpha + 1) b~_{2 alpha}(x - y)`.
pub fn kernel_per(alpha: usize, x: f64, y: f64) -> Result<f64> {
    kernel_per_dx(alpha, 0, x, y)
}

/// `i`-th partial derivative of [`kernel_per`] in `x`.
pub fn kernel_per_dx(alpha: usize, i: usize, x: f64, y: f64) -> Result<f64> {
    check_kernel_order(alpha)?;
    if i > alpha {
        return Err(WalshError::OutOfRange(i, format!("derivative order must be <= {alpha}")));
    }
    Ok(b_value_unchecked(alpha - i, x) * b_value_unchecked(alpha, y)
        - sign(alpha) * b_tilde_unchecked(2 * alpha - i, x, y))
}

/// `b^_r(k)`: zero when `r < v`, otherwise `(-1)^r I^(r - v)(k)`.
pub fn walsh_coeff_bernoulli(b: u32, k: u64, r: usize) -> Result<Complex64> {
    let e = KExpansion::new(b, k)?;
    if r < e.v() {
        return Ok(Complex64::new(0.0, 0.0));
    }
    Ok(build_w_extra(b, k, r - e.v())?.integral() * sign(r))
}

/// [`walsh_coeff_bernoulli`] drawing the W objects from a shared cache.
pub fn walsh_coeff_bernoulli_cached(cache: &WCache, b: u32, k: u64, r: usize) -> Result<Complex64> {
    let e = KExpansion::new(b, k)?;
    if r < e.v() {
        return Ok(Complex64::new(0.0, 0.0));
    }
    Ok(cache.get_or_build(b, k, r - e.v())?.integral() * sign(r))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn low_degree_polynomials() {
        assert_eq!(bernoulli(0).unwrap().coeffs(), &[q(1, 1)]);
        assert_eq!(bernoulli(1).unwrap().coeffs(), &[q(-1, 2), q(1, 1)]);
        assert_eq!(bernoulli(2).unwrap().coeffs(), &[q(1, 6), q(-1, 1), q(1, 1)]);
        assert_eq!(bernoulli(2).unwrap().normalized(), &[q(1, 12), q(-1, 2), q(1, 2)]);
        assert!(bernoulli(BERNOULLI_CAP + 1).is_err());
    }

    #[test]
    fn exact_identities_up_to_cap() {
        let polys: Vec<BernoulliPoly> = (0..=BERNOULLI_CAP).map(|r| bernoulli(r).unwrap()).collect();
        for r in 1..=BERNOULLI_CAP {
            let d = polys[r].derivative_exact();
            assert_eq!(d.as_slice(), polys[r - 1].normalized(), "b_{r}' != b_{}", r - 1);
            assert!(polys[r].integral_exact().is_zero(), "int b_{r} != 0");
        }
        assert!(polys[0].integral_exact().is_one());
        // b_r(1 - x) = (-1)^r b_r(x) at a few rational points
        for (r, poly) in polys.iter().enumerate() {
            for x in [q(0, 1), q(1, 3), q(2, 7), q(1, 2)] {
                let lhs = poly.eval_exact(&(BigRational::one() - &x));
                let rhs = poly.eval_exact(&x) * BigRational::from_integer(BigInt::from(if r % 2 == 0 { 1 } else { -1 }));
                assert_eq!(lhs, rhs);
            }
        }
    }

    #[test]
    fn b_tilde_examples() {
        assert_abs_diff_eq!(b_tilde(2, 0.4, 0.4).unwrap(), 1.0 / 12.0, epsilon = 1e-16);
        assert_abs_diff_eq!(b_tilde(1, 0.2, 0.7).unwrap(), 0.0, epsilon = 1e-16);
        assert_abs_diff_eq!(b_tilde(1, 0.7, 0.2).unwrap(), 0.0, epsilon = 1e-16);
        assert_abs_diff_eq!(b_tilde(1, 0.1, 0.7).unwrap(), -(0.6 - 0.5), epsilon = 1e-15);
        assert!(b_tilde(0, 0.1, 0.2).is_err());
    }

    #[test]
    fn kernel_examples() {
        // 1 + b_1(0)^2 + b_2(0)
        assert_abs_diff_eq!(kernel(1, 0.0, 0.0).unwrap(), 1.25 + 1.0 / 12.0, epsilon = 1e-15);
        assert_abs_diff_eq!(kernel_per(1, 0.5, 0.5).unwrap(), 1.0 / 12.0, epsilon = 1e-15);
        for i in 0..100 {
            let x = (i as f64 * 0.618_033_988_75).fract();
            let y = (i as f64 * 0.414_213_562_37 + 0.1).fract();
            for alpha in 1..=4 {
                assert_abs_diff_eq!(kernel(alpha, x, y).unwrap(), kernel(alpha, y, x).unwrap(), epsilon = 1e-13);
                assert_abs_diff_eq!(kernel_per(alpha, x, y).unwrap(), kernel_per(alpha, y, x).unwrap(), epsilon = 1e-13);
            }
        }
        assert!(kernel(0, 0.1, 0.2).is_err());
    }

    #[test]
    fn bernoulli_coefficient_examples() {
        assert_eq!(walsh_coeff_bernoulli(2, 3, 1).unwrap(), Complex64::new(0.0, 0.0));
        assert_abs_diff_eq!(walsh_coeff_bernoulli(2, 1, 1).unwrap().re, -0.25, epsilon = 1e-16);
        assert_abs_diff_eq!(walsh_coeff_bernoulli(2, 1, 2).unwrap().norm(), 0.0, epsilon = 1e-17);
        let cache = WCache::new();
        for k in 1..27 {
            for r in 1..5 {
                assert_eq!(
                    walsh_coeff_bernoulli(3, k, r).unwrap(),
                    walsh_coeff_bernoulli_cached(&cache, 3, k, r).unwrap()
                );
            }
        }
    }
}
