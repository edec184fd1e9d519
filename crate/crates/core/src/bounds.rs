//! Upper bounds on Walsh coefficients and on the W functions, as plain
//! evaluators of `(b, k, alpha, norms)`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::badic::{BaseConstants, KExpansion};
use crate::error::{Result, WalshError};
use crate::functions::SmoothFunction;

/// Tolerance for the vanishing lower integrals of a periodic input.
pub const PERIODIC_TOL: f64 = 1e-10;

/// Which argument the factor `C_{b,n}` receives in the smooth bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CArg {
    /// `n = min(alpha, v)`.
    #[default]
    MinAlphaV,
    /// `n = v`.
    V,
}

fn pow_b(b: u32, e: f64) -> f64 {
    (b as f64).powf(e)
}

fn check_p(p: f64) -> Result<()> {
    if p.is_nan() || p < 1.0 {
        return Err(WalshError::InvalidExponent(format!("p = {p} must lie in [1, inf]")));
    }
    Ok(())
}

/// `1 / p` with `1 / inf = 0`.
fn recip(p: f64) -> f64 {
    if p.is_infinite() {
        0.0
    } else {
        1.0 / p
    }
}

/// Hölder conjugate of `p`.
pub fn conjugate(p: f64) -> Result<f64> {
    check_p(p)?;
    Ok(if p == 1.0 {
        f64::INFINITY
    } else if p.is_infinite() {
        1.0
    } else {
        p / (p - 1.0)
    })
}

/// Per-coordinate factor of the smooth bound, without the norm.
fn smooth_factor(c: &BaseConstants, e: &KExpansion, alpha: usize, p: f64, carg: CArg) -> Result<f64> {
    check_p(p)?;
    let b = c.base;
    let v = e.v();
    let n = alpha.min(v);
    let mu_a = e.mu_alpha(alpha) as f64;
    let on = v.min(1) as i32;
    if b == 2 {
        return Ok(pow_b(2, -mu_a - n as f64 + on as f64 * recip(p)));
    }
    if p != 1.0 {
        return Err(WalshError::InvalidExponent(format!(
            "p = {p}: for b > 2 the smooth bound is stated for the L1 norm only (use p = 1)"
        )));
    }
    let arg = match carg {
        CArg::MinAlphaV => n,
        CArg::V => v,
    };
    Ok(pow_b(b, -mu_a) / c.min_gap.powi(n as i32) * (c.max_gap + c.c_factor(arg)?).powi(on))
}

/// Bound for `f` in `C^alpha`: with `n = min(alpha, v)`,
/// `||f^(n)||_1 b^-mu_alpha / m_b^n (M_b + C_{b,n})^min(1,v)` for `b > 2`
/// and `||f^(n)||_p 2^(-mu_alpha - n + min(1,v)/p)` for `b = 2`.
/// `norm_value` is the norm of `f^(min(alpha, v))`.
pub fn bound_smooth(b: u32, k: u64, alpha: usize, norm_value: f64, p: f64) -> Result<f64> {
    bound_smooth_with(b, k, alpha, norm_value, p, CArg::MinAlphaV)
}

pub fn bound_smooth_with(b: u32, k: u64, alpha: usize, norm_value: f64, p: f64, carg: CArg) -> Result<f64> {
    let c = BaseConstants::new(b)?;
    let e = KExpansion::new(b, k)?;
    Ok(norm_value * smooth_factor(&c, &e, alpha, p, carg)?)
}

/// Product of the per-coordinate factors of [`bound_smooth`] times the
/// norm of the mixed partial `f^(n_1, ..., n_s)`, `n_j = min(alpha_j, v(k_j))`.
pub fn bound_smooth_multi(b: u32, ks: &[u64], alphas: &[usize], norm_value: f64, p: f64) -> Result<f64> {
    bound_smooth_multi_with(b, ks, alphas, norm_value, p, CArg::MinAlphaV)
}

pub fn bound_smooth_multi_with(
    b: u32,
    ks: &[u64],
    alphas: &[usize],
    norm_value: f64,
    p: f64,
    carg: CArg,
) -> Result<f64> {
    if ks.len() != alphas.len() {
        return Err(WalshError::DimensionMismatch(ks.len(), alphas.len()));
    }
    let c = BaseConstants::new(b)?;
    ks.iter().zip(alphas).try_fold(norm_value, |acc, (&k, &a)| {
        Ok(acc * smooth_factor(&c, &KExpansion::new(b, k)?, a, p, carg)?)
    })
}

/// Decay bound for infinitely differentiable `f` with
/// `||f^(n)||_1 <= D prod_j r_j^(n_j)`:
/// `D b^-mu(k) prod_j (r_j / m_b)^v(k_j) C_b^min(1, v(k_j))`.
pub fn bound_c_infty(b: u32, ks: &[u64], rates: &[f64], d: f64) -> Result<f64> {
    if ks.len() != rates.len() {
        return Err(WalshError::DimensionMismatch(ks.len(), rates.len()));
    }
    if d <= 0.0 || rates.iter().any(|&r| r <= 0.0) {
        return Err(WalshError::Config("D and every rate must be positive".into()));
    }
    let c = BaseConstants::new(b)?;
    let cb = c.c_infinity();
    ks.iter().zip(rates).try_fold(d, |acc, (&k, &r)| {
        let e = KExpansion::new(b, k)?;
        let v = e.v() as i32;
        Ok(acc * pow_b(b, -(e.mu() as f64)) * (r / c.min_gap).powi(v) * cb.powi(v.min(1)))
    })
}

/// Outcome of the Bernoulli coefficient bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", content = "value", rename_all = "kebab-case")]
pub enum BernoulliBound {
    ExactZero,
    Bound(f64),
}

impl BernoulliBound {
    pub fn value(&self) -> f64 {
        match self {
            BernoulliBound::ExactZero => 0.0,
            BernoulliBound::Bound(v) => *v,
        }
    }
}

/// Bound on `|b^_r(k)|`: zero when `r < v` or (`b = 2`, `r - v` odd),
/// `2^(-mu'_r - r)` for `b = 2`, `b^-mu'_r / m_b^r (1 + C_{b,v})` otherwise.
pub fn bound_bernoulli(b: u32, k: u64, r: usize) -> Result<BernoulliBound> {
    let c = BaseConstants::new(b)?;
    let e = KExpansion::new(b, k)?;
    if e.is_zero() {
        return Err(WalshError::ZeroIndex);
    }
    if r == 0 {
        return Err(WalshError::OutOfRange(0, "r must be >= 1".into()));
    }
    let v = e.v();
    if r < v || (b == 2 && (r - v) % 2 == 1) {
        return Ok(BernoulliBound::ExactZero);
    }
    let mu = e.mu_per(r) as f64;
    Ok(BernoulliBound::Bound(if b == 2 {
        pow_b(2, -mu - r as f64)
    } else {
        pow_b(b, -mu) / c.min_gap.powi(r as i32) * (1.0 + c.c_factor(v)?)
    }))
}

/// Bound for `f` in the Sobolev space of smoothness `alpha`.
/// `integrals[i] = int f^(i)` for `i = 0..=alpha`, `l1_falpha = int |f^(alpha)|`.
pub fn bound_sobolev(b: u32, k: u64, alpha: usize, integrals: &[Complex64], l1_falpha: f64) -> Result<f64> {
    let c = BaseConstants::new(b)?;
    let e = KExpansion::new(b, k)?;
    if e.is_zero() {
        return Err(WalshError::ZeroIndex);
    }
    if alpha == 0 {
        return Err(WalshError::OutOfRange(0, "alpha must be >= 1".into()));
    }
    if integrals.len() < alpha + 1 {
        return Err(WalshError::InsufficientDerivatives {
            needed: alpha + 1,
            available: integrals.len(),
        });
    }
    let v = e.v();
    let mut sum = 0.0;
    if b == 2 {
        for i in (v..=alpha).step_by(2) {
            sum += integrals[i].norm() * pow_b(2, -(e.mu_per(i) as f64) - i as f64);
        }
        sum += l1_falpha * pow_b(2, -(e.mu_per(alpha) as f64) - (alpha as f64 - 1.0));
    } else {
        let cv = c.c_factor(v)?;
        for (i, int) in integrals.iter().enumerate().take(alpha + 1).skip(v) {
            sum += int.norm() * pow_b(b, -(e.mu_per(i) as f64)) / c.min_gap.powi(i as i32) * (1.0 + cv);
        }
        sum += l1_falpha * pow_b(b, -(e.mu_per(alpha) as f64)) / c.min_gap.powi(alpha as i32) * (c.max_gap + cv);
    }
    Ok(sum)
}

/// `C_{b,alpha,q}`; `q = inf` takes the largest term.
pub fn c_sob_constant(b: u32, alpha: usize, q: f64) -> Result<f64> {
    check_p(q)?;
    if alpha == 0 {
        return Err(WalshError::OutOfRange(0, "alpha must be >= 1".into()));
    }
    let c = BaseConstants::new(b)?;
    let terms: Vec<f64> = if b == 2 {
        (1..=alpha)
            .map(|i| pow_b(2, -(i as f64)))
            .chain(std::iter::once(pow_b(2, -(alpha as f64 - 1.0))))
            .collect()
    } else {
        let lim = c.c_factor_limit()?;
        (1..=alpha)
            .map(|i| (1.0 + lim) / c.min_gap.powi(i as i32))
            .chain(std::iter::once((c.max_gap + lim) / c.min_gap.powi(alpha as i32)))
            .collect()
    };
    Ok(lp_combine(&terms, q))
}

fn lp_combine(terms: &[f64], q: f64) -> f64 {
    if q.is_infinite() {
        terms.iter().cloned().fold(0.0, f64::max)
    } else {
        terms.iter().map(|t| t.powf(q)).sum::<f64>().powf(1.0 / q)
    }
}

/// `||f||_{p,alpha} = (sum_{i=0..alpha} |int f^(i)|^p + int |f^(alpha)|^p)^(1/p)`;
/// `p = inf` takes the maximum of the terms with `||f^(alpha)||_inf`.
pub fn f_norm_p_alpha(f: &dyn SmoothFunction, p: f64, alpha: usize) -> Result<f64> {
    check_p(p)?;
    if f.order() < alpha {
        return Err(WalshError::InsufficientDerivatives {
            needed: alpha,
            available: f.order(),
        });
    }
    let mut terms: Vec<f64> = (0..=alpha).map(|i| f.integral_of_deriv(i).norm()).collect();
    terms.push(f.lp_norm_of_deriv(alpha, p));
    Ok(lp_combine(&terms, p))
}

/// `b^-mu_alpha(k) C_{b,alpha,q} ||f||_{p,alpha}` with `q` conjugate to `p`.
pub fn bound_sobolev_simple(b: u32, k: u64, alpha: usize, p: f64, f_norm: f64) -> Result<f64> {
    let q = conjugate(p)?;
    let e = KExpansion::new(b, k)?;
    Ok(pow_b(b, -(e.mu_alpha(alpha) as f64)) * c_sob_constant(b, alpha, q)? * f_norm)
}

/// Bound for the periodic subspace:
/// `l1 b^-mu'_alpha / m_b^alpha M_b (1 + C_{b,v})` for `b > 2`,
/// `l1 2^-mu'_alpha / 2^(alpha - 1)` for `b = 2`.
/// When `integrals` is given, `int f^(i)` must vanish for `i < alpha`.
pub fn bound_periodic(b: u32, k: u64, alpha: usize, l1_falpha: f64, integrals: Option<&[Complex64]>) -> Result<f64> {
    if let Some(ints) = integrals {
        for (i, v) in ints.iter().enumerate().take(alpha) {
            if v.norm() > PERIODIC_TOL {
                return Err(WalshError::NotPeriodic(i, v.norm()));
            }
        }
    }
    if alpha == 0 {
        return Err(WalshError::OutOfRange(0, "alpha must be >= 1".into()));
    }
    let c = BaseConstants::new(b)?;
    let e = KExpansion::new(b, k)?;
    if e.is_zero() {
        return Err(WalshError::ZeroIndex);
    }
    let mu = e.mu_per(alpha) as f64;
    Ok(if b == 2 {
        l1_falpha * pow_b(2, -mu - (alpha as f64 - 1.0))
    } else {
        l1_falpha * pow_b(b, -mu) / c.min_gap.powi(alpha as i32) * c.max_gap * (1.0 + c.c_factor(e.v())?)
    })
}

/// `||W_k||_inf` bound: `b^-mu / m_b^v (M_b + C_{b,v})^min(1,v)` for
/// `b > 2`, the exact value `2^(-mu - v + min(1,v))` for `b = 2`.
pub fn bound_w_sup(b: u32, k: u64) -> Result<f64> {
    let c = BaseConstants::new(b)?;
    let e = KExpansion::new(b, k)?;
    let v = e.v() as i32;
    let mu = e.mu() as f64;
    Ok(if b == 2 {
        pow_b(2, -mu - v as f64 + v.min(1) as f64)
    } else {
        pow_b(b, -mu) / c.min_gap.powi(v) * (c.max_gap + c.c_factor(e.v())?).powi(v.min(1))
    })
}

/// Bound on `sup |W_k|` over `[0, b^-a_v]` for `b > 2`, `k >= 1`:
/// `b^-mu / m_b^(v-1) b / (b - M_b) (1 - (M_b / b)^v)`.
pub fn bound_w_base_interval(b: u32, k: u64) -> Result<f64> {
    let c = BaseConstants::new(b)?;
    if b < 3 {
        return Err(WalshError::UnsupportedBase(b, "base-interval bound needs b >= 3"));
    }
    let e = KExpansion::new(b, k)?;
    if e.is_zero() {
        return Err(WalshError::ZeroIndex);
    }
    let v = e.v() as i32;
    let bf = b as f64;
    Ok(pow_b(b, -(e.mu() as f64)) / c.min_gap.powi(v - 1) * bf / (bf - c.max_gap)
        * (1.0 - (c.max_gap / bf).powi(v)))
}

/// Bounds on the higher-order family at order `j` for `k >= 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WExtraBounds {
    /// On `||W^(j) - I^(j)||_inf`.
    pub centred: f64,
    /// On `|I^(j)|` (`None` for `b > 2`, `j = 0`).
    pub integral: Option<f64>,
    /// On `||W^(j)||_inf` (`None` for `b > 2`, `j = 0`).
    pub sup: Option<f64>,
    /// `I^(j)(k) = 0` exactly (dyadic, odd `j`).
    pub integral_zero: bool,
}

pub fn bound_w_extra(b: u32, k: u64, j: usize) -> Result<WExtraBounds> {
    let c = BaseConstants::new(b)?;
    let e = KExpansion::new(b, k)?;
    if e.is_zero() {
        return Err(WalshError::ZeroIndex);
    }
    let v = e.v();
    let mu = e.mu() as f64;
    let av = e.a_last() as f64;
    let jf = j as f64;
    if b == 2 {
        let base = pow_b(2, -jf * (av + 1.0) - mu - v as f64);
        return Ok(WExtraBounds {
            centred: base,
            integral: Some(base),
            sup: Some(2.0 * base),
            integral_zero: j % 2 == 1,
        });
    }
    let base = pow_b(b, -mu - jf * av) / c.min_gap.powi((v + j) as i32) * (1.0 + c.c_factor(v)?);
    Ok(WExtraBounds {
        centred: base,
        integral: (j >= 1).then_some(base),
        sup: (j >= 1).then_some(base * c.max_gap),
        integral_zero: false,
    })
}
