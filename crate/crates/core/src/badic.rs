//! Integer b-adic digit machinery and the scalar constants of a base.
//!
//! A nonnegative integer `k` is written as
//! `k = kappa_1 b^(a_1 - 1) + ... + kappa_v b^(a_v - 1)` with nonzero digits
//! `kappa_i` and strictly decreasing positions `a_1 > ... > a_v >= 1`.
//! Everything downstream (Walsh functions, the weight functions, the decay
//! exponents) is phrased in terms of these digit/position pairs.

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Result, WalshError};

/// One nonzero digit of a b-adic expansion: `kappa * b^(a - 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Digit {
    pub kappa: u32,
    pub a: u32,
}

/// The b-adic digit decomposition of `k`, largest position first.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct KExpansion {
    base: u32,
    k: u64,
    digits: Vec<Digit>,
}

/// `b^e`, or `None` on overflow.
pub fn checked_pow(b: u32, e: u32) -> Option<u64> {
    (b as u64).checked_pow(e)
}

pub(crate) fn check_base(b: u32) -> Result<()> {
    if b < 2 {
        Err(WalshError::InvalidBase(b))
    } else {
        Ok(())
    }
}

impl KExpansion {
    /// Expands `k` in base `b`.
    pub fn new(b: u32, k: u64) -> Result<Self> {
        check_base(b)?;
        let mut digits = Vec::new();
        let mut rest = k;
        let mut pos = 1u32;
        while rest > 0 {
            let d = (rest % b as u64) as u32;
            if d != 0 {
                digits.push(Digit { kappa: d, a: pos });
            }
            rest /= b as u64;
            pos += 1;
        }
        digits.reverse();
        Ok(KExpansion { base: b, k, digits })
    }

    fn from_digits(base: u32, digits: Vec<Digit>) -> Self {
        let k = digits
            .iter()
            .map(|d| d.kappa as u64 * (base as u64).pow(d.a - 1))
            .sum();
        KExpansion { base, k, digits }
    }

    pub fn base(&self) -> u32 {
        self.base
    }

    pub fn k(&self) -> u64 {
        self.k
    }

    pub fn digits(&self) -> &[Digit] {
        &self.digits
    }

    /// Hamming weight: the number of nonzero digits.
    pub fn v(&self) -> usize {
        self.digits.len()
    }

    pub fn is_zero(&self) -> bool {
        self.digits.is_empty()
    }

    /// Largest position `a_1` (0 for `k = 0`).
    pub fn a_first(&self) -> u32 {
        self.digits.first().map_or(0, |d| d.a)
    }

    /// Smallest position `a_v` (0 for `k = 0`).
    pub fn a_last(&self) -> u32 {
        self.digits.last().map_or(0, |d| d.a)
    }

    /// Digit attached to the smallest position.
    pub fn kappa_last(&self) -> Option<u32> {
        self.digits.last().map(|d| d.kappa)
    }

    /// Sum of digit contributions; equals `k` for every valid expansion.
    pub fn reconstruct(&self) -> u64 {
        self.digits
            .iter()
            .map(|d| d.kappa as u64 * (self.base as u64).pow(d.a - 1))
            .sum()
    }

    /// `k' = k - kappa_v b^(a_v - 1)`.
    pub fn drop_smallest(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(WalshError::ZeroIndex);
        }
        let mut digits = self.digits.clone();
        digits.pop();
        Ok(Self::from_digits(self.base, digits))
    }

    /// The `n` largest digits, `k_{<=n}`.
    pub fn truncate_low(&self, n: usize) -> Self {
        let n = n.min(self.v());
        Self::from_digits(self.base, self.digits[..n].to_vec())
    }

    /// The digits after the `n` largest, `k_{>n}`.
    pub fn tail_high(&self, n: usize) -> Self {
        let n = n.min(self.v());
        Self::from_digits(self.base, self.digits[n..].to_vec())
    }

    /// `mu(k) = a_1 + ... + a_v`.
    pub fn mu(&self) -> u64 {
        self.digits.iter().map(|d| d.a as u64).sum()
    }

    /// `mu_alpha(k)`: sum of the `min(alpha, v)` largest positions.
    pub fn mu_alpha(&self, alpha: usize) -> u64 {
        self.digits.iter().take(alpha).map(|d| d.a as u64).sum()
    }

    /// Periodic-space weight: `mu(k) + (alpha - v) a_v` when `v <= alpha`,
    /// otherwise `mu_alpha(k)`.
    pub fn mu_per(&self, alpha: usize) -> u64 {
        let v = self.v();
        if v == 0 {
            0
        } else if v <= alpha {
            self.mu() + (alpha - v) as u64 * self.a_last() as u64
        } else {
            self.mu_alpha(alpha)
        }
    }
}

impl fmt::Display for KExpansion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} = [", self.k)?;
        for (i, d) in self.digits.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "({}, {})", d.kappa, d.a)?;
        }
        write!(f, "]_{}", self.base)
    }
}

/// Powers of the conjugate root of unity `conj(omega_b)^c`, tabulated once.
#[derive(Debug, Clone)]
pub struct RootTable {
    base: u32,
    conj_powers: Vec<Complex64>,
}

impl RootTable {
    pub fn new(b: u32) -> Result<Self> {
        check_base(b)?;
        let conj_powers = (0..b)
            .map(|c| unit_root(b, c).conj())
            .collect();
        Ok(RootTable { base: b, conj_powers })
    }

    pub fn base(&self) -> u32 {
        self.base
    }

    /// `conj(omega_b)^e`.
    #[inline]
    pub fn conj_pow(&self, e: u64) -> Complex64 {
        self.conj_powers[(e % self.base as u64) as usize]
    }

    /// `omega_b^e`.
    #[inline]
    pub fn pow(&self, e: u64) -> Complex64 {
        self.conj_pow(e).conj()
    }
}

/// `exp(2 pi i c / b)` with the quarter-turn values pinned exactly.
fn unit_root(b: u32, c: u32) -> Complex64 {
    let c = c % b;
    if c == 0 {
        return Complex64::new(1.0, 0.0);
    }
    if 2 * c == b {
        return Complex64::new(-1.0, 0.0);
    }
    if 4 * c == b {
        return Complex64::new(0.0, 1.0);
    }
    if 4 * c == 3 * b {
        return Complex64::new(0.0, -1.0);
    }
    let theta = 2.0 * PI * c as f64 / b as f64;
    Complex64::new(theta.cos(), theta.sin())
}

/// Scalar constants attached to a base `b`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BaseConstants {
    pub base: u32,
    /// `omega_b = exp(2 pi i / b)`.
    pub omega: Complex64,
    /// `m_b = min_c |1 - conj(omega_b)^c| = 2 sin(pi / b)`.
    pub min_gap: f64,
    /// `M_b = max_c |1 - conj(omega_b)^c|`.
    pub max_gap: f64,
}

impl BaseConstants {
    pub fn new(b: u32) -> Result<Self> {
        check_base(b)?;
        let min_gap = 2.0 * (PI / b as f64).sin();
        let max_gap = if b.is_multiple_of(2) {
            2.0
        } else {
            2.0 * ((b as f64 + 1.0) * PI / (2.0 * b as f64)).sin()
        };
        Ok(BaseConstants {
            base: b,
            omega: unit_root(b, 1),
            min_gap,
            max_gap,
        })
    }

    /// `C_{b,n} = (b m_b / (b - M_b)) (1 - (M_b / b)^n)`; undefined for `b = 2`.
    pub fn c_factor(&self, n: usize) -> Result<f64> {
        let b = self.base as f64;
        if self.base < 3 {
            return Err(WalshError::UnsupportedBase(self.base, "C_{b,n} needs b >= 3"));
        }
        Ok(b * self.min_gap / (b - self.max_gap) * (1.0 - (self.max_gap / b).powi(n as i32)))
    }

    /// Limit of `C_{b,n}` as `n -> infinity`.
    pub fn c_factor_limit(&self) -> Result<f64> {
        if self.base < 3 {
            return Err(WalshError::UnsupportedBase(self.base, "C_{b,n} needs b >= 3"));
        }
        let b = self.base as f64;
        Ok(b * self.min_gap / (b - self.max_gap))
    }

    /// Constant of the C-infinity decay corollary: 2 for `b = 2`,
    /// `M_b + b m_b / (b - M_b)` otherwise.
    pub fn c_infinity(&self) -> f64 {
        if self.base == 2 {
            2.0
        } else {
            let b = self.base as f64;
            self.max_gap + b * self.min_gap / (b - self.max_gap)
        }
    }
}

/// Convenience wrapper for [`KExpansion::new`].
pub fn expand(b: u32, k: u64) -> Result<KExpansion> {
    KExpansion::new(b, k)
}

/// Convenience wrapper for [`BaseConstants::new`].
pub fn constants(b: u32) -> Result<BaseConstants> {
    BaseConstants::new(b)
}

/// `C_{b,n}` for base `b`.
pub fn c_factor(b: u32, n: usize) -> Result<f64> {
    BaseConstants::new(b)?.c_factor(n)
}
