//! b-adic Walsh functions.
//!
//! `wal_k(x) = omega_b^(kappa_1 xi_{a_1} + ... + kappa_v xi_{a_v})` where
//! `xi_j` is the j-th b-adic digit of `x`. The function is constant on the
//! cells `[m b^-a_1, (m + 1) b^-a_1)`, so everything here reduces to integer
//! digit arithmetic on the cell index `m`.

use num_complex::Complex64;

use crate::badic::{checked_pow, KExpansion, RootTable};
use crate::error::{Result, WalshError};
use crate::exec::Execution;
use crate::piecewise::PiecewisePoly;

/// Points closer than this many ulps to a cell boundary snap onto it, so
/// that b-adic rationals typed as floats (e.g. `1/3` in base 3) take their
/// terminating expansion.
const BOUNDARY_GUARD_ULPS: f64 = 8.0;

/// Exponent `sum_i kappa_i xi_{a_i}` of `wal_k` on cell `m` of the
/// resolution-`g` grid (`g >= a_1`).
pub fn cell_exponent(e: &KExpansion, g: u32, m: u64) -> u64 {
    let b = e.base() as u64;
    e.digits()
        .iter()
        .map(|d| {
            let xi = (m / b.pow(g - d.a)) % b;
            d.kappa as u64 * xi
        })
        .sum()
}

/// Cell index of `x` on the resolution-`g` grid, with the boundary guard.
pub(crate) fn guarded_cell(b: u32, g: u32, x: f64) -> u64 {
    let n = (b as f64).powi(g as i32);
    let scaled = x * n;
    let nearest = scaled.round();
    let cell = if (scaled - nearest).abs() <= BOUNDARY_GUARD_ULPS * f64::EPSILON * scaled.max(1.0) {
        nearest
    } else {
        scaled.floor()
    };
    (cell.max(0.0) as u64).min(n as u64 - 1)
}

/// `wal_k(x)` for `x` in `[0, 1)`.
pub fn wal_eval(b: u32, k: u64, x: f64) -> Result<Complex64> {
    if !(0.0..1.0).contains(&x) {
        return Err(WalshError::OutOfDomain(x, "[0, 1)"));
    }
    let e = KExpansion::new(b, k)?;
    let g = e.a_first();
    let m = guarded_cell(b, g, x);
    Ok(RootTable::new(b)?.pow(cell_exponent(&e, g, m)))
}

/// `wal_k(x)` at the b-adic rational `x = numerator / b^exponent`, using
/// exact integer digits.
pub fn wal_eval_badic(b: u32, k: u64, numerator: u64, exponent: u32) -> Result<Complex64> {
    let e = KExpansion::new(b, k)?;
    let denom = checked_pow(b, exponent)
        .ok_or_else(|| WalshError::Config(format!("b^{exponent} overflows")))?;
    if numerator >= denom {
        return Err(WalshError::OutOfDomain(numerator as f64 / denom as f64, "[0, 1)"));
    }
    let g = e.a_first();
    let m = (numerator as u128 * (b as u128).pow(g) / denom as u128) as u64;
    Ok(RootTable::new(b)?.pow(cell_exponent(&e, g, m)))
}

/// `wal_ks(xs) = prod_j wal_{k_j}(x_j)`.
pub fn wal_eval_multi(b: u32, ks: &[u64], xs: &[f64]) -> Result<Complex64> {
    if ks.len() != xs.len() {
        return Err(WalshError::DimensionMismatch(ks.len(), xs.len()));
    }
    ks.iter()
        .zip(xs)
        .try_fold(Complex64::new(1.0, 0.0), |acc, (&k, &x)| Ok(acc * wal_eval(b, k, x)?))
}

/// Values of `conj(wal_k)` on every cell of the resolution-`g` grid.
pub fn wal_conj_values(e: &KExpansion, g: u32) -> Result<Vec<Complex64>> {
    if g < e.a_first() {
        return Err(WalshError::Config(format!(
            "resolution {g} is coarser than a_1 = {}",
            e.a_first()
        )));
    }
    let table = RootTable::new(e.base())?;
    let n = checked_pow(e.base(), g).ok_or(WalshError::ResolutionCap {
        base: e.base(),
        resolution: g,
        cap: u64::MAX,
    })?;
    Ok((0..n).map(|m| table.conj_pow(cell_exponent(e, g, m))).collect())
}

/// `conj(wal_k)` as a piecewise constant at resolution `a_1`.
pub fn wal_conj_cells(b: u32, k: u64) -> Result<PiecewisePoly> {
    let e = KExpansion::new(b, k)?;
    wal_conj_cells_of(&e)
}

pub fn wal_conj_cells_of(e: &KExpansion) -> Result<PiecewisePoly> {
    let g = e.a_first();
    PiecewisePoly::from_cell_values(e.base(), g, wal_conj_values(e, g)?)
}

/// `<wal_k, wal_l> = int wal_k conj(wal_l)` as an exact cell average.
pub fn inner_product(b: u32, k: u64, l: u64) -> Result<Complex64> {
    let ek = KExpansion::new(b, k)?;
    let el = KExpansion::new(b, l)?;
    let g = ek.a_first().max(el.a_first());
    let ck = wal_conj_values(&ek, g)?;
    let cl = wal_conj_values(&el, g)?;
    let n = ck.len() as f64;
    Ok(ck.iter().zip(&cl).map(|(x, y)| x.conj() * y).sum::<Complex64>() / n)
}

/// `max |<wal_k, wal_l> - delta_kl|` over all `k, l < b^digits`.
pub fn orthonormality_defect(b: u32, digits: u32, exec: Execution) -> Result<f64> {
    let n = checked_pow(b, digits).ok_or(WalshError::ResolutionCap {
        base: b,
        resolution: digits,
        cap: u64::MAX,
    })?;
    let values: Vec<Vec<Complex64>> = (0..n)
        .map(|k| wal_conj_values(&KExpansion::new(b, k)?, digits))
        .collect::<Result<_>>()?;
    let cells = n as f64;
    let values = &values;
    Ok(exec.max_over(n, |k| {
        let ck = &values[k as usize];
        (0..n)
            .map(|l| {
                let cl = &values[l as usize];
                let ip: Complex64 = ck.iter().zip(cl).map(|(x, y)| x.conj() * y).sum::<Complex64>() / cells;
                let delta = if k == l { 1.0 } else { 0.0 };
                (ip - delta).norm()
            })
            .fold(0.0, f64::max)
    }))
}
