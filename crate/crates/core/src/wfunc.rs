//! The weight functions `W_k` and `W^(j)_k` with their integral values.
//!
//! `W_0 = 1` and `W_k(x) = int_0^x conj(wal_{kappa_v b^(a_v - 1)}(y)) W_{k'}(y) dy`,
//! where `k'` drops the smallest digit of `k`. Equivalently `W_k` is the
//! v-fold antiderivative of `conj(wal_k)`. The higher-order family is
//! `W^(0)_k = W_k`, `W^(j+1)_k(x) = int_0^x (W^(j)_k - I^(j)(k))` with
//! `I^(j)(k) = int_0^1 W^(j)_k`.
//!
//! All of these are exact piecewise polynomials on the resolution-`a_1`
//! grid, of degree `v + j`.

use std::collections::HashMap;
use std::sync::{Arc, RwLock};

use num_complex::Complex64;
use serde::Serialize;

use crate::badic::{KExpansion, RootTable};
use crate::error::{Result, WalshError};
use crate::piecewise::PiecewisePoly;
use crate::walsh::{wal_conj_cells_of, wal_conj_values};

/// Cap on `b^a_1` for every W object (`a_1 <= 14` for b = 2, `<= 9` for
/// b = 3, `<= 6` for b = 5).
pub const MAX_W_CELLS: u64 = 20_000;

#[derive(Debug, Clone, PartialEq)]
pub struct WFunction {
    k: KExpansion,
    j: usize,
    poly: PiecewisePoly,
    integral: Complex64,
}

impl WFunction {
    pub fn expansion(&self) -> &KExpansion {
        &self.k
    }

    pub fn k(&self) -> u64 {
        self.k.k()
    }

    /// Order of the higher-order family (0 for `W_k` itself).
    pub fn j(&self) -> usize {
        self.j
    }

    pub fn poly(&self) -> &PiecewisePoly {
        &self.poly
    }

    /// `I^(j)(k)`.
    pub fn integral(&self) -> Complex64 {
        self.integral
    }

    pub fn eval(&self, x: f64) -> Result<Complex64> {
        self.poly.eval(x)
    }

    /// `W^(j)_k - I^(j)(k)`.
    pub fn centred(&self) -> PiecewisePoly {
        self.poly.add_constant(-self.integral)
    }

    /// `W^(j+1)_k`. For `k >= 1` only the base interval `[0, b^-a_v]` is
    /// integrated; the rest follows from
    /// `W^(j+1)(c b^-a_v + x') = (1 - w^c) I^(j+1) + w^c W^(j+1)(x')` with
    /// `w = conj(omega)^kappa_v` and `I^(j+1) = W^(j+1)(b^-a_v) / (1 - w)`.
    /// Integrating over all of `[0, 1]` instead loses a factor `b^a_v` of
    /// relative accuracy per level.
    fn next(&self) -> Result<WFunction> {
        let centred = self.centred();
        let Some(kappa_v) = self.k.kappa_last() else {
            let poly = centred.antiderivative()?;
            let integral = poly.definite_integral();
            return Ok(self.successor(poly, integral));
        };
        let b = self.k.base();
        let n_base = (b as usize).pow(self.k.a_first() - self.k.a_last());
        let (base_cells, at_base) = centred.antiderivative_prefix(n_base)?;
        let t = RootTable::new(b)?;
        let integral = at_base / (1.0 - t.conj_pow(kappa_v as u64));
        let periods = centred.cell_count() / n_base;
        let mut cells = Vec::with_capacity(centred.cell_count());
        for c in 0..periods {
            let rot = t.conj_pow(c as u64 * kappa_v as u64);
            let shift = (1.0 - rot) * integral;
            for cell in &base_cells {
                let mut q: Vec<Complex64> = cell.iter().map(|&z| z * rot).collect();
                q[0] += shift;
                cells.push(q);
            }
        }
        let poly = PiecewisePoly::from_cells(b, centred.resolution(), cells)?;
        Ok(self.successor(poly, integral))
    }

    fn successor(&self, poly: PiecewisePoly, integral: Complex64) -> WFunction {
        WFunction {
            k: self.k.clone(),
            j: self.j + 1,
            poly,
            integral,
        }
    }
}

fn check_cap(e: &KExpansion) -> Result<()> {
    let g = e.a_first();
    match (e.base() as u64).checked_pow(g) {
        Some(n) if n <= MAX_W_CELLS => Ok(()),
        _ => Err(WalshError::ResolutionCap {
            base: e.base(),
            resolution: g,
            cap: MAX_W_CELLS,
        }),
    }
}

/// `W_k` through the defining recursion, adding one digit per step from
/// the highest frequency down.
pub fn build_w(b: u32, k: u64) -> Result<WFunction> {
    build_w_of(&KExpansion::new(b, k)?)
}

pub fn build_w_of(e: &KExpansion) -> Result<WFunction> {
    check_cap(e)?;
    let b = e.base();
    let g = e.a_first();
    let mut poly = PiecewisePoly::constant(b, Complex64::new(1.0, 0.0))?.refine(g)?;
    for d in e.digits() {
        let single = KExpansion::new(b, d.kappa as u64 * (b as u64).pow(d.a - 1))?;
        let factor = PiecewisePoly::from_cell_values(b, g, wal_conj_values(&single, g)?)?;
        poly = poly.mul_cell_constants(&factor)?.antiderivative()?;
    }
    let integral = poly.definite_integral();
    Ok(WFunction {
        k: e.clone(),
        j: 0,
        poly,
        integral,
    })
}

/// The n-fold antiderivative of `conj(wal_k)` (with every antiderivative
/// anchored at 0).
pub fn iterated_antiderivative(b: u32, k: u64, n: usize) -> Result<PiecewisePoly> {
    let e = KExpansion::new(b, k)?;
    check_cap(&e)?;
    let mut p = wal_conj_cells_of(&e)?;
    for _ in 0..n {
        p = p.antiderivative()?;
    }
    Ok(p)
}

/// `W_k` as the v-fold antiderivative of `conj(wal_k)`.
pub fn build_w_by_antiderivatives(b: u32, k: u64) -> Result<PiecewisePoly> {
    let v = KExpansion::new(b, k)?.v();
    iterated_antiderivative(b, k, v)
}

/// `I(k) = b^-mu(k) / prod_{i=1..v} (1 - conj(omega)^kappa_i)`.
pub fn i_closed_form(b: u32, k: u64) -> Result<Complex64> {
    let e = KExpansion::new(b, k)?;
    let t = RootTable::new(b)?;
    let denom: Complex64 = e
        .digits()
        .iter()
        .map(|d| 1.0 - t.conj_pow(d.kappa as u64))
        .product();
    Ok(Complex64::new((b as f64).powi(-(e.mu() as i32)), 0.0) / denom)
}

/// `W_k(b^-a_v) = b^-mu(k) / prod_{i=1..v-1} (1 - conj(omega)^kappa_i)`.
pub fn w_at_base_closed_form(b: u32, k: u64) -> Result<Complex64> {
    let e = KExpansion::new(b, k)?;
    if e.is_zero() {
        return Err(WalshError::ZeroIndex);
    }
    let t = RootTable::new(b)?;
    let v = e.v();
    let denom: Complex64 = e.digits()[..v - 1]
        .iter()
        .map(|d| 1.0 - t.conj_pow(d.kappa as u64))
        .product();
    Ok(Complex64::new((b as f64).powi(-(e.mu() as i32)), 0.0) / denom)
}

/// Evaluates `W_k` from its restriction to the base interval
/// `[0, b^-a_v]` and the periodic relation
/// `W_k(c b^-a_v + x') = (1 - conj(omega)^(c kappa_v)) I(k) + conj(omega)^(c kappa_v) W_k(x')`.
#[derive(Debug, Clone)]
pub struct FastW {
    base_cells: Vec<Vec<Complex64>>,
    cell_width: f64,
    period_cells: f64,
    integral: Complex64,
    kappa_v: u64,
    table: RootTable,
}

impl FastW {
    pub fn new(w: &WFunction) -> Result<Self> {
        if w.j() != 0 {
            return Err(WalshError::Config("fast evaluation is for W_k (j = 0)".into()));
        }
        let e = w.expansion();
        let kappa_v = e.kappa_last().ok_or(WalshError::ZeroIndex)? as u64;
        let b = e.base();
        let n_base = (b as usize).pow(e.a_first() - e.a_last());
        let poly = w.poly();
        Ok(FastW {
            base_cells: (0..n_base).map(|m| poly.cell(m).to_vec()).collect(),
            cell_width: poly.cell_width(),
            period_cells: (b as f64).powi(e.a_last() as i32),
            integral: i_closed_form(b, e.k())?,
            kappa_v,
            table: RootTable::new(b)?,
        })
    }

    pub fn eval(&self, x: f64) -> Result<Complex64> {
        if !(0.0..=1.0).contains(&x) {
            return Err(WalshError::OutOfDomain(x, "[0, 1]"));
        }
        let c = (x * self.period_cells).floor().min(self.period_cells);
        let xp = (x - c / self.period_cells).max(0.0);
        let m = ((xp / self.cell_width).floor() as usize).min(self.base_cells.len() - 1);
        let t = xp - m as f64 * self.cell_width;
        let local = self.base_cells[m]
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, &ci| acc * t + ci);
        let rot = self.table.conj_pow(c as u64 * self.kappa_v);
        Ok((1.0 - rot) * self.integral + rot * local)
    }
}

pub fn eval_w_fast(b: u32, k: u64, x: f64) -> Result<Complex64> {
    FastW::new(&build_w(b, k)?)?.eval(x)
}

/// `W^(0)_k, ..., W^(jmax)_k`.
pub fn build_w_tower(b: u32, k: u64, jmax: usize) -> Result<Vec<WFunction>> {
    let mut out = Vec::with_capacity(jmax + 1);
    out.push(build_w(b, k)?);
    for _ in 0..jmax {
        let next = out.last().expect("non-empty").next()?;
        out.push(next);
    }
    Ok(out)
}

/// `W^(j)_k`.
pub fn build_w_extra(b: u32, k: u64, j: usize) -> Result<WFunction> {
    Ok(build_w_tower(b, k, j)?.pop().expect("non-empty"))
}

/// `I^(j)(k)` as the exact integral of `W^(j)_k`.
pub fn i_extra(b: u32, k: u64, j: usize) -> Result<Complex64> {
    Ok(build_w_extra(b, k, j)?.integral())
}

/// `I^(j)(k)` through the base-point quotient
/// `W^(j)_k(b^-a_v) / (1 - conj(omega)^kappa_v)`.
pub fn i_extra_from_base_point(w: &WFunction) -> Result<Complex64> {
    let e = w.expansion();
    let kappa_v = e.kappa_last().ok_or(WalshError::ZeroIndex)?;
    let b = e.base();
    let x = (b as f64).powi(-(e.a_last() as i32));
    let t = RootTable::new(b)?;
    Ok(w.eval(x)? / (1.0 - t.conj_pow(kappa_v as u64)))
}

/// Numerical audit of the dyadic structure of `W_k`.
#[derive(Debug, Clone, Serialize)]
pub struct DyadicReport {
    pub k: u64,
    pub min_value: f64,
    /// Largest `|W(x1) - W(x2)|` over pairs with `x1 + x2` a multiple of `2^(1 - a_v)`.
    pub mirror_defect: f64,
    /// Largest `|W(x1) + W(x2) - W(2^-a_v)|` over pairs with `x1 + x2` an odd multiple of `2^-a_v`.
    pub complement_defect: f64,
    pub l1: f64,
    pub l1_expected: f64,
    pub sup: f64,
    pub sup_expected: f64,
}

impl DyadicReport {
    pub fn passes(&self) -> bool {
        self.min_value >= -1e-12
            && self.mirror_defect <= 1e-11
            && self.complement_defect <= 1e-11
            && (self.l1 - self.l1_expected).abs() <= 1e-10
            && (self.sup - self.sup_expected).abs() <= 1e-9
    }
}

/// Sample pairs used by [`dyadic_properties`].
pub const DYADIC_PAIRS: usize = 200;

/// Checks non-negativity, both reflection identities and the exact
/// `L^1`/`L^inf` norms of `W_k` for `b = 2`.
pub fn dyadic_properties(k: u64) -> Result<DyadicReport> {
    let w = build_w(2, k)?;
    let e = w.expansion();
    if e.is_zero() {
        return Err(WalshError::ZeroIndex);
    }
    let q = 2f64.powi(-(e.a_last() as i32));
    let period = 2.0 * q;
    let at = |x: f64| w.poly().eval_unchecked(x).re;
    let w_base = at(q);

    let mut mirror_defect: f64 = 0.0;
    let mut complement_defect: f64 = 0.0;
    for i in 0..DYADIC_PAIRS {
        let x1 = ((i as f64 + 0.5) * 0.618_033_988_749_894_8).fract();
        let u = ((i as f64 + 0.5) * 0.754_877_666_246_692_7).fract();

        let lo = (x1 / period).ceil();
        let hi = ((1.0 + x1) / period).ceil() - 1.0;
        let j = lo + (u * (hi - lo + 1.0)).floor().min(hi - lo);
        let x2 = j * period - x1;
        if (0.0..1.0).contains(&x2) {
            mirror_defect = mirror_defect.max((at(x1) - at(x2)).abs());
        }

        let lo = ((x1 / q - 1.0) / 2.0).ceil();
        let hi = (((1.0 + x1) / q - 1.0) / 2.0).ceil() - 1.0;
        let j = lo + (u * (hi - lo + 1.0)).floor().min(hi - lo);
        let x2 = (2.0 * j + 1.0) * q - x1;
        if (0.0..1.0).contains(&x2) {
            complement_defect = complement_defect.max((at(x1) + at(x2) - w_base).abs());
        }
    }
    let v = e.v() as i32;
    let mu = e.mu() as i32;
    Ok(DyadicReport {
        k,
        min_value: w.poly().sampled_min_re(),
        mirror_defect,
        complement_defect,
        l1: w.poly().norm(1.0)?,
        l1_expected: 2f64.powi(-mu - v),
        sup: w.poly().norm(f64::INFINITY)?,
        sup_expected: 2f64.powi(-mu - v + v.min(1)),
    })
}

/// Shared read-mostly cache of built W objects keyed by `(b, k, j)`.
#[derive(Debug, Default)]
pub struct WCache {
    map: RwLock<HashMap<(u32, u64, usize), Arc<WFunction>>>,
}

impl WCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.map.read().expect("cache poisoned").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn get_or_build(&self, b: u32, k: u64, j: usize) -> Result<Arc<WFunction>> {
        if let Some(w) = self.map.read().expect("cache poisoned").get(&(b, k, j)) {
            return Ok(Arc::clone(w));
        }
        let built = if j == 0 {
            build_w(b, k)?
        } else {
            self.get_or_build(b, k, j - 1)?.next()?
        };
        let mut map = self.map.write().expect("cache poisoned");
        Ok(Arc::clone(map.entry((b, k, j)).or_insert_with(|| Arc::new(built))))
    }
}
