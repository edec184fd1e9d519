//! Complex piecewise polynomials on a uniform b-adic grid of `[0, 1]`.
//!
//! Cell `m` covers `[m h, (m + 1) h)` with `h = b^-G`. Each cell stores the
//! coefficients of its polynomial in the local coordinate `t = x - m h`, so
//! high-resolution grids never evaluate large global monomials.

use std::f64::consts::PI;
use std::sync::OnceLock;

use num_complex::Complex64;
use num_traits::Zero;

use crate::badic::{check_base, checked_pow};
use crate::error::{Result, WalshError};
use crate::quadrature::GaussLegendre;

/// Largest polynomial degree a cell may carry.
pub const MAX_DEGREE: usize = 64;

/// Largest number of cells a grid may have.
pub const MAX_CELLS: u64 = 1 << 22;

const SUP_SAMPLES: usize = 65;
const LQ_NODES: usize = 32;

fn lq_rule() -> &'static GaussLegendre {
    static RULE: OnceLock<GaussLegendre> = OnceLock::new();
    RULE.get_or_init(|| GaussLegendre::new(LQ_NODES))
}

#[derive(Debug, Clone, PartialEq)]
pub struct PiecewisePoly {
    base: u32,
    resolution: u32,
    stride: usize,
    coeffs: Vec<Complex64>,
}

fn cell_count(base: u32, resolution: u32) -> Result<usize> {
    match checked_pow(base, resolution) {
        Some(n) if n <= MAX_CELLS => Ok(n as usize),
        _ => Err(WalshError::ResolutionCap {
            base,
            resolution,
            cap: MAX_CELLS,
        }),
    }
}

#[inline]
fn horner(c: &[Complex64], t: f64) -> Complex64 {
    c.iter().rev().fold(Complex64::zero(), |acc, &ci| acc * t + ci)
}

/// Coefficients of `p(s + u)` as a polynomial in `u`.
fn taylor_shift(c: &[Complex64], s: f64) -> Vec<Complex64> {
    let mut q = c.to_vec();
    let n = q.len();
    for i in 0..n {
        for j in (i..n.saturating_sub(1)).rev() {
            let next = q[j + 1];
            q[j] += next * s;
        }
    }
    q
}

impl PiecewisePoly {
    /// A single-cell constant.
    pub fn constant(base: u32, value: Complex64) -> Result<Self> {
        check_base(base)?;
        Ok(PiecewisePoly {
            base,
            resolution: 0,
            stride: 1,
            coeffs: vec![value],
        })
    }

    pub fn zero(base: u32) -> Result<Self> {
        Self::constant(base, Complex64::zero())
    }

    /// Piecewise constant with one value per cell.
    pub fn from_cell_values(base: u32, resolution: u32, values: Vec<Complex64>) -> Result<Self> {
        check_base(base)?;
        let n = cell_count(base, resolution)?;
        if values.len() != n {
            return Err(WalshError::DimensionMismatch(values.len(), n));
        }
        Ok(PiecewisePoly {
            base,
            resolution,
            stride: 1,
            coeffs: values,
        })
    }

    /// General constructor from per-cell local coefficient lists; shorter
    /// lists are zero-padded to the longest one.
    pub fn from_cells(base: u32, resolution: u32, cells: Vec<Vec<Complex64>>) -> Result<Self> {
        check_base(base)?;
        let n = cell_count(base, resolution)?;
        if cells.len() != n {
            return Err(WalshError::DimensionMismatch(cells.len(), n));
        }
        let stride = cells.iter().map(Vec::len).max().unwrap_or(1).max(1);
        if stride - 1 > MAX_DEGREE {
            return Err(WalshError::DegreeOverflow(stride - 1, MAX_DEGREE));
        }
        let mut coeffs = vec![Complex64::zero(); n * stride];
        for (m, c) in cells.into_iter().enumerate() {
            coeffs[m * stride..m * stride + c.len()].copy_from_slice(&c);
        }
        Ok(PiecewisePoly {
            base,
            resolution,
            stride,
            coeffs,
        })
    }

    pub fn base(&self) -> u32 {
        self.base
    }

    pub fn resolution(&self) -> u32 {
        self.resolution
    }

    pub fn degree(&self) -> usize {
        self.stride - 1
    }

    pub fn cell_count(&self) -> usize {
        self.coeffs.len() / self.stride
    }

    pub fn cell_width(&self) -> f64 {
        1.0 / self.cell_count() as f64
    }

    /// Local coefficients of cell `m`.
    pub fn cell(&self, m: usize) -> &[Complex64] {
        &self.coeffs[m * self.stride..(m + 1) * self.stride]
    }

    /// Value of cell `m` at local coordinate `t`.
    #[inline]
    pub fn eval_cell(&self, m: usize, t: f64) -> Complex64 {
        horner(self.cell(m), t)
    }

    /// Cell index and local coordinate of `x`; `x = 1` maps to the right end
    /// of the last cell.
    #[inline]
    pub fn locate(&self, x: f64) -> (usize, f64) {
        let n = self.cell_count();
        let h = self.cell_width();
        let m = ((x * n as f64).floor() as usize).min(n - 1);
        (m, x - m as f64 * h)
    }

    pub fn eval(&self, x: f64) -> Result<Complex64> {
        if !(0.0..=1.0).contains(&x) {
            return Err(WalshError::OutOfDomain(x, "[0, 1]"));
        }
        Ok(self.eval_unchecked(x))
    }

    #[inline]
    pub(crate) fn eval_unchecked(&self, x: f64) -> Complex64 {
        let (m, t) = self.locate(x);
        self.eval_cell(m, t)
    }

    /// `F(x) = int_0^x p`, continuous, one degree higher.
    pub fn antiderivative(&self) -> Result<Self> {
        if self.degree() + 1 > MAX_DEGREE {
            return Err(WalshError::DegreeOverflow(self.degree() + 1, MAX_DEGREE));
        }
        let n = self.cell_count();
        let h = self.cell_width();
        let stride = self.stride + 1;
        let mut coeffs = vec![Complex64::zero(); n * stride];
        let mut acc = Complex64::zero();
        for m in 0..n {
            let src = self.cell(m);
            let dst = &mut coeffs[m * stride..(m + 1) * stride];
            dst[0] = acc;
            for (i, &c) in src.iter().enumerate() {
                dst[i + 1] = c / (i + 1) as f64;
            }
            acc = horner(dst, h);
        }
        Ok(PiecewisePoly {
            base: self.base,
            resolution: self.resolution,
            stride,
            coeffs,
        })
    }

    /// Local coefficients of `int_0^x p` on the first `cells` cells, and
    /// its value at their right end.
    pub fn antiderivative_prefix(&self, cells: usize) -> Result<(Vec<Vec<Complex64>>, Complex64)> {
        if self.degree() + 1 > MAX_DEGREE {
            return Err(WalshError::DegreeOverflow(self.degree() + 1, MAX_DEGREE));
        }
        if cells > self.cell_count() {
            return Err(WalshError::DimensionMismatch(cells, self.cell_count()));
        }
        let h = self.cell_width();
        let mut out = Vec::with_capacity(cells);
        let mut acc = Complex64::zero();
        for m in 0..cells {
            let src = self.cell(m);
            let mut dst = Vec::with_capacity(src.len() + 1);
            dst.push(acc);
            dst.extend(src.iter().enumerate().map(|(i, &c)| c / (i + 1) as f64));
            acc = horner(&dst, h);
            out.push(dst);
        }
        Ok((out, acc))
    }

    /// Cellwise derivative.
    pub fn derivative(&self) -> Self {
        let n = self.cell_count();
        if self.stride == 1 {
            return PiecewisePoly {
                base: self.base,
                resolution: self.resolution,
                stride: 1,
                coeffs: vec![Complex64::zero(); n],
            };
        }
        let stride = self.stride - 1;
        let mut coeffs = Vec::with_capacity(n * stride);
        for m in 0..n {
            let src = self.cell(m);
            coeffs.extend((1..src.len()).map(|i| src[i] * i as f64));
        }
        PiecewisePoly {
            base: self.base,
            resolution: self.resolution,
            stride,
            coeffs,
        }
    }

    /// Exact integral over `[0, 1]`.
    pub fn definite_integral(&self) -> Complex64 {
        let h = self.cell_width();
        (0..self.cell_count())
            .map(|m| {
                self.cell(m)
                    .iter()
                    .enumerate()
                    .rev()
                    .fold(Complex64::zero(), |acc, (i, &c)| acc * h + c / (i + 1) as f64)
                    * h
            })
            .sum()
    }

    /// Same function on a finer grid.
    pub fn refine(&self, resolution: u32) -> Result<Self> {
        if resolution < self.resolution {
            return Err(WalshError::Config(format!(
                "cannot coarsen grid from {} to {}",
                self.resolution, resolution
            )));
        }
        if resolution == self.resolution {
            return Ok(self.clone());
        }
        let n = cell_count(self.base, resolution)?;
        let split = n / self.cell_count();
        let h = 1.0 / n as f64;
        let mut coeffs = Vec::with_capacity(n * self.stride);
        for m in 0..self.cell_count() {
            let src = self.cell(m);
            for s in 0..split {
                if self.stride == 1 {
                    coeffs.push(src[0]);
                } else {
                    coeffs.extend(taylor_shift(src, s as f64 * h));
                }
            }
        }
        Ok(PiecewisePoly {
            base: self.base,
            resolution,
            stride: self.stride,
            coeffs,
        })
    }

    fn with_stride(&self, stride: usize) -> Self {
        if stride == self.stride {
            return self.clone();
        }
        let n = self.cell_count();
        let mut coeffs = vec![Complex64::zero(); n * stride];
        for m in 0..n {
            coeffs[m * stride..m * stride + self.stride].copy_from_slice(self.cell(m));
        }
        PiecewisePoly {
            base: self.base,
            resolution: self.resolution,
            stride,
            coeffs,
        }
    }

    fn unify(&self, other: &Self) -> Result<(Self, Self)> {
        if self.base != other.base {
            return Err(WalshError::BaseMismatch(self.base, other.base));
        }
        let g = self.resolution.max(other.resolution);
        Ok((self.refine(g)?, other.refine(g)?))
    }

    /// Pointwise sum on the finer of the two grids.
    pub fn add(&self, other: &Self) -> Result<Self> {
        let (a, b) = self.unify(other)?;
        let stride = a.stride.max(b.stride);
        let (mut a, b) = (a.with_stride(stride), b.with_stride(stride));
        for (x, y) in a.coeffs.iter_mut().zip(&b.coeffs) {
            *x += y;
        }
        Ok(a)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    pub fn scale(&self, c: Complex64) -> Self {
        let mut out = self.clone();
        out.coeffs.iter_mut().for_each(|x| *x *= c);
        out
    }

    pub fn add_constant(&self, c: Complex64) -> Self {
        let mut out = self.clone();
        let stride = out.stride;
        out.coeffs.iter_mut().step_by(stride).for_each(|x| *x += c);
        out
    }

    /// Pointwise product.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        let (a, b) = self.unify(other)?;
        let degree = a.degree() + b.degree();
        if degree > MAX_DEGREE {
            return Err(WalshError::DegreeOverflow(degree, MAX_DEGREE));
        }
        let stride = degree + 1;
        let n = a.cell_count();
        let mut coeffs = vec![Complex64::zero(); n * stride];
        for m in 0..n {
            let (ca, cb) = (a.cell(m), b.cell(m));
            let dst = &mut coeffs[m * stride..(m + 1) * stride];
            for (i, &x) in ca.iter().enumerate() {
                for (j, &y) in cb.iter().enumerate() {
                    dst[i + j] += x * y;
                }
            }
        }
        Ok(PiecewisePoly {
            base: a.base,
            resolution: a.resolution,
            stride,
            coeffs,
        })
    }

    /// Multiplies every cell by the matching value of a piecewise constant
    /// given on the same or a coarser grid.
    pub fn mul_cell_constants(&self, factor: &PiecewisePoly) -> Result<Self> {
        if factor.degree() != 0 {
            return Err(WalshError::Config("factor must be piecewise constant".into()));
        }
        let (a, f) = self.unify(factor)?;
        let mut out = a;
        let stride = out.stride;
        for (m, chunk) in out.coeffs.chunks_mut(stride).enumerate() {
            let c = f.coeffs[m];
            chunk.iter_mut().for_each(|x| *x *= c);
        }
        Ok(out)
    }

    /// Largest absolute difference of the two one-sided values at interior
    /// breakpoints.
    pub fn continuity_defect(&self) -> f64 {
        let h = self.cell_width();
        (1..self.cell_count())
            .map(|m| (self.eval_cell(m - 1, h) - self.cell(m)[0]).norm())
            .fold(0.0, f64::max)
    }

    /// Chebyshev–Lobatto sample points of cell `m` in local coordinates.
    fn sample_points(&self) -> impl Iterator<Item = f64> + '_ {
        let h = self.cell_width();
        (0..SUP_SAMPLES)
            .map(move |i| 0.5 * h * (1.0 - (PI * i as f64 / (SUP_SAMPLES - 1) as f64).cos()))
    }

    /// Estimated `sup |p|` on cell `m`: dense sampling followed by a
    /// golden-section search around the largest sample.
    pub fn cell_sup(&self, m: usize) -> f64 {
        let c = self.cell(m);
        if self.stride == 1 {
            return c[0].norm();
        }
        let ts: Vec<f64> = self.sample_points().collect();
        let vals: Vec<f64> = ts.iter().map(|&t| horner(c, t).norm()).collect();
        let (imax, &vmax) = vals
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .expect("non-empty sample");
        let lo = ts[imax.saturating_sub(1)];
        let hi = ts[(imax + 1).min(ts.len() - 1)];
        vmax.max(golden_max(|t| horner(c, t).norm(), lo, hi).1)
    }

    /// Estimated `inf Re p` over the grid, sampled like [`Self::cell_sup`].
    pub fn sampled_min_re(&self) -> f64 {
        (0..self.cell_count())
            .flat_map(|m| self.sample_points().map(move |t| self.eval_cell(m, t).re))
            .fold(f64::INFINITY, f64::min)
    }

    /// `L^q` norm; `q = f64::INFINITY` gives the (estimated) sup norm.
    pub fn norm(&self, q: f64) -> Result<f64> {
        if q.is_nan() || q < 1.0 {
            return Err(WalshError::InvalidExponent(format!("q = {q}")));
        }
        if q.is_infinite() {
            return Ok((0..self.cell_count())
                .map(|m| self.cell_sup(m))
                .fold(0.0, f64::max));
        }
        let rule = lq_rule();
        let h = self.cell_width();
        let total: f64 = (0..self.cell_count())
            .map(|m| {
                let c = self.cell(m);
                let f = |t: f64| horner(c, t).norm().powf(q);
                let mut cuts = vec![0.0];
                cuts.extend(interior_minima(c, h));
                cuts.push(h);
                cuts.windows(2).map(|w| rule.integrate(w[0], w[1], f)).sum::<f64>()
            })
            .sum();
        Ok(total.powf(1.0 / q))
    }
}

/// Refined interior local minima of `|p|`, where a kink of `|p|^q` may sit.
fn interior_minima(c: &[Complex64], h: f64) -> Vec<f64> {
    if c.len() <= 1 {
        return Vec::new();
    }
    let n = SUP_SAMPLES;
    let ts: Vec<f64> = (0..n)
        .map(|i| 0.5 * h * (1.0 - (PI * i as f64 / (n - 1) as f64).cos()))
        .collect();
    let vals: Vec<f64> = ts.iter().map(|&t| horner(c, t).norm()).collect();
    (1..n - 1)
        .filter(|&i| vals[i] <= vals[i - 1] && vals[i] <= vals[i + 1] && vals[i] < vals[i - 1].max(vals[i + 1]))
        .map(|i| golden_max(|t| -horner(c, t).norm(), ts[i - 1], ts[i + 1]).0)
        .collect()
}

/// Golden-section search for the maximum of a unimodal `f` on `[a, b]`;
/// returns the abscissa and value.
fn golden_max<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..80 {
        if (b - a).abs() <= f64::EPSILON * (a.abs() + b.abs()) {
            break;
        }
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    if fc > fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn step() -> PiecewisePoly {
        PiecewisePoly::from_cell_values(2, 1, vec![c(1.0), c(-1.0)]).unwrap()
    }

    #[test]
    fn eval_examples() {
        let one = PiecewisePoly::constant(2, c(1.0)).unwrap();
        assert_eq!(one.eval(0.37).unwrap(), c(1.0));
        assert_eq!(step().eval(0.75).unwrap(), c(-1.0));
        let tri = step().antiderivative().unwrap();
        assert_abs_diff_eq!(tri.eval(1.0).unwrap().norm(), 0.0, epsilon = 1e-15);
        assert!(tri.eval(1.5).is_err());
        assert!(tri.eval(-0.1).is_err());
    }

    #[test]
    fn antiderivative_examples() {
        let one = PiecewisePoly::constant(3, c(1.0)).unwrap();
        let f = one.antiderivative().unwrap();
        for x in [0.0, 0.2, 0.9, 1.0] {
            assert_abs_diff_eq!(f.eval(x).unwrap().re, x, epsilon = 1e-15);
        }
        let tri = step().antiderivative().unwrap();
        for x in [0.1, 0.3, 0.5, 0.6, 0.95] {
            let expected = if x <= 0.5 { x } else { 1.0 - x };
            assert_abs_diff_eq!(tri.eval(x).unwrap().re, expected, epsilon = 1e-15);
        }
        assert!(tri.continuity_defect() < 1e-15);
    }

    #[test]
    fn integral_examples() {
        assert_eq!(PiecewisePoly::constant(2, c(1.0)).unwrap().definite_integral(), c(1.0));
        let tri = step().antiderivative().unwrap();
        assert_abs_diff_eq!(tri.definite_integral().re, 0.25, epsilon = 1e-16);
        assert_abs_diff_eq!(step().definite_integral().norm(), 0.0, epsilon = 1e-16);
    }

    #[test]
    fn degree_overflow_is_reported() {
        let mut p = PiecewisePoly::constant(2, c(1.0)).unwrap();
        for _ in 0..MAX_DEGREE {
            p = p.antiderivative().unwrap();
        }
        assert!(matches!(p.antiderivative(), Err(WalshError::DegreeOverflow(..))));
    }

    #[test]
    fn combine_examples() {
        let tri = step().antiderivative().unwrap();
        let zero = PiecewisePoly::zero(2).unwrap();
        let sum = tri.add(&zero).unwrap();
        for x in [0.0, 0.3, 0.77] {
            assert_eq!(sum.eval(x).unwrap(), tri.eval(x).unwrap());
        }
        let centred = tri.add_constant(-tri.definite_integral());
        assert_abs_diff_eq!(centred.definite_integral().norm(), 0.0, epsilon = 1e-16);
        let fine = tri.refine(4).unwrap();
        for i in 0..100 {
            let x = (i as f64 * 0.618_033_988_7).fract();
            assert_abs_diff_eq!((fine.eval(x).unwrap() - tri.eval(x).unwrap()).norm(), 0.0, epsilon = 1e-15);
        }
        let other = PiecewisePoly::constant(3, c(1.0)).unwrap();
        assert_eq!(tri.add(&other), Err(WalshError::BaseMismatch(2, 3)));
    }

    #[test]
    fn product_and_cell_scaling_agree() {
        let tri = step().antiderivative().unwrap().refine(2).unwrap();
        let steps = PiecewisePoly::from_cell_values(
            2,
            2,
            vec![c(1.0), Complex64::new(0.0, 1.0), c(-1.0), c(2.0)],
        )
        .unwrap();
        let a = tri.mul(&steps).unwrap();
        let b = tri.mul_cell_constants(&steps).unwrap();
        for i in 0..100 {
            let x = (i as f64 * 0.414_213_562_37).fract();
            let expected = tri.eval(x).unwrap() * steps.eval(x).unwrap();
            assert_abs_diff_eq!((a.eval(x).unwrap() - expected).norm(), 0.0, epsilon = 1e-15);
            assert_abs_diff_eq!((b.eval(x).unwrap() - expected).norm(), 0.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn norm_examples() {
        let one = PiecewisePoly::constant(2, c(1.0)).unwrap();
        for q in [1.0, 2.0, 3.5, f64::INFINITY] {
            assert_abs_diff_eq!(one.norm(q).unwrap(), 1.0, epsilon = 1e-14);
        }
        let tri = step().antiderivative().unwrap();
        assert_abs_diff_eq!(tri.norm(1.0).unwrap(), 0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(tri.norm(f64::INFINITY).unwrap(), 0.5, epsilon = 1e-15);
        // ||x||_2 on the triangle: 2 * int_0^{1/2} x^2 = 1/12
        assert_abs_diff_eq!(tri.norm(2.0).unwrap(), (1.0f64 / 12.0).sqrt(), epsilon = 1e-12);
        assert!(tri.norm(0.5).is_err());
    }

    #[test]
    fn sup_of_interior_peak() {
        // p(x) = x (1 - x) on a single cell: peak 1/4 at x = 1/2 + 1e-3 shift
        let s = 0.5 + 1e-3;
        let p = PiecewisePoly::from_cells(2, 0, vec![vec![c(-s * s + 0.25), c(2.0 * s), c(-1.0)]]).unwrap();
        assert_abs_diff_eq!(p.norm(f64::INFINITY).unwrap(), 0.25, epsilon = 1e-13);
    }

    #[test]
    fn lq_with_interior_zero() {
        // |x - 1/3| has a kink at 1/3; int_0^1 |x - 1/3| = 5/18
        let p = PiecewisePoly::from_cells(2, 0, vec![vec![c(-1.0 / 3.0), c(1.0)]]).unwrap();
        assert_abs_diff_eq!(p.norm(1.0).unwrap(), 5.0 / 18.0, epsilon = 1e-12);
    }
}
