//! Walsh coefficients `f^(k) = int_0^1 f conj(wal_k)` along several paths:
//! a direct quadrature oracle, the derivative formula against
//! `conj(wal_{k>n}) W_{k<=n}`, the higher-order formula with `W^(r)`, and
//! the Sobolev-space representation.

use std::sync::{Arc, OnceLock};

use num_complex::Complex64;
use serde::Serialize;

use crate::badic::KExpansion;
use crate::bernoulli::{b_tilde_unchecked, b_value_unchecked, BERNOULLI_CAP};
use crate::error::{Result, WalshError};
use crate::functions::{MultiFunction, SmoothFunction};
use crate::piecewise::PiecewisePoly;
use crate::quadrature::GaussLegendre;
use crate::walsh::wal_conj_cells_of;
use crate::wfunc::{build_w, build_w_tower, WCache, WFunction};

/// Gauss–Legendre nodes per cell used by default.
pub const DEFAULT_NODES: usize = 16;
/// Coarsest grid used by the oracle.
pub const G_MIN: u32 = 4;
/// Largest dimension accepted by the tensor-product paths.
pub const MAX_DIM: usize = 3;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Method {
    Quadrature,
    Formula { n: usize },
    FormulaMulti { ns: Vec<usize> },
    HigherOrder { r: usize },
    Sobolev { alpha: usize },
    BernoulliExact { r: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoefficientResult {
    pub k: Vec<u64>,
    pub value: Complex64,
    pub method: Method,
    pub nodes_per_cell: usize,
    /// Grid exponent per coordinate.
    pub resolution: Vec<u32>,
}

/// Shared state for coefficient computations: the quadrature rule and an
/// optional cache of W objects that concurrent workers may share.
pub struct CoeffEngine {
    rule: GaussLegendre,
    cache: Option<Arc<WCache>>,
}

impl Default for CoeffEngine {
    fn default() -> Self {
        CoeffEngine::new(DEFAULT_NODES)
    }
}

fn default_engine() -> &'static CoeffEngine {
    static ENGINE: OnceLock<CoeffEngine> = OnceLock::new();
    ENGINE.get_or_init(CoeffEngine::default)
}

fn engine_for(nodes: usize) -> CoeffEngine {
    CoeffEngine::new(nodes)
}

fn sign(n: usize) -> f64 {
    if n.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

impl CoeffEngine {
    /// An engine that rebuilds W objects on demand.
    pub fn new(nodes: usize) -> Self {
        CoeffEngine {
            rule: GaussLegendre::new(nodes.max(1)),
            cache: None,
        }
    }

    pub fn with_cache(nodes: usize, cache: Arc<WCache>) -> Self {
        CoeffEngine {
            rule: GaussLegendre::new(nodes.max(1)),
            cache: Some(cache),
        }
    }

    pub fn nodes(&self) -> usize {
        self.rule.len()
    }

    pub fn cache(&self) -> Option<&WCache> {
        self.cache.as_deref()
    }

    fn w(&self, b: u32, k: u64) -> Result<Arc<WFunction>> {
        match &self.cache {
            Some(c) => c.get_or_build(b, k, 0),
            None => Ok(Arc::new(build_w(b, k)?)),
        }
    }

    /// `W^(0)_k, ..., W^(r)_k`.
    fn tower(&self, b: u32, k: u64, r: usize) -> Result<Vec<Arc<WFunction>>> {
        match &self.cache {
            Some(c) => (0..=r).map(|j| c.get_or_build(b, k, j)).collect(),
            None => Ok(build_w_tower(b, k, r)?.into_iter().map(Arc::new).collect()),
        }
    }

    /// `conj(wal_{k>n}) W_{k<=n}` as a piecewise polynomial of degree `n`.
    pub fn formula_weight(&self, e: &KExpansion, n: usize) -> Result<PiecewisePoly> {
        if n == 0 {
            return wal_conj_cells_of(e);
        }
        let head = e.truncate_low(n);
        let tail = e.tail_high(n);
        let w = self.w(e.base(), head.k())?;
        if tail.is_zero() {
            Ok(w.poly().clone())
        } else {
            w.poly().mul_cell_constants(&wal_conj_cells_of(&tail)?)
        }
    }

    /// `int_0^1 g(x) weight(x) dx` on the grid `max(resolution, G_MIN)`;
    /// cells containing a breakpoint of `g` are split there.
    fn integrate_against<G>(&self, g: G, breaks: &[f64], weight: &PiecewisePoly) -> Result<(Complex64, u32)>
    where
        G: Fn(f64) -> Complex64,
    {
        let res = weight.resolution().max(G_MIN);
        let weight = if weight.resolution() < res {
            weight.refine(res)?
        } else {
            weight.clone()
        };
        let h = weight.cell_width();
        let constant = weight.degree() == 0;
        let mut total = Complex64::new(0.0, 0.0);
        for m in 0..weight.cell_count() {
            let lo = m as f64 * h;
            let hi = lo + h;
            let mut cuts = vec![lo];
            cuts.extend(breaks.iter().copied().filter(|&t| t > lo && t < hi));
            cuts.push(hi);
            let cell: Complex64 = if constant {
                let s: Complex64 = cuts
                    .windows(2)
                    .map(|w| self.rule.integrate_complex(w[0], w[1], &g))
                    .sum();
                weight.cell(m)[0] * s
            } else {
                cuts.windows(2)
                    .map(|w| {
                        self.rule
                            .integrate_complex(w[0], w[1], |x| g(x) * weight.eval_cell(m, x - lo))
                    })
                    .sum()
            };
            total += cell;
        }
        Ok((total, res))
    }

    fn result(&self, k: u64, value: Complex64, method: Method, res: u32) -> CoefficientResult {
        CoefficientResult {
            k: vec![k],
            value,
            method,
            nodes_per_cell: self.nodes(),
            resolution: vec![res],
        }
    }

    /// The oracle: `sum_m conj(wal_k)(cell m) int_{cell m} f` on the grid
    /// `G = max(a_1, G_MIN)`.
    pub fn quadrature(&self, f: &dyn SmoothFunction, b: u32, k: u64) -> Result<CoefficientResult> {
        let e = KExpansion::new(b, k)?;
        let weight = wal_conj_cells_of(&e)?;
        let (v, res) = self.integrate_against(|x| f.deriv(0, x), &f.breakpoints(), &weight)?;
        Ok(self.result(k, v, Method::Quadrature, res))
    }

    /// `(-1)^n int f^(n) conj(wal_{k>n}) W_{k<=n}` for `0 <= n <= min(order, v)`.
    pub fn formula(&self, f: &dyn SmoothFunction, b: u32, k: u64, n: usize) -> Result<CoefficientResult> {
        let e = KExpansion::new(b, k)?;
        if n > e.v() {
            return Err(WalshError::OutOfRange(n, format!("n must be <= v(k) = {}", e.v())));
        }
        if n > f.order() {
            return Err(WalshError::InsufficientDerivatives {
                needed: n,
                available: f.order(),
            });
        }
        let weight = self.formula_weight(&e, n)?;
        let (v, res) = self.integrate_against(|x| f.deriv(n, x), &f.breakpoints(), &weight)?;
        Ok(self.result(k, v * sign(n), Method::Formula { n }, res))
    }

    /// The derivative formula at the largest admissible `n`; its error
    /// scales with the weight, so it stays accurate for tiny coefficients.
    pub fn accurate(&self, f: &dyn SmoothFunction, b: u32, k: u64) -> Result<CoefficientResult> {
        let v = KExpansion::new(b, k)?.v();
        self.formula(f, b, k, v.min(f.order()))
    }

    /// Higher-order formula with `r` extra terms; needs `order >= v + r`.
    pub fn higher_order(&self, f: &dyn SmoothFunction, b: u32, k: u64, r: usize) -> Result<CoefficientResult> {
        let e = KExpansion::new(b, k)?;
        let v = e.v();
        if f.order() < v + r {
            return Err(WalshError::InsufficientDerivatives {
                needed: v + r,
                available: f.order(),
            });
        }
        let (value, res) = self.extra_terms(f, &e, r)?;
        Ok(self.result(k, value, Method::HigherOrder { r }, res))
    }

    fn extra_terms(&self, f: &dyn SmoothFunction, e: &KExpansion, r: usize) -> Result<(Complex64, u32)> {
        let v = e.v();
        let (b, k) = (e.base(), e.k());
        let tower = self.tower(b, k, r)?;
        let mut sum = Complex64::new(0.0, 0.0);
        for (i, w) in tower.iter().enumerate() {
            sum += w.integral() * f.integral_of_deriv(v + i) * sign(v + i);
        }
        let top = &tower[r];
        let (rem, res) = self.integrate_against(|x| f.deriv(v + r, x), &f.breakpoints(), &top.centred())?;
        Ok((sum + rem * sign(v + r), res))
    }

    /// Sobolev representation of smoothness `alpha`: the higher-order
    /// formula with `r = alpha - v` when `alpha >= v`, otherwise the
    /// derivative formula with `n = alpha`.
    pub fn sobolev(&self, f: &dyn SmoothFunction, b: u32, k: u64, alpha: usize) -> Result<CoefficientResult> {
        let e = KExpansion::new(b, k)?;
        if f.order() < alpha {
            return Err(WalshError::InsufficientDerivatives {
                needed: alpha,
                available: f.order(),
            });
        }
        let (value, res) = if alpha >= e.v() {
            self.extra_terms(f, &e, alpha - e.v())?
        } else {
            let weight = self.formula_weight(&e, alpha)?;
            let (v, res) = self.integrate_against(|x| f.deriv(alpha, x), &f.breakpoints(), &weight)?;
            (v * sign(alpha), res)
        };
        Ok(self.result(k, value, Method::Sobolev { alpha }, res))
    }

    /// Tensor-product version of [`Self::formula`] for `s <= 3` variables.
    pub fn formula_multi(&self, f: &dyn MultiFunction, b: u32, ks: &[u64], ns: &[usize]) -> Result<CoefficientResult> {
        let s = f.dim();
        if s > MAX_DIM {
            return Err(WalshError::DimensionCap(s, MAX_DIM));
        }
        if ks.len() != s {
            return Err(WalshError::DimensionMismatch(ks.len(), s));
        }
        if ns.len() != s {
            return Err(WalshError::DimensionMismatch(ns.len(), s));
        }
        // per coordinate: quadrature points with weight-function-scaled weights
        let mut axes: Vec<Vec<(f64, Complex64)>> = Vec::with_capacity(s);
        let mut resolution = Vec::with_capacity(s);
        for j in 0..s {
            let e = KExpansion::new(b, ks[j])?;
            if ns[j] > e.v() {
                return Err(WalshError::OutOfRange(ns[j], format!("n_{j} must be <= v(k_{j}) = {}", e.v())));
            }
            if ns[j] > f.order(j) {
                return Err(WalshError::InsufficientDerivatives {
                    needed: ns[j],
                    available: f.order(j),
                });
            }
            let weight = self.formula_weight(&e, ns[j])?;
            let h = weight.cell_width();
            let mut pts = Vec::with_capacity(weight.cell_count() * self.nodes());
            for m in 0..weight.cell_count() {
                let lo = m as f64 * h;
                for (x, w) in self.rule.mapped(lo, lo + h) {
                    pts.push((x, weight.eval_cell(m, x - lo) * w));
                }
            }
            axes.push(pts);
            resolution.push(weight.resolution());
        }
        let mut xs = vec![0.0; s];
        let mut total = Complex64::new(0.0, 0.0);
        let mut idx = vec![0usize; s];
        'outer: loop {
            let mut w = Complex64::new(1.0, 0.0);
            for j in 0..s {
                let (x, wj) = axes[j][idx[j]];
                xs[j] = x;
                w *= wj;
            }
            total += f.mixed_deriv(ns, &xs) * w;
            for j in (0..s).rev() {
                idx[j] += 1;
                if idx[j] < axes[j].len() {
                    continue 'outer;
                }
                idx[j] = 0;
            }
            break;
        }
        Ok(CoefficientResult {
            k: ks.to_vec(),
            value: total * sign(ns.iter().sum()),
            method: Method::FormulaMulti { ns: ns.to_vec() },
            nodes_per_cell: self.nodes(),
            resolution,
        })
    }

    /// `h_1(x) = -int_0^1 b~_alpha(x - y) conj(wal_k(y)) dy`, with the cell
    /// containing `x` split at the kink `y = x`.
    pub fn h1_kernel_integral(&self, b: u32, k: u64, alpha: usize, x: f64) -> Result<Complex64> {
        check_h_args(alpha, x)?;
        let e = KExpansion::new(b, k)?;
        let wal = wal_conj_cells_of(&e)?;
        let h = wal.cell_width();
        let mut total = Complex64::new(0.0, 0.0);
        for m in 0..wal.cell_count() {
            let lo = m as f64 * h;
            let hi = lo + h;
            let g = |y: f64| b_tilde_unchecked(alpha, x, y);
            let s = if x > lo && x < hi {
                self.rule.integrate(lo, x, g) + self.rule.integrate(x, hi, g)
            } else {
                self.rule.integrate(lo, hi, g)
            };
            total += wal.cell(m)[0] * s;
        }
        Ok(-total)
    }

    /// The right-hand side matched by `h_1`: `W^(alpha - v)_k(x) - I^(alpha - v)(k)`
    /// when `alpha >= v`, else `conj(wal_{k>alpha}(x)) W_{k<=alpha}(x)`.
    pub fn h2_value(&self, b: u32, k: u64, alpha: usize, x: f64) -> Result<Complex64> {
        check_h_args(alpha, x)?;
        let e = KExpansion::new(b, k)?;
        if alpha >= e.v() {
            let tower = self.tower(b, k, alpha - e.v())?;
            let w = tower.last().expect("non-empty");
            Ok(w.eval(x)? - w.integral())
        } else {
            self.formula_weight(&e, alpha)?.eval(x)
        }
    }
}

fn check_h_args(alpha: usize, x: f64) -> Result<()> {
    if !(1..BERNOULLI_CAP).contains(&alpha) {
        return Err(WalshError::OutOfRange(alpha, format!("alpha must be in 1..{BERNOULLI_CAP}")));
    }
    if !(0.0..=1.0).contains(&x) {
        return Err(WalshError::OutOfDomain(x, "[0, 1]"));
    }
    Ok(())
}

/// Closed form of `h_1` for `k = 0`:
/// `-(b_{alpha+1}(x) - b_{alpha+1}(0)) - (+-)(b_{alpha+1}(1 - x) - b_{alpha+1}(0))`,
/// the sign being `+` for even `alpha`.
pub fn h1_zero_index(alpha: usize, x: f64) -> Result<f64> {
    check_h_args(alpha, x)?;
    let a = alpha + 1;
    let b0 = b_value_unchecked(a, 0.0);
    let left = b_value_unchecked(a, x) - b0;
    let right = b_value_unchecked(a, 1.0 - x) - b0;
    Ok(-(left + sign(alpha) * right))
}

pub fn coeff_quadrature(f: &dyn SmoothFunction, b: u32, k: u64, nodes_per_cell: usize) -> Result<CoefficientResult> {
    if nodes_per_cell == DEFAULT_NODES {
        default_engine().quadrature(f, b, k)
    } else {
        engine_for(nodes_per_cell).quadrature(f, b, k)
    }
}

pub fn coeff_formula(f: &dyn SmoothFunction, b: u32, k: u64, n: usize) -> Result<CoefficientResult> {
    default_engine().formula(f, b, k, n)
}

pub fn coeff_formula_multi(f: &dyn MultiFunction, b: u32, ks: &[u64], ns: &[usize]) -> Result<CoefficientResult> {
    default_engine().formula_multi(f, b, ks, ns)
}

pub fn coeff_higher_order(f: &dyn SmoothFunction, b: u32, k: u64, r: usize) -> Result<CoefficientResult> {
    default_engine().higher_order(f, b, k, r)
}

pub fn coeff_sobolev(f: &dyn SmoothFunction, b: u32, k: u64, alpha: usize) -> Result<CoefficientResult> {
    default_engine().sobolev(f, b, k, alpha)
}

pub fn h1_kernel_integral(b: u32, k: u64, alpha: usize, x: f64) -> Result<Complex64> {
    default_engine().h1_kernel_integral(b, k, alpha, x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bernoulli::walsh_coeff_bernoulli;
    use crate::functions::{Family, ProductFunction};
    use crate::walsh::wal_eval;

    fn close(a: Complex64, b: Complex64, tol: f64) {
        assert!((a - b).norm() <= tol, "{a} vs {b} (diff {:e})", (a - b).norm());
    }

    fn one() -> Family {
        Family::Poly(vec![1.0])
    }

    #[test]
    fn quadrature_examples() {
        close(coeff_quadrature(&one(), 2, 0, 16).unwrap().value, Complex64::new(1.0, 0.0), 1e-15);
        for k in 1..27 {
            close(coeff_quadrature(&one(), 3, k, 16).unwrap().value, Complex64::new(0.0, 0.0), 4e-15);
        }
        let r = coeff_quadrature(&Family::Bernoulli(1), 2, 1, 16).unwrap();
        close(r.value, Complex64::new(-0.25, 0.0), 1e-15);
        assert_eq!(r.resolution, vec![G_MIN]);
        assert_eq!(r.method, Method::Quadrature);
    }

    #[test]
    fn n_zero_formula_is_the_oracle() {
        let f = Family::Exp(1.0);
        for k in 0..40 {
            let a = coeff_quadrature(&f, 3, k, 16).unwrap().value;
            let b = coeff_formula(&f, 3, k, 0).unwrap().value;
            assert_eq!(a, b);
        }
    }

    #[test]
    fn formula_paths_agree() {
        let f = Family::Exp(1.0);
        let vals: Vec<Complex64> = (0..=2).map(|n| coeff_formula(&f, 2, 3, n).unwrap().value).collect();
        close(vals[0], vals[1], 1e-10);
        close(vals[0], vals[2], 1e-10);
        assert!(coeff_formula(&f, 2, 3, 3).is_err());
        let b2 = coeff_formula(&Family::Bernoulli(2), 2, 1, 1).unwrap().value;
        close(b2, walsh_coeff_bernoulli(2, 1, 2).unwrap(), 1e-15);
        close(b2, Complex64::new(0.0, 0.0), 1e-15);
    }

    #[test]
    fn higher_order_examples() {
        let f = Family::Exp(1.0);
        close(
            coeff_higher_order(&f, 2, 5, 0).unwrap().value,
            coeff_formula(&f, 2, 5, 2).unwrap().value,
            1e-14,
        );
        close(
            coeff_higher_order(&Family::Bernoulli(4), 2, 1, 3).unwrap().value,
            walsh_coeff_bernoulli(2, 1, 4).unwrap(),
            1e-15,
        );
        let g = Family::Exp(1.0);
        close(
            coeff_higher_order(&g, 3, 2, 2).unwrap().value,
            coeff_quadrature(&g, 3, 2, 16).unwrap().value,
            1e-12,
        );
        let low = Family::TruncatedPower { knot: 0.5, degree: 2 };
        assert!(matches!(
            coeff_higher_order(&low, 2, 3, 1),
            Err(WalshError::InsufficientDerivatives { .. })
        ));
    }

    #[test]
    fn sobolev_examples() {
        for k in 1..32 {
            let v = KExpansion::new(2, k).unwrap().v();
            if v <= 3 {
                close(
                    coeff_sobolev(&Family::Bernoulli(3), 2, k, 3).unwrap().value,
                    walsh_coeff_bernoulli(2, k, 3).unwrap(),
                    1e-15,
                );
            }
        }
        let f = Family::Exp(1.0);
        close(
            coeff_sobolev(&f, 2, 7, 1).unwrap().value,
            coeff_quadrature(&f, 2, 7, 16).unwrap().value,
            1e-14,
        );
        let spline = Family::TruncatedPower { knot: 1.0 / 3.0, degree: 3 };
        for k in 1..81 {
            let s = coeff_sobolev(&spline, 3, k, 3).unwrap().value;
            let o = coeff_quadrature(&spline, 3, k, 16).unwrap().value;
            close(s, o, 1e-12);
        }
    }

    #[test]
    fn multi_examples() {
        let f = ProductFunction::from_families(vec![one(), one()]);
        close(coeff_formula_multi(&f, 2, &[0, 0], &[0, 0]).unwrap().value, Complex64::new(1.0, 0.0), 1e-14);
        close(coeff_formula_multi(&f, 2, &[1, 0], &[0, 0]).unwrap().value, Complex64::new(0.0, 0.0), 1e-15);
        let g = ProductFunction::from_families(vec![Family::Bernoulli(2), Family::Bernoulli(3)]);
        let want = walsh_coeff_bernoulli(2, 1, 2).unwrap() * walsh_coeff_bernoulli(2, 1, 3).unwrap();
        close(coeff_formula_multi(&g, 2, &[1, 1], &[1, 1]).unwrap().value, want, 1e-15);
        let e = ProductFunction::from_families(vec![Family::Exp(1.0), Family::Exp(2.0)]);
        let a = coeff_formula_multi(&e, 3, &[5, 2], &[1, 0]).unwrap().value;
        let b = coeff_formula_multi(&e, 3, &[5, 2], &[0, 0]).unwrap().value;
        close(a, b, 1e-12);
        let four = ProductFunction::from_families(vec![one(), one(), one(), one()]);
        assert!(matches!(
            coeff_formula_multi(&four, 2, &[0; 4], &[0; 4]),
            Err(WalshError::DimensionCap(4, 3))
        ));
    }

    #[test]
    fn node_doubling_is_stable() {
        for f in [Family::Exp(2.0), Family::Sin { freq: 1.0, phase: 1.0 }, Family::Bernoulli(5)] {
            for k in 0..32 {
                let a = coeff_quadrature(&f, 2, k, 16).unwrap().value;
                let b = coeff_quadrature(&f, 2, k, 32).unwrap().value;
                close(a, b, 1e-12);
            }
        }
    }

    #[test]
    fn partial_sums_reproduce_cell_midpoints() {
        let f = Family::Bernoulli(2);
        let g = 8u32;
        let n = 1u64 << g;
        let coeffs: Vec<Complex64> = (0..n).map(|k| coeff_quadrature(&f, 2, k, 16).unwrap().value).collect();
        let mut worst: f64 = 0.0;
        for m in 0..n {
            let x = (m as f64 + 0.5) / n as f64;
            let s: Complex64 = (0..n).map(|k| coeffs[k as usize] * wal_eval(2, k, x).unwrap()).sum();
            worst = worst.max((s - f.deriv(0, x)).norm());
        }
        assert!(worst < 1e-3, "{worst}");
    }

    #[test]
    fn h1_matches_h2() {
        let eng = CoeffEngine::default();
        for alpha in 1..=3 {
            for k in 0..27u64 {
                for i in 0..10 {
                    let x = (i as f64 * 0.618_033_988_749 + 0.05).fract();
                    let h1 = eng.h1_kernel_integral(3, k, alpha, x).unwrap();
                    let h2 = eng.h2_value(3, k, alpha, x).unwrap();
                    close(h1, h2, 1e-12);
                }
            }
        }
        for alpha in 1..=3 {
            for i in 0..=10 {
                let x = i as f64 / 10.0;
                let h1 = h1_kernel_integral(2, 0, alpha, x).unwrap();
                close(h1, Complex64::new(h1_zero_index(alpha, x).unwrap(), 0.0), 1e-14);
            }
        }
        assert!(h1_kernel_integral(2, 1, 0, 0.5).is_err());
    }
}
