//! Test integrands with explicitly supplied derivatives.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_complex::Complex64;

use crate::bernoulli::{b_value_unchecked, BERNOULLI_CAP};
use crate::error::{Result, WalshError};
use crate::quadrature::GaussLegendre;

/// Order reported by analytic functions.
pub const ANALYTIC_ORDER: usize = 32;

const NORM_PANELS: usize = 64;
const PANEL_SAMPLES: usize = 33;
const NORM_NODES: usize = 16;

/// A function on `[0, 1]` with `order()` derivatives available.
pub trait SmoothFunction: Send + Sync {
    fn order(&self) -> usize;

    /// `f^(i)(x)` for `0 <= i <= order()`.
    fn deriv(&self, i: usize, x: f64) -> Complex64;

    /// Points in `(0, 1)` where some derivative may fail to be smooth.
    fn breakpoints(&self) -> Vec<f64> {
        Vec::new()
    }

    /// `int_0^1 f^(i)`.
    fn integral_of_deriv(&self, i: usize) -> Complex64 {
        if i >= 1 {
            self.deriv(i - 1, 1.0) - self.deriv(i - 1, 0.0)
        } else {
            integrate_numeric(|x| self.deriv(0, x), &self.breakpoints())
        }
    }

    /// `||f^(i)||_{L^p}`, `p = f64::INFINITY` allowed.
    fn lp_norm_of_deriv(&self, i: usize, p: f64) -> f64 {
        lp_norm_numeric(|x| self.deriv(i, x), p, &self.breakpoints())
    }

    fn label(&self) -> String {
        "custom".into()
    }
}

fn panel_edges(breaks: &[f64]) -> Vec<f64> {
    let mut edges: Vec<f64> = (0..=NORM_PANELS).map(|i| i as f64 / NORM_PANELS as f64).collect();
    edges.extend(breaks.iter().copied().filter(|&t| t > 0.0 && t < 1.0));
    edges.sort_by(f64::total_cmp);
    edges.dedup_by(|a, b| (*a - *b).abs() < 1e-15);
    edges
}

fn rule() -> &'static GaussLegendre {
    static RULE: std::sync::OnceLock<GaussLegendre> = std::sync::OnceLock::new();
    RULE.get_or_init(|| GaussLegendre::new(NORM_NODES))
}

/// `int_0^1 g` by composite Gauss–Legendre, split at `breaks`.
pub fn integrate_numeric<G: Fn(f64) -> Complex64>(g: G, breaks: &[f64]) -> Complex64 {
    panel_edges(breaks)
        .windows(2)
        .map(|w| rule().integrate_complex(w[0], w[1], &g))
        .sum()
}

fn golden_min<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..100 {
        if b - a <= 4.0 * f64::EPSILON * b.abs().max(1e-300) {
            break;
        }
        if fc < fd {
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
    if fc < fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

fn panel_samples(lo: f64, hi: f64) -> impl Iterator<Item = f64> {
    (0..PANEL_SAMPLES).map(move |i| lo + (hi - lo) * i as f64 / (PANEL_SAMPLES - 1) as f64)
}

/// `||g||_{L^p}` by composite Gauss–Legendre. Interior minima of `|g|`
/// (where `|g|^p` may have a kink) are located and used as extra panel
/// edges; `p = f64::INFINITY` maximises over a dense sample with a
/// golden-section refinement.
pub fn lp_norm_numeric<G: Fn(f64) -> Complex64>(g: G, p: f64, breaks: &[f64]) -> f64 {
    let edges = panel_edges(breaks);
    let abs = |x: f64| g(x).norm();
    if p.is_infinite() {
        return edges
            .windows(2)
            .map(|w| {
                let ts: Vec<f64> = panel_samples(w[0], w[1]).collect();
                let vals: Vec<f64> = ts.iter().map(|&t| abs(t)).collect();
                let (i, &v) = vals
                    .iter()
                    .enumerate()
                    .max_by(|a, b| a.1.total_cmp(b.1))
                    .expect("samples");
                let lo = ts[i.saturating_sub(1)];
                let hi = ts[(i + 1).min(ts.len() - 1)];
                v.max(-golden_min(|t| -abs(t), lo, hi).1)
            })
            .fold(0.0, f64::max);
    }
    let total: f64 = edges
        .windows(2)
        .map(|w| {
            let ts: Vec<f64> = panel_samples(w[0], w[1]).collect();
            let vals: Vec<f64> = ts.iter().map(|&t| abs(t)).collect();
            let mut cuts = vec![w[0]];
            for i in 1..ts.len() - 1 {
                if vals[i] <= vals[i - 1] && vals[i] <= vals[i + 1] && vals[i] < vals[i - 1].max(vals[i + 1]) {
                    cuts.push(golden_min(abs, ts[i - 1], ts[i + 1]).0);
                }
            }
            cuts.push(w[1]);
            cuts.windows(2)
                .map(|c| rule().integrate(c[0], c[1], |x| abs(x).powf(p)))
                .sum::<f64>()
        })
        .sum();
    total.powf(1.0 / p)
}

/// Central-difference consistency of `deriv(i)` against `deriv(i - 1)`
/// for `1 <= i <= max_order`, at 20 interior points.
pub fn check_derivatives(f: &dyn SmoothFunction, max_order: usize) -> Result<()> {
    const H: f64 = 1e-5;
    const TOL: f64 = 1e-5;
    for i in 1..=max_order.min(f.order()) {
        for j in 0..20 {
            let x = (j as f64 + 0.5) / 20.0;
            let fd = (f.deriv(i - 1, x + H) - f.deriv(i - 1, x - H)) / (2.0 * H);
            let d = f.deriv(i, x);
            let err = (fd - d).norm() / d.norm().max(1.0);
            if err > TOL {
                return Err(WalshError::DerivativeCheck { order: i, x, err });
            }
        }
    }
    Ok(())
}

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// The built-in integrands.
#[derive(Debug, Clone, PartialEq)]
pub enum Family {
    /// `b_r = B_r / r!`.
    Bernoulli(usize),
    /// `exp(lambda x)`.
    Exp(f64),
    /// `sin(2 pi freq x + phase)`.
    Sin { freq: f64, phase: f64 },
    /// `sum_i c_i x^i`.
    Poly(Vec<f64>),
    /// `(x - knot)_+^degree`: `degree - 1` continuous derivatives and a
    /// jump in the last one.
    TruncatedPower { knot: f64, degree: usize },
}

fn falling(n: usize, i: usize) -> f64 {
    (0..i).map(|j| (n - j) as f64).product()
}

impl Family {
    pub fn parse(spec: &str) -> Result<Self> {
        spec.parse()
    }

    fn poly_deriv_coeffs(coeffs: &[f64], i: usize) -> Vec<f64> {
        coeffs
            .iter()
            .enumerate()
            .skip(i)
            .map(|(n, &cn)| cn * falling(n, i))
            .collect()
    }
}

fn horner(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &ci| acc * x + ci)
}

impl SmoothFunction for Family {
    fn order(&self) -> usize {
        match self {
            Family::TruncatedPower { degree, .. } => *degree,
            _ => ANALYTIC_ORDER,
        }
    }

    fn deriv(&self, i: usize, x: f64) -> Complex64 {
        match self {
            Family::Bernoulli(r) => {
                if i > *r {
                    c(0.0)
                } else {
                    c(b_value_unchecked(r - i, x))
                }
            }
            Family::Exp(l) => c(l.powi(i as i32) * (l * x).exp()),
            Family::Sin { freq, phase } => {
                let w = 2.0 * PI * freq;
                c(w.powi(i as i32) * (w * x + phase + i as f64 * PI / 2.0).sin())
            }
            Family::Poly(coeffs) => c(horner(&Self::poly_deriv_coeffs(coeffs, i), x)),
            Family::TruncatedPower { knot, degree } => {
                if i > *degree || x < *knot {
                    c(0.0)
                } else {
                    c(falling(*degree, i) * (x - knot).powi((degree - i) as i32))
                }
            }
        }
    }

    fn breakpoints(&self) -> Vec<f64> {
        match self {
            Family::TruncatedPower { knot, .. } => vec![*knot],
            _ => Vec::new(),
        }
    }

    fn integral_of_deriv(&self, i: usize) -> Complex64 {
        match self {
            Family::Bernoulli(r) => c(if i == *r { 1.0 } else { 0.0 }),
            Family::Exp(l) if i == 0 => {
                if *l == 0.0 {
                    c(1.0)
                } else {
                    c((l.exp() - 1.0) / l)
                }
            }
            Family::Poly(coeffs) if i == 0 => c(coeffs
                .iter()
                .enumerate()
                .map(|(n, cn)| cn / (n + 1) as f64)
                .sum()),
            Family::TruncatedPower { knot, degree } if i == 0 => {
                c((1.0 - knot).powi(*degree as i32 + 1) / (*degree as f64 + 1.0))
            }
            _ if i >= 1 => self.deriv(i - 1, 1.0) - self.deriv(i - 1, 0.0),
            _ => integrate_numeric(|x| self.deriv(i, x), &self.breakpoints()),
        }
    }

    fn lp_norm_of_deriv(&self, i: usize, p: f64) -> f64 {
        match self {
            Family::Exp(l) => {
                let scale = l.abs().powi(i as i32);
                if p.is_infinite() {
                    scale * l.exp().max(1.0)
                } else if *l == 0.0 {
                    scale
                } else {
                    scale * (((p * l).exp() - 1.0) / (p * l)).powf(1.0 / p)
                }
            }
            _ => lp_norm_numeric(|x| self.deriv(i, x), p, &self.breakpoints()),
        }
    }

    fn label(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Family::Bernoulli(r) => write!(f, "bernoulli:{r}"),
            Family::Exp(l) => write!(f, "exp:{l}"),
            Family::Sin { freq, phase } => write!(f, "sin:{freq},{phase}"),
            Family::Poly(cs) => {
                let parts: Vec<String> = cs.iter().map(|x| x.to_string()).collect();
                write!(f, "poly:{}", parts.join(","))
            }
            Family::TruncatedPower { knot, degree } => write!(f, "tpow:{knot},{degree}"),
        }
    }
}

impl FromStr for Family {
    type Err = WalshError;

    /// Parses `bernoulli:r`, `exp:lambda`, `sin:freq,phase`, `poly:c0,c1,...`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = |why: &str| WalshError::FunctionSpec(s.to_string(), why.to_string());
        let (name, args) = s.split_once(':').ok_or_else(|| bad("expected name:params"))?;
        let nums: Vec<f64> = args
            .split(',')
            .map(|t| t.trim().parse::<f64>().map_err(|_| bad("parameters must be numbers")))
            .collect::<Result<_>>()?;
        let finite = nums.iter().all(|x| x.is_finite());
        if !finite {
            return Err(bad("parameters must be finite"));
        }
        match (name.trim(), nums.as_slice()) {
            ("bernoulli", [r]) => {
                if r.fract() != 0.0 || *r < 0.0 || *r > BERNOULLI_CAP as f64 {
                    return Err(bad("degree must be an integer in 0..=30"));
                }
                Ok(Family::Bernoulli(*r as usize))
            }
            ("exp", [l]) => Ok(Family::Exp(*l)),
            ("sin", [freq, phase]) => Ok(Family::Sin { freq: *freq, phase: *phase }),
            ("poly", cs) if !cs.is_empty() => Ok(Family::Poly(cs.to_vec())),
            ("bernoulli" | "exp", _) => Err(bad("expected one parameter")),
            ("sin", _) => Err(bad("expected freq,phase")),
            _ => Err(bad("unknown family; use bernoulli, exp, sin or poly")),
        }
    }
}

/// A function of `s` variables with mixed partial derivatives.
pub trait MultiFunction: Send + Sync {
    fn dim(&self) -> usize;

    /// Available derivative order in coordinate `j`.
    fn order(&self, j: usize) -> usize;

    /// `d^(n_1 + ... + n_s) f / dx_1^n_1 ... dx_s^n_s` at `xs`.
    fn mixed_deriv(&self, ns: &[usize], xs: &[f64]) -> Complex64;
}

/// `f(x) = prod_j f_j(x_j)`.
#[derive(Clone)]
pub struct ProductFunction {
    factors: Vec<Arc<dyn SmoothFunction>>,
}

impl ProductFunction {
    pub fn new(factors: Vec<Arc<dyn SmoothFunction>>) -> Self {
        ProductFunction { factors }
    }

    pub fn from_families(fs: Vec<Family>) -> Self {
        ProductFunction {
            factors: fs
                .into_iter()
                .map(|f| Arc::new(f) as Arc<dyn SmoothFunction>)
                .collect(),
        }
    }

    pub fn factor(&self, j: usize) -> &dyn SmoothFunction {
        self.factors[j].as_ref()
    }

    /// `||d^ns f||_{L^p([0,1]^s)}`, which factorises.
    pub fn lp_norm_of_mixed(&self, ns: &[usize], p: f64) -> f64 {
        self.factors
            .iter()
            .zip(ns)
            .map(|(f, &n)| f.lp_norm_of_deriv(n, p))
            .product()
    }
}

impl MultiFunction for ProductFunction {
    fn dim(&self) -> usize {
        self.factors.len()
    }

    fn order(&self, j: usize) -> usize {
        self.factors[j].order()
    }

    fn mixed_deriv(&self, ns: &[usize], xs: &[f64]) -> Complex64 {
        self.factors
            .iter()
            .zip(ns.iter().zip(xs))
            .map(|(f, (&n, &x))| f.deriv(n, x))
            .product()
    }
}

/// A [`SmoothFunction`] built from closures `f, f', ..., f^(order)`.
pub struct FnSmooth {
    derivs: Vec<Box<dyn Fn(f64) -> Complex64 + Send + Sync>>,
}

impl FnSmooth {
    pub fn new(derivs: Vec<Box<dyn Fn(f64) -> Complex64 + Send + Sync>>) -> Self {
        assert!(!derivs.is_empty(), "need at least f itself");
        FnSmooth { derivs }
    }
}

impl SmoothFunction for FnSmooth {
    fn order(&self) -> usize {
        self.derivs.len() - 1
    }

    fn deriv(&self, i: usize, x: f64) -> Complex64 {
        (self.derivs[i])(x)
    }
}
