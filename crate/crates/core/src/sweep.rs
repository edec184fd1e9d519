//! Bound verification sweeps over ranges of `k`.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::badic::KExpansion;
use crate::bounds::{
    bound_bernoulli, bound_c_infty, bound_periodic, bound_smooth_multi_with, bound_smooth_with, bound_sobolev,
    bound_sobolev_simple, bound_w_base_interval, bound_w_extra, bound_w_sup, conjugate, f_norm_p_alpha,
    BernoulliBound, CArg,
};
use crate::coefficients::{CoeffEngine, DEFAULT_NODES};
use crate::error::{Result, WalshError};
use crate::exec::Execution;
use crate::functions::{Family, MultiFunction, ProductFunction, SmoothFunction};
use crate::wfunc::{build_w, build_w_tower};

pub const DEFAULT_PASS_TOL: f64 = 1e-9;
pub const DEFAULT_ZERO_TOL: f64 = 1e-11;

/// A norm exponent in `[1, inf]`; serialised as a number or `"inf"`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Exponent(pub f64);

impl Exponent {
    pub const ONE: Exponent = Exponent(1.0);
    pub const INF: Exponent = Exponent(f64::INFINITY);
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_infinite() {
            f.write_str("inf")
        } else {
            write!(f, "{}", self.0)
        }
    }
}

impl FromStr for Exponent {
    type Err = WalshError;

    fn from_str(s: &str) -> Result<Self> {
        let v = match s.trim() {
            "inf" | "infinity" => f64::INFINITY,
            t => t
                .parse::<f64>()
                .map_err(|_| WalshError::InvalidExponent(s.to_string()))?,
        };
        if v.is_nan() || v < 1.0 {
            return Err(WalshError::InvalidExponent(s.to_string()));
        }
        Ok(Exponent(v))
    }
}

impl Serialize for Exponent {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if self.0.is_infinite() {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(self.0)
        }
    }
}

impl<'de> Deserialize<'de> for Exponent {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(v) => Exponent::from_str(&v.to_string()),
            Raw::Text(t) => Exponent::from_str(&t),
        }
        .map_err(serde::de::Error::custom)
    }
}

fn serialize_ratio<S: Serializer>(r: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if r.is_finite() {
        s.serialize_f64(*r)
    } else {
        s.serialize_str("inf")
    }
}

/// Theorem tags understood by [`verify_sweep`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Theorem {
    /// Smooth functions, one variable.
    Smooth,
    /// Smooth functions, several variables.
    SmoothMulti,
    /// Infinitely differentiable functions with geometric derivative growth.
    CInfinity,
    /// Bernoulli polynomials.
    Bernoulli,
    /// Sobolev space, explicit integrals.
    Sobolev,
    /// Sobolev space, `||f||_{p,alpha}` form.
    SobolevNorm,
    /// Periodic Sobolev subspace.
    Periodic,
    /// Sup bounds on `W_k`.
    WSup,
    /// Bounds on `W^(j)_k` and `I^(j)(k)`.
    WExtra,
}

impl Theorem {
    pub const ALL: [Theorem; 9] = [
        Theorem::Smooth,
        Theorem::SmoothMulti,
        Theorem::CInfinity,
        Theorem::Bernoulli,
        Theorem::Sobolev,
        Theorem::SobolevNorm,
        Theorem::Periodic,
        Theorem::WSup,
        Theorem::WExtra,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            Theorem::Smooth => "smooth",
            Theorem::SmoothMulti => "smooth-multi",
            Theorem::CInfinity => "c-infinity",
            Theorem::Bernoulli => "bernoulli",
            Theorem::Sobolev => "sobolev",
            Theorem::SobolevNorm => "sobolev-norm",
            Theorem::Periodic => "periodic",
            Theorem::WSup => "w-sup",
            Theorem::WExtra => "w-extra",
        }
    }
}

impl fmt::Display for Theorem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Theorem {
    type Err = WalshError;

    fn from_str(s: &str) -> Result<Self> {
        Theorem::ALL
            .into_iter()
            .find(|t| t.tag() == s)
            .ok_or_else(|| WalshError::UnknownTheorem(s.to_string()))
    }
}

/// Pass criteria: `ratio <= 1 + pass`, and `|coeff| <= zero` for
/// exact-zero claims.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub pass: f64,
    pub zero: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            pass: DEFAULT_PASS_TOL,
            zero: DEFAULT_ZERO_TOL,
        }
    }
}

impl Tolerances {
    /// Defaults overridden by `WALSH_PASS_TOL` and `WALSH_ZERO_TOL`.
    pub fn from_env() -> Result<Self> {
        let read = |name: &str, default: f64| -> Result<f64> {
            match std::env::var(name) {
                Ok(v) => v
                    .trim()
                    .parse::<f64>()
                    .ok()
                    .filter(|x| x.is_finite() && *x >= 0.0)
                    .ok_or_else(|| WalshError::Config(format!("{name}={v} is not a nonnegative number"))),
                Err(_) => Ok(default),
            }
        };
        Ok(Tolerances {
            pass: read("WALSH_PASS_TOL", DEFAULT_PASS_TOL)?,
            zero: read("WALSH_ZERO_TOL", DEFAULT_ZERO_TOL)?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub theorem: Theorem,
    pub base: u32,
    /// Range `k_start..k_end` of indices (per coordinate for `smooth-multi`).
    pub k_start: u64,
    pub k_end: u64,
    /// Explicit indices; when non-empty they replace the range.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub k_list: Vec<u64>,
    /// `alpha` values; `r` for `bernoulli`, `j` for `w-extra`.
    #[serde(default)]
    pub orders: Vec<usize>,
    /// Function specs such as `exp:1`; the factors for `smooth-multi`.
    #[serde(default)]
    pub functions: Vec<String>,
    /// `p` for the smooth bounds, `q` for `sobolev-norm`.
    #[serde(default = "default_exponents")]
    pub exponents: Vec<Exponent>,
    #[serde(default)]
    pub c_arg: CArg,
    #[serde(default = "default_nodes")]
    pub nodes: usize,
    #[serde(default)]
    pub execution: Execution,
    #[serde(default)]
    pub tolerances: Tolerances,
}

fn default_exponents() -> Vec<Exponent> {
    vec![Exponent::ONE]
}

fn default_nodes() -> usize {
    DEFAULT_NODES
}

impl SweepConfig {
    pub fn new(theorem: Theorem, base: u32, k_end: u64) -> Self {
        SweepConfig {
            theorem,
            base,
            k_start: 0,
            k_end,
            k_list: Vec::new(),
            orders: Vec::new(),
            functions: Vec::new(),
            exponents: default_exponents(),
            c_arg: CArg::default(),
            nodes: DEFAULT_NODES,
            execution: Execution::default(),
            tolerances: Tolerances::default(),
        }
    }

    pub fn range(mut self, start: u64, end: u64) -> Self {
        self.k_start = start;
        self.k_end = end;
        self
    }

    pub fn k_list(mut self, ks: impl IntoIterator<Item = u64>) -> Self {
        self.k_list = ks.into_iter().collect();
        self
    }

    /// The indices swept along each coordinate.
    pub fn k_values(&self) -> Vec<u64> {
        let lo = match self.theorem {
            Theorem::Smooth | Theorem::SmoothMulti | Theorem::CInfinity => 0,
            _ => 1,
        };
        if self.k_list.is_empty() {
            (self.k_start.max(lo)..self.k_end.max(lo)).collect()
        } else {
            self.k_list.iter().copied().filter(|&k| k >= lo).collect()
        }
    }

    pub fn orders(mut self, orders: impl IntoIterator<Item = usize>) -> Self {
        self.orders = orders.into_iter().collect();
        self
    }

    pub fn functions<S: Into<String>>(mut self, fs: impl IntoIterator<Item = S>) -> Self {
        self.functions = fs.into_iter().map(Into::into).collect();
        self
    }

    pub fn exponents(mut self, ps: impl IntoIterator<Item = f64>) -> Self {
        self.exponents = ps.into_iter().map(Exponent).collect();
        self
    }

    pub fn execution(mut self, exec: Execution) -> Self {
        self.execution = exec;
        self
    }

    pub fn c_arg(mut self, c: CArg) -> Self {
        self.c_arg = c;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub b: u32,
    pub k: Vec<u64>,
    /// `alpha`, `r` or `j` depending on the theorem.
    pub alpha: usize,
    pub theorem: Theorem,
    /// Function spec, or the W quantity being bounded.
    pub function: String,
    pub exponent: Option<Exponent>,
    pub c_arg: Option<CArg>,
    pub coeff: Complex64,
    pub coeff_abs: f64,
    pub bound: f64,
    pub exact_zero: bool,
    #[serde(serialize_with = "serialize_ratio")]
    pub ratio: f64,
    pub pass: bool,
    pub tolerance: f64,
}

struct Meta<'a> {
    b: u32,
    k: Vec<u64>,
    alpha: usize,
    theorem: Theorem,
    function: String,
    exponent: Option<Exponent>,
    c_arg: Option<CArg>,
    tol: &'a Tolerances,
}

impl Meta<'_> {
    fn report(self, coeff: Complex64, bound: f64, exact_zero: bool) -> BoundReport {
        let abs = coeff.norm();
        let (ratio, pass, tolerance) = if exact_zero {
            let ok = abs <= self.tol.zero;
            (if ok { 0.0 } else { f64::INFINITY }, ok, self.tol.zero)
        } else {
            let ratio = if bound > 0.0 {
                abs / bound
            } else if abs == 0.0 {
                0.0
            } else {
                f64::INFINITY
            };
            (ratio, ratio <= 1.0 + self.tol.pass, self.tol.pass)
        };
        BoundReport {
            b: self.b,
            k: self.k,
            alpha: self.alpha,
            theorem: self.theorem,
            function: self.function,
            exponent: self.exponent,
            c_arg: self.c_arg,
            coeff,
            coeff_abs: abs,
            bound,
            exact_zero,
            ratio,
            pass,
            tolerance,
        }
    }
}

/// Aggregate of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepSummary {
    pub theorem: Theorem,
    pub base: u32,
    pub reports: usize,
    pub failed: usize,
    #[serde(serialize_with = "serialize_ratio")]
    pub max_ratio: f64,
    pub pass: bool,
}

impl SweepSummary {
    pub fn new(config: &SweepConfig, reports: &[BoundReport]) -> Self {
        let failed = reports.iter().filter(|r| !r.pass).count();
        SweepSummary {
            theorem: config.theorem,
            base: config.base,
            reports: reports.len(),
            failed,
            max_ratio: reports.iter().map(|r| r.ratio).fold(0.0, f64::max),
            pass: failed == 0,
        }
    }
}

/// Per-function scalars shared by every `k`.
struct Profile {
    family: Family,
    /// `int f^(i)` for `i = 0..=top`.
    integrals: Vec<Complex64>,
    /// `norms[e][i] = ||f^(i)||_{p_e}` for the configured exponents, plus
    /// the L1 norms in `l1`.
    norms: Vec<Vec<f64>>,
    l1: Vec<f64>,
}

impl Profile {
    fn new(family: Family, top: usize, exps: &[Exponent]) -> Self {
        let top = top.min(family.order());
        let integrals = (0..=top).map(|i| family.integral_of_deriv(i)).collect();
        let norms = exps
            .iter()
            .map(|p| (0..=top).map(|i| family.lp_norm_of_deriv(i, p.0)).collect())
            .collect();
        let l1 = (0..=top).map(|i| family.lp_norm_of_deriv(i, 1.0)).collect();
        Profile {
            family,
            integrals,
            norms,
            l1,
        }
    }
}

fn parse_functions(specs: &[String]) -> Result<Vec<Family>> {
    specs.iter().map(|s| Family::parse(s)).collect()
}

fn need_orders(config: &SweepConfig) -> Result<()> {
    if config.orders.is_empty() {
        return Err(WalshError::Config(format!("theorem `{}` needs at least one order", config.theorem)));
    }
    Ok(())
}

fn need_functions(fs: &[Family], theorem: Theorem) -> Result<()> {
    if fs.is_empty() {
        return Err(WalshError::Config(format!("theorem `{theorem}` needs at least one function")));
    }
    Ok(())
}

fn check_order(f: &Family, alpha: usize) -> Result<()> {
    if f.order() < alpha {
        return Err(WalshError::InsufficientDerivatives {
            needed: alpha,
            available: f.order(),
        });
    }
    Ok(())
}

/// Runs the sweep described by `config`. Reports come back ordered by `k`
/// (then function, order and exponent), independent of the execution
/// strategy.
pub fn verify_sweep(config: &SweepConfig) -> Result<Vec<BoundReport>> {
    KExpansion::new(config.base, 0)?;
    let ks = config.k_values();
    if ks.is_empty() {
        return Ok(Vec::new());
    }
    let families = parse_functions(&config.functions)?;
    let top = config.orders.iter().copied().max().unwrap_or(0);
    let engine = Arc::new(CoeffEngine::new(config.nodes));
    let b = config.base;
    let t = config.theorem;
    let tol = config.tolerances;
    let exec = config.execution;

    // validate once up front so that workers only hit numerical errors
    match t {
        Theorem::Smooth | Theorem::SmoothMulti | Theorem::Sobolev | Theorem::SobolevNorm => {
            need_orders(config)?;
            need_functions(&families, t)?;
            if matches!(t, Theorem::Sobolev | Theorem::SobolevNorm) {
                for f in &families {
                    check_order(f, top)?;
                }
            }
        }
        Theorem::CInfinity => {
            need_functions(&families, t)?;
            if families.iter().any(|f| !matches!(f, Family::Exp(l) if *l > 0.0)) {
                return Err(WalshError::Config("c-infinity sweeps take exp:lambda with lambda > 0".into()));
            }
        }
        Theorem::Bernoulli | Theorem::Periodic | Theorem::WExtra => need_orders(config)?,
        Theorem::WSup => {}
    }
    if matches!(t, Theorem::Smooth | Theorem::SmoothMulti) && b > 2 {
        if let Some(p) = config.exponents.iter().find(|p| p.0 != 1.0) {
            return Err(WalshError::InvalidExponent(format!(
                "p = {p}: for b > 2 the smooth bound is stated for the L1 norm only (use p = 1)"
            )));
        }
    }

    let profiles: Arc<Vec<Profile>> = Arc::new(
        families
            .into_iter()
            .map(|f| Profile::new(f, top, &config.exponents))
            .collect(),
    );

    let per_k: Vec<Result<Vec<BoundReport>>> = match t {
        Theorem::SmoothMulti => {
            let s = profiles.len();
            if s > crate::coefficients::MAX_DIM {
                return Err(WalshError::DimensionCap(s, crate::coefficients::MAX_DIM));
            }
            let span = ks.len() as u64;
            let total = span
                .checked_pow(s as u32)
                .ok_or_else(|| WalshError::Config("k-range too large".into()))?;
            exec.map_range(total, |idx| {
                let mut point = vec![0u64; s];
                let mut rest = idx;
                for j in (0..s).rev() {
                    point[j] = ks[(rest % span) as usize];
                    rest /= span;
                }
                sweep_multi(config, &engine, &profiles, &point, &tol)
            })
        }
        _ => exec.map(ks, |k| sweep_one(config, &engine, &profiles, k, &tol)),
    };
    let mut out = Vec::new();
    for r in per_k {
        out.extend(r?);
    }
    Ok(out)
}

fn sweep_one(
    config: &SweepConfig,
    engine: &CoeffEngine,
    profiles: &[Profile],
    k: u64,
    tol: &Tolerances,
) -> Result<Vec<BoundReport>> {
    let b = config.base;
    let t = config.theorem;
    let e = KExpansion::new(b, k)?;
    let v = e.v();
    let meta = |alpha: usize, function: String, exponent: Option<Exponent>, c_arg: Option<CArg>| Meta {
        b,
        k: vec![k],
        alpha,
        theorem: t,
        function,
        exponent,
        c_arg,
        tol,
    };
    let mut out = Vec::new();
    match t {
        Theorem::Smooth => {
            for prof in profiles {
                let coeff = engine.accurate(&prof.family, b, k)?.value;
                for &alpha in &config.orders {
                    let n = alpha.min(v).min(prof.family.order());
                    for (ei, p) in config.exponents.iter().enumerate() {
                        let bound = bound_smooth_with(b, k, alpha, prof.norms[ei][n], p.0, config.c_arg)?;
                        out.push(meta(alpha, prof.family.label(), Some(*p), Some(config.c_arg)).report(coeff, bound, false));
                    }
                }
            }
        }
        Theorem::CInfinity => {
            for prof in profiles {
                let Family::Exp(l) = prof.family else { unreachable!("validated") };
                let coeff = engine.accurate(&prof.family, b, k)?.value;
                let d = (l.exp() - 1.0) / l;
                let bound = bound_c_infty(b, &[k], &[l], d)?;
                out.push(meta(0, prof.family.label(), None, None).report(coeff, bound, false));
            }
        }
        Theorem::Bernoulli => {
            let rmax = config.orders.iter().copied().max().unwrap_or(0);
            let tower = if rmax >= v { build_w_tower(b, k, rmax - v)? } else { Vec::new() };
            for &r in &config.orders {
                let f = Family::Bernoulli(r);
                let claim = bound_bernoulli(b, k, r)?;
                let (coeff, bound, zero) = match claim {
                    BernoulliBound::ExactZero => (engine.quadrature(&f, b, k)?.value, 0.0, true),
                    BernoulliBound::Bound(x) => {
                        let sign = if r % 2 == 0 { 1.0 } else { -1.0 };
                        (tower[r - v].integral() * sign, x, false)
                    }
                };
                out.push(meta(r, f.label(), None, None).report(coeff, bound, zero));
            }
        }
        Theorem::Sobolev => {
            for prof in profiles {
                let coeff = engine.accurate(&prof.family, b, k)?.value;
                for &alpha in &config.orders {
                    let bound = bound_sobolev(b, k, alpha, &prof.integrals[..=alpha], prof.l1[alpha])?;
                    out.push(meta(alpha, prof.family.label(), None, None).report(coeff, bound, false));
                }
            }
        }
        Theorem::SobolevNorm => {
            for prof in profiles {
                let coeff = engine.accurate(&prof.family, b, k)?.value;
                for &alpha in &config.orders {
                    for q in &config.exponents {
                        let p = conjugate(q.0)?;
                        let norm = f_norm_p_alpha(&prof.family, p, alpha)?;
                        let bound = bound_sobolev_simple(b, k, alpha, p, norm)?;
                        out.push(meta(alpha, prof.family.label(), Some(*q), None).report(coeff, bound, false));
                    }
                }
            }
        }
        Theorem::Periodic => {
            for &alpha in &config.orders {
                let own;
                let list: Vec<&Family> = if profiles.is_empty() {
                    own = Family::Bernoulli(alpha);
                    vec![&own]
                } else {
                    profiles.iter().map(|p| &p.family).collect()
                };
                for f in list {
                    check_order(f, alpha)?;
                    let ints: Vec<Complex64> = (0..=alpha).map(|i| f.integral_of_deriv(i)).collect();
                    let l1 = f.lp_norm_of_deriv(alpha, 1.0);
                    let bound = bound_periodic(b, k, alpha, l1, Some(&ints))?;
                    let coeff = engine.accurate(f, b, k)?.value;
                    out.push(meta(alpha, f.label(), None, None).report(coeff, bound, false));
                }
            }
        }
        Theorem::WSup => {
            let w = build_w(b, k)?;
            let sup = w.poly().norm(f64::INFINITY)?;
            out.push(meta(0, "sup|W|".into(), None, None).report(Complex64::new(sup, 0.0), bound_w_sup(b, k)?, false));
            if b > 2 {
                let n_base = (b as usize).pow(e.a_first() - e.a_last());
                let base_sup = (0..n_base).map(|m| w.poly().cell_sup(m)).fold(0.0, f64::max);
                out.push(meta(0, "sup|W| on [0,b^-a_v]".into(), None, None).report(
                    Complex64::new(base_sup, 0.0),
                    bound_w_base_interval(b, k)?,
                    false,
                ));
            }
        }
        Theorem::WExtra => {
            let jmax = config.orders.iter().copied().max().unwrap_or(0);
            let tower = build_w_tower(b, k, jmax)?;
            for &j in &config.orders {
                let w = &tower[j];
                let bd = bound_w_extra(b, k, j)?;
                let centred = w.centred().norm(f64::INFINITY)?;
                out.push(meta(j, "sup|W^(j)-I^(j)|".into(), None, None).report(
                    Complex64::new(centred, 0.0),
                    bd.centred,
                    false,
                ));
                if bd.integral_zero {
                    out.push(meta(j, "I^(j)".into(), None, None).report(w.integral(), 0.0, true));
                } else if let Some(x) = bd.integral {
                    out.push(meta(j, "|I^(j)|".into(), None, None).report(w.integral(), x, false));
                }
                if let Some(x) = bd.sup {
                    let sup = w.poly().norm(f64::INFINITY)?;
                    out.push(meta(j, "sup|W^(j)|".into(), None, None).report(Complex64::new(sup, 0.0), x, false));
                }
            }
        }
        Theorem::SmoothMulti => unreachable!("handled by sweep_multi"),
    }
    Ok(out)
}

fn sweep_multi(
    config: &SweepConfig,
    engine: &CoeffEngine,
    profiles: &[Profile],
    ks: &[u64],
    tol: &Tolerances,
) -> Result<Vec<BoundReport>> {
    let b = config.base;
    let f = ProductFunction::from_families(profiles.iter().map(|p| p.family.clone()).collect());
    let vs: Vec<usize> = ks
        .iter()
        .map(|&k| KExpansion::new(b, k).map(|e| e.v()))
        .collect::<Result<_>>()?;
    let ns: Vec<usize> = vs.iter().enumerate().map(|(j, &v)| v.min(f.order(j))).collect();
    let coeff = engine.formula_multi(&f, b, ks, &ns)?.value;
    let label = profiles
        .iter()
        .map(|p| p.family.label())
        .collect::<Vec<_>>()
        .join(" x ");
    let mut out = Vec::new();
    for &alpha in &config.orders {
        for (ei, p) in config.exponents.iter().enumerate() {
            let norm: f64 = profiles
                .iter()
                .zip(&vs)
                .map(|(prof, &v)| prof.norms[ei][alpha.min(v).min(prof.family.order())])
                .product();
            let alphas = vec![alpha; ks.len()];
            let bound = bound_smooth_multi_with(b, ks, &alphas, norm, p.0, config.c_arg)?;
            let m = Meta {
                b,
                k: ks.to_vec(),
                alpha,
                theorem: Theorem::SmoothMulti,
                function: label.clone(),
                exponent: Some(*p),
                c_arg: Some(config.c_arg),
                tol,
            };
            out.push(m.report(coeff, bound, false));
        }
    }
    Ok(out)
}
