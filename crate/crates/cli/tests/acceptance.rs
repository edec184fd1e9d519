//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs without the libtest harness so the lines always show up in
//! `cargo test` output. The process exits non-zero when any criterion fails.

use std::path::PathBuf;
use std::process::Command;
use std::time::Instant;

use num_complex::Complex64;
use walsh_core::badic::KExpansion;
use walsh_core::bernoulli::walsh_coeff_bernoulli;
use walsh_core::bounds::{bound_smooth, CArg};
use walsh_core::coefficients::CoeffEngine;
use walsh_core::exec::Execution;
use walsh_core::functions::{Family, SmoothFunction};
use walsh_core::sweep::{verify_sweep, BoundReport, SweepConfig, Theorem};
use walsh_core::walsh::orthonormality_defect;
use walsh_core::wfunc::{
    build_w, dyadic_properties, i_closed_form, w_at_base_closed_form, FastW,
};

type Outcome = Result<String, String>;

const GOLDEN: f64 = 0.618_033_988_749_894_8;
const PLASTIC: f64 = 0.754_877_666_246_692_7;

/// Deterministic low-discrepancy points in `[0, 1)`.
fn kronecker(n: usize, alpha: f64) -> impl Iterator<Item = f64> {
    (0..n).map(move |i| ((i as f64 + 0.5) * alpha).fract())
}

fn pow(b: u32, e: u32) -> u64 {
    (b as u64).pow(e)
}

fn ensure(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn first_failure(reports: &[BoundReport]) -> Option<String> {
    reports.iter().find(|r| !r.pass).map(|r| {
        format!(
            "{} b={} k={:?} order={} f={} p={:?}: |c|={:e} bound={:e} ratio={}",
            r.theorem, r.b, r.k, r.alpha, r.function, r.exponent, r.coeff_abs, r.bound, r.ratio
        )
    })
}

fn c1_orthonormality() -> Outcome {
    let mut worst: f64 = 0.0;
    for b in [2, 3, 5] {
        worst = worst.max(orthonormality_defect(b, 4, Execution::Parallel).map_err(|e| e.to_string())?);
    }
    ensure(worst <= 1e-12, format!("max |<wal_k, wal_l> - delta| = {worst:.3e}"))
}

fn c2_closed_forms() -> Outcome {
    let mut d_int: f64 = 0.0;
    let mut d_base: f64 = 0.0;
    let mut d_fast: f64 = 0.0;
    for (b, kmax) in [(2, pow(2, 10)), (3, pow(3, 6)), (5, pow(5, 4))] {
        let per_k: Vec<Result<(f64, f64, f64), String>> = Execution::Parallel.map_range(kmax - 1, |i| {
            let k = i + 1;
            let w = build_w(b, k).map_err(|e| e.to_string())?;
            let e = w.expansion();
            let di = (i_closed_form(b, k).unwrap() - w.poly().definite_integral()).norm();
            let xb = (b as f64).powi(-(e.a_last() as i32));
            let db = (w_at_base_closed_form(b, k).unwrap() - w.eval(xb).unwrap()).norm();
            let fast = FastW::new(&w).map_err(|e| e.to_string())?;
            let df = kronecker(1000, GOLDEN)
                .map(|x| (fast.eval(x).unwrap() - w.eval(x).unwrap()).norm())
                .fold(0.0, f64::max);
            Ok((di, db, df))
        });
        for r in per_k {
            let (a, c, f) = r?;
            d_int = d_int.max(a);
            d_base = d_base.max(c);
            d_fast = d_fast.max(f);
        }
    }
    ensure(
        d_int <= 1e-12 && d_base <= 1e-12 && d_fast <= 1e-12,
        format!("I(k) {d_int:.2e}, W_k(b^-a_v) {d_base:.2e}, fast eval {d_fast:.2e}"),
    )
}

fn c3_dyadic() -> Outcome {
    let mut l1: f64 = 0.0;
    let mut sup: f64 = 0.0;
    let mut min: f64 = 0.0;
    let mut sym: f64 = 0.0;
    for k in 1..pow(2, 10) {
        let r = dyadic_properties(k).map_err(|e| e.to_string())?;
        l1 = l1.max((r.l1 - r.l1_expected).abs());
        sup = sup.max((r.sup - r.sup_expected).abs());
        min = min.min(r.min_value);
        sym = sym.max(r.mirror_defect).max(r.complement_defect);
    }
    ensure(
        l1 <= 1e-10 && sup <= 1e-9 && min >= -1e-12 && sym <= 1e-11,
        format!("L1 err {l1:.2e}, sup err {sup:.2e}, min {min:.2e}, symmetry {sym:.2e}"),
    )
}

fn c4_formulas() -> Outcome {
    let engine = CoeffEngine::new(16);
    let fams = ["bernoulli:5", "exp:1", "exp:2", "sin:1,1"].map(|s| Family::parse(s).unwrap());
    let mut worst: f64 = 0.0;
    let mut where_ = String::new();
    let mut checks = 0usize;
    for b in [2u32, 3] {
        for f in &fams {
            let rows: Vec<Result<(f64, String, usize), String>> = Execution::Parallel.map_range(pow(b, 5), |k| {
                let err = |e: walsh_core::error::WalshError| e.to_string();
                let oracle = engine.quadrature(f, b, k).map_err(err)?.value;
                let scale = oracle.norm().max(1.0);
                let v = KExpansion::new(b, k).map_err(err)?.v();
                let mut vals: Vec<(String, Complex64)> = Vec::new();
                for n in 0..=v.min(f.order()) {
                    vals.push((format!("formula n={n}"), engine.formula(f, b, k, n).map_err(err)?.value));
                }
                if k > 0 {
                    for r in 0..=3 {
                        vals.push((format!("higher-order r={r}"), engine.higher_order(f, b, k, r).map_err(err)?.value));
                    }
                }
                for alpha in 1..=4 {
                    vals.push((format!("sobolev alpha={alpha}"), engine.sobolev(f, b, k, alpha).map_err(err)?.value));
                }
                let (mut m, mut at) = (0.0, String::new());
                for (name, z) in &vals {
                    let d = (z - oracle).norm() / scale;
                    if d >= m {
                        m = d;
                        at = format!("{} b={b} k={k} {name}", f.label());
                    }
                }
                Ok((m, at, vals.len()))
            });
            for r in rows {
                let (m, at, n) = r?;
                checks += n;
                if m >= worst {
                    worst = m;
                    where_ = at;
                }
            }
        }
    }
    ensure(
        worst <= 1e-10,
        format!("{checks} comparisons, worst scaled diff {worst:.2e} ({where_})"),
    )
}

fn c5_bernoulli() -> Outcome {
    let engine = CoeffEngine::new(16);
    let mut worst: f64 = 0.0;
    let mut worst_zero: f64 = 0.0;
    let mut zeros = 0usize;
    for b in [2u32, 3] {
        for r in 0..=8usize {
            let f = Family::Bernoulli(r);
            for k in 0..pow(b, 5) {
                let exact = walsh_coeff_bernoulli(b, k, r).map_err(|e| e.to_string())?;
                let quad = engine.quadrature(&f, b, k).map_err(|e| e.to_string())?.value;
                worst = worst.max((exact - quad).norm());
                let v = KExpansion::new(b, k).unwrap().v();
                let zero_branch = k > 0 && (r < v || (b == 2 && (r - v) % 2 == 1));
                if zero_branch {
                    zeros += 1;
                    worst_zero = worst_zero.max(quad.norm()).max(exact.norm());
                }
            }
        }
    }
    ensure(
        worst <= 1e-11 && worst_zero <= 1e-11,
        format!("max |exact - quadrature| {worst:.2e}; {zeros} zero cases, max {worst_zero:.2e}"),
    )
}

fn sweep_all(configs: Vec<SweepConfig>) -> Result<(usize, f64), String> {
    let mut n = 0;
    let mut max_ratio: f64 = 0.0;
    for c in configs {
        let reports = verify_sweep(&c).map_err(|e| format!("{}: {e}", c.theorem))?;
        if reports.is_empty() {
            return Err(format!("{} b={} produced no reports", c.theorem, c.base));
        }
        if let Some(msg) = first_failure(&reports) {
            return Err(msg);
        }
        n += reports.len();
        max_ratio = reports.iter().map(|r| r.ratio).fold(max_ratio, f64::max);
    }
    Ok((n, max_ratio))
}

fn c6_bound_sweeps() -> Outcome {
    let inf = f64::INFINITY;
    let smooth_fs = ["exp:1", "exp:2", "sin:1,1", "sin:3,0.5", "bernoulli:5", "poly:1,-2,0,3"];
    let mut cs = vec![
        SweepConfig::new(Theorem::Smooth, 2, pow(2, 10))
            .orders(1..=4)
            .functions(smooth_fs)
            .exponents([1.0, 2.0, inf]),
    ];
    for (b, kmax) in [(3, pow(3, 6)), (5, pow(5, 4))] {
        for c in [CArg::MinAlphaV, CArg::V] {
            cs.push(SweepConfig::new(Theorem::Smooth, b, kmax).orders(1..=4).functions(smooth_fs).c_arg(c));
        }
    }
    for (b, kmax, ps) in [(2, pow(2, 4), vec![1.0, 2.0, inf]), (3, pow(3, 3), vec![1.0])] {
        for pair in [["exp:1", "sin:1,1"], ["bernoulli:3", "exp:2"]] {
            for c in [CArg::MinAlphaV, CArg::V] {
                cs.push(
                    SweepConfig::new(Theorem::SmoothMulti, b, kmax)
                        .orders(1..=3)
                        .functions(pair)
                        .exponents(ps.clone())
                        .c_arg(c),
                );
            }
        }
    }
    for b in [2, 3] {
        cs.push(SweepConfig::new(Theorem::CInfinity, b, pow(2, 8)).functions(["exp:1", "exp:2"]));
    }
    for (b, kmax) in [(2, pow(2, 10)), (3, pow(3, 6)), (5, pow(5, 4))] {
        cs.push(SweepConfig::new(Theorem::Bernoulli, b, kmax).orders(1..=8));
    }
    let sob_fs = ["exp:1", "exp:2", "sin:1,1", "bernoulli:5"];
    for (b, kmax) in [(2, pow(2, 8)), (3, pow(3, 5))] {
        cs.push(SweepConfig::new(Theorem::Sobolev, b, kmax).orders(1..=3).functions(sob_fs));
        cs.push(
            SweepConfig::new(Theorem::SobolevNorm, b, kmax)
                .orders(1..=3)
                .functions(sob_fs)
                .exponents([1.0, 2.0, inf]),
        );
        cs.push(SweepConfig::new(Theorem::Periodic, b, kmax).orders(1..=4));
    }
    let (n, max_ratio) = sweep_all(cs)?;
    Ok(format!("{n} bound checks, max ratio {max_ratio:.12}"))
}

fn c7_kernel_identity() -> Outcome {
    let engine = CoeffEngine::new(16);
    let mut worst: f64 = 0.0;
    let (mut above, mut below) = (0usize, 0usize);
    for b in [2u32, 3] {
        for alpha in 1..=3usize {
            for k in 1..pow(b, 4) {
                let v = KExpansion::new(b, k).unwrap().v();
                if alpha >= v {
                    above += 1;
                } else {
                    below += 1;
                }
                for x in kronecker(50, PLASTIC) {
                    let h1 = engine.h1_kernel_integral(b, k, alpha, x).map_err(|e| e.to_string())?;
                    let h2 = engine.h2_value(b, k, alpha, x).map_err(|e| e.to_string())?;
                    worst = worst.max((h1 - h2).norm());
                }
            }
        }
    }
    ensure(
        worst <= 1e-7 && above > 0 && below > 0,
        format!("max |h1 - h2| {worst:.2e} over {above} (alpha >= v) and {below} (alpha < v) index pairs"),
    )
}

fn c8_w_extra() -> Outcome {
    let mut cs = Vec::new();
    for b in [2, 3] {
        let mut c = SweepConfig::new(Theorem::WExtra, b, pow(b, 4)).orders(0..=4);
        c.tolerances.zero = 1e-12;
        cs.push(c);
        cs.push(SweepConfig::new(Theorem::WSup, b, pow(b, 4)));
    }
    let zeros: usize = {
        let c = SweepConfig::new(Theorem::WExtra, 2, pow(2, 4)).orders(0..=4);
        verify_sweep(&c).map_err(|e| e.to_string())?.iter().filter(|r| r.exact_zero).count()
    };
    let (n, max_ratio) = sweep_all(cs)?;
    ensure(zeros > 0, format!("{n} checks ({zeros} exact zeros at b=2), max ratio {max_ratio:.12}"))
}

/// max over k >= 1 of |f^(k)| 2^mu_2(k) for f = exp, b = 2, k < 2^12, frozen
/// from the first run.
const C9_RECORDED_MAX: f64 = 0.859_140_909_962_123_2;

fn c9_decay_order() -> Outcome {
    let f = Family::Exp(1.0);
    let engine = CoeffEngine::new(16);
    let alpha = 2;
    let scaled: Vec<Result<(f64, f64), String>> = Execution::Parallel.map_range(pow(2, 12), |k| {
        let e = KExpansion::new(2, k).map_err(|e| e.to_string())?;
        let c = engine.accurate(&f, 2, k).map_err(|e| e.to_string())?.value.norm();
        let n = alpha.min(e.v());
        let constant = bound_smooth(2, k, alpha, f.lp_norm_of_deriv(n, 1.0), 1.0).map_err(|e| e.to_string())?
            * 2f64.powi(e.mu_alpha(alpha) as i32);
        Ok((c * 2f64.powi(e.mu_alpha(alpha) as i32), constant))
    });
    let mut max_all: f64 = 0.0;
    let mut max_pos: f64 = 0.0;
    let mut constant: f64 = 0.0;
    for (k, r) in scaled.into_iter().enumerate() {
        let (s, c) = r?;
        max_all = max_all.max(s);
        if k > 0 {
            max_pos = max_pos.max(s);
        }
        constant = constant.max(c);
    }
    let f2 = f.lp_norm_of_deriv(2, 1.0);
    let within = max_all <= constant * (1.0 + 1e-9);
    let regression = ((max_pos - C9_RECORDED_MAX) / C9_RECORDED_MAX).abs() <= 1e-9;
    ensure(
        within && regression && (constant - f2).abs() <= 1e-12 * f2,
        format!(
            "max |f^(k)| 2^mu_2 = {max_all:.16} (k >= 1: {max_pos:.16}, recorded {C9_RECORDED_MAX}); constant x ||f''||_1 = {constant:.16}"
        ),
    )
}

fn c10_cli_determinism() -> Outcome {
    let exe = env!("CARGO_BIN_EXE_walsh");
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("acceptance_c10");
    std::fs::create_dir_all(&dir).map_err(|e| e.to_string())?;
    let cfg = dir.join("run.json");
    let save = Command::new(exe)
        .args(["verify", "--theorem", "smooth", "--b", "2", "--kmax", "256", "--alpha", "1,2,3"])
        .args(["--f", "exp:1", "--f", "sin:1,1", "--f", "bernoulli:4", "--p", "1,2,inf"])
        .arg("--out")
        .arg(dir.join("seed.csv"))
        .arg("--save-config")
        .arg(&cfg)
        .output()
        .map_err(|e| e.to_string())?;
    if !save.status.success() {
        return Err(format!("seed run failed: {}", String::from_utf8_lossy(&save.stderr)));
    }
    let mut outputs = Vec::new();
    for run in 0..2 {
        let out = dir.join(format!("run{run}.csv"));
        let mut text: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(&cfg).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
        text["output"] = serde_json::Value::String(out.display().to_string());
        let path = dir.join(format!("run{run}.json"));
        std::fs::write(&path, serde_json::to_string_pretty(&text).unwrap()).map_err(|e| e.to_string())?;
        let st = Command::new(exe)
            .args(["verify", "--config"])
            .arg(&path)
            .output()
            .map_err(|e| e.to_string())?;
        if st.status.code() != Some(0) {
            return Err(format!("run {run} exited {:?}", st.status.code()));
        }
        outputs.push(std::fs::read(&out).map_err(|e| e.to_string())?);
    }
    let seed = std::fs::read(dir.join("seed.csv")).map_err(|e| e.to_string())?;
    ensure(
        outputs[0] == outputs[1] && outputs[0] == seed && !seed.is_empty(),
        format!("{} bytes, identical across runs", seed.len()),
    )
}

type Criterion = fn() -> Outcome;

fn main() {
    // `cargo test -- --list` and similar probes pass flags; there is nothing to list.
    if std::env::args().any(|a| a == "--list") {
        return;
    }
    let criteria: [(&str, Criterion); 10] = [
        ("orthonormality", c1_orthonormality),
        ("closed-form anchors", c2_closed_forms),
        ("dyadic exact norms", c3_dyadic),
        ("formula equivalence", c4_formulas),
        ("Bernoulli exactness", c5_bernoulli),
        ("bound sweeps", c6_bound_sweeps),
        ("Sobolev kernel identity", c7_kernel_identity),
        ("W^(j) bound sweeps", c8_w_extra),
        ("decay order", c9_decay_order),
        ("CLI determinism", c10_cli_determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let outcome = check();
        let secs = t.elapsed().as_secs_f64();
        match outcome {
            Ok(d) => println!("PASS criterion {:>2} {name}: {d} [{secs:.1}s]", i + 1),
            Err(d) => {
                failed += 1;
                println!("FAIL criterion {:>2} {name}: {d} [{secs:.1}s]", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
