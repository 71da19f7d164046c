//! Acceptance criteria. Each test prints one PASS/FAIL line and then asserts.
//!
//! Run with `cargo test --test acceptance -- --nocapture --test-threads 1`.

use std::time::{Duration, Instant};

use emden::continuous::{f_eval, g_eval, ode_oracle, ModelParams};
use emden::critical::{
    critical_constant, f_of, normalized_crossings, normalized_ratio_upper_bound, product_bound,
    ratio_extrema_normalized, solve_kc, solve_t0,
};
use emden::discrete::{check_properties, convergence_diagnostic, log_identity_quotient, recursion_trace};
use emden::quadrature::exp_sq_integral;
use emden::shooting::{solve_w, DEFAULT_TOL};

fn verdict(id: &str, pass: bool, detail: String) {
    println!("{} {id:>4}  {detail}", if pass { "PASS" } else { "FAIL" });
    assert!(pass, "criterion {id}: {detail}");
}

fn within(actual: f64, expected: f64, tol: f64) -> bool {
    (actual - expected).abs() <= tol
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let start = Instant::now();
    let out = f();
    (out, start.elapsed())
}

fn log_grid(lo: f64, hi: f64, n: usize) -> impl Iterator<Item = f64> {
    (0..n).map(move |i| lo * (hi / lo).powf(i as f64 / (n - 1) as f64))
}

#[test]
fn c01_critical_constant() {
    let (kc, dt) = timed(|| solve_kc(1e-13).unwrap());
    let pass = within(kc, 1.0384, 5e-4) && dt < Duration::from_secs(10);
    verdict(
        "1",
        pass,
        format!("k_c = {kc:.10} (1.0384 +/- 5e-4) in {dt:.2?} (< 10 s)"),
    );
}

#[test]
fn c02_shooting_constant() {
    let kc = critical_constant().unwrap();
    let (w, dt) = timed(|| solve_w(kc, DEFAULT_TOL).unwrap().w);
    let pass = within(w, 0.6218, 1e-3) && dt < Duration::from_secs(1);
    verdict(
        "2",
        pass,
        format!("w(k_c) = {w:.10} (0.6218 +/- 1e-3) in {dt:.2?} (< 1 s)"),
    );
}

#[test]
fn c03_maximizer() {
    let kc = critical_constant().unwrap();
    let w = solve_w(kc, DEFAULT_TOL).unwrap().w;
    let t0 = solve_t0(kc, w).unwrap();
    verdict(
        "3",
        within(t0, 18.3798, 1e-2),
        format!("t0(k_c) = {t0:.8} (18.3798 +/- 1e-2)"),
    );
}

#[test]
fn c04_normalized_crossings() {
    let (x1, x2) = normalized_crossings().unwrap();
    let pass = within(x1, 2.4556, 2e-3) && within(x2, 263.0304, 0.3);
    verdict(
        "4",
        pass,
        format!("x1 = {x1:.6} (2.4556 +/- 2e-3), x2 = {x2:.6} (263.0304 +/- 0.3)"),
    );
}

#[test]
fn c05_ratio_minimum() {
    let e = ratio_extrema_normalized().unwrap();
    let pass = within(e.min_ratio, 0.8829, 1e-3) && within(e.x_min, 5.7889, 1e-2);
    verdict(
        "5",
        pass,
        format!(
            "min f0/g = {:.6} (0.8829 +/- 1e-3) at x = {:.6} (5.7889 +/- 1e-2)",
            e.min_ratio, e.x_min
        ),
    );
}

#[test]
fn c06_ratio_maximum() {
    let e = ratio_extrema_normalized().unwrap();
    verdict(
        "6",
        within(e.max_ratio_estimate, 1.0223, 2e-3),
        format!(
            "sweep max f0/g = {:.6} (1.0223 +/- 2e-3) near x = {:.0}",
            e.max_ratio_estimate, e.x_max_estimate
        ),
    );
}

#[test]
fn c07_bound_chain() {
    let ub = normalized_ratio_upper_bound().unwrap();
    let p = product_bound().unwrap();
    let pass = within(ub.alpha2, 1.1115, 1e-3) && within(p.product, 1.2023, 1e-3);
    verdict(
        "7",
        pass,
        format!(
            "alpha2 = {:.6} (1.1115 +/- 1e-3), product {:.2} * {:.4} * {:.4} = {:.6} (1.2023 +/- 1e-3)",
            ub.alpha2, p.first, p.second, p.third, p.product
        ),
    );
}

#[test]
fn c08_log_identity_quotient() {
    let mut worst: f64 = 0.0;
    for k in [0.001, 0.01, 0.1] {
        let trace = recursion_trace(k, 101).unwrap();
        for j in 10..=100 {
            worst = worst.max((log_identity_quotient(&trace, j).unwrap() - 1.0).abs());
        }
    }
    verdict(
        "8",
        worst < 0.005,
        format!("max |q_j - 1| over j in [10, 100] = {worst:.3e} (< 5e-3)"),
    );
}

#[test]
fn c09_oracle_equivalence() {
    let kc = critical_constant().unwrap();
    let ((worst, at_k), dt) = timed(|| {
        let mut worst = (0.0f64, 0.0);
        for k in [0.01, 0.1, 1.0, kc, 3.0] {
            let w = solve_w(k, DEFAULT_TOL).unwrap().w;
            let p = ModelParams::new(k, 1.0, w).unwrap();
            for s in ode_oracle(&p, 100.0, 20_000).unwrap() {
                let err = (f_eval(s.t, &p).unwrap() / s.f - 1.0).abs();
                if err > worst.0 {
                    worst = (err, k);
                }
            }
        }
        worst
    });
    let pass = worst < 1e-8 && dt < Duration::from_secs(30);
    verdict(
        "9",
        pass,
        format!("max rel |f - RK4| on [0, 100] = {worst:.3e} at k = {at_k:.4} (< 1e-8) in {dt:.2?} (< 30 s)"),
    );
}

#[test]
fn c10a_ratio_decreases_toward_one() {
    let mut pass = true;
    let mut detail = Vec::new();
    for k in [0.1, 1.0] {
        let d = convergence_diagnostic(k, &[3, 4, 5, 6, 7]).unwrap();
        // k = 0.1 approaches from below, so "toward 1" is read as |V/W - 1| shrinking
        pass &= d.ratios.windows(2).all(|p| (p[1] - 1.0).abs() < (p[0] - 1.0).abs());
        let ratios: Vec<String> = d.ratios.iter().map(|r| format!("{r:.6}")).collect();
        detail.push(format!("k={k}: [{}]", ratios.join(", ")));
    }
    verdict(
        "10a",
        pass,
        format!("V/W at j = 1e3..1e7 monotone toward 1: {}", detail.join("; ")),
    );
}

#[test]
fn c10b_scaled_residual_band() {
    let mut pass = true;
    let mut detail = Vec::new();
    for k in [0.1, 1.0] {
        let d = convergence_diagnostic(k, &[3, 4, 5, 6, 7]).unwrap();
        let abs: Vec<f64> = d.scaled_residuals.iter().map(|s| s.abs()).collect();
        let band = abs.iter().copied().fold(0.0, f64::max) / abs.iter().copied().fold(f64::INFINITY, f64::min);
        pass &= band <= 3.0;
        detail.push(format!("k={k}: band {band:.3}"));
    }
    verdict(
        "10b",
        pass,
        format!("(V/W - 1) sqrt(2k ln j) within a factor 3: {}", detail.join("; ")),
    );
}

#[test]
fn c10c_recursion_identities() {
    let mut pass = true;
    let mut worst: f64 = 0.0;
    for k in [0.001, 0.01, 0.1, 1.0, 3.0] {
        let report = check_properties(&recursion_trace(k, 100_000).unwrap());
        pass &= report.holds();
        worst = worst.max(report.max_telescoping_error);
    }
    verdict(
        "10c",
        pass,
        format!("growth, telescoping and difference bounds to j = 1e5; max telescoping error {worst:.2e}"),
    );
}

#[test]
fn c10d_integral_inequalities() {
    let mut pass = true;
    for y in log_grid(1e-3, 25.0, 200) {
        let i = exp_sq_integral(y).unwrap();
        let num = (y * y).exp_m1();
        let slack = 1.0 + 1e-14;
        pass &= num / (2.0 * y) <= i * slack;
        pass &= i <= num / y * slack;
        pass &= i <= num / (2.0 * y) * (1.0 + 2.0 / (y * y)) * slack;
    }
    verdict(
        "10d",
        pass,
        "elementary bounds on I(y) over 200 log-spaced y in [1e-3, 25]".into(),
    );
}

#[test]
fn c10e_sign_equivalence() {
    let (mut agree, mut skipped, mut disagree) = (0, 0, 0);
    for k in log_grid(0.01, 3.0, 20) {
        let w = solve_w(k, DEFAULT_TOL).unwrap().w;
        let p = ModelParams::new(k, 1.0, w).unwrap();
        for t in log_grid(1.05, 1e4, 20) {
            let f = f_eval(t, &p).unwrap();
            let g = g_eval(t, k).unwrap();
            if (g - f).abs() <= 1e-9 * g.max(f) {
                skipped += 1;
            } else if (f_of(t, k, w).unwrap() > 0.0) == (g > f) {
                agree += 1;
            } else {
                disagree += 1;
            }
        }
    }
    verdict(
        "10e",
        disagree == 0,
        format!("sign(F) = sign(g - f) on 20x20 grid: {agree} agree, {disagree} disagree, {skipped} near-ties"),
    );
}

#[test]
fn c10_full_verify_runtime() {
    let (out, dt) = timed(|| {
        std::process::Command::new(env!("CARGO_BIN_EXE_emden"))
            .args(["--command", "verify"])
            .output()
            .unwrap()
    });
    let pass = out.status.success() && dt < Duration::from_secs(300);
    verdict(
        "10",
        pass,
        format!("verify exits {:?} in {dt:.2?} (< 5 min)", out.status.code()),
    );
}
