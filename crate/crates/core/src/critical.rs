//! The critical coefficient k_c and the f-versus-g comparison around it.
//!
//! With y = 1 and W = w / sqrt(2k), the gap functional is
//!
//! F(t, k) = int_W^{sqrt(W^2 + ln g(t))} exp(v^2) dv - t sqrt(k/2) exp(W^2),
//!
//! whose sign is the sign of g(t) - f(t). F peaks at t0(k), the root of
//! psi(t) = w^2. Below k_c the peak is positive and f dips under g on (t1, t2).
//!
//! Crossings can sit far beyond the double range for small k, so the searches
//! run in s = ln t on the scaled functional F / (t exp(W^2)), which never
//! overflows and has the same sign.

use std::sync::OnceLock;

use serde::Serialize;

use crate::continuous::{f0, f_eval, g_eval, ModelParams};
use crate::error::{ensure_domain, Error, Result};
use crate::quadrature::{dawson, exp_sq, exp_sq_integral, exp_sq_integral_between};
use crate::roots::{bisect, golden_section_min, newton_bisect, Tolerance};
use crate::shooting::{solve_w, DEFAULT_TOL as SHOOTING_TOL};

/// Bracket for k_c; the objective is positive at the left end and negative at the right.
pub const KC_BRACKET: (f64, f64) = (0.5, 2.0);

/// Constant upper bound on f/g below k_c.
pub const UPPER_RATIO_BOUND: f64 = 1.21;

/// Upper bound on f0/g(.;1) past the second normalized crossing.
pub const NORMALIZED_UPPER_BOUND: f64 = 1.12;

const MAX_LN_DOUBLE: f64 = 709.0;

/// psi(t) = 2k + k / (2 ln t) - k ln(2k ln t), strictly decreasing on t > 1.
pub fn psi(t: f64, k: f64) -> Result<f64> {
    ensure_domain(t.is_finite() && t > 1.0, "psi", t, "finite t > 1")?;
    ensure_domain(k.is_finite() && k > 0.0, "psi", k, "k > 0")?;
    Ok(psi_ln(t.ln(), k))
}

fn psi_ln(s: f64, k: f64) -> f64 {
    2.0 * k + k / (2.0 * s) - k * (2.0 * k * s).ln()
}

/// ln t0(k), where psi(t0) = w^2.
pub fn solve_ln_t0(k: f64, w: f64) -> Result<f64> {
    ensure_domain(k.is_finite() && k > 0.0, "solve_t0", k, "k > 0")?;
    ensure_domain(w.is_finite() && w >= 0.0, "solve_t0", w, "w >= 0")?;
    let target = w * w;
    let h = |s: f64| psi_ln(s, k) - target;
    let (mut lo, mut hi) = (1.0, 1.0);
    let mut expansions = 0;
    while h(lo) <= 0.0 {
        lo *= 0.5;
        expansions += 1;
        if expansions > 1100 {
            return Err(Error::Bracket {
                what: "solve_t0",
                lo,
                hi,
            });
        }
    }
    while h(hi) >= 0.0 {
        hi *= 2.0;
        expansions += 1;
        if expansions > 1100 || !hi.is_finite() {
            return Err(Error::Bracket {
                what: "solve_t0",
                lo,
                hi,
            });
        }
    }
    let root = newton_bisect(
        "solve_t0",
        |s| Ok((h(s), -k / (2.0 * s * s) - k / s)),
        (lo, h(lo)),
        (hi, h(hi)),
        0.5 * (lo + hi),
        Tolerance {
            f_abs: 0.0,
            x_rel: 2.0 * f64::EPSILON,
            x_abs: 0.0,
            max_iter: 300,
        },
    )?;
    Ok(root.x)
}

fn exp_checked(what: &'static str, s: f64) -> Result<f64> {
    if s > MAX_LN_DOUBLE {
        Err(Error::Overflow { what, arg: s.sqrt() })
    } else {
        Ok(s.exp())
    }
}

/// t0(k): the maximizer of F(., k), solving psi(t) = w^2.
pub fn solve_t0(k: f64, w: f64) -> Result<f64> {
    exp_checked("solve_t0", solve_ln_t0(k, w)?)
}

/// Odd extension of the exponential-square integral in the squared upper
/// limit: sign(x) I(sqrt|x|).
fn phi(x: f64) -> Result<f64> {
    let v = exp_sq_integral(x.abs().sqrt())?;
    Ok(if x < 0.0 { -v } else { v })
}

/// F(t, k) evaluated directly; valid while the magnitudes stay representable.
fn f_direct(t: f64, k: f64, w: f64) -> Result<f64> {
    let big_w = w / (2.0 * k).sqrt();
    let ln_g = g_eval(t, k)?.ln();
    let x = big_w * big_w + ln_g;
    let drift = t * (k / 2.0).sqrt() * exp_sq(big_w);
    if x >= 0.0 {
        let top = x.sqrt();
        let integral = if top >= big_w {
            exp_sq_integral_between(big_w, top)?
        } else {
            -exp_sq_integral_between(top, big_w)?
        };
        Ok(integral - drift)
    } else {
        // below g = exp(-W^2) the upper limit is imaginary; use the form with f
        let f = f_eval(t, &ModelParams::new(k, 1.0, w)?)?;
        Ok(phi(x)? - phi(big_w * big_w + f.ln())?)
    }
}

/// F(e^s, k) / (e^s exp(W^2)). Once ln g > 1 the endpoint terms are combined
/// through Dawson's function so nothing of size exp(W^2 + ln g) is formed.
pub fn f_scaled_ln(s: f64, k: f64, w: f64) -> Result<f64> {
    ensure_domain(s.is_finite() && s >= 0.0, "F", s, "ln t >= 0")?;
    ensure_domain(k.is_finite() && k > 0.0, "F", k, "k > 0")?;
    ensure_domain(w.is_finite() && w >= 0.0, "F", w, "w >= 0")?;
    if s == 0.0 {
        return Ok(f64::NEG_INFINITY);
    }
    let big_w = w / (2.0 * k).sqrt();
    let ln_g = s + 0.5 * (2.0 * k * s).ln();
    if ln_g > 1.0 {
        let x = big_w * big_w + ln_g;
        return Ok((2.0 * k * s).sqrt() * dawson(x.sqrt()) - dawson(big_w) * (-s).exp() - (k / 2.0).sqrt());
    }
    let t = s.exp();
    Ok(f_direct(t, k, w)? / (t * exp_sq(big_w)))
}

/// F(t, k) for the solution with f(0) = 1, f'(0) = w. `F <= 0` exactly when
/// `f(t) >= g(t)`. At t = 1, where g vanishes, the value is -inf.
pub fn f_of(t: f64, k: f64, w: f64) -> Result<f64> {
    ensure_domain(t.is_finite() && t >= 1.0, "F", t, "finite t >= 1")?;
    let s = t.ln();
    let scaled = f_scaled_ln(s, k, w)?;
    if !scaled.is_finite() {
        return Ok(scaled);
    }
    let big_w = w / (2.0 * k).sqrt();
    let ln_g = s + 0.5 * (2.0 * k * s).ln();
    if ln_g <= 1.0 {
        return f_direct(t, k, w);
    }
    let v = scaled * t * exp_sq(big_w);
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Overflow {
            what: "F",
            arg: (big_w * big_w + ln_g).sqrt(),
        })
    }
}

/// F(t0(k), k) with w = w(k).
pub fn kc_objective(k: f64) -> Result<f64> {
    let w = solve_w(k, SHOOTING_TOL)?.w;
    f_of(solve_t0(k, w)?, k, w)
}

fn kc_objective_scaled(k: f64) -> Result<f64> {
    let w = solve_w(k, SHOOTING_TOL)?.w;
    f_scaled_ln(solve_ln_t0(k, w)?, k, w)
}

/// k_c by bisection on [0.5, 2].
pub fn solve_kc(tol: f64) -> Result<f64> {
    solve_kc_in(KC_BRACKET.0, KC_BRACKET.1, tol)
}

/// k_c by bisection on `[lo, hi]`; the objective must change sign there.
pub fn solve_kc_in(lo: f64, hi: f64, tol: f64) -> Result<f64> {
    ensure_domain(lo > 0.0 && hi > lo, "solve_kc", hi, "0 < lo < hi")?;
    ensure_domain(tol > 0.0, "solve_kc", tol, "tol > 0")?;
    let f_lo = kc_objective_scaled(lo)?;
    let f_hi = kc_objective_scaled(hi)?;
    if !(f_lo > 0.0 && f_hi < 0.0) {
        return Err(Error::Bracket {
            what: "solve_kc",
            lo,
            hi,
        });
    }
    let root = bisect(
        "solve_kc",
        kc_objective_scaled,
        (lo, f_lo),
        (hi, f_hi),
        Tolerance {
            f_abs: 0.0,
            x_rel: 0.0,
            x_abs: tol,
            max_iter: 200,
        },
    )?;
    Ok(root.x)
}

/// k_c solved once per process to 1e-13.
pub fn critical_constant() -> Result<f64> {
    static KC: OnceLock<Result<f64>> = OnceLock::new();
    KC.get_or_init(|| solve_kc(1e-13)).clone()
}

/// (ln t1, ln t2) for slope w: the sign changes of F on either side of t0.
pub fn ln_crossings_for_slope(k: f64, w: f64) -> Result<(f64, f64)> {
    let s0 = solve_ln_t0(k, w)?;
    let peak = f_scaled_ln(s0, k, w)?;
    if peak <= 0.0 {
        return Err(Error::Bracket {
            what: "crossings",
            lo: 1.0,
            hi: s0.exp(),
        });
    }
    let tol = Tolerance {
        f_abs: 0.0,
        x_rel: 4.0 * f64::EPSILON,
        x_abs: 0.0,
        max_iter: 400,
    };
    let scaled = |s: f64| f_scaled_ln(s, k, w);
    // F -> -inf at t = 1
    let left = bisect("crossings", scaled, (0.0, -1.0), (s0, peak), tol)?;
    let mut hi = 2.0 * s0;
    let mut f_hi = scaled(hi)?;
    let mut doublings = 0;
    while f_hi >= 0.0 {
        hi *= 2.0;
        f_hi = scaled(hi)?;
        doublings += 1;
        if doublings > 64 {
            return Err(Error::Bracket {
                what: "crossings",
                lo: s0,
                hi,
            });
        }
    }
    let right = bisect("crossings", scaled, (s0, peak), (hi, f_hi), tol)?;
    Ok((left.x, right.x))
}

/// (t1, t2) for `0 < k < k_c`.
pub fn crossings(k: f64) -> Result<(f64, f64)> {
    let kc = critical_constant()?;
    ensure_domain(k.is_finite() && k > 0.0 && k < kc, "crossings", k, "0 < k < k_c")?;
    let w = solve_w(k, SHOOTING_TOL)?.w;
    let (s1, s2) = ln_crossings_for_slope(k, w)?;
    Ok((exp_checked("crossings", s1)?, exp_checked("crossings", s2)?))
}

/// Lower bound on ln t2(k): e^{2 - k_c} / (2k).
pub fn ln_t2_lower_bound(k: f64, kc: f64) -> f64 {
    (2.0 - kc).exp() / (2.0 * k)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    AboveCritical,
    BelowCritical,
}

impl Regime {
    pub fn as_str(self) -> &'static str {
        match self {
            Regime::AboveCritical => "above_critical",
            Regime::BelowCritical => "below_critical",
        }
    }
}

/// Everything known about one k. Values past the double range are `inf`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriticalReport {
    pub k: f64,
    pub w: f64,
    pub t0: f64,
    pub ln_t0: f64,
    pub f_at_t0: f64,
    pub regime: Regime,
    pub t1: Option<f64>,
    pub t2: Option<f64>,
    pub ln_t1: Option<f64>,
    pub ln_t2: Option<f64>,
    /// Whether ln t2 >= e^{2 - k_c} / (2k); present with the crossings.
    pub t2_bound_holds: Option<bool>,
    pub lower_ratio_bound: f64,
    /// 1.21 below k_c; above k_c only f >= g is established.
    pub upper_ratio_bound: Option<f64>,
}

pub fn critical_report(k: f64) -> Result<CriticalReport> {
    ensure_domain(k.is_finite() && k > 0.0, "critical_report", k, "k > 0")?;
    let kc = critical_constant()?;
    let w = solve_w(k, SHOOTING_TOL)?.w;
    let ln_t0 = solve_ln_t0(k, w)?;
    let scaled = f_scaled_ln(ln_t0, k, w)?;
    let big_w_sq = w * w / (2.0 * k);
    let ln_mag = scaled.abs().ln() + ln_t0 + big_w_sq;
    let f_at_t0 = scaled.signum() * ln_mag.exp();
    let base = CriticalReport {
        k,
        w,
        t0: ln_t0.exp(),
        ln_t0,
        f_at_t0,
        regime: Regime::AboveCritical,
        t1: None,
        t2: None,
        ln_t1: None,
        ln_t2: None,
        t2_bound_holds: None,
        lower_ratio_bound: 1.0,
        upper_ratio_bound: None,
    };
    if k >= kc {
        return Ok(base);
    }
    let (s1, s2) = ln_crossings_for_slope(k, w)?;
    let (lower, upper) = ratio_bounds_unchecked(k);
    Ok(CriticalReport {
        regime: Regime::BelowCritical,
        t1: Some(s1.exp()),
        t2: Some(s2.exp()),
        ln_t1: Some(s1),
        ln_t2: Some(s2),
        t2_bound_holds: Some(s2 >= ln_t2_lower_bound(k, kc)),
        lower_ratio_bound: lower,
        upper_ratio_bound: Some(upper),
        ..base
    })
}

/// f0(x) / g(x; 1) for x > 1.
pub fn normalized_ratio(x: f64) -> Result<f64> {
    ensure_domain(x.is_finite() && x > 1.0, "normalized_ratio", x, "finite x > 1")?;
    Ok(f0(x)? / g_eval(x, 1.0)?)
}

/// The crossings x1 < x2 of f0 with g(.; 1); f0 is the k = 1, w = 0 solution.
pub fn normalized_crossings() -> Result<(f64, f64)> {
    let (s1, s2) = ln_crossings_for_slope(1.0, 0.0)?;
    Ok((s1.exp(), s2.exp()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RatioExtrema {
    pub x_min: f64,
    pub min_ratio: f64,
    /// Grid point of the sweep maximum, rounded to two significant figures.
    pub x_max_estimate: f64,
    pub max_ratio_estimate: f64,
}

/// Points per decade of the log grids swept past x2.
const SWEEP_DENSITY: usize = 400;

fn log_grid(lo: f64, hi: f64) -> Vec<f64> {
    let decades = (hi / lo).log10();
    let n = (decades * SWEEP_DENSITY as f64).ceil().max(1.0) as usize;
    (0..=n).map(|i| lo * (hi / lo).powf(i as f64 / n as f64)).collect()
}

fn round_sig2(x: f64) -> f64 {
    let scale = 10f64.powi(x.abs().log10().floor() as i32 - 1);
    (x / scale).round() * scale
}

/// Minimum of f0/g(.;1) on [x1, x2] by golden section, maximum by a log sweep
/// over [x2, 1e6].
pub fn ratio_extrema_normalized() -> Result<RatioExtrema> {
    let (x1, x2) = normalized_crossings()?;
    let (x_min, min_ratio) = golden_section_min("ratio_extrema", normalized_ratio, x1, x2, 1e-12, 500)?;
    let mut best = (x2, normalized_ratio(x2)?);
    for x in log_grid(x2, 1e6) {
        let r = normalized_ratio(x)?;
        if r > best.1 {
            best = (x, r);
        }
    }
    Ok(RatioExtrema {
        x_min,
        min_ratio,
        x_max_estimate: round_sig2(best.0),
        max_ratio_estimate: best.1,
    })
}

fn ratio_bounds_unchecked(k: f64) -> (f64, f64) {
    (0.5 / (2.0 / k).sqrt().ln().sqrt(), UPPER_RATIO_BOUND)
}

/// (1/2) (ln sqrt(2/k))^{-1/2} and 1.21, for `0 < k < k_c`.
pub fn ratio_bounds(k: f64) -> Result<(f64, f64)> {
    let kc = critical_constant()?;
    ensure_domain(k.is_finite() && k > 0.0 && k < kc, "ratio_bounds", k, "0 < k < k_c")?;
    Ok(ratio_bounds_unchecked(k))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RatioBoundSweep {
    pub k: f64,
    pub lower: f64,
    pub upper: f64,
    /// min f/g over [t1, t2].
    pub min_ratio: f64,
    /// max f/g over [t2, 10 t2].
    pub max_ratio: f64,
    pub holds: bool,
}

/// Sweeps f/g on log grids over [t1, t2] and [t2, 10 t2] against the bounds.
pub fn ratio_bound_sweep(k: f64) -> Result<RatioBoundSweep> {
    let (lower, upper) = ratio_bounds(k)?;
    let (t1, t2) = crossings(k)?;
    let w = solve_w(k, SHOOTING_TOL)?.w;
    let p = ModelParams::new(k, 1.0, w)?;
    let ratio = |t: f64| -> Result<f64> { Ok(f_eval(t, &p)? / g_eval(t, k)?) };
    let mut min_ratio = f64::INFINITY;
    for t in log_grid(t1, t2) {
        min_ratio = min_ratio.min(ratio(t)?);
    }
    let mut max_ratio = f64::NEG_INFINITY;
    for t in log_grid(t2, 10.0 * t2) {
        max_ratio = max_ratio.max(ratio(t)?);
    }
    Ok(RatioBoundSweep {
        k,
        lower,
        upper,
        min_ratio,
        max_ratio,
        holds: min_ratio >= lower && max_ratio <= upper,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProductBound {
    /// Bound on f0/g(.;1) past x2.
    pub first: f64,
    /// 1 + w(k_c) / (k_c t0(k_c)).
    pub second: f64,
    /// sqrt(1 + (W_c^2 + ln sqrt(k_c) + w_c / (t0 k_c)) / ln t0).
    pub third: f64,
    pub product: f64,
}

/// The three-factor bound on f/g past t2 evaluated at k_c.
pub fn product_bound() -> Result<ProductBound> {
    product_bound_at(critical_constant()?)
}

/// The same bound with `kc` in place of the cached constant.
pub fn product_bound_at(kc: f64) -> Result<ProductBound> {
    let wc = solve_w(kc, SHOOTING_TOL)?.w;
    let t0 = solve_t0(kc, wc)?;
    let second = 1.0 + wc / (kc * t0);
    let third = (1.0 + (wc * wc / (2.0 * kc) + kc.sqrt().ln() + wc / (t0 * kc)) / t0.ln()).sqrt();
    Ok(ProductBound {
        first: NORMALIZED_UPPER_BOUND,
        second,
        third,
        product: NORMALIZED_UPPER_BOUND * second * third,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NormalizedUpperBound {
    /// Root of g(x2; 1) = (x2^{alpha^2} - 1) / alpha.
    pub alpha2: f64,
    pub g_x2: f64,
    pub inv_g_x2: f64,
    /// alpha2 + 1 / g(x2; 1).
    pub bound: f64,
    /// max f0/g(.;1) over the sweep [x2, 1e6].
    pub sweep_max: f64,
    /// Sweep respects the pointwise bound alpha2 + 1/g(x;1) and the total
    /// stays at or below 1.12.
    pub holds: bool,
}

pub fn normalized_ratio_upper_bound() -> Result<NormalizedUpperBound> {
    let (_, x2) = normalized_crossings()?;
    let g_x2 = g_eval(x2, 1.0)?;
    let ln_x2 = x2.ln();
    let h = |alpha: f64| -> Result<f64> { Ok(((alpha * alpha * ln_x2).exp_m1()) / alpha - g_x2) };
    let root = bisect(
        "normalized_ratio_upper_bound",
        h,
        (1.0, h(1.0)?),
        (2.0, h(2.0)?),
        Tolerance {
            f_abs: 0.0,
            x_rel: 4.0 * f64::EPSILON,
            x_abs: 0.0,
            max_iter: 200,
        },
    )?;
    let alpha2 = root.x;
    let bound = alpha2 + 1.0 / g_x2;
    let mut sweep_max = f64::NEG_INFINITY;
    let mut pointwise = true;
    for x in log_grid(x2, 1e6) {
        let r = normalized_ratio(x)?;
        sweep_max = sweep_max.max(r);
        pointwise &= r <= alpha2 + 1.0 / g_eval(x, 1.0)?;
    }
    Ok(NormalizedUpperBound {
        alpha2,
        g_x2,
        inv_g_x2: 1.0 / g_x2,
        bound,
        sweep_max,
        holds: pointwise && bound <= NORMALIZED_UPPER_BOUND,
    })
}

/// 0.8829 sqrt(ln sqrt(2/k_c)): the constant of the lower bound for t >= sqrt(2/k).
pub fn lower_bound_constant(min_ratio: f64, kc: f64) -> f64 {
    min_ratio * (2.0 / kc).sqrt().ln().sqrt()
}

/// sqrt(k_c) exp(e^{2 - k_c} / (2 k_c)), the smallest argument a + b t2 can take.
pub fn min_argument_past_t2(kc: f64) -> f64 {
    kc.sqrt() * ((2.0 - kc).exp() / (2.0 * kc)).exp()
}
