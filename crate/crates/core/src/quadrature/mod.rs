//! The exponential-square integral I(y) = int_0^y exp(u^2) du, its differences,
//! and a general adaptive quadrature engine.

mod dawson;
mod kronrod;

pub use dawson::dawson;
pub use kronrod::QuadratureOptions;

pub(crate) use dawson::{exp_neg_sq, exp_sq, ln_exp_sq_integral};

use crate::error::{ensure_domain, Error, Result};

/// Largest admissible `y^2`; `exp(y^2)` overflows shortly past 709.
pub const OVERFLOW_LIMIT: f64 = 700.0;

/// A definite integral together with its error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureResult {
    pub value: f64,
    pub abs_error_estimate: f64,
    pub evaluations: usize,
}

fn guard_overflow(what: &'static str, y: f64) -> Result<()> {
    if y * y > OVERFLOW_LIMIT {
        Err(Error::Overflow { what, arg: y })
    } else {
        Ok(())
    }
}

/// I(y) = int_0^y exp(u^2) du for `y >= 0`, to about 1e-15 relative.
pub fn exp_sq_integral(y: f64) -> Result<f64> {
    ensure_domain(y.is_finite() && y >= 0.0, "exp_sq_integral", y, "finite y >= 0")?;
    guard_overflow("exp_sq_integral", y)?;
    if y <= dawson::SERIES_LIMIT {
        Ok(dawson::exp_sq_series(y))
    } else {
        Ok(exp_sq(y) * dawson(y))
    }
}

/// int_lo^hi exp(v^2) dv for `0 <= lo <= hi`.
///
/// The result is scaled by `exp(hi^2)` before the two endpoint terms are
/// combined. When `hi^2 - lo^2 <= 1` even that difference cancels badly, so the
/// scaled integrand `exp(v^2 - hi^2)` is integrated directly instead.
pub fn exp_sq_integral_between(lo: f64, hi: f64) -> Result<f64> {
    ensure_domain(
        lo.is_finite() && lo >= 0.0,
        "exp_sq_integral_between",
        lo,
        "finite lower limit >= 0",
    )?;
    ensure_domain(
        hi.is_finite() && hi >= lo,
        "exp_sq_integral_between",
        hi,
        "finite upper limit >= lower limit",
    )?;
    guard_overflow("exp_sq_integral_between", hi)?;
    if lo == hi {
        return Ok(0.0);
    }
    if lo == 0.0 {
        return exp_sq_integral(hi);
    }
    let gap = (hi - lo) * (hi + lo);
    if gap <= 1.0 {
        let scaled = kronrod::integrate(
            |v: f64| (-(hi - v) * (hi + v)).exp(),
            lo,
            hi,
            &QuadratureOptions {
                tol: 1e-13,
                max_intervals: 64,
            },
        )?;
        return Ok(exp_sq(hi) * scaled.value);
    }
    let scaled = dawson(hi) - (-gap).exp() * dawson(lo);
    Ok(exp_sq(hi) * scaled)
}

/// Adaptive Gauss-Kronrod quadrature of `f` over `[lo, hi]` with the mixed
/// tolerance `max(tol, tol * |value|)` and the default budget of 10^4 intervals.
pub fn adaptive_quad<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, tol: f64) -> Result<QuadratureResult> {
    adaptive_quad_with(
        f,
        lo,
        hi,
        QuadratureOptions {
            tol,
            ..QuadratureOptions::default()
        },
    )
}

pub fn adaptive_quad_with<F: Fn(f64) -> f64>(
    f: F,
    lo: f64,
    hi: f64,
    opts: QuadratureOptions,
) -> Result<QuadratureResult> {
    ensure_domain(lo.is_finite(), "adaptive_quad", lo, "finite lower limit")?;
    ensure_domain(
        hi.is_finite() && hi > lo,
        "adaptive_quad",
        hi,
        "finite upper limit > lower limit",
    )?;
    ensure_domain(opts.tol > 0.0, "adaptive_quad", opts.tol, "tol > 0")?;
    ensure_domain(
        opts.max_intervals >= 1,
        "adaptive_quad",
        opts.max_intervals as f64,
        "max_intervals >= 1",
    )?;
    kronrod::integrate(f, lo, hi, &opts)
}
