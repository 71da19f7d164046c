//! Closed-form solution of f'' = k/f with f(0) = y, f'(0) = w.
//!
//! The normalized solution is f0(x) = exp(U(x)^2) where U solves
//! I(U) = x/sqrt(2), and the general solution is f(t) = c f0(a + b t).
//! The approximant is g(t) = t sqrt(2k ln t).

use std::f64::consts::{E, SQRT_2};

use crate::error::{ensure_domain, Error, Result};
use crate::quadrature::{dawson, exp_neg_sq, exp_sq, exp_sq_integral, ln_exp_sq_integral};
use crate::roots::{newton_bisect, Tolerance};

/// Default residual tolerance for [`solve_u`].
pub const DEFAULT_U_TOL: f64 = 1e-13;

/// Coefficient `k`, initial value `y = f(0)` and initial slope `w = f'(0)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    k: f64,
    y: f64,
    w: f64,
}

impl ModelParams {
    pub fn new(k: f64, y: f64, w: f64) -> Result<Self> {
        ensure_domain(k.is_finite() && k > 0.0, "ModelParams", k, "k > 0")?;
        ensure_domain(y.is_finite() && y > 0.0, "ModelParams", y, "y > 0")?;
        ensure_domain(w.is_finite() && w >= 0.0, "ModelParams", w, "w >= 0")?;
        Ok(Self { k, y, w })
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn y(&self) -> f64 {
        self.y
    }

    pub fn w(&self) -> f64 {
        self.w
    }

    /// W = w / sqrt(2k).
    pub fn big_w(&self) -> f64 {
        self.w / (2.0 * self.k).sqrt()
    }

    /// W^2 = w^2 / (2k).
    pub fn w_sq_over_2k(&self) -> f64 {
        self.w * self.w / (2.0 * self.k)
    }
}

/// Constants of f(t) = c f0(a + b t).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransformConstants {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

/// Solves I(U) = x/sqrt(2) for U, with `|I(U) - x/sqrt(2)| <= tol * max(1, x/sqrt(2))`.
///
/// Newton runs on ln I(U), whose slope 1/D(U) is bounded, inside the bracket
/// [0, 1 + sqrt(ln(1 + z^2))], z = x sqrt(2).
pub fn solve_u(x: f64, tol: f64) -> Result<f64> {
    ensure_domain(x.is_finite() && x >= 0.0, "solve_u", x, "finite x >= 0")?;
    ensure_domain(tol > 0.0, "solve_u", tol, "tol > 0")?;
    if x == 0.0 {
        return Ok(0.0);
    }
    let target = x / SQRT_2;
    let ln_target = target.ln();
    let z = x * SQRT_2;
    // ln(1 + z^2) without overflowing z^2
    let ln_1pz2 = if z > 1e150 { 2.0 * z.ln() } else { (z * z).ln_1p() };
    let hi = 1.0 + ln_1pz2.sqrt();
    let start = (z * ln_1pz2.sqrt().max(1.0)).ln_1p().sqrt();
    let phi = |u: f64| -> Result<(f64, f64)> { Ok((ln_exp_sq_integral(u) - ln_target, 1.0 / dawson(u))) };
    let (phi_hi, _) = phi(hi)?;
    let root = newton_bisect(
        "solve_u",
        phi,
        (0.0, -1.0),
        (hi, phi_hi),
        start,
        Tolerance {
            f_abs: 0.0,
            x_rel: 2.0 * f64::EPSILON,
            x_abs: 0.0,
            max_iter: 200,
        },
    )?;
    let u = root.x;
    let residual = (ln_exp_sq_integral(u).exp() - target).abs();
    if residual > tol * target.max(1.0) && root.fx.abs() > 8.0 * f64::EPSILON * (1.0 + u * u) {
        return Err(Error::NoConvergence {
            what: "solve_u",
            iterations: root.iterations,
            estimate: u,
        });
    }
    Ok(u)
}

/// f0(x) = exp(U(x)^2), the solution of f0'' = 1/f0 with f0(0) = 1, f0'(0) = 0.
pub fn f0(x: f64) -> Result<f64> {
    let u = solve_u(x, DEFAULT_U_TOL)?;
    Ok(f0_from_u(x, u))
}

/// At the root, exp(U^2) = I(U)/D(U) = x / (sqrt(2) D(U)); D is flat for large U,
/// so this form is insensitive to the last bits of U.
fn f0_from_u(x: f64, u: f64) -> f64 {
    if u < 0.5 {
        exp_sq(u)
    } else {
        x / (SQRT_2 * dawson(u))
    }
}

pub fn transform_constants(p: &ModelParams) -> Result<TransformConstants> {
    let big_w = p.big_w();
    let a = SQRT_2 * exp_sq_integral(big_w)?;
    let b = p.k.sqrt() / p.y * exp_sq(big_w);
    let c = p.y * exp_neg_sq(big_w);
    Ok(TransformConstants { a, b, c })
}

/// f(t) = c f0(a + b t).
pub fn f_eval(t: f64, p: &ModelParams) -> Result<f64> {
    ensure_domain(t.is_finite() && t >= 0.0, "f_eval", t, "finite t >= 0")?;
    if t == 0.0 {
        return Ok(p.y);
    }
    let tc = transform_constants(p)?;
    Ok(tc.c * f0(tc.a + tc.b * t)?)
}

/// f'(t) = sqrt(w^2 + 2k ln(f(t)/y)).
///
/// Since ln(f/y) = U^2 - W^2 with U = U(a + bt), this is evaluated as
/// sqrt(2k) U, which avoids the cancellation in ln(f/y) near t = 0.
pub fn f_prime(t: f64, p: &ModelParams) -> Result<f64> {
    ensure_domain(t.is_finite() && t >= 0.0, "f_prime", t, "finite t >= 0")?;
    if t == 0.0 {
        return Ok(p.w);
    }
    let tc = transform_constants(p)?;
    let u = solve_u(tc.a + tc.b * t, DEFAULT_U_TOL)?;
    Ok((2.0 * p.k).sqrt() * u)
}

/// g(t) = t sqrt(2k ln t) for `t >= 1`; exactly 0 at t = 1.
pub fn g_eval(t: f64, k: f64) -> Result<f64> {
    ensure_domain(t.is_finite() && t >= 1.0, "g_eval", t, "finite t >= 1")?;
    ensure_domain(k.is_finite() && k > 0.0, "g_eval", k, "k > 0")?;
    if t == 1.0 {
        return Ok(0.0);
    }
    Ok(t * (2.0 * k * t.ln()).sqrt())
}

/// g'(t) = sqrt(2k ln t + 2k + k / (2 ln t)) for `t > 1`.
pub fn g_prime(t: f64, k: f64) -> Result<f64> {
    ensure_domain(t.is_finite() && t > 1.0, "g_prime", t, "finite t > 1")?;
    ensure_domain(k.is_finite() && k > 0.0, "g_prime", k, "k > 0")?;
    let l = t.ln();
    Ok((2.0 * k * l + 2.0 * k + k / (2.0 * l)).sqrt())
}

/// The same derivative written as sqrt(psi(t) + 2k ln g(t)).
pub fn g_prime_psi_form(t: f64, k: f64) -> Result<f64> {
    let psi = crate::critical::psi(t, k)?;
    let g = g_eval(t, k)?;
    Ok((psi + 2.0 * k * g.ln()).sqrt())
}

/// Leading term of f for large t; identical to g. Refuses `t <= e`.
pub fn asymptotic_f(t: f64, k: f64) -> Result<f64> {
    ensure_domain(t > E, "asymptotic_f", t, "t > e")?;
    g_eval(t, k)
}

/// Leading term z sqrt(ln z) of f0(x), z = x sqrt(2). Refuses `z <= e`.
pub fn asymptotic_f0(x: f64) -> Result<f64> {
    let z = x * SQRT_2;
    ensure_domain(z.is_finite() && z > E, "asymptotic_f0", x, "x sqrt(2) > e")?;
    Ok(z * z.ln().sqrt())
}

/// One sample of the reference integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeSample {
    pub t: f64,
    pub f: f64,
    pub f_prime: f64,
}

/// Classical fourth-order Runge-Kutta for f'' = k/f from (y, w) over
/// [0, t_end] in `n_steps >= 1000` equal steps. Independent of the closed form.
pub fn ode_oracle(p: &ModelParams, t_end: f64, n_steps: usize) -> Result<Vec<OdeSample>> {
    ensure_domain(t_end.is_finite() && t_end > 0.0, "ode_oracle", t_end, "t_end > 0")?;
    ensure_domain(n_steps >= 1000, "ode_oracle", n_steps as f64, "n_steps >= 1000")?;
    let k = p.k;
    let h = t_end / n_steps as f64;
    let mut out = Vec::with_capacity(n_steps + 1);
    let (mut f, mut v) = (p.y, p.w);
    out.push(OdeSample { t: 0.0, f, f_prime: v });
    for i in 1..=n_steps {
        let k1f = v;
        let k1v = k / f;
        let k2f = v + 0.5 * h * k1v;
        let k2v = k / (f + 0.5 * h * k1f);
        let k3f = v + 0.5 * h * k2v;
        let k3v = k / (f + 0.5 * h * k2f);
        let k4f = v + h * k3v;
        let k4v = k / (f + h * k3f);
        f += h / 6.0 * (k1f + 2.0 * k2f + 2.0 * k3f + k4f);
        v += h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
        if !(f.is_finite() && f > 0.0) {
            return Err(Error::Domain {
                what: "ode_oracle",
                value: f,
                expected: "solution stays positive",
            });
        }
        out.push(OdeSample {
            t: i as f64 * h,
            f,
            f_prime: v,
        });
    }
    Ok(out)
}
