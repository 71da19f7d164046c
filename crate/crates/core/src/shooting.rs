//! The slope w(k) for which the solution with f(0) = 1 reaches f(1) = 1 + k.
//!
//! The matching condition int_1^{1+k} (w^2 + 2k ln s)^{-1/2} ds = 1 is turned
//! into exponential-square form by v^2 = W^2 + ln s, W = w / sqrt(2k):
//!
//! M(k, w) = sqrt(2/k) exp(-W^2) int_W^V exp(v^2) dv,  V^2 = W^2 + ln(1 + k).
//!
//! The substitution removes the s = 1 singularity of the w = 0 integrand.

use crate::error::{ensure_domain, Error, Result};
use crate::quadrature::{adaptive_quad_with, dawson, QuadratureOptions};
use crate::roots::{newton_bisect, Tolerance};

pub const DEFAULT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShootingResult {
    pub k: f64,
    pub w: f64,
    /// M(k, w) - 1 at the returned slope.
    pub residual: f64,
    pub iterations: usize,
}

/// S(W) = exp(-W^2) int_W^V exp(v^2) dv.
fn scaled_tail(k: f64, big_w: f64, big_v: f64) -> Result<f64> {
    let gap = k.ln_1p();
    if gap > 1.0 {
        // exp(-W^2) (e^{V^2} D(V) - e^{W^2} D(W)) with e^{V^2 - W^2} = 1 + k
        return Ok((1.0 + k) * dawson(big_v) - dawson(big_w));
    }
    let r = adaptive_quad_with(
        |v: f64| ((v - big_w) * (v + big_w)).exp(),
        big_w,
        big_v,
        QuadratureOptions {
            tol: 5e-14,
            max_intervals: 200,
        },
    )?;
    Ok(r.value)
}

fn endpoints(k: f64, w: f64) -> (f64, f64) {
    let big_w = w / (2.0 * k).sqrt();
    let big_v = (big_w * big_w + k.ln_1p()).sqrt();
    (big_w, big_v)
}

/// M(k, w) = int_1^{1+k} (w^2 + 2k ln s)^{-1/2} ds.
pub fn matching_integral(k: f64, w: f64) -> Result<f64> {
    ensure_domain(k.is_finite() && k > 0.0, "matching_integral", k, "k > 0")?;
    ensure_domain(w.is_finite() && w >= 0.0, "matching_integral", w, "w >= 0")?;
    let (big_w, big_v) = endpoints(k, w);
    Ok((2.0 / k).sqrt() * scaled_tail(k, big_w, big_v)?)
}

/// M and dM/dw together. With S = exp(-W^2) int_W^V exp(v^2) dv,
/// dS/dW = -2 W S + (1 + k) W / V - 1 and dW/dw = 1 / sqrt(2k).
fn matching_with_slope(k: f64, w: f64) -> Result<(f64, f64)> {
    let (big_w, big_v) = endpoints(k, w);
    let s = scaled_tail(k, big_w, big_v)?;
    let ds = -2.0 * big_w * s + (1.0 + k) * big_w / big_v - 1.0;
    let scale = (2.0 / k).sqrt();
    Ok((scale * s, scale * ds / (2.0 * k).sqrt()))
}

/// The unique w in (0, k] with M(k, w) = 1, to `|M - 1| <= tol`.
pub fn solve_w(k: f64, tol: f64) -> Result<ShootingResult> {
    ensure_domain(k.is_finite() && k > 0.0, "solve_w", k, "k > 0")?;
    ensure_domain(tol > 0.0, "solve_w", tol, "tol > 0")?;
    let m_lo = matching_integral(k, 0.0)? - 1.0;
    let m_hi = matching_integral(k, k)? - 1.0;
    let root = newton_bisect(
        "solve_w",
        |w| {
            let (m, dm) = matching_with_slope(k, w)?;
            Ok((m - 1.0, dm))
        },
        (0.0, m_lo),
        (k, m_hi),
        0.6 * k,
        Tolerance {
            f_abs: tol,
            x_rel: 1e-15,
            x_abs: 0.0,
            max_iter: 200,
        },
    )?;
    if root.fx.abs() > tol {
        return Err(Error::NoConvergence {
            what: "solve_w",
            iterations: root.iterations,
            estimate: root.x,
        });
    }
    Ok(ShootingResult {
        k,
        w: root.x,
        residual: root.fx,
        iterations: root.iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::continuous::{f_eval, ModelParams};
    use crate::quadrature::adaptive_quad;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn matching_integral_reference() {
        assert!(rel(matching_integral(1.0, 0.0).unwrap(), 1.516_770_632_602_483_9) < 1e-14);
        assert!(matching_integral(1.0, 0.0).unwrap() > 2f64.sqrt());
        let m = matching_integral(1.0384, 0.6218).unwrap();
        assert!((m - 1.0).abs() < 1e-3);
        assert!(rel(m, 0.999_992_79) < 1e-8);
    }

    #[test]
    fn matching_integral_agrees_with_direct_quadrature() {
        for (k, w) in [(0.05, 0.02), (0.5, 0.3), (2.0, 1.0), (3.0, 0.1)] {
            let direct = adaptive_quad(|s: f64| (w * w + 2.0 * k * s.ln()).powf(-0.5), 1.0, 1.0 + k, 1e-13).unwrap();
            assert!(
                rel(matching_integral(k, w).unwrap(), direct.value) < 1e-12,
                "k={k} w={w}"
            );
        }
    }

    #[test]
    fn matching_integral_decreases_to_zero() {
        for k in [0.01, 0.5, 2.0] {
            let mut prev = f64::INFINITY;
            for i in 0..60 {
                let w = 0.05 * i as f64 * (1.0 + i as f64);
                let m = matching_integral(k, w).unwrap();
                assert!(m < prev, "k={k} w={w}");
                prev = m;
            }
            assert!(matching_integral(k, 1e6).unwrap() < 1e-5);
        }
    }

    #[test]
    fn slope_matches_finite_difference() {
        for (k, w) in [(0.01, 0.004), (1.0, 0.5), (3.0, 2.1)] {
            let h = 1e-6 * w;
            let fd = (matching_integral(k, w + h).unwrap() - matching_integral(k, w - h).unwrap()) / (2.0 * h);
            let (_, dm) = matching_with_slope(k, w).unwrap();
            assert!(rel(dm, fd) < 1e-6, "k={k}: {dm} vs {fd}");
        }
    }

    #[test]
    fn solve_w_reference() {
        let cases = [
            (0.01, 0.005_012_461_248_342_977_8),
            (0.02, 0.010_049_691_075_379_672),
            (0.1, 0.051_212_433_636_078_217),
            (0.5, 0.277_104_363_667_258_09),
            (1.0, 0.595_973_391_344_569_15),
            (2.0, 1.313_398_699_755_451_5),
            (3.0, 2.097_467_401_062_709_5),
            (1.0384, 0.621_789_215_789_774_73),
        ];
        for (k, w) in cases {
            let r = solve_w(k, DEFAULT_TOL).unwrap();
            assert!(rel(r.w, w) < 1e-11, "w({k}) = {} vs {w}", r.w);
            assert!(r.residual.abs() <= DEFAULT_TOL);
            assert!(r.w > 0.0 && r.w <= k);
        }
    }

    #[test]
    fn solve_w_monotone_maps() {
        let ks: Vec<f64> = (1..=40).map(|i| 0.1 * i as f64).collect();
        let ws: Vec<f64> = ks.iter().map(|&k| solve_w(k, DEFAULT_TOL).unwrap().w).collect();
        for i in 1..ks.len() {
            let (k1, k2, w1, w2) = (ks[i - 1], ks[i], ws[i - 1], ws[i]);
            assert!(w1 < w2);
            assert!(w1 / (2.0 * k1).sqrt() < w2 / (2.0 * k2).sqrt());
            assert!(w1 / k1 < w2 / k2);
        }
    }

    #[test]
    fn round_trip_hits_target() {
        for k in [0.001, 0.02, 0.3, 1.0384, 2.5, 4.0] {
            let w = solve_w(k, DEFAULT_TOL).unwrap().w;
            let p = ModelParams::new(k, 1.0, w).unwrap();
            assert!(rel(f_eval(1.0, &p).unwrap(), 1.0 + k) < 1e-9, "k={k}");
        }
    }
}
