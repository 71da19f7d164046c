//! Bracketed one-dimensional solvers shared by the continuous, shooting and
//! critical modules.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Root {
    pub x: f64,
    pub fx: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct Tolerance {
    /// Stop when |f(x)| falls to this value.
    pub f_abs: f64,
    /// Stop when the step or bracket width falls below `x_rel * |x| + x_abs`.
    pub x_rel: f64,
    pub x_abs: f64,
    pub max_iter: usize,
}

impl Tolerance {
    fn x_width(&self, x: f64) -> f64 {
        self.x_rel * x.abs() + self.x_abs
    }
}

fn opposite(a: f64, b: f64) -> bool {
    (a < 0.0 && b > 0.0) || (a > 0.0 && b < 0.0)
}

/// Newton iteration kept inside a sign-change bracket; any step that leaves
/// the bracket (or is not finite) is replaced by bisection.
///
/// `f` returns the value and the derivative. `f_lo` and `f_hi` are the values
/// (or just the signs) at the bracket ends.
pub(crate) fn newton_bisect<F>(
    what: &'static str,
    mut f: F,
    (mut lo, mut f_lo): (f64, f64),
    (mut hi, f_hi): (f64, f64),
    x0: f64,
    tol: Tolerance,
) -> Result<Root>
where
    F: FnMut(f64) -> Result<(f64, f64)>,
{
    if f_lo == 0.0 {
        return Ok(Root {
            x: lo,
            fx: 0.0,
            iterations: 0,
        });
    }
    if f_hi == 0.0 {
        return Ok(Root {
            x: hi,
            fx: 0.0,
            iterations: 0,
        });
    }
    if !opposite(f_lo, f_hi) {
        return Err(Error::Bracket { what, lo, hi });
    }
    let mut x = if x0 > lo && x0 < hi { x0 } else { 0.5 * (lo + hi) };
    for it in 1..=tol.max_iter {
        let (fx, dfx) = f(x)?;
        if fx.abs() <= tol.f_abs {
            return Ok(Root { x, fx, iterations: it });
        }
        if opposite(fx, f_lo) {
            hi = x;
        } else {
            lo = x;
            f_lo = fx;
        }
        let newton = x - fx / dfx;
        let next = if newton.is_finite() && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        let step = (next - x).abs();
        x = next;
        if step <= tol.x_width(x) || hi - lo <= tol.x_width(x) {
            let (fx, _) = f(x)?;
            return Ok(Root {
                x,
                fx,
                iterations: it + 1,
            });
        }
    }
    Err(Error::NoConvergence {
        what,
        iterations: tol.max_iter,
        estimate: x,
    })
}

/// Plain bisection on a sign change. Only signs of the end values are used.
pub(crate) fn bisect<F>(
    what: &'static str,
    mut f: F,
    (mut lo, mut f_lo): (f64, f64),
    (mut hi, f_hi): (f64, f64),
    tol: Tolerance,
) -> Result<Root>
where
    F: FnMut(f64) -> Result<f64>,
{
    if f_lo == 0.0 {
        return Ok(Root {
            x: lo,
            fx: 0.0,
            iterations: 0,
        });
    }
    if f_hi == 0.0 {
        return Ok(Root {
            x: hi,
            fx: 0.0,
            iterations: 0,
        });
    }
    if !opposite(f_lo, f_hi) {
        return Err(Error::Bracket { what, lo, hi });
    }
    for it in 1..=tol.max_iter {
        let mid = 0.5 * (lo + hi);
        let collapsed = mid <= lo || mid >= hi;
        let fm = f(mid)?;
        if fm == 0.0 || fm.abs() <= tol.f_abs {
            return Ok(Root {
                x: mid,
                fx: fm,
                iterations: it,
            });
        }
        if opposite(fm, f_lo) {
            hi = mid;
        } else {
            lo = mid;
            f_lo = fm;
        }
        if collapsed || hi - lo <= tol.x_width(mid) {
            let x = 0.5 * (lo + hi);
            return Ok(Root {
                x,
                fx: f(x)?,
                iterations: it + 1,
            });
        }
    }
    Err(Error::NoConvergence {
        what,
        iterations: tol.max_iter,
        estimate: 0.5 * (lo + hi),
    })
}

/// Golden-section search for the minimum of a unimodal function on `[lo, hi]`.
pub(crate) fn golden_section_min<F>(
    what: &'static str,
    mut f: F,
    mut lo: f64,
    mut hi: f64,
    x_rel: f64,
    max_iter: usize,
) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> Result<f64>,
{
    let inv_phi = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let mut f1 = f(x1)?;
    let mut f2 = f(x2)?;
    for _ in 0..max_iter {
        if hi - lo <= x_rel * 0.5 * (lo + hi).abs() {
            return Ok(if f1 < f2 { (x1, f1) } else { (x2, f2) });
        }
        if f1 < f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1)?;
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2)?;
        }
    }
    Err(Error::NoConvergence {
        what,
        iterations: max_iter,
        estimate: 0.5 * (lo + hi),
    })
}
