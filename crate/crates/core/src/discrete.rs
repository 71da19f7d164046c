//! The line-network recursion V_{j+1} - 2 V_j + V_{j-1} = k / V_j with
//! V_0 = 1, V_1 = 1 + k, and its comparator W_j = g(j).
//!
//! Iteration runs in difference form, D_0 = k, V_{j+1} = V_j + D_j,
//! D_{j+1} = D_j + k / V_{j+1}, which avoids the cancellation in 2V_j - V_{j-1}.

use serde::Serialize;

use crate::continuous::g_eval;
use crate::error::{ensure_domain, Error, Result};

/// Largest trace length accepted by [`recursion_trace`].
pub const MAX_TRACE: usize = 100_000_000;

/// Largest decade exponent accepted by [`convergence_diagnostic`].
pub const MAX_EXPONENT: u32 = 8;

/// Streaming iterator over (j, V_j, V_{j+1} - V_j).
#[derive(Debug, Clone)]
pub struct Recursion {
    k: f64,
    j: u64,
    v: f64,
    d: f64,
}

impl Recursion {
    pub fn new(k: f64) -> Self {
        Self { k, j: 0, v: 1.0, d: k }
    }
}

impl Iterator for Recursion {
    type Item = (u64, f64, f64);

    fn next(&mut self) -> Option<Self::Item> {
        let out = (self.j, self.v, self.d);
        self.j += 1;
        self.v += self.d;
        self.d += self.k / self.v;
        Some(out)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RecursionTrace {
    pub k: f64,
    /// V_0 ..= V_n.
    pub values: Vec<f64>,
    /// V_{j+1} - V_j for j = 0..n.
    pub first_differences: Vec<f64>,
    pub n: usize,
}

pub fn recursion_trace(k: f64, n: usize) -> Result<RecursionTrace> {
    ensure_domain(k.is_finite() && k > 0.0, "recursion_trace", k, "k > 0")?;
    ensure_domain(n >= 1, "recursion_trace", n as f64, "n >= 1")?;
    if n > MAX_TRACE {
        return Err(Error::SizeLimit {
            what: "recursion_trace",
            requested: n as u64,
            limit: MAX_TRACE as u64,
        });
    }
    let mut values = Vec::with_capacity(n + 1);
    let mut first_differences = Vec::with_capacity(n);
    for (j, v, d) in Recursion::new(k).take(n + 1) {
        values.push(v);
        if (j as usize) < n {
            first_differences.push(d);
        }
    }
    Ok(RecursionTrace {
        k,
        values,
        first_differences,
        n,
    })
}

/// W_j = j sqrt(2k ln j); W_1 = 0.
pub fn w_sequence(j: u64, k: f64) -> Result<f64> {
    ensure_domain(j >= 1, "w_sequence", j as f64, "j >= 1")?;
    g_eval(j as f64, k)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Property {
    /// V_j >= 1 + jk.
    LinearGrowth,
    /// V_{j+1} - V_j = k sum_{i<=j} 1/V_i.
    Telescoping,
    /// V_{j+1} - V_j <= k + ln(1 + jk).
    DifferenceBound,
    /// (V_{j+1} - V_j) / V_j <= (k + ln(1 + jk)) / (1 + jk).
    RelativeDifferenceBound,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Violation {
    pub property: Property,
    pub index: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PropertyReport {
    pub k: f64,
    /// Indices j = 0..checked were tested.
    pub checked: usize,
    /// Largest relative gap in the telescoping identity.
    pub max_telescoping_error: f64,
    pub first_violation: Option<Violation>,
}

impl PropertyReport {
    pub fn holds(&self) -> bool {
        self.first_violation.is_none()
    }
}

/// Relative tolerance of the telescoping identity.
pub const TELESCOPING_TOL: f64 = 1e-10;

pub fn check_properties(trace: &RecursionTrace) -> PropertyReport {
    let k = trace.k;
    let mut first_violation = None;
    let mut flag = |property, index| {
        if first_violation.is_none() {
            first_violation = Some(Violation { property, index });
        }
    };
    // Neumaier-compensated sum of 1/V_i
    let (mut sum, mut comp) = (0.0f64, 0.0f64);
    let mut max_err = 0.0f64;
    for (j, &d) in trace.first_differences.iter().enumerate() {
        let v = trace.values[j];
        let jk = j as f64 * k;
        if v < 1.0 + jk {
            flag(Property::LinearGrowth, j);
        }
        let term = 1.0 / v;
        let t = sum + term;
        comp += if sum.abs() >= term.abs() {
            (sum - t) + term
        } else {
            (term - t) + sum
        };
        sum = t;
        let telescoped = k * (sum + comp);
        let err = (d - telescoped).abs() / telescoped;
        max_err = max_err.max(err);
        if err > TELESCOPING_TOL {
            flag(Property::Telescoping, j);
        }
        let bound = k + jk.ln_1p();
        if d > bound {
            flag(Property::DifferenceBound, j);
        }
        if d / v > bound / (1.0 + jk) {
            flag(Property::RelativeDifferenceBound, j);
        }
    }
    PropertyReport {
        k,
        checked: trace.first_differences.len(),
        max_telescoping_error: max_err,
        first_violation,
    }
}

/// [ln V_{j+1} - ln V_{j-1}] / [(V_{j+1} - V_{j-1}) / V_j] for `2 <= j <= n - 1`.
pub fn log_identity_quotient(trace: &RecursionTrace, j: usize) -> Result<f64> {
    if j < 2 || j + 1 > trace.n {
        return Err(Error::Index {
            what: "log_identity_quotient",
            index: j,
            lo: 2,
            hi: trace.n.saturating_sub(1),
        });
    }
    let span = trace.first_differences[j - 1] + trace.first_differences[j];
    let v_prev = trace.values[j - 1];
    Ok((span / v_prev).ln_1p() / (span / trace.values[j]))
}

/// Result of scanning V_j against W_j for j = 2..=n_max.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CrossingScan {
    pub k: f64,
    pub n_max: u64,
    /// Smallest n >= 2 with V_n >= W_n.
    pub first_index: Option<u64>,
    /// Whether V_j >= W_j on all of [first_index, n_max].
    pub persists_from_first: bool,
    /// Largest j <= n_max with V_j < W_j.
    pub last_below: Option<u64>,
    /// Smallest n with V_j >= W_j on all of [n, n_max].
    pub settled_from: Option<u64>,
    /// Estimate of the constant C in D_j >= sqrt(C + 2k ln V_j):
    /// min over 1 <= j < n_max of D_j^2 - 2k ln V_j.
    pub c_hat: f64,
    /// min{n : psi(n) <= C - 1}; absent when it exceeds the u64 range.
    pub n0: Option<u64>,
    /// Whether some n in [n0, n_max] has V_n >= W_n and the order persists
    /// to n_max. Absent when n0 is absent or beyond n_max.
    pub persists_past_n0: Option<bool>,
}

/// n0 = min{n >= 2 : psi(n) <= level}, found in s = ln n.
fn n0_for_level(k: f64, level: f64) -> Option<u64> {
    let h = |s: f64| 2.0 * k + k / (2.0 * s) - k * (2.0 * k * s).ln() - level;
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    while h(hi) > 0.0 {
        lo = hi;
        hi *= 2.0;
        if hi > 1e6 {
            return None;
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if h(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let n = hi.exp().ceil();
    if n >= u64::MAX as f64 {
        return None;
    }
    // step down past rounding at the boundary
    let mut n = (n as u64).max(2);
    while n > 2 && h(((n - 1) as f64).ln()) <= 0.0 {
        n -= 1;
    }
    while h((n as f64).ln()) > 0.0 {
        n += 1;
    }
    Some(n)
}

pub fn crossing_detect(k: f64, n_max: u64) -> Result<CrossingScan> {
    ensure_domain(k.is_finite() && k > 0.0, "crossing_detect", k, "k > 0")?;
    ensure_domain(n_max >= 2, "crossing_detect", n_max as f64, "n_max >= 2")?;
    let two_k = 2.0 * k;
    let mut first_index = None;
    let mut last_below = None;
    let mut c_hat = f64::INFINITY;
    let mut samples = Vec::new();
    for (j, v, d) in Recursion::new(k).take(n_max as usize + 1) {
        if j >= 1 && j < n_max {
            c_hat = c_hat.min(d * d - two_k * v.ln());
        }
        if j < 2 {
            continue;
        }
        let jf = j as f64;
        let w = jf * (two_k * jf.ln()).sqrt();
        if v >= w {
            first_index.get_or_insert(j);
        } else {
            last_below = Some(j);
        }
        samples.push(v >= w);
    }
    let settled_from = match last_below {
        None => Some(2),
        Some(j) if j < n_max => Some(j + 1),
        Some(_) => None,
    };
    let persists_from_first = match (first_index, last_below) {
        (Some(f), Some(l)) => l < f,
        (Some(_), None) => true,
        _ => false,
    };
    let n0 = n0_for_level(k, c_hat - 1.0);
    let persists_past_n0 = match n0 {
        Some(n0) if n0 <= n_max => {
            let start = n0.max(2);
            let tail = &samples[(start - 2) as usize..];
            tail.iter()
                .position(|&above| above)
                .map(|p| tail[p..].iter().all(|&above| above))
        }
        _ => None,
    };
    Ok(CrossingScan {
        k,
        n_max,
        first_index,
        persists_from_first,
        last_below,
        settled_from,
        c_hat,
        n0,
        persists_past_n0,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceDiagnostic {
    pub k: f64,
    pub sample_indices: Vec<u64>,
    /// V_j / W_j at the sample indices.
    pub ratios: Vec<f64>,
    /// (V_j / W_j - 1) sqrt(2k ln j) at the sample indices.
    pub scaled_residuals: Vec<f64>,
    /// C = 2 max |V_j / W_j - 1| sqrt(2k ln j) over every j of the first decade.
    pub envelope_constant: f64,
    /// |ratio - 1| non-increasing across the samples.
    pub monotone: bool,
    /// |ratio - 1| <= C / sqrt(2k ln j) at every sample.
    pub within_envelope: bool,
    pub trend_ok: bool,
}

/// Samples V_j / W_j at j = 10^e, streaming the recursion up to the largest
/// sample (and at least through the first decade).
pub fn convergence_diagnostic(k: f64, exponents: &[u32]) -> Result<ConvergenceDiagnostic> {
    ensure_domain(k.is_finite() && k > 0.0, "convergence_diagnostic", k, "k > 0")?;
    ensure_domain(
        !exponents.is_empty(),
        "convergence_diagnostic",
        0.0,
        "at least one exponent",
    )?;
    ensure_domain(
        exponents.windows(2).all(|p| p[0] < p[1]),
        "convergence_diagnostic",
        0.0,
        "exponents strictly ascending",
    )?;
    let first = exponents[0];
    let last = *exponents.last().unwrap_or(&first);
    ensure_domain(first >= 1, "convergence_diagnostic", first as f64, "exponents >= 1")?;
    if last > MAX_EXPONENT {
        return Err(Error::SizeLimit {
            what: "convergence_diagnostic",
            requested: 10u64.pow(last.min(19)),
            limit: 10u64.pow(MAX_EXPONENT),
        });
    }
    let sample_indices: Vec<u64> = exponents.iter().map(|&e| 10u64.pow(e)).collect();
    let decade = (10u64.pow(first), 10u64.pow(first + 1));
    let end = sample_indices.last().copied().unwrap_or(decade.1).max(decade.1);
    let two_k = 2.0 * k;
    let mut ratios = Vec::with_capacity(sample_indices.len());
    let mut next = 0;
    let mut envelope = 0.0f64;
    for (j, v, _) in Recursion::new(k).take(end as usize + 1) {
        if j < decade.0 {
            continue;
        }
        let jf = j as f64;
        let root = (two_k * jf.ln()).sqrt();
        let ratio = v / (jf * root);
        if j <= decade.1 {
            envelope = envelope.max((ratio - 1.0).abs() * root);
        }
        if next < sample_indices.len() && j == sample_indices[next] {
            ratios.push(ratio);
            next += 1;
        }
    }
    let envelope_constant = 2.0 * envelope;
    let scaled_residuals: Vec<f64> = sample_indices
        .iter()
        .zip(&ratios)
        .map(|(&j, &r)| (r - 1.0) * (two_k * (j as f64).ln()).sqrt())
        .collect();
    let monotone = ratios.windows(2).all(|p| (p[1] - 1.0).abs() <= (p[0] - 1.0).abs());
    let within_envelope = scaled_residuals.iter().all(|s| s.abs() <= envelope_constant);
    Ok(ConvergenceDiagnostic {
        k,
        sample_indices,
        ratios,
        scaled_residuals,
        envelope_constant,
        monotone,
        within_envelope,
        trend_ok: monotone && within_envelope,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn trace_small_cases() {
        let t = recursion_trace(1.0, 3).unwrap();
        assert_eq!(t.values[0], 1.0);
        assert_eq!(t.values[1], 2.0);
        assert_eq!(t.values[2], 3.5);
        assert!(rel(t.values[3], 5.285_714_285_714_285_7) < 1e-15);
        assert_eq!(t.first_differences[0], 1.0);
        assert_eq!(t.first_differences.len(), 3);
        let t = recursion_trace(0.37, 1).unwrap();
        assert_eq!(t.values[1], 1.0 + 0.37);
        assert_eq!(t.first_differences[0], 0.37);
        assert!(recursion_trace(1.0, 0).is_err());
        assert!(matches!(
            recursion_trace(1.0, MAX_TRACE + 1),
            Err(Error::SizeLimit { .. })
        ));
    }

    #[test]
    fn trace_reference_values() {
        let t = recursion_trace(0.1, 100).unwrap();
        assert!(rel(t.values[100], 79.400_835_783_465_582) < 1e-13);
        let t = recursion_trace(1.0, 1000).unwrap();
        let ratio = t.values[1000] / w_sequence(1000, 1.0).unwrap();
        assert!(rel(ratio, 1.021_739_447_630_136_1) < 1e-12);
    }

    #[test]
    fn trace_matches_second_order_form() {
        let t = recursion_trace(0.3, 200).unwrap();
        for j in 1..200 {
            let lhs = t.values[j + 1] - 2.0 * t.values[j] + t.values[j - 1];
            assert!((lhs - 0.3 / t.values[j]).abs() < 1e-12);
        }
    }

    #[test]
    fn w_sequence_values() {
        assert_eq!(w_sequence(1, 0.4).unwrap(), 0.0);
        assert!(rel(w_sequence(100, 0.1).unwrap(), 95.970_518_243_761_624) < 1e-14);
        assert_eq!(w_sequence(7, 0.2).unwrap(), g_eval(7.0, 0.2).unwrap());
        assert!(w_sequence(0, 1.0).is_err());
    }

    #[test]
    fn properties_hold() {
        let t = recursion_trace(1.0, 1).unwrap();
        let r = check_properties(&t);
        assert!(r.holds());
        let t = recursion_trace(1.0, 2).unwrap();
        assert_eq!(t.first_differences[1], 1.5);
        assert!(t.first_differences[1] < 1.0 + 2f64.ln());
        for k in [0.001, 0.1, 1.0, 3.0] {
            let r = check_properties(&recursion_trace(k, 10_000).unwrap());
            assert!(r.holds(), "k={k}: {:?}", r.first_violation);
            assert!(r.max_telescoping_error < TELESCOPING_TOL);
        }
    }

    #[test]
    fn broken_trace_is_caught() {
        let mut t = recursion_trace(0.5, 50).unwrap();
        t.first_differences[20] *= 1.0 + 1e-6;
        let r = check_properties(&t);
        assert_eq!(
            r.first_violation,
            Some(Violation {
                property: Property::Telescoping,
                index: 20
            })
        );
    }

    #[test]
    fn log_identity_values() {
        let t = recursion_trace(1.0, 10).unwrap();
        assert!(rel(log_identity_quotient(&t, 2).unwrap(), 1.035_242_794_965_637_5) < 1e-14);
        assert!(log_identity_quotient(&t, 1).is_err());
        assert!(log_identity_quotient(&t, 10).is_err());
        assert!(log_identity_quotient(&t, 9).is_ok());
        let t = recursion_trace(0.1, 10_000).unwrap();
        let dev: Vec<f64> = [10, 100, 1000, 9999]
            .iter()
            .map(|&j| (log_identity_quotient(&t, j).unwrap() - 1.0).abs())
            .collect();
        assert!(dev.windows(2).all(|p| p[1] < p[0]));
    }

    #[test]
    fn crossing_scan_k1() {
        let s = crossing_detect(1.0, 10_000).unwrap();
        assert_eq!(s.first_index, Some(2));
        assert_eq!(s.last_below, Some(75));
        assert_eq!(s.settled_from, Some(76));
        assert!(!s.persists_from_first);
        assert!(s.c_hat.is_finite());
    }

    #[test]
    fn n0_level_search() {
        // psi(n0) <= level < psi(n0 - 1)
        for (k, level) in [(1.0, -0.8), (0.5, 0.1), (2.0, -3.0)] {
            let n0 = n0_for_level(k, level).unwrap();
            let psi = |n: u64| crate::critical::psi(n as f64, k).unwrap();
            assert!(psi(n0) <= level);
            if n0 > 2 {
                assert!(psi(n0 - 1) > level);
            }
        }
        assert_eq!(n0_for_level(0.1, -1e9), None);
        assert_eq!(n0_for_level(1e-3, 10.0), Some(2));
        assert_eq!(n0_for_level(0.1, -0.999), None);
    }

    #[test]
    fn convergence_samples() {
        let d = convergence_diagnostic(1.0, &[3, 4]).unwrap();
        assert_eq!(d.sample_indices, vec![1000, 10_000]);
        assert!(rel(d.ratios[0], 1.021_739_447_630_136_1) < 1e-12);
        assert!(convergence_diagnostic(1.0, &[4, 3]).is_err());
        assert!(matches!(
            convergence_diagnostic(1.0, &[9]),
            Err(Error::SizeLimit { .. })
        ));
    }
}
