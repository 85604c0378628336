//! Weighted norms, the motion of zeros in `λ`, and the Richardson numbers.

use serde::{Deserialize, Serialize};

use crate::coefficients::ProblemSpec;
use crate::error::{invalid, Result, SlError};
use crate::norms::norm_sweep;
use crate::oscillation::{sweep_real, Start};
use crate::propagator::{initial_state, PropagationMode};
use crate::scalar::Real;
use crate::spectrum::{find_real_eigenvalues, ScanResult};

/// `∫_a^b w y²` for the α-normalised solution at real `λ`.
pub fn weighted_norm<T: Real>(spec: &ProblemSpec<T>, lambda: T) -> Result<T> {
    let s0 = initial_state(spec);
    Ok(norm_sweep(&spec.coeff, lambda, spec.a, spec.b, s0.y.re, s0.yp.re)?.weighted)
}

/// How far the sign pattern of the weighted norms was observed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailEvidence {
    /// Top of the scanned window.
    pub lambda_hi_checked: f64,
    /// Every scanned eigenvalue above this has positive weighted norm.
    pub all_positive_above: Option<f64>,
    /// The three eigenvalues nearest the top all have positive norm.
    pub sturmian_tail_top: bool,
    pub lambda_lo_checked: f64,
    /// Every scanned eigenvalue below this has negative weighted norm.
    pub all_negative_below: Option<f64>,
    /// The three eigenvalues nearest the bottom all have negative norm.
    pub sturmian_tail_bottom: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RichardsonReport {
    pub lambda_plus: Option<f64>,
    pub lambda_minus: Option<f64>,
    pub scan: ScanResult,
    pub tail_evidence: TailEvidence,
}

/// `(λ, ∫ w y²)` pairs sorted by `λ`.
fn norms(scan: &ScanResult) -> Vec<(f64, f64)> {
    scan.records.iter().filter_map(|r| r.weighted_norm.map(|n| (r.re, n))).collect()
}

/// Smallest eigenvalue above which every norm is positive; `None` when the
/// top eigenvalue itself is not positive.
fn plus_from(pairs: &[(f64, f64)]) -> Option<f64> {
    let &(top, n_top) = pairs.last()?;
    if n_top <= 0.0 {
        return None;
    }
    Some(pairs.iter().rev().find(|p| p.1 <= 0.0).map_or(pairs[0].0, |p| p.0).min(top))
}

fn minus_from(pairs: &[(f64, f64)]) -> Option<f64> {
    let &(bottom, n_bottom) = pairs.first()?;
    if n_bottom >= 0.0 {
        return None;
    }
    Some(pairs.iter().find(|p| p.1 >= 0.0).map_or(pairs[pairs.len() - 1].0, |p| p.0).max(bottom))
}

pub fn richardson_numbers(spec: &ProblemSpec<f64>, window: (f64, f64), tol: f64) -> Result<RichardsonReport> {
    let scan = find_real_eigenvalues(spec, window, tol)?;
    richardson_from_scan(scan)
}

/// Richardson numbers from an existing scan.
pub fn richardson_from_scan(scan: ScanResult) -> Result<RichardsonReport> {
    if scan.records.is_empty() {
        return Err(SlError::EmptyReport { lo: scan.window.0, hi: scan.window.1 });
    }
    let pairs = norms(&scan);
    let lambda_plus = plus_from(&pairs);
    let lambda_minus = minus_from(&pairs);
    let k = pairs.len().min(3);
    let tail_evidence = TailEvidence {
        lambda_hi_checked: scan.window.1,
        all_positive_above: lambda_plus,
        sturmian_tail_top: k > 0 && pairs[pairs.len() - k..].iter().all(|p| p.1 > 0.0),
        lambda_lo_checked: scan.window.0,
        all_negative_below: lambda_minus,
        sturmian_tail_bottom: k > 0 && pairs[..k].iter().all(|p| p.1 < 0.0),
    };
    Ok(RichardsonReport { lambda_plus, lambda_minus, scan, tail_evidence })
}

fn interior_zeros(spec: &ProblemSpec<f64>, lambda: f64) -> Result<Vec<f64>> {
    let s0 = initial_state(spec);
    let start = Start { y: s0.y.re, yp: s0.yp.re, theta: spec.alpha };
    let sweep = sweep_real(&spec.coeff, lambda, spec.a, spec.b, start, true, PropagationMode::Auto)?;
    let edge = 1e-12 * spec.length();
    Ok(sweep.zeros.into_iter().filter(|&x| x > spec.a + edge && x < spec.b - edge).collect())
}

/// Position of the `index`-th interior zero (1-based) of `y(·, λ)`.
pub fn zero_position(spec: &ProblemSpec<f64>, lambda: f64, index: usize) -> Result<f64> {
    if index == 0 {
        return Err(invalid("zero index is 1-based"));
    }
    let zeros = interior_zeros(spec, lambda)?;
    zeros.get(index - 1).copied().ok_or_else(|| {
        SlError::DriftUndefined(format!("y(·, {lambda}) has {} interior zeros, fewer than {index}", zeros.len()))
    })
}

/// `dx/dλ` of the `index`-th interior zero by central differences.
pub fn zero_drift(spec: &ProblemSpec<f64>, lambda: f64, index: usize) -> Result<f64> {
    let h = 1e-5 * lambda.abs().max(1.0);
    let x = zero_position(spec, lambda, index)?;
    let lo = zero_position(spec, lambda - h, index)?;
    let hi = zero_position(spec, lambda + h, index)?;
    let (l, r) = (lo.min(hi).min(x), lo.max(hi).max(x));
    if let Some(bp) = spec.coeff.breakpoints().into_iter().find(|&bp| bp >= l && bp <= r) {
        return Err(SlError::DriftUndefined(format!("zero {index} crosses the breakpoint {bp} near λ = {lambda}")));
    }
    Ok((hi - lo) / (2.0 * h))
}

/// `dx/dλ = −∫_a^x w y² / y'(x)²` for the `index`-th interior zero.
pub fn zero_drift_formula(spec: &ProblemSpec<f64>, lambda: f64, index: usize) -> Result<f64> {
    let x = zero_position(spec, lambda, index)?;
    let s0 = initial_state(spec);
    let ns = norm_sweep(&spec.coeff, lambda, spec.a, x, s0.y.re, s0.yp.re)?;
    Ok(-ns.weighted / (ns.yp * ns.yp))
}
