//! Characteristic function, oscillation counts and the real-axis eigenvalue
//! scan.
//!
//! `D(λ) = y(b)cos β + y'(b)sin β` for the solution fixed by the α condition.
//! Because the Wronskian of two solutions is constant, `D` also equals
//! `u_a'(c) u_b(c) − u_a(c) u_b'(c)` at any point `c`, where `u_b` is the
//! solution fixed by the β condition. We evaluate it at the breakpoint where
//! neither solution has been carried through a region in which it decays;
//! forward shooting alone loses every digit there when `λw + q ≪ 0`.

use std::collections::BTreeMap;

use num_complex::Complex;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coefficients::{PiecewiseCoefficient, ProblemSpec};
use crate::error::{invalid, Result};
use crate::norms::norm_sweep;
use crate::ode::Tolerance;
use crate::oscillation::{sweep_real, Start, Sweep};
use crate::propagator::{initial_state, propagate, transfer_over, PropagationMode};
use crate::scalar::Real;

/// Angle fraction (of `π`) within which a zero is considered to sit on the
/// end point of a sweep.
const END_ZERO_ETA: f64 = 1e-9;

/// One eigenvalue.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EigenRecord {
    pub re: f64,
    pub im: f64,
    /// Interior zeros of the eigenfunction (real eigenvalues only).
    pub zeros_in_ab: Option<usize>,
    /// `∫ w |y|²` of the α-normalised eigenfunction (real eigenvalues only).
    pub weighted_norm: Option<f64>,
    /// `|D(λ)|`.
    pub residual: f64,
}

impl EigenRecord {
    pub fn lambda(&self) -> Complex<f64> {
        Complex::new(self.re, self.im)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanResult {
    pub window: (f64, f64),
    pub records: Vec<EigenRecord>,
    /// Smallest oscillation count carried by ≥ 2 eigenvalues, with every
    /// count from it up to the top of the observed range doing the same.
    pub n_r_empirical: Option<usize>,
    /// Smallest count from which every observed count has exactly two
    /// eigenvalues. A finite window cannot prove this; annotation only.
    pub n_h_empirical: Option<usize>,
    pub warnings: Vec<String>,
}

impl ScanResult {
    pub fn eigenvalues(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.re).collect()
    }
}

fn candidates<T: Real>(spec: &ProblemSpec<T>) -> Vec<T> {
    let mut xs = vec![spec.a];
    xs.extend(spec.coeff.breakpoints());
    xs.push(spec.b);
    xs
}

/// State of the β-normalised solution, in reflected coordinates, at `−b`.
fn right_start<T: Real>(spec: &ProblemSpec<T>) -> (T, T) {
    (spec.beta.sin(), spec.beta.cos())
}

/// `∫ κ` over `[x0, x1]` with `κ = |Im √(λw + q)|`: the log-growth rate of the
/// dominant solution, i.e. how much rounding can be amplified.
fn growth_exponent<T: Real>(coeff: &PiecewiseCoefficient<T>, lambda: Complex<T>, x0: T, x1: T) -> T {
    let half = T::lit(0.5);
    coeff
        .segments(x0, x1)
        .iter()
        .map(|seg| {
            let k2 = lambda * seg.w + seg.q_at(half * (seg.x0 + seg.x1));
            k2.sqrt().im.abs() * seg.length()
        })
        .fold(T::zero(), |a, b| a + b)
}

/// Log of the rounding amplification of a one-sided solution at each
/// candidate: available growth minus the growth actually realised.
fn amplification<T: Real>(exponents: &[T], norms: &[T]) -> Vec<T> {
    let n0 = norms[0];
    exponents
        .iter()
        .zip(norms)
        .map(|(&g, &n)| if n > T::zero() { g - (n / n0).ln() } else { T::infinity() })
        .collect()
}

fn cumulative<T: Real>(parts: impl Iterator<Item = T>) -> Vec<T> {
    let mut acc = T::zero();
    let mut out = vec![acc];
    for p in parts {
        acc = acc + p;
        out.push(acc);
    }
    out
}

/// Index of the best matching point given both amplification profiles,
/// preferring smaller solutions on ties.
fn choose_matching<T: Real>(left: &[T], right: &[T], proxy: &[T]) -> usize {
    let slack = T::lit(1.0);
    let score: Vec<T> = left.iter().zip(right).map(|(&l, &r)| l + r).collect();
    let min = score.iter().copied().fold(T::infinity(), T::min);
    let mut best = None;
    for i in 0..score.len() {
        if score[i] <= min + slack {
            match best {
                Some(j) if proxy[j] <= proxy[i] => {}
                _ => best = Some(i),
            }
        }
    }
    best.unwrap_or(0)
}

/// `D(λ)` for complex `λ`.
pub fn characteristic<T: Real>(spec: &ProblemSpec<T>, lambda: Complex<T>) -> Result<Complex<T>> {
    let xs = candidates(spec);
    let tol = Tolerance::default();
    let mode = PropagationMode::Auto;
    let s0 = initial_state(spec);
    let mut left = Vec::with_capacity(xs.len());
    let (mut y, mut yp) = (s0.y, s0.yp);
    left.push((y, yp));
    for w in xs.windows(2) {
        let m = transfer_over(&spec.coeff, lambda, w[0], w[1], mode, tol)?;
        (y, yp) = m.apply(y, yp);
        left.push((y, yp));
    }
    let refl = spec.coeff.reflect();
    let (v0, vp0) = right_start(spec);
    let zero = T::zero();
    let (mut v, mut vp) = (Complex::new(v0, zero), Complex::new(vp0, zero));
    let mut right = vec![(v, vp)];
    for w in xs.windows(2).rev() {
        let m = transfer_over(&refl, lambda, -w[1], -w[0], mode, tol)?;
        (v, vp) = m.apply(v, vp);
        right.push((v, vp));
    }
    right.reverse();
    let ga = cumulative(xs.windows(2).map(|w| growth_exponent(&spec.coeff, lambda, w[0], w[1])));
    let gb_rev = cumulative(xs.windows(2).rev().map(|w| growth_exponent(&spec.coeff, lambda, w[0], w[1])));
    let na: Vec<T> = left.iter().map(|(y, yp)| y.norm() + yp.norm()).collect();
    let nb: Vec<T> = right.iter().map(|(v, vp)| v.norm() + vp.norm()).collect();
    let nb_rev: Vec<T> = nb.iter().rev().copied().collect();
    let mut amp_b = amplification(&gb_rev, &nb_rev);
    amp_b.reverse();
    let proxy: Vec<T> = na.iter().zip(&nb).map(|(&a, &b)| a * b).collect();
    let i = choose_matching(&amplification(&ga, &na), &amp_b, &proxy);
    let ((y, yp), (v, vp)) = (left[i], right[i]);
    // u_b = v(−x), u_b' = −v'(−x)
    Ok(yp * v + y * vp)
}

/// `D(λ)` from the forward-propagated terminal state alone.
pub fn characteristic_direct<T: Real>(spec: &ProblemSpec<T>, lambda: Complex<T>) -> Result<Complex<T>> {
    let (end, _) = propagate(spec, lambda)?;
    Ok(end.y * spec.beta.cos() + end.yp * spec.beta.sin())
}

/// Both one-sided sweeps at every candidate matching point.
struct TwoSided {
    xs: Vec<f64>,
    left: Vec<Sweep<f64>>,
    /// Sweeps of the reflected β-solution ending at `−xs[i]`.
    right: Vec<Sweep<f64>>,
    best: usize,
    d: f64,
}

fn two_sided(spec: &ProblemSpec<f64>, lambda: f64, want_zeros: bool) -> Result<TwoSided> {
    let xs = candidates(spec);
    let mode = PropagationMode::Auto;
    let s0 = initial_state(spec);
    let mut start = Start { y: s0.y.re, yp: s0.yp.re, theta: spec.alpha };
    let mut left = vec![Sweep { x: spec.a, y: start.y, yp: start.yp, theta: start.theta, zeros: vec![], breakpoint_hits: vec![] }];
    for w in xs.windows(2) {
        let s = sweep_real(&spec.coeff, lambda, w[0], w[1], start, want_zeros, mode)?;
        start = Start::resume(&s);
        left.push(s);
    }
    let refl = spec.coeff.reflect();
    let (v0, vp0) = right_start(spec);
    let mut start = Start { y: v0, yp: vp0, theta: spec.beta };
    let mut right = vec![Sweep { x: -spec.b, y: v0, yp: vp0, theta: spec.beta, zeros: vec![], breakpoint_hits: vec![] }];
    for w in xs.windows(2).rev() {
        let s = sweep_real(&refl, lambda, -w[1], -w[0], start, want_zeros, mode)?;
        start = Start::resume(&s);
        right.push(s);
    }
    right.reverse();
    let lam = Complex::new(lambda, 0.0);
    let ga = cumulative(xs.windows(2).map(|w| growth_exponent(&spec.coeff, lam, w[0], w[1])));
    let gb_rev = cumulative(xs.windows(2).rev().map(|w| growth_exponent(&spec.coeff, lam, w[0], w[1])));
    let na: Vec<f64> = left.iter().map(|s| s.y.abs() + s.yp.abs()).collect();
    let nb_rev: Vec<f64> = right.iter().rev().map(|s| s.y.abs() + s.yp.abs()).collect();
    let mut amp_b = amplification(&gb_rev, &nb_rev);
    amp_b.reverse();
    let proxy: Vec<f64> = na.iter().zip(nb_rev.iter().rev()).map(|(a, b)| a * b).collect();
    let best = choose_matching(&amplification(&ga, &na), &amp_b, &proxy);
    let (l, r) = (&left[best], &right[best]);
    let d = l.yp * r.y + l.y * r.yp;
    Ok(TwoSided { xs, left, right, best, d })
}

/// `D(λ)` and the forward zero count at real `λ`.
#[derive(Clone, Debug, PartialEq)]
pub struct RealEvaluation {
    pub lambda: f64,
    pub d: f64,
    pub count: usize,
    pub breakpoint_hits: Vec<f64>,
}

pub fn evaluate_real(spec: &ProblemSpec<f64>, lambda: f64) -> Result<RealEvaluation> {
    let ts = two_sided(spec, lambda, false)?;
    let last = ts.left.last().expect("nonempty");
    let count = last.interior_count(spec.alpha, END_ZERO_ETA);
    let mut hits: Vec<f64> = ts.left.iter().flat_map(|s| s.breakpoint_hits.iter().copied()).collect();
    hits.sort_by(f64::total_cmp);
    hits.dedup();
    Ok(RealEvaluation { lambda, d: ts.d, count, breakpoint_hits: hits })
}

/// Zero count with the breakpoint diagnostics.
#[derive(Clone, Debug, PartialEq)]
pub struct ZeroCount {
    pub count: usize,
    /// Interior breakpoints on which a zero landed (within `1e-13` in angle);
    /// each is counted once.
    pub breakpoint_hits: Vec<f64>,
}

/// Interior zeros of the α-normalised solution `y(·, λ)` on `(a, b)`.
pub fn count_zeros(spec: &ProblemSpec<f64>, lambda: f64) -> Result<usize> {
    Ok(count_zeros_detailed(spec, lambda)?.count)
}

pub fn count_zeros_detailed(spec: &ProblemSpec<f64>, lambda: f64) -> Result<ZeroCount> {
    let e = evaluate_real(spec, lambda)?;
    Ok(ZeroCount { count: e.count, breakpoint_hits: e.breakpoint_hits })
}

/// Eigenfunction data at a (numerically) real eigenvalue, computed from both
/// ends so that decaying tails stay accurate.
#[derive(Clone, Debug, PartialEq)]
pub struct Eigenfunction {
    pub lambda: f64,
    /// Interior zeros, increasing.
    pub zeros: Vec<f64>,
    /// `∫ w y²` of the α-normalised solution.
    pub weighted_norm: f64,
    /// `∫ y²` of the α-normalised solution.
    pub norm: f64,
    pub residual: f64,
}

pub fn eigenfunction(spec: &ProblemSpec<f64>, lambda: f64) -> Result<Eigenfunction> {
    let ts = two_sided(spec, lambda, true)?;
    let c = ts.xs[ts.best];
    let (a, b) = (spec.a, spec.b);
    let delta = 1e-9 * (b - a);
    let mut zeros: Vec<f64> = ts.left[1..=ts.best].iter().flat_map(|s| s.zeros.iter().copied()).collect();
    zeros.extend(ts.right[ts.best..ts.xs.len() - 1].iter().flat_map(|s| s.zeros.iter().map(|t| -t)));
    zeros.retain(|&x| x > a + delta && x < b - delta);
    zeros.sort_by(f64::total_cmp);
    zeros.dedup_by(|p, q| (*p - *q).abs() < delta);

    let s0 = initial_state(spec);
    let left = norm_sweep(&spec.coeff, lambda, a, c, s0.y.re, s0.yp.re)?;
    let (v0, vp0) = right_start(spec);
    let right = norm_sweep(&spec.coeff.reflect(), lambda, -b, -c, v0, vp0)?;
    // on the right u_a = k · u_b with u_b(c) = v, u_b'(c) = −v'
    let (ub, ubp) = (right.y, -right.yp);
    let den = ub * ub + ubp * ubp;
    let k2 = if den > 0.0 {
        let k = (left.y * ub + left.yp * ubp) / den;
        k * k
    } else {
        0.0
    };
    Ok(Eigenfunction {
        lambda,
        zeros,
        weighted_norm: left.weighted + k2 * right.weighted,
        norm: left.plain + k2 * right.plain,
        residual: ts.d.abs(),
    })
}

/// Central-difference derivative of `D` along the real axis.
fn d_prime(spec: &ProblemSpec<f64>, lambda: f64, h_max: f64) -> Result<f64> {
    let h = (1e-6 * lambda.abs().max(1.0)).min(h_max);
    let p = evaluate_real(spec, lambda + h)?.d;
    let m = evaluate_real(spec, lambda - h)?.d;
    Ok((p - m) / (2.0 * h))
}

#[derive(Clone, Copy, Debug)]
struct Node {
    lambda: f64,
    d: f64,
    count: usize,
}

fn node(spec: &ProblemSpec<f64>, lambda: f64) -> Result<Node> {
    let e = evaluate_real(spec, lambda)?;
    Ok(Node { lambda, d: e.d, count: e.count })
}

const MAX_DEPTH: usize = 64;

fn bisect_root(spec: &ProblemSpec<f64>, mut l: Node, mut r: Node) -> Result<f64> {
    for _ in 0..200 {
        let mid = 0.5 * (l.lambda + r.lambda);
        if mid <= l.lambda || mid >= r.lambda {
            break;
        }
        let dm = evaluate_real(spec, mid)?.d;
        if dm == 0.0 {
            return Ok(mid);
        }
        if (dm > 0.0) == (l.d > 0.0) {
            l = Node { lambda: mid, d: dm, count: l.count };
        } else {
            r = Node { lambda: mid, d: dm, count: r.count };
        }
    }
    Ok(if l.d.abs() <= r.d.abs() { l.lambda } else { r.lambda })
}

/// Extremum of `D` in `[l, r]` where `s·D'` goes from negative to positive.
fn probe_extremum(spec: &ProblemSpec<f64>, l: Node, r: Node, tol: f64) -> Result<Vec<f64>> {
    let s = l.d.signum();
    let h = 0.125 * (r.lambda - l.lambda);
    let gl = s * d_prime(spec, l.lambda, h)?;
    let gr = s * d_prime(spec, r.lambda, h)?;
    if !(gl < 0.0 && gr > 0.0) {
        return Ok(vec![]);
    }
    let (mut lo, mut hi) = (l.lambda, r.lambda);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if s * d_prime(spec, mid, h)? < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-3 * tol * mid.abs().max(1.0) {
            break;
        }
    }
    let m = node(spec, 0.5 * (lo + hi))?;
    if m.d == 0.0 {
        return Ok(vec![m.lambda]);
    }
    if (m.d > 0.0) != (s > 0.0) {
        return Ok(vec![bisect_root(spec, l, m)?, bisect_root(spec, m, r)?]);
    }
    if m.d.abs() < tol {
        return Ok(vec![m.lambda]);
    }
    Ok(vec![])
}

fn process_cell(spec: &ProblemSpec<f64>, l: Node, r: Node, tol: f64, depth: usize) -> Result<Vec<f64>> {
    let mut roots = Vec::new();
    if l.d == 0.0 {
        roots.push(l.lambda);
        return Ok(roots);
    }
    if r.d == 0.0 {
        // picked up as the left end of the next cell
        return Ok(roots);
    }
    let sign_change = (l.d > 0.0) != (r.d > 0.0);
    let dc = l.count.abs_diff(r.count);
    // clusters tighter than the tolerance are still separated when the counts
    // say there is more than one root inside
    let width_floor = 64.0 * f64::EPSILON * l.lambda.abs().max(r.lambda.abs()).max(1.0);
    let can_split = depth < MAX_DEPTH && r.lambda - l.lambda > width_floor;
    let suspicious = if sign_change { dc > 1 } else { dc >= 1 };
    if suspicious && can_split {
        let mid = node(spec, 0.5 * (l.lambda + r.lambda))?;
        roots.extend(process_cell(spec, l, mid, tol, depth + 1)?);
        roots.extend(process_cell(spec, mid, r, tol, depth + 1)?);
        return Ok(roots);
    }
    if sign_change {
        roots.push(bisect_root(spec, l, r)?);
    } else {
        roots.extend(probe_extremum(spec, l, r, tol)?);
    }
    Ok(roots)
}

/// Knobs for [`find_real_eigenvalues_with`].
#[derive(Clone, Copy, Debug)]
pub struct ScanOptions {
    /// Multiplies the number of initial grid cells.
    pub grid_refinement: usize,
}

impl Default for ScanOptions {
    fn default() -> Self {
        ScanOptions { grid_refinement: 1 }
    }
}

/// Initial grid spacing: the Prüfer angle on the dominant piece advances by
/// less than `π` per cell.
pub fn grid_spacing(spec: &ProblemSpec<f64>) -> f64 {
    let l = spec.length();
    let w = spec.coeff.max_abs_weight();
    std::f64::consts::PI.powi(2) / (l * l * w)
}

pub fn find_real_eigenvalues(spec: &ProblemSpec<f64>, window: (f64, f64), tol: f64) -> Result<ScanResult> {
    find_real_eigenvalues_with(spec, window, tol, ScanOptions::default())
}

pub fn find_real_eigenvalues_with(
    spec: &ProblemSpec<f64>,
    window: (f64, f64),
    tol: f64,
    opts: ScanOptions,
) -> Result<ScanResult> {
    let (lo, hi) = window;
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(invalid(format!("empty window [{lo}, {hi}]")));
    }
    if !(tol > 0.0) {
        return Err(invalid("tolerance must be positive"));
    }
    spec.validate()?;
    let cells = (((hi - lo) / grid_spacing(spec)).ceil() as usize).max(64) * opts.grid_refinement.max(1);
    let step = (hi - lo) / cells as f64;
    let grid: Vec<f64> = (0..=cells)
        .map(|i| if i == cells { hi } else { lo + i as f64 * step })
        .collect();
    let nodes: Vec<Node> = grid.par_iter().map(|&l| node(spec, l)).collect::<Result<_>>()?;
    let found: Vec<Vec<f64>> = nodes
        .par_windows(2)
        .map(|w| process_cell(spec, w[0], w[1], tol, 0))
        .collect::<Result<_>>()?;
    let mut roots: Vec<f64> = found.into_iter().flatten().collect();
    if nodes[cells].d == 0.0 {
        roots.push(hi);
    }
    roots.sort_by(f64::total_cmp);
    roots.dedup();

    let mut warnings = Vec::new();
    for &r in &roots {
        let w = tol * r.abs().max(1.0);
        if (r - lo).abs() <= w || (r - hi).abs() <= w {
            warnings.push(format!("eigenvalue {r} within tolerance of the window boundary"));
        }
    }
    for end in [nodes[0], nodes[cells]] {
        let slope = d_prime(spec, end.lambda, f64::INFINITY)?;
        let w = tol * end.lambda.abs().max(1.0);
        if end.d.abs() <= w * slope.abs() && !roots.iter().any(|r| (r - end.lambda).abs() <= w) {
            warnings.push(format!("window end {} is within tolerance of an eigenvalue", end.lambda));
        }
    }
    let mut records: Vec<EigenRecord> = roots
        .par_iter()
        .map(|&r| {
            let ef = eigenfunction(spec, r)?;
            Ok(EigenRecord {
                re: r,
                im: 0.0,
                zeros_in_ab: Some(ef.zeros.len()),
                weighted_norm: Some(ef.weighted_norm),
                residual: ef.residual,
            })
        })
        .collect::<Result<_>>()?;
    // the same root reached from two cells
    records.dedup_by(|p, q| p.zeros_in_ab == q.zeros_in_ab && (p.re - q.re).abs() <= tol * p.re.abs().max(1.0));
    for rec in &records {
        if rec.residual > tol {
            warnings.push(format!("eigenvalue {} has residual {:e} above tolerance", rec.re, rec.residual));
        }
    }
    let (n_r, n_h) = empirical_indices(&records);
    Ok(ScanResult { window, records, n_r_empirical: n_r, n_h_empirical: n_h, warnings })
}

/// Empirical Richardson and Haupt indices from the oscillation counts.
pub fn empirical_indices(records: &[EigenRecord]) -> (Option<usize>, Option<usize>) {
    let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
    for r in records {
        if let Some(z) = r.zeros_in_ab {
            *counts.entry(z).or_default() += 1;
        }
    }
    let Some((&n_min, _)) = counts.iter().next() else {
        return (None, None);
    };
    let Some(top) = counts.iter().filter(|(_, &c)| c >= 2).map(|(&k, _)| k).max() else {
        return (None, None);
    };
    if (n_min..=top).any(|m| counts.get(&m).copied().unwrap_or(0) < 2) {
        return (None, None);
    }
    let mut n_h = None;
    for n in (n_min..=top).rev() {
        if counts[&n] == 2 {
            n_h = Some(n);
        } else {
            break;
        }
    }
    (Some(n_min), n_h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coefficients::{build_canonical, CanonicalProblem, PiecewiseCoefficient};
    use std::f64::consts::PI;

    fn unit() -> ProblemSpec<f64> {
        ProblemSpec::dirichlet(PiecewiseCoefficient::uniform(0.0, 1.0, 1.0, 0.0).unwrap()).unwrap()
    }

    fn one_tp(q0: f64) -> ProblemSpec<f64> {
        build_canonical(&CanonicalProblem::OneTurningPoint { q0 }).unwrap()
    }

    #[test]
    fn classical_characteristic() {
        let spec = unit();
        let d = |l: f64| characteristic(&spec, Complex::new(l, 0.0)).unwrap();
        assert!(d(PI * PI).norm() < 1e-15);
        assert!(d(4.0 * PI * PI).norm() < 1e-15);
        let expected = (2f64.sqrt() * PI).sin() / (2f64.sqrt() * PI);
        assert!((d(2.0 * PI * PI).re - expected).abs() < 1e-15);
        assert!((expected + 0.21695).abs() < 1e-5);
    }

    #[test]
    fn matched_and_direct_agree() {
        let spec = build_canonical(&CanonicalProblem::TwoTurningPoint { a: -1.0, b: 2.0, c: -1.5, q0: 1.0 }).unwrap();
        for lam in [Complex::<f64>::new(3.0, 0.0), Complex::new(-4.0, 2.0), Complex::new(10.0, -1.0)] {
            let m = characteristic(&spec, lam).unwrap();
            let d = characteristic_direct(&spec, lam).unwrap();
            assert!((m - d).norm() < 1e-10 * d.norm().max(1.0), "{lam}: {m} vs {d}");
        }
    }

    #[test]
    fn real_lambda_gives_real_d() {
        let d = characteristic(&one_tp(-10.0), Complex::new(17.3, 0.0)).unwrap();
        assert_eq!(d.im, 0.0);
    }

    #[test]
    fn zero_counts_of_sines() {
        assert_eq!(count_zeros(&unit(), 9.0 * PI * PI).unwrap(), 2);
        assert_eq!(count_zeros(&unit(), PI * PI).unwrap(), 0);
        assert_eq!(count_zeros(&unit(), 2.5 * PI * PI).unwrap(), 1);
        assert_eq!(count_zeros(&unit(), 4.5 * PI * PI).unwrap(), 2);
    }

    #[test]
    fn dense_sampling_oracle_count() {
        let spec = one_tp(-10.0);
        let lam = 50.0;
        // brute force: closed-form solution sampled on 1e4 points
        let n = 10_000;
        let (k_left, k_right) = (-lam + 10.0, lam + 10.0);
        let y_left = |x: f64| crate::propagator::cos_sinc_real(k_left, x + 1.0).1;
        let (c, s) = crate::propagator::cos_sinc_real(k_left, 1.0);
        let (y0, p0) = (s, c);
        let y = |x: f64| {
            if x < 0.0 {
                y_left(x)
            } else {
                let (c, s) = crate::propagator::cos_sinc_real(k_right, x);
                y0 * c + p0 * s
            }
        };
        let mut changes = 0;
        let mut prev = y(-1.0 + 2.0 / n as f64);
        for i in 2..n {
            let cur = y(-1.0 + 2.0 * i as f64 / n as f64);
            if (cur > 0.0) != (prev > 0.0) {
                changes += 1;
            }
            prev = cur;
        }
        assert_eq!(count_zeros(&spec, lam).unwrap(), changes);
    }

    #[test]
    fn classical_window_scan() {
        let scan = find_real_eigenvalues(&unit(), (1.0, 100.0), 1e-9).unwrap();
        let ev = scan.eigenvalues();
        assert_eq!(ev.len(), 3);
        for (i, l) in ev.iter().enumerate() {
            let exact = ((i + 1) as f64 * PI).powi(2);
            assert!(((l - exact) / exact).abs() < 1e-9);
            assert_eq!(scan.records[i].zeros_in_ab, Some(i));
        }
        assert_eq!(scan.n_r_empirical, None);
    }

    #[test]
    fn one_turning_point_spectrum_is_symmetric() {
        let scan = find_real_eigenvalues(&one_tp(-10.0), (-60.0, 60.0), 1e-9).unwrap();
        let ev = scan.eigenvalues();
        assert!(!ev.is_empty());
        for l in &ev {
            assert!(ev.iter().any(|m| (m + l).abs() < 1e-7), "{l} has no mirror in {ev:?}");
        }
    }

    #[test]
    fn two_turning_point_self_consistency() {
        let spec = build_canonical(&CanonicalProblem::TwoTurningPoint { a: -1.0, b: 1.0, c: -1.0, q0: 0.0 }).unwrap();
        let tol = 1e-9;
        let scan = find_real_eigenvalues(&spec, (-100.0, 100.0), tol).unwrap();
        assert!(!scan.records.is_empty());
        for r in &scan.records {
            assert!(r.residual < tol, "{r:?}");
            let (end, _) = propagate(&spec, Complex::new(r.re, 0.0)).unwrap();
            assert!(end.y.norm() < 10.0 * tol, "λ = {}: y(b) = {}", r.re, end.y);
        }
    }

    #[test]
    fn rejects_bad_window() {
        assert!(find_real_eigenvalues(&unit(), (5.0, 5.0), 1e-9).is_err());
        assert!(find_real_eigenvalues(&unit(), (0.0, 5.0), 0.0).is_err());
    }

    #[test]
    fn boundary_eigenvalue_warns() {
        let scan = find_real_eigenvalues(&unit(), (1.0, PI * PI), 1e-9).unwrap();
        assert!(!scan.warnings.is_empty());
    }

    #[test]
    fn index_extraction() {
        let rec = |z| EigenRecord { re: 0.0, im: 0.0, zeros_in_ab: Some(z), weighted_norm: None, residual: 0.0 };
        let recs: Vec<_> = [2, 2, 2, 3, 3, 4, 4, 5].into_iter().map(rec).collect();
        assert_eq!(empirical_indices(&recs), (Some(2), Some(3)));
        let gap: Vec<_> = [1, 1, 2, 3, 3].into_iter().map(rec).collect();
        assert_eq!(empirical_indices(&gap), (None, None));
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(24))]

        #[test]
        fn refining_the_grid_keeps_the_eigenvalues(
            a in -3.0f64..-0.5, b in 0.5f64..3.0, c in -3.0f64..-0.5, q0 in -20.0f64..5.0,
        ) {
            let spec = build_canonical(&CanonicalProblem::TwoTurningPoint { a, b, c, q0 }).unwrap();
            let coarse = find_real_eigenvalues(&spec, (-100.0, 100.0), 1e-9).unwrap();
            let fine = find_real_eigenvalues_with(&spec, (-100.0, 100.0), 1e-9, ScanOptions { grid_refinement: 2 }).unwrap();
            proptest::prop_assert_eq!(coarse.records.len(), fine.records.len());
            for (x, y) in coarse.records.iter().zip(&fine.records) {
                proptest::prop_assert!((x.re - y.re).abs() <= 1e-9 * x.re.abs().max(1.0));
                proptest::prop_assert_eq!(x.zeros_in_ab, y.zeros_in_ab);
            }
        }
    }
}
