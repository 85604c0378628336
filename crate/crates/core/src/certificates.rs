//! Mechanical checks of the comparison lemmas and of the hypotheses behind
//! the a-priori bounds on the Richardson numbers.
//!
//! Every certificate carries its hypothesis trail: one entry per condition,
//! the number that decided it, and whether it passed. A certificate is valid
//! exactly when every entry passed.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::coefficients::{PiecewiseCoefficient, ProblemSpec, QProfile};
use crate::error::{invalid, Result, SlError};
use crate::oscillation::{sweep_real, Start};
use crate::propagator::{initial_state, PropagationMode};
use crate::spectrum::{eigenfunction, evaluate_real};

pub use crate::classify::{classify_definiteness, Classification, Definiteness, Witness};

/// Which half of `[−1, 1]` a lemma speaks about.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Right,
    Left,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LemmaCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
    /// Whether the strict inequality was tested.
    pub strict: bool,
}

/// Power series of `(1 − sin 2k / 2k) / (2k²)` and `½ (sin k / k)²` in `μ = k²`.
fn small_mu(mu: f64) -> (f64, f64) {
    let lhs = 1.0 / 3.0 - mu / 15.0 + 2.0 * mu * mu / 315.0 - mu.powi(3) / 2835.0;
    let rhs = 0.5 - mu / 6.0 + mu * mu / 45.0 - mu.powi(3) / 630.0;
    (lhs, rhs)
}

/// `∫₀¹ y² < ½ y(1)²` for the increasing solution of `y'' = −μ y` with
/// `y(0) = 0` (right), or `∫₋₁⁰ y² < ½ y(0)²` with `y(−1) = 0` (left).
///
/// The witness is normalised to `y'(start) = 1`; both sides scale alike.
pub fn verify_lemma_upper(mu: f64, side: Side) -> Result<LemmaCheck> {
    if !mu.is_finite() {
        return Err(invalid("μ must be finite"));
    }
    if mu >= PI * PI / 4.0 {
        return Err(SlError::HypothesisViolation(format!("μ = {mu} is not below π²/4")));
    }
    // both halves reduce to y(s) = sin(ks)/k on s ∈ [0, 1]
    let _ = side;
    let (lhs, rhs) = if mu.abs() < 1e-4 {
        small_mu(mu)
    } else if mu > 0.0 {
        let k = mu.sqrt();
        let s = k.sin() / k;
        ((1.0 - (2.0 * k).sin() / (2.0 * k)) / (2.0 * mu), 0.5 * s * s)
    } else {
        let k = (-mu).sqrt();
        let s = k.sinh() / k;
        (((2.0 * k).sinh() / (2.0 * k) - 1.0) / (2.0 * k * k), 0.5 * s * s)
    };
    Ok(LemmaCheck { lhs, rhs, holds: lhs < rhs, strict: true })
}

/// `∫₀¹ y² > ½ y(0)²` for `y = sin(k(x − 1))` (right), or `∫₋₁⁰ y² > ½ y(0)²`
/// for `y = sin(k(x + 1))` (left), `k = √μ`.
///
/// The sign condition on `y(0) y'(0)` reduces to `sin 2k < 0`; when
/// `sin 2k` vanishes the non-strict variant is checked.
pub fn verify_lemma_lower(mu: f64, side: Side) -> Result<LemmaCheck> {
    if !(mu > 0.0) || !mu.is_finite() {
        return Err(SlError::HypothesisViolation(format!("μ = {mu} is not positive")));
    }
    let _ = side;
    let k = mu.sqrt();
    let s2 = (2.0 * k).sin();
    let zero_band = 1e-12;
    if s2 > zero_band {
        return Err(SlError::HypothesisViolation(format!(
            "sin 2k = {s2} > 0 at k = {k}: the sign condition on y(0) y'(0) fails"
        )));
    }
    let lhs = 0.5 * (1.0 - s2 / (2.0 * k));
    let rhs = 0.5 * k.sin().powi(2);
    let strict = s2 < -zero_band;
    let holds = if strict { lhs > rhs } else { lhs >= rhs };
    Ok(LemmaCheck { lhs, rhs, holds, strict })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundKind {
    OneTp,
    Prop3,
    Prop4,
    Prop5,
    Application,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    UpperOnLambdaPlus,
    LowerOnLambdaMinus,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrailEntry {
    pub condition: String,
    pub value: f64,
    pub passed: bool,
}

impl TrailEntry {
    fn new(condition: impl Into<String>, value: f64, passed: bool) -> Self {
        TrailEntry { condition: condition.into(), value, passed }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundCertificate {
    pub kind: BoundKind,
    pub bound: f64,
    pub direction: Direction,
    pub hypothesis_trail: Vec<TrailEntry>,
    pub valid: bool,
}

impl BoundCertificate {
    fn from_trail(kind: BoundKind, bound: f64, direction: Direction, trail: Vec<TrailEntry>) -> Self {
        let valid = trail.iter().all(|t| t.passed) && bound.is_finite();
        BoundCertificate { kind, bound, direction, hypothesis_trail: trail, valid }
    }

    /// The failed trail entries.
    pub fn failures(&self) -> impl Iterator<Item = &TrailEntry> {
        self.hypothesis_trail.iter().filter(|t| !t.passed)
    }
}

/// `λ⁺ ≤ |q0| − π²/4` and `λ⁻ ≥ −|q0| + π²/4` for `−y'' + q0 y = λ sgn(x) y`
/// on `[−1, 1]` with Dirichlet conditions.
pub fn bound_one_turning_point(q0: f64) -> Result<(BoundCertificate, BoundCertificate)> {
    let threshold = -PI * PI / 4.0;
    if !(q0 < threshold) {
        return Err(SlError::HypothesisViolation(format!("q0 = {q0} is not below −π²/4 = {threshold}")));
    }
    let trail = vec![TrailEntry::new("q0 < −π²/4", q0, true)];
    let b = q0.abs() - PI * PI / 4.0;
    Ok((
        BoundCertificate::from_trail(BoundKind::OneTp, b, Direction::UpperOnLambdaPlus, trail.clone()),
        BoundCertificate::from_trail(BoundKind::OneTp, -b, Direction::LowerOnLambdaMinus, trail),
    ))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WitnessMethod {
    PrincipalSolution,
    Comparison,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DisconjugacyWitness {
    pub interval: (f64, f64),
    pub mu: f64,
    /// Smallest value of the witness solution over a grid refined at every
    /// breakpoint of `[c, d]`.
    pub min_u: f64,
    pub method: WitnessMethod,
}

const GRID_PER_SEGMENT: usize = 16;

/// A positive solution of `u'' + (μ w + q) u = 0` on `[c, d]`, if one is
/// found. `None` means the test is inconclusive for this `μ`.
///
/// The principal solution starts at `c − δ` with `u = 0, u' = 1`; it is
/// positive on `[c, d]` exactly when the equation is disconjugate on
/// `[c − δ, d]`.
pub fn disconjugate_on(
    coeff: &PiecewiseCoefficient<f64>,
    mu: f64,
    c: f64,
    d: f64,
) -> Result<Option<DisconjugacyWitness>> {
    if !(c < d) || c < coeff.start() || d > coeff.end() {
        return Err(invalid(format!("[{c}, {d}] is not a subinterval of [{}, {}]", coeff.start(), coeff.end())));
    }
    if !mu.is_finite() {
        return Err(invalid("μ must be finite"));
    }
    let delta = 1e-6 * (d - c);
    let mut grid = vec![c - delta];
    for seg in coeff.segments(c, d) {
        for i in 1..=GRID_PER_SEGMENT {
            grid.push(seg.x0 + (seg.x1 - seg.x0) * i as f64 / GRID_PER_SEGMENT as f64);
        }
    }
    grid.insert(1, c);
    let mut start = Start::new(0.0, 1.0);
    let mut min_u = f64::INFINITY;
    let mut zeros = 0;
    for w in grid.windows(2) {
        if w[1] <= w[0] {
            continue;
        }
        let s = sweep_real(coeff, mu, w[0], w[1], start, true, PropagationMode::Auto)?;
        zeros += s.zeros.len();
        min_u = min_u.min(s.y);
        start = Start::resume(&s);
    }
    let comparison = coeff.potential_range(mu, c, d).is_some_and(|(_, hi)| hi <= 0.0);
    if comparison {
        return Ok(Some(DisconjugacyWitness { interval: (c, d), mu, min_u, method: WitnessMethod::Comparison }));
    }
    if zeros == 0 && min_u > 0.0 {
        return Ok(Some(DisconjugacyWitness { interval: (c, d), mu, min_u, method: WitnessMethod::PrincipalSolution }));
    }
    Ok(None)
}

fn require_dirichlet(spec: &ProblemSpec<f64>) -> Result<()> {
    if !spec.is_dirichlet() {
        return Err(invalid("these bounds are stated for Dirichlet conditions"));
    }
    Ok(())
}

fn require_eigenvalue(spec: &ProblemSpec<f64>, lambda: f64, tol: f64) -> Result<()> {
    let d = evaluate_real(spec, lambda)?.d;
    if d.abs() < tol {
        return Ok(());
    }
    let h = tol * lambda.abs().max(1.0);
    let (l, r) = (evaluate_real(spec, lambda - h)?.d, evaluate_real(spec, lambda + h)?.d);
    if (l > 0.0) != (r > 0.0) {
        return Ok(());
    }
    Err(invalid(format!("λ = {lambda} is not an eigenvalue: |D| = {:e}", d.abs())))
}

/// The gaps between consecutive zeros of the eigenfunction at `λ`,
/// including the end points.
pub fn zero_gaps(spec: &ProblemSpec<f64>, lambda: f64) -> Result<Vec<(f64, f64)>> {
    let ef = eigenfunction(spec, lambda)?;
    let mut pts = vec![spec.a];
    pts.extend(ef.zeros);
    pts.push(spec.b);
    Ok(pts.windows(2).map(|w| (w[0], w[1])).collect())
}

/// `λ⁺ < λ` from a positive solution at `μ_j < λ` on every gap between
/// consecutive zeros of the eigenfunction. With `dual` the `μ_j` exceed
/// `λ` and the conclusion is `λ⁻ > λ`.
pub fn certify_prop3(
    spec: &ProblemSpec<f64>,
    lambda: f64,
    mus: &[f64],
    dual: bool,
    tol: f64,
) -> Result<BoundCertificate> {
    require_dirichlet(spec)?;
    require_eigenvalue(spec, lambda, tol)?;
    let gaps = zero_gaps(spec, lambda)?;
    if mus.len() != gaps.len() {
        return Err(invalid(format!("{} zero gaps need {} values of μ, got {}", gaps.len(), gaps.len(), mus.len())));
    }
    for (j, &mu) in mus.iter().enumerate() {
        let ordered = if dual { mu > lambda } else { mu < lambda };
        if !ordered {
            let rel = if dual { ">" } else { "<" };
            return Err(SlError::HypothesisViolation(format!("μ_{j} = {mu} must be {rel} λ = {lambda}")));
        }
    }
    let mut trail = vec![TrailEntry::new(format!("λ = {lambda} is an eigenvalue"), evaluate_real(spec, lambda)?.d.abs(), true)];
    for (j, (&(x0, x1), &mu)) in gaps.iter().zip(mus).enumerate() {
        let w = disconjugate_on(&spec.coeff, mu, x0, x1)?;
        trail.push(TrailEntry::new(
            format!("gap {j} [{x0}, {x1}]: positive solution at μ_{j} = {mu}"),
            w.map_or(0.0, |w| w.min_u),
            w.is_some(),
        ));
    }
    let direction = if dual { Direction::LowerOnLambdaMinus } else { Direction::UpperOnLambdaPlus };
    Ok(BoundCertificate::from_trail(BoundKind::Prop3, lambda, direction, trail))
}

/// For each zero gap at `λ`, the `μ` closest to `λ` (on the admissible
/// side, over a geometric ladder of offsets) admitting a positive solution.
pub fn suggest_prop3_mus(spec: &ProblemSpec<f64>, lambda: f64, dual: bool) -> Result<Vec<Option<f64>>> {
    let scale = lambda.abs().max(1.0);
    let sign = if dual { 1.0 } else { -1.0 };
    let mut out = Vec::new();
    for (x0, x1) in zero_gaps(spec, lambda)? {
        let mut found = None;
        for i in 0..60 {
            let offset = 1e-6 * scale * 1.5f64.powi(i);
            let mu = lambda + sign * offset;
            if disconjugate_on(&spec.coeff, mu, x0, x1)?.is_some() {
                found = Some(mu);
                break;
            }
        }
        out.push(found);
    }
    Ok(out)
}

fn check_layout(spec: &ProblemSpec<f64>, c: f64, d: f64, e: f64) -> Result<()> {
    let (a, b) = (spec.a, spec.b);
    if !(a < c && c < d && d < e && e < b) && !(a == c && c < d && d < e && e < b) {
        return Err(invalid(format!("need a ≤ c < d < e < b, got a = {a}, c = {c}, d = {d}, e = {e}, b = {b}")));
    }
    let sign_on = |x0: f64, x1: f64, want: f64| {
        spec.coeff.pieces().iter().filter(|p| p.x0 < x1 && p.x1 > x0).all(|p| p.w * want > 0.0)
    };
    if !sign_on(c, d, 1.0) {
        return Err(invalid(format!("w must be positive on ({c}, {d})")));
    }
    if c > a && !sign_on(a, c, -1.0) {
        return Err(invalid(format!("w must be negative on ({a}, {c})")));
    }
    if !sign_on(e, b, -1.0) {
        return Err(invalid(format!("w must be negative on ({e}, {b})")));
    }
    Ok(())
}

/// A `μ` making `μ w + q ≤ −1` on `(e, b)`, where `w < 0`.
fn convex_mu(coeff: &PiecewiseCoefficient<f64>, e: f64, b: f64) -> f64 {
    let mut need: f64 = 0.0;
    for seg in coeff.segments(e, b) {
        let qmax = seg.q0.max(seg.q1);
        need = need.max((qmax + 1.0) / seg.w.abs());
    }
    need
}

/// `λ⁺ < λ*` from a positive solution on `[a, e]` at `μ` together with a
/// zero of `y(·, λ*)` in `(c, d)`.
pub fn certify_prop4(
    spec: &ProblemSpec<f64>,
    mu: f64,
    lambda_star: f64,
    c: f64,
    d: f64,
    e: f64,
) -> Result<BoundCertificate> {
    if spec.alpha != 0.0 {
        return Err(invalid("the solution must vanish at a"));
    }
    check_layout(spec, c, d, e)?;
    if !(lambda_star > mu) {
        return Err(SlError::HypothesisViolation(format!("λ* = {lambda_star} must exceed μ = {mu}")));
    }
    let mut trail = Vec::new();
    let w = disconjugate_on(&spec.coeff, mu, spec.a, e)?;
    trail.push(TrailEntry::new(
        format!("disconjugacy: positive solution on [{}, {e}] at μ = {mu}", spec.a),
        w.map_or(0.0, |w| w.min_u),
        w.is_some(),
    ));
    let s0 = initial_state(spec);
    let start = Start { y: s0.y.re, yp: s0.yp.re, theta: spec.alpha };
    let sweep = sweep_real(&spec.coeff, lambda_star, spec.a, d, start, true, PropagationMode::Auto)?;
    let inside = sweep.zeros.iter().filter(|&&x| x > c && x < d).count();
    trail.push(TrailEntry::new(format!("zero: y(·, {lambda_star}) has a zero in ({c}, {d})"), inside as f64, inside >= 1));
    let mu_e = convex_mu(&spec.coeff, e, spec.b);
    let tail = disconjugate_on(&spec.coeff, mu_e, e, spec.b)?;
    trail.push(TrailEntry::new(
        format!("disconjugate on [{e}, {}] at μ = {mu_e}", spec.b),
        tail.map_or(0.0, |w| w.min_u),
        tail.is_some(),
    ));
    Ok(BoundCertificate::from_trail(BoundKind::Prop4, lambda_star, Direction::UpperOnLambdaPlus, trail))
}

fn range(coeff: &PiecewiseCoefficient<f64>, mu: f64, x0: f64, x1: f64) -> (f64, f64) {
    coeff.potential_range(mu, x0, x1).unwrap_or((f64::NAN, f64::NAN))
}

/// `λ⁺ < λ*` from the sign and size conditions on `μ w + q` and `λ* w + q`.
pub fn certify_prop5(
    spec: &ProblemSpec<f64>,
    mu: f64,
    lambda_star: f64,
    c: f64,
    d: f64,
    e: f64,
) -> Result<BoundCertificate> {
    check_layout(spec, c, d, e)?;
    if !(lambda_star > mu) {
        return Err(SlError::HypothesisViolation(format!("λ* = {lambda_star} must exceed μ = {mu}")));
    }
    let coeff = &spec.coeff;
    let a = spec.a;
    let mut trail = Vec::new();
    if c > a {
        let (_, hi) = range(coeff, mu, a, c);
        trail.push(TrailEntry::new(format!("sign: μw + q ≤ 0 on ({a}, {c})"), hi, hi <= 0.0));
    }
    let (lo_cd, hi_cd) = range(coeff, mu, c, d);
    trail.push(TrailEntry::new(format!("sign: μw + q ≥ 0 on ({c}, {d})"), lo_cd, lo_cd >= 0.0));
    let (_, hi_de) = range(coeff, mu, d, e);
    trail.push(TrailEntry::new(format!("sign: μw + q ≤ 0 on ({d}, {e})"), hi_de, hi_de <= 0.0));
    let sup = (d - c) * hi_cd.max(0.0).sqrt();
    trail.push(TrailEntry::new("size: (d − c) sup √(μw + q) ≤ π/2", sup, sup <= FRAC_PI_2 * (1.0 + 1e-12)));
    let (lo_star, _) = range(coeff, lambda_star, c, d);
    let inf = (d - c) * lo_star.max(0.0).sqrt();
    trail.push(TrailEntry::new("size: (d − c) inf √(λ*w + q) > π", inf, lo_star > 0.0 && inf > PI * (1.0 + 1e-12)));
    Ok(BoundCertificate::from_trail(BoundKind::Prop5, lambda_star, Direction::UpperOnLambdaPlus, trail))
}

/// Bounds of `q` over `(x0, x1)` for a profile on `[−1, 2]`.
fn q_range(q: &QProfile<f64>, x0: f64, x1: f64) -> (f64, f64) {
    q.range_on(x0, x1)
}

/// `λ⁺ < 21M/2` for weight `(−1, 2, −1)` on `[−1, 2]` with Dirichlet
/// conditions, from bounds on `q` near the turning points.
pub fn certify_application(m: f64, q: &QProfile<f64>) -> Result<BoundCertificate> {
    let threshold = PI * PI / 20.0;
    if !(m > threshold) || !m.is_finite() {
        return Err(SlError::HypothesisViolation(format!("M = {m} is not above π²/20 = {threshold}")));
    }
    if let QProfile::Table(nodes) = q {
        let (first, last) = (nodes[0].0, nodes[nodes.len() - 1].0);
        if first > -1.0 || last < 2.0 {
            return Err(invalid(format!("q table covers [{first}, {last}], not [−1, 2]")));
        }
    }
    let d = PI / (2.0 * (5.0 * m).sqrt());
    let e = 1.0 + d;
    let mut trail = Vec::new();
    let (_, hi1) = q_range(q, -1.0, 0.0);
    trail.push(TrailEntry::new(format!("bound: q ≤ M on (−1, 0), M = {m}"), hi1, hi1 <= m));
    let (lo2, hi2) = q_range(q, 0.0, d);
    let abs2 = lo2.abs().max(hi2.abs());
    trail.push(TrailEntry::new(format!("bound: |q| ≤ M on (0, {d})"), abs2, abs2 <= m));
    let (_, hi3) = q_range(q, 1.0, e);
    trail.push(TrailEntry::new(format!("bound: q ≤ M on (1, {e})"), hi3, hi3 <= m));

    let mu = 2.0 * m;
    let sup = d * (2.0 * mu + hi2).max(0.0).sqrt();
    trail.push(TrailEntry::new("size at μ = 2M: (d − c) sup √(2μ + q) ≤ π/2", sup, sup <= FRAC_PI_2 * (1.0 + 1e-12)));
    let eps = 1e-9 * m;
    let lambda_star = 10.5 * m + eps;
    let low = 2.0 * lambda_star + lo2;
    let inf = d * low.max(0.0).sqrt();
    trail.push(TrailEntry::new(format!("size at λ* = 21M/2 + {eps:e}: (d − c) inf √(2λ* + q) > π"), inf, low > 0.0 && inf > PI * (1.0 + 1e-12)));
    Ok(BoundCertificate::from_trail(BoundKind::Application, 10.5 * m, Direction::UpperOnLambdaPlus, trail))
}
