//! Right-definite, left-definite or neither.
//!
//! `(Ry, y) = ∫ w y²` and `(Ly, y) = ∫ y'² − q y²` (plus the boundary terms of
//! the separated conditions). `R` is definite iff `w` keeps one sign; `L` is
//! positive definite iff the lowest eigenvalue `Λ₀` of `−y'' − q y = Λ y`
//! under the same boundary conditions is positive.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::coefficients::ProblemSpec;
use crate::error::Result;
use crate::oscillation::{sweep_real, Start};
use crate::propagator::{initial_state, PropagationMode};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Definiteness {
    Orthogonal,
    Polar,
    Nondefinite,
}

/// A trial function and the value of the form on it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub description: String,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    /// Orthogonal takes precedence over polar.
    pub kind: Definiteness,
    pub orthogonal: bool,
    pub polar: bool,
    /// `+1` or `−1` when `w` keeps one sign.
    pub weight_sign: Option<i8>,
    /// Lowest eigenvalue of `−y'' − q y = Λ y`.
    pub lambda0: f64,
    /// Bumps with `(Ry, y)` of opposite signs, when `w` changes sign.
    pub r_witnesses: Vec<Witness>,
    /// Trial functions with `(Ly, y)` of opposite signs, when `L` is indefinite.
    pub l_witnesses: Vec<Witness>,
}

/// Terminal Prüfer angle of `y'' + (Λ + q) y = 0` from the α condition.
fn end_angle(spec: &ProblemSpec<f64>, unit: &ProblemSpec<f64>, big_lambda: f64) -> Result<f64> {
    let s0 = initial_state(spec);
    let start = Start { y: s0.y.re, yp: s0.yp.re, theta: spec.alpha };
    Ok(sweep_real(&unit.coeff, big_lambda, spec.a, spec.b, start, false, PropagationMode::Auto)?.theta)
}

/// `Λ₀` by bisection on the terminal Prüfer angle: the lowest eigenvalue is
/// where `θ(b)` first reaches `π − β`.
pub fn lowest_eigenvalue(spec: &ProblemSpec<f64>) -> Result<f64> {
    let unit = spec.with_coeff(spec.coeff.map_weight(|_| 1.0)?)?;
    let target = PI - spec.beta;
    let (qlo, qhi) = spec.coeff.potential_range(0.0, spec.a, spec.b).unwrap_or((0.0, 0.0));
    let l = spec.length();
    let mut lo = -qhi - 1.0 - 4.0 / (l * l);
    let mut step = 1.0;
    while end_angle(spec, &unit, lo)? >= target {
        lo -= step;
        step *= 2.0;
    }
    let mut hi = -qlo + (PI / l).powi(2) + 1.0;
    let mut step = 1.0;
    while end_angle(spec, &unit, hi)? < target {
        hi += step;
        step *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if end_angle(spec, &unit, mid)? < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut acc = f(a) + f(b);
    for i in 1..n {
        acc += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    acc * h / 3.0
}

/// `(Ly, y)` for `y = sin(nπ(x − a)/L)`, which vanishes at both ends.
fn sine_form(spec: &ProblemSpec<f64>, n: f64) -> Result<f64> {
    let (a, l) = (spec.a, spec.length());
    let k = n * PI / l;
    let mut qy2 = 0.0;
    for p in spec.coeff.pieces() {
        qy2 += simpson(|x| p.q.at(x) * (k * (x - a)).sin().powi(2), p.x0, p.x1, 2000);
    }
    Ok(k * k * l / 2.0 - qy2)
}

pub fn classify_definiteness(spec: &ProblemSpec<f64>) -> Result<Classification> {
    spec.validate()?;
    let pieces = spec.coeff.pieces();
    let pos = pieces.iter().find(|p| p.w > 0.0);
    let neg = pieces.iter().find(|p| p.w < 0.0);
    let orthogonal = pos.is_none() || neg.is_none();
    let weight_sign = orthogonal.then(|| if pos.is_some() { 1 } else { -1 });
    let mut r_witnesses = Vec::new();
    if let (Some(p), Some(n)) = (pos, neg) {
        for piece in [p, n] {
            let len = piece.x1 - piece.x0;
            r_witnesses.push(Witness {
                description: format!("sin²-bump sin(π(x − {})/{len}) on [{}, {}]", piece.x0, piece.x0, piece.x1),
                value: piece.w * len / 2.0,
            });
        }
    }
    let lambda0 = lowest_eigenvalue(spec)?;
    let polar = lambda0 > 0.0;
    let mut l_witnesses = Vec::new();
    if !polar {
        l_witnesses.push(Witness {
            description: format!("ground state of −y'' − q y = Λ y, normalised in L², Λ₀ = {lambda0}"),
            value: lambda0,
        });
        let (_, qhi) = spec.coeff.potential_range(0.0, spec.a, spec.b).unwrap_or((0.0, 0.0));
        let l = spec.length();
        let n = ((qhi.max(0.0)).sqrt() * l / PI).ceil() + 1.0;
        l_witnesses.push(Witness {
            description: format!("sin({n}π(x − {})/{l})", spec.a),
            value: sine_form(spec, n)?,
        });
    }
    let kind = if orthogonal {
        Definiteness::Orthogonal
    } else if polar {
        Definiteness::Polar
    } else {
        Definiteness::Nondefinite
    };
    Ok(Classification { kind, orthogonal, polar, weight_sign, lambda0, r_witnesses, l_witnesses })
}
