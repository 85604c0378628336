//! Real-`λ` sweeps tracking the Prüfer angle `θ = atan2(y, y')`.
//!
//! `θ` increases through every multiple of `π` (at a zero of `y`, `θ' = 1`),
//! so the number of zeros in `(x0, x1]` is `⌊θ(x1)/π⌋ − ⌊θ(x0)/π⌋`. On
//! segments with `k² = λw + q > 0` the modified angle `atan2(k y, y')` advances
//! by exactly `kL`; on segments with `k² ≤ 0` a solution has at most one zero.

use crate::coefficients::{PiecewiseCoefficient, Segment};
use crate::error::Result;
use crate::ode::{self, Tolerance};
use crate::propagator::{cos_sinc_real, PropagationMode};
use crate::scalar::Real;

/// Angle residual closer than this to a multiple of `π` at a breakpoint is
/// reported as a zero on the breakpoint.
const BREAKPOINT_HIT: f64 = 1e-13;

#[derive(Clone, Debug, PartialEq)]
pub struct Sweep<T> {
    pub x: T,
    pub y: T,
    pub yp: T,
    /// Continuous Prüfer angle at `x`.
    pub theta: T,
    /// Zeros in `(x0, x]`, increasing; only filled when requested.
    pub zeros: Vec<T>,
    /// Breakpoints at which the solution vanishes to within rounding.
    pub breakpoint_hits: Vec<T>,
}

impl<T: Real> Sweep<T> {
    /// Zeros strictly inside `(x0, x)`: crossings that land on the final
    /// point within `eta · π` of angle are excluded.
    pub fn interior_count(&self, theta0: T, eta: T) -> usize {
        let pi = T::PI();
        let n = (self.theta / pi - eta).floor() - (theta0 / pi).floor();
        n.max(T::zero()).to_usize().unwrap_or(0)
    }
}

fn split_angle<T: Real>(theta: T) -> (T, T) {
    let pi = T::PI();
    let n = (theta / pi).floor();
    let r = (theta - n * pi).max(T::zero()).min(pi);
    (n, r)
}

fn parity<T: Real>(n: T) -> T {
    if (n.to_i64().unwrap_or(0)).rem_euclid(2) == 0 {
        T::one()
    } else {
        -T::one()
    }
}

fn residual_of<T: Real>(sign: T, y: T, yp: T) -> T {
    let r = (sign * y).atan2(sign * yp);
    if r < T::zero() {
        // state just across the axis from where the count puts it
        if r < -T::FRAC_PI_2() {
            T::PI() - T::epsilon()
        } else {
            T::zero()
        }
    } else if r >= T::PI() {
        T::PI() - T::epsilon()
    } else {
        r
    }
}

/// Initial data of a sweep: state and a Prüfer angle consistent with it.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Start<T> {
    pub y: T,
    pub yp: T,
    pub theta: T,
}

impl<T: Real> Start<T> {
    /// Fresh start with `θ = atan2(y, y') ∈ (−π, π]`.
    pub fn new(y: T, yp: T) -> Self {
        Start { y, yp, theta: y.atan2(yp) }
    }

    /// Continue from the end of a previous sweep.
    pub fn resume(s: &Sweep<T>) -> Self {
        Start { y: s.y, yp: s.yp, theta: s.theta }
    }
}

/// Sweep the real solution through `[x0, x1]`.
pub fn sweep_real<T: Real>(
    coeff: &PiecewiseCoefficient<T>,
    lambda: T,
    x0: T,
    x1: T,
    start: Start<T>,
    want_zeros: bool,
    mode: PropagationMode,
) -> Result<Sweep<T>> {
    let segments = coeff.segments(x0, x1);
    let mut s = Sweep {
        x: x0,
        y: start.y,
        yp: start.yp,
        theta: start.theta,
        zeros: Vec::new(),
        breakpoint_hits: Vec::new(),
    };
    let last = segments.len().saturating_sub(1);
    for (i, seg) in segments.iter().enumerate() {
        if seg.is_constant() && mode == PropagationMode::Auto {
            constant_step(seg, lambda, &mut s, want_zeros);
        } else {
            adaptive_step(seg, lambda, &mut s, want_zeros)?;
        }
        if i < last && is_boundary(coeff, seg.x1) {
            let (_, r) = split_angle(s.theta);
            let tiny = T::lit(BREAKPOINT_HIT);
            if r < tiny || T::PI() - r < tiny {
                s.breakpoint_hits.push(seg.x1);
            }
        }
    }
    Ok(s)
}

fn is_boundary<T: Real>(coeff: &PiecewiseCoefficient<T>, x: T) -> bool {
    coeff.pieces().iter().any(|p| p.x0 == x || p.x1 == x)
}

fn constant_step<T: Real>(seg: &Segment<T>, lambda: T, s: &mut Sweep<T>, want_zeros: bool) {
    let k2 = lambda * seg.w + seg.q0;
    let len = seg.length();
    let (c, sn) = cos_sinc_real(k2, len);
    let (y1, yp1) = (c * s.y + sn * s.yp, -k2 * sn * s.y + c * s.yp);
    let pi = T::PI();
    let (n, r) = split_angle(s.theta);
    let small = (k2 * len * len).abs() < T::lit(1e-4);
    if k2 > T::zero() && !small {
        let k = k2.sqrt();
        let phi0 = n * pi + (k * r.sin()).atan2(r.cos());
        let phi1 = phi0 + k * len;
        let m = (phi1 / pi).floor();
        let rm = phi1 - m * pi;
        let r_end = rm.sin().atan2(k * rm.cos());
        let r_end = if r_end < T::zero() { r_end + pi } else { r_end };
        if want_zeros {
            let mut j = (phi0 / pi).floor() + T::one();
            while j <= m {
                s.zeros.push(seg.x0 + (j * pi - phi0) / k);
                j = j + T::one();
            }
        }
        s.theta = m * pi + r_end.min(pi - T::epsilon());
    } else {
        let sigma = parity(n);
        let crosses = r > T::zero() && sigma * y1 <= T::zero();
        let m = if crosses { n + T::one() } else { n };
        if crosses && want_zeros {
            s.zeros.push(bisect_zero(seg.x0, len, |h| {
                let (c, sn) = cos_sinc_real(k2, h);
                c * s.y + sn * s.yp
            }));
        }
        s.theta = m * pi + residual_of(parity(m), y1, yp1);
    }
    s.x = seg.x1;
    s.y = y1;
    s.yp = yp1;
}

/// Root of `f(h)` on `(0, len]` given a sign change between `0` and `len`.
fn bisect_zero<T: Real>(x0: T, len: T, f: impl Fn(T) -> T) -> T {
    let (mut lo, mut hi) = (T::zero(), len);
    let f_lo = f(lo);
    if f(hi) == T::zero() {
        return x0 + hi;
    }
    for _ in 0..200 {
        let mid = (lo + hi) / T::lit(2.0);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if fm == T::zero() {
            return x0 + mid;
        }
        if (fm > T::zero()) == (f_lo > T::zero()) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    x0 + (lo + hi) / T::lit(2.0)
}

fn adaptive_step<T: Real>(seg: &Segment<T>, lambda: T, s: &mut Sweep<T>, want_zeros: bool) -> Result<()> {
    let rhs = |x: T, v: &[T; 3]| {
        let k2 = lambda * seg.w + seg.q_at(x);
        let (st, ct) = v[2].sin_cos();
        [v[1], -k2 * v[0], ct * ct + k2 * st * st]
    };
    let tol = Tolerance::default();
    let pi = T::PI();
    let mut crossings: Vec<(T, [T; 3], T)> = Vec::new();
    let end = ode::integrate(rhs, seg.x0, seg.x1, [s.y, s.yp, s.theta], tol, |xa, va, _xb, vb| {
        let ja = (va[2] / pi).floor();
        let jb = (vb[2] / pi).floor();
        let mut j = ja + T::one();
        while j <= jb {
            crossings.push((xa, *va, j * pi));
            j = j + T::one();
        }
    })?;
    if want_zeros {
        for (xa, va, target) in crossings {
            // locate θ = target inside the accepted step by bisection on length
            let mut lo = T::zero();
            let mut hi = seg.x1 - xa;
            for _ in 0..60 {
                let mid = (lo + hi) / T::lit(2.0);
                let v = ode::integrate(rhs, xa, xa + mid, va, tol, |_, _, _, _| {})?;
                if v[2] < target {
                    lo = mid;
                } else {
                    hi = mid;
                }
                if hi - lo <= T::epsilon() * (seg.x1.abs() + T::one()) {
                    break;
                }
            }
            s.zeros.push(xa + (lo + hi) / T::lit(2.0));
        }
    }
    s.x = seg.x1;
    s.y = end[0];
    s.yp = end[1];
    s.theta = end[2];
    Ok(())
}
