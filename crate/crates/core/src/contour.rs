//! Non-real eigenvalues by the argument principle.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::coefficients::ProblemSpec;
use crate::error::{invalid, Result, SlError};
use crate::spectrum::{characteristic, eigenfunction, find_real_eigenvalues, EigenRecord};

type C = Complex<f64>;

const EDGE_SAMPLES: usize = 32;
const MAX_EDGE_DEPTH: usize = 24;
const MAX_CELL_DEPTH: usize = 40;
const NUDGES: usize = 6;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub re: (f64, f64),
    pub im: (f64, f64),
}

impl Rect {
    pub fn new(re: (f64, f64), im: (f64, f64)) -> Self {
        Rect { re, im }
    }

    pub fn contains(&self, z: C) -> bool {
        z.re >= self.re.0 && z.re <= self.re.1 && z.im >= self.im.0 && z.im <= self.im.1
    }

    pub fn is_conjugation_symmetric(&self) -> bool {
        self.im.0 == -self.im.1
    }

    fn corners(&self) -> [C; 4] {
        [
            C::new(self.re.0, self.im.0),
            C::new(self.re.1, self.im.0),
            C::new(self.re.1, self.im.1),
            C::new(self.re.0, self.im.1),
        ]
    }

    fn center(&self) -> C {
        C::new(0.5 * (self.re.0 + self.re.1), 0.5 * (self.im.0 + self.im.1))
    }

    fn diameter(&self) -> f64 {
        (self.re.1 - self.re.0).hypot(self.im.1 - self.im.0)
    }

    fn grown(&self, d: f64) -> Rect {
        Rect { re: (self.re.0 - d, self.re.1 + d), im: (self.im.0 - d, self.im.1 + d) }
    }

    fn split(&self, frac: f64) -> (Rect, Rect) {
        if self.re.1 - self.re.0 >= self.im.1 - self.im.0 {
            let m = self.re.0 + frac * (self.re.1 - self.re.0);
            (Rect { re: (self.re.0, m), ..*self }, Rect { re: (m, self.re.1), ..*self })
        } else {
            let m = self.im.0 + frac * (self.im.1 - self.im.0);
            (Rect { im: (self.im.0, m), ..*self }, Rect { im: (m, self.im.1), ..*self })
        }
    }
}

fn arg_step(f0: C, f1: C) -> f64 {
    (f1 / f0).arg()
}

fn edge_change(f: &impl Fn(C) -> Result<C>, z0: C, f0: C, z1: C, f1: C, depth: usize) -> Result<f64> {
    let d = arg_step(f0, f1);
    if d.abs() <= std::f64::consts::FRAC_PI_4 {
        return Ok(d);
    }
    if depth >= MAX_EDGE_DEPTH {
        // a jump this large after full refinement means a zero sits on the edge
        if d.abs() > std::f64::consts::FRAC_PI_2 {
            return Err(SlError::ContourResolution(format!("argument jump {d} between {z0} and {z1}")));
        }
        return Ok(d);
    }
    let zm = 0.5 * (z0 + z1);
    let fm = f(zm)?;
    if fm.norm() == 0.0 {
        return Err(SlError::ContourResolution(format!("D vanishes on the contour at {zm}")));
    }
    Ok(edge_change(f, z0, f0, zm, fm, depth + 1)? + edge_change(f, zm, fm, z1, f1, depth + 1)?)
}

fn winding_exact(f: &impl Fn(C) -> Result<C>, rect: &Rect) -> Result<i64> {
    let c = rect.corners();
    let mut total = 0.0;
    for k in 0..4 {
        let (z0, z1) = (c[k], c[(k + 1) % 4]);
        let mut prev = (z0, f(z0)?);
        for i in 1..=EDGE_SAMPLES {
            let z = z0 + (z1 - z0) * (i as f64 / EDGE_SAMPLES as f64);
            let fz = f(z)?;
            if fz.norm() == 0.0 || prev.1.norm() == 0.0 {
                return Err(SlError::ContourResolution(format!("D vanishes on the contour at {z}")));
            }
            total += edge_change(f, prev.0, prev.1, z, fz, 0)?;
            prev = (z, fz);
        }
    }
    let w = total / std::f64::consts::TAU;
    if (w - w.round()).abs() > 0.1 {
        return Err(SlError::ContourResolution(format!("winding {w} is not near an integer")));
    }
    Ok(w.round() as i64)
}

/// Winding number of `D` around `∂rect`. When the contour passes too close
/// to a zero, the rectangle is enlarged slightly and the enlarged one is
/// returned alongside.
pub fn winding_number(spec: &ProblemSpec<f64>, rect: &Rect) -> Result<(i64, Rect)> {
    let f = |z: C| characteristic(spec, z);
    winding_nudged(&f, rect)
}

fn winding_nudged(f: &impl Fn(C) -> Result<C>, rect: &Rect) -> Result<(i64, Rect)> {
    let mut last = None;
    for k in 0..=NUDGES {
        let r = if k == 0 { *rect } else { rect.grown(1e-7 * rect.diameter().max(1.0) * 3f64.powi(k as i32)) };
        match winding_exact(f, &r) {
            Ok(n) => return Ok((n, r)),
            Err(e @ SlError::ContourResolution(_)) => last = Some(e),
            Err(e) => return Err(e),
        }
    }
    Err(last.expect("at least one attempt"))
}

fn derivative(f: &impl Fn(C) -> Result<C>, z: C) -> Result<C> {
    let h = 1e-6 * z.norm().max(1.0);
    Ok((f(z + h)? - f(z - h)?) / (2.0 * h))
}

/// Newton iteration on `D`; `None` when it fails to reach `|D| < tol`.
pub fn newton_polish(spec: &ProblemSpec<f64>, z0: C, tol: f64) -> Result<Option<C>> {
    let f = |z: C| characteristic(spec, z);
    newton(&f, z0, tol)
}

fn newton(f: &impl Fn(C) -> Result<C>, z0: C, tol: f64) -> Result<Option<C>> {
    let mut z = z0;
    let mut fz = f(z)?;
    let mut extra = 0;
    for _ in 0..60 {
        let d = derivative(f, z)?;
        if d.norm() == 0.0 || !d.is_finite() {
            break;
        }
        let step = fz / d;
        let zn = z - step;
        let fzn = f(zn)?;
        if !fzn.is_finite() {
            break;
        }
        if fzn.norm() <= fz.norm() || fz.norm() >= tol {
            z = zn;
            fz = fzn;
        }
        if fz.norm() < tol {
            extra += 1;
            if extra >= 3 || step.norm() <= 1e-15 * z.norm().max(1.0) {
                return Ok(Some(z));
            }
        }
    }
    Ok((fz.norm() < tol).then_some(z))
}

fn roots_in(f: &impl Fn(C) -> Result<C>, rect: &Rect, n: i64, tol: f64, depth: usize, out: &mut Vec<C>) -> Result<()> {
    if n <= 0 {
        return Ok(());
    }
    if n == 1 {
        if let Some(z) = newton(f, rect.center(), tol)? {
            if rect.grown(1e-9 * rect.diameter()).contains(z) {
                out.push(z);
                return Ok(());
            }
        }
    }
    if depth >= MAX_CELL_DEPTH || rect.diameter() < 1e-12 * rect.center().norm().max(1.0) {
        // a cluster tighter than we can separate: one polished point per root
        let z = newton(f, rect.center(), tol)?.unwrap_or_else(|| rect.center());
        out.extend(std::iter::repeat_n(z, n as usize));
        return Ok(());
    }
    for frac in [0.5123, 0.4871, 0.5347, 0.4611] {
        let (l, r) = rect.split(frac);
        let (nl, nr) = match (winding_exact(f, &l), winding_exact(f, &r)) {
            (Ok(a), Ok(b)) => (a, b),
            _ => continue,
        };
        if nl + nr != n || nl < 0 || nr < 0 {
            continue;
        }
        roots_in(f, &l, nl, tol, depth + 1, out)?;
        roots_in(f, &r, nr, tol, depth + 1, out)?;
        return Ok(());
    }
    Err(SlError::ContourResolution(format!("could not split {rect:?} holding {n} zeros")))
}

/// Roots of `D` inside `rect`, found without using conjugate symmetry.
pub fn roots_in_rect(spec: &ProblemSpec<f64>, rect: &Rect, tol: f64) -> Result<Vec<C>> {
    let f = |z: C| characteristic(spec, z);
    let (n, r) = winding_nudged(&f, rect)?;
    let mut out = Vec::new();
    roots_in(&f, &r, n, tol, 0, &mut out)?;
    Ok(out)
}

fn record(spec: &ProblemSpec<f64>, z: C) -> Result<EigenRecord> {
    if z.im == 0.0 {
        let ef = eigenfunction(spec, z.re)?;
        return Ok(EigenRecord {
            re: z.re,
            im: 0.0,
            zeros_in_ab: Some(ef.zeros.len()),
            weighted_norm: Some(ef.weighted_norm),
            residual: ef.residual,
        });
    }
    Ok(EigenRecord { re: z.re, im: z.im, zeros_in_ab: None, weighted_norm: None, residual: characteristic(spec, z)?.norm() })
}

/// Eigenvalues of the problem inside `rect`.
///
/// On a conjugation-symmetric rectangle the upper half is searched, real
/// eigenvalues come from the real-axis scan, and the result is mirrored, so
/// the returned set is exactly closed under conjugation.
pub fn find_complex_eigenvalues(spec: &ProblemSpec<f64>, rect: &Rect, tol: f64) -> Result<Vec<EigenRecord>> {
    if !(rect.im.1 > rect.im.0) || !(rect.re.1 > rect.re.0) {
        return Err(invalid("rectangle must have positive extent"));
    }
    if ![rect.re.0, rect.re.1, rect.im.0, rect.im.1].iter().all(|v| v.is_finite()) {
        return Err(invalid("rectangle bounds must be finite"));
    }
    if !(tol > 0.0) {
        return Err(invalid("tolerance must be positive"));
    }
    spec.validate()?;
    let mut roots: Vec<C> = Vec::new();
    if rect.is_conjugation_symmetric() {
        let eps = 1e-6 * rect.diameter().max(1.0);
        let upper = Rect { re: rect.re, im: (eps.min(0.5 * rect.im.1), rect.im.1) };
        for z in roots_in_rect(spec, &upper, tol)? {
            roots.push(z);
            roots.push(z.conj());
        }
        let real = find_real_eigenvalues(spec, rect.re, tol)?;
        roots.extend(real.records.iter().map(|r| C::new(r.re, 0.0)));
    } else {
        roots = roots_in_rect(spec, rect, tol)?;
    }
    roots.sort_by(|p, q| p.re.total_cmp(&q.re).then(p.im.total_cmp(&q.im)));
    roots.iter().map(|&z| record(spec, z)).collect()
}
