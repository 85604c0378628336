//! Propagation of `(y, y')` across the interval for complex `λ`.
//!
//! Constant-coefficient segments use the exact solution operator of
//! `y'' + k² y = 0`; segments with an affine potential are integrated with the
//! Dormand–Prince pair. Breakpoints and table nodes are always step
//! boundaries.

use num_complex::Complex;

use crate::coefficients::{PiecewiseCoefficient, ProblemSpec, Segment};
use crate::error::{invalid, Result};
use crate::ode::{self, Tolerance};
use crate::scalar::Real;

/// `(y, y')` at `x`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StateVector<T> {
    pub x: T,
    pub y: Complex<T>,
    pub yp: Complex<T>,
}

impl<T: Real> StateVector<T> {
    pub fn conj(&self) -> Self {
        StateVector { x: self.x, y: self.y.conj(), yp: self.yp.conj() }
    }
}

/// 2×2 solution operator mapping `(y, y')(x0)` to `(y, y')(x1)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TransferMatrix<T> {
    pub m11: Complex<T>,
    pub m12: Complex<T>,
    pub m21: Complex<T>,
    pub m22: Complex<T>,
    pub x0: T,
    pub x1: T,
}

impl<T: Real> TransferMatrix<T> {
    pub fn identity(x: T) -> Self {
        let (o, z) = (Complex::new(T::one(), T::zero()), Complex::new(T::zero(), T::zero()));
        TransferMatrix { m11: o, m12: z, m21: z, m22: o, x0: x, x1: x }
    }

    pub fn det(&self) -> Complex<T> {
        self.m11 * self.m22 - self.m12 * self.m21
    }

    /// Follow `self` by `next`, i.e. the product `next · self`.
    pub fn then(&self, next: &TransferMatrix<T>) -> TransferMatrix<T> {
        TransferMatrix {
            m11: next.m11 * self.m11 + next.m12 * self.m21,
            m12: next.m11 * self.m12 + next.m12 * self.m22,
            m21: next.m21 * self.m11 + next.m22 * self.m21,
            m22: next.m21 * self.m12 + next.m22 * self.m22,
            x0: self.x0,
            x1: next.x1,
        }
    }

    pub fn apply(&self, y: Complex<T>, yp: Complex<T>) -> (Complex<T>, Complex<T>) {
        (self.m11 * y + self.m12 * yp, self.m21 * y + self.m22 * yp)
    }

    /// Largest entry modulus; the floating point floor for `det` is about
    /// `eps · max_abs²`.
    pub fn max_abs(&self) -> T {
        [self.m11, self.m12, self.m21, self.m22]
            .iter()
            .fold(T::zero(), |m, c| m.max(c.norm()))
    }

    fn shifted(mut self, x0: T, x1: T) -> Self {
        self.x0 = x0;
        self.x1 = x1;
        self
    }
}

/// How constant-coefficient segments are crossed.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum PropagationMode {
    /// Closed form on constant segments, adaptive elsewhere.
    #[default]
    Auto,
    /// Adaptive integration everywhere.
    Adaptive,
}

/// `(cos(√z L), sin(√z L)/√z)`, both entire in `z`.
pub fn cos_sinc<T: Real>(z: Complex<T>, length: T) -> (Complex<T>, Complex<T>) {
    let zero = T::zero();
    if z.im == zero {
        let (c, s) = cos_sinc_real(z.re, length);
        return (Complex::new(c, zero), Complex::new(s, zero));
    }
    let u = z * length * length;
    if u.norm() < T::lit(1e-4) {
        return series(u, length);
    }
    let k = z.sqrt();
    let kl = k * length;
    (kl.cos(), kl.sin() / k)
}

/// Real-argument specialisation of [`cos_sinc`].
pub fn cos_sinc_real<T: Real>(z: T, length: T) -> (T, T) {
    let u = z * length * length;
    if u.abs() < T::lit(1e-4) {
        let (c, s) = series(Complex::new(u, T::zero()), length);
        return (c.re, s.re);
    }
    if z > T::zero() {
        let k = z.sqrt();
        ((k * length).cos(), (k * length).sin() / k)
    } else {
        let k = (-z).sqrt();
        ((k * length).cosh(), (k * length).sinh() / k)
    }
}

fn series<T: Real>(u: Complex<T>, length: T) -> (Complex<T>, Complex<T>) {
    // cos: Σ (−u)^n/(2n)!, sinc·L: L Σ (−u)^n/(2n+1)!
    let mut c = Complex::new(T::one(), T::zero());
    let mut s = Complex::new(T::one(), T::zero());
    let mut term_c = c;
    let mut term_s = s;
    for n in 1..8 {
        let nf = T::lit(n as f64);
        let two = T::lit(2.0);
        term_c = -term_c * u / ((two * nf - T::one()) * (two * nf));
        term_s = -term_s * u / ((two * nf) * (two * nf + T::one()));
        c = c + term_c;
        s = s + term_s;
    }
    (c, s * length)
}

/// Exact transfer matrix of `y'' + k2 y = 0` over a piece of the given length.
pub fn piece_transfer<T: Real>(k2: Complex<T>, length: T) -> Result<TransferMatrix<T>> {
    if !(length > T::zero()) {
        return Err(invalid(format!("piece length must be positive, got {length}")));
    }
    let (c, s) = cos_sinc(k2, length);
    Ok(TransferMatrix { m11: c, m12: s, m21: -k2 * s, m22: c, x0: T::zero(), x1: length })
}

fn k2_at<T: Real>(seg: &Segment<T>, lambda: Complex<T>, x: T) -> Complex<T> {
    lambda * seg.w + seg.q_at(x)
}

fn adaptive_transfer<T: Real>(
    seg: &Segment<T>,
    lambda: Complex<T>,
    tol: Tolerance<T>,
) -> Result<TransferMatrix<T>> {
    let (o, z) = (T::one(), T::zero());
    // rows (m11, m12) and (m21, m22), real and imaginary parts interleaved
    let y0 = [o, z, z, z, z, z, o, z];
    let rhs = |x: T, m: &[T; 8]| {
        let k = k2_at(seg, lambda, x);
        let mut d = [T::zero(); 8];
        d[..4].copy_from_slice(&m[4..]);
        for j in 0..2 {
            let v = Complex::new(m[2 * j], m[2 * j + 1]);
            let r = -k * v;
            d[4 + 2 * j] = r.re;
            d[5 + 2 * j] = r.im;
        }
        d
    };
    let m = ode::integrate(rhs, seg.x0, seg.x1, y0, tol, |_, _, _, _| {})?;
    Ok(TransferMatrix {
        m11: Complex::new(m[0], m[1]),
        m12: Complex::new(m[2], m[3]),
        m21: Complex::new(m[4], m[5]),
        m22: Complex::new(m[6], m[7]),
        x0: seg.x0,
        x1: seg.x1,
    })
}

/// Transfer matrix of one segment.
pub fn segment_transfer<T: Real>(
    seg: &Segment<T>,
    lambda: Complex<T>,
    mode: PropagationMode,
    tol: Tolerance<T>,
) -> Result<TransferMatrix<T>> {
    if seg.is_constant() && mode == PropagationMode::Auto {
        Ok(piece_transfer(k2_at(seg, lambda, seg.x0), seg.length())?.shifted(seg.x0, seg.x1))
    } else {
        adaptive_transfer(seg, lambda, tol)
    }
}

/// Transfer matrix over `[x0, x1]`; coefficients are continued constantly
/// outside their domain.
pub fn transfer_over<T: Real>(
    coeff: &PiecewiseCoefficient<T>,
    lambda: Complex<T>,
    x0: T,
    x1: T,
    mode: PropagationMode,
    tol: Tolerance<T>,
) -> Result<TransferMatrix<T>> {
    let mut acc = TransferMatrix::identity(x0);
    for seg in coeff.segments(x0, x1) {
        acc = acc.then(&segment_transfer(&seg, lambda, mode, tol)?);
    }
    Ok(acc)
}

/// State realising the left boundary condition: `(sin α, cos α)` at `a`.
pub fn initial_state<T: Real>(spec: &ProblemSpec<T>) -> StateVector<T> {
    StateVector {
        x: spec.a,
        y: Complex::new(spec.alpha.sin(), T::zero()),
        yp: Complex::new(spec.alpha.cos(), T::zero()),
    }
}

pub fn propagate<T: Real>(
    spec: &ProblemSpec<T>,
    lambda: Complex<T>,
) -> Result<(StateVector<T>, TransferMatrix<T>)> {
    propagate_with(spec, lambda, PropagationMode::Auto, Tolerance::default())
}

pub fn propagate_with<T: Real>(
    spec: &ProblemSpec<T>,
    lambda: Complex<T>,
    mode: PropagationMode,
    tol: Tolerance<T>,
) -> Result<(StateVector<T>, TransferMatrix<T>)> {
    let m = transfer_over(&spec.coeff, lambda, spec.a, spec.b, mode, tol)?;
    let s0 = initial_state(spec);
    let (y, yp) = m.apply(s0.y, s0.yp);
    Ok((StateVector { x: spec.b, y, yp }, m))
}

/// States of the α-normalised solution at the sorted points `xs`.
pub fn solution_at<T: Real>(
    spec: &ProblemSpec<T>,
    lambda: Complex<T>,
    xs: &[T],
) -> Result<Vec<StateVector<T>>> {
    if xs.windows(2).any(|p| p[1] < p[0]) {
        return Err(invalid("evaluation points must be sorted"));
    }
    let mut state = initial_state(spec);
    let mut out = Vec::with_capacity(xs.len());
    for &x in xs {
        if !(x >= spec.a && x <= spec.b) {
            return Err(crate::error::SlError::OutOfRange {
                x: x.to_f64_lossy(),
                a: spec.a.to_f64_lossy(),
                b: spec.b.to_f64_lossy(),
            });
        }
        if x > state.x {
            let m = transfer_over(&spec.coeff, lambda, state.x, x, PropagationMode::Auto, Tolerance::default())?;
            let (y, yp) = m.apply(state.y, state.yp);
            state = StateVector { x, y, yp };
        }
        out.push(state);
    }
    Ok(out)
}
