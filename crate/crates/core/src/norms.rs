//! `∫ w y²` along a real solution, segment by segment.
//!
//! Oscillatory segments use the antiderivatives of `sin²`, `sin·cos`, `cos²`;
//! exponential segments use the two-point form
//! `y(s) = (y0 sinh κ(L−s) + y1 sinh κs) / sinh κL`, which stays accurate for
//! decaying solutions. Short segments (`|k²| L² ≤ 1`) use 10-point
//! Gauss–Legendre, exact to rounding there. Affine-potential segments are
//! integrated together with the state.

use crate::coefficients::{PiecewiseCoefficient, Segment};
use crate::error::Result;
use crate::ode::{self, Tolerance};
use crate::propagator::cos_sinc_real;
use crate::scalar::Real;

const GL_NODES: [f64; 5] = [
    0.148_874_338_981_631_2,
    0.433_395_394_129_247_2,
    0.679_409_568_299_024_4,
    0.865_063_366_688_984_5,
    0.973_906_528_517_171_7,
];
const GL_WEIGHTS: [f64; 5] = [
    0.295_524_224_714_752_9,
    0.269_266_719_309_996_4,
    0.219_086_362_515_982,
    0.149_451_349_150_580_6,
    0.066_671_344_308_688_1,
];

/// Result of integrating along a segment range.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NormSweep<T> {
    /// `∫ w y²`
    pub weighted: T,
    /// `∫ y²`
    pub plain: T,
    pub y: T,
    pub yp: T,
}

/// `∫ y²` over a constant segment of length `len` with `k² = k2`.
pub fn square_integral<T: Real>(k2: T, len: T, y0: T, p0: T) -> T {
    let (c, s) = cos_sinc_real(k2, len);
    let y1 = c * y0 + s * p0;
    let two = T::lit(2.0);
    let four = T::lit(4.0);
    if (k2 * len * len).abs() <= T::one() {
        let half = len / two;
        let mut acc = T::zero();
        for (x, w) in GL_NODES.iter().zip(GL_WEIGHTS.iter()) {
            for sign in [-T::one(), T::one()] {
                let h = half + sign * T::lit(*x) * half;
                let (c, s) = cos_sinc_real(k2, h);
                let y = c * y0 + s * p0;
                acc = acc + T::lit(*w) * y * y;
            }
        }
        acc * half
    } else if k2 > T::zero() {
        let k = k2.sqrt();
        let kl = k * len;
        let i_cc = len / two + (two * kl).sin() / (four * k);
        let i_cs = kl.sin() * kl.sin() / (two * k2);
        let i_ss = (len / two - (two * kl).sin() / (four * k)) / k2;
        y0 * y0 * i_cc + two * y0 * p0 * i_cs + p0 * p0 * i_ss
    } else {
        let k = (-k2).sqrt();
        let kl = k * len;
        let sh = kl.sinh();
        let j = (two * kl).sinh() / (four * k) - len / two;
        let cross = (len * kl.cosh() - sh / k) / two;
        if !sh.is_finite() || !j.is_finite() {
            // both ends so far apart only the end contributions survive
            return (y0 * y0 + y1 * y1) / (two * k);
        }
        (y0 * y0 * j + two * y0 * y1 * cross + y1 * y1 * j) / (sh * sh)
    }
}

fn segment_adaptive<T: Real>(seg: &Segment<T>, lambda: T, y0: T, p0: T) -> Result<(T, T, T)> {
    let rhs = |x: T, v: &[T; 3]| {
        let k2 = lambda * seg.w + seg.q_at(x);
        [v[1], -k2 * v[0], v[0] * v[0]]
    };
    let v = ode::integrate(rhs, seg.x0, seg.x1, [y0, p0, T::zero()], Tolerance::default(), |_, _, _, _| {})?;
    Ok((v[2], v[0], v[1]))
}

/// Integrate along `[x0, x1]` starting from `(y0, p0)`.
pub fn norm_sweep<T: Real>(
    coeff: &PiecewiseCoefficient<T>,
    lambda: T,
    x0: T,
    x1: T,
    y0: T,
    p0: T,
) -> Result<NormSweep<T>> {
    let mut out = NormSweep { weighted: T::zero(), plain: T::zero(), y: y0, yp: p0 };
    for seg in coeff.segments(x0, x1) {
        let (sq, y1, p1) = if seg.is_constant() {
            let k2 = lambda * seg.w + seg.q0;
            let (c, s) = cos_sinc_real(k2, seg.length());
            let sq = square_integral(k2, seg.length(), out.y, out.yp);
            (sq, c * out.y + s * out.yp, -k2 * s * out.y + c * out.yp)
        } else {
            segment_adaptive(&seg, lambda, out.y, out.yp)?
        };
        out.weighted = out.weighted + seg.w * sq;
        out.plain = out.plain + sq;
        out.y = y1;
        out.yp = p1;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
        let h = (b - a) / n as f64;
        let mut acc = f(a) + f(b);
        for i in 1..n {
            acc += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
        }
        acc * h / 3.0
    }

    #[test]
    fn sine_square_closed_form() {
        // y = sin kx on [0,1]: ½(1 − sin 2k / 2k)
        for k in [0.3f64, 1.0, 2.0, 7.5] {
            let got = square_integral(k * k, 1.0, 0.0, k);
            assert_relative_eq!(got, 0.5 * (1.0 - (2.0 * k).sin() / (2.0 * k)), max_relative = 1e-13);
        }
    }

    #[test]
    fn matches_simpson_in_every_regime() {
        for (k2, y0, p0) in [(25.0, 0.3, -1.0), (0.5, 1.0, 1.0), (-0.5, 1.0, -2.0), (-16.0, 2.0, -8.0), (-16.0, 0.0, 1.0)] {
            let f = |x: f64| {
                let (c, s) = cos_sinc_real(k2, x);
                let y = c * y0 + s * p0;
                y * y
            };
            let oracle = simpson(f, 0.0, 1.3, 20_000);
            assert_relative_eq!(square_integral(k2, 1.3, y0, p0), oracle, max_relative = 1e-10);
        }
    }

    #[test]
    fn decaying_solution_is_stable() {
        // y = e^{-κ s}: ∫ = (1 − e^{-2κL}) / 2κ
        let kappa: f64 = 40.0;
        let got = square_integral(-kappa * kappa, 2.0, 1.0, -kappa);
        assert_relative_eq!(got, (1.0 - (-4.0 * kappa).exp()) / (2.0 * kappa), max_relative = 1e-12);
    }

    #[test]
    fn adaptive_segment_agrees() {
        let seg = Segment { x0: 0.0, x1: 1.0, w: 2.0, q0: 1.0, q1: 1.0 + 1e-300 };
        let (sq, _, _) = segment_adaptive(&seg, 3.0, 0.0, 1.0).unwrap();
        assert_relative_eq!(sq, square_integral(7.0, 1.0, 0.0, 1.0), max_relative = 1e-9);
    }
}
