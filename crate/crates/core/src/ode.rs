//! Dormand–Prince 5(4) integrator for small fixed-size real systems.

use crate::error::{Result, SlError};
use crate::scalar::Real;

#[derive(Clone, Copy, Debug)]
pub struct Tolerance<T> {
    pub rtol: T,
    pub atol: T,
    pub max_steps: usize,
}

impl<T: Real> Default for Tolerance<T> {
    fn default() -> Self {
        let eps = T::epsilon();
        // 1e-10 is below f32 resolution; fall back to a few ulps there.
        let rtol = T::lit(1e-10).max(eps * T::lit(16.0));
        Tolerance { rtol, atol: rtol * T::lit(1e-3), max_steps: 1_000_000 }
    }
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// fifth-order minus embedded fourth-order weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

fn axpy<T: Real, const N: usize>(y: &[T; N], terms: &[(f64, &[T; N])], h: T) -> [T; N] {
    let mut out = *y;
    for &(c, k) in terms {
        let ch = T::lit(c) * h;
        for i in 0..N {
            out[i] = out[i] + ch * k[i];
        }
    }
    out
}

/// Integrate `y' = f(x, y)` from `x0` to `x1` (`x1 > x0`).
///
/// `observer` sees every accepted step as `(x_prev, y_prev, x_new, y_new)`.
pub fn integrate<T, const N: usize, F, O>(
    f: F,
    x0: T,
    x1: T,
    y0: [T; N],
    tol: Tolerance<T>,
    mut observer: O,
) -> Result<[T; N]>
where
    T: Real,
    F: Fn(T, &[T; N]) -> [T; N],
    O: FnMut(T, &[T; N], T, &[T; N]),
{
    if !(x1 > x0) {
        return Ok(y0);
    }
    let span = x1 - x0;
    let mut x = x0;
    let mut y = y0;
    let mut k1 = f(x, &y);
    let mut h = initial_step(&y, &k1, span, tol);
    let fifth = T::lit(0.2);
    let min_h = span * T::epsilon() * T::lit(4.0);
    let mut steps = 0usize;
    while x < x1 {
        steps += 1;
        if steps > tol.max_steps {
            return Err(SlError::NumericalFailure(format!(
                "adaptive integrator exceeded {} steps on [{}, {}]",
                tol.max_steps, x0, x1
            )));
        }
        let last = x + h >= x1;
        if last {
            h = x1 - x;
        }
        let k2 = f(x + T::lit(C2) * h, &axpy(&y, &[(A21, &k1)], h));
        let k3 = f(x + T::lit(C3) * h, &axpy(&y, &[(A31, &k1), (A32, &k2)], h));
        let k4 = f(x + T::lit(C4) * h, &axpy(&y, &[(A41, &k1), (A42, &k2), (A43, &k3)], h));
        let k5 = f(
            x + T::lit(C5) * h,
            &axpy(&y, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)], h),
        );
        let k6 = f(
            x + h,
            &axpy(&y, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)], h),
        );
        let y_new = axpy(&y, &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)], h);
        let x_new = if last { x1 } else { x + h };
        let k7 = f(x_new, &y_new);
        let mut err = T::zero();
        for i in 0..N {
            let e = h
                * (T::lit(E1) * k1[i]
                    + T::lit(E3) * k3[i]
                    + T::lit(E4) * k4[i]
                    + T::lit(E5) * k5[i]
                    + T::lit(E6) * k6[i]
                    + T::lit(E7) * k7[i]);
            let sc = tol.atol + tol.rtol * y[i].abs().max(y_new[i].abs());
            err = err + (e / sc) * (e / sc);
        }
        err = (err / T::lit(N as f64)).sqrt();
        if !err.is_finite() {
            return Err(SlError::NumericalFailure(format!("non-finite state near x = {x}")));
        }
        if err <= T::one() {
            observer(x, &y, x_new, &y_new);
            x = x_new;
            y = y_new;
            k1 = k7;
            let grow = if err == T::zero() {
                T::lit(5.0)
            } else {
                (T::lit(0.9) * err.powf(-fifth)).min(T::lit(5.0)).max(T::lit(0.2))
            };
            h = h * grow;
        } else {
            let shrink = (T::lit(0.9) * err.powf(-fifth)).max(T::lit(0.1));
            h = h * shrink;
            if h < min_h {
                return Err(SlError::NumericalFailure(format!(
                    "step size underflow at x = {x}; tolerance {} unreachable",
                    tol.rtol
                )));
            }
        }
    }
    Ok(y)
}

fn initial_step<T: Real, const N: usize>(y: &[T; N], dy: &[T; N], span: T, tol: Tolerance<T>) -> T {
    let mut d0 = T::zero();
    let mut d1 = T::zero();
    for i in 0..N {
        let sc = tol.atol + tol.rtol * y[i].abs();
        d0 = d0 + (y[i] / sc) * (y[i] / sc);
        d1 = d1 + (dy[i] / sc) * (dy[i] / sc);
    }
    let h = if d0 < T::lit(1e-10) || d1 < T::lit(1e-10) {
        span * T::lit(1e-3)
    } else {
        T::lit(0.01) * (d0 / d1).sqrt()
    };
    h.min(span).max(span * T::lit(1e-9))
}
