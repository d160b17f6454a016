//! Bracketed scalar root finding.
//!
//! Brent's method: inverse quadratic / secant steps safeguarded by bisection,
//! so every iterate stays inside a sign-changing bracket.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RootError {
    #[error("endpoints do not bracket a root: f({a}) = {fa}, f({b}) = {fb}")]
    NoSignChange { a: f64, fa: f64, b: f64, fb: f64 },

    #[error("function returned a non-finite value at x = {x}")]
    NonFinite { x: f64 },

    #[error("iteration limit reached, last bracket [{a}, {b}]")]
    IterationLimit { a: f64, b: f64 },
}

/// Stopping rule for [`brent`].
#[derive(Debug, Clone, Copy)]
pub struct Tolerance {
    /// Absolute tolerance on x.
    pub x_abs: f64,
    /// Relative tolerance on x.
    pub x_rel: f64,
    /// Stop as soon as |f| falls below this.
    pub f_abs: f64,
    pub max_iter: usize,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self {
            x_abs: 0.0,
            x_rel: 4.0 * f64::EPSILON,
            f_abs: 0.0,
            max_iter: 400,
        }
    }
}

/// Result of a bracketed solve: the best abscissa and its residual.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Root {
    pub x: f64,
    pub fx: f64,
    pub iterations: usize,
}

pub fn brent<F>(mut f: F, a: f64, b: f64, tol: Tolerance) -> Result<Root, RootError>
where
    F: FnMut(f64) -> f64,
{
    let mut a = a;
    let mut b = b;
    let mut fa = f(a);
    let mut fb = f(b);
    if !fa.is_finite() {
        return Err(RootError::NonFinite { x: a });
    }
    if !fb.is_finite() {
        return Err(RootError::NonFinite { x: b });
    }
    if fa == 0.0 {
        return Ok(Root { x: a, fx: fa, iterations: 0 });
    }
    if fb == 0.0 {
        return Ok(Root { x: b, fx: fb, iterations: 0 });
    }
    if fa.signum() == fb.signum() {
        return Err(RootError::NoSignChange { a, fa, b, fb });
    }

    let mut c = a;
    let mut fc = fa;
    let mut d = b - a;
    let mut e = d;

    for iter in 0..tol.max_iter {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }

        let tol1 = 2.0 * f64::EPSILON * b.abs() + 0.5 * (tol.x_abs + tol.x_rel * b.abs());
        let xm = 0.5 * (c - b);
        if xm.abs() <= tol1 || fb == 0.0 || fb.abs() <= tol.f_abs {
            return Ok(Root { x: b, fx: fb, iterations: iter });
        }

        if e.abs() >= tol1 && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * xm * s;
                q = 1.0 - s;
            } else {
                let qq = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * xm * qq * (qq - r) - (b - a) * (r - 1.0));
                q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            }
            p = p.abs();
            let min1 = 3.0 * xm * q - (tol1 * q).abs();
            let min2 = (e * q).abs();
            if 2.0 * p < min1.min(min2) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }

        a = b;
        fa = fb;
        if d.abs() > tol1 {
            b += d;
        } else {
            b += tol1.copysign(xm);
        }
        fb = f(b);
        if !fb.is_finite() {
            return Err(RootError::NonFinite { x: b });
        }
    }
    Err(RootError::IterationLimit { a: b, b: c })
}
