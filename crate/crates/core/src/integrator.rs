//! Fixed-step classical Runge-Kutta integration.

use nalgebra::SVector;

use crate::error::{DpError, Result};

/// A state that can be advanced by a fixed-step explicit scheme.
///
/// Derivatives share the state's representation, so `axpy` doubles as the
/// stage combination `self += a * x`.
pub trait OdeState: Clone {
    fn axpy(&mut self, a: f64, x: &Self);
    fn is_finite(&self) -> bool;
}

impl OdeState for f64 {
    fn axpy(&mut self, a: f64, x: &Self) {
        *self += a * x;
    }

    fn is_finite(&self) -> bool {
        f64::is_finite(*self)
    }
}

impl<const D: usize> OdeState for SVector<f64, D> {
    fn axpy(&mut self, a: f64, x: &Self) {
        *self += x * a;
    }

    fn is_finite(&self) -> bool {
        self.iter().all(|v| v.is_finite())
    }
}

impl OdeState for Vec<f64> {
    fn axpy(&mut self, a: f64, x: &Self) {
        debug_assert_eq!(self.len(), x.len());
        for (s, v) in self.iter_mut().zip(x) {
            *s += a * v;
        }
    }

    fn is_finite(&self) -> bool {
        self.iter().all(|v| v.is_finite())
    }
}

/// One classical RK4 step of length `dt`.
///
/// `deriv` is evaluated at the four stage states; anything that should be
/// held constant across the step (disturbance samples, integral states) must
/// be captured by the closure.
pub fn rk4_step<S, F>(state: &S, dt: f64, mut deriv: F) -> Result<S>
where
    S: OdeState,
    F: FnMut(&S) -> Result<S>,
{
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(DpError::InvalidParameter(format!("dt must be positive, got {dt}")));
    }
    let half = 0.5 * dt;

    let k1 = deriv(state)?;
    let mut s = state.clone();
    s.axpy(half, &k1);
    let k2 = deriv(&s)?;
    let mut s = state.clone();
    s.axpy(half, &k2);
    let k3 = deriv(&s)?;
    let mut s = state.clone();
    s.axpy(dt, &k3);
    let k4 = deriv(&s)?;

    let mut next = state.clone();
    next.axpy(dt / 6.0, &k1);
    next.axpy(dt / 3.0, &k2);
    next.axpy(dt / 3.0, &k3);
    next.axpy(dt / 6.0, &k4);

    if next.is_finite() {
        Ok(next)
    } else {
        Err(DpError::NonFiniteState)
    }
}
