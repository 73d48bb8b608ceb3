use nalgebra::{Matrix3, Vector3};

use crate::vessel::{rotation_matrix, skew, ControlInput};

/// Frame in which the PID error is expressed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ErrorFrame {
    /// `R^T(psi) (eta_d - eta)`: thrust acts in the body frame.
    #[default]
    Body,
    /// `eta_d - eta`.
    Earth,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PidGains {
    pub kp: Matrix3<f64>,
    pub ki: Matrix3<f64>,
    pub kd: Matrix3<f64>,
}

impl PidGains {
    pub fn reference() -> Self {
        Self {
            kp: Matrix3::from_diagonal(&Vector3::new(3000.0, 9000.0, 1e8)),
            ki: Matrix3::from_diagonal(&Vector3::new(5.0, 50.0, 30.0)),
            kd: Matrix3::from_diagonal(&Vector3::new(5e4, 7e4, 300.0)),
        }
    }
}

impl Default for PidGains {
    fn default() -> Self {
        Self::reference()
    }
}

/// PID with a trapezoidal integral.
///
/// The derivative term uses the measured velocity instead of differencing
/// the error: in the body frame `d/dt R^T (eta_d - eta) = -S(r) e - nu`.
#[derive(Debug, Clone, PartialEq)]
pub struct PidController {
    pub gains: PidGains,
    pub frame: ErrorFrame,
    integral: Vector3<f64>,
    last_error: Option<Vector3<f64>>,
}

impl PidController {
    pub fn new(gains: PidGains, frame: ErrorFrame) -> Self {
        Self {
            gains,
            frame,
            integral: Vector3::zeros(),
            last_error: None,
        }
    }

    pub fn reset(&mut self) {
        self.integral = Vector3::zeros();
        self.last_error = None;
    }

    pub fn integral(&self) -> Vector3<f64> {
        self.integral
    }

    pub fn error(&self, eta: &Vector3<f64>, eta_d: &Vector3<f64>) -> Vector3<f64> {
        let e = eta_d - eta;
        match self.frame {
            ErrorFrame::Body => rotation_matrix(eta[2]).transpose() * e,
            ErrorFrame::Earth => e,
        }
    }

    /// Error rate for a stationary target.
    pub fn error_rate(&self, eta: &Vector3<f64>, eta_d: &Vector3<f64>, nu: &Vector3<f64>) -> Vector3<f64> {
        match self.frame {
            ErrorFrame::Body => -(skew(nu[2]) * self.error(eta, eta_d)) - nu,
            ErrorFrame::Earth => -(rotation_matrix(eta[2]) * nu),
        }
    }

    /// Control output with the integral state frozen.
    pub fn output(&self, eta: &Vector3<f64>, eta_d: &Vector3<f64>, nu: &Vector3<f64>) -> ControlInput {
        let e = self.error(eta, eta_d);
        let de = self.error_rate(eta, eta_d, nu);
        ControlInput::new(self.gains.kp * e + self.gains.ki * self.integral + self.gains.kd * de)
    }

    /// Accumulates `error` into the integral with the trapezoid rule over
    /// `dt`. The first call after a reset only records the sample.
    pub fn advance_integral(&mut self, error: Vector3<f64>, dt: f64) {
        if let Some(prev) = self.last_error {
            self.integral += (prev + error) * (0.5 * dt);
        }
        self.last_error = Some(error);
    }
}

/// Samples the error, advances the integral and returns the output.
pub fn pid_control(
    ctrl: &mut PidController,
    eta: &Vector3<f64>,
    eta_d: &Vector3<f64>,
    nu: &Vector3<f64>,
    dt: f64,
) -> ControlInput {
    let e = ctrl.error(eta, eta_d);
    ctrl.advance_integral(e, dt);
    ctrl.output(eta, eta_d, nu)
}
