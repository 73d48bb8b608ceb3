//! 3-DOF vessel kinematics and dynamics.
//!
//! The state is the earth-frame pose `eta = [x, y, psi]` and the body-frame
//! velocity `nu = [u, v, r]`. Yaw is never wrapped inside the state; use
//! [`wrap_angle`] when reporting.

use nalgebra::{Matrix3, Vector3};
use std::f64::consts::PI;

use crate::error::{DpError, Result};
use crate::integrator::OdeState;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Pose {
    pub x: f64,
    pub y: f64,
    /// Yaw, radians, unwrapped.
    pub psi: f64,
}

impl Pose {
    pub fn new(x: f64, y: f64, psi: f64) -> Self {
        Self { x, y, psi }
    }

    pub fn to_vector(self) -> Vector3<f64> {
        Vector3::new(self.x, self.y, self.psi)
    }

    pub fn from_vector(v: &Vector3<f64>) -> Self {
        Self::new(v[0], v[1], v[2])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BodyVelocity {
    pub u: f64,
    pub v: f64,
    pub r: f64,
}

impl BodyVelocity {
    pub fn new(u: f64, v: f64, r: f64) -> Self {
        Self { u, v, r }
    }

    pub fn to_vector(self) -> Vector3<f64> {
        Vector3::new(self.u, self.v, self.r)
    }

    pub fn from_vector(v: &Vector3<f64>) -> Self {
        Self::new(v[0], v[1], v[2])
    }
}

/// Pose and velocity stacked as two 3-vectors. Also used for derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VesselState {
    pub eta: Vector3<f64>,
    pub nu: Vector3<f64>,
}

impl VesselState {
    pub fn new(pose: Pose, velocity: BodyVelocity) -> Self {
        Self {
            eta: pose.to_vector(),
            nu: velocity.to_vector(),
        }
    }

    pub fn zeros() -> Self {
        Self {
            eta: Vector3::zeros(),
            nu: Vector3::zeros(),
        }
    }

    pub fn pose(&self) -> Pose {
        Pose::from_vector(&self.eta)
    }

    pub fn velocity(&self) -> BodyVelocity {
        BodyVelocity::from_vector(&self.nu)
    }

    pub fn psi(&self) -> f64 {
        self.eta[2]
    }
}

impl OdeState for VesselState {
    fn axpy(&mut self, a: f64, x: &Self) {
        self.eta += x.eta * a;
        self.nu += x.nu * a;
    }

    fn is_finite(&self) -> bool {
        self.eta.iter().chain(self.nu.iter()).all(|v| v.is_finite())
    }
}

/// Inertia (rigid body plus added mass) and linear damping.
#[allow(non_snake_case)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VesselParams {
    pub M: Matrix3<f64>,
    pub D: Matrix3<f64>,
}

#[allow(non_snake_case)]
impl VesselParams {
    /// Builds parameters and enforces the surge-decoupled structure of both
    /// matrices. `M` must be invertible.
    pub fn new(M: Matrix3<f64>, D: Matrix3<f64>) -> Result<Self> {
        for (name, m) in [("M", &M), ("D", &D)] {
            if m.iter().any(|v| !v.is_finite()) {
                return Err(DpError::InvalidParameter(format!("{name} has non-finite entries")));
            }
            let coupled = [m[(0, 1)], m[(0, 2)], m[(1, 0)], m[(2, 0)]];
            if coupled.iter().any(|&v| v != 0.0) {
                return Err(DpError::InvalidParameter(format!(
                    "{name} must decouple surge: entries (0,1), (0,2), (1,0), (2,0) must be zero"
                )));
            }
        }
        if M.try_inverse().is_none() {
            return Err(DpError::SingularMass);
        }
        Ok(Self { M, D })
    }

    /// Supply-vessel values used by the reference scenarios.
    pub fn supply_vessel() -> Self {
        Self {
            M: Matrix3::from_diagonal(&Vector3::new(5.3122e6, 8.2831e6, 3.7454e9)),
            D: Matrix3::new(
                5.0242e4, 0.0, 0.0, //
                0.0, 2.7229e5, -4.3933e6, //
                0.0, -4.3933e6, 4.1894e8,
            ),
        }
    }
}

impl Default for VesselParams {
    fn default() -> Self {
        Self::supply_vessel()
    }
}

/// Thruster forces and moment `[surge N, sway N, yaw N*m]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControlInput {
    pub tau: Vector3<f64>,
}

impl ControlInput {
    pub fn new(tau: Vector3<f64>) -> Self {
        Self { tau }
    }

    pub fn zeros() -> Self {
        Self::new(Vector3::zeros())
    }
}

/// Earth-from-body rotation about the vertical axis.
pub fn rotation_matrix(psi: f64) -> Matrix3<f64> {
    let (s, c) = psi.sin_cos();
    Matrix3::new(
        c, -s, 0.0, //
        s, c, 0.0, //
        0.0, 0.0, 1.0,
    )
}

/// Skew matrix `S(r)` with `dR/dt = R(psi) S(r)`.
pub fn skew(r: f64) -> Matrix3<f64> {
    Matrix3::new(
        0.0, -r, 0.0, //
        r, 0.0, 0.0, //
        0.0, 0.0, 0.0,
    )
}

/// Time derivative of `R(psi)` when the yaw rate is `r`.
pub fn rotation_rate_matrix(psi: f64, r: f64) -> Matrix3<f64> {
    rotation_matrix(psi) * skew(r)
}

/// Maps an angle into `(-pi, pi]`.
pub fn wrap_angle(a: f64) -> f64 {
    let w = (a + PI).rem_euclid(2.0 * PI) - PI;
    if w == -PI {
        PI
    } else {
        w
    }
}

/// `eta_dot = R(psi) nu`, `nu_dot = M^-1 (tau + delta - D nu)`.
pub fn plant_derivative(
    state: &VesselState,
    params: &VesselParams,
    tau: &ControlInput,
    delta: &Vector3<f64>,
) -> Result<VesselState> {
    let eta_dot = rotation_matrix(state.psi()) * state.nu;
    let rhs = tau.tau + delta - params.D * state.nu;
    let nu_dot = params.M.lu().solve(&rhs).ok_or(DpError::SingularMass)?;
    Ok(VesselState {
        eta: eta_dot,
        nu: nu_dot,
    })
}
