//! Adaptive backstepping with an RBF compensator.
//!
//! ```text
//! z1     = eta - eta_d
//! alpha1 = -R^T K1 z1
//! z2     = nu - alpha1
//! tau    = -R^T z1 - K2 z2 + Theta_hat^T S(Z),   Z = [eta, nu, alpha1]
//! ```
//!
//! The compensator approximates `D nu + M alpha1_dot - sgn(z2) delta_bar`.
//! With `+Theta_hat^T S` in the control law, the update that cancels the
//! weight-error cross term in `V2a` is `theta_dot_i = -Gamma_i (S z2_i +
//! sigma_i theta_i)`; that is [`AdaptationLaw::Lyapunov`] and the default.

use nalgebra::{Matrix3, Vector3};

use crate::approximators::AdaptiveWeights;
use crate::error::{DpError, Result};
use crate::integrator::{rk4_step, OdeState};
use crate::vessel::{rotation_matrix, rotation_rate_matrix, ControlInput};

/// Sign convention of the weight update.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AdaptationLaw {
    /// `-Gamma (S z2 + sigma theta)`: gradient consistent with the control
    /// law, leakage toward zero.
    #[default]
    Lyapunov,
    /// `Gamma (S z2 - sigma theta)`: leakage toward zero, gradient sign
    /// opposite to the one the control law needs.
    SigmaModification,
    /// `Gamma (S z2 + sigma theta)`: leakage term is destabilising.
    PositiveLeakage,
}

impl AdaptationLaw {
    pub fn name(self) -> &'static str {
        match self {
            AdaptationLaw::Lyapunov => "lyapunov",
            AdaptationLaw::SigmaModification => "sigma-modification",
            AdaptationLaw::PositiveLeakage => "positive-leakage",
        }
    }

    /// `(gradient sign, leakage sign)` multiplying `Gamma S z2` and `Gamma sigma theta`.
    fn signs(self) -> (f64, f64) {
        match self {
            AdaptationLaw::Lyapunov => (-1.0, -1.0),
            AdaptationLaw::SigmaModification => (1.0, -1.0),
            AdaptationLaw::PositiveLeakage => (1.0, 1.0),
        }
    }
}

/// Design gains. `gamma[i]` is the diagonal of `Gamma_i = gamma[i] * I`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BackstepGains {
    pub k1: Matrix3<f64>,
    pub k2: Matrix3<f64>,
    pub gamma: [f64; 3],
    pub sigma: [f64; 3],
}

impl BackstepGains {
    /// Gains of the reference station-keeping runs.
    pub fn reference() -> Self {
        Self {
            k1: Matrix3::from_diagonal(&Vector3::new(0.037, 0.063, 0.832)),
            k2: Matrix3::from_diagonal(&Vector3::new(5e4, 6e4, 5.4e4)),
            gamma: [0.1; 3],
            sigma: [2.13, 2.13, 0.302],
        }
    }

    /// Checks definiteness and positivity; returns non-fatal warnings.
    pub fn validate(&self) -> Result<Vec<String>> {
        if !is_spd(&self.k1) {
            return Err(DpError::InvalidGain("K1 must be symmetric positive definite".into()));
        }
        if !is_spd(&self.k2) {
            return Err(DpError::InvalidGain("K2 must be symmetric positive definite".into()));
        }
        if self.gamma.iter().any(|&g| !(g > 0.0 && g.is_finite())) {
            return Err(DpError::InvalidGain("Gamma must be positive definite".into()));
        }
        if self.sigma.iter().any(|&s| !(s > 0.0 && s.is_finite())) {
            return Err(DpError::InvalidGain("sigma must be positive".into()));
        }
        let mut warnings = Vec::new();
        if !is_spd(&(self.k2 - Matrix3::identity() * 0.5)) {
            warnings.push("K2 - I/2 is not positive definite; the ultimate bound does not apply".into());
        }
        Ok(warnings)
    }
}

impl Default for BackstepGains {
    fn default() -> Self {
        Self::reference()
    }
}

pub(crate) fn is_spd(m: &Matrix3<f64>) -> bool {
    let scale = m.amax().max(f64::MIN_POSITIVE);
    (m - m.transpose()).amax() <= 1e-12 * scale && m.cholesky().is_some()
}

/// Backstepping error coordinates at one instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorState {
    pub z1: Vector3<f64>,
    pub z2: Vector3<f64>,
    pub alpha1: Vector3<f64>,
    pub alpha1_dot: Vector3<f64>,
}

impl ErrorState {
    /// Errors for a constant target pose.
    pub fn compute(k1: &Matrix3<f64>, eta: &Vector3<f64>, nu: &Vector3<f64>, eta_d: &Vector3<f64>) -> Self {
        let z1 = eta - eta_d;
        let alpha1 = compute_alpha1(k1, eta[2], &z1);
        Self {
            z1,
            z2: nu - alpha1,
            alpha1,
            alpha1_dot: compute_alpha1_dot(k1, eta[2], nu[2], &z1, nu),
        }
    }
}

/// Virtual velocity command `-R^T(psi) K1 z1`.
pub fn compute_alpha1(k1: &Matrix3<f64>, psi: f64, z1: &Vector3<f64>) -> Vector3<f64> {
    -(rotation_matrix(psi).transpose() * (k1 * z1))
}

/// Analytic time derivative of `alpha1` for a constant target, using
/// `z1_dot = R nu`.
pub fn compute_alpha1_dot(
    k1: &Matrix3<f64>,
    psi: f64,
    r: f64,
    z1: &Vector3<f64>,
    nu: &Vector3<f64>,
) -> Vector3<f64> {
    let rot = rotation_matrix(psi);
    let rot_dot = rotation_rate_matrix(psi, r);
    -(rot_dot.transpose() * (k1 * z1)) - rot.transpose() * (k1 * (rot * nu))
}

/// Network input `[eta, nu, alpha1]`.
pub fn network_input(eta: &Vector3<f64>, nu: &Vector3<f64>, alpha1: &Vector3<f64>) -> [f64; 9] {
    [
        eta[0], eta[1], eta[2], nu[0], nu[1], nu[2], alpha1[0], alpha1[1], alpha1[2],
    ]
}

pub fn backstep_control(
    gains: &BackstepGains,
    psi: f64,
    z1: &Vector3<f64>,
    z2: &Vector3<f64>,
    basis: &[f64],
    weights: &AdaptiveWeights,
) -> Result<ControlInput> {
    let nn = weights.apply(basis)?;
    Ok(ControlInput::new(
        -(rotation_matrix(psi).transpose() * z1) - gains.k2 * z2 + nn,
    ))
}

/// One axis of the update law, written into `out`.
pub fn weight_derivative(
    law: AdaptationLaw,
    gamma: f64,
    sigma: f64,
    basis: &[f64],
    z2: f64,
    theta: &[f64],
    out: &mut [f64],
) {
    let (grad, leak) = law.signs();
    let a = gamma * grad * z2;
    let b = gamma * leak * sigma;
    for ((o, g), t) in out.iter_mut().zip(basis).zip(theta) {
        *o = a * g + b * t;
    }
}

/// All three axes of the update law.
pub fn weights_derivative(
    gains: &BackstepGains,
    law: AdaptationLaw,
    weights: &AdaptiveWeights,
    basis: &[f64],
    z2: &Vector3<f64>,
) -> Result<AdaptiveWeights> {
    let l = weights.node_count();
    if basis.len() != l {
        return Err(DpError::DimensionMismatch {
            expected: l,
            found: basis.len(),
        });
    }
    let mut d = AdaptiveWeights::zeros(l);
    for i in 0..3 {
        weight_derivative(
            law,
            gains.gamma[i],
            gains.sigma[i],
            basis,
            z2[i],
            &weights.theta[i],
            &mut d.theta[i],
        );
    }
    Ok(d)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepScheme {
    Euler,
    Rk4,
}

/// Advances the weights over `dt` with the basis and `z2` held fixed.
/// Inside a simulation the weights are integrated jointly with the plant
/// instead; this is the standalone form.
pub fn adapt_weights(
    gains: &BackstepGains,
    law: AdaptationLaw,
    weights: &AdaptiveWeights,
    basis: &[f64],
    z2: &Vector3<f64>,
    dt: f64,
    scheme: StepScheme,
) -> Result<AdaptiveWeights> {
    if !(dt > 0.0) {
        return Err(DpError::InvalidParameter(format!("dt must be positive, got {dt}")));
    }
    let f = |w: &AdaptiveWeights| weights_derivative(gains, law, w, basis, z2);
    let next = match scheme {
        StepScheme::Euler => {
            let mut next = weights.clone();
            next.axpy(dt, &f(weights)?);
            next
        }
        StepScheme::Rk4 => rk4_step(weights, dt, f)?,
    };
    if next.is_finite() {
        Ok(next)
    } else {
        Err(DpError::NonFiniteState)
    }
}
