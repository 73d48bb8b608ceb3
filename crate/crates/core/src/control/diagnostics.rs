//! Lyapunov-function evaluation, the ultimate-bound estimate and the
//! exponentially weighted L2 norm. None of this feeds back into control.

use nalgebra::{Matrix3, Vector3};

use super::backstep::{is_spd, BackstepGains, ErrorState};
use crate::approximators::AdaptiveWeights;
use crate::disturbance::DisturbanceBound;
use crate::error::{DpError, Result};
use crate::vessel::VesselParams;

/// Whether `V2a` includes the weight-error term.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeightTerm {
    /// Computed against a supplied reference `theta*`.
    Included,
    /// No reference: `V2a` equals `V2`.
    Omitted,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LyapunovTrace {
    pub v1: f64,
    pub v2: f64,
    pub v2a: f64,
    pub weight_term: WeightTerm,
}

impl LyapunovTrace {
    pub fn is_partial(&self) -> bool {
        self.weight_term == WeightTerm::Omitted
    }
}

/// `V1 = z1'z1/2`, `V2 = V1 + z2'M z2/2`,
/// `V2a = V2 + sum_i |theta_hat_i - theta*_i|^2 / (2 gamma_i)`.
pub fn lyapunov_eval(
    errors: &ErrorState,
    params: &VesselParams,
    weights: &AdaptiveWeights,
    gains: &BackstepGains,
    theta_star: Option<&AdaptiveWeights>,
) -> Result<LyapunovTrace> {
    let v1 = 0.5 * errors.z1.norm_squared();
    let v2 = v1 + 0.5 * errors.z2.dot(&(params.M * errors.z2));
    let (v2a, weight_term) = match theta_star {
        None => (v2, WeightTerm::Omitted),
        Some(star) => {
            if star.node_count() != weights.node_count() {
                return Err(DpError::DimensionMismatch {
                    expected: weights.node_count(),
                    found: star.node_count(),
                });
            }
            let mut term = 0.0;
            for i in 0..3 {
                let sq: f64 = weights.theta[i]
                    .iter()
                    .zip(&star.theta[i])
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum();
                term += 0.5 * sq / gains.gamma[i];
            }
            (v2 + term, WeightTerm::Included)
        }
    };
    Ok(LyapunovTrace {
        v1,
        v2,
        v2a,
        weight_term,
    })
}

/// Function the compensator is meant to reproduce:
/// `D nu + M alpha1_dot - sgn(z2) delta_bar`.
pub fn approximation_target(
    params: &VesselParams,
    nu: &Vector3<f64>,
    alpha1_dot: &Vector3<f64>,
    z2: &Vector3<f64>,
    bound: &DisturbanceBound,
) -> Vector3<f64> {
    let sgn = z2.map(|v| if v > 0.0 { 1.0 } else if v < 0.0 { -1.0 } else { 0.0 });
    params.D * nu + params.M * alpha1_dot - sgn.component_mul(&bound.delta_bar)
}

/// Assumed quantities for the ultimate-bound estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundInputs {
    pub k1: Matrix3<f64>,
    pub k2: Matrix3<f64>,
    pub mass: Matrix3<f64>,
    pub sigma: [f64; 3],
    /// Norm bound on the approximation error vector.
    pub e_star: f64,
    /// Norm bounds on the ideal weights.
    pub theta_m: [f64; 3],
    /// Extra rate cap in the min; `+inf` leaves it inactive.
    pub beta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UltimateBound {
    pub phi: f64,
    pub c: f64,
    pub c_over_phi: f64,
    /// Bound on `|z1(t)|`.
    pub z1_bound: f64,
    /// `sqrt(2 c / phi)`, the limit as `t -> inf`.
    pub asymptote: f64,
}

fn lambda_min_sym(m: &Matrix3<f64>) -> f64 {
    m.symmetric_eigen().eigenvalues.min()
}

/// Smallest eigenvalue of `(K2 - I/2) M^-1`, computed on the similar
/// symmetric matrix `M^-1/2 (K2 - I/2) M^-1/2`.
fn lambda_min_damped(k2: &Matrix3<f64>, mass: &Matrix3<f64>) -> Result<f64> {
    if !is_spd(mass) {
        return Err(DpError::InvalidParameter("M must be symmetric positive definite".into()));
    }
    let shifted = k2 - Matrix3::identity() * 0.5;
    if !is_spd(&shifted) {
        return Err(DpError::InvalidGain("K2 - I/2 is not positive definite".into()));
    }
    let eig = mass.symmetric_eigen();
    let inv_sqrt = eig.eigenvectors
        * Matrix3::from_diagonal(&eig.eigenvalues.map(|l| 1.0 / l.sqrt()))
        * eig.eigenvectors.transpose();
    let sim = inv_sqrt * shifted * inv_sqrt;
    Ok(lambda_min_sym(&(0.5 * (sim + sim.transpose()))))
}

pub fn ultimate_bound(inputs: &BoundInputs, v2a0: f64, t: f64) -> Result<UltimateBound> {
    if !is_spd(&inputs.k1) {
        return Err(DpError::InvalidGain("K1 must be symmetric positive definite".into()));
    }
    let damped = lambda_min_damped(&inputs.k2, &inputs.mass)?;
    let phi = (2.0 * lambda_min_sym(&inputs.k1))
        .min(2.0 * damped)
        .min(inputs.beta);
    if !(phi > 0.0) {
        return Err(DpError::InvalidGain(format!("decay rate must be positive, got {phi}")));
    }
    let c = 0.5 * inputs.e_star * inputs.e_star
        + (0..3)
            .map(|i| 0.5 * inputs.sigma[i] * inputs.theta_m[i] * inputs.theta_m[i])
            .sum::<f64>();
    let c_over_phi = c / phi;
    let sq = 2.0 * c_over_phi + 2.0 * (v2a0 - c_over_phi) * (-phi * t).exp();
    Ok(UltimateBound {
        phi,
        c,
        c_over_phi,
        z1_bound: sq.max(0.0).sqrt(),
        asymptote: (2.0 * c_over_phi).sqrt(),
    })
}

/// `sqrt( int_0^t exp(-delta (t - s)) |x(s)|^2 ds )` by the trapezoid rule
/// over uniformly spaced samples, `t = (n - 1) dt`.
pub fn weighted_l2_norm<S: AsRef<[f64]>>(samples: &[S], dt: f64, delta: f64) -> Result<f64> {
    if samples.is_empty() {
        return Err(DpError::EmptySeries);
    }
    if !(dt > 0.0) || !(delta >= 0.0) {
        return Err(DpError::InvalidParameter("need dt > 0 and delta >= 0".into()));
    }
    let n = samples.len();
    let t = (n - 1) as f64 * dt;
    let integrand = |k: usize| {
        let x = samples[k].as_ref();
        let sq: f64 = x.iter().map(|v| v * v).sum();
        (-delta * (t - k as f64 * dt)).exp() * sq
    };
    let mut acc = 0.0;
    for k in 1..n {
        acc += 0.5 * dt * (integrand(k - 1) + integrand(k));
    }
    Ok(acc.sqrt())
}
