//! Environmental disturbance generators.
//!
//! Two regimes: a constant body-frame force/moment, and a first-order
//! Gauss-Markov bias `b_dot = -T^-1 b + Psi n` living in the earth frame and
//! rotated into the body frame as `delta = R(psi)^T b`.

use nalgebra::Vector3;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{DpError, Result};
use crate::vessel::rotation_matrix;

/// RNG stream reserved for disturbance noise; weight initialisation uses
/// stream 0 so a shared seed does not correlate the two.
pub const NOISE_STREAM: u64 = 1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstantDisturbance {
    pub delta: Vector3<f64>,
}

impl Default for ConstantDisturbance {
    fn default() -> Self {
        Self {
            delta: Vector3::new(1000.0, 2000.0, 1500.0),
        }
    }
}

pub fn constant_delta(cfg: &ConstantDisturbance, _t: f64) -> Vector3<f64> {
    cfg.delta
}

/// Gauss-Markov bias state with its own seeded generator.
///
/// `time_constants` and `amplitude` are the diagonals of `T` (seconds) and
/// `Psi` (N/sqrt(s), or N*m/sqrt(s) for yaw).
#[derive(Debug, Clone)]
pub struct MarkovBias {
    pub b: Vector3<f64>,
    pub time_constants: Vector3<f64>,
    pub amplitude: Vector3<f64>,
    seed: u64,
    rng: ChaCha8Rng,
}

impl MarkovBias {
    pub fn new(
        b: Vector3<f64>,
        time_constants: Vector3<f64>,
        amplitude: Vector3<f64>,
        seed: u64,
    ) -> Result<Self> {
        if time_constants.iter().any(|&t| !(t > 0.0 && t.is_finite())) {
            return Err(DpError::InvalidParameter(
                "Markov time constants must be positive".into(),
            ));
        }
        if amplitude.iter().any(|&a| !(a >= 0.0 && a.is_finite())) {
            return Err(DpError::InvalidParameter(
                "Markov noise amplitudes must be non-negative".into(),
            ));
        }
        if b.iter().any(|v| !v.is_finite()) {
            return Err(DpError::InvalidParameter("Markov bias must be finite".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(NOISE_STREAM);
        Ok(Self {
            b,
            time_constants,
            amplitude,
            seed,
            rng,
        })
    }

    /// Zero initial bias, `T = diag[1000]`, `Psi = diag[1000]`.
    pub fn reference(seed: u64) -> Self {
        Self::new(
            Vector3::zeros(),
            Vector3::repeat(1000.0),
            Vector3::repeat(1000.0),
            seed,
        )
        .expect("reference parameters are valid")
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Euler-Maruyama step: `b += dt * (-b / T) + Psi * sqrt(dt) * n`.
    pub fn step(&mut self, dt: f64) {
        let sq = dt.sqrt();
        for i in 0..3 {
            let n: f64 = StandardNormal.sample(&mut self.rng);
            self.b[i] += -dt * self.b[i] / self.time_constants[i] + self.amplitude[i] * sq * n;
        }
    }

    /// Stationary variance `Psi_ii^2 * T_ii / 2` of each continuous-time
    /// component.
    pub fn stationary_variance(&self) -> Vector3<f64> {
        self.amplitude
            .component_mul(&self.amplitude)
            .component_mul(&self.time_constants)
            * 0.5
    }
}

pub fn markov_bias_step(state: &MarkovBias, dt: f64) -> MarkovBias {
    let mut next = state.clone();
    next.step(dt);
    next
}

/// Body-frame disturbance `R(psi)^T b`.
pub fn markov_delta(state: &MarkovBias, psi: f64) -> Vector3<f64> {
    rotation_matrix(psi).transpose() * state.b
}

/// Componentwise bound `|delta_i(t)| <= delta_bar_i`. Only diagnostics use it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DisturbanceBound {
    pub delta_bar: Vector3<f64>,
}

impl DisturbanceBound {
    pub fn new(delta_bar: Vector3<f64>) -> Result<Self> {
        if delta_bar.iter().any(|&d| !(d > 0.0 && d.is_finite())) {
            return Err(DpError::InvalidParameter(
                "disturbance bound entries must be positive".into(),
            ));
        }
        Ok(Self { delta_bar })
    }
}

#[derive(Debug, Clone)]
pub enum Disturbance {
    Constant(ConstantDisturbance),
    Markov(MarkovBias),
}

impl Disturbance {
    /// Body-frame disturbance at time `t` for heading `psi`.
    pub fn sample(&self, t: f64, psi: f64) -> Vector3<f64> {
        match self {
            Disturbance::Constant(c) => constant_delta(c, t),
            Disturbance::Markov(m) => markov_delta(m, psi),
        }
    }

    pub fn advance(&mut self, dt: f64) {
        if let Disturbance::Markov(m) = self {
            m.step(dt);
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Disturbance::Constant(_) => "constant",
            Disturbance::Markov(_) => "markov",
        }
    }

    pub fn seed(&self) -> Option<u64> {
        match self {
            Disturbance::Constant(_) => None,
            Disturbance::Markov(m) => Some(m.seed()),
        }
    }
}
