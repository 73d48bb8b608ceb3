use nalgebra::Vector3;

use crate::error::{DpError, Result};
use crate::vessel::ControlInput;

/// Symmetric per-axis actuator limits; `+inf` disables an axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SaturationLimits {
    pub tau_max: Vector3<f64>,
}

impl SaturationLimits {
    pub fn new(tau_max: Vector3<f64>) -> Result<Self> {
        if tau_max.iter().any(|&t| !(t > 0.0) || t.is_nan()) {
            return Err(DpError::InvalidParameter(
                "saturation limits must be positive or +inf".into(),
            ));
        }
        Ok(Self { tau_max })
    }

    pub fn disabled() -> Self {
        Self {
            tau_max: Vector3::repeat(f64::INFINITY),
        }
    }

    pub fn is_disabled(&self) -> bool {
        self.tau_max.iter().all(|t| t.is_infinite())
    }
}

impl Default for SaturationLimits {
    fn default() -> Self {
        Self::disabled()
    }
}

pub fn saturate(tau: &ControlInput, limits: &SaturationLimits) -> ControlInput {
    ControlInput::new(tau.tau.zip_map(&limits.tau_max, |t, m| t.clamp(-m, m)))
}
