//! Controllers and closed-loop diagnostics.

mod backstep;
mod diagnostics;
mod pid;
mod saturation;

pub use backstep::{
    adapt_weights, backstep_control, compute_alpha1, compute_alpha1_dot, network_input,
    weight_derivative, weights_derivative, AdaptationLaw, BackstepGains, ErrorState, StepScheme,
};
pub use diagnostics::{
    approximation_target, lyapunov_eval, ultimate_bound, weighted_l2_norm, BoundInputs,
    LyapunovTrace, UltimateBound, WeightTerm,
};
pub use pid::{pid_control, ErrorFrame, PidController, PidGains};
pub use saturation::{saturate, SaturationLimits};
