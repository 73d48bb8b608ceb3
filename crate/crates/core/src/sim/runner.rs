//! Closed-loop simulation driver.

use nalgebra::Vector3;
use thiserror::Error;

use super::config::{ConfigError, ControllerKind, DisturbanceSpec, ScenarioConfig};
use super::metrics::{compute_metrics, RunMetrics};
use super::trace::{RunTrace, TraceHeader, TraceRow};
use crate::approximators::{AdaptiveWeights, RbfNetwork};
use crate::control::{
    backstep_control, lyapunov_eval, network_input, saturate, weights_derivative, ErrorState,
    PidController,
};
use crate::error::DpError;
use crate::integrator::{rk4_step, OdeState};
use crate::vessel::{plant_derivative, ControlInput, VesselState};

#[derive(Debug, Error)]
pub enum SimError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Model(DpError),
    #[error("state diverged stepping from t = {}; last finite sample: x={:.4e} y={:.4e} psi={:.4e}",
        .last_row.t, .last_row.eta[0], .last_row.eta[1], .last_row.eta[2])]
    Diverged { last_row: Box<TraceRow> },
}

impl From<DpError> for SimError {
    fn from(e: DpError) -> Self {
        SimError::Model(e)
    }
}

#[derive(Debug, Clone)]
struct LoopState {
    plant: VesselState,
    /// Present only while the weights are being adapted.
    weights: Option<AdaptiveWeights>,
}

impl OdeState for LoopState {
    fn axpy(&mut self, a: f64, x: &Self) {
        self.plant.axpy(a, &x.plant);
        if let (Some(w), Some(dw)) = (self.weights.as_mut(), x.weights.as_ref()) {
            w.axpy(a, dw);
        }
    }

    fn is_finite(&self) -> bool {
        self.plant.is_finite() && self.weights.as_ref().is_none_or(|w| w.is_finite())
    }
}

enum Law {
    Pid(PidController),
    Neural {
        net: RbfNetwork,
        /// Weights used when adaptation is off.
        frozen: Option<AdaptiveWeights>,
    },
}

struct ClosedLoop<'a> {
    cfg: &'a ScenarioConfig,
    eta_d: Vector3<f64>,
    law: Law,
    basis: Vec<f64>,
}

impl ClosedLoop<'_> {
    /// Saturated control and the state derivative at `s`.
    fn evaluate(&mut self, s: &LoopState, delta: &Vector3<f64>) -> Result<(LoopState, ControlInput), DpError> {
        let cfg = self.cfg;
        let ctl = &cfg.controller;
        let (eta, nu) = (&s.plant.eta, &s.plant.nu);
        let (raw, dweights) = match &self.law {
            Law::Pid(pid) => (pid.output(eta, &self.eta_d, nu), None),
            Law::Neural { net, frozen } => {
                let err = ErrorState::compute(&ctl.backstep.k1, eta, nu, &self.eta_d);
                let z = network_input(eta, nu, &err.alpha1);
                net.basis_into(&z, &mut self.basis)?;
                let weights = s
                    .weights
                    .as_ref()
                    .or(frozen.as_ref())
                    .expect("neural law always carries weights");
                let tau = backstep_control(&ctl.backstep, eta[2], &err.z1, &err.z2, &self.basis, weights)?;
                let dw = match s.weights {
                    Some(ref w) => Some(weights_derivative(&ctl.backstep, ctl.law, w, &self.basis, &err.z2)?),
                    None => None,
                };
                (tau, dw)
            }
        };
        let tau = saturate(&raw, &ctl.saturation);
        let plant = plant_derivative(&s.plant, &cfg.plant, &tau, delta)?;
        Ok((LoopState { plant, weights: dweights }, tau))
    }

    fn weight_norms(&self, s: &LoopState) -> [f64; 3] {
        match (&self.law, &s.weights) {
            (_, Some(w)) => w.norms(),
            (Law::Neural { frozen: Some(w), .. }, None) => w.norms(),
            _ => [0.0; 3],
        }
    }

    fn row(&self, t: f64, s: &LoopState, tau: &ControlInput, delta: &Vector3<f64>) -> Result<TraceRow, DpError> {
        let cfg = self.cfg;
        let err = ErrorState::compute(&cfg.controller.backstep.k1, &s.plant.eta, &s.plant.nu, &self.eta_d);
        let lyap = lyapunov_eval(
            &err,
            &cfg.plant,
            &AdaptiveWeights::zeros(0),
            &cfg.controller.backstep,
            None,
        )?;
        Ok(TraceRow {
            t,
            eta: s.plant.eta.into(),
            nu: s.plant.nu.into(),
            tau: tau.tau.into(),
            delta: (*delta).into(),
            theta_norms: self.weight_norms(s),
            v1: lyap.v1,
            v2a_partial: lyap.v2a,
        })
    }
}

fn header_for(cfg: &ScenarioConfig, nodes: usize) -> TraceHeader {
    let ctl = &cfg.controller;
    TraceHeader {
        controller: ctl.kind.name().to_string(),
        adaptation_law: if ctl.kind == ControllerKind::AdaptiveNn {
            ctl.law.name().to_string()
        } else {
            "none".to_string()
        },
        disturbance: cfg.disturbance.kind().to_string(),
        weight_seed: cfg.weight_seed,
        noise_seed: cfg.disturbance.seed(),
        dt: cfg.dt,
        decimate: cfg.decimate,
        nodes,
        target: cfg.target.to_vector().into(),
        ..TraceHeader::default()
    }
}

pub type RunOutcome = Result<(RunTrace, RunMetrics), SimError>;

/// Runs one scenario. Metrics are computed from every integration step;
/// the returned trace keeps every `decimate`-th sample plus the last one.
pub fn run_simulation(cfg: &ScenarioConfig) -> RunOutcome {
    let mut cfg_checked = cfg.clone();
    cfg_checked.validate()?;
    let cfg = &cfg_checked;
    let ctl = &cfg.controller;

    let (law, weights, nodes) = if ctl.kind.uses_network() {
        let net = cfg.rbf.build()?;
        let l = net.node_count();
        let w0 = AdaptiveWeights::random(l, cfg.weight_seed);
        let (frozen, live) = match ctl.kind {
            ControllerKind::AdaptiveNn => (None, Some(w0)),
            _ => (Some(w0), None),
        };
        (Law::Neural { net, frozen }, live, l)
    } else {
        (Law::Pid(PidController::new(ctl.pid, ctl.pid_frame)), None, 0)
    };

    let mut lp = ClosedLoop {
        cfg,
        eta_d: cfg.target.to_vector(),
        law,
        basis: vec![0.0; nodes],
    };
    let mut disturbance = cfg.disturbance.instantiate()?;
    let mut state = LoopState {
        plant: VesselState::new(cfg.initial_pose, cfg.initial_velocity),
        weights,
    };

    let steps = cfg.steps();
    let mut rows = Vec::with_capacity(steps + 1);
    for k in 0..steps {
        let t = k as f64 * cfg.dt;
        let delta = disturbance.sample(t, state.plant.psi());
        if let Law::Pid(pid) = &mut lp.law {
            let e = pid.error(&state.plant.eta, &lp.eta_d);
            pid.advance_integral(e, cfg.dt);
        }
        let mut first_tau = None;
        let next = rk4_step(&state, cfg.dt, |s| {
            let (d, tau) = lp.evaluate(s, &delta)?;
            first_tau.get_or_insert(tau);
            Ok(d)
        });
        let tau = first_tau.unwrap_or_else(ControlInput::zeros);
        let row = lp.row(t, &state, &tau, &delta)?;
        rows.push(row);
        state = match next {
            Ok(s) => s,
            Err(DpError::NonFiniteState) => return Err(SimError::Diverged { last_row: Box::new(row) }),
            Err(e) => return Err(e.into()),
        };
        disturbance.advance(cfg.dt);
    }
    let t_end = steps as f64 * cfg.dt;
    let delta = disturbance.sample(t_end, state.plant.psi());
    let (_, tau) = lp.evaluate(&state, &delta)?;
    rows.push(lp.row(t_end, &state, &tau, &delta)?);

    let header = header_for(cfg, nodes);
    let metrics = compute_metrics(&rows, &header.target, &cfg.metrics)?;
    let last = rows.len() - 1;
    let kept = rows
        .into_iter()
        .enumerate()
        .filter(|(k, _)| k % cfg.decimate == 0 || *k == last)
        .map(|(_, r)| r)
        .collect();
    Ok((RunTrace { header, rows: kept }, metrics))
}

/// The six controller/disturbance combinations derived from `base`.
/// Returns `(name, scenario)` pairs, named `{controller}-{disturbance}`.
pub fn canonical_scenarios(base: &ScenarioConfig, noise_seed: u64) -> Vec<(String, ScenarioConfig)> {
    let mut out = Vec::with_capacity(6);
    for kind in ControllerKind::ALL {
        for dist in [DisturbanceSpec::default(), DisturbanceSpec::reference_markov(noise_seed)] {
            let mut cfg = base.clone();
            cfg.controller.kind = kind;
            cfg.disturbance = dist;
            out.push((format!("{}-{}", kind.name(), dist.kind()), cfg));
        }
    }
    out
}

/// Runs the six canonical scenarios, in parallel when enabled.
pub fn run_canonical(
    base: &ScenarioConfig,
    noise_seed: u64,
) -> Vec<(String, RunOutcome)> {
    let jobs = canonical_scenarios(base, noise_seed);
    crate::par::map_collect(&jobs, |(name, cfg)| (name.clone(), run_simulation(cfg)))
}
