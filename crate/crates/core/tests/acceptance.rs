//! Acceptance report: one PASS/FAIL line per criterion.
//!
//! Every criterion always runs and prints its measured values. The process
//! exits non-zero on failures only when `DPSIM_ACCEPTANCE_STRICT` is set, so
//! the report can live in the ordinary test run.

use std::time::{Duration, Instant};

use nalgebra::{Matrix3, Vector1, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use dpsim::approximators::{
    anfis_forward, build_grid_centers, gaussian_basis, AnfisModel, AnfisRule, BellMembership,
    GridCenters, RbfNetwork,
};
use dpsim::control::{
    approximation_target, weight_derivative, weighted_l2_norm, AdaptationLaw,
};
use dpsim::disturbance::{DisturbanceBound, MarkovBias};
use dpsim::integrator::rk4_step;
use dpsim::sim::{
    run_simulation, ControllerKind, DisturbanceSpec, RunMetrics, RunTrace, ScenarioConfig,
};
use dpsim::vessel::{rotation_matrix, VesselParams};

const SEEDS: [u64; 5] = [1, 2, 3, 4, 5];

type ReferenceRun = (u64, Result<(RunTrace, RunMetrics), String>, Duration);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn timed(f: impl FnOnce() -> Outcome) -> (Outcome, Duration) {
    let start = Instant::now();
    let o = f();
    (o, start.elapsed())
}

fn rotation_kinematics() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let (mut orth, mut det) = (0.0f64, 0.0f64);
    for _ in 0..10_000 {
        let psi = rng.random_range(-100.0..100.0);
        let r = rotation_matrix(psi);
        orth = orth.max((r.transpose() * r - Matrix3::identity()).amax());
        det = det.max((r.determinant() - 1.0).abs());
    }
    outcome(
        orth < 1e-12 && det < 1e-12,
        format!("max |R'R - I| = {orth:.2e}, max |det R - 1| = {det:.2e}"),
    )
}

fn rk4_order() -> Outcome {
    let err = |dt: f64| {
        let n = (1.0 / dt).round() as usize;
        let mut x = Vector1::new(1.0);
        for _ in 0..n {
            x = rk4_step(&x, dt, |s| Ok(-s)).unwrap();
        }
        (x[0] - (-1.0f64).exp()).abs()
    };
    let dts = [0.2, 0.1, 0.05, 0.025];
    let errs: Vec<f64> = dts.iter().map(|&h| err(h)).collect();
    let orders: Vec<f64> = errs.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
    let p = orders[orders.len() - 1];
    outcome(
        (3.7..=4.3).contains(&p),
        format!("observed orders {:?}", orders.iter().map(|o| format!("{o:.3}")).collect::<Vec<_>>()),
    )
}

fn markov_statistics() -> Outcome {
    let t_const = Vector3::repeat(1000.0);
    let b0 = Vector3::new(1000.0, -500.0, 250.0);
    let mut m = MarkovBias::new(b0, t_const, Vector3::zeros(), 0).unwrap();
    let dt = 0.1;
    let (mut sx, mut sy, mut sxx, mut sxy, mut n) = (0.0, [0.0; 3], 0.0, [0.0; 3], 0.0);
    for k in 0..=20_000 {
        let t = k as f64 * dt;
        sx += t;
        sxx += t * t;
        for i in 0..3 {
            let y = (m.b[i] / b0[i]).ln();
            sy[i] += y;
            sxy[i] += t * y;
        }
        n += 1.0;
        m.step(dt);
    }
    let taus: Vec<f64> = (0..3)
        .map(|i| {
            let slope = (n * sxy[i] - sx * sy[i]) / (n * sxx - sx * sx);
            -1.0 / slope
        })
        .collect();
    let decay_ok = taus.iter().all(|tau| (tau / 1000.0 - 1.0).abs() < 0.02);

    let mut m = MarkovBias::new(Vector3::zeros(), t_const, Vector3::repeat(1000.0), 42).unwrap();
    let target = m.stationary_variance();
    let steps = 100_000;
    let dt = 10.0;
    let mut sum = Vector3::zeros();
    let mut sq = Vector3::zeros();
    for _ in 0..steps {
        m.step(dt);
        sum += m.b;
        sq += m.b.component_mul(&m.b);
    }
    let mean = sum / steps as f64;
    let var = sq / steps as f64 - mean.component_mul(&mean);
    let rel: Vec<f64> = (0..3).map(|i| var[i] / target[i] - 1.0).collect();
    let var_ok = rel.iter().all(|r| r.abs() < 0.2);
    outcome(
        decay_ok && var_ok,
        format!(
            "decay constants {:.2?} s; variance / (Psi^2 T/2) - 1 = {:.3?} (dt = {dt} s, {steps} steps)",
            taus, rel
        ),
    )
}

fn adaptive_constant(seed: u64) -> ScenarioConfig {
    let mut cfg = ScenarioConfig::default();
    cfg.controller.kind = ControllerKind::AdaptiveNn;
    cfg.weight_seed = seed;
    cfg
}

fn reference_runs() -> Vec<ReferenceRun> {
    SEEDS
        .iter()
        .map(|&s| {
            let start = Instant::now();
            let r = run_simulation(&adaptive_constant(s)).map_err(|e| e.to_string());
            (s, r, start.elapsed())
        })
        .collect()
}

fn scenario_reproduction(runs: &[ReferenceRun]) -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for (seed, r, took) in runs {
        match r {
            Ok((_, m)) => {
                let ok = (40.0..=160.0).contains(&m.convergence_time);
                pass &= ok && took.as_secs_f64() < 60.0;
                parts.push(format!(
                    "seed {seed}: t_conv={} final |p|={:.3} m |psi|={:.3} deg ({:.1} s)",
                    if m.converged() { format!("{:.1}", m.convergence_time) } else { "inf".into() },
                    m.final_pos_error,
                    m.final_psi_error.abs().to_degrees(),
                    took.as_secs_f64()
                ));
            }
            Err(e) => {
                pass = false;
                parts.push(format!("seed {seed}: {e}"));
            }
        }
    }
    outcome(pass, parts.join("; "))
}

fn weight_boundedness(runs: &[ReferenceRun]) -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for (seed, r, _) in runs {
        let Ok((trace, _)) = r else {
            pass = false;
            parts.push(format!("seed {seed}: aborted"));
            continue;
        };
        let at20 = trace
            .rows
            .iter()
            .find(|row| row.t >= 20.0 - 1e-9)
            .expect("horizon covers t = 20 s")
            .theta_norms;
        let mut worst = 0.0f64;
        for row in trace.rows.iter().filter(|row| row.t >= 20.0 - 1e-9) {
            for i in 0..3 {
                worst = worst.max(row.theta_norms[i] / at20[i]);
            }
        }
        pass &= worst < 10.0;
        parts.push(format!("seed {seed}: max |theta|/|theta(20)| = {worst:.3}"));
    }
    outcome(pass, parts.join("; "))
}

fn ranking_under_markov() -> Outcome {
    let seed = 1;
    let rms = |kind: ControllerKind| {
        let mut cfg = ScenarioConfig::default();
        cfg.controller.kind = kind;
        cfg.weight_seed = seed;
        cfg.disturbance = DisturbanceSpec::reference_markov(seed);
        run_simulation(&cfg).map(|(_, m)| m.steady_rms_pos)
    };
    match (rms(ControllerKind::AdaptiveNn), rms(ControllerKind::Pid), rms(ControllerKind::NnFixed)) {
        (Ok(a), Ok(p), Ok(f)) => outcome(
            a < p && a < f,
            format!(
                "steady rms pos: adaptive-nn {a:.4} m, pid {p:.4} m, nn-fixed {f:.4} m; \
                 margins pid - adaptive = {:.4}, nn-fixed - adaptive = {:.4}, nn-fixed <= pid: {}",
                p - a,
                f - a,
                f <= p
            ),
        ),
        (a, p, f) => outcome(false, format!("run failed: {:?} {:?} {:?}", a.err(), p.err(), f.err())),
    }
}

fn basis_and_normalization() -> Outcome {
    let grid = build_grid_centers(&[(-1.0, 1.0), (-1.0, 1.0)], 2, 16).unwrap();
    let net = RbfNetwork::uniform(grid, 1.0).unwrap();
    let g = gaussian_basis(&net, &[-1.0, 1.0]).unwrap()[1];
    let basis_ok = (g - 0.3989423).abs() < 1e-6;

    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let inputs = rng.random_range(1..=3usize);
        let per_input = rng.random_range(1..=3usize);
        let memberships: Vec<Vec<BellMembership>> = (0..inputs)
            .map(|_| {
                (0..per_input)
                    .map(|_| {
                        BellMembership::new(
                            rng.random_range(0.2..3.0),
                            rng.random_range(0.5..4.0),
                            rng.random_range(-2.0..2.0),
                        )
                        .unwrap()
                    })
                    .collect()
            })
            .collect();
        let rules: Vec<AnfisRule> = (0..rng.random_range(1..=6usize))
            .map(|_| AnfisRule {
                antecedents: (0..inputs).map(|_| rng.random_range(0..per_input)).collect(),
                consequents: vec![(0..=inputs).map(|_| rng.random_range(-5.0..5.0)).collect()],
            })
            .collect();
        let model = AnfisModel::new(memberships, rules).unwrap();
        let x: Vec<f64> = (0..inputs).map(|_| rng.random_range(-3.0..3.0)).collect();
        let layers = anfis_forward(&model, &x).unwrap();
        worst = worst.max((layers.normalized.iter().sum::<f64>() - 1.0).abs());
    }
    outcome(
        basis_ok && worst < 1e-12,
        format!("g(center) = {g:.9}; max |sum w_bar - 1| over 1000 models = {worst:.2e}"),
    )
}

fn weighted_norm() -> Outcome {
    let samples = vec![[1.0]; 1001];
    let v = weighted_l2_norm(&samples, 0.01, 0.1).unwrap();
    let closed = ((1.0 - (-1.0f64).exp()) / 0.1).sqrt();
    outcome(
        (v - 2.5142).abs() < 1e-3,
        format!("quadrature {v:.6}, closed form {closed:.6}"),
    )
}

/// Single-axis closed loop with a one-node network and leakage law:
/// checks `V(t) - V(0) <= int_0^t (-k1 z1^2 - k2 z2^2 - z2 E - sigma theta_err theta_hat)`.
fn lyapunov_oracle() -> Outcome {
    let (m, d) = (50.0, 8.0);
    let (k1, k2) = (0.4, 3.0);
    let (gamma, sigma) = (0.5, 0.2);
    let disturbance = 1.5;
    let theta_star = 0.7;
    let dt = 0.01;
    let steps = 6000;

    let params = VesselParams::new(
        Matrix3::from_diagonal(&Vector3::new(m, 1.0, 1.0)),
        Matrix3::from_diagonal(&Vector3::new(d, 1.0, 1.0)),
    )
    .unwrap();
    let bound = DisturbanceBound::new(Vector3::repeat(disturbance)).unwrap();
    let centers = GridCenters {
        dim: 3,
        coords: vec![0.5, -0.2, 0.1],
    };
    let net = RbfNetwork::uniform(centers, 1.0).unwrap();

    // state [eta, nu, theta_hat]
    let signals = |s: &Vector3<f64>| {
        let (eta, nu, th) = (s[0], s[1], s[2]);
        let z1 = eta;
        let alpha1 = -k1 * z1;
        let z2 = nu - alpha1;
        let alpha1_dot = -k1 * nu;
        let g = gaussian_basis(&net, &[eta, nu, alpha1]).unwrap()[0];
        (z1, z2, alpha1_dot, g, th)
    };
    let deriv = |s: &Vector3<f64>| {
        let (z1, z2, _, g, th) = signals(s);
        let tau = -z1 - k2 * z2 + th * g;
        let nu_dot = (tau + disturbance - d * s[1]) / m;
        let mut dth = [0.0];
        weight_derivative(AdaptationLaw::Lyapunov, gamma, sigma, &[g], z2, &[th], &mut dth);
        Ok(Vector3::new(s[1], nu_dot, dth[0]))
    };
    let lyap = |s: &Vector3<f64>| {
        let (z1, z2, _, _, th) = signals(s);
        0.5 * z1 * z1 + 0.5 * m * z2 * z2 + 0.5 * (th - theta_star).powi(2) / gamma
    };
    let rate_bound = |s: &Vector3<f64>| {
        let (z1, z2, a1dot, g, th) = signals(s);
        let h = approximation_target(
            &params,
            &Vector3::new(s[1], 0.0, 0.0),
            &Vector3::new(a1dot, 0.0, 0.0),
            &Vector3::new(z2, 0.0, 0.0),
            &bound,
        )[0];
        let e = h - theta_star * g;
        -k1 * z1 * z1 - k2 * z2 * z2 - z2 * e - sigma * (th - theta_star) * th
    };

    let mut s = Vector3::new(2.0, -0.3, 0.1);
    let v0 = lyap(&s);
    let mut integral = 0.0;
    let mut q_prev = rate_bound(&s);
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..steps {
        s = rk4_step(&s, dt, deriv).unwrap();
        let q = rate_bound(&s);
        integral += 0.5 * dt * (q + q_prev);
        q_prev = q;
        let excess = lyap(&s) - v0 - integral;
        worst = worst.max(excess);
    }
    let tol = 1e-3 * v0.max(1.0);
    outcome(
        worst <= tol,
        format!(
            "V(0) = {v0:.4}, V(T) = {:.4e}; max [V(t) - V(0) - int bound] = {worst:.3e} (tol {tol:.1e})",
            lyap(&s)
        ),
    )
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let bin = env!("CARGO_BIN_EXE_dpsim");
    let mut files = Vec::new();
    for k in 0..2 {
        let out = dir.path().join(format!("run{k}.csv"));
        let status = std::process::Command::new(bin)
            .args(["run", "--controller", "adaptive-nn", "--disturbance", "markov", "--seed", "9"])
            .arg("--out")
            .arg(&out)
            .stdout(std::process::Stdio::null())
            .status()
            .unwrap();
        if !status.success() {
            return outcome(false, format!("run {k} exited with {status}"));
        }
        files.push(std::fs::read(&out).unwrap());
    }
    outcome(
        files[0] == files[1] && !files[0].is_empty(),
        format!("two CLI runs, {} and {} bytes", files[0].len(), files[1].len()),
    )
}

fn main() {
    let mut results: Vec<(u32, &str, Outcome, Duration, Option<f64>)> = Vec::new();
    let mut record = |n, name, f: &dyn Fn() -> Outcome, limit: Option<f64>| {
        let (mut o, took) = timed(f);
        if let Some(l) = limit {
            if took.as_secs_f64() >= l {
                o.pass = false;
                o.detail.push_str(&format!("; runtime {:.2} s over {l} s", took.as_secs_f64()));
            }
        }
        results.push((n, name, o, took, limit));
    };

    record(1, "rotation kinematics", &rotation_kinematics, Some(1.0));
    record(2, "RK4 convergence order", &rk4_order, Some(1.0));
    record(3, "Markov bias statistics", &markov_statistics, Some(5.0));
    let runs = reference_runs();
    record(4, "reference scenario convergence", &|| scenario_reproduction(&runs), None);
    record(5, "weight boundedness", &|| weight_boundedness(&runs), None);
    record(6, "controller ranking under Markov disturbance", &ranking_under_markov, None);
    record(7, "RBF point value and ANFIS normalization", &basis_and_normalization, None);
    record(8, "weighted L2 norm", &weighted_norm, None);
    record(9, "single-axis Lyapunov dissipation", &lyapunov_oracle, None);
    record(10, "byte-identical traces", &determinism, None);

    let mut failed = 0;
    for (n, name, o, took, _) in &results {
        let tag = if o.pass { "PASS" } else { "FAIL" };
        if !o.pass {
            failed += 1;
        }
        println!("[{tag}] criterion {n:>2}: {name} ({:.2} s): {}", took.as_secs_f64(), o.detail);
    }
    println!("acceptance: {}/{} passed", results.len() - failed, results.len());
    if failed > 0 && std::env::var_os("DPSIM_ACCEPTANCE_STRICT").is_some() {
        std::process::exit(1);
    }
}
