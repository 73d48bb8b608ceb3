//! Scalar summaries of a run.

use std::fmt;

use super::trace::TraceRow;
use crate::error::{DpError, Result};
use crate::vessel::wrap_angle;

/// Convergence band and steady-state window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricsSpec {
    /// Planar position error band, m.
    pub pos_band: f64,
    /// Heading error band, rad.
    pub psi_band: f64,
    /// Length of the trailing window used for steady-state RMS, s.
    pub tail_window: f64,
}

impl Default for MetricsSpec {
    fn default() -> Self {
        Self {
            pos_band: 0.5,
            psi_band: 0.5f64.to_radians(),
            tail_window: 200.0,
        }
    }
}

impl MetricsSpec {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("position band", self.pos_band),
            ("heading band", self.psi_band),
            ("tail window", self.tail_window),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(DpError::InvalidParameter(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunMetrics {
    /// Time after which the pose stays inside the band; infinite if the
    /// final sample is outside it.
    pub convergence_time: f64,
    pub steady_rms_pos: f64,
    /// Heading RMS over the tail window, rad.
    pub steady_rms_psi: f64,
    pub peak_tau: [f64; 3],
    /// Largest per-axis weight norm seen.
    pub weight_sup: f64,
    pub final_pos_error: f64,
    pub final_psi_error: f64,
}

impl RunMetrics {
    pub fn converged(&self) -> bool {
        self.convergence_time.is_finite()
    }
}

impl fmt::Display for RunMetrics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let conv = if self.converged() {
            format!("{:.1}", self.convergence_time)
        } else {
            "inf".to_string()
        };
        write!(
            f,
            "convergence_time={conv} steady_rms_pos={:.4} steady_rms_psi_deg={:.4} \
             final_pos={:.4} final_psi_deg={:.4} peak_tau=[{:.3e},{:.3e},{:.3e}] weight_sup={:.4}",
            self.steady_rms_pos,
            self.steady_rms_psi.to_degrees(),
            self.final_pos_error,
            self.final_psi_error.abs().to_degrees(),
            self.peak_tau[0],
            self.peak_tau[1],
            self.peak_tau[2],
            self.weight_sup
        )
    }
}

fn pose_error(row: &TraceRow, target: &[f64; 3]) -> (f64, f64) {
    let dx = row.eta[0] - target[0];
    let dy = row.eta[1] - target[1];
    (dx.hypot(dy), wrap_angle(row.eta[2] - target[2]))
}

/// Metrics over `rows`, which should be the full-rate stream.
pub fn compute_metrics(rows: &[TraceRow], target: &[f64; 3], spec: &MetricsSpec) -> Result<RunMetrics> {
    let last = rows.last().ok_or(DpError::EmptySeries)?;
    let t_end = last.t;

    let mut convergence_time = rows[0].t;
    let mut inside = true;
    for (k, row) in rows.iter().enumerate() {
        let (p, a) = pose_error(row, target);
        let ok = p <= spec.pos_band && a.abs() <= spec.psi_band;
        if !ok {
            inside = false;
        } else if !inside || k == 0 {
            convergence_time = row.t;
            inside = true;
        }
    }
    if !inside {
        convergence_time = f64::INFINITY;
    }

    let t_from = t_end - spec.tail_window;
    let (mut sp, mut sa, mut n) = (0.0, 0.0, 0usize);
    let mut peak_tau = [0.0f64; 3];
    let mut weight_sup = 0.0f64;
    for row in rows {
        for i in 0..3 {
            peak_tau[i] = peak_tau[i].max(row.tau[i].abs());
            weight_sup = weight_sup.max(row.theta_norms[i]);
        }
        if row.t >= t_from - 1e-9 {
            let (p, a) = pose_error(row, target);
            sp += p * p;
            sa += a * a;
            n += 1;
        }
    }
    let (final_pos_error, final_psi_error) = pose_error(last, target);
    Ok(RunMetrics {
        convergence_time,
        steady_rms_pos: (sp / n as f64).sqrt(),
        steady_rms_psi: (sa / n as f64).sqrt(),
        peak_tau,
        weight_sup,
        final_pos_error,
        final_psi_error,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(t: f64, x: f64) -> TraceRow {
        TraceRow {
            t,
            eta: [x, 0.0, 0.0],
            ..TraceRow::default()
        }
    }

    #[test]
    fn convergence_is_last_band_entry() {
        let rows: Vec<_> = [2.0, 0.1, 0.9, 0.2, 0.1]
            .iter()
            .enumerate()
            .map(|(k, &x)| row(k as f64, x))
            .collect();
        let m = compute_metrics(&rows, &[0.0; 3], &MetricsSpec::default()).unwrap();
        assert_eq!(m.convergence_time, 3.0);
    }

    #[test]
    fn never_converged_is_infinite() {
        let rows = vec![row(0.0, 0.1), row(1.0, 3.0)];
        let m = compute_metrics(&rows, &[0.0; 3], &MetricsSpec::default()).unwrap();
        assert!(m.convergence_time.is_infinite());
        assert!(m.to_string().contains("convergence_time=inf"));
    }

    #[test]
    fn inside_from_start() {
        let rows = vec![row(0.0, 0.1), row(1.0, 0.1)];
        let m = compute_metrics(&rows, &[0.0; 3], &MetricsSpec::default()).unwrap();
        assert_eq!(m.convergence_time, 0.0);
    }

    #[test]
    fn tail_rms() {
        let spec = MetricsSpec {
            tail_window: 1.0,
            ..MetricsSpec::default()
        };
        let rows = vec![row(0.0, 10.0), row(1.0, 3.0), row(2.0, 4.0)];
        let m = compute_metrics(&rows, &[0.0; 3], &spec).unwrap();
        assert!((m.steady_rms_pos - 12.5f64.sqrt()).abs() < 1e-12);
        assert!(matches!(compute_metrics(&[], &[0.0; 3], &spec), Err(DpError::EmptySeries)));
    }

    #[test]
    fn heading_error_wraps() {
        let mut r = row(0.0, 0.0);
        r.eta[2] = 2.0 * std::f64::consts::PI + 0.001;
        let m = compute_metrics(&[r], &[0.0; 3], &MetricsSpec::default()).unwrap();
        assert!(m.final_psi_error.abs() < 0.0011);
    }
}
