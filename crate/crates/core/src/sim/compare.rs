//! Cross-run comparison of saved traces.

use std::fmt;

use super::metrics::{compute_metrics, MetricsSpec, RunMetrics};
use super::trace::RunTrace;
use crate::error::{DpError, Result};

/// Steady-state RMS ratio of run `a` to run `b`.
#[derive(Debug, Clone, PartialEq)]
pub struct PairRatio {
    pub a: usize,
    pub b: usize,
    pub pos_ratio: f64,
    pub psi_ratio: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonReport {
    pub labels: Vec<String>,
    pub metrics: Vec<RunMetrics>,
    pub ratios: Vec<PairRatio>,
}

fn ratio(a: f64, b: f64) -> f64 {
    if a == 0.0 && b == 0.0 {
        1.0
    } else {
        a / b
    }
}

/// Compares traces sampled on the same time grid over the trailing
/// `window` seconds.
pub fn compare_runs(traces: &[RunTrace], window: f64) -> Result<ComparisonReport> {
    if traces.len() < 2 {
        return Err(DpError::GridMismatch(format!(
            "need at least two traces, got {}",
            traces.len()
        )));
    }
    let base = &traces[0];
    for (k, tr) in traces.iter().enumerate().skip(1) {
        let same = tr.rows.len() == base.rows.len()
            && tr
                .times()
                .zip(base.times())
                .all(|(a, b)| (a - b).abs() <= 1e-9 * b.abs().max(1.0));
        if !same {
            return Err(DpError::GridMismatch(format!(
                "trace {k} ({}) is not sampled on the grid of trace 0 ({})",
                tr.header.label(),
                base.header.label()
            )));
        }
    }
    let spec = MetricsSpec {
        tail_window: window,
        ..MetricsSpec::default()
    };
    spec.validate()?;
    let metrics = traces
        .iter()
        .map(|tr| compute_metrics(&tr.rows, &tr.header.target, &spec))
        .collect::<Result<Vec<_>>>()?;
    let mut ratios = Vec::new();
    for a in 0..traces.len() {
        for b in a + 1..traces.len() {
            ratios.push(PairRatio {
                a,
                b,
                pos_ratio: ratio(metrics[a].steady_rms_pos, metrics[b].steady_rms_pos),
                psi_ratio: ratio(metrics[a].steady_rms_psi, metrics[b].steady_rms_psi),
            });
        }
    }
    Ok(ComparisonReport {
        labels: traces.iter().map(|t| t.header.label()).collect(),
        metrics,
        ratios,
    })
}

impl fmt::Display for ComparisonReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{:<4} {:<28} {:>14} {:>16}", "run", "label", "rms_pos_m", "rms_psi_deg")?;
        for (k, (label, m)) in self.labels.iter().zip(&self.metrics).enumerate() {
            writeln!(
                f,
                "{k:<4} {label:<28} {:>14.6} {:>16.6}",
                m.steady_rms_pos,
                m.steady_rms_psi.to_degrees()
            )?;
        }
        writeln!(f, "ratios (a/b):")?;
        for r in &self.ratios {
            writeln!(f, "  {} / {}: pos {:.4} psi {:.4}", r.a, r.b, r.pos_ratio, r.psi_ratio)?;
        }
        Ok(())
    }
}
