//! Per-step trace rows and their CSV form.

use std::io::{BufRead, Write};

use crate::error::DpError;

pub const TRACE_COLUMNS: [&str; 18] = [
    "t",
    "x",
    "y",
    "psi",
    "u",
    "v",
    "r",
    "tau1",
    "tau2",
    "tau3",
    "delta1",
    "delta2",
    "delta3",
    "theta1_norm",
    "theta2_norm",
    "theta3_norm",
    "v1",
    "v2a_partial",
];

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TraceRow {
    pub t: f64,
    /// `[x, y, psi]`, heading unwrapped.
    pub eta: [f64; 3],
    pub nu: [f64; 3],
    pub tau: [f64; 3],
    pub delta: [f64; 3],
    pub theta_norms: [f64; 3],
    pub v1: f64,
    /// `V2` without the weight-error term.
    pub v2a_partial: f64,
}

impl TraceRow {
    pub fn to_array(&self) -> [f64; 18] {
        let mut a = [0.0; 18];
        a[0] = self.t;
        a[1..4].copy_from_slice(&self.eta);
        a[4..7].copy_from_slice(&self.nu);
        a[7..10].copy_from_slice(&self.tau);
        a[10..13].copy_from_slice(&self.delta);
        a[13..16].copy_from_slice(&self.theta_norms);
        a[16] = self.v1;
        a[17] = self.v2a_partial;
        a
    }

    pub fn from_array(a: &[f64; 18]) -> Self {
        let tri = |i: usize| [a[i], a[i + 1], a[i + 2]];
        Self {
            t: a[0],
            eta: tri(1),
            nu: tri(4),
            tau: tri(7),
            delta: tri(10),
            theta_norms: tri(13),
            v1: a[16],
            v2a_partial: a[17],
        }
    }
}

/// Provenance recorded as `#` comment lines above the CSV header.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceHeader {
    pub version: String,
    pub controller: String,
    pub adaptation_law: String,
    pub disturbance: String,
    pub weight_seed: u64,
    pub noise_seed: Option<u64>,
    pub dt: f64,
    pub decimate: usize,
    pub nodes: usize,
    /// `[x, y, psi]` of the setpoint.
    pub target: [f64; 3],
}

impl Default for TraceHeader {
    fn default() -> Self {
        Self {
            version: crate::VERSION.to_string(),
            controller: String::new(),
            adaptation_law: String::new(),
            disturbance: String::new(),
            weight_seed: 0,
            noise_seed: None,
            dt: 0.0,
            decimate: 1,
            nodes: 0,
            target: [0.0; 3],
        }
    }
}

impl TraceHeader {
    /// Label used in reports, e.g. `adaptive-nn/markov`.
    pub fn label(&self) -> String {
        format!("{}/{}", self.controller, self.disturbance)
    }

    fn lines(&self) -> Vec<String> {
        let noise = self
            .noise_seed
            .map_or_else(|| "none".to_string(), |s| s.to_string());
        vec![
            format!("# dpsim {}", self.version),
            format!(
                "# controller={} law={} disturbance={}",
                self.controller, self.adaptation_law, self.disturbance
            ),
            format!("# weight_seed={} noise_seed={}", self.weight_seed, noise),
            format!(
                "# dt={} decimate={} nodes={}",
                self.dt, self.decimate, self.nodes
            ),
            format!(
                "# target={},{},{}",
                self.target[0], self.target[1], self.target[2]
            ),
        ]
    }

    fn absorb(&mut self, line: &str) -> Result<(), DpError> {
        let body = line.trim_start_matches('#').trim();
        if let Some(v) = body.strip_prefix("dpsim ") {
            self.version = v.trim().to_string();
            return Ok(());
        }
        let bad = |k: &str, v: &str| DpError::InvalidParameter(format!("bad trace header {k}={v}"));
        for kv in body.split_whitespace() {
            let Some((k, v)) = kv.split_once('=') else {
                continue;
            };
            match k {
                "controller" => self.controller = v.to_string(),
                "law" => self.adaptation_law = v.to_string(),
                "disturbance" => self.disturbance = v.to_string(),
                "weight_seed" => self.weight_seed = v.parse().map_err(|_| bad(k, v))?,
                "noise_seed" => {
                    self.noise_seed = match v {
                        "none" => None,
                        s => Some(s.parse().map_err(|_| bad(k, v))?),
                    }
                }
                "dt" => self.dt = v.parse().map_err(|_| bad(k, v))?,
                "decimate" => self.decimate = v.parse().map_err(|_| bad(k, v))?,
                "nodes" => self.nodes = v.parse().map_err(|_| bad(k, v))?,
                "target" => {
                    let parts: Vec<f64> = v
                        .split(',')
                        .map(str::parse)
                        .collect::<Result<_, _>>()
                        .map_err(|_| bad(k, v))?;
                    if parts.len() != 3 {
                        return Err(bad(k, v));
                    }
                    self.target = [parts[0], parts[1], parts[2]];
                }
                _ => {}
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct RunTrace {
    pub header: TraceHeader,
    pub rows: Vec<TraceRow>,
}

fn csv_err(e: csv::Error) -> DpError {
    DpError::InvalidParameter(format!("trace csv: {e}"))
}

impl RunTrace {
    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        self.rows.iter().map(|r| r.t)
    }

    /// Writes the comment header and rows; floats carry nine significant
    /// digits so identical runs produce identical bytes.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        for line in self.header.lines() {
            writeln!(w, "{line}")?;
        }
        let mut out = csv::Writer::from_writer(w);
        out.write_record(TRACE_COLUMNS)?;
        let mut record = Vec::with_capacity(18);
        for row in &self.rows {
            record.clear();
            record.extend(row.to_array().iter().map(|v| format!("{v:.8e}")));
            out.write_record(&record)?;
        }
        out.flush()
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv output is ascii")
    }

    pub fn read_csv<R: BufRead>(mut r: R) -> Result<Self, DpError> {
        let mut header = TraceHeader {
            version: String::new(),
            ..TraceHeader::default()
        };
        let mut rest = String::new();
        let mut line = String::new();
        loop {
            line.clear();
            let n = r
                .read_line(&mut line)
                .map_err(|e| DpError::InvalidParameter(format!("trace read: {e}")))?;
            if n == 0 {
                break;
            }
            if line.starts_with('#') {
                header.absorb(&line)?;
            } else {
                rest.push_str(&line);
                break;
            }
        }
        r.read_to_string(&mut rest)
            .map_err(|e| DpError::InvalidParameter(format!("trace read: {e}")))?;

        let mut rdr = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .from_reader(rest.as_bytes());
        let cols = rdr.headers().map_err(csv_err)?;
        if cols.iter().ne(TRACE_COLUMNS.iter().copied()) {
            return Err(DpError::InvalidParameter(format!(
                "unexpected trace columns: {}",
                cols.iter().collect::<Vec<_>>().join(",")
            )));
        }
        let mut rows = Vec::new();
        for rec in rdr.records() {
            let rec = rec.map_err(csv_err)?;
            let mut a = [0.0; 18];
            for (slot, field) in a.iter_mut().zip(rec.iter()) {
                *slot = field
                    .parse()
                    .map_err(|_| DpError::InvalidParameter(format!("bad number `{field}`")))?;
            }
            rows.push(TraceRow::from_array(&a));
        }
        if rows.is_empty() {
            return Err(DpError::EmptySeries);
        }
        Ok(RunTrace { header, rows })
    }

    pub fn read_path(path: impl AsRef<std::path::Path>) -> Result<Self, DpError> {
        let f = std::fs::File::open(path.as_ref()).map_err(|e| {
            DpError::InvalidParameter(format!("cannot open {}: {e}", path.as_ref().display()))
        })?;
        Self::read_csv(std::io::BufReader::new(f))
    }
}
