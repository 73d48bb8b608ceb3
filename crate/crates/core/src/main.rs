use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use dpsim::control::AdaptationLaw;
use dpsim::sim::{
    compare_runs, load_scenario, run_canonical, run_simulation, ConfigError, ControllerKind,
    DisturbanceSpec, RunTrace, ScenarioConfig, SimError,
};

#[derive(Parser)]
#[command(name = "dpsim", version, about = "Dynamic-positioning simulator for a surface vessel")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum DisturbanceArg {
    Constant,
    Markov,
}

#[derive(Clone, Copy, ValueEnum)]
enum LawArg {
    Lyapunov,
    SigmaModification,
    PositiveLeakage,
}

#[derive(clap::Args)]
struct Overrides {
    /// Scenario JSON; defaults to the reference scenario.
    #[arg(long)]
    config: Option<PathBuf>,
    /// pid, adaptive-nn or nn-fixed.
    #[arg(long)]
    controller: Option<ControllerKind>,
    #[arg(long, value_enum)]
    disturbance: Option<DisturbanceArg>,
    #[arg(long, value_enum)]
    law: Option<LawArg>,
    /// Seed for both the weight initialisation and the disturbance noise.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    duration: Option<f64>,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long)]
    decimate: Option<usize>,
    /// RBF grid points per input dimension.
    #[arg(long)]
    grid: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario and write its trace.
    Run {
        #[command(flatten)]
        overrides: Overrides,
        /// Trace CSV path; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare steady-state error across saved traces.
    Compare {
        #[arg(required = true, num_args = 2..)]
        traces: Vec<PathBuf>,
        #[arg(long, default_value_t = 200.0)]
        window: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run all controller/disturbance combinations.
    Figures {
        #[command(flatten)]
        overrides: Overrides,
        #[arg(long, default_value = "figures")]
        outdir: PathBuf,
    },
    /// Check a scenario file without running it.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
}

enum Failure {
    Usage(String),
    Runtime(String),
}

/// Exit 1: bad arguments or invalid scenario. Exit 2: the run itself failed.
impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Usage(e.to_string())
    }
}

impl From<SimError> for Failure {
    fn from(e: SimError) -> Self {
        match e {
            SimError::Config(c) => c.into(),
            other => Failure::Runtime(other.to_string()),
        }
    }
}

fn io_fail(path: &Path, e: impl std::fmt::Display) -> Failure {
    Failure::Runtime(format!("{}: {e}", path.display()))
}

fn scenario(o: &Overrides) -> Result<ScenarioConfig, Failure> {
    let mut cfg = match &o.config {
        Some(p) => load_scenario(p)?,
        None => ScenarioConfig::default(),
    };
    if let Some(k) = o.controller {
        cfg.controller.kind = k;
    }
    if let Some(d) = o.disturbance {
        let seed = o.seed.or(cfg.disturbance.seed()).unwrap_or(0);
        cfg.disturbance = match d {
            DisturbanceArg::Constant => DisturbanceSpec::default(),
            DisturbanceArg::Markov => match cfg.disturbance {
                m @ DisturbanceSpec::Markov { .. } => m,
                _ => DisturbanceSpec::reference_markov(seed),
            },
        };
    }
    if let Some(l) = o.law {
        cfg.controller.law = match l {
            LawArg::Lyapunov => AdaptationLaw::Lyapunov,
            LawArg::SigmaModification => AdaptationLaw::SigmaModification,
            LawArg::PositiveLeakage => AdaptationLaw::PositiveLeakage,
        };
    }
    if let Some(s) = o.seed {
        cfg.weight_seed = s;
        if let DisturbanceSpec::Markov { seed, .. } = &mut cfg.disturbance {
            *seed = s;
        }
    }
    if let Some(v) = o.duration {
        cfg.duration = v;
    }
    if let Some(v) = o.dt {
        cfg.dt = v;
    }
    if let Some(v) = o.decimate {
        cfg.decimate = v;
    }
    if let Some(v) = o.grid {
        cfg.rbf.points_per_dim = v;
    }
    cfg.validate()?;
    for w in &cfg.warnings {
        eprintln!("warning: {w}");
    }
    Ok(cfg)
}

fn write_trace(trace: &RunTrace, path: &Path) -> Result<(), Failure> {
    let f = File::create(path).map_err(|e| io_fail(path, e))?;
    let mut w = BufWriter::new(f);
    trace.write_csv(&mut w).map_err(|e| io_fail(path, e))?;
    w.flush().map_err(|e| io_fail(path, e))
}

fn execute(cmd: Command) -> Result<(), Failure> {
    match cmd {
        Command::Run { overrides, out } => {
            let cfg = scenario(&overrides)?;
            let (trace, metrics) = run_simulation(&cfg)?;
            match out {
                Some(p) => {
                    write_trace(&trace, &p)?;
                    println!("{metrics}");
                }
                None => {
                    let stdout = std::io::stdout();
                    trace
                        .write_csv(stdout.lock())
                        .map_err(|e| Failure::Runtime(e.to_string()))?;
                    eprintln!("{metrics}");
                }
            }
        }
        Command::Compare { traces, window, out } => {
            let loaded = traces
                .iter()
                .map(RunTrace::read_path)
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| Failure::Usage(e.to_string()))?;
            let report = compare_runs(&loaded, window).map_err(|e| Failure::Usage(e.to_string()))?;
            match out {
                Some(p) => std::fs::write(&p, report.to_string()).map_err(|e| io_fail(&p, e))?,
                None => print!("{report}"),
            }
        }
        Command::Figures { overrides, outdir } => {
            let cfg = scenario(&overrides)?;
            std::fs::create_dir_all(&outdir).map_err(|e| io_fail(&outdir, e))?;
            let noise_seed = overrides.seed.unwrap_or(0);
            let mut failed = Vec::new();
            for (name, result) in run_canonical(&cfg, noise_seed) {
                match result {
                    Ok((trace, metrics)) => {
                        write_trace(&trace, &outdir.join(format!("{name}.csv")))?;
                        println!("{name}: {metrics}");
                    }
                    Err(e) => {
                        eprintln!("{name}: {e}");
                        failed.push(name);
                    }
                }
            }
            if !failed.is_empty() {
                return Err(Failure::Runtime(format!("failed scenarios: {}", failed.join(", "))));
            }
        }
        Command::Validate { config } => {
            let cfg = load_scenario(&config)?;
            for w in &cfg.warnings {
                println!("warning: {w}");
            }
            println!(
                "ok: controller={} disturbance={} steps={}",
                cfg.controller.kind,
                cfg.disturbance.kind(),
                cfg.steps()
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Runtime(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
    }
}
