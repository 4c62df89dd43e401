use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use fwlab::harness::{apply_env_overrides, parse_config, run_experiment, ExperimentKind};
use toml::{Table, Value};

#[derive(Parser)]
#[command(name = "fwlab", version, about = "Pseudo-spectral experiments for the two-component Fornberg-Whitham system")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Besov norm of a field given as CSV (x, value) or by preset.
    Norm {
        #[command(flatten)]
        common: Common,
        /// CSV file with columns x, value.
        #[arg(long)]
        field: Option<PathBuf>,
    },
    /// Littlewood-Paley mask table and partition-of-unity residual.
    PartitionCheck(Common),
    /// Linear transport solve and a priori estimate check.
    Transport {
        #[command(flatten)]
        common: Common,
        /// zero, sine, cosine, gauss or a CSV path.
        #[arg(long)]
        velocity: Option<String>,
        /// zero, sine, cosine, gauss or a CSV path.
        #[arg(long)]
        forcing: Option<String>,
        /// Fit the smallest constant for this problem instead of using C.
        #[arg(long)]
        fit_constant: bool,
    },
    /// Direct solve of the nonlinear system.
    Simulate(Common),
    /// Mollified transport iteration.
    Iterate(Common),
    /// Empirical lifespan over a sweep of amplitudes.
    Lifespan(Common),
    /// Distance between solutions from perturbed data.
    Stability(Common),
    /// Solutions from mollified data.
    Continuity(Common),
    /// Run the full suite of checks.
    Verify(Common),
}

#[derive(Args, Default)]
struct Common {
    /// TOML run configuration; flags override its entries.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long = "N")]
    n: Option<i64>,
    #[arg(long = "L")]
    l: Option<f64>,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long = "T")]
    t: Option<f64>,
    #[arg(long)]
    t_cap: Option<f64>,
    #[arg(long)]
    s: Option<f64>,
    /// Integrability exponent; `inf` allowed.
    #[arg(long)]
    p: Option<f64>,
    /// Summability exponent; `inf` allowed.
    #[arg(long)]
    r: Option<f64>,
    #[arg(long = "C")]
    c: Option<f64>,
    #[arg(long)]
    n_max: Option<i64>,
    #[arg(long)]
    j_max: Option<i64>,
    /// sine, gauss or zero.
    #[arg(long)]
    preset: Option<String>,
    #[arg(long)]
    amplitude: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    amplitudes: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    deltas: Option<Vec<f64>>,
    /// CSV file with the initial u.
    #[arg(long)]
    u0: Option<PathBuf>,
    /// CSV file with the initial rho.
    #[arg(long)]
    rho0: Option<PathBuf>,
    #[arg(long)]
    seed: Option<i64>,
    /// Output directory (FWLAB_OUT takes precedence).
    #[arg(long)]
    out: Option<PathBuf>,
}

fn section<'a>(doc: &'a mut Table, name: &str) -> Result<&'a mut Table, String> {
    doc.entry(name)
        .or_insert_with(|| Value::Table(Table::new()))
        .as_table_mut()
        .ok_or_else(|| format!("'{name}' must be a table"))
}

fn set(doc: &mut Table, sect: Option<&str>, key: &str, value: Option<Value>) -> Result<(), String> {
    let Some(value) = value else { return Ok(()) };
    let target = match sect {
        Some(name) => section(doc, name)?,
        None => doc,
    };
    target.insert(key.to_string(), value);
    Ok(())
}

fn path_value(p: Option<PathBuf>) -> Option<Value> {
    p.map(|p| Value::String(p.display().to_string()))
}

fn floats(v: Option<Vec<f64>>) -> Option<Value> {
    v.map(|v| Value::Array(v.into_iter().map(Value::Float).collect()))
}

fn build_document(kind: ExperimentKind, c: Common, extra: Vec<(&str, Option<Value>)>) -> Result<String, String> {
    let mut doc: Table = match &c.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
            text.parse().map_err(|e| format!("{}: {e}", path.display()))?
        }
        None => Table::new(),
    };
    set(&mut doc, None, "seed", c.seed.map(Value::Integer))?;
    set(&mut doc, None, "output_dir", path_value(c.out))?;
    set(&mut doc, Some("grid"), "N", c.n.map(Value::Integer))?;
    set(&mut doc, Some("grid"), "L", c.l.map(Value::Float))?;
    set(&mut doc, Some("time"), "dt", c.dt.map(Value::Float))?;
    set(&mut doc, Some("time"), "T", c.t.map(Value::Float))?;
    set(&mut doc, Some("time"), "t_cap", c.t_cap.map(Value::Float))?;
    set(&mut doc, Some("besov"), "s", c.s.map(Value::Float))?;
    set(&mut doc, Some("besov"), "p", c.p.map(Value::Float))?;
    set(&mut doc, Some("besov"), "r", c.r.map(Value::Float))?;
    set(&mut doc, Some("scheme"), "C", c.c.map(Value::Float))?;
    set(&mut doc, Some("scheme"), "n_max", c.n_max.map(Value::Integer))?;
    set(&mut doc, Some("experiment"), "kind", Some(Value::String(kind.name().into())))?;
    set(&mut doc, Some("experiment"), "preset", c.preset.map(Value::String))?;
    set(&mut doc, Some("experiment"), "amplitude", c.amplitude.map(Value::Float))?;
    set(&mut doc, Some("experiment"), "amplitudes", floats(c.amplitudes))?;
    set(&mut doc, Some("experiment"), "deltas", floats(c.deltas))?;
    set(&mut doc, Some("experiment"), "j_max", c.j_max.map(Value::Integer))?;
    set(&mut doc, Some("experiment"), "u0", path_value(c.u0))?;
    set(&mut doc, Some("experiment"), "rho0", path_value(c.rho0))?;
    for (key, value) in extra {
        set(&mut doc, Some("experiment"), key, value)?;
    }
    toml::to_string(&doc).map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (kind, common, extra) = match cli.command {
        Command::Norm { common, field } => (ExperimentKind::Norm, common, vec![("u0", path_value(field))]),
        Command::PartitionCheck(c) => (ExperimentKind::PartitionCheck, c, vec![]),
        Command::Transport {
            common,
            velocity,
            forcing,
            fit_constant,
        } => (
            ExperimentKind::Transport,
            common,
            vec![
                ("velocity", velocity.map(Value::String)),
                ("forcing", forcing.map(Value::String)),
                ("fit_constant", fit_constant.then_some(Value::Boolean(true))),
            ],
        ),
        Command::Simulate(c) => (ExperimentKind::Simulate, c, vec![]),
        Command::Iterate(c) => (ExperimentKind::Iterate, c, vec![]),
        Command::Lifespan(c) => (ExperimentKind::LifespanSweep, c, vec![]),
        Command::Stability(c) => (ExperimentKind::Stability, c, vec![]),
        Command::Continuity(c) => (ExperimentKind::Continuity, c, vec![]),
        Command::Verify(c) => (ExperimentKind::Verify, c, vec![]),
    };
    let text = match build_document(kind, common, extra) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("fwlab: {e}");
            return ExitCode::from(2);
        }
    };
    let mut cfg = match parse_config(&text) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("fwlab: {e}");
            return ExitCode::from(2);
        }
    };
    apply_env_overrides(&mut cfg);
    match run_experiment(&cfg) {
        Ok(report) => {
            print!("{}", report.summary());
            println!("output: {}", report.output_dir.display());
            if report.passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("fwlab: {kind}: {e}");
            ExitCode::from(2)
        }
    }
}
