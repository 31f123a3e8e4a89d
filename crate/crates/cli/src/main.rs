use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use spintree::catalog::{analyze_couplings, analyze_graph, catalog_csv, catalog_rows};
use spintree::evolution::evolve;
use spintree::graph::decompose;
use spintree::io::{trajectory_csv, SystemInput};
use spintree::numerics::{
    integrate_splitting_at, max_deviation, reference_integrate_at, sample_times, split_edges, SplitPlan, DEFAULT_TOL,
};
use spintree::quantum::{closed_form_spectrum, spectrum_compare, HalfInt};
use spintree::random::{random_configuration, seeded_rng};
use spintree::tree::{detect_tree, BJSystem};
use spintree::{Error, FieldVector, Result, SpinConfiguration, Vec3};

#[derive(Parser)]
#[command(name = "spintree", version, about = "Analyse, evolve and diagonalize Heisenberg spin systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Method {
    Reference,
    Trotter1,
    Strang,
}

#[derive(clap::Args)]
struct InitialState {
    /// Initial configuration file
    #[arg(long, conflicts_with = "seed")]
    config: Option<PathBuf>,
    /// Seed for a random initial configuration
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Integrability verdict, partition tree, commuting family and commutant
    Analyze {
        /// Graph, coupling or system file
        #[arg(long)]
        system: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Every connected spin graph on n spins
    Catalog {
        #[arg(long)]
        n: usize,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Closed-form trajectory of an integrable system as CSV
    Evolve {
        #[arg(long)]
        system: PathBuf,
        #[command(flatten)]
        init: InitialState,
        /// End time
        #[arg(long)]
        t: f64,
        #[arg(long, default_value_t = 101)]
        samples: usize,
        /// Magnetic field x,y,z
        #[arg(long, value_parser = parse_field, allow_hyphen_values = true)]
        field: Option<Vec3>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Numerical integration with statistics as JSON
    Integrate {
        #[arg(long)]
        system: PathBuf,
        #[command(flatten)]
        init: InitialState,
        #[arg(long)]
        t: f64,
        /// Step size of the splitting methods
        #[arg(long, default_value_t = 0.01)]
        h: f64,
        /// Tolerance of the adaptive reference integrator
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
        #[arg(long, value_enum, default_value = "strang")]
        method: Method,
        #[arg(long, default_value_t = 2)]
        samples: usize,
        #[arg(long, value_parser = parse_field, allow_hyphen_values = true)]
        field: Option<Vec3>,
        /// Also write the trajectory as CSV
        #[arg(long)]
        trajectory: Option<PathBuf>,
        /// Include wall-clock time (makes output nondeterministic)
        #[arg(long)]
        timing: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Closed-form quantum spectrum of a tree system as JSON
    Spectrum {
        #[arg(long)]
        system: PathBuf,
        /// Individual spin quantum number
        #[arg(long, default_value_t = 0.5)]
        s: f64,
        /// Magnetic field; only its magnitude matters
        #[arg(long, value_parser = parse_field, allow_hyphen_values = true)]
        field: Option<Vec3>,
        /// Also report the deviation from dense diagonalization
        #[arg(long)]
        compare: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn parse_field(text: &str) -> std::result::Result<Vec3, String> {
    let parts: Vec<&str> = text.split(',').collect();
    if parts.len() != 3 {
        return Err(format!("expected x,y,z, got {text:?}"));
    }
    let mut v = [0.0; 3];
    for (slot, p) in v.iter_mut().zip(&parts) {
        *slot = p.trim().parse::<f64>().map_err(|e| format!("{p:?}: {e}"))?;
        if !slot.is_finite() {
            return Err(format!("{p:?} is not finite"));
        }
    }
    Ok(Vec3::new(v[0], v[1], v[2]))
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::InvalidArgument(format!("cannot read {}: {e}", path.display())))
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn pretty(value: &serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

fn field_of(field: Option<Vec3>) -> FieldVector {
    FieldVector(field.unwrap_or_else(Vec3::zeros))
}

fn initial_state(init: &InitialState, n: usize) -> Result<SpinConfiguration> {
    let cfg = match (&init.config, init.seed) {
        (Some(path), _) => spintree::io::parse_config(&read(path)?)?,
        (None, Some(seed)) => random_configuration(&mut seeded_rng(seed), n),
        (None, None) => {
            return Err(Error::InvalidArgument("either --config or --seed is required".into()));
        }
    };
    if cfg.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: cfg.len() });
    }
    Ok(cfg)
}

/// The tree system behind an input, if the input is integrable.
fn tree_system(input: &SystemInput) -> Result<BJSystem> {
    match input {
        SystemInput::System(sys) => Ok(sys.clone()),
        SystemInput::Graph(g) => match decompose(g) {
            spintree::graph::IntegrabilityVerdict::Integrable(sys) => Ok(sys),
            spintree::graph::IntegrabilityVerdict::NotIntegrable(c) => Err(Error::InvalidArgument(format!(
                "the graph is not integrable: spins {:?} form an induced 4-chain",
                c.map(|v| v + 1)
            ))),
        },
        SystemInput::Couplings(j) => detect_tree(j)
            .ok_or_else(|| Error::InvalidArgument("the couplings admit no partition tree".into())),
        SystemInput::Plan(_) => Err(Error::InvalidArgument("a split plan has no single partition tree".into())),
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Analyze { system, out } => {
            let report = match SystemInput::parse(&read(&system)?)? {
                SystemInput::Graph(g) => analyze_graph(&g)?,
                other => analyze_couplings(&other.couplings())?,
            };
            emit(&out, &pretty(&report.to_json()))
        }
        Command::Catalog { n, format, out } => {
            let rows = catalog_rows(n)?;
            let text = match format {
                Format::Json => pretty(&json!(rows)),
                Format::Csv => catalog_csv(&rows),
            };
            emit(&out, &text)
        }
        Command::Evolve { system, init, t, samples, field, out } => {
            let input = SystemInput::parse(&read(&system)?)?;
            let sys = tree_system(&input)?;
            let cfg0 = initial_state(&init, sys.n())?;
            let field = field_of(field);
            let times = sample_times(t, samples)?;
            let states = times.iter().map(|&tk| evolve(&sys, &cfg0, tk, &field)).collect::<Result<Vec<_>>>()?;
            let traj = spintree::numerics::Trajectory { times, states };
            emit(&out, &trajectory_csv(&traj, &sys.hamiltonian_couplings(), &field)?)
        }
        Command::Integrate { system, init, t, h, tol, method, samples, field, trajectory, timing, out } => {
            let input = SystemInput::parse(&read(&system)?)?;
            let j = input.couplings();
            let cfg0 = initial_state(&init, j.n())?;
            let field = field_of(field);
            let times = sample_times(t, samples)?;
            let start = std::time::Instant::now();
            let reference = reference_integrate_at(&j, &cfg0, &times, tol, &field)?;
            let mut report = serde_json::Map::new();
            report.insert("method".into(), json!(method_name(method)));
            report.insert("t_end".into(), json!(t));
            let traj = if method == Method::Reference {
                report.insert("tol".into(), json!(tol));
                reference
            } else {
                if h > t {
                    return Err(Error::InvalidArgument(format!("step {h} exceeds the end time {t}")));
                }
                let plan = match input {
                    SystemInput::Plan(p) => p,
                    SystemInput::System(s) => SplitPlan::new(vec![s])?,
                    _ => split_edges(&j),
                };
                let order = if method == Method::Trotter1 { 1 } else { 2 };
                let (traj, stats) = integrate_splitting_at(&plan, &cfg0, &times, h, order, &field)?;
                let global = traj
                    .states
                    .iter()
                    .zip(&reference.states)
                    .map(|(a, b)| max_deviation(a, b))
                    .fold(0.0, f64::max);
                report.insert("h".into(), json!(h));
                report.insert("parts".into(), json!(plan.parts().len()));
                report.insert("steps".into(), json!(stats.steps));
                report.insert("global_error".into(), json!(global));
                report.insert("reference_tol".into(), json!(tol));
                report.insert("total_spin_drift".into(), json!(stats.total_spin_drift));
                traj
            };
            let e0 = spintree::heisenberg::energy(&j, &cfg0, &field)?;
            let mut energy_drift: f64 = 0.0;
            let mut norm_drift: f64 = 0.0;
            for s in &traj.states {
                energy_drift = energy_drift.max((spintree::heisenberg::energy(&j, s, &field)? - e0).abs());
                norm_drift = norm_drift.max(s.max_norm_deviation());
            }
            report.insert("energy_drift".into(), json!(energy_drift));
            report.insert("spin_norm_drift".into(), json!(norm_drift));
            if timing {
                report.insert("wall_time".into(), json!(start.elapsed().as_secs_f64()));
            }
            if let Some(path) = &trajectory {
                std::fs::write(path, trajectory_csv(&traj, &j, &field)?)?;
            }
            emit(&out, &pretty(&serde_json::Value::Object(report)))
        }
        Command::Spectrum { system, s, field, compare, out } => {
            let sys = tree_system(&SystemInput::parse(&read(&system)?)?)?;
            let s = HalfInt::from_f64(s)?;
            let b = field.map_or(0.0, |f| f.norm());
            let spectrum = closed_form_spectrum(&sys, s, b)?;
            let value = if compare {
                json!({ "levels": spectrum, "dense_deviation": spectrum_compare(&sys, s, b)? })
            } else {
                json!(spectrum)
            };
            emit(&out, &pretty(&value))
        }
    }
}

fn method_name(m: Method) -> &'static str {
    match m {
        Method::Reference => "reference",
        Method::Trotter1 => "trotter1",
        Method::Strang => "strang",
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_input_error() { 2 } else { 1 })
        }
    }
}
