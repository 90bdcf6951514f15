use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};
use nanopnp::harness::{self, NumericOverrides, RunOutcome, RunSpec, ScenarioSource, SolverChoice, VoltageSpec};
use nanopnp::{fixtures, gfuncs, Error};

#[derive(Parser)]
#[command(name = "nanopnp", version, about = "Steady ion transport through charged axisymmetric nanopores")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one or all solvers on a scenario and write CSV artifacts.
    Run(RunArgs),
    /// Reduced axial model.
    Quasi1d {
        #[command(subcommand)]
        action: OneDAction,
    },
    /// Cross-section averaged drift-diffusion model.
    Area1d {
        #[command(subcommand)]
        action: OneDAction,
    },
    /// 2D axisymmetric reference solver.
    Pnp2d {
        #[command(subcommand)]
        action: TwoDAction,
    },
    /// Radial moment functions.
    Gfuncs {
        #[command(subcommand)]
        action: GfuncsAction,
    },
    /// Built-in scenarios.
    Scenario {
        #[command(subcommand)]
        action: ScenarioAction,
    },
    /// Re-run a manifest and check that every output is reproduced bit for bit.
    Replay {
        /// Manifest file or the directory containing it.
        manifest: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum SolverArg {
    Quasi1d,
    Area1d,
    Pnp2d,
    All,
}

impl From<SolverArg> for SolverChoice {
    fn from(s: SolverArg) -> Self {
        match s {
            SolverArg::Quasi1d => SolverChoice::Quasi1d,
            SolverArg::Area1d => SolverChoice::Area1d,
            SolverArg::Pnp2d => SolverChoice::Pnp2d,
            SolverArg::All => SolverChoice::All,
        }
    }
}

#[derive(Args, Clone)]
#[group(required = true, multiple = false)]
struct VoltageArgs {
    /// Applied voltage (V).
    #[arg(long, allow_hyphen_values = true)]
    voltage: Option<f64>,
    /// Sweep as start:end:points (V).
    #[arg(long, allow_hyphen_values = true)]
    sweep: Option<String>,
}

impl VoltageArgs {
    fn spec(&self) -> nanopnp::Result<VoltageSpec> {
        match (&self.voltage, &self.sweep) {
            (Some(v), _) => Ok(VoltageSpec::Single { voltage: *v }),
            (None, Some(s)) => VoltageSpec::parse_sweep(s),
            (None, None) => Err(Error::Config("give --voltage or --sweep".into())),
        }
    }
}

#[derive(Args, Clone, Default)]
struct NumericArgs {
    /// Axial intervals of the 1D solvers.
    #[arg(long)]
    axial_intervals: Option<usize>,
    /// Axial node density of the 1D solvers grows like R^-axial_grading.
    #[arg(long)]
    axial_grading: Option<f64>,
    /// Axial cells of the 2D mesh.
    #[arg(long)]
    nx: Option<usize>,
    /// Radial cells of the 2D mesh.
    #[arg(long)]
    nr: Option<usize>,
    /// Radial grading factor of the 2D mesh.
    #[arg(long)]
    grading: Option<f64>,
    /// Gummel tolerance of the 2D solver.
    #[arg(long)]
    tol_2d: Option<f64>,
    /// Use radial solves with this many points instead of the closed-form G.
    #[arg(long)]
    g_oracle: Option<usize>,
}

impl From<NumericArgs> for NumericOverrides {
    fn from(a: NumericArgs) -> Self {
        NumericOverrides {
            axial_intervals: a.axial_intervals,
            axial_grading: a.axial_grading,
            nx: a.nx,
            nr: a.nr,
            grading: a.grading,
            tol_2d: a.tol_2d,
            g_oracle: a.g_oracle,
        }
    }
}

#[derive(Args)]
struct RunArgs {
    /// Scenario file or built-in name.
    scenario: String,
    #[arg(long, value_enum, default_value = "all")]
    solver: SolverArg,
    #[command(flatten)]
    voltage: VoltageArgs,
    /// Also write field data (single voltage only).
    #[arg(long)]
    fields: bool,
    /// Profile comparison stations, comma separated normalized x.
    #[arg(long, value_delimiter = ',')]
    stations: Option<Vec<f64>>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    #[command(flatten)]
    numerics: NumericArgs,
}

#[derive(Subcommand)]
enum OneDAction {
    /// Steady state at one voltage, with axial and field output.
    Solve {
        scenario: String,
        #[arg(long, allow_hyphen_values = true)]
        voltage: f64,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        #[command(flatten)]
        numerics: NumericArgs,
    },
    /// Current-voltage sweep.
    Sweep {
        scenario: String,
        /// start:end:points (V)
        #[arg(long, allow_hyphen_values = true)]
        sweep: String,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        #[command(flatten)]
        numerics: NumericArgs,
    },
}

#[derive(Subcommand)]
enum TwoDAction {
    /// Steady state at one voltage; writes fields2d.csv and current_profile.csv.
    Solve {
        scenario: String,
        #[arg(long, allow_hyphen_values = true)]
        voltage: f64,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        #[command(flatten)]
        numerics: NumericArgs,
    },
}

#[derive(Subcommand)]
enum GfuncsAction {
    /// Closed forms against the radial solve on log-spaced lambda.
    Dump {
        #[arg(long)]
        beta: f64,
        #[arg(long, default_value_t = 0.01)]
        lambda_min: f64,
        #[arg(long, default_value_t = 3.0)]
        lambda_max: f64,
        #[arg(long, default_value_t = 50)]
        points: usize,
        /// Output file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum ScenarioAction {
    /// Names of the built-in scenarios.
    List,
    /// Print a built-in scenario as a scenario file.
    Dump { name: String },
}

fn spec(scenario: &str, solver: SolverChoice, voltages: VoltageSpec, out: PathBuf, fields: bool, numerics: NumericArgs) -> RunSpec {
    RunSpec {
        scenario: ScenarioSource::from_arg(scenario),
        solver,
        voltages,
        out,
        fields,
        numerics: numerics.into(),
        stations: None,
    }
}

fn summarize(outcome: &RunOutcome) {
    for run in &outcome.runs {
        for p in &run.curve.points {
            match &p.error {
                None => println!("{:<8} V = {:+.4}  I = {:+.6e} ({:+.4e} A)", run.label, p.voltage, p.current_dimensionless, p.current_a),
                Some(e) => println!("{:<8} V = {:+.4}  failed: {e}", run.label, p.voltage),
            }
        }
    }
    if let Some(report) = &outcome.report {
        for row in &report.rows {
            let diffs: Vec<String> = row.entries.iter().map(|e| format!("{} {:.3}%", e.label, 100.0 * e.rel_diff)).collect();
            println!("vs {} at {:+.4} V: {}", report.reference, row.voltage, diffs.join(", "));
        }
    }
}

fn execute(spec: RunSpec) -> ExitCode {
    let out = spec.out.clone();
    let result = harness::run(&spec);
    match &result {
        Ok(outcome) => {
            summarize(outcome);
            println!("wrote {}", out.display());
        }
        Err(e) => eprintln!("error: {e}"),
    }
    ExitCode::from(harness::exit_code(&result) as u8)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    if let Err(e) = harness::configure_threads() {
        eprintln!("error: {e}");
        return ExitCode::from(1);
    }
    let cli = Cli::parse();
    match cli.command {
        Command::Run(a) => {
            let voltages = match a.voltage.spec() {
                Ok(v) => v,
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(1);
                }
            };
            let mut s = spec(&a.scenario, a.solver.into(), voltages, a.out, a.fields, a.numerics);
            s.stations = a.stations;
            execute(s)
        }
        Command::Quasi1d { action } => one_d(SolverChoice::Quasi1d, action),
        Command::Area1d { action } => one_d(SolverChoice::Area1d, action),
        Command::Pnp2d { action: TwoDAction::Solve { scenario, voltage, out, numerics } } => {
            execute(spec(&scenario, SolverChoice::Pnp2d, VoltageSpec::Single { voltage }, out, true, numerics))
        }
        Command::Gfuncs { action } => report(gfuncs_dump(action)),
        Command::Scenario { action } => report(scenario_cmd(action)),
        Command::Replay { manifest, out } => match harness::replay(&manifest, &out) {
            Ok(r) if r.mismatched.is_empty() => {
                println!("reproduced {} outputs in {}", r.outcome.manifest.outputs.len(), out.display());
                ExitCode::SUCCESS
            }
            Ok(r) => {
                eprintln!("outputs differ from the manifest: {}", r.mismatched.join(", "));
                ExitCode::from(1)
            }
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(if e.is_no_convergence() { 2 } else { 1 })
            }
        },
    }
}

fn one_d(solver: SolverChoice, action: OneDAction) -> ExitCode {
    match action {
        OneDAction::Solve { scenario, voltage, out, numerics } => {
            execute(spec(&scenario, solver, VoltageSpec::Single { voltage }, out, true, numerics))
        }
        OneDAction::Sweep { scenario, sweep, out, numerics } => match VoltageSpec::parse_sweep(&sweep) {
            Ok(v) => execute(spec(&scenario, solver, v, out, false, numerics)),
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(1)
            }
        },
    }
}

fn report(result: anyhow::Result<()>) -> ExitCode {
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn gfuncs_dump(action: GfuncsAction) -> anyhow::Result<()> {
    let GfuncsAction::Dump { beta, lambda_min, lambda_max, points, out } = action;
    let rows = gfuncs::g_table(beta, lambda_min, lambda_max, points)?;
    match out {
        Some(path) => {
            let file = std::fs::File::create(&path).with_context(|| format!("creating {}", path.display()))?;
            harness::output::write_g_table(file, &rows)?;
        }
        None => harness::output::write_g_table(std::io::stdout().lock(), &rows)?,
    }
    Ok(())
}

fn scenario_cmd(action: ScenarioAction) -> anyhow::Result<()> {
    match action {
        ScenarioAction::List => {
            for name in fixtures::BUILTIN_NAMES {
                println!("{name}");
            }
        }
        ScenarioAction::Dump { name } => print!("{}", fixtures::builtin_file(&name)?.to_toml_string()?),
    }
    Ok(())
}
