//! Run orchestration: scenario loading, solver dispatch, comparison reports,
//! CSV artifacts and a replayable run manifest.

mod compare;
pub mod output;

pub use compare::{
    compare, default_stations, relative_l2, ring_weights, ComparisonReport, CurrentDiff, ProfileDiff, ReportRow,
    SolverRun, StationProfile,
};

use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::area1d::{self, AreaAveragedSolution, AreaOptions};
use crate::error::{Error, Result};
use crate::fixtures;
use crate::model::{nondimensionalize, PoreScenario, ScenarioFile};
use crate::pnp2d::{self, graded_faces, Field2D, Pnp2dOptions};
use crate::quasi1d::{self, IvCurve, IvPoint, QuasiOptions, QuasiSolution};

pub const MANIFEST_FILE: &str = "run_manifest.json";
/// Radial samples per axial node in `fields.csv`.
const FIELD_RADIAL_SAMPLES: usize = 41;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverKind {
    Quasi1d,
    Area1d,
    Pnp2d,
}

impl SolverKind {
    pub fn label(self) -> &'static str {
        match self {
            SolverKind::Quasi1d => "quasi1d",
            SolverKind::Area1d => "area1d",
            SolverKind::Pnp2d => "pnp2d",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverChoice {
    Quasi1d,
    Area1d,
    Pnp2d,
    All,
}

impl SolverChoice {
    pub fn kinds(self) -> Vec<SolverKind> {
        match self {
            SolverChoice::Quasi1d => vec![SolverKind::Quasi1d],
            SolverChoice::Area1d => vec![SolverKind::Area1d],
            SolverChoice::Pnp2d => vec![SolverKind::Pnp2d],
            SolverChoice::All => vec![SolverKind::Quasi1d, SolverKind::Area1d, SolverKind::Pnp2d],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum VoltageSpec {
    Single { voltage: f64 },
    Sweep { start: f64, end: f64, points: usize },
}

impl VoltageSpec {
    /// Parses `start:end:points`.
    pub fn parse_sweep(text: &str) -> Result<Self> {
        let parts: Vec<&str> = text.split(':').collect();
        let bad = || Error::Config(format!("sweep '{text}' is not of the form start:end:points"));
        if parts.len() != 3 {
            return Err(bad());
        }
        let start: f64 = parts[0].trim().parse().map_err(|_| bad())?;
        let end: f64 = parts[1].trim().parse().map_err(|_| bad())?;
        let points: usize = parts[2].trim().parse().map_err(|_| bad())?;
        let spec = VoltageSpec::Sweep { start, end, points };
        spec.voltages()?;
        Ok(spec)
    }

    pub fn voltages(&self) -> Result<Vec<f64>> {
        match *self {
            VoltageSpec::Single { voltage } if voltage.is_finite() => Ok(vec![voltage]),
            VoltageSpec::Single { .. } => Err(Error::Config("voltage must be finite".into())),
            VoltageSpec::Sweep { start, end, points } => {
                if points == 0 || !start.is_finite() || !end.is_finite() {
                    return Err(Error::Config("sweep range is empty".into()));
                }
                if points == 1 {
                    return Ok(vec![start]);
                }
                if start == end {
                    return Err(Error::Config("sweep with several points needs start != end".into()));
                }
                let m = (points - 1) as f64;
                Ok((0..points).map(|k| start + (end - start) * (k as f64 / m)).collect())
            }
        }
    }
}

/// Numerical settings that override the scenario file's `[numerics]` table.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct NumericOverrides {
    pub axial_intervals: Option<usize>,
    pub axial_grading: Option<f64>,
    pub nx: Option<usize>,
    pub nr: Option<usize>,
    pub grading: Option<f64>,
    pub tol_2d: Option<f64>,
    /// Replace the smoothed closed forms by radial solves with this many points.
    pub g_oracle: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResolvedOptions {
    pub quasi1d: QuasiOptions,
    pub area1d: AreaOptions,
    pub pnp2d: Pnp2dOptions,
}

pub fn resolve_options(file: &ScenarioFile, o: &NumericOverrides) -> ResolvedOptions {
    let num = file.numerics.clone().unwrap_or_default();
    let axial = o.axial_intervals.or(num.axial_intervals).unwrap_or(1000);
    let axial_grading = o.axial_grading.or(num.axial_grading).unwrap_or(0.0);
    let mut quasi = QuasiOptions { axial_intervals: axial, grading: axial_grading, ..Default::default() };
    if let Some(n) = o.g_oracle {
        quasi = quasi.with_oracle(n);
    }
    let base = Pnp2dOptions::default();
    ResolvedOptions {
        quasi1d: quasi,
        area1d: AreaOptions { axial_intervals: axial, grading: axial_grading, ..Default::default() },
        pnp2d: Pnp2dOptions {
            nx: o.nx.or(num.nx_2d).unwrap_or(base.nx),
            nr: o.nr.or(num.nr_2d).unwrap_or(base.nr),
            grading: o.grading.or(num.grading_2d).unwrap_or(base.grading),
            tol: o.tol_2d.unwrap_or(base.tol),
            ..base
        },
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum ScenarioSource {
    Path(PathBuf),
    Builtin(String),
    /// Scenario file contents.
    Inline(String),
}

impl ScenarioSource {
    /// An existing file wins over a built-in name of the same spelling.
    pub fn from_arg(arg: &str) -> Self {
        let path = Path::new(arg);
        if !path.exists() && fixtures::BUILTIN_NAMES.contains(&arg) {
            ScenarioSource::Builtin(arg.to_string())
        } else {
            ScenarioSource::Path(path.to_path_buf())
        }
    }

    /// Parsed scenario plus the exact text it came from.
    pub fn load(&self) -> Result<(ScenarioFile, String)> {
        let text = match self {
            ScenarioSource::Path(p) => std::fs::read_to_string(p)
                .map_err(|e| Error::Config(format!("cannot read scenario {}: {e}", p.display())))?,
            ScenarioSource::Builtin(name) => fixtures::builtin_file(name)?.to_toml_string()?,
            ScenarioSource::Inline(text) => text.clone(),
        };
        Ok((ScenarioFile::from_toml_str(&text)?, text))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSpec {
    pub scenario: ScenarioSource,
    pub solver: SolverChoice,
    pub voltages: VoltageSpec,
    pub out: PathBuf,
    /// Write field data; needs a single voltage.
    pub fields: bool,
    pub numerics: NumericOverrides,
    /// Profile comparison stations; defaults depend on the scenario.
    pub stations: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputRecord {
    pub file: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub scenario_name: String,
    pub scenario_toml: String,
    /// Hash of the scenario text and every setting that affects the outputs.
    pub input_sha256: String,
    pub solver: SolverChoice,
    pub voltages: VoltageSpec,
    pub fields: bool,
    pub numerics: NumericOverrides,
    pub stations: Option<Vec<f64>>,
    pub options: ResolvedOptions,
    pub outputs: Vec<OutputRecord>,
    pub runtimes_s: Vec<(String, f64)>,
    pub failed_points: usize,
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub manifest: RunManifest,
    pub report: Option<ComparisonReport>,
    pub runs: Vec<SolverRun>,
}

impl RunOutcome {
    pub fn exit_code(&self) -> i32 {
        if self.manifest.failed_points > 0 {
            2
        } else {
            0
        }
    }
}

/// Process exit status for a finished or failed run.
pub fn exit_code(result: &Result<RunOutcome>) -> i32 {
    match result {
        Ok(outcome) => outcome.exit_code(),
        Err(e) if e.is_no_convergence() => 2,
        Err(_) => 1,
    }
}

/// Caps the global worker pool at `NANOPNP_THREADS` when set.
pub fn configure_threads() -> Result<()> {
    let Ok(value) = std::env::var("NANOPNP_THREADS") else {
        return Ok(());
    };
    let n: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Error::Config(format!("NANOPNP_THREADS must be a positive integer, got '{value}'")))?;
    // a pool that is already initialized keeps its size
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn input_hash(text: &str, spec: &RunSpec) -> Result<String> {
    let settings = serde_json::json!({
        "solver": spec.solver,
        "voltages": spec.voltages,
        "fields": spec.fields,
        "numerics": spec.numerics,
        "stations": spec.stations,
    });
    let mut bytes = text.as_bytes().to_vec();
    bytes.push(b'\n');
    bytes.extend(serde_json::to_vec(&settings).map_err(|e| Error::Config(e.to_string()))?);
    Ok(sha256_hex(&bytes))
}

enum Solution {
    Quasi(QuasiSolution),
    Area(AreaAveragedSolution),
    Twod(Field2D),
}

struct SolverOutput {
    kind: SolverKind,
    curve: IvCurve,
    solution: Option<Solution>,
    runtime_s: f64,
}

fn point(v: f64, current: f64, iterations: usize, residual: f64, scale: f64) -> IvPoint {
    IvPoint { voltage: v, current_dimensionless: current, current_a: current * scale, iterations, residual, error: None }
}

fn single(kind: SolverKind, scenario: &PoreScenario, v: f64, opts: &ResolvedOptions) -> Result<(IvPoint, Solution)> {
    let scale = nondimensionalize(scenario)?.current_scale;
    Ok(match kind {
        SolverKind::Quasi1d => {
            let s = quasi1d::solve_with_continuation(scenario, v, &opts.quasi1d, None)?;
            (point(v, s.current_i, s.iterations, s.residual, scale), Solution::Quasi(s))
        }
        SolverKind::Area1d => {
            let s = area1d::solve_with_continuation(scenario, v, &opts.area1d, None)?;
            (point(v, s.current_i, s.iterations, s.residual, scale), Solution::Area(s))
        }
        SolverKind::Pnp2d => {
            let s = pnp2d::solve(scenario, v, &opts.pnp2d)?;
            (point(v, s.current_i, s.iterations, s.residual, scale), Solution::Twod(s))
        }
    })
}

fn run_solver(kind: SolverKind, scenario: &PoreScenario, voltages: &[f64], opts: &ResolvedOptions) -> Result<SolverOutput> {
    let t = Instant::now();
    let (curve, solution) = if voltages.len() == 1 {
        match single(kind, scenario, voltages[0], opts) {
            Ok((p, s)) => (IvCurve { points: vec![p] }, Some(s)),
            Err(e) if e.is_no_convergence() => {
                log::warn!("{}: {e}", kind.label());
                (IvCurve { points: vec![IvPoint::failed(voltages[0], &e)] }, None)
            }
            Err(e) => return Err(e),
        }
    } else {
        let curve = match kind {
            SolverKind::Quasi1d => quasi1d::iv_sweep(scenario, voltages, &opts.quasi1d)?,
            SolverKind::Area1d => area1d::iv_sweep(scenario, voltages, &opts.area1d)?,
            SolverKind::Pnp2d => pnp2d::iv_sweep(scenario, voltages, &opts.pnp2d)?,
        };
        (curve, None)
    };
    Ok(SolverOutput { kind, curve, solution, runtime_s: t.elapsed().as_secs_f64() })
}

fn interp(x: &[f64], y: &[f64], at: f64) -> f64 {
    let k = x.partition_point(|&v| v <= at).clamp(1, x.len() - 1) - 1;
    let t = ((at - x[k]) / (x[k + 1] - x[k])).clamp(0.0, 1.0);
    (1.0 - t) * y[k] + t * y[k + 1]
}

/// Cross-section profile of any solver at station `x` on the radial samples `xi`.
fn station_profile(
    solution: &Solution,
    scenario: &PoreScenario,
    x: f64,
    xi: &[f64],
) -> Result<StationProfile> {
    let m = xi.len();
    Ok(match solution {
        Solution::Quasi(s) => {
            let params = nondimensionalize(scenario)?;
            let c = quasi1d::cross_section(s, scenario, &params, x, xi)?;
            StationProfile { x, xi: c.xi, phi: c.phi, n: c.n, p: c.p }
        }
        Solution::Area(s) => StationProfile {
            x,
            xi: xi.to_vec(),
            phi: vec![interp(&s.x, &s.phi, x); m],
            n: vec![interp(&s.x, &s.n, x); m],
            p: vec![interp(&s.x, &s.p, x); m],
        },
        Solution::Twod(f) => {
            let c = f.cross_section(x)?;
            StationProfile { x, xi: c.xi, phi: c.phi, n: c.n, p: c.p }
        }
    })
}

fn write_fields(out: &Path, o: &SolverOutput, scenario: &PoreScenario, files: &mut Vec<String>) -> Result<()> {
    match &o.solution {
        Some(Solution::Quasi(s)) => {
            output::write_axial(&out.join("axial.csv"), s, scenario)?;
            let f = quasi1d::reconstruct_fields(s, scenario, FIELD_RADIAL_SAMPLES)?;
            output::write_fields(&out.join("fields.csv"), &f)?;
            files.extend(["axial.csv".into(), "fields.csv".into()]);
        }
        Some(Solution::Area(s)) => {
            output::write_axial_area(&out.join("axial_area1d.csv"), s)?;
            files.push("axial_area1d.csv".into());
        }
        Some(Solution::Twod(f)) => {
            output::write_fields2d(&out.join("fields2d.csv"), f)?;
            output::write_current_profile(&out.join("current_profile.csv"), f)?;
            files.extend(["fields2d.csv".into(), "current_profile.csv".into()]);
        }
        None => {}
    }
    Ok(())
}

/// Executes `spec`, writing every artifact below `spec.out`.
pub fn run(spec: &RunSpec) -> Result<RunOutcome> {
    let (file, text) = spec.scenario.load()?;
    let scenario = file.to_scenario()?;
    let voltages = spec.voltages.voltages()?;
    if spec.fields && voltages.len() != 1 {
        return Err(Error::Config("--fields needs a single --voltage".into()));
    }
    let opts = resolve_options(&file, &spec.numerics);
    std::fs::create_dir_all(&spec.out)
        .map_err(|e| Error::Config(format!("cannot create output directory {}: {e}", spec.out.display())))?;

    let kinds = spec.solver.kinds();
    let results: Vec<SolverOutput> = kinds
        .par_iter()
        .map(|&k| run_solver(k, &scenario, &voltages, &opts))
        .collect::<Result<_>>()?;

    let out = &spec.out;
    let mut files = Vec::new();
    for o in &results {
        let name = format!("iv_{}.csv", o.kind.label());
        output::write_iv(&out.join(&name), &o.curve)?;
        files.push(name);
        if spec.fields {
            write_fields(out, o, &scenario, &mut files)?;
        }
    }

    let stations = spec.stations.clone().unwrap_or_else(|| default_stations(&file.name));
    let faces = graded_faces(opts.pnp2d.nr, opts.pnp2d.grading);
    let xi: Vec<f64> = faces.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
    let mut runs = Vec::new();
    for o in &results {
        let profiles = match &o.solution {
            Some(s) if results.len() > 1 => {
                stations.iter().map(|&x| station_profile(s, &scenario, x, &xi)).collect::<Result<Vec<_>>>()?
            }
            _ => Vec::new(),
        };
        runs.push(SolverRun {
            label: o.kind.label().to_string(),
            curve: o.curve.clone(),
            stations: profiles,
            runtime_s: o.runtime_s,
        });
    }

    let report = if runs.len() > 1 {
        // the 2D solver is the reference whenever it ran
        let r = runs.iter().position(|r| r.label == SolverKind::Pnp2d.label()).unwrap_or(0);
        let others: Vec<SolverRun> = runs.iter().enumerate().filter(|(i, _)| *i != r).map(|(_, v)| v.clone()).collect();
        let report = compare(&runs[r], &others)?;
        output::write_report(&out.join("report.csv"), &report)?;
        files.push("report.csv".into());
        if !report.profiles.is_empty() {
            output::write_profile_report(&out.join("profile_report.csv"), &report)?;
            let radii: Vec<f64> = stations.iter().map(|&x| scenario.radius(x)).collect::<Result<_>>()?;
            let entries: Vec<(&str, &[StationProfile], Vec<f64>)> =
                runs.iter().map(|r| (r.label.as_str(), r.stations.as_slice(), radii.clone())).collect();
            output::write_cross_sections(&out.join("cross_sections.csv"), &entries)?;
            files.extend(["profile_report.csv".into(), "cross_sections.csv".into()]);
        }
        Some(report)
    } else {
        None
    };

    let mut outputs = Vec::new();
    for f in &files {
        outputs.push(OutputRecord { file: f.clone(), sha256: sha256_hex(&std::fs::read(out.join(f))?) });
    }
    let failed_points = results.iter().flat_map(|o| &o.curve.points).filter(|p| !p.converged()).count();
    let manifest = RunManifest {
        tool: env!("CARGO_PKG_NAME").to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        scenario_name: file.name.clone(),
        scenario_toml: text.clone(),
        input_sha256: input_hash(&text, spec)?,
        solver: spec.solver,
        voltages: spec.voltages.clone(),
        fields: spec.fields,
        numerics: spec.numerics.clone(),
        stations: spec.stations.clone(),
        options: opts,
        outputs,
        runtimes_s: results.iter().map(|o| (o.kind.label().to_string(), o.runtime_s)).collect(),
        failed_points,
    };
    let json = serde_json::to_string_pretty(&manifest).map_err(|e| Error::Config(e.to_string()))?;
    std::fs::write(out.join(MANIFEST_FILE), json)?;
    Ok(RunOutcome { manifest, report, runs })
}

pub fn load_manifest(path: &Path) -> Result<RunManifest> {
    let path = if path.is_dir() { path.join(MANIFEST_FILE) } else { path.to_path_buf() };
    let text = std::fs::read_to_string(&path)
        .map_err(|e| Error::Config(format!("cannot read manifest {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::Config(format!("invalid manifest {}: {e}", path.display())))
}

#[derive(Debug, Clone)]
pub struct ReplayOutcome {
    pub outcome: RunOutcome,
    /// Outputs whose hash differs from the manifest, or that are missing.
    pub mismatched: Vec<String>,
}

/// Re-runs a manifest into `out` and checks every output hash.
pub fn replay(manifest_path: &Path, out: &Path) -> Result<ReplayOutcome> {
    let m = load_manifest(manifest_path)?;
    let spec = RunSpec {
        scenario: ScenarioSource::Inline(m.scenario_toml.clone()),
        solver: m.solver,
        voltages: m.voltages.clone(),
        out: out.to_path_buf(),
        fields: m.fields,
        numerics: m.numerics.clone(),
        stations: m.stations.clone(),
    };
    if input_hash(&m.scenario_toml, &spec)? != m.input_sha256 {
        return Err(Error::Config("manifest input hash does not match its contents".into()));
    }
    let outcome = run(&spec)?;
    let mut mismatched = Vec::new();
    for rec in &m.outputs {
        match outcome.manifest.outputs.iter().find(|o| o.file == rec.file) {
            Some(o) if o.sha256 == rec.sha256 => {}
            _ => mismatched.push(rec.file.clone()),
        }
    }
    Ok(ReplayOutcome { outcome, mismatched })
}
