//! The `gbq` command line.
//!
//! Every subcommand accepts `--config FILE`, a JSON [`RunConfig`]; flags
//! override values from the file. Each run writes its files to
//! `<output root>/<subcommand>/` and embeds the fully resolved config in
//! `report.json`, so `--config report.json` repeats the run exactly.
//!
//! Exit codes: `0` success, `2` invalid input, `3` numerical failure.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::evolution::{classify_outcome, evolve, FieldPair, Outcome, TimeIntegratorConfig};
use crate::experiments::{
    accuracy_test, build_initial, convergence_study, theorem_interval_bounds, threshold_search, ConvergenceAxis,
    ConvergenceSetup, InitialDataFamily, ThresholdSearchConfig,
};
use crate::io;
use crate::model::{kernel_convolve, regime_classify, EquationParams, KernelSpec};
use crate::petviashvili::{petviashvili_solve, SolitarySolveConfig};
use crate::spectral::{GridSpec, Spectral};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    /// Comma-separated columns.
    #[default]
    Csv,
    /// JSON documents of column arrays.
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum FamilyName {
    Zero,
    PetviashviliSoliton,
    HbqExactSoliton,
    Amp1,
    Amp2,
    Amp3,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum AxisName {
    Temporal,
    Spatial,
}

/// Flat run configuration shared by all subcommands. Absent keys take the
/// subcommand's defaults; required keys are reported by name.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kappa: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub speed: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub half_length: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_points: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_iter: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_final: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_steps: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub snapshot_stride: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub diagnostics_stride: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub blowup_cap: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dealias: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub family: Option<FamilyName>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub amplitude: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bracket: Option<[f64; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bisection_tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ladder: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub axis: Option<AxisName>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub resolutions: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reference_points: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reference_steps: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub coarse: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x_min: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x_max: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub points: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub format: Option<OutputFormat>,
}

impl RunConfig {
    /// Values present in `over` replace those in `self`.
    pub fn overlay(self, over: RunConfig) -> Result<RunConfig> {
        let mut base = to_object(&self);
        for (k, v) in to_object(&over) {
            base.insert(k, v);
        }
        serde_json::from_value(Value::Object(base)).map_err(|e| Error::Unsupported(format!("config merge failed: {e}")))
    }

    fn params(&self) -> Result<EquationParams<f64>> {
        EquationParams::new(
            req(self.alpha, "alpha")?,
            req(self.kappa, "kappa")?,
            req(self.beta, "beta")?,
            req(self.p, "p")?,
        )
    }

    fn grid(&self) -> Result<GridSpec<f64>> {
        GridSpec::new(req(self.half_length, "half_length")?, req(self.n_points, "n_points")?)
    }

    /// Fills integrator defaults (`dt = 1e-3`, diagnostics every step,
    /// snapshots at the ends, cap `1e4`) and builds the config.
    fn integrator(&mut self) -> Result<TimeIntegratorConfig<f64>> {
        let t_final = req(self.t_final, "t_final")?;
        if !(t_final > 0.0) || !t_final.is_finite() {
            return Err(Error::invalid("t_final", "must be finite and positive"));
        }
        if self.n_steps.is_none() {
            let dt = *self.dt.get_or_insert(1e-3);
            if !(dt > 0.0) || !dt.is_finite() {
                return Err(Error::invalid("dt", "must be finite and positive"));
            }
            self.n_steps = Some(TimeIntegratorConfig::with_max_dt(t_final, dt).n_steps);
        }
        let n_steps = req(self.n_steps, "n_steps")?;
        let mut cfg = TimeIntegratorConfig::new(t_final, n_steps);
        cfg.snapshot_stride = *self.snapshot_stride.get_or_insert(n_steps.max(1));
        cfg.diagnostics_stride = *self.diagnostics_stride.get_or_insert(1);
        cfg.blowup_cap = *self.blowup_cap.get_or_insert(cfg.blowup_cap);
        cfg.dealias = *self.dealias.get_or_insert(false);
        cfg.validate()?;
        Ok(cfg)
    }
}

fn to_object(cfg: &RunConfig) -> serde_json::Map<String, Value> {
    match serde_json::to_value(cfg) {
        Ok(Value::Object(m)) => m,
        _ => serde_json::Map::new(),
    }
}

fn req<T>(v: Option<T>, name: &'static str) -> Result<T> {
    v.ok_or_else(|| Error::invalid(name, "is required (flag or config key)"))
}

#[derive(Debug, Parser)]
#[command(
    name = "gbq",
    version,
    about = "Solitary waves and pseudo-spectral dynamics for the generalized Boussinesq equation"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve for a solitary-wave profile by Petviashvili iteration.
    Solitary(SolitaryArgs),
    /// Integrate an initial state in time.
    Evolve(EvolveArgs),
    /// Exact-solution accuracy test of the solver and the integrator.
    Accuracy(AccuracyArgs),
    /// Temporal or spatial convergence study.
    Converge(ConvergeArgs),
    /// Bisection search for the blow-up threshold amplitude.
    Threshold(ThresholdArgs),
    /// Classify a parameter set: discriminant, roots, existence criteria.
    Regime(RegimeArgs),
    /// Evaluate the Green's kernel and check it against the spectral inverse.
    Kernel(KernelArgs),
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// JSON config file (a previous report.json is accepted).
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output root; defaults to $GBQ_OUTPUT_DIR, then ./gbq-output.
    #[arg(long)]
    pub output_dir: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<OutputFormat>,
}

#[derive(Debug, Args)]
pub struct ModelArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub alpha: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub kappa: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub beta: Option<f64>,
    /// Nonlinearity exponent in f(u) = beta u^(p+1).
    #[arg(long)]
    pub p: Option<u32>,
}

#[derive(Debug, Args)]
pub struct GridArgs {
    /// Half-length L of the periodic box [-L, L).
    #[arg(long, allow_negative_numbers = true)]
    pub half_length: Option<f64>,
    #[arg(long)]
    pub n_points: Option<usize>,
}

#[derive(Debug, Args)]
pub struct TimeArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub t_final: Option<f64>,
    /// Number of steps M; overrides --dt.
    #[arg(long)]
    pub n_steps: Option<usize>,
    #[arg(long, allow_negative_numbers = true)]
    pub dt: Option<f64>,
    #[arg(long)]
    pub snapshot_stride: Option<usize>,
    #[arg(long)]
    pub diagnostics_stride: Option<usize>,
    #[arg(long, allow_negative_numbers = true)]
    pub blowup_cap: Option<f64>,
    #[arg(long)]
    pub dealias: Option<bool>,
}

#[derive(Debug, Args)]
pub struct SolitaryArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub grid: GridArgs,
    #[arg(long = "c", visible_alias = "speed", allow_negative_numbers = true)]
    pub speed: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub gamma: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub max_iter: Option<usize>,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args)]
pub struct EvolveArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub grid: GridArgs,
    #[command(flatten)]
    pub time: TimeArgs,
    #[arg(long, value_enum)]
    pub family: Option<FamilyName>,
    #[arg(long, allow_negative_numbers = true)]
    pub amplitude: Option<f64>,
    #[arg(long = "c", visible_alias = "speed", allow_negative_numbers = true)]
    pub speed: Option<f64>,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args)]
pub struct AccuracyArgs {
    /// Also run the M = 10 integration.
    #[arg(long)]
    pub coarse: Option<bool>,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args)]
pub struct ConvergeArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long = "c", visible_alias = "speed", allow_negative_numbers = true)]
    pub speed: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub half_length: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub t_final: Option<f64>,
    #[arg(long, value_enum)]
    pub axis: Option<AxisName>,
    /// Step counts M (temporal) or grid sizes N (spatial).
    #[arg(long, value_delimiter = ',')]
    pub resolutions: Option<Vec<usize>>,
    #[arg(long)]
    pub reference_points: Option<usize>,
    #[arg(long)]
    pub reference_steps: Option<usize>,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args)]
pub struct ThresholdArgs {
    #[arg(long, value_enum)]
    pub family: Option<FamilyName>,
    /// Amplitude bracket `lo,hi`; defaults to the energy-interval endpoints.
    #[arg(long, value_delimiter = ',', num_args = 2)]
    pub bracket: Option<Vec<f64>>,
    #[arg(long, allow_negative_numbers = true)]
    pub bisection_tol: Option<f64>,
    /// Amplitudes probed concurrently before bisecting.
    #[arg(long)]
    pub ladder: Option<usize>,
    #[command(flatten)]
    pub grid: GridArgs,
    #[command(flatten)]
    pub time: TimeArgs,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args)]
pub struct RegimeArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long = "c", visible_alias = "speed", allow_negative_numbers = true)]
    pub speed: Option<f64>,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args)]
pub struct KernelArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub kappa: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub x_min: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub x_max: Option<f64>,
    #[arg(long)]
    pub points: Option<usize>,
    /// Grid of the convolution oracle.
    #[command(flatten)]
    pub grid: GridArgs,
    #[command(flatten)]
    pub out: OutputArgs,
}

impl ModelArgs {
    fn fill(&self, c: &mut RunConfig) {
        c.alpha = self.alpha;
        c.kappa = self.kappa;
        c.beta = self.beta;
        c.p = self.p;
    }
}

impl GridArgs {
    fn fill(&self, c: &mut RunConfig) {
        c.half_length = self.half_length;
        c.n_points = self.n_points;
    }
}

impl TimeArgs {
    fn fill(&self, c: &mut RunConfig) {
        c.t_final = self.t_final;
        c.n_steps = self.n_steps;
        c.dt = self.dt;
        c.snapshot_stride = self.snapshot_stride;
        c.diagnostics_stride = self.diagnostics_stride;
        c.blowup_cap = self.blowup_cap;
        c.dealias = self.dealias;
    }
}

impl OutputArgs {
    fn fill(&self, c: &mut RunConfig) {
        c.output_dir = self.output_dir.clone();
        c.format = self.format;
    }
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Solitary(_) => "solitary",
            Command::Evolve(_) => "evolve",
            Command::Accuracy(_) => "accuracy",
            Command::Converge(_) => "converge",
            Command::Threshold(_) => "threshold",
            Command::Regime(_) => "regime",
            Command::Kernel(_) => "kernel",
        }
    }

    /// Config file path and the flag values as a config.
    fn flags(&self) -> (Option<&Path>, RunConfig) {
        let mut c = RunConfig::default();
        let out = match self {
            Command::Solitary(a) => {
                a.model.fill(&mut c);
                a.grid.fill(&mut c);
                c.speed = a.speed;
                c.gamma = a.gamma;
                c.tol = a.tol;
                c.max_iter = a.max_iter;
                &a.out
            }
            Command::Evolve(a) => {
                a.model.fill(&mut c);
                a.grid.fill(&mut c);
                a.time.fill(&mut c);
                c.family = a.family;
                c.amplitude = a.amplitude;
                c.speed = a.speed;
                &a.out
            }
            Command::Accuracy(a) => {
                c.coarse = a.coarse;
                &a.out
            }
            Command::Converge(a) => {
                a.model.fill(&mut c);
                c.speed = a.speed;
                c.half_length = a.half_length;
                c.t_final = a.t_final;
                c.axis = a.axis;
                c.resolutions = a.resolutions.clone();
                c.reference_points = a.reference_points;
                c.reference_steps = a.reference_steps;
                &a.out
            }
            Command::Threshold(a) => {
                c.family = a.family;
                c.bracket = a.bracket.as_ref().map(|b| [b[0], b[1]]);
                c.bisection_tol = a.bisection_tol;
                c.ladder = a.ladder;
                a.grid.fill(&mut c);
                a.time.fill(&mut c);
                &a.out
            }
            Command::Regime(a) => {
                a.model.fill(&mut c);
                c.speed = a.speed;
                &a.out
            }
            Command::Kernel(a) => {
                c.kappa = a.kappa;
                c.x_min = a.x_min;
                c.x_max = a.x_max;
                c.points = a.points;
                a.grid.fill(&mut c);
                &a.out
            }
        };
        out.fill(&mut c);
        (out.config.as_deref(), c)
    }
}

/// Result of a subcommand: files are written; `numerical_failure` selects
/// exit code 3 after partial outputs were preserved.
struct Completion {
    numerical_failure: Option<String>,
}

impl Completion {
    fn ok() -> Self {
        Self {
            numerical_failure: None,
        }
    }
}

/// Parses `args` (including the program name) and runs the subcommand.
pub fn run<I, S>(args: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli.command) {
        Ok(Completion {
            numerical_failure: None,
        }) => EXIT_OK,
        Ok(Completion {
            numerical_failure: Some(msg),
        }) => {
            eprintln!("error: {msg}");
            EXIT_NUMERICAL
        }
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_numerical() {
                EXIT_NUMERICAL
            } else {
                EXIT_INVALID
            }
        }
    }
}

fn execute(cmd: &Command) -> Result<Completion> {
    let (config_path, flags) = cmd.flags();
    let base = match config_path {
        Some(path) => io::read_config::<RunConfig>(path)?,
        None => RunConfig::default(),
    };
    let mut cfg = base.overlay(flags)?;
    let dir = io::resolve_output_dir(cfg.output_dir.as_deref()).join(cmd.name());
    let format = *cfg.format.get_or_insert(OutputFormat::Csv);
    // the embedded config must not pin the output location
    cfg.output_dir = None;
    let out = Output { dir, format };
    match cmd {
        Command::Solitary(_) => run_solitary(cfg, &out),
        Command::Evolve(_) => run_evolve(cfg, &out),
        Command::Accuracy(_) => run_accuracy(cfg, &out),
        Command::Converge(_) => run_converge(cfg, &out),
        Command::Threshold(_) => run_threshold(cfg, &out),
        Command::Regime(_) => run_regime(cfg, &out),
        Command::Kernel(_) => run_kernel(cfg, &out),
    }
}

struct Output {
    dir: PathBuf,
    format: OutputFormat,
}

impl Output {
    fn prepare(&self) -> Result<()> {
        io::ensure_dir(&self.dir)
    }

    fn path(&self, stem: &str) -> PathBuf {
        let ext = match self.format {
            OutputFormat::Csv => "csv",
            OutputFormat::Json => "json",
        };
        self.dir.join(format!("{stem}.{ext}"))
    }

    fn report(&self, cfg: &RunConfig, body: Value) -> Result<()> {
        let mut doc = serde_json::Map::new();
        doc.insert("config".into(), serde_json::to_value(cfg).unwrap_or(Value::Null));
        if let Value::Object(m) = body {
            doc.extend(m);
        }
        io::export_report(&self.dir.join("report.json"), &Value::Object(doc))
    }
}

fn run_solitary(mut cfg: RunConfig, out: &Output) -> Result<Completion> {
    let params = cfg.params()?;
    let grid = cfg.grid()?;
    let speed = req(cfg.speed, "speed")?;
    let mut solve = SolitarySolveConfig::new(speed, params.p_exp);
    solve.gamma = *cfg.gamma.get_or_insert(solve.gamma);
    solve.tol = *cfg.tol.get_or_insert(solve.tol);
    solve.max_iter = *cfg.max_iter.get_or_insert(solve.max_iter);
    solve.validate()?;
    let spectral = Spectral::new(grid.clone());

    let sol = petviashvili_solve(&spectral, &params, &solve)?;
    out.prepare()?;
    match out.format {
        OutputFormat::Csv => {
            io::export_profile(&out.path("profile"), &grid, &sol.profile)?;
            io::export_history(&out.path("history"), &sol.history)?;
        }
        OutputFormat::Json => {
            io::export_report(&out.path("profile"), &json!({ "x": grid.nodes(), "Q": *sol.profile }))?;
            io::export_report(&out.path("history"), &sol.history)?;
        }
    }
    out.report(
        &cfg,
        json!({
            "converged": sol.converged,
            "iterations": sol.iterations,
            "stabilizer": sol.stabilizer,
            "final": sol.history.last(),
        }),
    )?;
    if sol.converged {
        Ok(Completion::ok())
    } else {
        Ok(Completion {
            numerical_failure: Some(format!(
                "iteration stopped after {} steps without reaching tol = {:e}",
                sol.iterations, solve.tol
            )),
        })
    }
}

fn family_of(name: FamilyName, speed: Option<f64>) -> Result<Option<InitialDataFamily<f64>>> {
    Ok(match name {
        FamilyName::Zero => None,
        FamilyName::PetviashviliSoliton => Some(InitialDataFamily::PetviashviliSoliton {
            speed: req(speed, "speed")?,
        }),
        FamilyName::HbqExactSoliton => Some(InitialDataFamily::HbqExactSoliton),
        FamilyName::Amp1 => Some(InitialDataFamily::Amp1),
        FamilyName::Amp2 => Some(InitialDataFamily::Amp2),
        FamilyName::Amp3 => Some(InitialDataFamily::Amp3),
    })
}

fn run_evolve(mut cfg: RunConfig, out: &Output) -> Result<Completion> {
    let params = cfg.params()?;
    let grid = cfg.grid()?;
    let integrator = cfg.integrator()?;
    let name = req(cfg.family, "family")?;
    let family = family_of(name, cfg.speed)?;
    let amplitude = match family {
        Some(f) if f.is_amplitude_family() => req(cfg.amplitude, "amplitude")?,
        _ => 0.0,
    };
    let spectral = Spectral::new(grid.clone());
    let initial = match family {
        None => FieldPair::zeros(grid.n_points()),
        Some(f) => build_initial(&f, amplitude, &spectral, &params)?,
    };

    let traj = evolve(&initial, &spectral, &params, &integrator)?;
    out.prepare()?;
    match out.format {
        OutputFormat::Csv => {
            io::export_series(&out.path("series"), &traj.series)?;
            io::export_snapshots(&out.path("snapshots"), &grid, &traj.snapshots)?;
        }
        OutputFormat::Json => {
            io::export_report(&out.path("series"), &traj.series)?;
            let snaps: Vec<Value> = traj
                .snapshots
                .iter()
                .map(|s| json!({ "t": s.t, "u": *s.state.u, "v": *s.state.v }))
                .collect();
            io::export_report(
                &out.path("snapshots"),
                &json!({ "x": grid.nodes(), "snapshots": snaps }),
            )?;
        }
    }
    out.report(
        &cfg,
        json!({
            "outcome": traj.series.outcome,
            "class": classify_outcome(&traj.series),
            "final_time": traj.final_time,
            "relative_energy_drift": traj.series.relative_energy_drift(),
            "momentum_drift": traj.series.momentum_drift(),
            "samples": traj.series.len(),
        }),
    )?;
    match traj.series.outcome {
        Outcome::NonfiniteAt(t) => Ok(Completion {
            numerical_failure: Some(format!("non-finite state at t = {t}")),
        }),
        _ => Ok(Completion::ok()),
    }
}

fn run_accuracy(mut cfg: RunConfig, out: &Output) -> Result<Completion> {
    let coarse = *cfg.coarse.get_or_insert(true);
    let report = accuracy_test::<f64>(coarse)?;
    out.prepare()?;
    out.report(&cfg, json!({ "accuracy": report }))?;
    Ok(Completion::ok())
}

fn run_converge(mut cfg: RunConfig, out: &Output) -> Result<Completion> {
    let defaults = ConvergenceSetup::<f64>::default();
    let alpha = *cfg.alpha.get_or_insert(defaults.params.alpha);
    let kappa = *cfg.kappa.get_or_insert(defaults.params.kappa);
    let beta = *cfg.beta.get_or_insert(defaults.params.beta);
    let p = *cfg.p.get_or_insert(defaults.params.p_exp);
    let setup = ConvergenceSetup {
        params: EquationParams::new(alpha, kappa, beta, p)?,
        speed: *cfg.speed.get_or_insert(defaults.speed),
        half_length: *cfg.half_length.get_or_insert(defaults.half_length),
        t_final: *cfg.t_final.get_or_insert(defaults.t_final),
        reference_points: *cfg.reference_points.get_or_insert(defaults.reference_points),
        reference_steps: *cfg.reference_steps.get_or_insert(defaults.reference_steps),
    };
    let axis = *cfg.axis.get_or_insert(AxisName::Temporal);
    let (axis, default_res) = match axis {
        AxisName::Temporal => (ConvergenceAxis::Temporal, vec![50, 100, 200, 400, 800]),
        AxisName::Spatial => (ConvergenceAxis::Spatial, vec![64, 128, 256, 512]),
    };
    let res = cfg.resolutions.get_or_insert(default_res).clone();
    let report = convergence_study(&setup, axis, &res)?;
    out.prepare()?;
    match out.format {
        OutputFormat::Csv => io::export_convergence(&out.path("convergence"), &report)?,
        OutputFormat::Json => io::export_report(&out.path("convergence"), &report)?,
    }
    out.report(&cfg, json!({ "convergence": report }))?;
    Ok(Completion::ok())
}

fn run_threshold(mut cfg: RunConfig, out: &Output) -> Result<Completion> {
    let family = match req(cfg.family, "family")? {
        FamilyName::Amp1 => InitialDataFamily::Amp1,
        FamilyName::Amp2 => InitialDataFamily::Amp2,
        FamilyName::Amp3 => InitialDataFamily::Amp3,
        _ => return Err(Error::invalid("family", "threshold search needs amp1, amp2 or amp3")),
    };
    let mut search = ThresholdSearchConfig::new(family, [0.0, 0.0]);
    search.half_length = *cfg.half_length.get_or_insert(search.half_length);
    search.n_points = *cfg.n_points.get_or_insert(search.n_points);
    if cfg.t_final.is_none() {
        cfg.t_final = Some(search.integrator.t_final);
    }
    if cfg.diagnostics_stride.is_none() {
        cfg.diagnostics_stride = Some(search.integrator.diagnostics_stride);
    }
    search.integrator = cfg.integrator()?;
    search.bisection_tol = *cfg.bisection_tol.get_or_insert(search.bisection_tol);
    search.ladder = cfg.ladder;
    search.bracket = match cfg.bracket {
        Some(b) => b,
        None => {
            let spectral = Spectral::new(GridSpec::new(search.half_length, search.n_points)?);
            let quad = match family {
                InitialDataFamily::Amp3 => Some((&spectral, &search.params)),
                _ => None,
            };
            let bounds = theorem_interval_bounds(&family, crate::evolution::CUBIC_WELL_DEPTH, quad)?;
            match bounds.energy_roots.as_slice() {
                [lo, hi, ..] => [*lo, *hi],
                _ => return Err(Error::invalid("bracket", "no default bracket; pass --bracket lo,hi")),
            }
        }
    };
    cfg.bracket = Some(search.bracket);

    let report = threshold_search(&search)?;
    out.prepare()?;
    match out.format {
        OutputFormat::Csv => io::export_probes(&out.path("probes"), &report.probes)?,
        OutputFormat::Json => io::export_report(&out.path("probes"), &report.probes)?,
    }
    out.report(&cfg, json!({ "threshold": report }))?;
    Ok(Completion::ok())
}

fn run_regime(cfg: RunConfig, out: &Output) -> Result<Completion> {
    let params = cfg.params()?;
    let speed = req(cfg.speed, "speed")?;
    if !speed.is_finite() {
        return Err(Error::invalid("speed", "must be finite"));
    }
    let report = regime_classify(&params, speed);
    println!(
        "discriminant = {:.6}, profile_class = {}",
        report.discriminant,
        serde_json::to_value(report.profile_class)
            .ok()
            .and_then(|v| v.as_str().map(str::to_owned))
            .unwrap_or_default()
    );
    out.prepare()?;
    out.report(&cfg, json!({ "regime": report }))?;
    Ok(Completion::ok())
}

fn run_kernel(mut cfg: RunConfig, out: &Output) -> Result<Completion> {
    let kappa = req(cfg.kappa, "kappa")?;
    let spec = KernelSpec::new(kappa)?;
    let x_min = *cfg.x_min.get_or_insert(-10.0);
    let x_max = *cfg.x_max.get_or_insert(10.0);
    let points = *cfg.points.get_or_insert(401);
    if !(x_min < x_max) || points < 2 {
        return Err(Error::invalid("x_max", "need x_min < x_max and points >= 2"));
    }
    let half_length = *cfg.half_length.get_or_insert(20.0);
    let n_points = *cfg.n_points.get_or_insert(1024);
    let grid = GridSpec::new(half_length, n_points)?;
    let spectral = Spectral::new(grid.clone());
    let f = grid.sample(|x| (-x * x).exp());
    let direct = kernel_convolve(&f, &grid, &spec)?;
    let oracle_error = direct.max_abs_diff(&spectral.helmholtz_inverse(&f, kappa)?);

    let h = (x_max - x_min) / (points - 1) as f64;
    let xs: Vec<f64> = (0..points).map(|i| x_min + i as f64 * h).collect();
    out.prepare()?;
    match out.format {
        OutputFormat::Csv => io::write_columns(
            &out.path("kernel"),
            &["x", "K"],
            xs.iter().map(|&x| vec![x, spec.value(x)]),
        )?,
        OutputFormat::Json => {
            let ks: Vec<f64> = xs.iter().map(|&x| spec.value(x)).collect();
            io::export_report(&out.path("kernel"), &json!({ "x": xs, "K": ks }))?
        }
    }
    out.report(
        &cfg,
        json!({
            "kernel": spec,
            "convolution_vs_spectral_inverse": oracle_error,
        }),
    )?;
    Ok(Completion::ok())
}
