// SPDX-License-Identifier: Apache-2.0

//! Command-line front end: scenario runs, sweeps and figure presets written
//! as CSV.

use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use crate::analysis::{
    critical_lambda, markovian_separability_time, separability_events, survival_threshold, DEFAULT_EPS,
    DEFAULT_PROBE_DT,
};
use crate::bath::BathSpec;
use crate::coefficients::{build_table, CoefficientSet, COEFFICIENT_LABELS};
use crate::config::{ConfigError, ScenarioConfig};
use crate::dynamics::{evolve, evolve_with_table, ModelKind, StepOptions, SystemParams, Trajectory};
use crate::gaussian::UPPER_LABELS;
use crate::Error;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Exit code for malformed input.
pub const EXIT_CONFIG: i32 = 1;
/// Exit code for a numerical failure during a run.
pub const EXIT_NUMERICAL: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "gaussdyn", version, about = "Entanglement dynamics of two coupled oscillators in Gaussian states")]
pub struct Cli {
    /// Worker threads for sweeps and presets (overrides GAUSSDYN_THREADS).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Tabulate the bath-induced coefficients for each mode.
    Coeffs(ScenarioArgs),
    /// Integrate one scenario and write E_N, V_s and the covariance.
    Evolve(ScenarioArgs),
    /// Run one scenario per value of a parameter; `output` is a directory.
    Sweep(SweepArgs),
    /// Critical coupling over a range of squeezing values.
    PhaseLine(PhaseLineArgs),
    /// Survival threshold, Markovian separability time and the death and
    /// revival times of a scenario.
    Survival(ScenarioArgs),
    /// Regenerate the data behind one of the figures (2 to 8).
    Figure(FigureArgs),
}

/// Scenario keys; flags override the values read from `--config`.
#[derive(Debug, Clone, Default, Args)]
pub struct ScenarioArgs {
    /// File of `key = value` lines.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub model: Option<String>,
    #[arg(long)]
    pub r: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub lambda: Option<String>,
    #[arg(long)]
    pub gamma0: Option<String>,
    #[arg(long)]
    pub cutoff: Option<String>,
    #[arg(long)]
    pub kt: Option<String>,
    #[arg(long = "t_end", alias = "t-end")]
    pub t_end: Option<String>,
    #[arg(long)]
    pub dt: Option<String>,
    #[arg(long)]
    pub output: Option<String>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub scenario: ScenarioArgs,
    /// Parameter to vary: r, lambda or gamma0.
    #[arg(long)]
    pub param: String,
    /// Comma-separated values.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
    pub values: Vec<f64>,
}

#[derive(Debug, Args)]
pub struct PhaseLineArgs {
    #[arg(long, default_value_t = 0.01)]
    pub r_min: f64,
    #[arg(long, default_value_t = 0.3)]
    pub r_max: f64,
    #[arg(long, default_value_t = 30)]
    pub points: usize,
    #[arg(long, default_value_t = DEFAULT_PROBE_DT)]
    pub probe_dt: f64,
    #[arg(long, default_value_t = 1e-4)]
    pub tol: f64,
    /// CSV path; standard output when absent.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FigureArgs {
    /// Figure number, 2 to 8.
    pub number: u32,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
    #[arg(long = "t_end", alias = "t-end", default_value_t = 30.0)]
    pub t_end: f64,
    #[arg(long, default_value_t = 1e-3)]
    pub dt: f64,
}

/// Failure of a command, carrying its exit code.
#[derive(Debug)]
pub enum CliError {
    Config(String),
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Numerical(_) => EXIT_NUMERICAL,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Numerical(m) => write!(f, "numerical failure: {m}"),
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Domain(_) | Error::Unstable { .. } | Error::Unsupported(_) => CliError::Config(e.to_string()),
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Config(format!("i/o: {e}"))
    }
}

type CliResult<T = ()> = std::result::Result<T, CliError>;

impl ScenarioArgs {
    pub fn resolve(&self) -> CliResult<ScenarioConfig> {
        let mut cfg = ScenarioConfig::default();
        if let Some(path) = &self.config {
            let text = fs::read_to_string(path)
                .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
            cfg.apply_text(&text)?;
        }
        let flags = [
            ("model", &self.model),
            ("r", &self.r),
            ("lambda", &self.lambda),
            ("gamma0", &self.gamma0),
            ("cutoff", &self.cutoff),
            ("kt", &self.kt),
            ("t_end", &self.t_end),
            ("dt", &self.dt),
            ("output", &self.output),
        ];
        for (key, value) in flags {
            if let Some(v) = value {
                cfg.set(key, v)?;
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn open_output(path: Option<&Path>) -> CliResult<Box<dyn Write>> {
    Ok(match path {
        Some(p) => {
            let f = File::create(p).map_err(|e| CliError::Config(format!("cannot create {}: {e}", p.display())))?;
            Box::new(BufWriter::new(f))
        }
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn write_metadata(w: &mut dyn Write, lines: &[String]) -> io::Result<()> {
    writeln!(w, "# gaussdyn {VERSION}")?;
    writeln!(w, "# units: hbar=M=Omega_r=1")?;
    for l in lines {
        writeln!(w, "# {l}")?;
    }
    Ok(())
}

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

/// Writes a trajectory as `t,e_n,v_s,v11..v44,physical`.
pub fn write_trajectory(w: &mut dyn Write, meta: &[String], traj: &Trajectory) -> io::Result<()> {
    write_metadata(w, meta)?;
    writeln!(w, "t,e_n,v_s,{},physical", UPPER_LABELS.join(","))?;
    for i in 0..traj.len() {
        write!(w, "{},{},{}", num(traj.times[i]), num(traj.log_neg[i]), num(traj.v_s[i]))?;
        for &v in traj.covariances[i].upper().iter() {
            write!(w, ",{}", num(v))?;
        }
        writeln!(w, ",{}", u8::from(traj.physicality_flags[i]))?;
    }
    w.flush()
}

fn run_scenario(cfg: &ScenarioConfig) -> CliResult<Trajectory> {
    Ok(evolve(&cfg.params()?, cfg.model, cfg.t_end, cfg.dt)?)
}

fn cmd_evolve(args: &ScenarioArgs) -> CliResult {
    let cfg = args.resolve()?;
    let traj = run_scenario(&cfg)?;
    let mut w = open_output(cfg.output.as_deref())?;
    write_trajectory(&mut *w, &cfg.to_lines(), &traj)?;
    Ok(())
}

fn cmd_coeffs(args: &ScenarioArgs) -> CliResult {
    let cfg = args.resolve()?;
    let params = cfg.params()?;
    let n = (cfg.t_end / cfg.dt - 1e-9).ceil() as usize;
    let times: Vec<f64> = (0..=n).map(|k| (k as f64 * cfg.dt).min(cfg.t_end)).collect();
    let rows: Vec<CoefficientSet> = if params.bath.is_decoupled() {
        times.iter().map(|&t| CoefficientSet::zero(t)).collect()
    } else {
        let table = build_table(cfg.t_end, StepOptions::default().table_samples, &params.modes()?, &params.bath)?;
        times.iter().map(|&t| table.at(t)).collect::<crate::Result<_>>()?
    };
    let mut w = open_output(cfg.output.as_deref())?;
    write_metadata(&mut *w, &cfg.to_lines())?;
    writeln!(w, "t,{}", COEFFICIENT_LABELS.join(","))?;
    for c in rows {
        write!(w, "{}", num(c.t))?;
        for v in c.to_array() {
            write!(w, ",{}", num(v))?;
        }
        writeln!(w)?;
    }
    w.flush()?;
    Ok(())
}

fn label(x: f64) -> String {
    format!("{x}")
}

fn cmd_sweep(args: &SweepArgs) -> CliResult {
    let base = args.scenario.resolve()?;
    let dir = base
        .output
        .clone()
        .ok_or_else(|| CliError::Config("config key 'output': sweep needs an output directory".into()))?;
    let mut points = Vec::with_capacity(args.values.len());
    for &v in &args.values {
        let mut cfg = base.clone();
        cfg.set(&args.param, &v.to_string())?;
        if args.param == "model" || args.param == "output" {
            return Err(CliError::Config(format!("config key '{}': not a numeric parameter", args.param)));
        }
        cfg.validate()?;
        points.push(cfg);
    }
    fs::create_dir_all(&dir)?;
    let trajs: Vec<Trajectory> = points.par_iter().map(run_scenario).collect::<CliResult<_>>()?;
    let mut index = open_output(Some(&dir.join("index.csv")))?;
    write_metadata(&mut *index, &base.to_lines())?;
    writeln!(index, "file,model,r,lambda,gamma0")?;
    for (cfg, traj) in points.iter().zip(&trajs) {
        let name = format!("{}_{}_{}.csv", cfg.model, args.param, label(pick(cfg, &args.param)));
        let mut w = open_output(Some(&dir.join(&name)))?;
        write_trajectory(&mut *w, &cfg.to_lines(), traj)?;
        writeln!(index, "{name},{},{},{},{}", cfg.model, cfg.r, cfg.lambda, cfg.gamma0)?;
    }
    index.flush()?;
    Ok(())
}

fn pick(cfg: &ScenarioConfig, key: &str) -> f64 {
    match key {
        "r" => cfg.r,
        "lambda" => cfg.lambda,
        "gamma0" => cfg.gamma0,
        "cutoff" => cfg.cutoff,
        "kt" => cfg.kt,
        "t_end" => cfg.t_end,
        _ => cfg.dt,
    }
}

fn write_phase_line(w: &mut dyn Write, meta: &[String], line: &[(f64, Option<f64>)]) -> io::Result<()> {
    write_metadata(w, meta)?;
    writeln!(w, "r,lambda_c")?;
    for &(r, l) in line {
        writeln!(w, "{},{}", num(r), l.map_or_else(|| "NaN".to_string(), num))?;
    }
    w.flush()
}

fn phase_line_grid(r_min: f64, r_max: f64, points: usize) -> CliResult<Vec<f64>> {
    if !(r_min >= 0.0 && r_max > r_min && r_max.is_finite()) {
        return Err(CliError::Config(format!("r range must satisfy 0 <= r_min < r_max, got [{r_min}, {r_max}]")));
    }
    if points < 2 {
        return Err(CliError::Config(format!("points must be >= 2, got {points}")));
    }
    Ok((0..points).map(|k| r_min + (r_max - r_min) * k as f64 / (points - 1) as f64).collect())
}

fn compute_phase_line(rs: &[f64], probe_dt: f64, tol: f64) -> CliResult<Vec<(f64, Option<f64>)>> {
    Ok(rs
        .par_iter()
        .map(|&r| critical_lambda(r, probe_dt, tol).map(|l| (r, l)))
        .collect::<crate::Result<_>>()?)
}

fn cmd_phase_line(args: &PhaseLineArgs) -> CliResult {
    let rs = phase_line_grid(args.r_min, args.r_max, args.points)?;
    let line = compute_phase_line(&rs, args.probe_dt, args.tol)?;
    let meta = vec![format!("probe_dt={}", args.probe_dt), format!("tol={}", args.tol)];
    let mut w = open_output(args.output.as_deref())?;
    write_phase_line(&mut *w, &meta, &line)?;
    Ok(())
}

fn cmd_survival(args: &ScenarioArgs) -> CliResult {
    let cfg = args.resolve()?;
    let mut out = open_output(cfg.output.as_deref())?;
    let rc = survival_threshold(cfg.kt)?;
    writeln!(out, "r_c = {rc:.6}")?;
    if cfg.gamma0 > 0.0 {
        match markovian_separability_time(cfg.r, cfg.kt, cfg.gamma0)? {
            Some(t) => writeln!(out, "markovian_separability_time = {t:.6}")?,
            None => writeln!(out, "markovian_separability_time = never")?,
        }
    }
    let traj = run_scenario(&cfg)?;
    let ev = separability_events(&traj, DEFAULT_EPS)?;
    let list = |v: &[f64]| v.iter().map(|t| format!("{t:.6}")).collect::<Vec<_>>().join(",");
    writeln!(out, "model = {}", cfg.model)?;
    writeln!(out, "death_times = {}", list(&ev.death_times))?;
    writeln!(out, "revival_times = {}", list(&ev.revival_times))?;
    writeln!(out, "survived = {}", ev.survived)?;
    out.flush()?;
    Ok(())
}

const FIGURE_LAMBDAS: [f64; 5] = [0.0, 0.2, 0.8, -0.2, -0.8];
const FIGURE_GAMMA0: f64 = 0.06;

fn scenario(model: ModelKind, r: f64, lambda: f64, gamma0: f64, t_end: f64, dt: f64) -> ScenarioConfig {
    ScenarioConfig {
        model,
        r,
        lambda,
        gamma0,
        t_end,
        dt,
        ..ScenarioConfig::default()
    }
}

// Runs every scenario, sharing one coefficient table per distinct bath and
// coupling.
fn run_all(cfgs: &[ScenarioConfig]) -> CliResult<Vec<Trajectory>> {
    for c in cfgs {
        c.validate()?;
    }
    let opts = StepOptions::default();
    let mut keys: Vec<(f64, f64, f64)> = Vec::new();
    for c in cfgs {
        if c.model.uses_bath() && c.model != ModelKind::MarkovianRwa && c.gamma0 > 0.0 {
            let k = (c.lambda, c.gamma0, c.t_end);
            if !keys.contains(&k) {
                keys.push(k);
            }
        }
    }
    let tables = keys
        .par_iter()
        .map(|&(lambda, gamma0, t_end)| {
            let bath = BathSpec::with_defaults(gamma0)?;
            let params = SystemParams::new(1.0, lambda, 0.0, bath)?;
            build_table(t_end, opts.table_samples, &params.modes()?, &bath)
        })
        .collect::<crate::Result<Vec<_>>>()?;
    cfgs.par_iter()
        .map(|c| {
            let params = c.params()?;
            match keys.iter().position(|k| *k == (c.lambda, c.gamma0, c.t_end)) {
                Some(i) if c.model.uses_bath() && c.model != ModelKind::MarkovianRwa => {
                    Ok(evolve_with_table(&params, c.model, &tables[i], c.t_end, c.dt, &opts)?)
                }
                _ => run_scenario(c),
            }
        })
        .collect()
}

fn write_figure_series(dir: &Path, fig: u32, cfgs: &[ScenarioConfig]) -> CliResult {
    let trajs = run_all(cfgs)?;
    let mut index = open_output(Some(&dir.join(format!("fig{fig}_index.csv"))))?;
    write_metadata(&mut *index, &[format!("figure={fig}")])?;
    writeln!(index, "file,model,r,lambda,gamma0")?;
    for (cfg, traj) in cfgs.iter().zip(&trajs) {
        let name = format!("fig{fig}_{}_lambda_{}.csv", cfg.model, label(cfg.lambda));
        let mut w = open_output(Some(&dir.join(&name)))?;
        write_trajectory(&mut *w, &cfg.to_lines(), traj)?;
        writeln!(index, "{name},{},{},{},{}", cfg.model, cfg.r, cfg.lambda, cfg.gamma0)?;
    }
    index.flush()?;
    Ok(())
}

// Wide layout: one E_N column per (model, gamma0) on a shared time grid.
fn write_figure_8(dir: &Path, r: f64, tag: &str, t_end: f64, dt: f64) -> CliResult {
    let mut cfgs = Vec::new();
    for g in [FIGURE_GAMMA0, 1.0] {
        for m in [ModelKind::MarkovianRwa, ModelKind::CommonBath] {
            cfgs.push(scenario(m, r, 0.0, g, t_end, dt));
        }
    }
    let trajs = run_all(&cfgs)?;
    let mut w = open_output(Some(&dir.join(format!("fig8_r_{tag}.csv"))))?;
    let mut meta = vec![format!("r={r}"), "lambda=0".to_string()];
    meta.extend(cfgs[0].to_lines().into_iter().filter(|l| l.starts_with("cutoff") || l.starts_with("kt") || l.starts_with("t_end") || l.starts_with("dt")));
    write_metadata(&mut *w, &meta)?;
    let cols: Vec<String> = cfgs.iter().map(|c| format!("e_n_{}_gamma0_{}", c.model, c.gamma0)).collect();
    writeln!(w, "t,{}", cols.join(","))?;
    for i in 0..trajs[0].len() {
        write!(w, "{}", num(trajs[0].times[i]))?;
        for t in &trajs {
            write!(w, ",{}", num(t.log_neg[i]))?;
        }
        writeln!(w)?;
    }
    w.flush()?;
    Ok(())
}

fn cmd_figure(args: &FigureArgs) -> CliResult {
    if !(2..=8).contains(&args.number) {
        return Err(CliError::Config(format!("figure number must be 2 to 8, got {}", args.number)));
    }
    fs::create_dir_all(&args.out_dir)?;
    let dir = args.out_dir.as_path();
    let (t_end, dt) = (args.t_end, args.dt);
    let fig = args.number;
    match fig {
        2..=4 => {
            let r = [2.0, 0.1, 0.0][(fig - 2) as usize];
            let cfgs: Vec<_> = FIGURE_LAMBDAS
                .iter()
                .map(|&l| scenario(ModelKind::Isolated, r, l, 0.0, t_end, dt))
                .collect();
            write_figure_series(dir, fig, &cfgs)
        }
        5 => {
            let rs = phase_line_grid(0.01, 0.3, 30)?;
            let line = compute_phase_line(&rs, DEFAULT_PROBE_DT, 1e-4)?;
            let meta = vec![format!("probe_dt={DEFAULT_PROBE_DT}"), "tol=0.0001".to_string()];
            let mut w = open_output(Some(&dir.join("fig5_phase_line.csv")))?;
            write_phase_line(&mut *w, &meta, &line)?;
            Ok(())
        }
        6 | 7 => {
            let r = if fig == 6 { 2.0 } else { 0.0 };
            let mut cfgs = Vec::new();
            for m in [ModelKind::IndependentBaths, ModelKind::CommonBath] {
                for &l in &FIGURE_LAMBDAS {
                    cfgs.push(scenario(m, r, l, FIGURE_GAMMA0, t_end, dt));
                }
            }
            write_figure_series(dir, fig, &cfgs)
        }
        _ => {
            let rc = survival_threshold(ScenarioConfig::default().kt)?;
            write_figure_8(dir, rc, "c", t_end, dt)?;
            write_figure_8(dir, 1.4, "1.4", t_end, dt)
        }
    }
}

fn configure_threads(flag: Option<usize>) -> CliResult {
    let n = match flag {
        Some(n) => Some(n),
        None => match std::env::var("GAUSSDYN_THREADS") {
            Ok(s) => Some(
                s.trim()
                    .parse::<usize>()
                    .map_err(|_| CliError::Config(format!("GAUSSDYN_THREADS must be a positive integer, got '{s}'")))?,
            ),
            Err(_) => None,
        },
    };
    if let Some(n) = n {
        if n == 0 {
            return Err(CliError::Config("thread count must be >= 1".into()));
        }
        // A second initialization in the same process is harmless.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(())
}

pub fn run(cli: Cli) -> CliResult {
    configure_threads(cli.threads)?;
    match &cli.command {
        Command::Coeffs(a) => cmd_coeffs(a),
        Command::Evolve(a) => cmd_evolve(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::PhaseLine(a) => cmd_phase_line(a),
        Command::Survival(a) => cmd_survival(a),
        Command::Figure(a) => cmd_figure(a),
    }
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("gaussdyn: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn library_errors_map_to_exit_codes() {
        assert_eq!(CliError::from(Error::Domain("x".into())).exit_code(), EXIT_CONFIG);
        let e = CliError::from(Error::Integration { t: 1.5, last_good_time: 1.25 });
        assert_eq!(e.exit_code(), EXIT_NUMERICAL);
        assert!(e.to_string().contains("1.25"));
    }

    #[test]
    fn flags_override_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.cfg");
        fs::write(&path, "model = model_b\nr = 2\nlambda = 0.2\n").unwrap();
        let args = ScenarioArgs {
            config: Some(path),
            lambda: Some("-0.8".into()),
            ..Default::default()
        };
        let cfg = args.resolve().unwrap();
        assert_eq!((cfg.model, cfg.r, cfg.lambda), (ModelKind::CommonBath, 2.0, -0.8));
    }

    #[test]
    fn phase_grid_bounds() {
        let g = phase_line_grid(0.0, 0.3, 4).unwrap();
        assert_eq!(g.len(), 4);
        assert!((g[3] - 0.3).abs() < 1e-15);
        assert!(phase_line_grid(0.3, 0.1, 4).is_err());
        assert!(phase_line_grid(0.0, 0.3, 1).is_err());
    }
}
