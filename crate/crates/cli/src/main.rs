//! Experiment runner: reproduces the solver-evaluation, path-following and
//! matrix-inversion studies and writes their data tables, manifests and
//! optional plots to flat files.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use qanm::anm::{
    self, continue_path, ContinuationSettings, JacobiSettings, LinearSolverHandle, StopRule,
    VqlsSettings,
};
use qanm::densela::{self, Matrix};
use qanm::newton::{nr_continue, NewtonSettings};
use qanm::problems::{
    spring_mass_analytic, spring_mass_condensed, spring_mass_start, BeamModel, BEAM_HEIGHT,
};
use qanm::qjacobi;
use qanm::qsim::{Sampler, ShotModel};
use qanm::vqls;
use qanm::vqmi;

#[derive(Parser)]
#[command(name = "qanm", version, about = "Quantum-emulated nonlinear continuation experiments")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Solve the 2x2 reference system with each right-hand side F_j.
    SolveLinear(CommonArgs),
    /// q-Jacobi accuracy and sampling error across shot counts.
    ShotSweep(CommonArgs),
    /// Circuit executions to a 95% accuracy target, VQLS vs q-Jacobi.
    CircuitBench(CommonArgs),
    /// Continuation of the spring-mass equilibrium path.
    SpringMass {
        #[command(flatten)]
        common: CommonArgs,
        /// Load level the path is traced up to.
        #[arg(long = "lambda-max")]
        lambda_max: Option<f64>,
    },
    /// Pressure-loaded beam deflection path.
    BeamFlection {
        #[command(flatten)]
        common: CommonArgs,
        /// Nonlinear steps to take.
        #[arg(long)]
        steps: Option<usize>,
    },
    /// Axially loaded beam traced through its buckling load.
    BeamBuckling {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, value_enum)]
        method: Option<MethodArg>,
        /// Newton increments (method=nr).
        #[arg(long)]
        increments: Option<usize>,
        /// Load level traced up to (method=nr, or anm when set).
        #[arg(long = "lambda-max")]
        lambda_max: Option<f64>,
        /// Nonlinear steps (method=anm without lambda-max).
        #[arg(long)]
        steps: Option<usize>,
        /// Newton residual tolerance (method=nr).
        #[arg(long = "eps-r")]
        eps_r: Option<f64>,
    },
    /// Variational inversion of the 2x2 reference matrix.
    Vqmi {
        #[command(flatten)]
        common: CommonArgs,
        /// Optimizer evaluation budget.
        #[arg(long = "max-evals")]
        max_evals: Option<usize>,
    },
    /// Side-by-side metric table from two run manifests.
    Compare {
        a: PathBuf,
        b: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args, Clone, Default)]
struct CommonArgs {
    /// Plain-text key=value configuration file; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum)]
    solver: Option<SolverArg>,
    #[arg(long)]
    shots: Option<u64>,
    #[arg(long = "shot-mode", value_enum)]
    shot_mode: Option<ShotModeArg>,
    /// Taylor series order N.
    #[arg(long)]
    order: Option<usize>,
    #[arg(long = "eps-d")]
    eps_d: Option<f64>,
    #[arg(long = "eps-j")]
    eps_j: Option<f64>,
    #[arg(long)]
    omega: Option<f64>,
    /// Jacobi iteration cap.
    #[arg(long = "max-iter")]
    max_iter: Option<usize>,
    /// Ansatz layers for the variational solvers.
    #[arg(long)]
    layers: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    reps: Option<usize>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
    /// Also emit an SVG plot of the main curve.
    #[arg(long)]
    plot: bool,
}

#[derive(ValueEnum, Clone, Copy, PartialEq, Debug)]
enum SolverArg {
    Direct,
    ClassicalJacobi,
    QJacobi,
    Vqls,
}

#[derive(ValueEnum, Clone, Copy, PartialEq, Debug)]
enum ShotModeArg {
    Exact,
    Binomial,
    Normal,
}

#[derive(ValueEnum, Clone, Copy, PartialEq, Debug)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(ValueEnum, Clone, Copy, PartialEq, Debug)]
enum MethodArg {
    Anm,
    Nr,
}

enum CliError {
    Config(String),
    Solver(String),
}

impl From<qanm::error::Error> for CliError {
    fn from(e: qanm::error::Error) -> Self {
        CliError::Solver(format!("{e}"))
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Config(format!("io: {e}"))
    }
}

fn main() {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => {}
        Err(CliError::Config(msg)) => {
            eprintln!("configuration error: {msg}");
            std::process::exit(2);
        }
        Err(CliError::Solver(msg)) => {
            eprintln!("solver failure: {msg}");
            std::process::exit(1);
        }
    }
}

// splitmix64: per-repetition seeds derived from the base seed
fn mix(seed: u64, index: u64) -> u64 {
    let mut z = seed
        .wrapping_add(index.wrapping_mul(0x9e3779b97f4a7c15))
        .wrapping_add(0x9e3779b97f4a7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

fn bench_k() -> Matrix {
    Matrix::from_rows(&[vec![2.0, -1.0], vec![-1.0, 2.0]])
}

fn f_j(j: usize) -> Vec<f64> {
    let theta = 2.0 * std::f64::consts::PI * j as f64 / 8.0;
    vec![theta.cos(), theta.sin()]
}

/// Resolved run configuration after merging defaults, config file and flags.
struct Resolved {
    solver: SolverArg,
    shots: u64,
    shot_mode: ShotModeArg,
    order: usize,
    eps_d: f64,
    eps_j: f64,
    omega: f64,
    max_iter: usize,
    layers: usize,
    seed: u64,
    reps: usize,
    out: PathBuf,
    format: FormatArg,
    plot: bool,
}

struct Defaults {
    solver: SolverArg,
    shots: u64,
    shot_mode: ShotModeArg,
    order: usize,
    eps_d: f64,
    eps_j: f64,
    omega: f64,
    max_iter: usize,
    layers: usize,
    reps: usize,
}

impl Default for Defaults {
    fn default() -> Self {
        Defaults {
            solver: SolverArg::QJacobi,
            shots: 100_000_000,
            shot_mode: ShotModeArg::Normal,
            order: 10,
            eps_d: 1e-3,
            eps_j: 1e-4,
            omega: 2.0 / 3.0,
            max_iter: 200,
            layers: 1,
            reps: 10,
        }
    }
}

fn parse_config_file(path: &Path) -> Result<HashMap<String, String>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    let mut map = HashMap::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| {
            CliError::Config(format!("{}:{}: expected key=value", path.display(), lineno + 1))
        })?;
        map.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(map)
}

fn parsed<T: std::str::FromStr>(map: &HashMap<String, String>, key: &str) -> Result<Option<T>, CliError> {
    match map.get(key) {
        None => Ok(None),
        Some(v) => v
            .parse::<T>()
            .map(Some)
            .map_err(|_| CliError::Config(format!("invalid value for {key}: {v}"))),
    }
}

fn parsed_enum<T: ValueEnum>(map: &HashMap<String, String>, key: &str) -> Result<Option<T>, CliError> {
    match map.get(key) {
        None => Ok(None),
        Some(v) => T::from_str(v, true)
            .map(Some)
            .map_err(|_| CliError::Config(format!("invalid value for {key}: {v}"))),
    }
}

impl CommonArgs {
    fn resolve(&self, defaults: Defaults) -> Result<(Resolved, HashMap<String, String>), CliError> {
        let file = match &self.config {
            Some(p) => parse_config_file(p)?,
            None => HashMap::new(),
        };
        let resolved = Resolved {
            solver: self.solver.or(parsed_enum(&file, "solver")?).unwrap_or(defaults.solver),
            shots: self.shots.or(parsed(&file, "shots")?).unwrap_or(defaults.shots),
            shot_mode: self
                .shot_mode
                .or(parsed_enum(&file, "shot-mode")?)
                .unwrap_or(defaults.shot_mode),
            order: self.order.or(parsed(&file, "order")?).unwrap_or(defaults.order),
            eps_d: self.eps_d.or(parsed(&file, "eps-d")?).unwrap_or(defaults.eps_d),
            eps_j: self.eps_j.or(parsed(&file, "eps-j")?).unwrap_or(defaults.eps_j),
            omega: self.omega.or(parsed(&file, "omega")?).unwrap_or(defaults.omega),
            max_iter: self.max_iter.or(parsed(&file, "max-iter")?).unwrap_or(defaults.max_iter),
            layers: self.layers.or(parsed(&file, "layers")?).unwrap_or(defaults.layers),
            seed: self.seed.or(parsed(&file, "seed")?).unwrap_or(0),
            reps: self.reps.or(parsed(&file, "reps")?).unwrap_or(defaults.reps),
            out: self
                .out
                .clone()
                .or(parsed(&file, "out")?)
                .unwrap_or_else(|| PathBuf::from(".")),
            format: self.format.or(parsed_enum(&file, "format")?).unwrap_or(FormatArg::Csv),
            plot: self.plot || parsed::<bool>(&file, "plot")?.unwrap_or(false),
        };
        if matches!(resolved.shot_mode, ShotModeArg::Binomial | ShotModeArg::Normal)
            && resolved.shots == 0
        {
            return Err(CliError::Config("shots must be positive in sampled modes".into()));
        }
        Ok((resolved, file))
    }
}

impl Resolved {
    fn shot_model(&self, seed: u64) -> ShotModel {
        match self.shot_mode {
            ShotModeArg::Exact => ShotModel::exact(),
            ShotModeArg::Binomial => ShotModel::binomial(self.shots, seed),
            ShotModeArg::Normal => ShotModel::normal(self.shots, seed),
        }
    }

    fn solver_handle(&self, seed: u64) -> LinearSolverHandle {
        match self.solver {
            SolverArg::Direct => LinearSolverHandle::Direct,
            SolverArg::ClassicalJacobi => LinearSolverHandle::ClassicalJacobi(self.jacobi()),
            SolverArg::QJacobi => LinearSolverHandle::QJacobi(self.jacobi()),
            SolverArg::Vqls => LinearSolverHandle::Vqls(VqlsSettings {
                layers: self.layers,
                seed,
                ..Default::default()
            }),
        }
    }

    fn jacobi(&self) -> JacobiSettings {
        JacobiSettings { omega: self.omega, eps_j: self.eps_j, max_iter: self.max_iter }
    }

    fn config_json(&self, experiment: &str) -> serde_json::Value {
        json!({
            "experiment": experiment,
            "solver": format!("{:?}", self.solver),
            "shots": self.shots,
            "shot_mode": format!("{:?}", self.shot_mode),
            "order": self.order,
            "eps_d": self.eps_d,
            "eps_j": self.eps_j,
            "omega": self.omega,
            "max_iter": self.max_iter,
            "layers": self.layers,
            "seed": self.seed,
            "reps": self.reps,
            "format": format!("{:?}", self.format),
        })
    }
}

/// Table of rows plus a header, written as CSV or a JSON record list.
struct Table {
    header: Vec<&'static str>,
    rows: Vec<Vec<String>>,
}

impl Table {
    fn new(header: Vec<&'static str>) -> Self {
        Table { header, rows: Vec::new() }
    }

    fn push(&mut self, row: Vec<String>) {
        assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    fn write(&self, dir: &Path, stem: &str, format: FormatArg) -> Result<PathBuf, CliError> {
        std::fs::create_dir_all(dir)?;
        match format {
            FormatArg::Csv => {
                let path = dir.join(format!("{stem}.csv"));
                let mut text = self.header.join(",");
                text.push('\n');
                for row in &self.rows {
                    text.push_str(&row.join(","));
                    text.push('\n');
                }
                std::fs::write(&path, text)?;
                Ok(path)
            }
            FormatArg::Json => {
                let path = dir.join(format!("{stem}.json"));
                let records: Vec<serde_json::Value> = self
                    .rows
                    .iter()
                    .map(|row| {
                        let mut obj = serde_json::Map::new();
                        for (k, v) in self.header.iter().zip(row) {
                            let val = v
                                .parse::<f64>()
                                .map(|x| json!(x))
                                .unwrap_or_else(|_| json!(v));
                            obj.insert((*k).to_string(), val);
                        }
                        serde_json::Value::Object(obj)
                    })
                    .collect();
                std::fs::write(&path, serde_json::to_string_pretty(&records).unwrap())?;
                Ok(path)
            }
        }
    }
}

fn fmt(x: f64) -> String {
    format!("{x:.12e}")
}

struct RunOutput {
    metrics: serde_json::Map<String, serde_json::Value>,
    linear_solves: u64,
    circuit_executions: u64,
    artifacts: Vec<PathBuf>,
}

fn write_manifest(
    resolved: &Resolved,
    experiment: &str,
    started: Instant,
    output: RunOutput,
) -> Result<(), CliError> {
    std::fs::create_dir_all(&resolved.out)?;
    let path = resolved.out.join(format!("{experiment}-manifest.json"));
    let manifest = json!({
        "experiment": experiment,
        "config": resolved.config_json(experiment),
        "wall_clock_seconds": started.elapsed().as_secs_f64(),
        "totals": {
            "linear_solves": output.linear_solves,
            "circuit_executions": output.circuit_executions,
        },
        "metrics": output.metrics,
        "artifacts": output.artifacts.iter().map(|p| p.display().to_string()).collect::<Vec<_>>(),
    });
    std::fs::write(&path, serde_json::to_string_pretty(&manifest).unwrap())?;
    println!("{}", path.display());
    Ok(())
}

fn write_svg(
    dir: &Path,
    stem: &str,
    curve: &[(f64, f64)],
    xlabel: &str,
    ylabel: &str,
) -> Result<PathBuf, CliError> {
    std::fs::create_dir_all(dir)?;
    let path = dir.join(format!("{stem}.svg"));
    let (w, h, m) = (640.0f64, 480.0f64, 60.0f64);
    let xs: Vec<f64> = curve.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = curve.iter().map(|p| p.1).collect();
    let (x0, x1) = (xs.iter().cloned().fold(f64::MAX, f64::min), xs.iter().cloned().fold(f64::MIN, f64::max));
    let (y0, y1) = (ys.iter().cloned().fold(f64::MAX, f64::min), ys.iter().cloned().fold(f64::MIN, f64::max));
    let sx = |x: f64| m + (x - x0) / (x1 - x0).max(1e-300) * (w - 2.0 * m);
    let sy = |y: f64| h - m - (y - y0) / (y1 - y0).max(1e-300) * (h - 2.0 * m);
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">"
    );
    let _ = writeln!(
        svg,
        "<rect width=\"{w}\" height=\"{h}\" fill=\"white\"/><g fill=\"none\" stroke=\"black\"><line x1=\"{m}\" y1=\"{0}\" x2=\"{1}\" y2=\"{0}\"/><line x1=\"{m}\" y1=\"{m}\" x2=\"{m}\" y2=\"{0}\"/></g>",
        h - m,
        w - m
    );
    let pts: Vec<String> = curve.iter().map(|(x, y)| format!("{:.2},{:.2}", sx(*x), sy(*y))).collect();
    let _ = writeln!(svg, "<polyline fill=\"none\" stroke=\"steelblue\" stroke-width=\"1.5\" points=\"{}\"/>", pts.join(" "));
    let _ = writeln!(
        svg,
        "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{xlabel}</text><text x=\"15\" y=\"{}\" text-anchor=\"middle\" transform=\"rotate(-90 15 {})\">{ylabel}</text>",
        w / 2.0,
        h - 15.0,
        h / 2.0,
        h / 2.0
    );
    let _ = writeln!(svg, "</svg>");
    std::fs::write(&path, svg)?;
    Ok(path)
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.cmd {
        Cmd::SolveLinear(common) => solve_linear(&common),
        Cmd::ShotSweep(common) => shot_sweep(&common),
        Cmd::CircuitBench(common) => circuit_bench(&common),
        Cmd::SpringMass { common, lambda_max } => spring_mass(&common, lambda_max),
        Cmd::BeamFlection { common, steps } => beam_flection(&common, steps),
        Cmd::BeamBuckling { common, method, increments, lambda_max, steps, eps_r } => {
            beam_buckling(&common, method, increments, lambda_max, steps, eps_r)
        }
        Cmd::Vqmi { common, max_evals } => run_vqmi(&common, max_evals),
        Cmd::Compare { a, b, out } => compare(&a, &b, out.as_deref()),
    }
}

fn solve_one(
    resolved: &Resolved,
    k: &Matrix,
    f: &[f64],
    seed: u64,
) -> Result<(Vec<f64>, u64), CliError> {
    let mut sampler = Sampler::new(resolved.shot_model(seed));
    match resolved.solver {
        SolverArg::Direct => Ok((densela::lu_solve(k, f)?, 0)),
        SolverArg::ClassicalJacobi => {
            let rep = qjacobi::classical_jacobi_solve(
                k,
                f,
                None,
                resolved.omega,
                resolved.eps_j,
                resolved.max_iter,
            )?;
            Ok((rep.solution, 0))
        }
        SolverArg::QJacobi => {
            let rep = qjacobi::solve(
                k,
                f,
                None,
                resolved.omega,
                resolved.eps_j,
                resolved.max_iter,
                &mut sampler,
            )?;
            Ok((rep.solution, rep.circuit_executions))
        }
        SolverArg::Vqls => {
            let padded = k.rows().next_power_of_two();
            let config = vqls::AnsatzConfig {
                n_qubits: padded.trailing_zeros() as usize,
                layers: resolved.layers,
            };
            let opts = vqls::OptimizerSettings { seed, ..Default::default() };
            let rep = vqls::solve(k, f, &config, &opts, &mut sampler)?;
            Ok((rep.solution, rep.circuit_executions))
        }
    }
}

fn solve_linear(common: &CommonArgs) -> Result<(), CliError> {
    let started = Instant::now();
    let (resolved, _) = common.resolve(Defaults::default())?;
    let k = bench_k();
    let mut table = Table::new(vec!["j", "f1", "f2", "mean_accuracy", "mean_circuit_executions"]);
    let mut total_execs = 0u64;
    let mut total_solves = 0u64;
    let mut worst = f64::MAX;
    for j in 0..8 {
        let f = f_j(j);
        let u_ref = densela::lu_solve(&k, &f)?;
        let mut accs = Vec::new();
        let mut execs = Vec::new();
        for rep in 0..resolved.reps {
            let seed = mix(resolved.seed, (j * resolved.reps + rep) as u64);
            let (u, ex) = solve_one(&resolved, &k, &f, seed)?;
            accs.push(densela::accuracy(&u, &u_ref)?);
            execs.push(ex as f64);
            total_execs += ex;
            total_solves += 1;
        }
        let mean_acc = accs.iter().sum::<f64>() / accs.len() as f64;
        let mean_ex = execs.iter().sum::<f64>() / execs.len() as f64;
        worst = worst.min(mean_acc);
        table.push(vec![j.to_string(), fmt(f[0]), fmt(f[1]), fmt(mean_acc), fmt(mean_ex)]);
    }
    let artifact = table.write(&resolved.out, "solve-linear", resolved.format)?;
    let mut metrics = serde_json::Map::new();
    metrics.insert("min_mean_accuracy_pct".into(), json!(worst));
    write_manifest(
        &resolved,
        "solve-linear",
        started,
        RunOutput {
            metrics,
            linear_solves: total_solves,
            circuit_executions: total_execs,
            artifacts: vec![artifact],
        },
    )
}

fn shot_sweep(common: &CommonArgs) -> Result<(), CliError> {
    let started = Instant::now();
    let (resolved, _) = common.resolve(Defaults { reps: 30, ..Default::default() })?;
    let k = bench_k();
    let f = f_j(0);
    let u_ref = densela::lu_solve(&k, &f)?;
    let classical = qjacobi::classical_jacobi_solve(
        &k,
        &f,
        None,
        resolved.omega,
        resolved.eps_j,
        resolved.max_iter,
    )?;
    let classical_acc = densela::accuracy(&classical.solution, &u_ref)?;

    // fixed Hadamard-test probability for the sampling-error fit: first row
    // of the iteration applied to the preprocessed start vector
    let dec = qjacobi::decompose(&k, &f, resolved.omega)?;
    let c_unit = densela::scaled(&dec.c, 1.0 / densela::norm(&dec.c));
    let mut c_padded = vec![0.0; dec.normalized_rows[0].len()];
    c_padded[..c_unit.len()].copy_from_slice(&c_unit);
    let p_exact = qanm::qsim::hadamard_test_p0(&dec.normalized_rows[0], &c_padded)?;

    let grid: Vec<u64> = vec![100, 10_000, 1_000_000, resolved.shots];
    let mut table = Table::new(vec!["n_s", "mean_accuracy", "classical_accuracy", "p0_rms_error"]);
    let mut total_execs = 0u64;
    let mut total_solves = 0u64;
    let mut log_pts = Vec::new();
    let mut final_acc = 0.0;
    for (gi, &ns) in grid.iter().enumerate() {
        let mut accs = Vec::new();
        let mut sq = 0.0;
        for rep in 0..resolved.reps {
            let seed = mix(resolved.seed, (gi * resolved.reps + rep) as u64);
            let model = match resolved.shot_mode {
                ShotModeArg::Exact => ShotModel::exact(),
                ShotModeArg::Binomial => ShotModel::binomial(ns, seed),
                ShotModeArg::Normal => ShotModel::normal(ns, seed),
            };
            let mut sampler = Sampler::new(model);
            let rep_out = qjacobi::solve(
                &k,
                &f,
                None,
                resolved.omega,
                resolved.eps_j,
                resolved.max_iter,
                &mut sampler,
            )?;
            accs.push(densela::accuracy(&rep_out.solution, &u_ref)?);
            total_execs += rep_out.circuit_executions;
            total_solves += 1;
            let p_hat = sampler.sample(p_exact)?;
            sq += (p_hat - p_exact) * (p_hat - p_exact);
        }
        let mean_acc = accs.iter().sum::<f64>() / accs.len() as f64;
        let rms = (sq / resolved.reps as f64).sqrt();
        if rms > 0.0 {
            log_pts.push(((ns as f64).log10(), rms.log10()));
        }
        final_acc = mean_acc;
        table.push(vec![ns.to_string(), fmt(mean_acc), fmt(classical_acc), fmt(rms)]);
    }
    let slope = fit_slope(&log_pts);
    let artifact = table.write(&resolved.out, "shot-sweep", resolved.format)?;
    let mut metrics = serde_json::Map::new();
    metrics.insert("rms_loglog_slope".into(), json!(slope));
    metrics.insert("classical_accuracy_pct".into(), json!(classical_acc));
    metrics.insert("final_accuracy_pct".into(), json!(final_acc));
    metrics.insert("final_accuracy_gap_points".into(), json!((classical_acc - final_acc).abs()));
    write_manifest(
        &resolved,
        "shot-sweep",
        started,
        RunOutput {
            metrics,
            linear_solves: total_solves,
            circuit_executions: total_execs,
            artifacts: vec![artifact],
        },
    )
}

fn fit_slope(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    (n * sxy - sx * sy) / (n * sxx - sx * sx)
}

/// Circuit executions spent by q-Jacobi until the iterate first reaches the
/// accuracy target: rerun with a growing iteration cap so the shot stream is
/// identical across attempts.
fn qjacobi_execs_to_target(
    resolved: &Resolved,
    k: &Matrix,
    f: &[f64],
    u_ref: &[f64],
    target: f64,
    seed: u64,
) -> Result<Option<u64>, CliError> {
    for cap in 1..=resolved.max_iter {
        let mut sampler = Sampler::new(resolved.shot_model(seed));
        let rep = qjacobi::solve(k, f, None, resolved.omega, 1e-300, cap, &mut sampler)?;
        if densela::accuracy(&rep.solution, u_ref)? >= target {
            return Ok(Some(rep.circuit_executions));
        }
    }
    Ok(None)
}

/// Circuit executions of a full VQLS run; the optimizer has no online
/// accuracy probe, so the whole optimization to its stopping criterion is
/// what it costs to deliver a solution at the target.
fn vqls_execs_to_target(
    resolved: &Resolved,
    k: &Matrix,
    f: &[f64],
    u_ref: &[f64],
    target: f64,
    seed: u64,
) -> Result<Option<u64>, CliError> {
    let padded = k.rows().next_power_of_two();
    let config = vqls::AnsatzConfig {
        n_qubits: padded.trailing_zeros() as usize,
        layers: resolved.layers,
    };
    let opts = vqls::OptimizerSettings { seed, ..Default::default() };
    let mut sampler = Sampler::new(resolved.shot_model(seed));
    let rep = vqls::solve(k, f, &config, &opts, &mut sampler)?;
    if densela::accuracy(&rep.solution, u_ref)? >= target {
        Ok(Some(rep.circuit_executions))
    } else {
        Ok(None)
    }
}

fn circuit_bench(common: &CommonArgs) -> Result<(), CliError> {
    let started = Instant::now();
    let (resolved, _) = common.resolve(Defaults { reps: 30, layers: 4, ..Default::default() })?;
    let k = bench_k();
    let f = f_j(0);
    let u_ref = densela::lu_solve(&k, &f)?;
    let target = 95.0;
    let mut table = Table::new(vec!["rep", "vqls_executions", "qjacobi_executions"]);
    let mut v_total = 0.0;
    let mut q_total = 0.0;
    let mut counted = 0usize;
    for rep in 0..resolved.reps {
        let seed = mix(resolved.seed, rep as u64);
        let v = vqls_execs_to_target(&resolved, &k, &f, &u_ref, target, seed)?;
        let q = qjacobi_execs_to_target(&resolved, &k, &f, &u_ref, target, seed)?;
        let (Some(v), Some(q)) = (v, q) else {
            return Err(CliError::Solver(format!(
                "accuracy target {target}% not reached in repetition {rep}"
            )));
        };
        v_total += v as f64;
        q_total += q as f64;
        counted += 1;
        table.push(vec![rep.to_string(), v.to_string(), q.to_string()]);
    }
    let v_mean = v_total / counted as f64;
    let q_mean = q_total / counted as f64;
    let artifact = table.write(&resolved.out, "circuit-bench", resolved.format)?;
    let mut metrics = serde_json::Map::new();
    metrics.insert("vqls_mean_executions".into(), json!(v_mean));
    metrics.insert("qjacobi_mean_executions".into(), json!(q_mean));
    metrics.insert("execution_ratio".into(), json!(v_mean / q_mean));
    write_manifest(
        &resolved,
        "circuit-bench",
        started,
        RunOutput {
            metrics,
            linear_solves: 2 * counted as u64,
            circuit_executions: (v_total + q_total) as u64,
            artifacts: vec![artifact],
        },
    )
}

/// Sampled rows (step, a, lambda, dofs...) from a continuation path.
fn path_table(
    path: &anm::SolutionPath,
    samples_per_step: usize,
    dofs: &[(&'static str, usize)],
) -> Table {
    let mut header = vec!["step", "a", "lambda"];
    for (name, _) in dofs {
        header.push(name);
    }
    let mut table = Table::new(header);
    if let Some(first) = path.series.first() {
        let mut row = vec!["0".to_string(), fmt(0.0), fmt(first.lambda0)];
        for (_, idx) in dofs {
            row.push(fmt(first.u0[*idx]));
        }
        table.push(row);
    }
    for (si, series) in path.series.iter().enumerate() {
        let a_end = path.step_lengths[si];
        for i in 1..=samples_per_step {
            let a = a_end * i as f64 / samples_per_step as f64;
            let (u, l) = series.eval(a);
            let mut row = vec![(si + 1).to_string(), fmt(a), fmt(l)];
            for (_, idx) in dofs {
                row.push(fmt(u[*idx]));
            }
            table.push(row);
        }
    }
    table
}

fn spring_mass(common: &CommonArgs, lambda_max: Option<f64>) -> Result<(), CliError> {
    let started = Instant::now();
    let (resolved, file) = common.resolve(Defaults {
        shots: 500_000,
        shot_mode: ShotModeArg::Binomial,
        order: 10,
        eps_d: 1e-3,
        ..Default::default()
    })?;
    let lambda_max = lambda_max.or(parsed(&file, "lambda-max")?).unwrap_or(2.5);
    let problem = spring_mass_condensed();
    let (u0, l0) = spring_mass_start();
    let settings = ContinuationSettings {
        order: resolved.order,
        eps_d: resolved.eps_d,
        ..Default::default()
    };
    let mut sampler = Sampler::new(resolved.shot_model(resolved.seed));
    let handle = resolved.solver_handle(resolved.seed);
    let path = continue_path(
        &problem,
        &u0[..2],
        l0,
        &settings,
        StopRule::LambdaTarget(lambda_max),
        &handle,
        &mut sampler,
    )
    .map_err(|f| CliError::Solver(format!("{}", f.error)))?;

    let mut num = [0.0f64; 2];
    let mut den = [0.0f64; 2];
    for (lam, u) in &path.points {
        let exact = spring_mass_analytic(*lam);
        for c in 0..2 {
            num[c] += (u[c] - exact[c]).powi(2);
            den[c] += exact[c].powi(2);
        }
    }
    let table = path_table(&path, 100, &[("w1", 0), ("w2", 1)]);
    let artifact = table.write(&resolved.out, "spring-mass", resolved.format)?;
    let mut artifacts = vec![artifact];
    if resolved.plot {
        let curve: Vec<(f64, f64)> = path.trace(0);
        artifacts.push(write_svg(&resolved.out, "spring-mass", &curve, "lambda", "w1")?);
    }
    let mut metrics = serde_json::Map::new();
    metrics.insert("nonlinear_steps".into(), json!(path.steps));
    metrics.insert("end_lambda".into(), json!(path.end().0));
    metrics.insert("path_error_w1_pct".into(), json!((num[0] / den[0]).sqrt() * 100.0));
    metrics.insert("path_error_w2_pct".into(), json!((num[1] / den[1]).sqrt() * 100.0));
    write_manifest(
        &resolved,
        "spring-mass",
        started,
        RunOutput {
            metrics,
            linear_solves: path.linear_solves,
            circuit_executions: path.circuit_executions,
            artifacts,
        },
    )
}

fn beam_flection(common: &CommonArgs, steps: Option<usize>) -> Result<(), CliError> {
    let started = Instant::now();
    let (resolved, file) = common.resolve(Defaults {
        shots: 100_000_000,
        shot_mode: ShotModeArg::Binomial,
        order: 8,
        eps_d: 1e-5,
        max_iter: 10_000,
        ..Default::default()
    })?;
    let steps = steps.or(parsed(&file, "steps")?).unwrap_or(3);
    let model = BeamModel::flection();
    let problem = model.problem();
    let settings = ContinuationSettings {
        order: resolved.order,
        eps_d: resolved.eps_d,
        ..Default::default()
    };
    let zero = vec![0.0; model.n_free()];
    let mut sampler = Sampler::new(resolved.shot_model(resolved.seed));
    let handle = resolved.solver_handle(resolved.seed);
    let path = continue_path(
        &problem,
        &zero,
        0.0,
        &settings,
        StopRule::Steps(steps),
        &handle,
        &mut sampler,
    )
    .map_err(|f| CliError::Solver(format!("{}", f.error)))?;
    let (end_lambda, end_u) = path.end().clone();

    // classical reference at the same end load for the stress comparison
    let mut ref_sampler = Sampler::new(ShotModel::exact());
    let nr = nr_continue(
        &problem,
        &zero,
        0.0,
        end_lambda,
        20,
        &NewtonSettings { eps_r: 1e-10, max_iter: 50 },
        &LinearSolverHandle::Direct,
        &mut ref_sampler,
    );
    if !nr.converged {
        return Err(CliError::Solver("classical reference did not converge".into()));
    }
    let q_ref = &nr.path.last().unwrap().1;
    let z = -BEAM_HEIGHT / 2.0;
    let stress = model.stress_field(&end_u, z);
    let stress_ref = model.stress_field(q_ref, z);
    let sigma_scale = stress_ref.iter().map(|(_, s)| s.abs()).fold(0.0f64, f64::max);
    let mut stress_table = Table::new(vec!["x", "sigma", "sigma_reference"]);
    let mut max_rel = 0.0f64;
    for ((x, s), (_, sr)) in stress.iter().zip(&stress_ref) {
        max_rel = max_rel.max((s - sr).abs() / sigma_scale);
        stress_table.push(vec![fmt(*x), fmt(*s), fmt(*sr)]);
    }

    let table = path_table(&path, 100, &[("w_mid", model.midspan_w())]);
    let artifact = table.write(&resolved.out, "beam-flection", resolved.format)?;
    let stress_artifact = stress_table.write(&resolved.out, "beam-flection-stress", resolved.format)?;
    let mut artifacts = vec![artifact, stress_artifact];
    if resolved.plot {
        let curve = path.trace(model.midspan_w());
        artifacts.push(write_svg(&resolved.out, "beam-flection", &curve, "lambda", "w_mid")?);
    }
    let mut metrics = serde_json::Map::new();
    metrics.insert("nonlinear_steps".into(), json!(path.steps));
    metrics.insert("end_lambda_q0_mpa".into(), json!(end_lambda * 100.0));
    metrics.insert("end_w_mid".into(), json!(end_u[model.midspan_w()]));
    metrics.insert("stress_max_rel_error".into(), json!(max_rel));
    write_manifest(
        &resolved,
        "beam-flection",
        started,
        RunOutput {
            metrics,
            linear_solves: path.linear_solves + nr.linear_solves,
            circuit_executions: path.circuit_executions,
            artifacts,
        },
    )
}

fn beam_buckling(
    common: &CommonArgs,
    method: Option<MethodArg>,
    increments: Option<usize>,
    lambda_max: Option<f64>,
    steps: Option<usize>,
    eps_r: Option<f64>,
) -> Result<(), CliError> {
    let started = Instant::now();
    let (resolved, file) = common.resolve(Defaults {
        solver: SolverArg::Direct,
        order: 16,
        eps_d: 1e-8,
        ..Default::default()
    })?;
    let method = method.or(parsed_enum(&file, "method")?).unwrap_or(MethodArg::Anm);
    let lambda_max = lambda_max.or(parsed(&file, "lambda-max")?);
    let model = BeamModel::buckling();
    let problem = model.problem();
    let zero = vec![0.0; model.n_free()];
    match method {
        MethodArg::Anm => {
            let steps = steps.or(parsed(&file, "steps")?).unwrap_or(30);
            let settings = ContinuationSettings {
                order: resolved.order,
                eps_d: resolved.eps_d,
                max_steps: 200,
                ..Default::default()
            };
            let stop = match lambda_max {
                Some(l) => StopRule::LambdaTarget(l),
                None => StopRule::Steps(steps),
            };
            let mut sampler = Sampler::new(resolved.shot_model(resolved.seed));
            let handle = resolved.solver_handle(resolved.seed);
            let path = continue_path(&problem, &zero, 0.0, &settings, stop, &handle, &mut sampler)
                .map_err(|f| CliError::Solver(format!("{}", f.error)))?;
            let table = path_table(&path, 100, &[("w_mid", model.midspan_w())]);
            let artifact = table.write(&resolved.out, "beam-buckling", resolved.format)?;
            let mut artifacts = vec![artifact];
            if resolved.plot {
                let curve = path.trace(model.midspan_w());
                artifacts.push(write_svg(&resolved.out, "beam-buckling", &curve, "lambda", "w_mid")?);
            }
            let mut metrics = serde_json::Map::new();
            metrics.insert("method".into(), json!("anm"));
            metrics.insert("nonlinear_steps".into(), json!(path.steps));
            metrics.insert("end_lambda".into(), json!(path.end().0));
            metrics.insert("end_w_mid".into(), json!(path.end().1[model.midspan_w()]));
            write_manifest(
                &resolved,
                "beam-buckling",
                started,
                RunOutput {
                    metrics,
                    linear_solves: path.linear_solves,
                    circuit_executions: path.circuit_executions,
                    artifacts,
                },
            )
        }
        MethodArg::Nr => {
            let increments = increments.or(parsed(&file, "increments")?).unwrap_or(4500);
            let eps_r = eps_r.or(parsed(&file, "eps-r")?).unwrap_or(1e-9);
            let lambda_max = lambda_max.unwrap_or(330.0);
            let mut sampler = Sampler::new(resolved.shot_model(resolved.seed));
            let handle = resolved.solver_handle(resolved.seed);
            let report = nr_continue(
                &problem,
                &zero,
                0.0,
                lambda_max,
                increments,
                &NewtonSettings { eps_r, max_iter: 30 },
                &handle,
                &mut sampler,
            );
            let mut table = Table::new(vec!["increment", "lambda", "w_mid"]);
            for (i, (lam, u)) in report.path.iter().enumerate() {
                table.push(vec![i.to_string(), fmt(*lam), fmt(u[model.midspan_w()])]);
            }
            let artifact = table.write(&resolved.out, "beam-buckling", resolved.format)?;
            let mut artifacts = vec![artifact];
            if resolved.plot {
                let curve = report.trace(model.midspan_w());
                artifacts.push(write_svg(&resolved.out, "beam-buckling", &curve, "lambda", "w_mid")?);
            }
            let (end_lambda, end_u) = report.path.last().unwrap();
            let mut metrics = serde_json::Map::new();
            metrics.insert("method".into(), json!("nr"));
            metrics.insert("increments".into(), json!(report.increments));
            metrics.insert("converged".into(), json!(report.converged));
            metrics.insert("end_lambda".into(), json!(end_lambda));
            metrics.insert("end_w_mid".into(), json!(end_u[model.midspan_w()]));
            let output = RunOutput {
                metrics,
                linear_solves: report.linear_solves,
                circuit_executions: report.circuit_executions,
                artifacts,
            };
            if !report.converged {
                // still write the partial result before reporting failure
                write_manifest(&resolved, "beam-buckling", started, output)?;
                return Err(CliError::Solver(format!(
                    "Newton failed at lambda {:?}",
                    report.failed_at
                )));
            }
            write_manifest(&resolved, "beam-buckling", started, output)
        }
    }
}

fn run_vqmi(common: &CommonArgs, max_evals: Option<usize>) -> Result<(), CliError> {
    let started = Instant::now();
    let (resolved, file) = common.resolve(Defaults {
        shots: 5_000_000,
        shot_mode: ShotModeArg::Binomial,
        layers: 2,
        ..Default::default()
    })?;
    let max_evals = max_evals.or(parsed(&file, "max-evals")?).unwrap_or(300);
    let k = bench_k();
    let config = vqls::AnsatzConfig { n_qubits: 2, layers: resolved.layers };
    let opts = vqls::OptimizerSettings { max_evals, seed: resolved.seed, ..Default::default() };
    let mut sampler = Sampler::new(resolved.shot_model(resolved.seed));
    let report = vqmi::invert(&k, &config, &opts, &mut sampler)?;

    let k_inv_ref = Matrix::from_rows(&[vec![2.0 / 3.0, 1.0 / 3.0], vec![1.0 / 3.0, 2.0 / 3.0]]);
    let mut table = Table::new(vec!["i", "j", "value", "reference"]);
    let mut fro_num = 0.0;
    let mut fro_den = 0.0;
    let mut max_entry = 0.0f64;
    for i in 0..2 {
        for j in 0..2 {
            let v = report.inverse[(i, j)];
            let r = k_inv_ref[(i, j)];
            fro_num += (v - r) * (v - r);
            fro_den += r * r;
            max_entry = max_entry.max((v - r).abs() / r.abs());
            table.push(vec![i.to_string(), j.to_string(), fmt(v), fmt(r)]);
        }
    }
    let mut cost_table = Table::new(vec!["evaluation", "cost"]);
    for (i, c) in report.solver.cost_history.iter().enumerate() {
        cost_table.push(vec![i.to_string(), fmt(*c)]);
    }
    let artifact = table.write(&resolved.out, "vqmi", resolved.format)?;
    let cost_artifact = cost_table.write(&resolved.out, "vqmi-cost", resolved.format)?;
    let best_cost = report.solver.cost_history.iter().cloned().fold(f64::MAX, f64::min);
    let evals_to_low_cost = report
        .solver
        .cost_history
        .iter()
        .position(|&c| c < 1e-3)
        .map(|i| i + 1);
    let mut metrics = serde_json::Map::new();
    metrics.insert("frobenius_rel_error".into(), json!((fro_num / fro_den).sqrt()));
    metrics.insert("max_entry_rel_error".into(), json!(max_entry));
    metrics.insert("best_cost".into(), json!(best_cost));
    metrics.insert("evaluations_to_cost_1e-3".into(), json!(evals_to_low_cost));
    write_manifest(
        &resolved,
        "vqmi",
        started,
        RunOutput {
            metrics,
            linear_solves: 1,
            circuit_executions: report.solver.circuit_executions,
            artifacts: vec![artifact, cost_artifact],
        },
    )
}

fn compare(a: &Path, b: &Path, out: Option<&Path>) -> Result<(), CliError> {
    let load = |p: &Path| -> Result<serde_json::Value, CliError> {
        let text = std::fs::read_to_string(p)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", p.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("invalid manifest {}: {e}", p.display())))
    };
    let ma = load(a)?;
    let mb = load(b)?;
    let kind_a = ma["experiment"].as_str().unwrap_or("");
    let kind_b = mb["experiment"].as_str().unwrap_or("");
    if kind_a != kind_b {
        return Err(CliError::Config(format!(
            "experiment kinds differ: {kind_a} vs {kind_b}"
        )));
    }
    let mut lines = vec!["metric,a,b,ratio".to_string()];
    let mut push_metric = |name: &str, va: f64, vb: f64| {
        let ratio = if vb != 0.0 { va / vb } else { f64::NAN };
        lines.push(format!("{name},{va},{vb},{ratio}"));
    };
    for key in ["linear_solves", "circuit_executions"] {
        let va = ma["totals"][key].as_f64().unwrap_or(f64::NAN);
        let vb = mb["totals"][key].as_f64().unwrap_or(f64::NAN);
        push_metric(key, va, vb);
    }
    if let (Some(oa), Some(ob)) = (ma["metrics"].as_object(), mb["metrics"].as_object()) {
        for (key, va) in oa {
            if let (Some(va), Some(vb)) = (va.as_f64(), ob.get(key).and_then(|v| v.as_f64())) {
                push_metric(key, va, vb);
            }
        }
    }
    let text = lines.join("\n") + "\n";
    print!("{text}");
    if let Some(path) = out {
        if let Some(dir) = path.parent() {
            if !dir.as_os_str().is_empty() {
                std::fs::create_dir_all(dir)?;
            }
        }
        std::fs::write(path, text)?;
    }
    Ok(())
}
