//! Command-line front end: channel construction, curve generation, symmetry
//! reports, and oracle runs. All solvers run on the uniform input
//! distribution, which is where the symmetric theory applies; the library
//! API accepts general inputs.
//!
//! Exit codes: 0 success, 1 input error, 2 solver non-convergence (partial
//! output is still written).

use crate::curve::{parse_grid_spec, RateCurve};
use crate::error::{Error, Result};
use crate::ib::{self, SolutionMethod};
use crate::oracle::{self, SolverConfig};
use crate::pf::{self, PfSymmetricSolver};
use crate::prob::{ChannelMatrix, EntropyUnit, ProbVector};
use crate::symmetry::{find_symmetry_group, is_circulant, DEFAULT_SYMMETRY_TOL};
use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

/// Thread-cap environment variable honored by `init_thread_cap`.
pub const THREADS_ENV: &str = "BOTTLENECK_LAB_THREADS";

/// Which rate function to compute.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Problem {
    Ib,
    Pf,
    Ceb,
    Oracle,
    Symmetry,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleKind {
    Ib,
    Pf,
    Ceb,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputMode {
    Point,
    Curve,
}

/// Channel selection, either built in or loaded from a matrix file.
#[derive(Debug, Clone, PartialEq)]
pub enum ChannelSpec {
    Hamming { n: usize, alpha: f64 },
    Tito { alpha: f64, beta: f64 },
    Bsc { delta: f64 },
    Circulant(Vec<f64>),
    Bms(Vec<f64>),
    Matrix(PathBuf),
}

impl ChannelSpec {
    pub fn build(&self) -> Result<ChannelMatrix> {
        match self {
            ChannelSpec::Hamming { n, alpha } => ChannelMatrix::hamming(*n, *alpha),
            ChannelSpec::Tito { alpha, beta } => ChannelMatrix::tito(*alpha, *beta),
            ChannelSpec::Bsc { delta } => ChannelMatrix::bsc(*delta),
            ChannelSpec::Circulant(z) => Ok(ChannelMatrix::circulant_from_noise(&ProbVector::new(
                z.clone(),
            )?)),
            ChannelSpec::Bms(z) => ChannelMatrix::bms(&ProbVector::new(z.clone())?),
            ChannelSpec::Matrix(path) => {
                let text = std::fs::read_to_string(path)?;
                ChannelMatrix::parse_text(&text)
            }
        }
    }
}

/// Fully resolved run configuration (command line merged over any TOML
/// config file; the command line wins field by field).
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub channel: ChannelSpec,
    pub problem: Problem,
    pub mode: OutputMode,
    /// Constraint values in bits, sorted ascending.
    pub c_grid: Vec<f64>,
    pub units: EntropyUnit,
    pub out_csv: Option<PathBuf>,
    pub out_json: Option<PathBuf>,
    pub solver: SolverConfig,
    pub with_oracle: bool,
    pub cardinality: Option<usize>,
    pub oracle_kind: Option<OracleKind>,
    pub curve_append: Option<PathBuf>,
}

// ---------------------------------------------------------------------------
// argument parsing
// ---------------------------------------------------------------------------

#[derive(Debug, Parser)]
#[command(
    name = "bottleneck-lab",
    version,
    about = "Information bottleneck and privacy funnel rates for finite channels"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// Information bottleneck rate at one constraint value
    Ib(PointCmd),
    /// Information bottleneck curve over a constraint grid
    IbCurve(CurveCmd),
    /// Symmetric privacy funnel rate at one constraint value
    Pf(PointCmd),
    /// Privacy funnel curve over a constraint grid
    PfCurve(PfCurveCmd),
    /// Conditional entropy bound at one constraint value
    Ceb(PointCmd),
    /// Brute-force oracle for ib, pf, or ceb
    Oracle(OracleCmd),
    /// Symmetry group report for a channel
    Symmetry(SymmetryCmd),
}

#[derive(Debug, Args)]
#[group(required = false, multiple = false)]
struct ChannelArgs {
    /// Hamming channel: N ALPHA
    #[arg(long, num_args = 2, value_names = ["N", "ALPHA"])]
    hamming: Option<Vec<f64>>,
    /// Ternary circulant channel: ALPHA BETA
    #[arg(long, num_args = 2, value_names = ["ALPHA", "BETA"])]
    tito: Option<Vec<f64>>,
    /// Binary symmetric channel with crossover DELTA
    #[arg(long)]
    bsc: Option<f64>,
    /// Circulant channel from a comma-separated noise vector
    #[arg(long, value_delimiter = ',')]
    circulant: Option<Vec<f64>>,
    /// Binary-input symmetric channel from a comma-separated first column
    #[arg(long, value_delimiter = ',')]
    bms: Option<Vec<f64>>,
    /// Load an "m n" header + rows text matrix (column-stochastic)
    #[arg(long)]
    matrix: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct CommonArgs {
    /// Random seed for every stochastic solver
    #[arg(long)]
    seed: Option<u64>,
    /// Multistart restarts per solver invocation
    #[arg(long)]
    restarts: Option<usize>,
    /// Output units: bits or nats
    #[arg(long)]
    units: Option<String>,
    /// CSV output path (stdout when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
    /// JSON sidecar path
    #[arg(long)]
    json: Option<PathBuf>,
    /// TOML config supplying any flag; command line overrides it
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct PointCmd {
    #[command(flatten)]
    channel: ChannelArgs,
    #[command(flatten)]
    common: CommonArgs,
    /// Constraint value in the selected units
    #[arg(long, short = 'C')]
    constraint: Option<f64>,
}

#[derive(Debug, Args)]
struct CurveCmd {
    #[command(flatten)]
    channel: ChannelArgs,
    #[command(flatten)]
    common: CommonArgs,
    /// Inclusive constraint grid start:stop:count (default 0:log2(n):25)
    #[arg(long)]
    grid: Option<String>,
}

#[derive(Debug, Args)]
struct PfCurveCmd {
    #[command(flatten)]
    channel: ChannelArgs,
    #[command(flatten)]
    common: CommonArgs,
    /// Inclusive constraint grid start:stop:count (default 0:log2(n):25)
    #[arg(long)]
    grid: Option<String>,
    /// Also emit brute-force oracle rows for comparison
    #[arg(long)]
    with_oracle: bool,
}

#[derive(Debug, Args)]
struct OracleCmd {
    #[command(flatten)]
    channel: ChannelArgs,
    #[command(flatten)]
    common: CommonArgs,
    /// Which problem to solve: ib, pf, or ceb
    #[arg(long)]
    problem: Option<String>,
    /// Test-channel alphabet size (default: n for ib/ceb, n+1 for pf)
    #[arg(long)]
    cardinality: Option<usize>,
    /// Constraint value in the selected units
    #[arg(long, short = 'C')]
    constraint: Option<f64>,
    /// Append the result as a row to this CSV curve file
    #[arg(long)]
    curve: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SymmetryCmd {
    #[command(flatten)]
    channel: ChannelArgs,
    #[command(flatten)]
    common: CommonArgs,
}

/// Optional TOML file mirroring the command-line flags.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    seed: Option<u64>,
    restarts: Option<usize>,
    units: Option<String>,
    out: Option<PathBuf>,
    json: Option<PathBuf>,
    grid: Option<String>,
    constraint: Option<f64>,
    cardinality: Option<usize>,
    with_oracle: Option<bool>,
    problem: Option<String>,
    hamming: Option<Vec<f64>>,
    tito: Option<Vec<f64>>,
    bsc: Option<f64>,
    circulant: Option<Vec<f64>>,
    bms: Option<Vec<f64>>,
    matrix: Option<PathBuf>,
}

fn load_file_config(path: Option<&Path>) -> Result<FileConfig> {
    match path {
        None => Ok(FileConfig::default()),
        Some(p) => {
            let text = std::fs::read_to_string(p)?;
            toml::from_str(&text).map_err(|e| Error::Parse(format!("config file: {e}")))
        }
    }
}

fn channel_from_args(args: &ChannelArgs, file: &FileConfig) -> Result<ChannelSpec> {
    let pair = |v: &Vec<f64>, what: &str| -> Result<(f64, f64)> {
        if v.len() != 2 {
            return Err(Error::Parse(format!("--{what} takes two values")));
        }
        Ok((v[0], v[1]))
    };
    let from_cli = if let Some(v) = &args.hamming {
        let (n, alpha) = pair(v, "hamming")?;
        if n < 1.0 || n.fract() != 0.0 {
            return Err(Error::Parse(format!("bad alphabet size {n}")));
        }
        Some(ChannelSpec::Hamming {
            n: n as usize,
            alpha,
        })
    } else if let Some(v) = &args.tito {
        let (alpha, beta) = pair(v, "tito")?;
        Some(ChannelSpec::Tito { alpha, beta })
    } else if let Some(delta) = args.bsc {
        Some(ChannelSpec::Bsc { delta })
    } else if let Some(z) = &args.circulant {
        Some(ChannelSpec::Circulant(z.clone()))
    } else if let Some(z) = &args.bms {
        Some(ChannelSpec::Bms(z.clone()))
    } else {
        args.matrix.clone().map(ChannelSpec::Matrix)
    };
    if let Some(spec) = from_cli {
        return Ok(spec);
    }
    // fall back to the config file
    if let Some(v) = &file.hamming {
        let (n, alpha) = pair(v, "hamming")?;
        return Ok(ChannelSpec::Hamming {
            n: n as usize,
            alpha,
        });
    }
    if let Some(v) = &file.tito {
        let (alpha, beta) = pair(v, "tito")?;
        return Ok(ChannelSpec::Tito { alpha, beta });
    }
    if let Some(delta) = file.bsc {
        return Ok(ChannelSpec::Bsc { delta });
    }
    if let Some(z) = &file.circulant {
        return Ok(ChannelSpec::Circulant(z.clone()));
    }
    if let Some(z) = &file.bms {
        return Ok(ChannelSpec::Bms(z.clone()));
    }
    if let Some(p) = &file.matrix {
        return Ok(ChannelSpec::Matrix(p.clone()));
    }
    Err(Error::Parse(
        "no channel given: use --hamming, --tito, --bsc, --circulant, --bms, or --matrix".into(),
    ))
}

struct CommonResolved {
    units: EntropyUnit,
    out: Option<PathBuf>,
    json: Option<PathBuf>,
    solver: SolverConfig,
}

fn resolve_common(common: &CommonArgs, file: &FileConfig) -> Result<CommonResolved> {
    let units: EntropyUnit = match common.units.as_deref().or(file.units.as_deref()) {
        Some(s) => s.parse()?,
        None => EntropyUnit::Bits,
    };
    let mut solver = SolverConfig::default();
    if let Some(seed) = common.seed.or(file.seed) {
        solver.seed = seed;
    }
    if let Some(restarts) = common.restarts.or(file.restarts) {
        solver.restarts = restarts;
    }
    Ok(CommonResolved {
        units,
        out: common.out.clone().or_else(|| file.out.clone()),
        json: common.json.clone().or_else(|| file.json.clone()),
        solver,
    })
}

/// Convert a user-facing rate (in `units`) to bits.
fn to_bits(value: f64, units: EntropyUnit) -> f64 {
    match units {
        EntropyUnit::Bits => value,
        EntropyUnit::Nats => value / std::f64::consts::LN_2,
    }
}

fn resolve_grid(
    grid: Option<&str>,
    file: &FileConfig,
    units: EntropyUnit,
    log_n: f64,
) -> Result<Vec<f64>> {
    let spec = grid.or(file.grid.as_deref());
    let mut values: Vec<f64> = match spec {
        Some(s) => parse_grid_spec(s)?
            .into_iter()
            .map(|v| to_bits(v, units))
            .collect(),
        None => (0..25).map(|i| log_n * i as f64 / 24.0).collect(),
    };
    // grids quoted to a few decimals (e.g. 0:1.585:25 for log2(3)) are
    // clamped onto the valid range; anything further out is rejected
    for v in values.iter_mut() {
        if *v < -1e-3 || *v > log_n + 1e-3 {
            return Err(Error::ParameterRange {
                name: "grid value",
                value: *v,
                min: 0.0,
                max: log_n,
            });
        }
        *v = v.clamp(0.0, log_n);
    }
    Ok(values)
}

/// Parse a full argv (including the program name) into a run configuration.
pub fn parse_args<I, S>(argv: I) -> Result<RunConfig>
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(argv).map_err(|e| Error::Parse(e.to_string()))?;
    build_config(cli)
}

fn build_config(cli: Cli) -> Result<RunConfig> {
    let (channel_args, common) = match &cli.command {
        Cmd::Ib(c) | Cmd::Pf(c) | Cmd::Ceb(c) => (&c.channel, &c.common),
        Cmd::IbCurve(c) => (&c.channel, &c.common),
        Cmd::PfCurve(c) => (&c.channel, &c.common),
        Cmd::Oracle(c) => (&c.channel, &c.common),
        Cmd::Symmetry(c) => (&c.channel, &c.common),
    };
    let file = load_file_config(common.config.as_deref())?;
    let resolved = resolve_common(common, &file)?;
    let channel = channel_from_args(channel_args, &file)?;
    let t = channel.build()?;
    let log_n = (t.input_dim() as f64).log2();

    let constraint_of = |c: Option<f64>| -> Result<Vec<f64>> {
        let raw = c
            .or(file.constraint)
            .ok_or_else(|| Error::Parse("missing --constraint".into()))?;
        Ok(vec![to_bits(raw, resolved.units)])
    };

    let (problem, mode, c_grid, with_oracle, oracle_kind, cardinality, curve_append) =
        match &cli.command {
            Cmd::Ib(c) => (
                Problem::Ib,
                OutputMode::Point,
                constraint_of(c.constraint)?,
                false,
                None,
                None,
                None,
            ),
            Cmd::IbCurve(c) => (
                Problem::Ib,
                OutputMode::Curve,
                resolve_grid(c.grid.as_deref(), &file, resolved.units, log_n)?,
                false,
                None,
                None,
                None,
            ),
            Cmd::Pf(c) => (
                Problem::Pf,
                OutputMode::Point,
                constraint_of(c.constraint)?,
                false,
                None,
                None,
                None,
            ),
            Cmd::PfCurve(c) => (
                Problem::Pf,
                OutputMode::Curve,
                resolve_grid(c.grid.as_deref(), &file, resolved.units, log_n)?,
                c.with_oracle || file.with_oracle.unwrap_or(false),
                None,
                None,
                None,
            ),
            Cmd::Ceb(c) => (
                Problem::Ceb,
                OutputMode::Point,
                constraint_of(c.constraint)?,
                false,
                None,
                None,
                None,
            ),
            Cmd::Oracle(c) => {
                let kind = match c
                    .problem
                    .as_deref()
                    .or(file.problem.as_deref())
                    .unwrap_or("ib")
                {
                    "ib" => OracleKind::Ib,
                    "pf" => OracleKind::Pf,
                    "ceb" => OracleKind::Ceb,
                    other => {
                        return Err(Error::Parse(format!(
                            "unknown oracle problem {other:?}, expected ib, pf, or ceb"
                        )))
                    }
                };
                (
                    Problem::Oracle,
                    OutputMode::Point,
                    constraint_of(c.constraint)?,
                    false,
                    Some(kind),
                    c.cardinality.or(file.cardinality),
                    c.curve.clone(),
                )
            }
            Cmd::Symmetry(_) => (
                Problem::Symmetry,
                OutputMode::Point,
                Vec::new(),
                false,
                None,
                None,
                None,
            ),
        };

    let mut c_grid = c_grid;
    c_grid.sort_by(|a, b| a.partial_cmp(b).unwrap());
    for c in c_grid.iter_mut() {
        if *c < -1e-3 || *c > log_n + 1e-3 {
            return Err(Error::ParameterRange {
                name: "constraint",
                value: *c,
                min: 0.0,
                max: log_n,
            });
        }
        *c = c.clamp(0.0, log_n);
    }
    Ok(RunConfig {
        channel,
        problem,
        mode,
        c_grid,
        units: resolved.units,
        out_csv: resolved.out,
        out_json: resolved.json,
        solver: resolved.solver,
        with_oracle,
        cardinality,
        oracle_kind,
        curve_append,
    })
}

// ---------------------------------------------------------------------------
// execution
// ---------------------------------------------------------------------------

#[derive(Debug, Serialize)]
struct PfReport {
    lambda_star: f64,
    p_star: ProbVector,
    c_star: f64,
    b_matrix: ChannelMatrix,
    w_weights: ProbVector,
    points: Vec<PfPoint>,
}

#[derive(Debug, Serialize)]
struct PfPoint {
    c: f64,
    r: f64,
    method: &'static str,
    epsilon: Option<f64>,
}

#[derive(Debug, Serialize)]
struct SymmetryReport {
    input_dim: usize,
    output_dim: usize,
    group_order: usize,
    input_group_order: usize,
    output_group_order: usize,
    input_transitive: bool,
    output_transitive: bool,
    generators: Vec<GeneratorReport>,
    circulant_noise: Option<ProbVector>,
}

#[derive(Debug, Serialize)]
struct GeneratorReport {
    input_cycles: String,
    output_cycles: String,
}

enum IbRoute {
    Hamming { alpha: f64 },
    Circulant { z: ProbVector },
    Envelope,
}

fn detect_ib_route(t: &ChannelMatrix) -> IbRoute {
    if let Some(z) = is_circulant(t, DEFAULT_SYMMETRY_TOL) {
        let n = z.dim();
        if n >= 2 {
            let off = z[1];
            if (1..n).all(|i| (z[i] - off).abs() <= 1e-12) {
                let alpha = (z[0] - off).clamp(0.0, 1.0);
                return IbRoute::Hamming { alpha };
            }
        }
        return IbRoute::Circulant { z };
    }
    IbRoute::Envelope
}

fn write_or_print(path: Option<&Path>, content: &str) -> Result<()> {
    match path {
        Some(p) => {
            std::fs::write(p, content)?;
            Ok(())
        }
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn write_json<T: Serialize>(path: Option<&Path>, value: &T) -> Result<()> {
    if let Some(p) = path {
        let text =
            serde_json::to_string_pretty(value).map_err(|e| Error::Parse(format!("json: {e}")))?;
        std::fs::write(p, text)?;
    }
    Ok(())
}

/// Execute a resolved configuration. Returns the process exit code.
pub fn run(cfg: &RunConfig) -> i32 {
    match execute(cfg) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

fn execute(cfg: &RunConfig) -> Result<i32> {
    let t = cfg.channel.build()?;
    match cfg.problem {
        Problem::Symmetry => run_symmetry(cfg, &t),
        Problem::Oracle => run_oracle(cfg, &t),
        Problem::Ib => run_ib(cfg, &t),
        Problem::Ceb => run_ceb(cfg, &t),
        Problem::Pf => run_pf(cfg, &t),
    }
}

fn run_symmetry(cfg: &RunConfig, t: &ChannelMatrix) -> Result<i32> {
    let group = find_symmetry_group(t, DEFAULT_SYMMETRY_TOL)?;
    let circ = is_circulant(t, DEFAULT_SYMMETRY_TOL);
    let generators: Vec<GeneratorReport> = group
        .generators()
        .iter()
        .map(|p| GeneratorReport {
            input_cycles: p.input_perm.cycle_notation(),
            output_cycles: p.output_perm.cycle_notation(),
        })
        .collect();
    let report = SymmetryReport {
        input_dim: t.input_dim(),
        output_dim: t.output_dim(),
        group_order: group.order(),
        input_group_order: group.input_group.len(),
        output_group_order: group.output_group.len(),
        input_transitive: group.input_transitive,
        output_transitive: group.output_transitive,
        generators,
        circulant_noise: circ,
    };

    let mut text = String::new();
    text.push_str(&format!(
        "channel: {} inputs, {} outputs\n",
        report.input_dim, report.output_dim
    ));
    text.push_str(&format!("symmetry group order: {}\n", report.group_order));
    text.push_str(&format!(
        "input group order: {} (transitive: {})\n",
        report.input_group_order, report.input_transitive
    ));
    text.push_str(&format!(
        "output group order: {} (transitive: {})\n",
        report.output_group_order, report.output_transitive
    ));
    text.push_str("generators:\n");
    for g in &report.generators {
        text.push_str(&format!(
            "  input {} | output {}\n",
            g.input_cycles, g.output_cycles
        ));
    }
    match &report.circulant_noise {
        Some(z) => text.push_str(&format!("circulant: yes, noise = {}\n", z.render_text())),
        None => text.push_str("circulant: no\n"),
    }
    write_or_print(cfg.out_csv.as_deref(), &text)?;
    write_json(cfg.out_json.as_deref(), &report)?;
    Ok(0)
}

fn run_oracle(cfg: &RunConfig, t: &ChannelMatrix) -> Result<i32> {
    let n = t.input_dim();
    let q = ProbVector::uniform(n);
    let c = cfg.c_grid[0];
    let kind = cfg.oracle_kind.unwrap_or(OracleKind::Ib);
    let k = cfg.cardinality.unwrap_or(match kind {
        OracleKind::Pf => n + 1,
        _ => n,
    });
    let result = match kind {
        OracleKind::Ib => oracle::ib_oracle(t, &q, c, k, &cfg.solver)?,
        OracleKind::Pf => oracle::pf_oracle(t, &q, c, k, &cfg.solver)?,
        OracleKind::Ceb => oracle::ceb_oracle(t, &q, c, k, &cfg.solver)?,
    };

    let text =
        serde_json::to_string_pretty(&result).map_err(|e| Error::Parse(format!("json: {e}")))?;
    write_or_print(
        cfg.out_json.as_deref().or(cfg.out_csv.as_deref()),
        &format!("{text}\n"),
    )?;

    if let Some(path) = &cfg.curve_append {
        let mut curve = match std::fs::read_to_string(path) {
            Ok(existing) => RateCurve::parse_csv(&existing)?,
            Err(_) => RateCurve::new(&["achieved"]),
        };
        curve.push(
            cfg.units.from_bits(c),
            cfg.units.from_bits(result.value),
            "oracle",
            vec![Some(cfg.units.from_bits(result.achieved_constraint))],
        );
        curve.sort_by_c();
        std::fs::write(path, curve.render_csv())?;
    }
    Ok(if result.converged { 0 } else { 2 })
}

fn run_ib(cfg: &RunConfig, t: &ChannelMatrix) -> Result<i32> {
    let n = t.input_dim();
    let q = ProbVector::uniform(n);
    let route = detect_ib_route(t);
    let mut curve = RateCurve::new(&["beta"]);
    let mut solutions = Vec::new();
    for &c in &cfg.c_grid {
        let (sol, beta) = match &route {
            IbRoute::Hamming { alpha } => {
                let h = ib::hamming_ib(n, *alpha, c)?;
                let beta = h.beta;
                (h.into_ib_solution(), Some(beta))
            }
            IbRoute::Circulant { z } => (ib::reduced_ib(z, c, &cfg.solver)?, None),
            IbRoute::Envelope => (ib::ib_value(t, &q, c, &cfg.solver)?, None),
        };
        curve.push(
            cfg.units.from_bits(c),
            cfg.units.from_bits(sol.r),
            sol.method.as_str(),
            vec![beta],
        );
        solutions.push(sol);
    }
    curve.sort_by_c();
    write_or_print(cfg.out_csv.as_deref(), &curve.render_csv())?;
    write_json(cfg.out_json.as_deref(), &solutions)?;
    Ok(0)
}

fn run_ceb(cfg: &RunConfig, t: &ChannelMatrix) -> Result<i32> {
    let q = ProbVector::uniform(t.input_dim());
    let mut curve = RateCurve::new(&[]);
    let mut report = Vec::new();
    for &x in &cfg.c_grid {
        let outcome = ib::ceb_with_witness(t, &q, x, &cfg.solver)?;
        curve.push(
            cfg.units.from_bits(x),
            cfg.units.from_bits(outcome.value),
            SolutionMethod::Envelope.as_str(),
            vec![],
        );
        report.push(CebPoint {
            x,
            value: outcome.value,
            lambda: outcome.lambda,
            support: outcome.support,
        });
    }
    write_or_print(cfg.out_csv.as_deref(), &curve.render_csv())?;
    write_json(cfg.out_json.as_deref(), &report)?;
    Ok(0)
}

/// One conditional-entropy-bound evaluation with its achieving facet.
#[derive(Debug, Serialize)]
struct CebPoint {
    x: f64,
    value: f64,
    /// Multiplier at which the supporting line was found.
    lambda: f64,
    support: Vec<(f64, ProbVector)>,
}

fn run_pf(cfg: &RunConfig, t: &ChannelMatrix) -> Result<i32> {
    let n = t.input_dim();
    let q = ProbVector::uniform(n);
    let solver = PfSymmetricSolver::new(t, &cfg.solver)?;
    let c_star = solver.touch_point().c_star;
    let k = cfg.cardinality.unwrap_or(pf::pf_cardinality_bound(n));

    let mut curve = RateCurve::new(&["epsilon"]);
    let mut points = Vec::new();
    let mut all_converged = true;
    let mut b_matrix = None;
    let mut w_weights = None;
    for &c in &cfg.c_grid {
        if c <= c_star + 1e-9 {
            let sol = solver.value(c)?;
            curve.push(
                cfg.units.from_bits(c),
                cfg.units.from_bits(sol.r),
                "linear",
                vec![Some(sol.epsilon)],
            );
            points.push(PfPoint {
                c,
                r: sol.r,
                method: "linear",
                epsilon: Some(sol.epsilon),
            });
            if cfg.with_oracle {
                let o = oracle::pf_oracle(t, &q, c, k, &cfg.solver)?;
                all_converged &= o.converged;
                curve.push(
                    cfg.units.from_bits(c),
                    cfg.units.from_bits(o.value),
                    "oracle",
                    vec![None],
                );
                points.push(PfPoint {
                    c,
                    r: o.value,
                    method: "oracle",
                    epsilon: None,
                });
            }
            b_matrix = Some(sol.b_matrix);
            w_weights = Some(sol.w_weights);
        } else {
            // the symmetric construction stops being optimal here; fall
            // back to the brute-force oracle
            let o = oracle::pf_oracle(t, &q, c, k, &cfg.solver)?;
            all_converged &= o.converged;
            curve.push(
                cfg.units.from_bits(c),
                cfg.units.from_bits(o.value),
                "oracle",
                vec![None],
            );
            points.push(PfPoint {
                c,
                r: o.value,
                method: "oracle",
                epsilon: None,
            });
        }
    }
    curve.sort_by_c();
    write_or_print(cfg.out_csv.as_deref(), &curve.render_csv())?;

    let report = PfReport {
        lambda_star: solver.touch_point().lambda_star,
        p_star: solver.touch_point().p_star.clone(),
        c_star,
        b_matrix: match b_matrix {
            Some(b) => b,
            None => solver.value(0.0)?.b_matrix,
        },
        w_weights: match w_weights {
            Some(w) => w,
            None => solver.value(0.0)?.w_weights,
        },
        points,
    };
    write_json(cfg.out_json.as_deref(), &report)?;
    Ok(if all_converged { 0 } else { 2 })
}

/// Entry point used by the binary: honors `BOTTLENECK_LAB_THREADS`, parses
/// `std::env::args`, and maps clap help/version to exit code 0.
pub fn run_main() -> i32 {
    init_thread_cap();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if e.kind() == ErrorKind::DisplayHelp || e.kind() == ErrorKind::DisplayVersion => {
            print!("{e}");
            return 0;
        }
        Err(e) => {
            eprint!("{e}");
            return 1;
        }
    };
    match build_config(cli) {
        Ok(cfg) => run(&cfg),
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

/// Cap rayon's global pool from the environment. Safe to call repeatedly;
/// only the first initialization wins.
pub fn init_thread_cap() {
    if let Ok(raw) = std::env::var(THREADS_ENV) {
        if let Ok(threads) = raw.parse::<usize>() {
            if threads >= 1 {
                let _ = rayon::ThreadPoolBuilder::new()
                    .num_threads(threads)
                    .build_global();
            }
        }
    }
}
