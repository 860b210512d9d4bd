//! The `pom` command line: argument parsing, dispatch and report output.

use std::fs::File;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{Map, Value};

use crate::bell::{
    bell_operator, bell_value, lhv_max, sos_certificate, spectral_max, SosCertificate,
};
use crate::classical::{lp_optimal_classical, write_support_csv};
use crate::construct::{
    canonical_setup, encode_ensemble, verify_parity_obliviousness, MeasurementSetup, SetupDocument,
};
use crate::error::{PomError, Result};
use crate::game::{game_report, simulate_sharded};
use crate::seesaw::{best_trace, seesaw_restarts, SeesawConfig};
use crate::task::{algebraic_max, bounds, quantum_bell_bound};

/// Parity deviation allowed for a steered ensemble.
pub const PARITY_TOL: f64 = 1e-12;
/// Allowed gap between the two exact success routes.
pub const ROUTE_TOL: f64 = 1e-12;
/// Slack on the quantum bound for values found numerically.
pub const BOUND_SLACK: f64 = 1e-8;
/// See-saw must land this close to the quantum bound.
pub const SEESAW_ATTAIN_TOL: f64 = 1e-6;

#[derive(Parser, Debug)]
#[command(
    name = "pom",
    version,
    about = "Parity-oblivious multiplexing laboratory"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Classical, noncontextual, quantum and algebraic bounds.
    Bounds(Common),
    /// Build the canonical quantum strategy.
    Construct {
        #[command(flatten)]
        common: Common,
        /// Also write the bare setup document here (single n only).
        #[arg(long)]
        emit_setup: Option<PathBuf>,
    },
    /// Parity-obliviousness, SOS certificate and spectral maximum.
    Verify(Common),
    /// Exact success probability by two routes.
    Exact(Common),
    /// Monte Carlo simulation of the protocol.
    Simulate {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        rounds: u64,
        #[arg(long, default_value_t = 1)]
        shards: u32,
    },
    /// Best parity-oblivious classical strategy by linear programming.
    ClassicalLp {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 2)]
        alphabet: usize,
        /// Write the optimal mixture's support as CSV (single n only).
        #[arg(long)]
        support_csv: Option<PathBuf>,
    },
    /// Local-hidden-variable maximum of the Bell expression.
    LhvMax(Common),
    /// See-saw search for the quantum maximum.
    Seesaw {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        dim: Option<usize>,
        #[arg(long, default_value_t = 10)]
        restarts: usize,
        #[arg(long, default_value_t = 2000)]
        max_iterations: usize,
    },
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Number of bits: an integer or an inclusive range `a..b`.
    #[arg(long, value_parser = parse_range)]
    pub n: Option<NRange>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Setup document to use instead of the canonical construction.
    #[arg(long)]
    pub setup: Option<PathBuf>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub struct NRange {
    pub start: usize,
    pub end: usize,
}

impl NRange {
    pub fn values(self) -> impl Iterator<Item = usize> {
        self.start..=self.end
    }
}

pub fn parse_range(s: &str) -> std::result::Result<NRange, String> {
    let num = |t: &str| {
        t.trim()
            .parse::<usize>()
            .map_err(|e| format!("invalid n `{t}`: {e}"))
    };
    let (start, end) = match s.split_once("..") {
        Some((a, b)) => (num(a)?, num(b)?),
        None => (num(s)?, num(s)?),
    };
    if start > end {
        return Err(format!("empty range {start}..{end}"));
    }
    Ok(NRange { start, end })
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub value: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl Check {
    fn at_most(name: &'static str, value: f64, tolerance: f64) -> Self {
        Self {
            name,
            value,
            tolerance,
            passed: value <= tolerance,
        }
    }

    fn at_least(name: &'static str, value: f64, tolerance: f64) -> Self {
        Self {
            name,
            value,
            tolerance,
            passed: value >= tolerance,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub command: String,
    pub version: &'static str,
    pub timestamp: u64,
    pub passed: bool,
    pub results: Vec<Value>,
}

impl Report {
    fn new(command: String, results: Vec<Value>) -> Self {
        let passed = results.iter().all(|r| {
            r["checks"]
                .as_array()
                .is_none_or(|cs| cs.iter().all(|c| c["passed"] == Value::Bool(true)))
        });
        Self {
            command,
            version: env!("CARGO_PKG_VERSION"),
            timestamp: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map_or(0, |d| d.as_secs()),
            passed,
            results,
        }
    }
}

/// A result row: `n`, the verb's quantities in order, then `checks`.
fn row<T: Serialize>(n: usize, values: &T, checks: Vec<Check>) -> Result<Value> {
    let mut map = Map::new();
    map.insert("n".into(), n.into());
    match serde_json::to_value(values)? {
        Value::Object(fields) => map.extend(fields.into_iter().filter(|(k, _)| k != "n")),
        other => {
            map.insert("value".into(), other);
        }
    }
    map.insert("checks".into(), serde_json::to_value(checks)?);
    Ok(Value::Object(map))
}

fn ns(common: &Common, setup: Option<&MeasurementSetup>) -> Result<Vec<usize>> {
    match (common.n, setup) {
        (Some(r), Some(s)) if r.start != s.n || r.end != s.n => {
            Err(PomError::InvalidSetup(format!(
                "--n {}..{} disagrees with the setup file (n = {})",
                r.start, r.end, s.n
            )))
        }
        (_, Some(s)) => Ok(vec![s.n]),
        (Some(r), None) => Ok(r.values().collect()),
        (None, None) => Err(PomError::InvalidSetup("--n or --setup is required".into())),
    }
}

fn load_setup(path: Option<&Path>) -> Result<Option<MeasurementSetup>> {
    path.map(|p| MeasurementSetup::from_json(&std::fs::read_to_string(p)?))
        .transpose()
}

fn setup_for(n: usize, loaded: Option<&MeasurementSetup>) -> Result<MeasurementSetup> {
    match loaded {
        Some(s) => Ok(s.clone()),
        None => canonical_setup(n),
    }
}

fn single(values: &[usize], flag: &str) -> Result<usize> {
    match values {
        [n] => Ok(*n),
        _ => Err(PomError::InvalidSetup(format!("{flag} needs a single n"))),
    }
}

#[derive(Serialize)]
struct BoundsRow {
    classical: f64,
    pnc: f64,
    quantum_opt: f64,
    algebraic_success: f64,
    quantum_bell: f64,
    algebraic_max: f64,
}

#[derive(Serialize)]
struct ConstructRow {
    dim_a: usize,
    dim_b: usize,
    alice_observables: usize,
    bob_observables: usize,
    max_steering_deviation: f64,
    bell_value: f64,
    setup: SetupDocument,
}

#[derive(Serialize)]
struct VerifyRow {
    dim: usize,
    parity_max_deviation: f64,
    sos_residual: f64,
    gamma_min_eig: f64,
    spectral_max: f64,
    bell_value: f64,
    quantum_bell: f64,
}

#[derive(Serialize)]
struct ExactRow {
    p_direct: f64,
    p_via_bell: f64,
    route_gap: f64,
    bell_value: f64,
    pnc_bound: f64,
    quantum_opt: f64,
}

#[derive(Serialize)]
struct SimulateRow {
    rounds: u64,
    successes: u64,
    estimate: f64,
    standard_error: f64,
    exact: f64,
    seed: u64,
    shards: u32,
    generator: String,
}

#[derive(Serialize)]
struct LpRow {
    alphabet: usize,
    optimal_value: f64,
    closed_form: f64,
    support_size: usize,
    max_parity_deviation: f64,
    vertices: u64,
}

#[derive(Serialize)]
struct LhvRow {
    lhv_max: i64,
    lhv_success: f64,
    pnc: f64,
    coincides_with_pnc: bool,
    quantum_bell: f64,
}

#[derive(Serialize)]
struct SeesawRow {
    dim: usize,
    best_objective: f64,
    quantum_bell: f64,
    gap: f64,
    best_restart: usize,
    iterations: usize,
    converged: bool,
    monotone_restarts: usize,
    restarts: usize,
    objectives: Vec<f64>,
}

/// Runs one command and assembles its report.
pub fn dispatch(cmd: &Command, echo: String) -> Result<Report> {
    let rows = match cmd {
        Command::Bounds(c) => ns(c, None)?
            .into_iter()
            .map(|n| {
                let b = bounds(n)?;
                let values = BoundsRow {
                    classical: b.classical,
                    pnc: b.pnc,
                    quantum_opt: b.quantum_opt,
                    algebraic_success: b.algebraic_success,
                    quantum_bell: quantum_bell_bound(n),
                    algebraic_max: algebraic_max(n)?,
                };
                let checks = vec![
                    Check::at_most("classical_below_quantum", b.classical - b.quantum_opt, 0.0),
                    Check::at_most(
                        "quantum_below_algebraic",
                        b.quantum_opt - b.algebraic_success,
                        0.0,
                    ),
                ];
                row(n, &values, checks)
            })
            .collect::<Result<Vec<_>>>()?,

        Command::Construct { common, emit_setup } => {
            let ns = ns(common, None)?;
            if let Some(path) = emit_setup {
                let n = single(&ns, "--emit-setup")?;
                std::fs::write(path, canonical_setup(n)?.to_json()?)?;
            }
            ns.into_iter()
                .map(|n| {
                    let setup = canonical_setup(n)?;
                    let ensemble = encode_ensemble(&setup)?;
                    let values = ConstructRow {
                        dim_a: setup.dim_a(),
                        dim_b: setup.dim_b(),
                        alice_observables: setup.alice.len(),
                        bob_observables: setup.bob.len(),
                        max_steering_deviation: ensemble.max_steering_deviation(),
                        bell_value: bell_value(&setup)?,
                        setup: SetupDocument::from_setup(&setup)?,
                    };
                    let checks = vec![Check::at_most(
                        "steering_probability",
                        values.max_steering_deviation,
                        common.tol,
                    )];
                    row(n, &values, checks)
                })
                .collect::<Result<Vec<_>>>()?
        }

        Command::Verify(c) => {
            let loaded = load_setup(c.setup.as_deref())?;
            ns(c, loaded.as_ref())?
                .into_iter()
                .map(|n| {
                    let setup = setup_for(n, loaded.as_ref())?;
                    let parity = verify_parity_obliviousness(&encode_ensemble(&setup)?)?;
                    let sos = sos_certificate(&setup)?;
                    let values = VerifyRow {
                        dim: setup.dim_a(),
                        parity_max_deviation: parity.max_deviation,
                        sos_residual: sos.residual,
                        gamma_min_eig: sos.gamma_min_eig,
                        spectral_max: spectral_max(&bell_operator(&setup)?)?,
                        bell_value: bell_value(&setup)?,
                        quantum_bell: quantum_bell_bound(n),
                    };
                    let checks = vec![
                        Check::at_most(
                            "parity_obliviousness",
                            values.parity_max_deviation,
                            PARITY_TOL,
                        ),
                        Check::at_most("sos_residual", sos.residual, SosCertificate::RESIDUAL_TOL),
                        Check::at_least(
                            "gamma_psd",
                            sos.gamma_min_eig,
                            SosCertificate::MIN_EIG_TOL,
                        ),
                        Check::at_most(
                            "spectral_within_bound",
                            values.spectral_max - values.quantum_bell,
                            BOUND_SLACK,
                        ),
                    ];
                    row(n, &values, checks)
                })
                .collect::<Result<Vec<_>>>()?
        }

        Command::Exact(c) => {
            let loaded = load_setup(c.setup.as_deref())?;
            ns(c, loaded.as_ref())?
                .into_iter()
                .map(|n| {
                    let setup = setup_for(n, loaded.as_ref())?;
                    let g = game_report(&setup)?;
                    let values = ExactRow {
                        p_direct: g.p_direct,
                        p_via_bell: g.p_via_bell,
                        route_gap: (g.p_direct - g.p_via_bell).abs(),
                        bell_value: g.bell_value,
                        pnc_bound: g.pnc_bound,
                        quantum_opt: g.quantum_opt,
                    };
                    let mut checks = vec![
                        Check::at_most("routes_agree", values.route_gap, ROUTE_TOL),
                        Check::at_most(
                            "within_quantum_opt",
                            g.p_direct - g.quantum_opt,
                            c.tol.max(BOUND_SLACK),
                        ),
                    ];
                    if loaded.is_none() {
                        checks.push(Check::at_most(
                            "attains_quantum_opt",
                            (g.p_direct - g.quantum_opt).abs(),
                            c.tol,
                        ));
                    }
                    row(n, &values, checks)
                })
                .collect::<Result<Vec<_>>>()?
        }

        Command::Simulate {
            common,
            rounds,
            shards,
        } => {
            if *rounds == 0 {
                return Err(PomError::EmptyRounds);
            }
            let loaded = load_setup(common.setup.as_deref())?;
            ns(common, loaded.as_ref())?
                .into_iter()
                .map(|n| {
                    let setup = setup_for(n, loaded.as_ref())?;
                    let sim = simulate_sharded(&setup, *rounds, common.seed, *shards)?;
                    let exact = game_report(&setup)?.p_direct;
                    let values = SimulateRow {
                        rounds: sim.rounds,
                        successes: sim.successes,
                        estimate: sim.estimate,
                        standard_error: sim.standard_error,
                        exact,
                        seed: sim.seed,
                        shards: sim.shards,
                        generator: sim.generator.clone(),
                    };
                    let band = (3.0 * sim.standard_error).max(1.0 / sim.rounds as f64);
                    let checks = vec![Check::at_most(
                        "within_3_standard_errors",
                        (sim.estimate - exact).abs(),
                        band,
                    )];
                    row(n, &values, checks)
                })
                .collect::<Result<Vec<_>>>()?
        }

        Command::ClassicalLp {
            common,
            alphabet,
            support_csv,
        } => {
            let ns = ns(common, None)?;
            if support_csv.is_some() {
                single(&ns, "--support-csv")?;
            }
            ns.into_iter()
                .map(|n| {
                    let r = lp_optimal_classical(n, *alphabet)?;
                    if let Some(path) = support_csv {
                        write_support_csv(&r, File::create(path)?)?;
                    }
                    let closed_form = (n as f64 + 1.0) / (2.0 * n as f64);
                    let checks = vec![
                        Check::at_most(
                            "matches_closed_form",
                            (r.optimal_value - closed_form).abs(),
                            common.tol,
                        ),
                        Check::at_most("parity_oblivious", r.max_parity_deviation, common.tol),
                    ];
                    let values = LpRow {
                        alphabet: r.alphabet,
                        optimal_value: r.optimal_value,
                        closed_form,
                        support_size: r.support_size,
                        max_parity_deviation: r.max_parity_deviation,
                        vertices: r.vertices,
                    };
                    row(n, &values, checks)
                })
                .collect::<Result<Vec<_>>>()?
        }

        Command::LhvMax(c) => ns(c, None)?
            .into_iter()
            .map(|n| {
                let l = lhv_max(n)?;
                let pnc = bounds(n)?.pnc;
                let lhv_success = 0.5 + l as f64 / ((1u64 << n) * n as u64) as f64;
                let values = LhvRow {
                    lhv_max: l,
                    lhv_success,
                    pnc,
                    coincides_with_pnc: (lhv_success - pnc).abs() <= c.tol,
                    quantum_bell: quantum_bell_bound(n),
                };
                let checks = vec![Check::at_most(
                    "below_quantum",
                    l as f64 - values.quantum_bell,
                    BOUND_SLACK,
                )];
                row(n, &values, checks)
            })
            .collect::<Result<Vec<_>>>()?,

        Command::Seesaw {
            common,
            dim,
            restarts,
            max_iterations,
        } => ns(common, None)?
            .into_iter()
            .map(|n| {
                let mut cfg = SeesawConfig::new(n);
                cfg.dim = dim.unwrap_or(cfg.dim);
                cfg.restarts = *restarts;
                cfg.max_iterations = *max_iterations;
                cfg.tolerance = common.tol;
                cfg.seed = common.seed;
                let traces = seesaw_restarts(&cfg)?;
                let k = best_trace(&traces).expect("at least one restart");
                let best = &traces[k];
                let bound = quantum_bell_bound(n);
                let values = SeesawRow {
                    dim: cfg.dim,
                    best_objective: best.best_objective(),
                    quantum_bell: bound,
                    gap: bound - best.best_objective(),
                    best_restart: k,
                    iterations: best.objectives.len() - 1,
                    converged: best.converged,
                    monotone_restarts: traces.iter().filter(|t| t.is_monotone()).count(),
                    restarts: traces.len(),
                    objectives: best.objectives.clone(),
                };
                let worst_drop = traces.iter().map(|t| t.max_decrease()).fold(0.0, f64::max);
                let checks = vec![
                    Check::at_most("monotone", worst_drop, crate::seesaw::MONOTONE_TOL),
                    Check::at_most("within_bound", -values.gap, BOUND_SLACK),
                    Check::at_most("attains_bound", values.gap.abs(), SEESAW_ATTAIN_TOL),
                ];
                row(n, &values, checks)
            })
            .collect::<Result<Vec<_>>>()?,
    };
    for r in &rows {
        check_finite(r)?;
    }
    Ok(Report::new(echo, rows))
}

fn check_finite(v: &Value) -> Result<()> {
    match v {
        Value::Number(x) if x.as_f64().is_some_and(|f| !f.is_finite()) => {
            Err(PomError::NonFinite("report value"))
        }
        // serde_json writes NaN and infinities as null
        Value::Null => Err(PomError::NonFinite("report value")),
        Value::Array(xs) => xs.iter().try_for_each(check_finite),
        Value::Object(m) => m.values().try_for_each(check_finite),
        _ => Ok(()),
    }
}

impl Command {
    pub fn common(&self) -> &Common {
        match self {
            Command::Bounds(c) | Command::Verify(c) | Command::Exact(c) | Command::LhvMax(c) => c,
            Command::Construct { common, .. }
            | Command::Simulate { common, .. }
            | Command::ClassicalLp { common, .. }
            | Command::Seesaw { common, .. } => common,
        }
    }
}

/// Writes the report as pretty JSON, or as CSV with one row per result and
/// the scalar quantities as columns followed by `passed`.
pub fn emit<W: Write>(report: &Report, format: Format, mut out: W) -> Result<()> {
    match format {
        Format::Json => {
            serde_json::to_writer_pretty(&mut out, report)?;
            writeln!(out)?;
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            let mut header_written = false;
            for r in &report.results {
                let Value::Object(map) = r else { continue };
                let scalars: Vec<(&String, String)> = map
                    .iter()
                    .filter_map(|(k, v)| match v {
                        Value::Number(x) => Some((k, x.to_string())),
                        Value::Bool(b) => Some((k, b.to_string())),
                        Value::String(s) => Some((k, s.clone())),
                        _ => None,
                    })
                    .collect();
                let passed = map["checks"]
                    .as_array()
                    .is_none_or(|cs| cs.iter().all(|c| c["passed"] == Value::Bool(true)));
                if !header_written {
                    let mut header: Vec<&str> = scalars.iter().map(|(k, _)| k.as_str()).collect();
                    header.push("passed");
                    w.write_record(&header)?;
                    header_written = true;
                }
                let mut record: Vec<String> = scalars.into_iter().map(|(_, v)| v).collect();
                record.push(passed.to_string());
                w.write_record(&record)?;
            }
            w.flush()?;
        }
    }
    Ok(())
}

/// Exit status for an error: 1 for I/O trouble, 2 for bad input.
pub fn error_exit_code(e: &PomError) -> u8 {
    match e {
        PomError::Io(_) => 1,
        _ => 2,
    }
}

/// Parses `args`, runs the command and writes the report. Returns the
/// process exit status.
pub fn run<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let args: Vec<std::ffi::OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let echo = args
        .iter()
        .map(|a| a.to_string_lossy().into_owned())
        .collect::<Vec<_>>()
        .join(" ");
    let common = cli.command.common().clone();
    let result = dispatch(&cli.command, echo).and_then(|report| {
        match &common.out {
            Some(path) => emit(
                &report,
                common.format,
                io::BufWriter::new(File::create(path)?),
            )?,
            None => emit(&report, common.format, io::stdout().lock())?,
        }
        Ok(report.passed)
    });
    match result {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) => {
            eprintln!("error: {e}");
            error_exit_code(&e)
        }
    }
}
