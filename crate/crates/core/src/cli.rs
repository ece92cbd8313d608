//! Command-line driver.
//!
//! Every command computes its whole table before touching the output, so a
//! failed run never leaves a partial file behind. Exit codes: 0 success,
//! 1 verification failure (or any other runtime failure), 2 invalid input,
//! 3 resource limit.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::entanglement;
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::freefermion;
use crate::hamiltonian::{self, IsingParams, MAX_DENSE_QUBITS};
use crate::specialstates;
use crate::sweep::{linspace, SweepResult, TOOL_NAME, TOOL_VERSION};
use crate::thermal;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY: i32 = 1;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_RESOURCE: i32 = 3;

/// Largest ring accepted by `crosscheck`.
pub const MAX_CROSSCHECK_QUBITS: usize = 12;
/// Largest ring accepted by `xstate-verify`.
pub const MAX_XSTATE_QUBITS: usize = 13;

#[derive(Debug, Parser)]
#[command(name = "isingring", version, about = "Spectra and entanglement of the transverse-field Ising ring")]
pub struct Cli {
    /// Worker threads for grid evaluation (default: all cores; 1 runs sequentially)
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Sorted spectrum over a lambda grid: `lambda,level,energy`
    Spectrum {
        #[command(flatten)]
        ring: RingArgs,
        #[command(flatten)]
        lambda: LambdaGrid,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Ground-state concurrence, tangle or three-tangle over a lambda grid
    GroundEntanglement {
        #[command(flatten)]
        ring: RingArgs,
        #[command(flatten)]
        lambda: LambdaGrid,
        #[arg(long, value_enum, default_value_t = Measure::Concurrence)]
        measure: Measure,
        /// Qubit pair for concurrence; repeatable (default 1,2)
        #[arg(long, value_parser = parse_pair)]
        pair: Vec<(usize, usize)>,
        /// Concurrence of qubit 1 with partners at every ring distance 1..=N/2
        #[arg(long, conflicts_with = "pair")]
        distances: bool,
        /// Qubit for the tangle; repeatable (default: every qubit)
        #[arg(long)]
        qubit: Vec<usize>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Thermal pair concurrence over a (lambda, T) grid; T = 0 means the ground state
    Thermal {
        #[command(flatten)]
        ring: RingArgs,
        #[command(flatten)]
        lambda: LambdaGrid,
        #[arg(long, default_value_t = 0.01, allow_negative_numbers = true)]
        temp_min: f64,
        #[arg(long, default_value_t = 3.0, allow_negative_numbers = true)]
        temp_max: f64,
        #[arg(long, default_value_t = 20)]
        temp_steps: usize,
        #[arg(long, value_parser = parse_pair, default_value = "1,2")]
        pair: (usize, usize),
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Zero-energy, block-mixedness, alpha-family and Bell-extraction checks
    /// of the X-state; JSON report
    XstateVerify {
        #[command(flatten)]
        ring: RingArgs,
        #[arg(long, default_value_t = 1e-9)]
        tolerance: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Dense vs free-fermion spectra: `num_qubits,lambda,deviation`
    Crosscheck {
        #[arg(long, default_value_t = 2)]
        n_min: usize,
        #[arg(long, default_value_t = 10)]
        n_max: usize,
        /// Comma-separated coupling values
        #[arg(long, value_delimiter = ',', default_value = "0,0.5,1,2", allow_negative_numbers = true)]
        lambdas: Vec<f64>,
        #[arg(long, default_value_t = 1e-8)]
        tolerance: f64,
        #[command(flatten)]
        output: OutputArgs,
    },
}

#[derive(Debug, Args)]
struct RingArgs {
    /// Number of qubits N
    #[arg(short = 'n', long = "qubits")]
    qubits: usize,
}

#[derive(Debug, Args)]
struct LambdaGrid {
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    lambda_min: f64,
    #[arg(long, default_value_t = 3.0, allow_negative_numbers = true)]
    lambda_max: f64,
    #[arg(long, default_value_t = 31)]
    lambda_steps: usize,
}

impl LambdaGrid {
    fn points(&self) -> Result<Vec<f64>> {
        linspace(self.lambda_min, self.lambda_max, self.lambda_steps)
    }

    fn describe(&self) -> String {
        format!(
            "linspace({}, {}, {})",
            self.lambda_min, self.lambda_max, self.lambda_steps
        )
    }
}

#[derive(Debug, Args)]
struct OutputArgs {
    /// Output file (default: stdout)
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Measure {
    Concurrence,
    Tangle,
    ThreeTangle,
}

fn parse_pair(s: &str) -> std::result::Result<(usize, usize), String> {
    let (a, b) = s
        .split_once(',')
        .ok_or_else(|| format!("expected i,j but got {s:?}"))?;
    let a = a.trim().parse().map_err(|e| format!("{a:?}: {e}"))?;
    let b = b.trim().parse().map_err(|e| format!("{b:?}: {e}"))?;
    Ok((a, b))
}

/// Failure of a verification command, carrying the report to emit anyway.
enum Outcome {
    Done(String, Option<PathBuf>),
    Failed(String, Option<PathBuf>, String),
}

pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::InvalidInput(_) => EXIT_INVALID,
        Error::ResourceLimit(_) => EXIT_RESOURCE,
        _ => EXIT_VERIFY,
    }
}

/// Parses `args` (including the program name) and runs the command. Returns
/// the process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
            let text = if e.use_stderr() { e.render().to_string() } else { e.to_string() };
            let sink: &mut dyn Write = if e.use_stderr() { stderr } else { stdout };
            let _ = sink.write_all(text.as_bytes());
            return code;
        }
    };
    let exec = match execution(cli.threads) {
        Ok(exec) => exec,
        Err(e) => return report_error(stderr, &e),
    };
    let outcome = match dispatch(&cli.command, exec) {
        Ok(o) => o,
        Err(e) => return report_error(stderr, &e),
    };
    let (text, out, failure) = match outcome {
        Outcome::Done(text, out) => (text, out, None),
        Outcome::Failed(text, out, why) => (text, out, Some(why)),
    };
    let written = match out {
        Some(path) => std::fs::write(&path, text.as_bytes())
            .map_err(|e| format!("cannot write {}: {e}", path.display())),
        None => stdout
            .write_all(text.as_bytes())
            .map_err(|e| format!("cannot write output: {e}")),
    };
    if let Err(msg) = written {
        let _ = writeln!(stderr, "error: {msg}");
        return EXIT_VERIFY;
    }
    match failure {
        Some(why) => {
            let _ = writeln!(stderr, "verification failed: {why}");
            EXIT_VERIFY
        }
        None => EXIT_OK,
    }
}

fn report_error(stderr: &mut dyn Write, e: &Error) -> i32 {
    let _ = writeln!(stderr, "error: {e}");
    exit_code(e)
}

#[cfg(feature = "parallel")]
fn execution(threads: Option<usize>) -> Result<Execution> {
    match threads {
        Some(0) => Err(Error::invalid("--threads must be at least 1")),
        Some(1) => Ok(Execution::Sequential),
        Some(k) => {
            // A second call in the same process keeps the first pool.
            let _ = rayon::ThreadPoolBuilder::new().num_threads(k).build_global();
            Ok(Execution::Parallel)
        }
        None => Ok(Execution::Parallel),
    }
}

#[cfg(not(feature = "parallel"))]
fn execution(threads: Option<usize>) -> Result<Execution> {
    match threads {
        Some(0) => Err(Error::invalid("--threads must be at least 1")),
        _ => Ok(Execution::Sequential),
    }
}

fn dense_guard(n: usize, limit: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::invalid(format!("ring needs N >= 2, got {n}")));
    }
    if n > limit {
        return Err(Error::ResourceLimit(format!(
            "N = {n} exceeds the limit of {limit} qubits for this command"
        )));
    }
    Ok(())
}

fn render(result: &SweepResult, format: Format) -> String {
    match format {
        Format::Csv => result.to_csv(),
        Format::Json => result.to_json(),
    }
}

fn dispatch(command: &Command, exec: Execution) -> Result<Outcome> {
    match command {
        Command::Spectrum { ring, lambda, output } => {
            let r = cmd_spectrum(ring.qubits, lambda, exec)?;
            Ok(Outcome::Done(render(&r, output.format), output.out.clone()))
        }
        Command::GroundEntanglement {
            ring,
            lambda,
            measure,
            pair,
            distances,
            qubit,
            output,
        } => {
            let r = cmd_ground_entanglement(ring.qubits, lambda, *measure, pair, *distances, qubit, exec)?;
            Ok(Outcome::Done(render(&r, output.format), output.out.clone()))
        }
        Command::Thermal {
            ring,
            lambda,
            temp_min,
            temp_max,
            temp_steps,
            pair,
            output,
        } => {
            let temps = linspace(*temp_min, *temp_max, *temp_steps)?;
            let r = cmd_thermal(ring.qubits, lambda, &temps, *pair, exec)?;
            Ok(Outcome::Done(render(&r, output.format), output.out.clone()))
        }
        Command::XstateVerify { ring, tolerance, out } => {
            let report = cmd_xstate_verify(ring.qubits, *tolerance)?;
            let mut text = serde_json::to_string_pretty(&report).expect("plain data");
            text.push('\n');
            Ok(match report.failures() {
                None => Outcome::Done(text, out.clone()),
                Some(why) => Outcome::Failed(text, out.clone(), why),
            })
        }
        Command::Crosscheck {
            n_min,
            n_max,
            lambdas,
            tolerance,
            output,
        } => {
            let r = cmd_crosscheck(*n_min, *n_max, lambdas, exec)?;
            let text = render(&r, output.format);
            let worst = r
                .column("deviation")
                .expect("deviation column")
                .into_iter()
                .fold(0.0f64, f64::max);
            Ok(if worst > *tolerance {
                Outcome::Failed(
                    text,
                    output.out.clone(),
                    format!("largest deviation {worst:e} exceeds {tolerance:e}"),
                )
            } else {
                Outcome::Done(text, output.out.clone())
            })
        }
    }
}

fn cmd_spectrum(n: usize, grid: &LambdaGrid, exec: Execution) -> Result<SweepResult> {
    dense_guard(n, MAX_DENSE_QUBITS)?;
    let lambdas = grid.points()?;
    let params = lambdas
        .iter()
        .map(|&l| IsingParams::new(n, l))
        .collect::<Result<Vec<_>>>()?;
    let spectra = exec.map(&params, hamiltonian::spectrum);
    let mut out = SweepResult::new("spectrum", &["lambda", "level", "energy"])
        .with_meta("num_qubits", n)
        .with_meta("lambda_grid", grid.describe());
    for (&l, levels) in lambdas.iter().zip(spectra) {
        for (k, e) in levels.into_iter().enumerate() {
            out.push(vec![l.into(), k.into(), e.into()])?;
        }
    }
    out.check_row_count(lambdas.len() << n)?;
    Ok(out)
}

fn check_qubit(n: usize, q: usize) -> Result<()> {
    if !(1..=n).contains(&q) {
        return Err(Error::invalid(format!("qubit {q} outside 1..={n}")));
    }
    Ok(())
}

fn check_pair(n: usize, (i, j): (usize, usize)) -> Result<()> {
    check_qubit(n, i)?;
    check_qubit(n, j)?;
    if i == j {
        return Err(Error::invalid(format!("pair ({i},{j}) repeats a qubit")));
    }
    Ok(())
}

fn cmd_ground_entanglement(
    n: usize,
    grid: &LambdaGrid,
    measure: Measure,
    pairs: &[(usize, usize)],
    distances: bool,
    qubits: &[usize],
    exec: Execution,
) -> Result<SweepResult> {
    dense_guard(n, MAX_DENSE_QUBITS)?;
    let lambdas = grid.points()?;
    let mut out;
    match measure {
        Measure::Concurrence => {
            let pairs: Vec<(usize, usize)> = if distances {
                (1..=n / 2).map(|d| (1, 1 + d)).collect()
            } else if pairs.is_empty() {
                vec![(1, 2)]
            } else {
                pairs.to_vec()
            };
            for &p in &pairs {
                check_pair(n, p)?;
            }
            let rows = exec.try_map(&lambdas, |&l| {
                let g = hamiltonian::ground_state(&IsingParams::new(n, l)?)?;
                pairs
                    .iter()
                    .map(|&(i, j)| entanglement::pair_concurrence(&g, i, j))
                    .collect::<Result<Vec<_>>>()
            })?;
            out = SweepResult::new("ground-entanglement", &["lambda", "i", "j", "concurrence"]);
            for (&l, cs) in lambdas.iter().zip(rows) {
                for (&(i, j), c) in pairs.iter().zip(cs) {
                    out.push(vec![l.into(), i.into(), j.into(), c.into()])?;
                }
            }
            out.check_row_count(lambdas.len() * pairs.len())?;
        }
        Measure::Tangle => {
            let qubits: Vec<usize> = if qubits.is_empty() {
                (1..=n).collect()
            } else {
                qubits.to_vec()
            };
            for &q in &qubits {
                check_qubit(n, q)?;
            }
            let rows = exec.try_map(&lambdas, |&l| {
                let g = hamiltonian::ground_state(&IsingParams::new(n, l)?)?;
                qubits
                    .iter()
                    .map(|&q| entanglement::tangle(&g, q))
                    .collect::<Result<Vec<_>>>()
            })?;
            out = SweepResult::new("ground-entanglement", &["lambda", "qubit", "tangle"]);
            for (&l, ts) in lambdas.iter().zip(rows) {
                for (&q, t) in qubits.iter().zip(ts) {
                    out.push(vec![l.into(), q.into(), t.into()])?;
                }
            }
            out.check_row_count(lambdas.len() * qubits.len())?;
        }
        Measure::ThreeTangle => {
            if n != 3 {
                return Err(Error::invalid(format!("three-tangle needs N = 3, got {n}")));
            }
            let rows = exec.try_map(&lambdas, |&l| {
                let g = hamiltonian::ground_state(&IsingParams::new(n, l)?)?;
                entanglement::three_tangle(&g)
            })?;
            out = SweepResult::new("ground-entanglement", &["lambda", "three_tangle"]);
            for (&l, t) in lambdas.iter().zip(rows) {
                out.push(vec![l.into(), t.into()])?;
            }
            out.check_row_count(lambdas.len())?;
        }
    }
    out.set_meta("num_qubits", n);
    out.set_meta("lambda_grid", grid.describe());
    out.set_meta(
        "measure",
        match measure {
            Measure::Concurrence => "concurrence",
            Measure::Tangle => "tangle",
            Measure::ThreeTangle => "three-tangle",
        },
    );
    Ok(out)
}

fn cmd_thermal(
    n: usize,
    grid: &LambdaGrid,
    temps: &[f64],
    pair: (usize, usize),
    exec: Execution,
) -> Result<SweepResult> {
    dense_guard(n, MAX_DENSE_QUBITS)?;
    check_pair(n, pair)?;
    if let Some(t) = temps.iter().find(|&&t| t < 0.0) {
        return Err(Error::invalid(format!("negative temperature {t}")));
    }
    let lambdas = grid.points()?;
    let params = lambdas
        .iter()
        .map(|&l| IsingParams::new(n, l))
        .collect::<Result<Vec<_>>>()?;
    let rows = exec.try_map(&params, |p| {
        let es = hamiltonian::eigensystem(p);
        let ground = if temps.contains(&0.0) {
            Some(entanglement::pair_concurrence(&hamiltonian::ground_state(p)?, pair.0, pair.1)?)
        } else {
            None
        };
        temps
            .iter()
            .map(|&t| match ground {
                Some(c) if t == 0.0 => Ok(c),
                _ => entanglement::concurrence(&thermal::gibbs_pair_marginal(&es, t, pair.0, pair.1)?),
            })
            .collect::<Result<Vec<_>>>()
    })?;
    let mut out = SweepResult::new("thermal", &["lambda", "temperature", "concurrence"])
        .with_meta("num_qubits", n)
        .with_meta("pair", format!("{},{}", pair.0, pair.1))
        .with_meta("lambda_grid", grid.describe())
        .with_meta("temperature_grid", format!("{} points from {} to {}", temps.len(), temps[0], temps[temps.len() - 1]));
    for (&l, cs) in lambdas.iter().zip(rows) {
        for (&t, c) in temps.iter().zip(cs) {
            out.push(vec![l.into(), t.into(), c.into()])?;
        }
    }
    out.check_row_count(lambdas.len() * temps.len())?;
    Ok(out)
}

#[derive(Debug, Clone, Serialize)]
pub struct BlockDeviation {
    pub size: usize,
    pub max_deviation: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct XStateReport {
    pub tool: String,
    pub num_qubits: usize,
    pub tolerance: f64,
    pub residual_zero_energy: f64,
    pub block_deviations: Vec<BlockDeviation>,
    pub gram_deviation: f64,
    pub bell_fidelity: f64,
    pub passed: bool,
}

impl XStateReport {
    fn failures(&self) -> Option<String> {
        let mut why = String::new();
        let tol = self.tolerance;
        if self.residual_zero_energy > tol {
            write!(why, "residual {:e}; ", self.residual_zero_energy).unwrap();
        }
        for b in self.block_deviations.iter().filter(|b| b.max_deviation > tol) {
            write!(why, "block size {} deviation {:e}; ", b.size, b.max_deviation).unwrap();
        }
        if self.gram_deviation > tol * self.gram_scale() {
            write!(why, "gram deviation {:e}; ", self.gram_deviation).unwrap();
        }
        if 1.0 - self.bell_fidelity > tol {
            write!(why, "bell fidelity {}; ", self.bell_fidelity).unwrap();
        }
        if why.is_empty() {
            None
        } else {
            Some(why.trim_end_matches("; ").to_string())
        }
    }

    /// The Gram matrix carries `2^n` on its diagonal; its deviation is judged
    /// relative to that.
    fn gram_scale(&self) -> f64 {
        (1usize << ((self.num_qubits - 1) / 2)) as f64
    }
}

pub fn cmd_xstate_verify(n: usize, tolerance: f64) -> Result<XStateReport> {
    if tolerance.is_nan() || tolerance <= 0.0 {
        return Err(Error::invalid(format!("tolerance must be positive, got {tolerance}")));
    }
    let ring = specialstates::RingGeometry::odd(n)?;
    dense_guard(n, MAX_XSTATE_QUBITS)?;
    let x = specialstates::xstate(n)?;
    let residual_zero_energy = specialstates::xstate_residual(n)?;
    let block_deviations = specialstates::all_block_deviations(&x)?
        .into_iter()
        .enumerate()
        .map(|(k, d)| BlockDeviation {
            size: k + 1,
            max_deviation: d,
        })
        .collect();
    let family = specialstates::alpha_family(n, &ring.block(1, ring.half())?)?;
    let gram_deviation = family.gram_deviation();
    let bell_fidelity = specialstates::bell_extraction_fidelity(&family)?;
    let mut report = XStateReport {
        tool: format!("{TOOL_NAME} {TOOL_VERSION}"),
        num_qubits: n,
        tolerance,
        residual_zero_energy,
        block_deviations,
        gram_deviation,
        bell_fidelity,
        passed: false,
    };
    report.passed = report.failures().is_none();
    Ok(report)
}

fn cmd_crosscheck(n_min: usize, n_max: usize, lambdas: &[f64], exec: Execution) -> Result<SweepResult> {
    if n_min < 2 || n_min > n_max {
        return Err(Error::invalid(format!("bad qubit range {n_min}..={n_max}")));
    }
    dense_guard(n_max, MAX_CROSSCHECK_QUBITS)?;
    if lambdas.is_empty() {
        return Err(Error::invalid("no lambda values"));
    }
    let cells: Vec<(usize, f64)> = (n_min..=n_max)
        .flat_map(|n| lambdas.iter().map(move |&l| (n, l)))
        .collect();
    let devs = exec.try_map(&cells, |&(n, l)| {
        let dense = hamiltonian::spectrum(&IsingParams::new(n, l)?);
        let ff = freefermion::assemble_spectrum_with(n, l, Execution::Sequential)?;
        Ok::<f64, Error>(freefermion::max_sorted_deviation(&dense, &ff))
    })?;
    let mut out = SweepResult::new("crosscheck", &["num_qubits", "lambda", "deviation"])
        .with_meta("qubit_range", format!("{n_min}..={n_max}"))
        .with_meta(
            "lambdas",
            lambdas.iter().map(|l| l.to_string()).collect::<Vec<_>>().join(","),
        );
    for (&(n, l), d) in cells.iter().zip(devs) {
        out.push(vec![n.into(), l.into(), d.into()])?;
    }
    out.check_row_count(cells.len())?;
    Ok(out)
}
