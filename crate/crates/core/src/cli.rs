//! Command-line front end. Exit codes: 0 success, 1 validation or
//! physicality failure, 2 usage error, 3 I/O error.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::Rng;
use serde::Deserialize;

use crate::cmatrix::{self, CMatrix};
use crate::geometry::{random_quadruple, BlochVector, PurityClass, SamplerOptions};
use crate::io::{self, FileKind, IoError, SchemeFile, StateFile, TensorSchemeFile};
use crate::multiqubit::{self, MultiqubitError, TensorScheme, VerifyMode, DEFAULT_SAMPLES, EXHAUSTIVE_MAX_N, TENSOR_TOL};
use crate::scheme::{scheme_diagnostics, Check, SchemeError, Spin12Scheme};
use crate::selftest;
use crate::tolerance::Tolerances;
use crate::tomography::{self, TomographyError, TrialOutcome};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitStatus {
    Success = 0,
    Failure = 1,
    Usage = 2,
    Io = 3,
}

#[derive(Debug)]
pub struct CliError {
    pub status: ExitStatus,
    pub message: String,
}

impl CliError {
    fn usage(message: impl ToString) -> Self {
        CliError { status: ExitStatus::Usage, message: message.to_string() }
    }

    fn failure(message: impl ToString) -> Self {
        CliError { status: ExitStatus::Failure, message: message.to_string() }
    }

    fn io(message: impl ToString) -> Self {
        CliError { status: ExitStatus::Io, message: message.to_string() }
    }
}

impl From<IoError> for CliError {
    fn from(e: IoError) -> Self {
        let status = match e {
            IoError::ValidationFailure { .. } => ExitStatus::Failure,
            IoError::UnknownPreset(_) => ExitStatus::Usage,
            _ => ExitStatus::Io,
        };
        CliError { status, message: e.to_string() }
    }
}

impl From<TomographyError> for CliError {
    fn from(e: TomographyError) -> Self {
        match e {
            TomographyError::DimensionMismatch { .. } | TomographyError::LengthMismatch { .. } => CliError::usage(e),
            _ => CliError::failure(e),
        }
    }
}

impl From<MultiqubitError> for CliError {
    fn from(e: MultiqubitError) -> Self {
        match e {
            MultiqubitError::Tomography(t) => t.into(),
            MultiqubitError::ExhaustiveTooLarge(_) | MultiqubitError::MaterializeLimitExceeded { .. } => {
                CliError::usage(e)
            }
            _ => CliError::failure(e),
        }
    }
}

type CliResult = Result<ExitStatus, CliError>;

#[derive(Debug, Parser)]
#[command(name = "spintomo", version, about = "Vector tomograms of qubit and multi-qubit states")]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build or validate a single-qubit scheme.
    #[command(subcommand)]
    Scheme(SchemeCommand),
    /// Forward and inverse maps between states and tomograms.
    #[command(subcommand)]
    Map(MapCommand),
    /// Multi-qubit tensor schemes.
    #[command(subcommand)]
    Tensor(TensorCommand),
    /// Finite-shot measurement simulation with linear-inversion estimates.
    Simulate(SimulateArgs),
    /// Run the full invariant suite on random schemes and states.
    Selftest(SelftestArgs),
}

#[derive(Debug, Subcommand)]
enum SchemeCommand {
    /// Build a scheme and write it with its dequantizer and quantizer.
    New(SchemeNewArgs),
    /// Check every scheme identity for a scheme file.
    Validate(SchemeValidateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    Pure,
    Mixed,
    Heterogeneous,
}

impl From<Mode> for PurityClass {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Pure => PurityClass::AllPure,
            Mode::Mixed => PurityClass::AllMixed,
            Mode::Heterogeneous => PurityClass::Heterogeneous,
        }
    }
}

#[derive(Debug, Args)]
#[command(group(clap::ArgGroup::new("source").required(true).args(["preset", "vectors", "random"])))]
struct SchemeNewArgs {
    /// Bundled scheme: example1 or example2.
    #[arg(long)]
    preset: Option<String>,
    /// JSON file holding four [α, β, γ] vectors, bare or under "vectors".
    #[arg(long)]
    vectors: Option<PathBuf>,
    /// Seed for a random admissible quadruple.
    #[arg(long, value_name = "SEED")]
    random: Option<u64>,
    /// Purity class of the random quadruple.
    #[arg(long, value_enum, default_value = "pure", requires = "random")]
    mode: Mode,
    /// Label stored in the file.
    #[arg(long)]
    label: Option<String>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct SchemeValidateArgs {
    file: PathBuf,
    /// Print the full diagnostics as JSON instead of a table.
    #[arg(long)]
    json: bool,
}

#[derive(Debug, Subcommand)]
enum MapCommand {
    /// Tomogram of a state: w_j = Tr{ρU_j}.
    Forward {
        /// Scheme or tensor-scheme file.
        #[arg(long)]
        scheme: PathBuf,
        #[arg(long)]
        state: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// State reconstructed from a tomogram: ρ = Σ_j w_j D_j.
    Inverse {
        /// Scheme or tensor-scheme file.
        #[arg(long)]
        scheme: PathBuf,
        #[arg(long)]
        tomogram: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Exit 1 when the reconstruction is not a density matrix.
        #[arg(long)]
        check_physical: bool,
    },
}

#[derive(Debug, Subcommand)]
enum TensorCommand {
    /// Compose single-qubit schemes into an N-qubit scheme.
    Build {
        /// Comma-separated scheme files or preset names, one per qubit, or a
        /// single one replicated --n times.
        #[arg(long, value_delimiter = ',', required = true)]
        factors: Vec<String>,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Check orthogonality, completeness and normalization identities.
    Verify {
        file: PathBuf,
        /// Every pair and tuple (N <= 2 only).
        #[arg(long)]
        exhaustive: bool,
        /// Random pairs and tuples in sampled mode.
        #[arg(long, default_value_t = DEFAULT_SAMPLES)]
        samples: usize,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        json: bool,
    },
}

#[derive(Debug, Args)]
struct SimulateArgs {
    /// Scheme or tensor-scheme file.
    #[arg(long)]
    scheme: PathBuf,
    #[arg(long)]
    state: PathBuf,
    /// Shots per component.
    #[arg(long)]
    shots: u64,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value_t = 1)]
    trials: u64,
    /// Write per-trial results as CSV.
    #[arg(long, value_name = "FILE")]
    csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SelftestArgs {
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value_t = selftest::DEFAULT_ITERATIONS)]
    iterations: usize,
    #[arg(long)]
    json: bool,
}

/// Parses `args` (program name first) and runs the command, printing to
/// standard output and errors to standard error. Returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { ExitStatus::Usage } else { ExitStatus::Success };
            let _ = e.print();
            return code as i32;
        }
    };
    match dispatch(cli.command) {
        Ok(status) => status as i32,
        Err(e) => {
            eprintln!("error: {}", e.message);
            e.status as i32
        }
    }
}

fn dispatch(command: Command) -> CliResult {
    match command {
        Command::Scheme(SchemeCommand::New(a)) => scheme_new(a),
        Command::Scheme(SchemeCommand::Validate(a)) => scheme_validate(&a.file, a.json),
        Command::Map(MapCommand::Forward { scheme, state, out }) => map_forward(&scheme, &state, &out),
        Command::Map(MapCommand::Inverse { scheme, tomogram, out, check_physical }) => {
            map_inverse(&scheme, &tomogram, &out, check_physical)
        }
        Command::Tensor(TensorCommand::Build { factors, n, out }) => tensor_build(&factors, n, &out),
        Command::Tensor(TensorCommand::Verify { file, exhaustive, samples, seed, json }) => {
            tensor_verify(&file, exhaustive, samples, seed, json)
        }
        Command::Simulate(a) => simulate(a),
        Command::Selftest(a) => run_selftest(a),
    }
}

fn seed_or_draw(seed: Option<u64>) -> u64 {
    seed.unwrap_or_else(|| {
        let s = rand::rng().random();
        println!("seed: {s} (drawn)");
        s
    })
}

fn print_checks(checks: &[Check]) -> bool {
    let width = checks.iter().map(|c| c.name.chars().count()).max().unwrap_or(0);
    for c in checks {
        let pad = width - c.name.chars().count();
        println!(
            "  {}{}  {:>10.3e}  bound {:.0e}  {}",
            c.name,
            " ".repeat(pad),
            c.value,
            c.bound,
            if c.passed { "ok" } else { "FAIL" }
        );
    }
    checks.iter().all(|c| c.passed)
}

fn fmt_vector(v: BlochVector) -> String {
    format!("({:.6}, {:.6}, {:.6})", v.alpha, v.beta, v.gamma)
}

fn print_matrix(m: &CMatrix) {
    let n = m.dim();
    for r in 0..n {
        let mut line = String::from("  ");
        for c in 0..n {
            let z = m[(r, c)];
            let _ = write!(line, "{:>10.6}{:+.6}i  ", z.re, z.im);
        }
        println!("{}", line.trim_end());
    }
}

fn scheme_error(e: SchemeError) -> CliError {
    CliError::failure(e)
}

#[derive(Deserialize)]
#[serde(untagged)]
enum VectorsInput {
    Bare([[f64; 3]; 4]),
    Wrapped { vectors: [[f64; 3]; 4] },
}

fn read_vectors(path: &Path) -> Result<[BlochVector; 4], CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(format!("{}: {e}", path.display())))?;
    let input: VectorsInput = serde_json::from_str(&text)
        .map_err(|e| CliError::io(format!("{}: expected four [α, β, γ] vectors: {e}", path.display())))?;
    let raw = match input {
        VectorsInput::Bare(v) | VectorsInput::Wrapped { vectors: v } => v,
    };
    Ok(raw.map(BlochVector::from_array))
}

fn scheme_new(a: SchemeNewArgs) -> CliResult {
    let tols = Tolerances::default();
    let s = if let Some(name) = &a.preset {
        io::preset(name)?
    } else if let Some(path) = &a.vectors {
        let e = read_vectors(path)?;
        let label = a.label.clone().unwrap_or_else(|| path.file_stem().map_or("scheme".into(), |s| s.to_string_lossy().into()));
        Spin12Scheme::from_vectors(e, label, tols).map_err(scheme_error)?
    } else {
        let seed = a.random.expect("clap enforces one source");
        let q = random_quadruple(seed, a.mode.into(), &SamplerOptions::default())
            .map_err(|e| CliError::failure(format!("sampling failed: {e}")))?;
        let label = format!("random-{seed}-{}", format!("{:?}", a.mode).to_lowercase());
        Spin12Scheme::new(q, label, tols).map_err(scheme_error)?
    };
    let s = match &a.label {
        Some(l) if a.vectors.is_none() => Spin12Scheme::new(s.quadruple().clone(), l.clone(), *s.tols()).map_err(scheme_error)?,
        _ => s,
    };
    io::save_scheme(&a.out, &s)?;

    let d = scheme_diagnostics(&s);
    println!("scheme {} ({})", s.label(), s.quadruple().purity_class());
    for (k, e) in s.quadruple().vectors().iter().enumerate() {
        println!("  e{} = {}  |e| = {:.6}  Δ{} = {:+.6e}", k + 1, fmt_vector(*e), e.norm(), k + 1, d.deltas[k]);
    }
    let checks = d.checks(&tols);
    let failed = checks.iter().filter(|c| !c.passed).count();
    println!("identity checks: {} of {} pass", checks.len() - failed, checks.len());
    println!("wrote {}", a.out.display());
    Ok(if failed == 0 { ExitStatus::Success } else { ExitStatus::Failure })
}

fn scheme_validate(path: &Path, json: bool) -> CliResult {
    let s = io::load_scheme(path)?;
    let d = scheme_diagnostics(&s);
    let ok = d.passed(s.tols());
    if json {
        println!("{}", serde_json::to_string_pretty(&d).expect("plain data"));
    } else {
        println!("scheme {} ({})", s.label(), s.quadruple().purity_class());
        println!("  Δ = [{}]", d.deltas.map(|x| format!("{x:+.6e}")).join(", "));
        print_checks(&d.checks(s.tols()));
        println!("{}", if ok { "valid" } else { "INVALID" });
    }
    Ok(if ok { ExitStatus::Success } else { ExitStatus::Failure })
}

#[allow(clippy::large_enum_variant)]
enum AnyScheme {
    Single(Spin12Scheme),
    Tensor(TensorScheme),
}

impl AnyScheme {
    fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(format!("{}: {e}", path.display())))?;
        match io::from_json_str::<SchemeFile>(&text, FileKind::Scheme) {
            Ok(f) => Ok(AnyScheme::Single(f.to_scheme()?)),
            Err(IoError::WrongKind { found, .. }) if found == FileKind::TensorScheme.to_string() => {
                let f: TensorSchemeFile = io::from_json_str(&text, FileKind::TensorScheme)?;
                Ok(AnyScheme::Tensor(f.to_tensor_scheme()?))
            }
            Err(e) => Err(e.into()),
        }
    }

    fn n_qubits(&self) -> usize {
        match self {
            AnyScheme::Single(_) => 1,
            AnyScheme::Tensor(ts) => ts.n_qubits(),
        }
    }

    fn tols(&self) -> Tolerances {
        match self {
            AnyScheme::Single(s) => *s.tols(),
            AnyScheme::Tensor(ts) => *ts.factors()[0].tols(),
        }
    }
}

fn map_forward(scheme: &Path, state: &Path, out: &Path) -> CliResult {
    let s = AnyScheme::load(scheme)?;
    let rho = io::load_state(state, &s.tols())?;
    let w = match &s {
        AnyScheme::Single(s) => tomography::forward(&rho, s)?,
        AnyScheme::Tensor(ts) => multiqubit::forward_n(&rho, ts)?,
    };
    io::save_tomogram(out, &w, s.n_qubits())?;
    println!("tomogram under {} ({} components, Σw = {:.12})", w.scheme_label, w.len(), w.sum());
    if w.len() <= 16 {
        for (j, x) in w.w.iter().enumerate() {
            println!("  w{} = {x:.12}", j + 1);
        }
    }
    println!("wrote {}", out.display());
    Ok(ExitStatus::Success)
}

fn map_inverse(scheme: &Path, tomogram: &Path, out: &Path, check_physical: bool) -> CliResult {
    let s = AnyScheme::load(scheme)?;
    let w = io::load_tomogram(tomogram)?;
    let rho = match &s {
        AnyScheme::Single(s) => tomography::inverse(&w, s)?,
        AnyScheme::Tensor(ts) => multiqubit::inverse_n(&w, ts)?,
    };
    let file = StateFile {
        format_version: io::FORMAT_VERSION.into(),
        kind: FileKind::State,
        label: Some(format!("inverse under {}", w.scheme_label)),
        rho: io::MatrixData::from_matrix(&rho),
    };
    io::save(out, &file)?;
    println!("reconstruction (trace {:.12}):", rho.trace().re);
    if rho.dim() <= 4 {
        print_matrix(&rho);
    }
    println!("wrote {}", out.display());
    if !check_physical {
        return Ok(ExitStatus::Success);
    }
    let tols = s.tols();
    let physical = match &s {
        AnyScheme::Single(s) => {
            let r = tomography::is_physical(&w, s, tols.psd)?;
            println!(
                "physicality: diagonal [{:.6e}, {:.6e}] {}, determinant {:.6e} {}, normalization {:.12} {}",
                r.diagonal[0],
                r.diagonal[1],
                if r.diagonal_ok { "ok" } else { "FAIL" },
                r.determinant,
                if r.determinant_ok { "ok" } else { "FAIL" },
                r.normalization,
                if r.normalization_ok { "ok" } else { "FAIL" },
            );
            r.passed()
        }
        AnyScheme::Tensor(_) => {
            let min = cmatrix::min_eigenvalue(&rho.hermitian_part(), tols.herm).map_err(CliError::failure)?;
            let trace = rho.trace().re;
            println!("physicality: smallest eigenvalue {min:.6e}, trace {trace:.12}");
            min >= -tols.psd && (trace - 1.0).abs() <= tols.psd
        }
    };
    println!("{}", if physical { "physical" } else { "NOT PHYSICAL" });
    Ok(if physical { ExitStatus::Success } else { ExitStatus::Failure })
}

fn load_factor(spec: &str) -> Result<Spin12Scheme, CliError> {
    let path = Path::new(spec);
    if !path.exists() && io::PRESET_NAMES.contains(&spec) {
        return Ok(io::preset(spec)?);
    }
    Ok(io::load_scheme(path)?)
}

fn tensor_build(factors: &[String], n: Option<usize>, out: &Path) -> CliResult {
    if n == Some(0) {
        return Err(CliError::usage("--n must be at least 1"));
    }
    let loaded = factors.iter().map(|f| load_factor(f)).collect::<Result<Vec<_>, _>>()?;
    let ts = match (loaded.len(), n) {
        (1, Some(n)) => TensorScheme::replicate(&loaded[0], n)?,
        (k, Some(n)) if k != n => {
            return Err(CliError::usage(format!("{k} factors given but --n {n}")));
        }
        _ => TensorScheme::new(loaded)?,
    };
    io::save_tensor_scheme(out, &ts)?;
    println!("tensor scheme {} : N = {}, {} components of size {}x{}", ts.label(), ts.n_qubits(), ts.len(), ts.dim(), ts.dim());
    println!("wrote {}", out.display());
    Ok(ExitStatus::Success)
}

fn tensor_verify(path: &Path, exhaustive: bool, samples: usize, seed: Option<u64>, json: bool) -> CliResult {
    let ts = io::load_tensor_scheme(path)?;
    if exhaustive && ts.n_qubits() > EXHAUSTIVE_MAX_N {
        return Err(CliError::usage(format!(
            "--exhaustive is limited to N <= {EXHAUSTIVE_MAX_N}; this scheme has N = {}",
            ts.n_qubits()
        )));
    }
    let mode = if exhaustive {
        VerifyMode::Exhaustive
    } else {
        VerifyMode::Sampled { samples, seed: if json { seed.unwrap_or_else(|| rand::rng().random()) } else { seed_or_draw(seed) } }
    };
    let r = multiqubit::verify_tensor_identities(&ts, mode)?;
    let ok = r.passed(TENSOR_TOL);
    if json {
        println!("{}", serde_json::to_string_pretty(&r).expect("plain data"));
    } else {
        println!(
            "tensor scheme {} : N = {}, {} pairs, {} index tuples",
            r.label, r.n_qubits, r.pairs_checked, r.tuples_checked
        );
        print_checks(&r.checks(TENSOR_TOL));
        println!("{}", if ok { "valid" } else { "INVALID" });
    }
    Ok(if ok { ExitStatus::Success } else { ExitStatus::Failure })
}

/// Column order of `simulate --csv`.
pub const CSV_HEADER: [&str; 6] = ["trial", "seed", "shots", "frobenius_error", "min_eigenvalue", "trace"];

fn write_csv(path: &Path, outcomes: &[TrialOutcome]) -> Result<(), CliError> {
    let io_err = |e: csv::Error| CliError::io(format!("{}: {e}", path.display()));
    let mut w = csv::Writer::from_path(path).map_err(io_err)?;
    w.write_record(CSV_HEADER).map_err(io_err)?;
    for t in outcomes {
        w.write_record([
            t.trial.to_string(),
            t.seed.to_string(),
            t.shots.to_string(),
            t.frobenius_error.to_string(),
            t.min_eigenvalue.to_string(),
            t.trace.to_string(),
        ])
        .map_err(io_err)?;
    }
    w.flush().map_err(|e| CliError::io(format!("{}: {e}", path.display())))
}

fn simulate(a: SimulateArgs) -> CliResult {
    if a.shots == 0 || a.trials == 0 {
        return Err(CliError::usage("--shots and --trials must be at least 1"));
    }
    let s = AnyScheme::load(&a.scheme)?;
    let rho = io::load_state(&a.state, &s.tols())?;
    let seed = seed_or_draw(a.seed);
    let outcomes = match &s {
        AnyScheme::Single(s) => tomography::run_trials(&rho, s, a.shots, seed, a.trials)?,
        AnyScheme::Tensor(ts) => multiqubit::run_trials_n(&rho, ts, a.shots, seed, a.trials)?,
    };
    if let Some(path) = &a.csv {
        write_csv(path, &outcomes)?;
    }

    println!("{} trials, {} shots per component, seed {seed}", a.trials, a.shots);
    if outcomes.len() <= 10 {
        for t in &outcomes {
            println!(
                "  trial {:>3}  error {:.6e}  min eigenvalue {:+.6e}  trace {:.12}",
                t.trial, t.frobenius_error, t.min_eigenvalue, t.trace
            );
        }
    }
    let errors: Vec<f64> = outcomes.iter().map(|t| t.frobenius_error).collect();
    let mins: Vec<f64> = outcomes.iter().map(|t| t.min_eigenvalue).collect();
    println!(
        "Frobenius error: median {:.6e}, 10% {:.6e}, 90% {:.6e}",
        tomography::median(&errors),
        tomography::quantile(&errors, 0.1),
        tomography::quantile(&errors, 0.9)
    );
    let negative = mins.iter().filter(|&&m| m < 0.0).count();
    println!(
        "min eigenvalue: median {:+.6e}, lowest {:+.6e}; {negative} of {} estimates indefinite",
        tomography::median(&mins),
        mins.iter().copied().fold(f64::INFINITY, f64::min),
        mins.len()
    );
    if let Some(path) = &a.csv {
        println!("wrote {}", path.display());
    }
    Ok(ExitStatus::Success)
}

fn run_selftest(a: SelftestArgs) -> CliResult {
    let seed = if a.json { a.seed.unwrap_or_else(|| rand::rng().random()) } else { seed_or_draw(a.seed) };
    let r = selftest::run(seed, a.iterations);
    if a.json {
        println!("{}", serde_json::to_string_pretty(&r).expect("plain data"));
    } else {
        println!("selftest: seed {seed}, {} iterations", a.iterations);
        let width = r.suites.iter().map(|s| s.name.chars().count()).max().unwrap_or(0);
        for s in &r.suites {
            println!(
                "  {}{}  {:>6} cases  worst {:>10.3e}  bound {:.0e}  {}",
                s.name,
                " ".repeat(width - s.name.chars().count()),
                s.cases,
                s.worst,
                s.bound,
                if s.passed() { "PASS" } else { "FAIL" }
            );
            if let Some(d) = &s.detail {
                println!("      {d}");
            }
        }
        println!("{}", if r.passed() { "all suites pass" } else { "FAILURES" });
    }
    Ok(if r.passed() { ExitStatus::Success } else { ExitStatus::Failure })
}
