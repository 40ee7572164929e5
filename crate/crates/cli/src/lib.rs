//! Command-line front end: argument parsing, JSON I/O and exit codes.
//!
//! Exit codes: 0 success, 1 invalid input, 2 infeasible data (Toeplitz
//! matrix or MA spectrum not positive), 3 numerical failure, 4 verification
//! failure.

pub mod schema;

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use varmatch::{
    f_o, homotopy_solve, jacobian_fd_deviation, random_problem, spectral_factor, varma_cov_fft,
    varma_cov_linear, verify_match, CovOracleConfig, Error, ErrorClass, FactorConfig, GenConfig,
    HomotopyConfig, MaInput, MatPoly, OracleMethod, SolveFailure,
};

use schema::{
    cov_from_json, cov_to_json, poly_from_json, poly_to_json, pseudo_from_json, Diagnostics,
    FailureJson, JacobianCheckFile, MaJson, ModelFile, ProblemFile, PseudoFile, SolutionFile,
    SolveOptions,
};

/// Largest accepted deviation for `jacobian-check`.
pub const JACOBIAN_CHECK_TOL: f64 = 1e-5;

pub const EXIT_OK: u8 = 0;
pub const EXIT_INPUT: u8 = 1;
pub const EXIT_INFEASIBLE: u8 = 2;
pub const EXIT_NUMERICAL: u8 = 3;
pub const EXIT_VERIFICATION: u8 = 4;

pub fn exit_code(class: ErrorClass) -> u8 {
    match class {
        ErrorClass::Input => EXIT_INPUT,
        ErrorClass::Infeasible => EXIT_INFEASIBLE,
        ErrorClass::Numerical => EXIT_NUMERICAL,
        ErrorClass::Verification => EXIT_VERIFICATION,
    }
}

#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    fn input(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_INPUT,
            message: message.into(),
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        Self {
            code: exit_code(e.class()),
            message: e.to_string(),
        }
    }
}

type CliResult<T> = Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(
    name = "varmatch",
    version,
    about = "Covariance matching for vector ARMA models"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Find the AR polynomial matching a problem file's covariances.
    Solve(SolveArgs),
    /// Outer spectral factor of a pseudo-polynomial file.
    Factor(FactorArgs),
    /// First n+1 covariances of an ARMA model file.
    Cov(CovArgs),
    /// Check a solution file against its problem file.
    Verify(VerifyArgs),
    /// Write a seeded random problem with a known solution.
    Generate(GenerateArgs),
    /// Compare the assembled Jacobian with central differences.
    JacobianCheck(JacobianCheckArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OracleArg {
    Linear,
    Fft,
    Both,
}

impl From<OracleArg> for OracleMethod {
    fn from(o: OracleArg) -> Self {
        match o {
            OracleArg::Linear => OracleMethod::Linear,
            OracleArg::Fft => OracleMethod::Fft,
            OracleArg::Both => OracleMethod::Both,
        }
    }
}

fn parse_oracle(s: &str) -> CliResult<OracleMethod> {
    OracleArg::from_str(s, true)
        .map(Into::into)
        .map_err(|_| CliError::input(format!("unknown oracle {s:?}")))
}

#[derive(Debug, Clone, Default, Args)]
pub struct SolverFlags {
    /// Newton residual tolerance; the covariance check allows 100 times this.
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub max_newton: Option<usize>,
    #[arg(long)]
    pub dt_init: Option<f64>,
    /// Grid size of the frequency-domain covariance oracle (power of two).
    #[arg(long)]
    pub grid: Option<usize>,
    /// Bound on the coefficient trace of the AR polynomial.
    #[arg(long)]
    pub mu: Option<f64>,
    #[arg(long)]
    pub no_normalize: bool,
    #[arg(long, value_enum)]
    pub oracle: Option<OracleArg>,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[arg(required_unless_present = "batch", conflicts_with = "batch")]
    pub problem: Option<PathBuf>,
    /// Solve every `*.json` file in a directory; requires `--out DIR`.
    #[arg(long, requires = "out")]
    pub batch: Option<PathBuf>,
    #[command(flatten)]
    pub flags: SolverFlags,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FactorArgs {
    pub input: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CovArgs {
    pub model: PathBuf,
    #[arg(long, value_enum, default_value = "linear")]
    pub oracle: OracleArg,
    #[arg(long, default_value_t = 4096)]
    pub grid: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    pub problem: PathBuf,
    pub solution: PathBuf,
    /// Largest accepted relative covariance deviation.
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    #[arg(long, value_enum, default_value = "both")]
    pub oracle: OracleArg,
    #[arg(long, default_value_t = 4096)]
    pub grid: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long)]
    pub seed: u64,
    #[arg(long)]
    pub m: usize,
    #[arg(long)]
    pub n: usize,
    /// Spectral radius the sampled polynomials are contracted to.
    #[arg(long, default_value_t = 0.9)]
    pub margin: f64,
    /// Standard deviation of the raw coefficient draws.
    #[arg(long, default_value_t = 1.0)]
    pub scale: f64,
    /// Resample the MA part until |det B_n| reaches this.
    #[arg(long, default_value_t = 1e-3)]
    pub min_det: f64,
    /// Pure AR data (`B = I`).
    #[arg(long)]
    pub trivial_ma: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct JacobianCheckArgs {
    pub input: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> CliResult<T> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::input(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::input(format!("invalid JSON in {}: {e}", path.display())))
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable value");
    s.push('\n');
    s
}

fn emit(body: &str, out: Option<&Path>) -> CliResult<()> {
    match out {
        Some(path) => fs::write(path, body)
            .map_err(|e| CliError::input(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{body}");
            Ok(())
        }
    }
}

/// Defaults, then the problem file's options, then command-line flags.
pub fn build_config(
    options: Option<&SolveOptions>,
    flags: &SolverFlags,
) -> CliResult<HomotopyConfig> {
    let mut cfg = HomotopyConfig::default();
    let mut apply = |o: &SolveOptions| -> CliResult<()> {
        if let Some(v) = o.tol {
            cfg.newton_tol = v;
        }
        if let Some(v) = o.max_newton {
            cfg.newton_max_iter = v;
        }
        if let Some(v) = o.dt_init {
            cfg.dt_init = v;
        }
        if let Some(v) = o.dt_min {
            cfg.dt_min = v;
        }
        if let Some(v) = o.grid {
            cfg.oracle.fft_grid = v;
        }
        if let Some(v) = o.mu {
            cfg.schur_spec.mu = v;
        }
        if let Some(v) = o.normalize {
            cfg.normalize = v;
        }
        if let Some(v) = &o.oracle {
            cfg.oracle.method = parse_oracle(v)?;
        }
        Ok(())
    };
    if let Some(o) = options {
        apply(o)?;
    }
    apply(&SolveOptions {
        tol: flags.tol,
        max_newton: flags.max_newton,
        dt_init: flags.dt_init,
        dt_min: None,
        grid: flags.grid,
        mu: flags.mu,
        normalize: flags.no_normalize.then_some(false),
        oracle: None,
    })?;
    if let Some(o) = flags.oracle {
        cfg.oracle.method = o.into();
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Result of solving one problem file: the solution document and exit code.
pub struct SolveOutcome {
    pub solution: SolutionFile,
    pub code: u8,
    pub summary: String,
}

fn failure_json(e: &Error) -> FailureJson {
    let class = match e.class() {
        ErrorClass::Input => "input",
        ErrorClass::Infeasible => "infeasible",
        ErrorClass::Numerical => "numerical",
        ErrorClass::Verification => "verification",
    };
    FailureJson {
        class: class.into(),
        message: e.to_string(),
    }
}

pub fn solve_problem(problem: &ProblemFile, flags: &SolverFlags) -> CliResult<SolveOutcome> {
    let cfg = build_config(problem.options.as_ref(), flags)?;
    let data = problem.data()?;
    let ma = problem.ma_input()?;
    let (solution, code) = match homotopy_solve(&data, &ma, &cfg) {
        Ok(report) => (SolutionFile::from_report(&report), EXIT_OK),
        Err(SolveFailure { error, report }) => {
            let mut solution = match report {
                Some(r) => SolutionFile::from_report(&r),
                None => SolutionFile {
                    ar: Vec::new(),
                    diagnostics: Diagnostics {
                        normalized: cfg.normalize,
                        ..Diagnostics::default()
                    },
                },
            };
            solution.diagnostics.verified = false;
            solution.diagnostics.error = Some(failure_json(&error));
            (solution, exit_code(error.class()))
        }
    };
    let summary = summary_table(&solution);
    Ok(SolveOutcome {
        solution,
        code,
        summary,
    })
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "-".into(), |x| format!("{x:.3e}"))
}

/// Human-readable digest of a solution for stderr.
pub fn summary_table(s: &SolutionFile) -> String {
    let d = &s.diagnostics;
    let conds: Vec<f64> = d.path.iter().filter_map(|p| p.cond).collect();
    let cmin = conds.iter().copied().reduce(f64::min);
    let cmax = conds.iter().copied().reduce(f64::max);
    let mut out = String::new();
    let _ = writeln!(
        out,
        "  {:<16}{}",
        "status",
        if d.verified { "verified" } else { "FAILED" }
    );
    let _ = writeln!(out, "  {:<16}{}", "residual", fmt_opt(d.residual));
    let _ = writeln!(out, "  {:<16}{}", "max deviation", fmt_opt(d.max_deviation));
    let _ = writeln!(out, "  {:<16}{}", "path points", d.path.len());
    let _ = writeln!(
        out,
        "  {:<16}{} / {}",
        "cond min/max",
        fmt_opt(cmin),
        fmt_opt(cmax)
    );
    if let Some(t) = &d.existence {
        let _ = writeln!(
            out,
            "  {:<16}{}",
            "existence test",
            if t.holds { "holds" } else { "fails" }
        );
    }
    for w in &d.warnings {
        let _ = writeln!(out, "  warning: {w}");
    }
    if let Some(e) = &d.error {
        let _ = writeln!(out, "  error ({}): {}", e.class, e.message);
    }
    out
}

fn solve_file(path: &Path, flags: &SolverFlags) -> CliResult<SolveOutcome> {
    let problem: ProblemFile = read_json(path)?;
    solve_problem(&problem, flags)
}

fn cmd_solve(args: &SolveArgs) -> CliResult<u8> {
    if let Some(dir) = &args.batch {
        let out = args
            .out
            .as_deref()
            .expect("clap enforces --out with --batch");
        return solve_batch(dir, out, &args.flags);
    }
    let path = args
        .problem
        .as_deref()
        .expect("clap enforces a problem path");
    let outcome = solve_file(path, &args.flags)?;
    eprint!("{}", outcome.summary);
    emit(&to_json(&outcome.solution), args.out.as_deref())?;
    Ok(outcome.code)
}

/// Solves each problem in `dir` on a pool of threads, writing
/// `<stem>.solution.json` into `out`. Returns the worst exit code.
pub fn solve_batch(dir: &Path, out: &Path, flags: &SolverFlags) -> CliResult<u8> {
    let mut files: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| CliError::input(format!("cannot list {}: {e}", dir.display())))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    files.sort();
    fs::create_dir_all(out)
        .map_err(|e| CliError::input(format!("cannot create {}: {e}", out.display())))?;
    let workers = std::thread::available_parallelism()
        .map_or(1, |n| n.get())
        .min(files.len().max(1));
    let codes: Vec<(usize, u8, String)> = std::thread::scope(|scope| {
        let handles: Vec<_> = (0..workers)
            .map(|w| {
                let files = &files;
                scope.spawn(move || {
                    let mut done = Vec::new();
                    for (i, path) in files.iter().enumerate().skip(w).step_by(workers) {
                        let stem = path.file_stem().unwrap_or_default().to_string_lossy();
                        let target = out.join(format!("{stem}.solution.json"));
                        let (code, text) = match solve_file(path, flags) {
                            Ok(o) => match emit(&to_json(&o.solution), Some(&target)) {
                                Ok(()) => (o.code, o.summary),
                                Err(e) => (e.code, format!("  error: {e}\n")),
                            },
                            Err(e) => (e.code, format!("  error: {e}\n")),
                        };
                        done.push((i, code, text));
                    }
                    done
                })
            })
            .collect();
        let mut all: Vec<_> = handles
            .into_iter()
            .flat_map(|h| h.join().expect("batch worker panicked"))
            .collect();
        all.sort_by_key(|(i, _, _)| *i);
        all
    });
    let mut worst = EXIT_OK;
    for (i, code, text) in codes {
        eprintln!("{} (exit {code})", files[i].display());
        eprint!("{text}");
        worst = worst.max(code);
    }
    Ok(worst)
}

#[derive(Serialize)]
struct FactorOutput {
    factor: Vec<schema::MatrixJson>,
    residual: f64,
}

fn cmd_factor(args: &FactorArgs) -> CliResult<u8> {
    let file: PseudoFile = read_json(&args.input)?;
    let p = pseudo_from_json(&file.coefficients, "coefficients")?;
    let a = spectral_factor(&p, &FactorConfig::default())?;
    let residual = f_o(&a).axpy(-1.0, &p).norm() / p.norm();
    eprintln!("  residual {residual:.3e}");
    emit(
        &to_json(&FactorOutput {
            factor: poly_to_json(&a),
            residual,
        }),
        args.out.as_deref(),
    )?;
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct CovOutput {
    covariances: Vec<schema::MatrixJson>,
    /// Largest relative gap between the two oracles when both ran.
    #[serde(skip_serializing_if = "Option::is_none")]
    oracle_gap: Option<f64>,
}

fn cmd_cov(args: &CovArgs) -> CliResult<u8> {
    let file: ModelFile = read_json(&args.model)?;
    let a = poly_from_json(&file.ar, "ar")?;
    let b = match &file.ma {
        Some(seq) => poly_from_json(seq, "ma")?,
        None => MatPoly::identity(a.dim(), a.order()),
    };
    let (sigma, gap) = match args.oracle {
        OracleArg::Linear => (varma_cov_linear(&a, &b)?, None),
        OracleArg::Fft => (varma_cov_fft(&a, &b, args.grid)?, None),
        OracleArg::Both => {
            let lin = varma_cov_linear(&a, &b)?;
            let fft = varma_cov_fft(&a, &b, args.grid)?;
            let gap = varmatch::max_deviation(&fft, &lin);
            (lin, Some(gap))
        }
    };
    emit(
        &to_json(&CovOutput {
            covariances: cov_to_json(&sigma),
            oracle_gap: gap,
        }),
        args.out.as_deref(),
    )?;
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct VerifyOutput {
    pass: bool,
    max_deviation: f64,
    linear_deviation: Option<f64>,
    fft_deviation: Option<f64>,
}

fn cmd_verify(args: &VerifyArgs) -> CliResult<u8> {
    let problem: ProblemFile = read_json(&args.problem)?;
    let solution: SolutionFile = read_json(&args.solution)?;
    let data = problem.data()?;
    let a = solution.ar_poly()?;
    let (m, n) = data.shape();
    let b = match problem.ma_input()? {
        MaInput::Polynomial(b) => b,
        MaInput::Trivial => MatPoly::identity(m, n),
        MaInput::Pseudo(p) => spectral_factor(&p, &FactorConfig::default())?,
    };
    let cfg = CovOracleConfig {
        method: args.oracle.into(),
        fft_grid: args.grid,
        tol: args.tol,
    };
    let v = verify_match(&a, &b, &data, &cfg)?;
    eprintln!(
        "  {} (max deviation {:.3e})",
        if v.pass { "match" } else { "MISMATCH" },
        v.max_deviation
    );
    emit(
        &to_json(&VerifyOutput {
            pass: v.pass,
            max_deviation: v.max_deviation,
            linear_deviation: v.linear_deviation,
            fft_deviation: v.fft_deviation,
        }),
        args.out.as_deref(),
    )?;
    Ok(if v.pass { EXIT_OK } else { EXIT_VERIFICATION })
}

pub fn generate_problem(args: &GenerateArgs) -> CliResult<ProblemFile> {
    let cfg = GenConfig {
        target_margin: args.margin,
        coeff_scale: args.scale,
        min_det_pn: args.min_det,
        trivial_ma: args.trivial_ma,
        ..GenConfig::new(args.seed, args.m, args.n)
    };
    let g = random_problem(&cfg)?;
    Ok(ProblemFile {
        m: args.m,
        n: args.n,
        covariances: cov_to_json(&g.data),
        ma: if args.trivial_ma {
            MaJson::Trivial
        } else {
            MaJson::Polynomial {
                coefficients: poly_to_json(&g.b),
            }
        },
        options: None,
        reference_ar: Some(poly_to_json(&g.a_star)),
    })
}

fn cmd_generate(args: &GenerateArgs) -> CliResult<u8> {
    emit(&to_json(&generate_problem(args)?), args.out.as_deref())?;
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct JacobianCheckOutput {
    max_deviation: f64,
    tolerance: f64,
    pass: bool,
}

fn cmd_jacobian_check(args: &JacobianCheckArgs) -> CliResult<u8> {
    let file: JacobianCheckFile = read_json(&args.input)?;
    let a = poly_from_json(&file.ar, "ar")?;
    let data = cov_from_json(&file.covariances, "covariances")?;
    let dev = jacobian_fd_deviation(&a, &data)?;
    let pass = dev <= JACOBIAN_CHECK_TOL;
    eprintln!("  max relative deviation {dev:.3e}");
    emit(
        &to_json(&JacobianCheckOutput {
            max_deviation: dev,
            tolerance: JACOBIAN_CHECK_TOL,
            pass,
        }),
        args.out.as_deref(),
    )?;
    Ok(if pass { EXIT_OK } else { EXIT_VERIFICATION })
}

/// Runs one parsed invocation and returns the process exit code.
pub fn run(cli: &Cli) -> u8 {
    let result = match &cli.command {
        Command::Solve(a) => cmd_solve(a),
        Command::Factor(a) => cmd_factor(a),
        Command::Cov(a) => cmd_cov(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Generate(a) => cmd_generate(a),
        Command::JacobianCheck(a) => cmd_jacobian_check(a),
    };
    result.unwrap_or_else(|e| {
        eprintln!("error: {e}");
        e.code
    })
}
