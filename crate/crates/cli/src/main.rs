//! `bellmix`: entanglement reports and figure data for two-qubit Werner states.
//!
//! Exit codes: 0 success, 1 verification failure, 2 usage, 3 solver
//! non-convergence, 4 I/O.

mod output;

use std::collections::BTreeMap;
use std::f64::consts::LN_2;
use std::path::PathBuf;
use std::process::ExitCode;

use bellmix::complex_ansatz::{classify_orbits, OrbitReport};
use bellmix::eq_solver::{self, f_rho, rho_max, ExactSolution, SolverConfig};
use bellmix::oracle::{bell_mixture_eof, brute_minimize, lagrangian_dense};
use bellmix::preconcurrence::{surface_grid, WeightVector};
use bellmix::pure_state::{
    concurrence_pure, entanglement_pure, entanglement_via_reduced, reduced_density, vector_identity_residual,
    BellCoeffs,
};
use bellmix::verify::{self, Suite, VerifyConfig, VerifySummary};
use bellmix::werner::{
    e_mixed, e_pure, lagrangian, AnsatzParams, Candidate, EntanglementReport, Mode, WernerSpec,
};
use bellmix::{Complex64, Error};
use clap::{Parser, Subcommand, ValueEnum};
use nalgebra::Vector3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error as ThisError;

use output::{write_csv, write_json, Envelope, Format, Grid};

#[derive(Debug, ThisError)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("verification failed: {0}")]
    Verify(String),
    #[error("solver did not converge: {0}")]
    NonConvergence(String),
    #[error("i/o: {0}")]
    Io(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Verify(_) => 1,
            CliError::Usage(_) => 2,
            CliError::NonConvergence(_) => 3,
            CliError::Io(_) => 4,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::NoRoot { .. } | Error::NotConverged { .. } => CliError::NonConvergence(e.to_string()),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "bellmix", version, about = "Entanglement of two-qubit Bell mixtures")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Entanglement of a pure state given by its Bell-basis coefficients.
    Pure(PureArgs),
    /// Pure- or mixed-minimization entanglement of a Werner state.
    Werner(WernerArgs),
    /// Lagrangian on a parameter grid (CSV).
    ScanLagrangian(ScanLagrangianArgs),
    /// f(ρ) on a log-spaced grid (CSV).
    ScanFrho(ScanFrhoArgs),
    /// Pre-concurrence surface over (θ1, θ2) (CSV).
    #[command(alias = "preconcurrence")]
    PreconcurrenceSurface(SurfaceArgs),
    /// Roots of the ε–q stationarity system.
    SolveEq(SolveArgs),
    /// Orbit classification of the complex ansatz.
    Orbits(OrbitArgs),
    /// Invariant suites with per-invariant residual maxima.
    Verify(VerifyArgs),
}

fn parse_complex(s: &str) -> Result<[f64; 2], String> {
    let (re, im) = s.split_once(',').ok_or_else(|| format!("expected re,im but got {s:?}"))?;
    let re = re.trim().parse::<f64>().map_err(|e| format!("{re:?}: {e}"))?;
    let im = im.trim().parse::<f64>().map_err(|e| format!("{im:?}: {e}"))?;
    Ok([re, im])
}

#[derive(clap::Args, Debug, Serialize)]
struct PureArgs {
    /// Coefficient of B(0) as re,im.
    #[arg(long, value_parser = parse_complex, allow_hyphen_values = true, requires = "z", conflicts_with = "random")]
    z0: Option<[f64; 2]>,
    /// Coefficients of B(1), B(2), B(3), each as re,im.
    #[arg(long, value_parser = parse_complex, num_args = 3, allow_hyphen_values = true, requires = "z0")]
    z: Vec<[f64; 2]>,
    /// Draw the coefficients from a seeded generator instead.
    #[arg(long)]
    random: Option<u64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
enum ModeArg {
    Pure,
    Mixed,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Pure => Mode::Pure,
            ModeArg::Mixed => Mode::Mixed,
        }
    }
}

#[derive(clap::Args, Debug, Serialize)]
struct SpecArgs {
    /// Weight of B(0).
    #[arg(long, allow_hyphen_values = true)]
    m0: f64,
    /// Number of other Bell states sharing the remaining weight.
    #[arg(long)]
    dimv: usize,
    /// Size of the v-family; the default family is used if omitted.
    #[arg(long)]
    nalpha: Option<usize>,
}

impl SpecArgs {
    fn spec(&self) -> Result<WernerSpec, CliError> {
        let s = match self.nalpha {
            Some(n) => WernerSpec::with_family(self.m0, self.dimv, n)?,
            None => WernerSpec::new(self.m0, self.dimv)?,
        };
        Ok(s)
    }
}

#[derive(clap::Args, Debug, Serialize)]
struct WernerArgs {
    #[command(flatten)]
    #[serde(flatten)]
    spec: SpecArgs,
    #[arg(long, value_enum, default_value = "pure")]
    mode: ModeArg,
    /// Append brute-force oracle cross-checks.
    #[arg(long)]
    verify: bool,
}

fn parse_range(s: &str) -> Result<(f64, f64), String> {
    let [lo, hi] = parse_complex(s)?;
    if !(lo <= hi) {
        return Err(format!("range {s:?} is empty"));
    }
    Ok((lo, hi))
}

#[derive(clap::Args, Debug, Serialize)]
struct GridOut {
    /// Output file; stdout if omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

#[derive(clap::Args, Debug, Serialize)]
struct ScanLagrangianArgs {
    #[command(flatten)]
    #[serde(flatten)]
    spec: SpecArgs,
    /// Points per axis.
    #[arg(long, default_value_t = 201)]
    resolution: usize,
    /// Y range for d_v = 1, as lo,hi; defaults to [0, Y_pure].
    #[arg(long, value_parser = parse_range, allow_hyphen_values = true)]
    y_range: Option<(f64, f64)>,
    /// ε range for d_v > 1.
    #[arg(long, value_parser = parse_range, default_value = "0,1")]
    eps_range: (f64, f64),
    /// q/q_max(ε) range for d_v > 1.
    #[arg(long, value_parser = parse_range, default_value = "0,1")]
    t_range: (f64, f64),
    #[command(flatten)]
    #[serde(flatten)]
    out: GridOut,
}

#[derive(clap::Args, Debug, Serialize)]
struct ScanFrhoArgs {
    #[command(flatten)]
    #[serde(flatten)]
    spec: SpecArgs,
    #[arg(long, default_value_t = 256)]
    resolution: usize,
    /// ρ range as lo,hi with lo > 0; defaults to [1e-12, ρ_max].
    #[arg(long, value_parser = parse_range)]
    rho_range: Option<(f64, f64)>,
    #[command(flatten)]
    #[serde(flatten)]
    out: GridOut,
}

#[derive(clap::Args, Debug, Serialize)]
struct SurfaceArgs {
    /// Three weights m0,m1,m2 with m1 = m2.
    #[arg(long, value_delimiter = ',', required = true)]
    m: Vec<f64>,
    #[arg(long, default_value_t = 200)]
    resolution: usize,
    #[command(flatten)]
    #[serde(flatten)]
    out: GridOut,
}

#[derive(clap::Args, Debug, Serialize)]
struct SolveArgs {
    #[command(flatten)]
    #[serde(flatten)]
    spec: SpecArgs,
    /// Random Newton starts in addition to the seed grid.
    #[arg(long, default_value_t = 8)]
    starts: usize,
    #[arg(long, default_value_t = 0x5eed)]
    seed: u64,
}

#[derive(clap::Args, Debug, Serialize)]
struct OrbitArgs {
    #[command(flatten)]
    #[serde(flatten)]
    spec: SpecArgs,
    #[arg(long, value_enum, default_value = "pure")]
    mode: ModeArg,
}

#[derive(Clone, Copy, Debug, Serialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
enum SuiteArg {
    All,
    Algebra,
    Werner,
    Appendices,
}

#[derive(clap::Args, Debug, Serialize)]
struct VerifyArgs {
    #[arg(long, value_enum, default_value = "all")]
    suite: SuiteArg,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 200)]
    samples: usize,
}

// ---- reports ---------------------------------------------------------------

#[derive(Debug, Serialize, Deserialize)]
struct PureReport {
    z0: [f64; 2],
    z: [[f64; 2]; 3],
    /// Norm of the coefficients before normalization.
    input_norm: f64,
    concurrence: f64,
    entanglement_bits: f64,
    entanglement_via_reduced_bits: f64,
    route_residual: f64,
    vector_identity_residual: f64,
    reduced_n0: f64,
    reduced_n: [f64; 3],
}

fn cmd_pure(args: &PureArgs) -> Result<PureReport, CliError> {
    let (z0, z) = match (args.random, args.z0) {
        (Some(seed), _) => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut c = || Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            (c(), Vector3::new(c(), c(), c()))
        }
        (None, Some(z0)) if args.z.len() == 3 => {
            let c = |v: [f64; 2]| Complex64::new(v[0], v[1]);
            (c(z0), Vector3::new(c(args.z[0]), c(args.z[1]), c(args.z[2])))
        }
        _ => return Err(CliError::Usage("give --z0 with three --z values, or --random SEED".into())),
    };
    let c = BellCoeffs::new(z0, z)?;
    let e = entanglement_pure(&c).bits();
    let e_red = entanglement_via_reduced(&c).bits();
    let d = reduced_density(&c);
    let pair = |x: Complex64| [x.re, x.im];
    Ok(PureReport {
        z0: pair(c.z0()),
        z: [pair(c.z()[0]), pair(c.z()[1]), pair(c.z()[2])],
        input_norm: c.scale(),
        concurrence: concurrence_pure(&c),
        entanglement_bits: e,
        entanglement_via_reduced_bits: e_red,
        route_residual: (e - e_red).abs(),
        vector_identity_residual: vector_identity_residual(&c),
        reduced_n0: d.n0,
        reduced_n: [d.n[0], d.n[1], d.n[2]],
    })
}

#[derive(Debug, Serialize, Deserialize)]
struct OracleChecks {
    /// Dense Lagrangian at the reported parameters minus the closed form.
    lagrangian_dense_delta: f64,
    brute_q: f64,
    brute_eps: f64,
    brute_e_bits: f64,
    /// Reported E minus the brute-force minimum.
    brute_delta_bits: f64,
    /// Entanglement of formation of the Bell mixture.
    bell_mixture_eof_bits: f64,
}

#[derive(Debug, Serialize, Deserialize)]
struct WernerReport {
    mode: Mode,
    m0: f64,
    d_v: usize,
    n_alpha: usize,
    e_bits: f64,
    lagrangian: f64,
    q: f64,
    eps: f64,
    /// Diagonal of Δ in the Bell basis; absent on the Y = ½ boundary.
    delta_diagonal: Option<[f64; 4]>,
    residuals: BTreeMap<String, f64>,
    converged: bool,
    boundary: bool,
    /// Pure-min entanglement for comparison in mixed mode.
    e_pure_bits: Option<f64>,
    candidates: Vec<Candidate>,
    oracle: Option<OracleChecks>,
}

fn werner_report(spec: &WernerSpec, r: &EntanglementReport, mode: Mode) -> WernerReport {
    WernerReport {
        mode,
        m0: spec.m0(),
        d_v: spec.d_v(),
        n_alpha: spec.n_alpha(),
        e_bits: r.e.bits(),
        lagrangian: lagrangian(spec, &r.params),
        q: r.params.q,
        eps: r.params.eps,
        delta_diagonal: r.delta.as_ref().map(|d| {
            let m = d.entries();
            [m[(0, 0)].re, m[(1, 1)].re, m[(2, 2)].re, m[(3, 3)].re]
        }),
        residuals: r.residuals.clone(),
        converged: r.converged,
        boundary: r.boundary,
        e_pure_bits: None,
        candidates: r.candidates.clone(),
        oracle: None,
    }
}

fn oracle_checks(spec: &WernerSpec, p: &AnsatzParams, e_bits: f64) -> Result<OracleChecks, CliError> {
    let dense = lagrangian_dense(spec, p)?;
    let b = brute_minimize(spec)?;
    let brute_e = b.lagrangian / (2.0 * LN_2);
    let mut w = spec.weights();
    w.sort_by(|a, b| b.total_cmp(a));
    Ok(OracleChecks {
        lagrangian_dense_delta: dense - lagrangian(spec, p),
        brute_q: b.q,
        brute_eps: b.eps,
        brute_e_bits: brute_e,
        brute_delta_bits: e_bits - brute_e,
        bell_mixture_eof_bits: bell_mixture_eof(&w)?,
    })
}

fn cmd_werner(args: &WernerArgs) -> Result<WernerReport, CliError> {
    let spec = args.spec.spec()?;
    let mode = Mode::from(args.mode);
    let r = match mode {
        Mode::Pure => e_pure(&spec),
        Mode::Mixed => e_mixed(&spec)?,
    };
    let mut report = werner_report(&spec, &r, mode);
    if mode == Mode::Mixed {
        report.e_pure_bits = Some(e_pure(&spec).e.bits());
    }
    if args.verify {
        report.oracle = Some(oracle_checks(&spec, &r.params, r.e.bits())?);
    }
    Ok(report)
}

#[derive(Debug, Serialize, Deserialize)]
struct ScanPayload {
    grid: Grid,
    /// Row with the smallest value in the last column.
    argmin: Option<Vec<f64>>,
    /// Number of sign changes of the last column along the grid.
    sign_changes: usize,
}

fn axis(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let n = n.max(2);
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

fn cmd_scan_lagrangian(args: &ScanLagrangianArgs) -> Result<Grid, CliError> {
    let spec = args.spec.spec()?;
    if spec.d_v() == 1 {
        let (lo, hi) = args.y_range.unwrap_or((0.0, spec.y_pure()));
        if lo < 0.0 || hi > spec.y_pure() + 1e-15 {
            return Err(CliError::Usage(format!("Y range must lie in [0, {}]", spec.y_pure())));
        }
        let mut g = Grid::new(&["y", "lagrangian"]);
        for y in axis(lo, hi.min(spec.y_pure()), args.resolution) {
            g.push(vec![y, lagrangian(&spec, &AnsatzParams::unchecked(&spec, y, 0.0))]);
        }
        return Ok(g);
    }
    let ((e0, e1), (t0, t1)) = (args.eps_range, args.t_range);
    if e0 < 0.0 || t0 < 0.0 || t1 > 1.0 {
        return Err(CliError::Usage("need eps >= 0 and q/q_max in [0, 1]".into()));
    }
    let mut g = Grid::new(&["eps", "q", "lagrangian"]);
    for eps in axis(e0, e1, args.resolution) {
        for t in axis(t0, t1, args.resolution) {
            let q = t * spec.q_max(eps);
            g.push(vec![eps, q, lagrangian(&spec, &AnsatzParams::unchecked(&spec, q, eps))]);
        }
    }
    Ok(g)
}

fn cmd_scan_frho(args: &ScanFrhoArgs) -> Result<Grid, CliError> {
    let spec = args.spec.spec()?;
    if spec.d_v() < 2 {
        return Err(CliError::Usage("f(rho) is defined for d_v > 1".into()));
    }
    let (lo, hi) = args.rho_range.unwrap_or((1e-12, rho_max(&spec)));
    if lo <= 0.0 {
        return Err(CliError::Usage("rho range must be positive".into()));
    }
    let mut g = Grid::new(&["rho", "f"]);
    for x in axis(lo.ln(), hi.ln(), args.resolution) {
        let rho = x.exp();
        g.push(vec![rho, f_rho(&spec, rho)]);
    }
    Ok(g)
}

fn cmd_surface(args: &SurfaceArgs) -> Result<Grid, CliError> {
    let m = WeightVector::new(args.m.clone())?;
    let s = surface_grid(&m, args.resolution)?;
    let mut g = Grid::new(&["theta1", "theta2", "c"]);
    for (i, t1) in s.theta1.iter().enumerate() {
        for (j, t2) in s.theta2.iter().enumerate() {
            g.push(vec![*t1, *t2, s.values[i][j]]);
        }
    }
    Ok(g)
}

fn emit_grid(command: &str, args: &impl Serialize, out: &GridOut, grid: Grid) -> Result<(), CliError> {
    match out.format {
        Format::Csv => write_csv(&grid, out.out.as_deref()),
        Format::Json => {
            let last = grid.columns.len() - 1;
            let argmin = grid.argmin(last).map(|r| r.to_vec());
            let sign_changes = grid.rows.windows(2).filter(|w| w[0][last] * w[1][last] < 0.0).count();
            let payload = ScanPayload { grid, argmin, sign_changes };
            write_json(&Envelope::new(command, args, payload), out.out.as_deref())
        }
    }
}

fn cmd_solve(args: &SolveArgs) -> Result<ExactSolution, CliError> {
    let spec = args.spec.spec()?;
    let cfg = SolverConfig {
        random_starts: args.starts,
        seed: args.seed,
        ..SolverConfig::default()
    };
    Ok(eq_solver::solve_exact_with(&spec, &cfg)?)
}

fn cmd_orbits(args: &OrbitArgs) -> Result<Vec<OrbitReport>, CliError> {
    let spec = args.spec.spec()?;
    Ok(classify_orbits(&spec, args.mode.into())?)
}

fn cmd_verify(args: &VerifyArgs) -> VerifySummary {
    let suite = match args.suite {
        SuiteArg::All => Suite::All,
        SuiteArg::Algebra => Suite::Algebra,
        SuiteArg::Werner => Suite::Werner,
        SuiteArg::Appendices => Suite::Appendices,
    };
    verify::run(&VerifyConfig {
        suite,
        seed: args.seed,
        samples: args.samples,
    })
}

fn run(cli: Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Pure(a) => write_json(&Envelope::new("pure", a, cmd_pure(a)?), None),
        Command::Werner(a) => {
            let report = cmd_werner(a)?;
            let converged = report.converged;
            write_json(&Envelope::new("werner", a, report), None)?;
            if !converged {
                return Err(CliError::NonConvergence("stationarity residuals above tolerance".into()));
            }
            Ok(())
        }
        Command::ScanLagrangian(a) => emit_grid("scan-lagrangian", a, &a.out, cmd_scan_lagrangian(a)?),
        Command::ScanFrho(a) => emit_grid("scan-frho", a, &a.out, cmd_scan_frho(a)?),
        Command::PreconcurrenceSurface(a) => emit_grid("preconcurrence-surface", a, &a.out, cmd_surface(a)?),
        Command::SolveEq(a) => {
            let sol = cmd_solve(a)?;
            let found = !sol.roots.is_empty();
            write_json(&Envelope::new("solve-eq", a, sol), None)?;
            if !found {
                return Err(CliError::NonConvergence("no start converged to a physical root".into()));
            }
            Ok(())
        }
        Command::Orbits(a) => write_json(&Envelope::new("orbits", a, cmd_orbits(a)?), None),
        Command::Verify(a) => {
            let summary = cmd_verify(a);
            let failures = summary.failures.join(", ");
            let passed = summary.passed;
            write_json(&Envelope::new("verify", a, summary), None)?;
            if !passed {
                return Err(CliError::Verify(failures));
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("bellmix: {e}");
            ExitCode::from(e.code())
        }
    }
}
