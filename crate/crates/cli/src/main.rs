use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use wmm_core::central::{central_moment, central_moment_oracle};
use wmm_core::combinatorics::{compositions, factorial};
use wmm_core::inequalities::{
    check_central_estimates, check_identity_covariance, check_laplace_estimates, check_lower_bound,
    check_monotonicity, check_power_bounds, check_tau_varpi, CheckReport, NamedContext, Verdict,
};
use wmm_core::moments::{norm_moment, NormMethod};
use wmm_core::oracles::letac::letac_matrix;
use wmm_core::oracles::monte_carlo::{monte_carlo_moment, McConfig};
use wmm_core::scalar::{format_rational, parse_rational};
use wmm_core::trace_algebra::{ContextOptions, CovarianceContext, CovarianceInput};
use wmm_core::verify::{fixture_rng, random_rational_pd, run_verify, VerifyConfig};
use wmm_core::{Error, Limits, Matrix, MomentEngine, Rational, Ring, Scalar};

const SCHEMA_VERSION: u32 = 1;

#[derive(Parser, Debug)]
#[command(
    name = "wmm",
    version,
    about = "Exact moments of rank-one Wishart matrices"
)]
struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Output::Json)]
    output: Output,
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Arithmetic used to evaluate at the covariance.
    #[arg(long, global = true, value_enum)]
    mode: Option<Mode>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Output {
    Json,
    Pretty,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Mode {
    Exact,
    Float,
}

#[derive(Args, Debug, Clone)]
struct CovArg {
    /// Covariance: a JSON file, or builtin:I:r, builtin:diag:a,b,..., builtin:random:r.
    #[arg(long, default_value = "builtin:I:1")]
    cov: String,
    /// Seed for random covariances and Monte Carlo.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// M(v) as a polynomial in P and evaluated at the covariance.
    Moment {
        #[command(flatten)]
        cov: CovArg,
        /// Multi-index, comma separated.
        #[arg(long, value_delimiter = ',', required = true)]
        v: Vec<u32>,
        /// Also compute M(v) by the permutation formula and compare.
        #[arg(long)]
        oracle: bool,
    },
    /// Central moment E[(𝒳 − P)^n].
    Central {
        #[command(flatten)]
        cov: CovArg,
        #[arg(long)]
        n: usize,
        /// Also expand over the 2^n words and compare.
        #[arg(long)]
        oracle: bool,
    },
    /// Weighted moments W(m,n), T(m,n) and their traces.
    Weighted {
        #[command(flatten)]
        cov: CovArg,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        n: u32,
    },
    /// Run the cross-check suites.
    Verify {
        #[arg(long, default_value_t = 4)]
        max_m: usize,
        /// Largest weight |v| in the moment grid.
        #[arg(long, default_value_t = 4)]
        max_n: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Perturb one polynomial coefficient; the run must fail.
        #[arg(long)]
        selftest_corrupt: bool,
    },
    /// Monte Carlo estimate of M(v).
    Mc {
        #[command(flatten)]
        cov: CovArg,
        #[arg(long, value_delimiter = ',', required = true)]
        v: Vec<u32>,
        #[arg(long, default_value_t = 100_000)]
        samples: u64,
        /// Blocks per worker task; does not change the result.
        #[arg(long, default_value_t = 4)]
        batch: usize,
    },
    /// Check the moment inequalities on a grid.
    Inequalities {
        #[command(flatten)]
        cov: CovArg,
        #[arg(long, value_enum, default_value_t = Suite::All)]
        suite: Suite,
        #[arg(long, default_value_t = 2)]
        max_m: usize,
        #[arg(long, default_value_t = 2)]
        max_n: u32,
        /// Relative tolerance for float Loewner checks.
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        /// Laplace parameter; defaults to 1/(4 tr P).
        #[arg(long)]
        t: Option<String>,
    },
    /// E⟨X,X⟩^n through complete Bell polynomials.
    Bell {
        #[command(flatten)]
        cov: CovArg,
        #[arg(long)]
        n: usize,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Suite {
    Monotonicity,
    TauVarpi,
    LowerBound,
    Central,
    IdentityCov,
    PowerBounds,
    Laplace,
    All,
}

impl Suite {
    fn name(self) -> &'static str {
        match self {
            Suite::Monotonicity => "monotonicity",
            Suite::TauVarpi => "tau-varpi",
            Suite::LowerBound => "lower-bound",
            Suite::Central => "central",
            Suite::IdentityCov => "identity-cov",
            Suite::PowerBounds => "power-bounds",
            Suite::Laplace => "laplace",
            Suite::All => "all",
        }
    }
}

/// Failure of a command, mapped to an exit status.
enum Failure {
    Core(Error),
    Usage(String),
    /// Verification found a mismatch; the report has been printed.
    Mismatch,
    /// An oracle disagreed with the main route; the report has been printed.
    Oracle,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

type CmdResult = Result<(), Failure>;

enum Cov {
    Exact(CovarianceContext<Rational>),
    Float(CovarianceContext<f64>),
}

fn load_cov(arg: &CovArg, mode: Mode) -> Result<Cov, Failure> {
    let opts = ContextOptions::default();
    let spec = arg.cov.strip_prefix("builtin:");
    let matrix: CovarianceInput = match spec {
        Some(b) => {
            let (kind, rest) = b.split_once(':').unwrap_or((b, ""));
            match kind {
                "I" => {
                    let r: usize = rest
                        .parse()
                        .map_err(|_| Failure::Usage(format!("bad dimension {rest:?}")))?;
                    if r == 0 {
                        return Err(Failure::Usage("dimension must be positive".into()));
                    }
                    CovarianceInput::Exact(Matrix::identity(r))
                }
                "diag" => {
                    let d: Vec<Rational> = rest
                        .split(',')
                        .map(|x| parse_rational(x.trim()))
                        .collect::<wmm_core::Result<_>>()?;
                    CovarianceInput::Exact(Matrix::diag(&d))
                }
                "random" => {
                    let r: usize = rest
                        .parse()
                        .map_err(|_| Failure::Usage(format!("bad dimension {rest:?}")))?;
                    if r == 0 {
                        return Err(Failure::Usage("dimension must be positive".into()));
                    }
                    CovarianceInput::Exact(random_rational_pd(r, &mut fixture_rng(arg.seed)))
                }
                other => {
                    return Err(Failure::Usage(format!(
                        "unknown builtin covariance {other:?}"
                    )))
                }
            }
        }
        None => {
            let path = PathBuf::from(&arg.cov);
            let text = std::fs::read_to_string(&path)
                .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))?;
            let v: Value = serde_json::from_str(&text)
                .map_err(|e| Failure::Core(Error::Parse(e.to_string())))?;
            CovarianceInput::from_json(&v)?
        }
    };
    Ok(match (matrix, mode) {
        (CovarianceInput::Exact(m), Mode::Exact) => Cov::Exact(CovarianceContext::exact(m, opts)?),
        (CovarianceInput::Exact(m), Mode::Float) => {
            Cov::Float(CovarianceContext::float(m.to_f64(), opts)?)
        }
        (CovarianceInput::Float(m), Mode::Float) => Cov::Float(CovarianceContext::float(m, opts)?),
        (CovarianceInput::Float(_), Mode::Exact) => {
            return Err(Failure::Usage(
                "float covariance file cannot be used in exact mode".into(),
            ))
        }
    })
}

fn scalar_json<T: Scalar>(x: &T) -> Value {
    match x.to_rational() {
        Some(q) => Value::String(format_rational(&q)),
        None => json!(x.to_f64()),
    }
}

fn matrix_json<T: Scalar>(m: &Matrix<T>) -> Value {
    Value::Array(
        m.to_rows()
            .iter()
            .map(|row| Value::Array(row.iter().map(scalar_json).collect()))
            .collect(),
    )
}

fn cov_params(arg: &CovArg, mode: Mode) -> Value {
    json!({"cov": arg.cov, "seed": arg.seed, "mode": match mode { Mode::Exact => "exact", Mode::Float => "float" }})
}

fn emit(output: Output, command: &str, params: Value, result: Value) {
    let doc = json!({
        "schema": format!("wmm.{command}.v{SCHEMA_VERSION}"),
        "version": env!("CARGO_PKG_VERSION"),
        "params": params,
        "result": result,
    });
    let text = match output {
        Output::Json => serde_json::to_string(&doc),
        Output::Pretty => serde_json::to_string_pretty(&doc),
    }
    .expect("JSON values serialize");
    // a closed pipe (e.g. `| head`) is not an error worth reporting
    let _ = writeln!(std::io::stdout().lock(), "{text}");
}

macro_rules! with_cov {
    ($cov:expr, |$ctx:ident| $body:expr) => {
        match $cov {
            Cov::Exact(ref $ctx) => $body,
            Cov::Float(ref $ctx) => $body,
        }
    };
}

fn cmd_moment(cli: &Cli, cov: &CovArg, v: &[u32], oracle: bool, limits: Limits) -> CmdResult {
    let mode = cli.mode.unwrap_or(Mode::Exact);
    let ctx = load_cov(cov, mode)?;
    let mut engine = MomentEngine::new(limits);
    let poly = engine.moment_recursive(v)?;
    let value = with_cov!(ctx, |c| matrix_json(&poly.eval(c)?));
    let mut result = json!({"polynomial": poly.to_json(), "value": value});
    let mut mismatch = false;
    if oracle {
        let perm = letac_matrix(v, &limits)?;
        let ok = perm == poly;
        mismatch = !ok;
        result["oracle"] =
            json!({"method": "permutation", "match": ok, "polynomial": perm.to_json()});
    }
    let mut params = cov_params(cov, mode);
    params["v"] = json!(v);
    params["oracle"] = json!(oracle);
    emit(cli.output, "moment", params, result);
    if mismatch {
        return Err(Failure::Oracle);
    }
    Ok(())
}

fn cmd_central(cli: &Cli, cov: &CovArg, n: usize, oracle: bool, limits: Limits) -> CmdResult {
    let mode = cli.mode.unwrap_or(Mode::Exact);
    let ctx = load_cov(cov, mode)?;
    let mut engine = MomentEngine::new(limits);
    let poly = central_moment(&mut engine, n)?;
    let value = with_cov!(ctx, |c| matrix_json(&poly.eval(c)?));
    let mut result = json!({"polynomial": poly.to_json(), "value": value});
    let mut mismatch = false;
    if oracle {
        let words = central_moment_oracle(n, &limits)?;
        let ok = words == poly;
        mismatch = !ok;
        result["oracle"] = json!({"method": "words", "match": ok});
    }
    let mut params = cov_params(cov, mode);
    params["n"] = json!(n);
    params["oracle"] = json!(oracle);
    emit(cli.output, "central", params, result);
    if mismatch {
        return Err(Failure::Oracle);
    }
    Ok(())
}

fn cmd_weighted(cli: &Cli, cov: &CovArg, m: usize, n: u32, limits: Limits) -> CmdResult {
    let mode = cli.mode.unwrap_or(Mode::Exact);
    let ctx = load_cov(cov, mode)?;
    let mut engine = MomentEngine::new(limits);
    if m == 0 {
        return Err(Failure::Usage("need m ≥ 1".into()));
    }
    let agg = engine.aggregate(m, n)?;
    let rho = engine.rho_w_all(m - 1, n)?;
    let result = with_cov!(ctx, |c| json!({
        "W": {"polynomial": agg.w.to_json(), "value": matrix_json(&agg.w.eval(c)?)},
        "T": {"polynomial": agg.t.to_json(), "value": matrix_json(&agg.t.eval(c)?)},
        "tau": {"polynomial": agg.tau.to_json(), "value": scalar_json(&agg.tau.eval(c)?)},
        "varpi": {"polynomial": agg.varpi.to_json(), "value": scalar_json(&agg.varpi.eval(c)?)},
        "rho_W": rho.iter().map(|p| Ok(scalar_json(&p.eval(c)?))).collect::<wmm_core::Result<Vec<_>>>()?,
    }));
    let mut params = cov_params(cov, mode);
    params["m"] = json!(m);
    params["n"] = json!(n);
    emit(cli.output, "weighted", params, result);
    Ok(())
}

fn cmd_verify(
    cli: &Cli,
    max_m: usize,
    max_n: u32,
    seed: u64,
    corrupt: bool,
    limits: Limits,
) -> CmdResult {
    let cfg = VerifyConfig {
        max_m,
        max_weight: max_n,
        seed,
        corrupt,
        limits,
        ..Default::default()
    };
    let summary = run_verify(&cfg)?;
    let params = json!({"max_m": max_m, "max_n": max_n, "seed": seed, "selftest_corrupt": corrupt});
    let result = json!({
        "passed": summary.passed(),
        "checked": summary.checked,
        "failed": summary.failed,
        "suites": summary.suites,
        "first_failure": summary.first_failure(),
    });
    emit(cli.output, "verify", params, result);
    if !summary.passed() {
        return Err(Failure::Mismatch);
    }
    Ok(())
}

fn cmd_mc(
    cli: &Cli,
    cov: &CovArg,
    v: &[u32],
    samples: u64,
    batch: usize,
    limits: Limits,
) -> CmdResult {
    let mode = cli.mode.unwrap_or(Mode::Float);
    if mode == Mode::Exact {
        return Err(Failure::Usage("Monte Carlo runs in float mode only".into()));
    }
    let Cov::Float(ctx) = load_cov(cov, Mode::Float)? else {
        unreachable!("float mode yields a float context")
    };
    let cfg = McConfig {
        samples,
        seed: cov.seed,
        batch,
        threads: cli.threads,
    };
    let est = monte_carlo_moment(&ctx, v, &cfg)?;
    let exact = MomentEngine::new(limits).moment_recursive(v)?.eval(&ctx)?;
    let z = Matrix::from_fn(exact.rows(), exact.cols(), |i, j| {
        let s = est.stderr[(i, j)];
        if s > 0.0 {
            (est.mean[(i, j)] - exact[(i, j)]) / s
        } else {
            0.0
        }
    });
    let mut params = cov_params(cov, mode);
    params["v"] = json!(v);
    params["samples"] = json!(samples);
    let result = json!({
        "estimate": matrix_json(&est.mean),
        "stderr": matrix_json(&est.stderr),
        "exact": matrix_json(&exact),
        "z_scores": matrix_json(&z),
        "max_abs_z": est.max_sigma(&exact),
    });
    emit(cli.output, "mc", params, result);
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn inequality_reports<T: Scalar>(
    suite: Suite,
    ctx: &CovarianceContext<T>,
    cov_name: &str,
    max_m: usize,
    max_n: u32,
    tol: f64,
    t: Option<&Rational>,
    limits: Limits,
) -> wmm_core::Result<Vec<CheckReport>> {
    let ctxs = vec![NamedContext::new(cov_name, ctx.clone())];
    let mut engine = MomentEngine::new(limits);
    let mut out = Vec::new();
    let on = |s: Suite| suite == s || suite == Suite::All;
    let degree = max_m + max_n as usize;
    if on(Suite::Monotonicity) {
        for m in 1..=max_m {
            for n in 0..=max_n {
                out.push(check_monotonicity(&mut engine, m, n, &ctxs, tol)?);
            }
        }
    }
    if on(Suite::TauVarpi) {
        for m in 1..=max_m {
            for n in 0..=max_n {
                let (stated, corrected) = check_tau_varpi(&mut engine, m, n, &ctxs, tol)?;
                out.push(stated);
                out.push(corrected);
            }
        }
    }
    if on(Suite::LowerBound) {
        for len in 2..=max_m + 1 {
            for w in 0..=max_n {
                for v in compositions(len, w) {
                    out.push(check_lower_bound(&mut engine, &v, &ctxs, tol)?);
                }
            }
        }
    }
    if on(Suite::Central) {
        for d in 1..=degree {
            out.push(check_central_estimates(&mut engine, d, &ctxs, tol)?);
        }
    }
    if on(Suite::IdentityCov) {
        for m in 1..=max_m {
            out.push(check_identity_covariance(m, ctx.dim())?);
        }
    }
    if on(Suite::PowerBounds) {
        for n in 1..=degree {
            out.push(check_power_bounds(n, &ctxs, &limits, tol)?);
        }
    }
    if on(Suite::Laplace) {
        let t = match t {
            Some(t) => t.clone(),
            None => {
                let tr = ctx.trace_power(1)?.into_owned();
                match tr.to_rational() {
                    Some(q) => {
                        Rational::from_integer(1.into()) / (q * Rational::from_integer(4.into()))
                    }
                    None => wmm_core::scalar::f64_to_rational(1.0 / (4.0 * tr.to_f64()))?,
                }
            }
        };
        out.push(check_laplace_estimates(
            &mut engine,
            &t,
            degree,
            &ctxs,
            tol,
        )?);
    }
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
fn cmd_inequalities(
    cli: &Cli,
    cov: &CovArg,
    suite: Suite,
    max_m: usize,
    max_n: u32,
    tol: f64,
    t: Option<&str>,
    limits: Limits,
) -> CmdResult {
    let mode = cli.mode.unwrap_or(Mode::Exact);
    let ctx = load_cov(cov, mode)?;
    let t = t.map(parse_rational).transpose()?;
    let reports = with_cov!(ctx, |c| inequality_reports(
        suite,
        c,
        &cov.cov,
        max_m,
        max_n,
        tol,
        t.as_ref(),
        limits
    )?);
    let failed = reports.iter().any(|r| r.verdict == Verdict::Fail);
    let mut params = cov_params(cov, mode);
    params["suite"] = json!(suite.name());
    params["max_m"] = json!(max_m);
    params["max_n"] = json!(max_n);
    params["tol"] = json!(tol);
    params["t"] = json!(t.as_ref().map(format_rational));
    let result = json!({
        "failed": failed,
        "reports": reports.iter().map(CheckReport::to_json).collect::<Vec<_>>(),
    });
    emit(cli.output, "inequalities", params, result);
    if failed {
        return Err(Failure::Mismatch);
    }
    Ok(())
}

fn cmd_bell(cli: &Cli, cov: &CovArg, n: usize, limits: Limits) -> CmdResult {
    let mode = cli.mode.unwrap_or(Mode::Exact);
    let ctx = load_cov(cov, mode)?;
    let bell = norm_moment(n, NormMethod::Bell, &limits)?;
    let rec = norm_moment(n, NormMethod::Recursion, &limits)?;
    let nf = Rational::from_integer(factorial(n as u64));
    let (value, coeff) = with_cov!(ctx, |c| {
        let v = bell.eval(c)?;
        let coeff = v.scale(&(Rational::from_integer(1.into()) / nf.clone()));
        (scalar_json(&v), scalar_json(&coeff))
    });
    let mut params = cov_params(cov, mode);
    params["n"] = json!(n);
    let result = json!({
        "polynomial": bell.to_json(),
        "value": value,
        "series_coefficient": coeff,
        "recursion_match": bell == rec,
    });
    emit(cli.output, "bell", params, result);
    if bell != rec {
        return Err(Failure::Oracle);
    }
    Ok(())
}

fn run(cli: &Cli) -> CmdResult {
    let limits = Limits::from_env()?;
    if let Some(t) = cli.threads {
        if t == 0 {
            return Err(Failure::Usage("--threads must be positive".into()));
        }
        // the global pool can only be configured once per process
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global();
    }
    match &cli.command {
        Command::Moment { cov, v, oracle } => cmd_moment(cli, cov, v, *oracle, limits),
        Command::Central { cov, n, oracle } => cmd_central(cli, cov, *n, *oracle, limits),
        Command::Weighted { cov, m, n } => cmd_weighted(cli, cov, *m, *n, limits),
        Command::Verify {
            max_m,
            max_n,
            seed,
            selftest_corrupt,
        } => cmd_verify(cli, *max_m, *max_n, *seed, *selftest_corrupt, limits),
        Command::Mc {
            cov,
            v,
            samples,
            batch,
        } => cmd_mc(cli, cov, v, *samples, *batch, limits),
        Command::Inequalities {
            cov,
            suite,
            max_m,
            max_n,
            tol,
            t,
        } => cmd_inequalities(cli, cov, *suite, *max_m, *max_n, *tol, t.as_deref(), limits),
        Command::Bell { cov, n } => cmd_bell(cli, cov, *n, limits),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Mismatch) => ExitCode::from(1),
        Err(Failure::Oracle) => ExitCode::from(4),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Core(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_cap() { 3 } else { 2 })
        }
    }
}
