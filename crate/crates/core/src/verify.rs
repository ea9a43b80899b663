//! Cross-checks between independent routes to the same quantities.
//!
//! Each suite counts the instances it checked and keeps the first mismatch as
//! a small reproducer.

use num_traits::One;
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::central::{
    ae_binomial_sample, central_moment, central_moment_oracle, identity_central_exact,
    identity_weighted, relative_error,
};
use crate::combinatorics::{binomial_q, compositions, extended_binomial, factorial};
use crate::error::Result;
use crate::inequalities::NamedContext;
use crate::limits::Limits;
use crate::matrix::Matrix;
use crate::moments::{matrix_power_moment, norm_moment, MomentEngine, NormMethod, PowerMethod};
use crate::oracles::laplace::{
    matrix_series_exact, matrix_series_symbolic, scalar_series_exact, scalar_series_symbolic,
};
use crate::oracles::letac::{letac_matrix, letac_trace};
use crate::scalar::{int, rat, Rational, Ring};
use crate::trace_algebra::{ContextOptions, CovarianceContext, MatrixPolynomial, TracePolynomial};

/// Seeded generator used for every random fixture.
pub fn fixture_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform integer in `[lo, hi]`.
pub fn small_int(rng: &mut ChaCha8Rng, lo: i64, hi: i64) -> i64 {
    lo + (rng.next_u64() % (hi - lo + 1) as u64) as i64
}

/// `AᵀA + I` with entries of `A` in `[-2, 2]`.
pub fn random_rational_pd(r: usize, rng: &mut ChaCha8Rng) -> Matrix<Rational> {
    let entries: Vec<Rational> = (0..r * r).map(|_| int(small_int(rng, -2, 2))).collect();
    let a = Matrix::from_fn(r, r, |i, j| entries[i * r + j].clone());
    &(&a.transpose() * &a) + &Matrix::identity(r)
}

/// Random symmetric matrix with entries `p/q`, `|p| ≤ 3`, `1 ≤ q ≤ 3`.
pub fn random_rational_symmetric(r: usize, rng: &mut ChaCha8Rng) -> Matrix<Rational> {
    let mut m = Matrix::zeros(r, r);
    for i in 0..r {
        for j in i..r {
            let x = rat(small_int(rng, -3, 3), small_int(rng, 1, 3));
            m[(i, j)] = x.clone();
            m[(j, i)] = x;
        }
    }
    m
}

pub fn random_rational_vector(r: usize, rng: &mut ChaCha8Rng) -> Vec<Rational> {
    (0..r)
        .map(|_| rat(small_int(rng, -3, 3), small_int(rng, 1, 2)))
        .collect()
}

/// Standard covariance set: `I₁, I₂, I₃, diag(1,2), diag(1,2,3)` and a seeded
/// random 3×3 `AᵀA + I`.
pub fn standard_contexts(seed: u64) -> Vec<NamedContext<Rational>> {
    let opts = ContextOptions::default();
    let mut out = Vec::new();
    for r in 1..=3 {
        out.push(NamedContext::new(
            format!("I{r}"),
            CovarianceContext::exact(Matrix::identity(r), opts).expect("identity is PD"),
        ));
    }
    for d in [&[1, 2][..], &[1, 2, 3][..]] {
        let diag: Vec<Rational> = d.iter().map(|&x| int(x)).collect();
        out.push(NamedContext::new(
            format!("diag{d:?}").replace(' ', ""),
            CovarianceContext::exact(Matrix::diag(&diag), opts).expect("positive diagonal"),
        ));
    }
    let mut rng = fixture_rng(seed);
    out.push(NamedContext::new(
        format!("random3(seed={seed})"),
        CovarianceContext::exact(random_rational_pd(3, &mut rng), opts).expect("AᵀA + I is PD"),
    ));
    out
}

#[derive(Clone, Debug)]
pub struct VerifyConfig {
    /// Longest multi-index in the oracle triangle.
    pub max_m: usize,
    /// Largest `|v|` in the oracle triangle.
    pub max_weight: u32,
    pub max_norm_n: usize,
    pub max_central_n: usize,
    pub seed: u64,
    /// Perturb one `ρ^M` coefficient; the run must then report a mismatch.
    pub corrupt: bool,
    pub limits: Limits,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            max_m: 4,
            max_weight: 4,
            max_norm_n: 10,
            max_central_n: 6,
            seed: 0,
            corrupt: false,
            limits: Limits::default(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteResult {
    pub name: String,
    pub checked: usize,
    pub failed: usize,
    pub first_failure: Option<Value>,
}

impl SuiteResult {
    fn new(name: &str) -> Self {
        SuiteResult {
            name: name.into(),
            checked: 0,
            failed: 0,
            first_failure: None,
        }
    }

    fn record(&mut self, ok: bool, reproducer: impl FnOnce() -> Value) {
        self.checked += 1;
        if !ok {
            self.failed += 1;
            if self.first_failure.is_none() {
                self.first_failure = Some(reproducer());
            }
        }
    }

    pub fn passed(&self) -> bool {
        self.failed == 0
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct VerifySummary {
    pub suites: Vec<SuiteResult>,
    pub checked: usize,
    pub failed: usize,
}

impl VerifySummary {
    pub fn passed(&self) -> bool {
        self.failed == 0
    }

    pub fn first_failure(&self) -> Option<&Value> {
        self.suites.iter().find_map(|s| s.first_failure.as_ref())
    }
}

/// `M(v)` assembled from its `ρ^M` coefficients.
fn moment_from_rho(
    engine: &mut MomentEngine,
    v: &[u32],
    corrupt: bool,
) -> Result<MatrixPolynomial> {
    let w: u32 = v.iter().sum();
    let mut out = MatrixPolynomial::zero();
    for q in 0..=v.len() + w as usize {
        let mut c = engine.rho_m(&v[..v.len() - 1], q)?;
        if corrupt && q == 0 {
            c = c + TracePolynomial::one();
        }
        out.add_term(1 + v[v.len() - 1] + q as u32, c);
    }
    Ok(out)
}

/// Recursion, `ρ^M` polynomial and permutation formula for `M(v)`, plus
/// the trace formula, on every `v` of the grid.
pub fn suite_oracle_triangle(
    engine: &mut MomentEngine,
    cfg: &VerifyConfig,
    ctxs: &[NamedContext<Rational>],
) -> Result<SuiteResult> {
    let mut s = SuiteResult::new("oracle-triangle");
    let mut corrupt = cfg.corrupt;
    for m in 1..=cfg.max_m {
        for w in 0..=cfg.max_weight {
            for v in compositions(m, w) {
                let rec = engine.moment_recursive(&v)?;
                let poly = moment_from_rho(engine, &v, corrupt)?;
                corrupt = false;
                let perm = letac_matrix(&v, &cfg.limits)?;
                let trace = letac_trace(&v, &cfg.limits)?;
                s.record(
                    rec.trace() == trace,
                    || json!({"v": v, "methods": ["recursion", "trace-formula"]}),
                );
                for nc in ctxs {
                    let a = rec.eval(&nc.ctx)?;
                    let b = poly.eval(&nc.ctx)?;
                    let c = perm.eval(&nc.ctx)?;
                    s.record(
                        a == b,
                        || json!({"v": v, "P": nc.name, "methods": ["recursion", "polynomial"]}),
                    );
                    s.record(
                        a == c,
                        || json!({"v": v, "P": nc.name, "methods": ["recursion", "permutation"]}),
                    );
                }
            }
        }
    }
    Ok(s)
}

/// Five routes to `E⟨X,X⟩^n`.
pub fn suite_norm_moments(cfg: &VerifyConfig) -> Result<SuiteResult> {
    let mut s = SuiteResult::new("norm-moments");
    let others = [
        NormMethod::Permutation,
        NormMethod::Bell,
        NormMethod::BellExplicit,
        NormMethod::IncreasingSequences,
    ];
    for n in 0..=cfg.max_norm_n {
        let base = norm_moment(n, NormMethod::Recursion, &cfg.limits)?;
        for m in others {
            if m == NormMethod::Permutation && n > cfg.limits.max_perm_n {
                continue;
            }
            let other = norm_moment(n, m, &cfg.limits)?;
            s.record(
                base == other,
                || json!({"n": n, "methods": ["recursion", format!("{m:?}")]}),
            );
        }
    }
    for n in 0..=cfg.max_norm_n.min(8) {
        let a = matrix_power_moment(n, PowerMethod::Recursion, &cfg.limits)?;
        for m in [PowerMethod::IncreasingSequences, PowerMethod::Permutation] {
            let b = matrix_power_moment(n, m, &cfg.limits)?;
            s.record(
                a == b,
                || json!({"n": n, "methods": ["power recursion", format!("{m:?}")]}),
            );
        }
    }
    Ok(s)
}

/// Binomial expansion of `E[(𝒳 − P)^n]` against the word expansion.
pub fn suite_central(
    engine: &mut MomentEngine,
    cfg: &VerifyConfig,
    ctxs: &[NamedContext<Rational>],
) -> Result<SuiteResult> {
    let mut s = SuiteResult::new("central");
    for n in 0..=cfg.max_central_n {
        let a = central_moment(engine, n)?;
        let b = central_moment_oracle(n, &cfg.limits)?;
        s.record(a == b, || json!({"n": n, "methods": ["binomial", "words"]}));
        for nc in ctxs {
            let ok = a.eval(&nc.ctx)? == b.eval(&nc.ctx)?;
            s.record(
                ok,
                || json!({"n": n, "P": nc.name, "methods": ["binomial", "words"]}),
            );
        }
    }
    Ok(s)
}

/// Per-sample expansion of `(xxᵀ − P)^n`: exact on rational pairs, relative
/// error at most `1e-8` on float pairs.
pub fn suite_ae_binomial(
    cfg: &VerifyConfig,
    exact_pairs: usize,
    float_pairs: usize,
) -> Result<SuiteResult> {
    let mut s = SuiteResult::new("ae-binomial");
    let mut rng = fixture_rng(cfg.seed ^ 0xae);
    for i in 0..exact_pairs {
        let r = 2 + i % 2;
        let p = random_rational_pd(r, &mut rng);
        let x = random_rational_vector(r, &mut rng);
        for n in 0..=5 {
            let (lhs, rhs) = ae_binomial_sample(&p, &x, n)?;
            s.record(
                lhs == rhs,
                || json!({"pair": i, "n": n, "r": r, "kind": "exact"}),
            );
        }
    }
    for i in 0..float_pairs {
        let r = 2 + i % 3;
        let p = random_rational_pd(r, &mut rng).to_f64().scale(&0.25);
        let x: Vec<f64> = (0..r)
            .map(|_| (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0)
            .collect();
        for n in 0..=6 {
            let (lhs, rhs) = ae_binomial_sample(&p, &x, n)?;
            let err = relative_error(&lhs, &rhs);
            s.record(
                err <= 1e-8,
                || json!({"pair": i, "n": n, "r": r, "kind": "float", "error": err}),
            );
        }
    }
    Ok(s)
}

/// Laplace-transform series against the moment recursions.
pub fn suite_bell_laplace(
    cfg: &VerifyConfig,
    ctxs: &[NamedContext<Rational>],
) -> Result<SuiteResult> {
    let mut s = SuiteResult::new("bell-laplace");
    let scalar = scalar_series_symbolic(10);
    for (n, c) in scalar.iter().enumerate() {
        let e = norm_moment(n, NormMethod::Recursion, &cfg.limits)?;
        let scaled = e.scale(&(Rational::one() / Rational::from_integer(factorial(n as u64))));
        s.record(*c == scaled, || json!({"n": n, "series": "scalar"}));
    }
    let matrix = matrix_series_symbolic(8);
    let mut powers = Vec::new();
    for (n, c) in matrix.iter().enumerate() {
        let e = matrix_power_moment(n + 1, PowerMethod::Recursion, &cfg.limits)?;
        let scaled =
            e.scale_rational(&(Rational::one() / Rational::from_integer(factorial(n as u64))));
        s.record(*c == scaled, || json!({"n": n, "series": "matrix"}));
        powers.push(scaled);
    }
    for nc in ctxs {
        for (n, c) in scalar_series_exact(&nc.ctx, 10).iter().enumerate() {
            s.record(
                *c == scalar[n].eval(&nc.ctx)?,
                || json!({"n": n, "P": nc.name, "series": "det"}),
            );
        }
        for (n, c) in matrix_series_exact(&nc.ctx, 8)?.iter().enumerate() {
            s.record(
                *c == powers[n].eval(&nc.ctx)?,
                || json!({"n": n, "P": nc.name, "series": "det matrix"}),
            );
        }
    }
    Ok(s)
}

/// Combinatorial identities and the identity-covariance closed forms.
pub fn suite_identities(engine: &mut MomentEngine, cfg: &VerifyConfig) -> Result<SuiteResult> {
    let mut s = SuiteResult::new("identities");
    for m in 1..=5usize {
        for n in 0..=5usize {
            let count = compositions(m, n as u32).len();
            s.record(
                int(count as i64) == binomial_q((n + m - 1) as u64, n as u64),
                || json!({"m": m, "n": n, "identity": "composition count"}),
            );
            let ones = vec![Rational::one(); n + 1];
            s.record(
                extended_binomial(&ones, m, n) == binomial_q((n + m - 1) as u64, n as u64),
                || json!({"m": m, "n": n, "identity": "extended binomial"}),
            );
        }
    }
    for r in [1usize, 2, 3, 5] {
        let ctx = CovarianceContext::exact(Matrix::identity(r), ContextOptions::default())?;
        for total in 0..=6usize {
            for m in 1..=total {
                let n = total - m;
                let w = engine.w(m, n as u32)?.eval(&ctx)?;
                let want = Matrix::identity(r).scale(&identity_weighted(r, m, n));
                s.record(
                    w == want,
                    || json!({"r": r, "m": m, "n": n, "identity": "weighted at I"}),
                );
            }
        }
        for n in 0..=8usize.min(cfg.limits.max_symbolic_degree) {
            let c = central_moment(engine, n)?.eval(&ctx)?;
            let want = Matrix::identity(r).scale(&identity_central_exact(r, n));
            s.record(
                c == want,
                || json!({"r": r, "n": n, "identity": "central at I"}),
            );
        }
    }
    Ok(s)
}

/// Runs every suite on the standard covariance set.
pub fn run_verify(cfg: &VerifyConfig) -> Result<VerifySummary> {
    let ctxs = standard_contexts(cfg.seed);
    let mut engine = MomentEngine::new(cfg.limits);
    let mut suites = vec![suite_oracle_triangle(&mut engine, cfg, &ctxs)?];
    if cfg.max_m > 1 {
        suites.push(suite_norm_moments(cfg)?);
        suites.push(suite_central(&mut engine, cfg, &ctxs)?);
        suites.push(suite_ae_binomial(cfg, 25, 100)?);
        suites.push(suite_bell_laplace(cfg, &ctxs)?);
        suites.push(suite_identities(&mut engine, cfg)?);
    }
    let checked = suites.iter().map(|s| s.checked).sum();
    let failed = suites.iter().map(|s| s.failed).sum();
    Ok(VerifySummary {
        suites,
        checked,
        failed,
    })
}
