use num_bigint::BigInt;
use num_traits::{One, Zero};
use proptest::prelude::*;

use wmm_core::central::{
    ae_binomial_sample, noncommutative_binomial_sample, q_bracket, q_bracket_pair, relative_error,
    XiTable,
};
use wmm_core::combinatorics::{
    binomial_q, complete_bell_explicit, complete_bell_recursive, compositions,
    enumerate_permutations, factorial,
};
use wmm_core::inequalities::{
    check_central_estimates, loewner_leq, NamedContext, Verdict, DEFAULT_TOL,
};
use wmm_core::moments::{matrix_power_moment, norm_moment, NormMethod, PowerMethod};
use wmm_core::oracles::letac::{
    cycle_count_histogram, letac_general_q, letac_matrix, letac_trace, power_weights, GeneralQMode,
};
use wmm_core::oracles::polarization::{polarization_product, quadratic_form_moment};
use wmm_core::scalar::{int, rat};
use wmm_core::trace_algebra::{ContextOptions, CovarianceContext, TracePolynomial};
use wmm_core::{CycleDecomposition, Limits, Matrix, MomentEngine, Rational, Ring};

fn pd_from(entries: &[i64], r: usize) -> Matrix<Rational> {
    let a = Matrix::from_fn(r, r, |i, j| int(entries[i * r + j]));
    &(&a.transpose() * &a) + &Matrix::identity(r)
}

fn ctx_of(m: Matrix<Rational>) -> CovarianceContext<Rational> {
    CovarianceContext::exact(m, ContextOptions::default()).unwrap()
}

fn pd_strategy() -> impl Strategy<Value = Matrix<Rational>> {
    (1usize..=3).prop_flat_map(|r| {
        prop::collection::vec(-2i64..=2, r * r).prop_map(move |e| pd_from(&e, r))
    })
}

fn sym_from(entries: &[(i64, i64)], r: usize) -> Matrix<Rational> {
    let mut m = Matrix::zeros(r, r);
    let mut k = 0;
    for i in 0..r {
        for j in i..r {
            let (p, q) = entries[k];
            k += 1;
            m[(i, j)] = rat(p, q);
            m[(j, i)] = rat(p, q);
        }
    }
    m
}

fn sym_strategy(r: usize) -> impl Strategy<Value = Matrix<Rational>> {
    prop::collection::vec((-3i64..=3, 1i64..=3), r * (r + 1) / 2).prop_map(move |e| sym_from(&e, r))
}

fn vec_strategy(r: usize) -> impl Strategy<Value = Vec<Rational>> {
    prop::collection::vec((-3i64..=3, 1i64..=2), r)
        .prop_map(|e| e.into_iter().map(|(p, q)| rat(p, q)).collect())
}

fn small_poly() -> impl Strategy<Value = TracePolynomial> {
    prop::collection::vec((prop::collection::vec(1u32..=3, 0..3), -3i64..=3), 0..4).prop_map(
        |terms| {
            terms
                .into_iter()
                .fold(TracePolynomial::zero(), |acc, (ks, c)| {
                    let m = ks
                        .iter()
                        .fold(TracePolynomial::one(), |a, &k| &a * &TracePolynomial::t(k));
                    acc + m.scale(&int(c))
                })
        },
    )
}

/// `C(a, b)` read as the number of weak compositions of b into a − b + 1 parts.
fn stars_and_bars(a: i64, b: i64) -> Rational {
    if b < 0 || a - b + 1 < 0 {
        return Rational::zero();
    }
    int(compositions((a - b + 1) as usize, b as u32).len() as i64)
}

#[test]
fn permutation_counts_match_stirling_numbers() {
    let l = Limits::default();
    // unsigned Stirling numbers of the first kind
    let mut c = vec![vec![BigInt::one()]];
    for n in 1..=8usize {
        let prev = &c[n - 1];
        let row: Vec<BigInt> = (0..=n)
            .map(|k| {
                let a = if k < n {
                    prev[k].clone() * BigInt::from(n - 1)
                } else {
                    BigInt::zero()
                };
                let b = if k >= 1 {
                    prev[k - 1].clone()
                } else {
                    BigInt::zero()
                };
                a + b
            })
            .collect();
        c.push(row);
    }
    for (n, row) in c.iter().enumerate() {
        assert_eq!(&cycle_count_histogram(n, &l).unwrap(), row);
        assert_eq!(
            BigInt::from(enumerate_permutations(n, &l).unwrap().count()),
            factorial(n as u64)
        );
    }
}

#[test]
fn weighted_composition_count() {
    for m in 1..=6usize {
        for n in 0..=6u32 {
            let s: i64 = compositions(m, n).iter().map(|v| 1 + v[m - 1] as i64).sum();
            assert_eq!(int(s), binomial_q(n as u64 + m as u64, n as u64));
        }
    }
}

#[test]
fn pascal_lemma() {
    for n in 0..=12i64 {
        for k in 0..=n {
            let rhs = (0..=k).fold(Rational::zero(), |a, l| {
                a + int(l + 1) * stars_and_bars(n - (l + 1), k - l)
            });
            assert_eq!(binomial_q((n + 1) as u64, k as u64), rhs, "n={n} k={k}");
        }
    }
}

#[test]
fn moments_are_positive_semidefinite() {
    let l = Limits::default();
    let mut e = MomentEngine::new(l);
    let ctxs = [
        ctx_of(Matrix::diag(&[int(1), int(2), int(3)])),
        ctx_of(pd_from(&[1, -2, 0, 2, 1, 1, 0, -1, 2], 3)),
    ];
    for m in 1..=4usize {
        for w in 0..=4u32 {
            for v in compositions(m, w) {
                let poly = e.moment_recursive(&v).unwrap();
                for (_, c) in poly.coeffs() {
                    assert!(c.terms().all(|(_, q)| *q >= Rational::zero()), "v={v:?}");
                }
                for ctx in &ctxs {
                    let mf = poly.eval(ctx).unwrap().to_f64();
                    let ev = mf.sym_eigenvalues();
                    assert!(ev[0] >= -1e-9 * mf.max_abs(), "v={v:?} λmin={}", ev[0]);
                }
            }
        }
    }
}

#[test]
fn power_moment_routes_agree() {
    let l = Limits::default();
    for n in 0..=6 {
        let a = matrix_power_moment(n, PowerMethod::Recursion, &l).unwrap();
        assert_eq!(
            a,
            matrix_power_moment(n, PowerMethod::IncreasingSequences, &l).unwrap()
        );
        assert_eq!(
            a,
            matrix_power_moment(n, PowerMethod::Permutation, &l).unwrap()
        );
    }
    for n in 0..=10 {
        let a = norm_moment(n, NormMethod::Recursion, &l).unwrap();
        for m in NormMethod::ALL {
            assert_eq!(a, norm_moment(n, m, &l).unwrap(), "n={n} {m:?}");
        }
    }
}

#[test]
fn trace_formula_is_trace_of_matrix_formula() {
    let l = Limits::default();
    for m in 1..=4usize {
        for w in 0..=4u32 {
            for v in compositions(m, w) {
                assert_eq!(
                    letac_trace(&v, &l).unwrap(),
                    letac_matrix(&v, &l).unwrap().trace()
                );
            }
        }
    }
}

#[test]
fn general_weights_reproduce_power_words() {
    let l = Limits::default();
    let ctx = ctx_of(pd_from(&[1, 0, 2, -1, 1, 0, 0, 1, 1], 3));
    for m in 1..=4usize {
        for w in 0..=3u32 {
            for v in compositions(m, w) {
                let qs = power_weights(&ctx, &v).unwrap();
                let mat = letac_general_q(&ctx, &qs, GeneralQMode::Matrix, &l)
                    .unwrap()
                    .matrix()
                    .unwrap();
                assert_eq!(mat, letac_matrix(&v, &l).unwrap().eval(&ctx).unwrap());
                let tr = letac_general_q(&ctx, &qs, GeneralQMode::Trace, &l)
                    .unwrap()
                    .scalar()
                    .unwrap();
                assert_eq!(tr, letac_trace(&v, &l).unwrap().eval(&ctx).unwrap());
            }
        }
    }
}

#[test]
fn reports_are_deterministic() {
    let ctxs = vec![NamedContext::new("p", ctx_of(pd_from(&[1, 1, 0, 2], 2)))];
    let mut a = MomentEngine::new(Limits::default());
    let mut b = MomentEngine::new(Limits::default());
    let ra = check_central_estimates(&mut a, 4, &ctxs, DEFAULT_TOL).unwrap();
    let rb = check_central_estimates(&mut b, 4, &ctxs, DEFAULT_TOL).unwrap();
    assert_eq!(
        serde_json::to_string(&ra.to_json()).unwrap(),
        serde_json::to_string(&rb.to_json()).unwrap()
    );
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn bell_forms_agree(b in prop::collection::vec(-4i64..=4, 12), n in 0usize..=12) {
        let b: Vec<Rational> = b.into_iter().map(int).collect();
        prop_assert_eq!(complete_bell_recursive(&b, n), complete_bell_explicit(&b, n));
    }

    #[test]
    fn canonical_form_is_stable(perm in Just((0..7usize).collect::<Vec<_>>()).prop_shuffle()) {
        let s = CycleDecomposition::from_one_line(&perm).unwrap();
        prop_assert_eq!(&CycleDecomposition::from_cycles(7, s.cycles()).unwrap(), &s);
        prop_assert_eq!(&CycleDecomposition::from_one_line(&s.to_one_line()).unwrap(), &s);
        prop_assert_eq!(s.to_one_line(), perm);
        prop_assert_eq!(s.cycles().iter().map(Vec::len).sum::<usize>(), 7);
        for c in s.cycles() {
            prop_assert_eq!(c[0], *c.iter().max().unwrap());
        }
        let maxes: Vec<usize> = s.cycles().iter().map(|c| c[0]).collect();
        prop_assert!(maxes.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn evaluation_is_a_ring_homomorphism(
        a in small_poly(),
        b in small_poly(),
        d in prop::collection::vec((1i64..=5, 1i64..=3), 1..=3),
    ) {
        let diag: Vec<Rational> = d.into_iter().map(|(p, q)| rat(p, q)).collect();
        let ctx = ctx_of(Matrix::diag(&diag));
        let (ea, eb) = (a.eval(&ctx).unwrap(), b.eval(&ctx).unwrap());
        prop_assert_eq!((a.clone() + b.clone()).eval(&ctx).unwrap(), ea.clone() + eb.clone());
        prop_assert_eq!((&a * &b).eval(&ctx).unwrap(), ea * eb);
    }

    #[test]
    fn trace_powers_split(p in pd_strategy(), j in 0u32..=5, k in 0u32..=5) {
        let ctx = ctx_of(p);
        let prod = &*ctx.power(j).unwrap() * &*ctx.power(k).unwrap();
        prop_assert_eq!(ctx.trace_power(j + k).unwrap().into_owned(), prod.trace());
        prop_assert!(ctx.power(j + k).unwrap().is_symmetric());
    }

    #[test]
    fn xi_shift(s in prop::collection::vec((-3i64..=3, 1i64..=3), 9), n in 0usize..=7) {
        let s: Vec<Rational> = s.into_iter().map(|(p, q)| rat(p, q)).collect();
        let small = XiTable::new(&s, n).unwrap();
        let big = XiTable::new(&s, n + 1).unwrap();
        for k in 0..=n {
            for l in 0..=k {
                prop_assert_eq!(big.get(l + 1, k + 1), small.get(l, k));
            }
        }
    }

    #[test]
    fn q_bracket_recursion((q, x) in (2usize..=3).prop_flat_map(|r| (sym_strategy(r), vec_strategy(r))), n in 0usize..=6) {
        let lhs = &(&q_bracket(&q, &x, n + 1).scale(&int(2)) - &q_bracket_pair(&q, &x, n + 1, 0))
            - &q_bracket_pair(&q, &x, 0, n + 1);
        let b = q_bracket(&q, &x, n);
        let rhs = &(&q * &b) + &(&b * &q);
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn noncommutative_binomial((q, x) in (2usize..=3).prop_flat_map(|r| (sym_strategy(r), vec_strategy(r))), n in 0usize..=5) {
        let (lhs, rhs) = noncommutative_binomial_sample(&q, &x, n).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn ae_binomial_exact(p in pd_strategy(), seed in prop::collection::vec((-3i64..=3, 1i64..=2), 3), n in 0usize..=5) {
        let x: Vec<Rational> = seed[..p.rows()].iter().map(|&(a, b)| rat(a, b)).collect();
        let (lhs, rhs) = ae_binomial_sample(&p, &x, n).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn ae_binomial_float(p in pd_strategy(), x in prop::collection::vec(-1.5f64..1.5, 3), n in 0usize..=6) {
        let pf = p.to_f64();
        let x = &x[..pf.rows()];
        let (lhs, rhs) = ae_binomial_sample(&pf, x, n).unwrap();
        prop_assert!(relative_error(&lhs, &rhs) <= 1e-8);
    }

    #[test]
    fn polarization_with_equal_weights((p, q) in (2usize..=3).prop_flat_map(|r| (prop::collection::vec(-2i64..=2, r * r).prop_map(move |e| pd_from(&e, r)), sym_strategy(r))), n in 1usize..=5) {
        let ctx = ctx_of(p);
        let qs = vec![q.clone(); n];
        let want = quadratic_form_moment(&ctx, &q, n);
        prop_assert_eq!(polarization_product(&ctx, &qs).unwrap(), want.clone());
        // norm moment polynomial with t_k = tr((PQ)^k)
        let pq = ctx.matrix() * &q;
        let poly = norm_moment(n, NormMethod::Recursion, &Limits::default()).unwrap();
        let via_traces = poly.eval_with(|k| Ok(pq.pow(k as usize).trace())).unwrap();
        prop_assert_eq!(via_traces, want);
    }

    #[test]
    fn polarization_matches_permutation_oracle(
        (p, qs) in (2usize..=3).prop_flat_map(|r| (
            prop::collection::vec(-2i64..=2, r * r).prop_map(move |e| pd_from(&e, r)),
            prop::collection::vec(sym_strategy(r), 1..=3),
        ))
    ) {
        let ctx = ctx_of(p);
        let oracle = letac_general_q(&ctx, &qs, GeneralQMode::Trace, &Limits::default()).unwrap().scalar().unwrap();
        prop_assert_eq!(polarization_product(&ctx, &qs).unwrap(), oracle);
    }

    #[test]
    fn loewner_tolerance_band(eps in 1e-14f64..1e-10, d in 0.5f64..5.0) {
        let a = Matrix::diag(&[d, 1.0]);
        let b = Matrix::diag(&[d - eps, 1.0]);
        prop_assert_eq!(loewner_leq(&a, &b, DEFAULT_TOL).verdict, Verdict::PassTolerance);
        let c = Matrix::diag(&[d - 1e-6, 1.0]);
        prop_assert_eq!(loewner_leq(&a, &c, DEFAULT_TOL).verdict, Verdict::Fail);
        prop_assert_eq!(loewner_leq(&b, &a, DEFAULT_TOL).verdict, Verdict::Pass);
    }
}
