//! Permutation-sum formulas for moments: the trace formula, its matrix
//! version, and the directed-product version with arbitrary symmetric
//! weights `Q_1, …, Q_n`.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::combinatorics::{enumerate_permutations, one_line_permutations, MultiIndex};
use crate::error::{Error, Result};
use crate::limits::Limits;
use crate::matrix::Matrix;
use crate::scalar::{Rational, Scalar};
use crate::trace_algebra::{CovarianceContext, MatrixPolynomial, TraceMonomial, TracePolynomial};

/// Walks every permutation of {0..n} and reports, per permutation, the
/// list of `(cycle length + weight)` for cycles avoiding n−1, the same
/// quantity for the cycle through n−1, and the number of cycles.
fn for_each_cycle_type(
    v: &[u32],
    limits: &Limits,
    mut f: impl FnMut(&[u32], u32, usize),
) -> Result<()> {
    let n = v.len();
    let mut seen = vec![false; n];
    let mut others: Vec<u32> = Vec::with_capacity(n);
    for perm in one_line_permutations(n, limits)? {
        seen.iter_mut().for_each(|s| *s = false);
        others.clear();
        let mut last = 0;
        let mut cycles = 0;
        for start in 0..n {
            if seen[start] {
                continue;
            }
            cycles += 1;
            let mut x = start;
            let mut size = 0u32;
            let mut has_last = false;
            while !seen[x] {
                seen[x] = true;
                size += 1 + v[x];
                has_last |= x == n - 1;
                x = perm[x];
            }
            if has_last {
                last = size;
            } else {
                others.push(size);
            }
        }
        f(&others, last, cycles);
    }
    Ok(())
}

/// `tr M(v) = Σ_σ 2^{n−|σ|} ∏_{c ∈ σ} t_{|c| + v(c)}`, with `tr M(∅) = 1`.
pub fn letac_trace(v: &[u32], limits: &Limits) -> Result<TracePolynomial> {
    if v.is_empty() {
        return Ok(TracePolynomial::one());
    }
    let n = v.len();
    let mut acc: HashMap<Vec<u32>, i128> = HashMap::new();
    for_each_cycle_type(v, limits, |others, last, cycles| {
        let mut key = others.to_vec();
        key.push(last);
        key.sort_unstable();
        *acc.entry(key).or_insert(0) += 1i128 << (n - cycles);
    })?;
    let mut out = TracePolynomial::zero();
    for (k, c) in acc {
        out.add_term(
            TraceMonomial::from_indices(k),
            Rational::from_integer(BigInt::from(c)),
        );
    }
    Ok(out)
}

/// `M(v) = Σ_σ 2^{n−|σ|} ∏_{c ∌ n} t_{|c|+v(c)} · P^{|c_n| + v(c_n)}` where
/// `c_n` is the cycle through the last index.
pub fn letac_matrix(v: &[u32], limits: &Limits) -> Result<MatrixPolynomial> {
    if v.is_empty() {
        return Ok(MatrixPolynomial::p_power(0));
    }
    let n = v.len();
    let mut acc: HashMap<(u32, Vec<u32>), i128> = HashMap::new();
    for_each_cycle_type(v, limits, |others, last, cycles| {
        let mut key = others.to_vec();
        key.sort_unstable();
        *acc.entry((last, key)).or_insert(0) += 1i128 << (n - cycles);
    })?;
    let mut out = MatrixPolynomial::zero();
    let mut keys: Vec<_> = acc.into_iter().collect();
    keys.sort();
    for ((q, k), c) in keys {
        out.add_term(
            q,
            TracePolynomial::monomial(
                TraceMonomial::from_indices(k),
                Rational::from_integer(BigInt::from(c)),
            ),
        );
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GeneralQMode {
    /// `E ∏_i ⟨X, Q_i X⟩`
    Trace,
    /// `E[𝒳 Q_1 𝒳 Q_2 ⋯ 𝒳 Q_n]`
    Matrix,
}

#[derive(Clone, Debug, PartialEq)]
pub enum GeneralQValue<T> {
    Scalar(T),
    Matrix(Matrix<T>),
}

impl<T> GeneralQValue<T> {
    pub fn scalar(self) -> Option<T> {
        match self {
            GeneralQValue::Scalar(s) => Some(s),
            GeneralQValue::Matrix(_) => None,
        }
    }

    pub fn matrix(self) -> Option<Matrix<T>> {
        match self {
            GeneralQValue::Matrix(m) => Some(m),
            GeneralQValue::Scalar(_) => None,
        }
    }
}

/// Permutation sum with arbitrary symmetric weights.
///
/// Trace mode: `Σ_σ 2^{n−|σ|} ∏_c tr(∏_{i∈c} P Q_i)`, products in cycle order.
/// Matrix mode: `Σ_σ 2^{n−|σ|} ∏_{c ∌ n} tr(∏_{i∈c} P Q_i) · [(∏_{i∈c♭} P Q_i) P]_sym Q_n`
/// where `c♭` lists the cycle through the last index starting at its successor.
pub fn letac_general_q<T: Scalar>(
    ctx: &CovarianceContext<T>,
    qs: &[Matrix<T>],
    mode: GeneralQMode,
    limits: &Limits,
) -> Result<GeneralQValue<T>> {
    let r = ctx.dim();
    for q in qs {
        if q.rows() != r || q.cols() != r {
            return Err(Error::Dimension(format!(
                "weight is {}x{}, P is {r}x{r}",
                q.rows(),
                q.cols()
            )));
        }
        if !q.is_symmetric() {
            return Err(Error::NotSymmetric("weights must be symmetric".into()));
        }
    }
    let n = qs.len();
    if n == 0 {
        return Ok(match mode {
            GeneralQMode::Trace => GeneralQValue::Scalar(T::one()),
            GeneralQMode::Matrix => GeneralQValue::Matrix(Matrix::identity(r)),
        });
    }
    let p = ctx.matrix();
    let pq: Vec<Matrix<T>> = qs.iter().map(|q| p * q).collect();
    let cycle_product =
        |c: &[usize]| -> Matrix<T> { c.iter().fold(Matrix::identity(r), |acc, &i| &acc * &pq[i]) };
    let two = T::from_i64(2);
    let mut trace_total = T::zero();
    let mut matrix_total = Matrix::zeros(r, r);
    for sigma in enumerate_permutations(n, limits)? {
        let weight = (0..n - sigma.num_cycles()).fold(T::one(), |a, _| a * two.clone());
        match mode {
            GeneralQMode::Trace => {
                let prod = sigma
                    .cycles()
                    .iter()
                    .fold(T::one(), |a, c| a * cycle_product(c).trace());
                trace_total = trace_total + weight * prod;
            }
            GeneralQMode::Matrix => {
                let (_, rooted) = sigma.distinguished_cycle(n - 1)?;
                let scalar = sigma
                    .cycles()
                    .iter()
                    .filter(|c| !c.contains(&(n - 1)))
                    .fold(T::one(), |a, c| a * cycle_product(c).trace());
                let a = (&cycle_product(&rooted) * p).symmetrize();
                matrix_total = &matrix_total + &a.scale(&(weight * scalar));
            }
        }
    }
    Ok(match mode {
        GeneralQMode::Trace => GeneralQValue::Scalar(trace_total),
        GeneralQMode::Matrix => GeneralQValue::Matrix(&matrix_total * &qs[n - 1]),
    })
}

/// Word `v` turned into weights `Q_i = P^{v_i}`.
pub fn power_weights<T: Scalar>(
    ctx: &CovarianceContext<T>,
    v: &MultiIndex,
) -> Result<Vec<Matrix<T>>> {
    v.iter()
        .map(|&k| ctx.power(k).map(|m| m.into_owned()))
        .collect()
}

/// Number of permutations of {0..n} with each possible cycle count.
pub fn cycle_count_histogram(n: usize, limits: &Limits) -> Result<Vec<BigInt>> {
    let mut counts = vec![BigInt::zero(); n + 1];
    for sigma in enumerate_permutations(n, limits)? {
        counts[sigma.num_cycles()] += BigInt::one();
    }
    Ok(counts)
}
