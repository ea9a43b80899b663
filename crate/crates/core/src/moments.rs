//! Symbolic matrix product moments `M(v) = E[(𝒳P^{v_1})⋯(𝒳P^{v_m})]` of a
//! rank-one Wishart matrix `𝒳 = XXᵀ`, `X ~ N(0, P)`, as polynomials in `P`
//! whose coefficients are polynomials in the power traces.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::combinatorics::{
    binomial_q, complete_bell_explicit, complete_bell_recursive, compositions, factorial, falling,
    positive_compositions, subsets, MultiIndex,
};
use crate::error::{Error, Result};
use crate::limits::Limits;
use crate::oracles::letac::{letac_matrix, letac_trace};
use crate::scalar::{int, Rational, Ring};
use crate::trace_algebra::{MatrixPolynomial, TracePolynomial};

fn pow2(k: usize) -> Rational {
    Rational::from_integer(BigInt::one() << k)
}

fn weight(v: &[u32]) -> usize {
    v.iter().map(|&x| x as usize).sum()
}

/// `t_v(k, l)` for `0 ≤ k ≤ m`, `0 ≤ l ≤ |v|`.
#[derive(Clone, Debug, PartialEq)]
pub struct TraceArray {
    pub v: MultiIndex,
    entries: Vec<Vec<TracePolynomial>>,
}

impl TraceArray {
    pub fn get(&self, k: usize, l: usize) -> TracePolynomial {
        self.entries
            .get(k)
            .and_then(|row| row.get(l))
            .cloned()
            .unwrap_or_default()
    }
}

/// `T(m,n) = Σ_{v ∈ V_{m,n}} M(v)`, `W(m,n) = Σ (1+v_m) M(v)` and their traces.
#[derive(Clone, Debug, PartialEq)]
pub struct Aggregates {
    pub m: usize,
    pub n: u32,
    pub t: MatrixPolynomial,
    pub w: MatrixPolynomial,
    pub tau: TracePolynomial,
    pub varpi: TracePolynomial,
}

/// Memoizing engine for the symbolic moment computations.
#[derive(Debug, Default)]
pub struct MomentEngine {
    limits: Limits,
    moments: HashMap<MultiIndex, MatrixPolynomial>,
    word_traces: HashMap<MultiIndex, TracePolynomial>,
    aggregates: HashMap<(usize, u32), Aggregates>,
}

impl MomentEngine {
    pub fn new(limits: Limits) -> Self {
        MomentEngine {
            limits,
            ..Default::default()
        }
    }

    pub fn limits(&self) -> &Limits {
        &self.limits
    }

    fn check_degree(&self, m: usize, n: usize) -> Result<()> {
        Limits::check("m + |v|", m + n, self.limits.max_symbolic_degree)
    }

    /// `M(v)` through the recursion on the last letter:
    /// `M(v, p) = P^{p+1} [tr M(v) I + 2 Σ_i M(v without v_i, then v_i)]`,
    /// `M(v_1) = P^{1+v_1}`, `M(∅) = I`.
    pub fn moment_recursive(&mut self, v: &[u32]) -> Result<MatrixPolynomial> {
        self.check_degree(v.len(), weight(v))?;
        Ok(self.recurse(v))
    }

    fn recurse(&mut self, w: &[u32]) -> MatrixPolynomial {
        if let Some(m) = self.moments.get(w) {
            return m.clone();
        }
        let out = match w.len() {
            0 => MatrixPolynomial::p_power(0),
            1 => MatrixPolynomial::p_power(1 + w[0]),
            len => {
                let (v, p) = (&w[..len - 1], w[len - 1]);
                let mut inner = MatrixPolynomial::term(0, self.recurse(v).trace());
                let mut moved: MultiIndex = Vec::with_capacity(v.len());
                for i in 0..v.len() {
                    moved.clear();
                    moved.extend_from_slice(&v[..i]);
                    moved.extend_from_slice(&v[i + 1..]);
                    moved.push(v[i]);
                    let m = self.recurse(&moved);
                    inner.add_assign(&m.scale_rational(&int(2)));
                }
                inner.shift(p + 1)
            }
        };
        self.moments.insert(w.to_vec(), out.clone());
        out
    }

    /// `tr M(w)` from the permutation formula, memoized by the sorted word.
    pub fn word_trace(&mut self, w: &[u32]) -> Result<TracePolynomial> {
        let mut key = w.to_vec();
        key.sort_unstable();
        if let Some(t) = self.word_traces.get(&key) {
            return Ok(t.clone());
        }
        let t = letac_trace(&key, &self.limits)?;
        self.word_traces.insert(key, t.clone());
        Ok(t)
    }

    /// `t_v(k,l) = (m)_k^{-1} Σ_{a ∈ A_v(k,l)} t_{v_a}` where `A_v(k,l)` is the
    /// set of injections `a: [k] → [m]` with `Σ_i v_{a(i)} = l`, and `t_∅ = 1`.
    /// The sum runs over k-subsets; each subset stands for k! injections.
    pub fn trace_array(&mut self, v: &[u32]) -> Result<TraceArray> {
        let m = v.len();
        let n = weight(v);
        Limits::check("injection codomain", m, self.limits.max_injection_n)?;
        let mut entries = vec![vec![TracePolynomial::zero(); n + 1]; m + 1];
        for (k, row) in entries.iter_mut().enumerate() {
            let norm = binomial_q(m as u64, k as u64);
            let mut sums = vec![TracePolynomial::zero(); n + 1];
            for s in subsets(m, k) {
                let w: MultiIndex = s.iter().map(|&i| v[i]).collect();
                let l = weight(&w);
                let t = self.word_trace(&w)?;
                sums[l] = std::mem::take(&mut sums[l]) + t;
            }
            for (l, s) in sums.into_iter().enumerate() {
                row[l] = s.scale(&(Rational::one() / norm.clone()));
            }
        }
        Ok(TraceArray {
            v: v.to_vec(),
            entries,
        })
    }

    /// `ρ^M(v, q) = Σ_{k+l=q, k ≤ m, l ≤ |v|} 2^k (m)_k t_v(m−k, |v|−l)`.
    pub fn rho_m(&mut self, v: &[u32], q: usize) -> Result<TracePolynomial> {
        let arr = self.trace_array(v)?;
        Ok(rho_m_from_array(&arr, q))
    }

    /// `M(v, p) = Σ_{q=0}^{m+|v|} ρ^M(v, q) P^{1+p+q}`.
    pub fn moment_polynomial(&mut self, v: &[u32], p: u32) -> Result<MatrixPolynomial> {
        self.check_degree(v.len() + 1, weight(v) + p as usize)?;
        let arr = self.trace_array(v)?;
        let mut out = MatrixPolynomial::zero();
        for q in 0..=v.len() + weight(v) {
            out.add_term(1 + p + q as u32, rho_m_from_array(&arr, q));
        }
        Ok(out)
    }

    /// Same as [`Self::moment_polynomial`] but taking the full word.
    pub fn moment_polynomial_word(&mut self, w: &[u32]) -> Result<MatrixPolynomial> {
        match w.split_last() {
            None => Ok(MatrixPolynomial::p_power(0)),
            Some((&p, v)) => self.moment_polynomial(v, p),
        }
    }

    /// `M(v)` from the permutation formula.
    pub fn moment_permutation(&self, v: &[u32]) -> Result<MatrixPolynomial> {
        letac_matrix(v, &self.limits)
    }

    pub fn aggregate(&mut self, m: usize, n: u32) -> Result<Aggregates> {
        if m == 0 {
            return Err(Error::OutOfRange("aggregates need m ≥ 1".into()));
        }
        self.check_degree(m, n as usize)?;
        if let Some(a) = self.aggregates.get(&(m, n)) {
            return Ok(a.clone());
        }
        let mut t = MatrixPolynomial::zero();
        let mut w = MatrixPolynomial::zero();
        for v in compositions(m, n) {
            let mv = self.recurse(&v);
            w.add_assign(&mv.scale_rational(&int(1 + v[m - 1] as i64)));
            t.add_assign(&mv);
        }
        let a = Aggregates {
            m,
            n,
            tau: t.trace(),
            varpi: w.trace(),
            t,
            w,
        };
        self.aggregates.insert((m, n), a.clone());
        Ok(a)
    }

    /// `τ(m,n)`, with `τ(0,n) = 1_{n=0}`.
    pub fn tau(&mut self, m: usize, n: u32) -> Result<TracePolynomial> {
        if m == 0 {
            return Ok(if n == 0 {
                TracePolynomial::one()
            } else {
                TracePolynomial::zero()
            });
        }
        Ok(self.aggregate(m, n)?.tau)
    }

    pub fn varpi(&mut self, m: usize, n: u32) -> Result<TracePolynomial> {
        Ok(self.aggregate(m, n)?.varpi)
    }

    /// `W(m,n)`; `W(0,0) = I` and `W(0,n) = 0` otherwise.
    pub fn w(&mut self, m: usize, n: u32) -> Result<MatrixPolynomial> {
        if m == 0 {
            return Ok(if n == 0 {
                MatrixPolynomial::p_power(0)
            } else {
                MatrixPolynomial::zero()
            });
        }
        Ok(self.aggregate(m, n)?.w)
    }

    /// `ρ^W_{m,n}(q) = Σ_{k+l=q, k ≤ m, l ≤ n} 2^k (m)_k C(q+1, l) τ(m−k, n−l)`,
    /// the coefficient of `P^{1+q}` in `W(m+1, n)`.
    pub fn rho_w(&mut self, m: usize, n: u32, q: usize) -> Result<TracePolynomial> {
        self.check_degree(m + 1, n as usize)?;
        let mut acc = TracePolynomial::zero();
        for k in 0..=m.min(q) {
            let l = q - k;
            if l > n as usize {
                continue;
            }
            let c = pow2(k)
                * Rational::from_integer(falling(m as u64, k as u64))
                * binomial_q(q as u64 + 1, l as u64);
            acc = acc + self.tau(m - k, n - l as u32)?.scale(&c);
        }
        Ok(acc)
    }

    /// `[ρ^W_{m,n}(0), …, ρ^W_{m,n}(m+n)]`
    pub fn rho_w_all(&mut self, m: usize, n: u32) -> Result<Vec<TracePolynomial>> {
        (0..=m + n as usize).map(|q| self.rho_w(m, n, q)).collect()
    }

    /// `W(m+1, n) = Σ_q ρ^W_{m,n}(q) P^{1+q}`.
    pub fn w_from_rho(&mut self, m: usize, n: u32) -> Result<MatrixPolynomial> {
        let mut out = MatrixPolynomial::zero();
        for (q, c) in self.rho_w_all(m, n)?.into_iter().enumerate() {
            out.add_term(1 + q as u32, c);
        }
        Ok(out)
    }
}

fn rho_m_from_array(arr: &TraceArray, q: usize) -> TracePolynomial {
    let m = arr.v.len();
    let n = weight(&arr.v);
    let mut acc = TracePolynomial::zero();
    for k in 0..=m.min(q) {
        let l = q - k;
        if l > n {
            continue;
        }
        let c = pow2(k) * Rational::from_integer(falling(m as u64, k as u64));
        acc = acc + arr.get(m - k, n - l).scale(&c);
    }
    acc
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NormMethod {
    /// `a_n = (1/2n) Σ_{k<n} a_k t_{n−k}` with `a_n = 2^{-n}/n! · E⟨X,X⟩^n`.
    Recursion,
    /// Trace formula with the zero word.
    Permutation,
    /// Complete Bell polynomial in `b_k = 2^{k−1}(k−1)! t_k`, standard recursion.
    Bell,
    /// Complete Bell polynomial, sum over increasing sequences.
    BellExplicit,
    /// `a_n = Σ_{0=k_0<…<k_p=n} ∏_l t_{k_l−k_{l−1}} / (2 k_l)`.
    IncreasingSequences,
}

impl NormMethod {
    pub const ALL: [NormMethod; 5] = [
        NormMethod::Recursion,
        NormMethod::Permutation,
        NormMethod::Bell,
        NormMethod::BellExplicit,
        NormMethod::IncreasingSequences,
    ];
}

/// `a_0, …, a_n` with `a_k = 2^{-k}/k! · E⟨X,X⟩^k`, by the recursion.
pub fn scaled_norm_moments(n: usize) -> Vec<TracePolynomial> {
    let mut a = vec![TracePolynomial::one()];
    for j in 1..=n {
        let mut acc = TracePolynomial::zero();
        for (k, ak) in a.iter().enumerate() {
            acc = acc + ak * &TracePolynomial::t((j - k) as u32);
        }
        a.push(acc.scale(&Rational::new(BigInt::one(), BigInt::from(2 * j))));
    }
    a
}

/// `Σ_{0=k_0<…<k_p=n} ∏_l t_{k_l−k_{l−1}} / (2 k_l)`
pub fn increasing_sequence_sum(n: usize) -> TracePolynomial {
    if n == 0 {
        return TracePolynomial::one();
    }
    let mut total = TracePolynomial::zero();
    for parts in positive_compositions(n) {
        let mut k = 0;
        let mut term = TracePolynomial::one();
        let mut denom = BigInt::one();
        for d in parts {
            k += d;
            term = &term * &TracePolynomial::t(d as u32);
            denom *= 2 * k;
        }
        total = total + term.scale(&Rational::new(BigInt::one(), denom));
    }
    total
}

/// Bell arguments `b_k = 2^{k−1}(k−1)! t_k`, k = 1..n.
pub fn bell_arguments(n: usize) -> Vec<TracePolynomial> {
    (1..=n)
        .map(|k| {
            TracePolynomial::t(k as u32)
                .scale(&(pow2(k - 1) * Rational::from_integer(factorial(k as u64 - 1))))
        })
        .collect()
}

/// `E⟨X,X⟩^n` as a trace polynomial.
pub fn norm_moment(n: usize, method: NormMethod, limits: &Limits) -> Result<TracePolynomial> {
    let unscale = pow2(n) * Rational::from_integer(factorial(n as u64));
    Ok(match method {
        NormMethod::Recursion => scaled_norm_moments(n).pop().unwrap().scale(&unscale),
        NormMethod::Permutation => letac_trace(&vec![0; n], limits)?,
        NormMethod::Bell => complete_bell_recursive(&bell_arguments(n), n),
        NormMethod::BellExplicit => complete_bell_explicit(&bell_arguments(n), n),
        NormMethod::IncreasingSequences => increasing_sequence_sum(n).scale(&unscale),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PowerMethod {
    /// `E𝒳^n = 2^n n! (1/2n) Σ_{k<n} a_k P^{n−k}` with the recursive `a_k`.
    Recursion,
    /// Same expansion with `a_k` from increasing sequences.
    IncreasingSequences,
    /// `M(0_n)` from the permutation formula.
    Permutation,
}

/// `E𝒳^n` as a polynomial in `P`.
pub fn matrix_power_moment(
    n: usize,
    method: PowerMethod,
    limits: &Limits,
) -> Result<MatrixPolynomial> {
    if n == 0 {
        return Ok(MatrixPolynomial::p_power(0));
    }
    let a: Vec<TracePolynomial> = match method {
        PowerMethod::Permutation => return letac_matrix(&vec![0; n], limits),
        PowerMethod::Recursion => scaled_norm_moments(n - 1),
        PowerMethod::IncreasingSequences => (0..n).map(increasing_sequence_sum).collect(),
    };
    let c = pow2(n) * Rational::from_integer(factorial(n as u64)) / int(2 * n as i64);
    let mut out = MatrixPolynomial::zero();
    for (k, ak) in a.iter().enumerate() {
        out.add_term((n - k) as u32, ak.scale(&c));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::Matrix;
    use crate::scalar::rat;
    use crate::trace_algebra::{ContextOptions, CovarianceContext};

    fn ctx(d: &[i64]) -> CovarianceContext<Rational> {
        let d: Vec<Rational> = d.iter().map(|&x| int(x)).collect();
        CovarianceContext::exact(Matrix::diag(&d), ContextOptions::default()).unwrap()
    }

    #[test]
    fn recursion_small_cases() {
        let mut e = MomentEngine::new(Limits::default());
        let c = ctx(&[1, 2]);
        assert_eq!(
            e.moment_recursive(&[0, 1]).unwrap().eval(&c).unwrap(),
            Matrix::diag(&[int(5), int(28)])
        );
        assert_eq!(
            e.moment_recursive(&[0, 0]).unwrap().eval(&c).unwrap(),
            Matrix::diag(&[int(5), int(14)])
        );
        assert_eq!(
            e.moment_recursive(&[]).unwrap(),
            MatrixPolynomial::p_power(0)
        );
    }

    #[test]
    fn trace_array_entries() {
        let mut e = MomentEngine::new(Limits::default());
        let a = e.trace_array(&[1, 2]).unwrap();
        assert_eq!(a.get(1, 1), TracePolynomial::t(2).scale(&rat(1, 2)));
        assert_eq!(a.get(0, 0), TracePolynomial::one());
        assert!(a.get(0, 1).is_zero());
    }

    #[test]
    fn rho_m_single_letter() {
        let mut e = MomentEngine::new(Limits::default());
        assert_eq!(e.rho_m(&[0], 0).unwrap(), TracePolynomial::t(1));
        assert_eq!(e.rho_m(&[0], 1).unwrap(), TracePolynomial::constant(int(2)));
    }

    #[test]
    fn rho_w_scalar_case() {
        let mut e = MomentEngine::new(Limits::default());
        let c = ctx(&[1]);
        let rho: Vec<Rational> = e
            .rho_w_all(1, 1)
            .unwrap()
            .iter()
            .map(|p| p.eval(&c).unwrap())
            .collect();
        assert_eq!(rho, vec![int(1), int(2), int(6)]);
        assert_eq!(
            e.rho_w(2, 1, 3).unwrap(),
            TracePolynomial::constant(int(32))
        );
        assert_eq!(
            e.w(2, 1).unwrap().eval(&c).unwrap(),
            Matrix::diag(&[int(9)])
        );
        assert_eq!(e.tau(2, 0).unwrap().eval(&c).unwrap(), int(3));
        assert_eq!(e.varpi(2, 0).unwrap().eval(&c).unwrap(), int(3));
    }

    #[test]
    fn norm_moment_methods_small() {
        let l = Limits::default();
        let c = ctx(&[1]);
        for m in NormMethod::ALL {
            assert_eq!(
                norm_moment(3, m, &l).unwrap().eval(&c).unwrap(),
                int(15),
                "{m:?}"
            );
        }
        let p2 = matrix_power_moment(2, PowerMethod::Recursion, &l).unwrap();
        assert_eq!(
            p2.eval(&ctx(&[1, 2])).unwrap(),
            Matrix::diag(&[int(5), int(14)])
        );
    }

    #[test]
    fn three_routes_agree_small() {
        let mut e = MomentEngine::new(Limits::default());
        for m in 1..=4 {
            for n in 0..=4u32 {
                for v in compositions(m, n) {
                    let rec = e.moment_recursive(&v).unwrap();
                    let poly = e.moment_polynomial_word(&v).unwrap();
                    let perm = e.moment_permutation(&v).unwrap();
                    assert_eq!(rec, perm, "recursion vs permutation at {v:?}");
                    assert_eq!(poly, perm, "polynomial vs permutation at {v:?}");
                }
            }
        }
    }

    #[test]
    fn rho_w_reproduces_w() {
        let mut e = MomentEngine::new(Limits::default());
        for m in 0..=3 {
            for n in 0..=3u32 {
                assert_eq!(
                    e.w_from_rho(m, n).unwrap(),
                    e.w(m + 1, n).unwrap(),
                    "m={m} n={n}"
                );
            }
        }
    }

    #[test]
    fn guard_on_degree() {
        let mut e = MomentEngine::new(Limits::default());
        assert!(matches!(
            e.moment_recursive(&[5, 6]),
            Err(Error::GuardLimit { .. })
        ));
    }
}
