//! Central moments `E[(𝒳 − P)^n]`, the non-commutative binomial expansion of
//! `(xxᵀ + Q)^n`, and the closed forms at `P = I`.

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::combinatorics::{binomial_q, compositions};
use crate::error::{Error, Result};
use crate::limits::Limits;
use crate::matrix::Matrix;
use crate::moments::MomentEngine;
use crate::oracles::letac::letac_matrix;
use crate::scalar::{int, Rational, Ring, Scalar};
use crate::trace_algebra::MatrixPolynomial;

/// `s_j = ⟨x, Q^j x⟩` for `j = 0..=n`.
pub fn s_values<T: Ring>(q: &Matrix<T>, x: &[T], n: usize) -> Vec<T> {
    let mut y = x.to_vec();
    let mut out = Vec::with_capacity(n + 1);
    for j in 0..=n {
        if j > 0 {
            y = q.mat_vec(&y);
        }
        out.push(
            x.iter()
                .zip(&y)
                .fold(T::zero(), |a, (p, q)| a + p.clone() * q.clone()),
        );
    }
    out
}

/// `Ξ^l_{k,n} = Σ_{v ∈ V_{n−k, k−l}} s_{v_1} ⋯ s_{v_{n−k}}` for `0 ≤ l ≤ k ≤ n`.
#[derive(Clone, Debug, PartialEq)]
pub struct XiTable<R> {
    n: usize,
    // values[k][l]
    values: Vec<Vec<R>>,
}

impl<R: Ring> XiTable<R> {
    /// Backward recursion `Ξ^l_{k,n} = Σ_{j>l} Ξ^j_{k+1,n} s_{j−l−1}` from
    /// `Ξ^l_{n,n} = 1_{l=n}`. Needs `s_0 … s_{n−1}`.
    pub fn new(s: &[R], n: usize) -> Result<Self> {
        if s.len() < n {
            return Err(Error::OutOfRange(format!(
                "need {n} s-values, got {}",
                s.len()
            )));
        }
        let mut values: Vec<Vec<R>> = (0..=n).map(|k| vec![R::zero(); k + 1]).collect();
        values[n][n] = R::one();
        for k in (0..n).rev() {
            for l in 0..=k {
                let mut acc = R::zero();
                for j in l + 1..=k + 1 {
                    acc = acc + values[k + 1][j].clone() * s[j - l - 1].clone();
                }
                values[k][l] = acc;
            }
        }
        Ok(XiTable { n, values })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `Ξ^l_{k,n}`, zero outside `l ≤ k ≤ n`.
    pub fn get(&self, l: usize, k: usize) -> R {
        if l > k || k > self.n {
            return R::zero();
        }
        self.values[k][l].clone()
    }
}

/// `Q^{[a,b]}(x) = Q^a x xᵀ Q^b`
pub fn q_bracket_pair<T: Ring>(q: &Matrix<T>, x: &[T], a: usize, b: usize) -> Matrix<T> {
    let ya = q.pow(a).mat_vec(x);
    let yb = q.pow(b).mat_vec(x);
    Matrix::outer(&ya, &yb)
}

/// `Q^{[n]}(x) = Σ_{a+b=n} Q^a x xᵀ Q^b`
pub fn q_bracket<T: Ring>(q: &Matrix<T>, x: &[T], n: usize) -> Matrix<T> {
    let mut ys = vec![x.to_vec()];
    for j in 1..=n {
        let next = q.mat_vec(&ys[j - 1]);
        ys.push(next);
    }
    let r = x.len();
    (0..=n).fold(Matrix::zeros(r, r), |acc, a| {
        &acc + &Matrix::outer(&ys[a], &ys[n - a])
    })
}

/// Both sides of `(xxᵀ + Q)^{n+1} = Q^{n+1} + Σ_{0≤l≤k≤n} Ξ^l_{k,n} Q^{[l]}(x)`.
pub fn noncommutative_binomial_sample<T: Ring>(
    q: &Matrix<T>,
    x: &[T],
    n: usize,
) -> Result<(Matrix<T>, Matrix<T>)> {
    if q.rows() != x.len() || !q.is_square() {
        return Err(Error::Dimension("Q and x disagree".into()));
    }
    let lhs = (&Matrix::outer(x, x) + q).pow(n + 1);
    let s = s_values(q, x, n);
    let xi = XiTable::new(&s, n)?;
    let mut rhs = q.pow(n + 1);
    for l in 0..=n {
        let coeff = (l..=n).fold(T::zero(), |a, k| a + xi.get(l, k));
        if !coeff.is_zero() {
            rhs = &rhs + &q_bracket(q, x, l).scale(&coeff);
        }
    }
    Ok((lhs, rhs))
}

/// Single-sample realization `𝒲(n−k, k) = Σ_{l≤k} Ξ^l_{k,n−1} P^{[l]}(x)`.
pub fn weighted_sample<T: Ring>(p: &Matrix<T>, x: &[T], n: usize, k: usize) -> Result<Matrix<T>> {
    if k >= n {
        return Err(Error::OutOfRange(format!("need k < n, got k={k}, n={n}")));
    }
    let s = s_values(p, x, n - 1);
    let xi = XiTable::new(&s, n - 1)?;
    let r = x.len();
    Ok((0..=k).fold(Matrix::zeros(r, r), |acc, l| {
        &acc + &q_bracket(p, x, l).scale(&xi.get(l, k))
    }))
}

/// Both sides of `(xxᵀ − P)^n = (−P)^n + Σ_{k<n} (−1)^k 𝒲(n−k, k)`.
pub fn ae_binomial_sample<T: Ring>(
    p: &Matrix<T>,
    x: &[T],
    n: usize,
) -> Result<(Matrix<T>, Matrix<T>)> {
    if p.rows() != x.len() || !p.is_square() {
        return Err(Error::Dimension("P and x disagree".into()));
    }
    let lhs = (&Matrix::outer(x, x) - p).pow(n);
    let sign = |k: usize| if k.is_multiple_of(2) { T::one() } else { -T::one() };
    let mut rhs = p.pow(n).scale(&sign(n));
    if n > 0 {
        let s = s_values(p, x, n - 1);
        let xi = XiTable::new(&s, n - 1)?;
        for k in 0..n {
            for l in 0..=k {
                let c = xi.get(l, k) * sign(k);
                if !c.is_zero() {
                    rhs = &rhs + &q_bracket(p, x, l).scale(&c);
                }
            }
        }
    }
    Ok((lhs, rhs))
}

/// `E[(𝒳 − P)^n] = (−1)^n P^n + Σ_{k<n} (−1)^k W(n−k, k)`.
pub fn central_moment(engine: &mut MomentEngine, n: usize) -> Result<MatrixPolynomial> {
    let sign = |k: usize| {
        if k.is_multiple_of(2) {
            Rational::one()
        } else {
            -Rational::one()
        }
    };
    let mut out = MatrixPolynomial::p_power(n as u32).scale_rational(&sign(n));
    for k in 0..n {
        out.add_assign(&engine.w(n - k, k as u32)?.scale_rational(&sign(k)));
    }
    Ok(out)
}

/// One term of the word expansion of `(𝒳 − P)^n`: `sign · M(word)`, or
/// `sign · P^n` when the word has no `𝒳`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CentralWord {
    pub negative: bool,
    pub word: Option<Vec<u32>>,
}

/// All 2^n words in `𝒳` and `−P`. A word `P^{a_0} 𝒳 P^{a_1} ⋯ 𝒳 P^{a_j}` has
/// expectation `M(a_1, …, a_{j−1}, a_j + a_0)` since `P` commutes with `M`.
pub fn central_words(n: usize) -> Vec<CentralWord> {
    (0u64..1 << n)
        .map(|mask| {
            // bit i set: position i holds 𝒳
            let xs = mask.count_ones() as usize;
            let negative = (n - xs) % 2 == 1;
            if xs == 0 {
                return CentralWord {
                    negative,
                    word: None,
                };
            }
            let mut gaps = vec![0u32];
            for i in 0..n {
                if mask >> i & 1 == 1 {
                    gaps.push(0);
                } else {
                    *gaps.last_mut().unwrap() += 1;
                }
            }
            let a0 = gaps[0];
            let mut word: Vec<u32> = gaps[1..].to_vec();
            *word.last_mut().unwrap() += a0;
            CentralWord {
                negative,
                word: Some(word),
            }
        })
        .collect()
}

/// `E[(𝒳 − P)^n]` by expanding into words and evaluating each with the
/// permutation formula.
pub fn central_moment_oracle(n: usize, limits: &Limits) -> Result<MatrixPolynomial> {
    Limits::check("central oracle degree", n, limits.max_oracle_degree)?;
    let mut cache: std::collections::HashMap<Vec<u32>, MatrixPolynomial> = Default::default();
    let mut out = MatrixPolynomial::zero();
    for w in central_words(n) {
        let term = match w.word {
            None => MatrixPolynomial::p_power(n as u32),
            Some(word) => match cache.get(&word) {
                Some(m) => m.clone(),
                None => {
                    let m = letac_matrix(&word, limits)?;
                    cache.insert(word, m.clone());
                    m
                }
            },
        };
        out.add_assign(&if w.negative { term.neg() } else { term });
    }
    Ok(out)
}

/// `E‖X‖^{2k} = ∏_{l<k} (r + 2l)` at `P = I_r`.
pub fn identity_norm_moment(r: usize, k: usize) -> Rational {
    (0..k).fold(Rational::one(), |a, l| a * int((r + 2 * l) as i64))
}

/// Scalar `c` with `E𝒳^k = c I` at `P = I_r`: `E‖X‖^{2k}/r` for k ≥ 1, and 1 for k = 0.
pub fn identity_power_moment(r: usize, k: usize) -> Rational {
    if k == 0 {
        Rational::one()
    } else {
        identity_norm_moment(r, k) / int(r as i64)
    }
}

/// `(1/r) Σ_{0≤k≤n} C(n,k) (−1)^{n−k} E‖X‖^{2k}`: the closed form of the
/// central moment at `P = I` with the `k = 0` term read as `1/r`.
pub fn identity_central_stated(r: usize, n: usize) -> Rational {
    (0..=n).fold(Rational::zero(), |a, k| {
        let s = if (n - k).is_multiple_of(2) {
            Rational::one()
        } else {
            -Rational::one()
        };
        a + s * binomial_q(n as u64, k as u64) * identity_norm_moment(r, k)
    }) / int(r as i64)
}

/// `Σ_k C(n,k) (−1)^{n−k} E𝒳^k` at `P = I`, with `E𝒳^0 = I`.
pub fn identity_central_exact(r: usize, n: usize) -> Rational {
    (0..=n).fold(Rational::zero(), |a, k| {
        let s = if (n - k).is_multiple_of(2) {
            Rational::one()
        } else {
            -Rational::one()
        };
        a + s * binomial_q(n as u64, k as u64) * identity_power_moment(r, k)
    })
}

/// `W(m, n)` at `P = I` as a scalar: `C(n+m, n) E𝒳^m`.
pub fn identity_weighted(r: usize, m: usize, n: usize) -> Rational {
    binomial_q((n + m) as u64, n as u64) * identity_power_moment(r, m)
}

/// Direct `Σ_{v ∈ V_{m,n}} (1 + v_m) M(v)` at `P = I`: every `M(v)` equals `E𝒳^m`.
pub fn identity_weighted_direct(r: usize, m: usize, n: usize) -> Rational {
    let count: BigInt = compositions(m, n as u32)
        .iter()
        .map(|v| BigInt::from(1 + v[m - 1]))
        .sum();
    Rational::from_integer(count) * identity_power_moment(r, m)
}

/// Largest relative entrywise difference, for float comparisons.
pub fn relative_error<T: Scalar>(a: &Matrix<T>, b: &Matrix<T>) -> f64 {
    let diff = (a - b).max_abs();
    let scale = a.max_abs().max(b.max_abs()).max(1.0);
    diff / scale
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::combinatorics::extended_binomial;
    use crate::scalar::rat;
    use crate::trace_algebra::{ContextOptions, CovarianceContext};

    fn diag(d: &[i64]) -> Matrix<Rational> {
        Matrix::diag(&d.iter().map(|&x| int(x)).collect::<Vec<_>>())
    }

    #[test]
    fn xi_matches_extended_binomial() {
        let s = vec![int(2), rat(1, 3), int(-1), int(5), int(7)];
        let n = 5;
        let xi = XiTable::new(&s, n).unwrap();
        for k in 0..=n {
            for l in 0..=k {
                assert_eq!(
                    xi.get(l, k),
                    extended_binomial(&s, n - k, k - l),
                    "l={l} k={k}"
                );
            }
        }
        for k in 0..=n {
            assert_eq!(xi.get(k, k), num_traits::pow(s[0].clone(), n - k));
        }
    }

    #[test]
    fn ae_binomial_example() {
        let (lhs, rhs) = ae_binomial_sample(&diag(&[1, 1]), &[int(1), int(0)], 2).unwrap();
        assert_eq!(lhs, diag(&[0, 1]));
        assert_eq!(rhs, lhs);
    }

    #[test]
    fn central_small() {
        let l = Limits::default();
        let mut e = MomentEngine::new(l);
        let ctx = CovarianceContext::exact(diag(&[1, 2]), ContextOptions::default()).unwrap();
        assert_eq!(
            central_moment(&mut e, 2).unwrap().eval(&ctx).unwrap(),
            diag(&[4, 10])
        );
        assert!(central_moment(&mut e, 1).unwrap().is_zero());
        assert_eq!(
            central_moment(&mut e, 0).unwrap(),
            MatrixPolynomial::p_power(0)
        );
        let one = CovarianceContext::exact(diag(&[1]), ContextOptions::default()).unwrap();
        assert_eq!(
            central_moment(&mut e, 3).unwrap().eval(&one).unwrap(),
            diag(&[8])
        );
        assert_eq!(
            central_moment(&mut e, 4).unwrap().eval(&one).unwrap(),
            diag(&[60])
        );
        for n in 0..=5 {
            assert_eq!(
                central_moment(&mut e, n).unwrap(),
                central_moment_oracle(n, &l).unwrap()
            );
        }
    }

    #[test]
    fn words_of_degree_two() {
        let w = central_words(2);
        assert_eq!(w.len(), 4);
        // 𝒳𝒳, P𝒳 (bit 1), 𝒳P (bit 0), PP
        assert_eq!(w[3].word, Some(vec![0, 0]));
        assert!(w[1].negative && w[1].word == Some(vec![1]));
        assert!(w[2].negative && w[2].word == Some(vec![1]));
        assert!(!w[0].negative && w[0].word.is_none());
    }

    #[test]
    fn identity_forms() {
        assert_eq!(identity_central_exact(1, 3), int(8));
        assert_eq!(identity_central_exact(2, 2), int(3));
        assert_eq!(identity_central_stated(2, 2), rat(5, 2));
        assert_eq!(identity_weighted(1, 2, 1), int(9));
        assert_eq!(
            identity_weighted_direct(3, 2, 3),
            identity_weighted(3, 2, 3)
        );
    }
}
