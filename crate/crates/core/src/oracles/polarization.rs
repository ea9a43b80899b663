//! Products of quadratic forms by polarization with Rademacher signs:
//! `n! E ∏_i ⟨X, Q_i X⟩ = 2^{-n} Σ_{w ∈ {±1}^n} (∏ w_i) E⟨X, Q_w X⟩^n`
//! where `Q_w = Σ_i w_i Q_i`.

use num_traits::One;

use crate::combinatorics::factorial;
use crate::error::{Error, Result};
use crate::limits::Limits;
use crate::matrix::Matrix;
use crate::scalar::{Rational, Scalar};
use crate::trace_algebra::CovarianceContext;

/// `E⟨X, Q X⟩^n` for symmetric (possibly indefinite) `Q`, from the traces
/// `τ_k = tr((PQ)^k)` and `a_n = (1/2n) Σ_{k<n} a_k τ_{n−k}`,
/// `E⟨X,QX⟩^n = 2^n n! a_n`.
pub fn quadratic_form_moment<T: Scalar>(ctx: &CovarianceContext<T>, q: &Matrix<T>, n: usize) -> T {
    let pq = ctx.matrix() * q;
    let mut taus = Vec::with_capacity(n);
    let mut acc = Matrix::identity(ctx.dim());
    for _ in 0..n {
        acc = &acc * &pq;
        taus.push(acc.trace());
    }
    let mut a = vec![T::one()];
    for j in 1..=n {
        let s = (0..j).fold(T::zero(), |s, k| s + a[k].clone() * taus[j - k - 1].clone());
        a.push(s.scale(&Rational::new(1.into(), (2 * j).into())));
    }
    let unscale = Rational::from_integer(factorial(n as u64) << n);
    a[n].scale(&unscale)
}

/// `E ∏_i ⟨X, Q_i X⟩` by polarization.
pub fn polarization_product<T: Scalar>(ctx: &CovarianceContext<T>, qs: &[Matrix<T>]) -> Result<T> {
    let n = qs.len();
    Limits::check("polarization size", n, 24)?;
    let r = ctx.dim();
    if qs.iter().any(|q| q.rows() != r || q.cols() != r) {
        return Err(Error::Dimension("weights must match P".into()));
    }
    if qs.iter().any(|q| !q.is_symmetric()) {
        return Err(Error::NotSymmetric("weights must be symmetric".into()));
    }
    if n == 0 {
        return Ok(T::one());
    }
    let mut total = T::zero();
    for mask in 0u64..1 << n {
        let mut qw = Matrix::zeros(r, r);
        let mut negative = false;
        for (i, q) in qs.iter().enumerate() {
            if mask >> i & 1 == 1 {
                qw = &qw - q;
                negative = !negative;
            } else {
                qw = &qw + q;
            }
        }
        let m = quadratic_form_moment(ctx, &qw, n);
        total = if negative { total - m } else { total + m };
    }
    let norm = Rational::from_integer(factorial(n as u64) << n);
    Ok(total.scale(&(Rational::one() / norm)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::int;
    use crate::trace_algebra::ContextOptions;

    #[test]
    fn identity_weights_give_norm_moments() {
        let ctx =
            CovarianceContext::exact(Matrix::diag(&[int(1)]), ContextOptions::default()).unwrap();
        let id = Matrix::identity(1);
        assert_eq!(quadratic_form_moment(&ctx, &id, 3), int(15));
        let qs = vec![id.clone(), id.clone(), id];
        assert_eq!(polarization_product(&ctx, &qs).unwrap(), int(15));
    }

    #[test]
    fn two_factors() {
        // E[X1² X2²] = 1 for independent standard normals
        let ctx = CovarianceContext::exact(Matrix::identity(2), ContextOptions::default()).unwrap();
        let e1 = Matrix::diag(&[int(1), int(0)]);
        let e2 = Matrix::diag(&[int(0), int(1)]);
        assert_eq!(polarization_product(&ctx, &[e1, e2]).unwrap(), int(1));
    }
}
