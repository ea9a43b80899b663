//! Laplace transforms `E e^{t⟨X,X⟩} = det(I − 2tP)^{-1/2}` and
//! `E[𝒳 e^{t𝒳}] = det(I − 2tP)^{-1/2} (I − 2tP)^{-1} P`, both in closed form
//! and as power series in t.

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::combinatorics::{factorial, subsets};
use crate::error::{Error, Result};
use crate::limits::Limits;
use crate::matrix::Matrix;
use crate::moments::{norm_moment, NormMethod};
use crate::scalar::{int, Rational, Ring};
use crate::trace_algebra::{CovarianceContext, MatrixPolynomial, TracePolynomial};

#[derive(Clone, Debug)]
pub struct LaplaceClosedForms {
    pub t: f64,
    /// `det(I − 2tP)^{-1/2}`
    pub mgf: f64,
    /// `exp(½ Σ_{k≤terms} (2t)^k t_k / k)`
    pub mgf_trace_series: f64,
    /// `mgf · (I − 2tP)^{-1} P`
    pub dmgf: Matrix<f64>,
    /// `E⟨X,X⟩^n / n!` for n = 0..=order
    pub series_coeffs: Vec<f64>,
}

fn check_spectrum(ctx: &CovarianceContext<f64>, t: f64) -> Result<()> {
    let lmax = ctx.lambda_max();
    if !t.is_finite() || 2.0 * t * lmax >= 1.0 {
        return Err(Error::Spectral(format!(
            "need 2 t λmax < 1, got 2·{t}·{lmax}"
        )));
    }
    Ok(())
}

pub fn mgf(ctx: &CovarianceContext<f64>, t: f64) -> Result<f64> {
    check_spectrum(ctx, t)?;
    let a = &Matrix::identity(ctx.dim()) - &ctx.matrix().scale(&(2.0 * t));
    Ok(a.to_nalgebra().determinant().powf(-0.5))
}

pub fn mgf_trace_series(ctx: &CovarianceContext<f64>, t: f64, terms: usize) -> Result<f64> {
    check_spectrum(ctx, t)?;
    let mut s = 0.0;
    for k in 1..=terms {
        s += (2.0 * t).powi(k as i32) * *ctx.trace_power(k as u32)? / k as f64;
    }
    Ok((0.5 * s).exp())
}

pub fn dmgf(ctx: &CovarianceContext<f64>, t: f64) -> Result<Matrix<f64>> {
    let m = mgf(ctx, t)?;
    let a = &Matrix::identity(ctx.dim()) - &ctx.matrix().scale(&(2.0 * t));
    let inv = a
        .to_nalgebra()
        .try_inverse()
        .ok_or_else(|| Error::Spectral("I − 2tP is singular".into()))?;
    Ok((&Matrix::from_nalgebra(&inv) * ctx.matrix()).scale(&m))
}

pub fn laplace_closed_forms(
    ctx: &CovarianceContext<f64>,
    t: f64,
    order: usize,
    limits: &Limits,
) -> Result<LaplaceClosedForms> {
    let series_coeffs = (0..=order)
        .map(|n| {
            let e = norm_moment(n, NormMethod::Recursion, limits)?.eval(ctx)?;
            Ok(e / crate::scalar::rational_to_f64(&Rational::from_integer(factorial(n as u64))))
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(LaplaceClosedForms {
        t,
        mgf: mgf(ctx, t)?,
        mgf_trace_series: mgf_trace_series(ctx, t, 60)?,
        dmgf: dmgf(ctx, t)?,
        series_coeffs,
    })
}

/// Coefficients of `exp(½ Σ_k (2t)^k t_k / k)` through `t^order`, from
/// `n c_n = Σ_{k=1}^n k a_k c_{n−k}` with `a_k = 2^{k−1} t_k / k`.
pub fn scalar_series_symbolic(order: usize) -> Vec<TracePolynomial> {
    let mut c = vec![TracePolynomial::one()];
    for n in 1..=order {
        let mut acc = TracePolynomial::zero();
        for k in 1..=n {
            // k a_k = 2^{k−1} t_k
            let ka = TracePolynomial::t(k as u32)
                .scale(&Rational::from_integer(BigInt::one() << (k - 1)));
            acc = acc + &ka * &c[n - k];
        }
        c.push(acc.scale(&(Rational::one() / int(n as i64))));
    }
    c
}

/// Coefficients of `E[𝒳 e^{t𝒳}] = F(t) Σ_j (2t)^j P^{j+1}` where `F` is the
/// scalar series.
pub fn matrix_series_symbolic(order: usize) -> Vec<MatrixPolynomial> {
    let f = scalar_series_symbolic(order);
    (0..=order)
        .map(|n| {
            let mut out = MatrixPolynomial::zero();
            for j in 0..=n {
                out.add_term(
                    j as u32 + 1,
                    f[n - j].scale(&Rational::from_integer(BigInt::one() << j)),
                );
            }
            out
        })
        .collect()
}

/// Coefficients of `det(I − 2tP) = Σ_k (−2)^k e_k(P) t^k`, with `e_k` the sum
/// of principal k×k minors.
pub fn det_polynomial(ctx: &CovarianceContext<Rational>) -> Vec<Rational> {
    let r = ctx.dim();
    (0..=r)
        .map(|k| {
            let e = subsets(r, k)
                .iter()
                .fold(Rational::zero(), |a, s| a + ctx.matrix().principal(s).det());
            e * num_traits::pow(int(-2), k)
        })
        .collect()
}

/// Power series of `D(t)^{-1/2}` for a polynomial `D` with `D(0) = 1`, from
/// `D F' = −½ D' F`.
pub fn inverse_sqrt_series<R: Ring>(d: &[R], order: usize) -> Vec<R> {
    assert!(!d.is_empty() && d[0] == R::one(), "constant term must be 1");
    let di = |i: usize| d.get(i).cloned().unwrap_or_else(R::zero);
    let mut f = vec![R::one()];
    for n in 0..order {
        let mut acc = R::zero();
        for i in 1..=n {
            acc = acc - (di(i) * f[n - i + 1].clone()).scale(&int((n - i + 1) as i64));
        }
        for i in 0..=n {
            acc = acc - (di(i + 1) * f[n - i].clone()).scale(&crate::scalar::rat(i as i64 + 1, 2));
        }
        f.push(acc.scale(&(Rational::one() / int(n as i64 + 1))));
    }
    f
}

/// Scalar series of `det(I − 2tP)^{-1/2}` at a concrete exact covariance.
pub fn scalar_series_exact(ctx: &CovarianceContext<Rational>, order: usize) -> Vec<Rational> {
    inverse_sqrt_series(&det_polynomial(ctx), order)
}

/// Matrix series of `det(I − 2tP)^{-1/2} (I − 2tP)^{-1} P` at a concrete
/// exact covariance.
pub fn matrix_series_exact(
    ctx: &CovarianceContext<Rational>,
    order: usize,
) -> Result<Vec<Matrix<Rational>>> {
    let f = scalar_series_exact(ctx, order);
    let r = ctx.dim();
    (0..=order)
        .map(|n| {
            let mut acc = Matrix::zeros(r, r);
            for j in 0..=n {
                let c = f[n - j].clone() * Rational::from_integer(BigInt::one() << j);
                acc = &acc + &ctx.power(j as u32 + 1)?.scale(&c);
            }
            Ok(acc)
        })
        .collect()
}
