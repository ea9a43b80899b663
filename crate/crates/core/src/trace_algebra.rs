//! Polynomials in the power traces `t_k = tr(P^k)`, polynomials in `P` with
//! such coefficients, and concrete covariance contexts to evaluate them in.
//!
//! The index `k = 0` is allowed and stands for `tr(I) = r`.

use std::borrow::Cow;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Zero};
use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::limits::Limits;
use crate::matrix::Matrix;
use crate::scalar::{format_rational, parse_rational, Rational, Ring, Scalar};

/// Product `t_{k_1} ⋯ t_{k_j}`, stored as the sorted multiset of indices.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TraceMonomial(Vec<u32>);

impl TraceMonomial {
    pub fn one() -> Self {
        TraceMonomial(Vec::new())
    }

    pub fn t(k: u32) -> Self {
        TraceMonomial(vec![k])
    }

    pub fn from_indices(mut ks: Vec<u32>) -> Self {
        ks.sort_unstable();
        TraceMonomial(ks)
    }

    pub fn indices(&self) -> &[u32] {
        &self.0
    }

    /// Map from index to multiplicity.
    pub fn exponents(&self) -> BTreeMap<u32, u32> {
        let mut m = BTreeMap::new();
        for &k in &self.0 {
            *m.entry(k).or_insert(0) += 1;
        }
        m
    }

    /// Σ k over the factors (the degree in P).
    pub fn weight(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Vec::with_capacity(self.0.len() + other.0.len());
        let (mut i, mut j) = (0, 0);
        while i < self.0.len() && j < other.0.len() {
            if self.0[i] <= other.0[j] {
                out.push(self.0[i]);
                i += 1;
            } else {
                out.push(other.0[j]);
                j += 1;
            }
        }
        out.extend_from_slice(&self.0[i..]);
        out.extend_from_slice(&other.0[j..]);
        TraceMonomial(out)
    }

    pub fn eval<T: Ring>(&self, traces: &impl Fn(u32) -> Result<T>) -> Result<T> {
        let mut acc = T::one();
        for &k in &self.0 {
            acc = acc * traces(k)?;
        }
        Ok(acc)
    }
}

impl fmt::Display for TraceMonomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "1");
        }
        let parts: Vec<String> = self
            .exponents()
            .into_iter()
            .map(|(k, e)| {
                if e == 1 {
                    format!("t{k}")
                } else {
                    format!("t{k}^{e}")
                }
            })
            .collect();
        write!(f, "{}", parts.join("*"))
    }
}

/// Finite sum of rational multiples of trace monomials. Zero coefficients
/// are never stored, so structural equality is polynomial equality.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct TracePolynomial {
    terms: BTreeMap<TraceMonomial, Rational>,
}

impl TracePolynomial {
    pub fn constant(c: Rational) -> Self {
        let mut p = Self::default();
        p.add_term(TraceMonomial::one(), c);
        p
    }

    pub fn t(k: u32) -> Self {
        Self::monomial(TraceMonomial::t(k), Rational::one())
    }

    pub fn monomial(m: TraceMonomial, c: Rational) -> Self {
        let mut p = Self::default();
        p.add_term(m, c);
        p
    }

    pub fn add_term(&mut self, m: TraceMonomial, c: Rational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&TraceMonomial, &Rational)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coefficient(&self, m: &TraceMonomial) -> Rational {
        self.terms.get(m).cloned().unwrap_or_else(Rational::zero)
    }

    /// The constant term, if this polynomial is constant.
    pub fn as_constant(&self) -> Option<Rational> {
        match self.terms.len() {
            0 => Some(Rational::zero()),
            1 => self.terms.get(&TraceMonomial::one()).cloned(),
            _ => None,
        }
    }

    /// Some(w) when every monomial has the same weight w.
    pub fn homogeneous_weight(&self) -> Option<u32> {
        let mut ws = self.terms.keys().map(TraceMonomial::weight);
        let first = ws.next()?;
        ws.all(|w| w == first).then_some(first)
    }

    pub fn max_index(&self) -> u32 {
        self.terms
            .keys()
            .flat_map(|m| m.0.iter().copied())
            .max()
            .unwrap_or(0)
    }

    pub fn eval_with<T: Ring>(&self, traces: impl Fn(u32) -> Result<T>) -> Result<T> {
        let mut acc = T::zero();
        for (m, c) in &self.terms {
            acc = acc + m.eval(&traces)?.scale(c);
        }
        Ok(acc)
    }

    pub fn eval<T: Scalar>(&self, ctx: &CovarianceContext<T>) -> Result<T> {
        self.eval_with(|k| ctx.trace_power(k).map(Cow::into_owned))
    }

    /// Substitutes polynomials for the traces.
    pub fn substitute(&self, f: &impl Fn(u32) -> TracePolynomial) -> TracePolynomial {
        self.eval_with(|k| Ok(f(k))).expect("infallible")
    }

    pub fn to_json(&self) -> Value {
        Value::Array(
            self.terms
                .iter()
                .map(|(m, c)| {
                    let mono: Map<String, Value> = m
                        .exponents()
                        .into_iter()
                        .map(|(k, e)| (k.to_string(), json!(e)))
                        .collect();
                    json!({"monomial": mono, "coeff": format_rational(c)})
                })
                .collect(),
        )
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let bad = |what: &str| Error::Parse(format!("trace polynomial: {what}"));
        let arr = v.as_array().ok_or_else(|| bad("expected an array"))?;
        let mut p = TracePolynomial::zero();
        for term in arr {
            let mono = term
                .get("monomial")
                .and_then(Value::as_object)
                .ok_or_else(|| bad("missing monomial"))?;
            let mut ks = Vec::new();
            for (k, e) in mono {
                let k: u32 = k.parse().map_err(|_| bad("bad trace index"))?;
                let e = e.as_u64().ok_or_else(|| bad("bad multiplicity"))?;
                ks.extend(std::iter::repeat_n(k, e as usize));
            }
            let c = match term.get("coeff") {
                Some(Value::String(s)) => parse_rational(s)?,
                Some(Value::Number(n)) => parse_rational(&n.to_string())?,
                _ => return Err(bad("missing coeff")),
            };
            p.add_term(TraceMonomial::from_indices(ks), c);
        }
        Ok(p)
    }
}

impl fmt::Display for TracePolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(m, c)| {
                if m.0.is_empty() {
                    c.to_string()
                } else if c.is_one() {
                    m.to_string()
                } else {
                    format!("{c}*{m}")
                }
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

impl Add for TracePolynomial {
    type Output = Self;
    fn add(mut self, rhs: Self) -> Self {
        for (m, c) in rhs.terms {
            self.add_term(m, c);
        }
        self
    }
}

impl Sub for TracePolynomial {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        self + (-rhs)
    }
}

impl Neg for TracePolynomial {
    type Output = Self;
    fn neg(mut self) -> Self {
        for c in self.terms.values_mut() {
            *c = -c.clone();
        }
        self
    }
}

impl Mul for &TracePolynomial {
    type Output = TracePolynomial;
    fn mul(self, rhs: &TracePolynomial) -> TracePolynomial {
        let mut out = TracePolynomial::zero();
        for (a, ca) in &self.terms {
            for (b, cb) in &rhs.terms {
                out.add_term(a.mul(b), ca * cb);
            }
        }
        out
    }
}

impl Mul for TracePolynomial {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        &self * &rhs
    }
}

impl Zero for TracePolynomial {
    fn zero() -> Self {
        Self::default()
    }
    fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
}

impl One for TracePolynomial {
    fn one() -> Self {
        Self::constant(Rational::one())
    }
}

impl Ring for TracePolynomial {
    fn from_rational(q: &Rational) -> Self {
        Self::constant(q.clone())
    }
    fn scale(&self, q: &Rational) -> Self {
        if q.is_zero() {
            return Self::zero();
        }
        let mut out = self.clone();
        for c in out.terms.values_mut() {
            *c *= q;
        }
        out
    }
}

/// `Σ_q c_q P^q` with trace-polynomial coefficients.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct MatrixPolynomial {
    coeffs: BTreeMap<u32, TracePolynomial>,
}

impl MatrixPolynomial {
    pub fn zero() -> Self {
        Self::default()
    }

    /// `c · P^q`
    pub fn term(q: u32, c: TracePolynomial) -> Self {
        let mut m = Self::zero();
        m.add_term(q, c);
        m
    }

    pub fn p_power(q: u32) -> Self {
        Self::term(q, TracePolynomial::one())
    }

    pub fn add_term(&mut self, q: u32, c: TracePolynomial) {
        if c.is_zero() {
            return;
        }
        let slot = self.coeffs.entry(q).or_default();
        *slot = std::mem::take(slot) + c;
        if slot.is_zero() {
            self.coeffs.remove(&q);
        }
    }

    pub fn add_assign(&mut self, other: &MatrixPolynomial) {
        for (q, c) in &other.coeffs {
            self.add_term(*q, c.clone());
        }
    }

    pub fn coefficient(&self, q: u32) -> TracePolynomial {
        self.coeffs.get(&q).cloned().unwrap_or_default()
    }

    pub fn coeffs(&self) -> impl Iterator<Item = (u32, &TracePolynomial)> {
        self.coeffs.iter().map(|(q, c)| (*q, c))
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn max_power(&self) -> u32 {
        self.coeffs.keys().next_back().copied().unwrap_or(0)
    }

    /// Multiplication by `P^k`.
    pub fn shift(&self, k: u32) -> Self {
        MatrixPolynomial {
            coeffs: self
                .coeffs
                .iter()
                .map(|(q, c)| (q + k, c.clone()))
                .collect(),
        }
    }

    pub fn scale(&self, c: &TracePolynomial) -> Self {
        let mut out = Self::zero();
        for (q, a) in &self.coeffs {
            out.add_term(*q, a * c);
        }
        out
    }

    pub fn scale_rational(&self, c: &Rational) -> Self {
        let mut out = Self::zero();
        for (q, a) in &self.coeffs {
            out.add_term(*q, a.scale(c));
        }
        out
    }

    pub fn neg(&self) -> Self {
        self.scale_rational(&-Rational::one())
    }

    /// Product of two polynomials in P.
    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero();
        for (qa, a) in &self.coeffs {
            for (qb, b) in &other.coeffs {
                out.add_term(qa + qb, a * b);
            }
        }
        out
    }

    /// `tr(Σ c_q P^q) = Σ c_q t_q`.
    pub fn trace(&self) -> TracePolynomial {
        let mut out = TracePolynomial::zero();
        for (q, c) in &self.coeffs {
            out = out + c * &TracePolynomial::t(*q);
        }
        out
    }

    pub fn eval<T: Scalar>(&self, ctx: &CovarianceContext<T>) -> Result<Matrix<T>> {
        let r = ctx.dim();
        let mut acc = Matrix::zeros(r, r);
        for (q, c) in &self.coeffs {
            let s = c.eval(ctx)?;
            acc = &acc + &ctx.power(*q)?.scale(&s);
        }
        Ok(acc)
    }

    pub fn to_json(&self) -> Value {
        Value::Array(
            self.coeffs
                .iter()
                .map(|(q, c)| json!({"q": q, "coeff": c.to_json()}))
                .collect(),
        )
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let arr = v
            .as_array()
            .ok_or_else(|| Error::Parse("matrix polynomial: expected an array".into()))?;
        let mut out = Self::zero();
        for term in arr {
            let q = term
                .get("q")
                .and_then(Value::as_u64)
                .ok_or_else(|| Error::Parse("matrix polynomial: bad q".into()))?;
            let c = TracePolynomial::from_json(
                term.get("coeff")
                    .ok_or_else(|| Error::Parse("matrix polynomial: missing coeff".into()))?,
            )?;
            out.add_term(q as u32, c);
        }
        Ok(out)
    }
}

impl fmt::Display for MatrixPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .coeffs
            .iter()
            .map(|(q, c)| format!("({c}) P^{q}"))
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

#[derive(Clone, Copy, Debug)]
pub struct ContextOptions {
    /// Powers `P^0 … P^degree` are computed up front.
    pub degree: usize,
    /// Reject matrices that are not positive definite.
    pub strict: bool,
    /// Relative asymmetry tolerated in float mode.
    pub symmetry_tol: f64,
    pub max_power: usize,
}

impl Default for ContextOptions {
    fn default() -> Self {
        ContextOptions {
            degree: 12,
            strict: true,
            symmetry_tol: 1e-12,
            max_power: Limits::default().max_power,
        }
    }
}

/// A concrete covariance `P` with cached powers and power traces.
#[derive(Clone, Debug)]
pub struct CovarianceContext<T> {
    p: Matrix<T>,
    powers: Vec<Matrix<T>>,
    traces: Vec<T>,
    max_power: usize,
    asymmetry: f64,
}

impl<T: Scalar> CovarianceContext<T> {
    fn build(p: Matrix<T>, opts: &ContextOptions, asymmetry: f64) -> Self {
        let r = p.rows();
        let mut powers = vec![Matrix::identity(r)];
        for k in 1..=opts.degree.min(opts.max_power) {
            let next = &powers[k - 1] * &p;
            powers.push(next);
        }
        let traces = powers.iter().map(Matrix::trace).collect();
        CovarianceContext {
            p,
            powers,
            traces,
            max_power: opts.max_power,
            asymmetry,
        }
    }

    pub fn matrix(&self) -> &Matrix<T> {
        &self.p
    }

    pub fn dim(&self) -> usize {
        self.p.rows()
    }

    /// Relative asymmetry removed at construction (zero in exact mode).
    pub fn asymmetry(&self) -> f64 {
        self.asymmetry
    }

    pub fn is_diagonal(&self) -> bool {
        self.p.is_diagonal()
    }

    pub fn power(&self, q: u32) -> Result<Cow<'_, Matrix<T>>> {
        let q = q as usize;
        if let Some(m) = self.powers.get(q) {
            return Ok(Cow::Borrowed(m));
        }
        Limits::check("matrix power", q, self.max_power)?;
        let last = self.powers.len() - 1;
        Ok(Cow::Owned(&self.powers[last] * &self.p.pow(q - last)))
    }

    pub fn trace_power(&self, k: u32) -> Result<Cow<'_, T>> {
        if let Some(t) = self.traces.get(k as usize) {
            return Ok(Cow::Borrowed(t));
        }
        Ok(Cow::Owned(self.power(k)?.trace()))
    }

    /// `[t_1, …, t_n]`
    pub fn trace_powers(&self, n: usize) -> Result<Vec<T>> {
        (1..=n as u32)
            .map(|k| self.trace_power(k).map(Cow::into_owned))
            .collect()
    }

    /// Largest eigenvalue (through `f64`).
    pub fn lambda_max(&self) -> f64 {
        *self.p.to_f64().sym_eigenvalues().last().unwrap_or(&0.0)
    }
}

impl CovarianceContext<Rational> {
    pub fn exact(p: Matrix<Rational>, opts: ContextOptions) -> Result<Self> {
        if !p.is_square() || p.rows() == 0 {
            return Err(Error::Dimension(format!(
                "{}x{} covariance",
                p.rows(),
                p.cols()
            )));
        }
        if !p.is_symmetric() {
            return Err(Error::NotSymmetric(
                "exact input must be symmetric entrywise".into(),
            ));
        }
        if opts.strict {
            // Sylvester: all leading principal minors positive.
            for k in 1..=p.rows() {
                let idx: Vec<usize> = (0..k).collect();
                if p.principal(&idx).det() <= Rational::zero() {
                    return Err(Error::NotPositiveDefinite);
                }
            }
        }
        Ok(Self::build(p, &opts, 0.0))
    }

    pub fn to_float(&self) -> CovarianceContext<f64> {
        let opts = ContextOptions {
            degree: self.powers.len() - 1,
            strict: false,
            max_power: self.max_power,
            ..Default::default()
        };
        CovarianceContext::build(self.p.to_f64(), &opts, 0.0)
    }
}

impl CovarianceContext<f64> {
    pub fn float(p: Matrix<f64>, opts: ContextOptions) -> Result<Self> {
        if !p.is_square() || p.rows() == 0 {
            return Err(Error::Dimension(format!(
                "{}x{} covariance",
                p.rows(),
                p.cols()
            )));
        }
        if p.entries().iter().any(|x| !x.is_finite()) {
            return Err(Error::Parse("non-finite covariance entry".into()));
        }
        let scale = p.max_abs().max(f64::MIN_POSITIVE);
        let asym = (&p - &p.transpose()).max_abs() / scale;
        if asym > opts.symmetry_tol {
            return Err(Error::NotSymmetric(format!("relative asymmetry {asym:e}")));
        }
        let p = p.symmetrize();
        if opts.strict && p.to_nalgebra().cholesky().is_none() {
            return Err(Error::NotPositiveDefinite);
        }
        Ok(Self::build(p, &opts, asym))
    }

    /// Lower Cholesky factor `L` with `P = L Lᵀ`.
    pub fn cholesky(&self) -> Result<Matrix<f64>> {
        let c = self
            .p
            .to_nalgebra()
            .cholesky()
            .ok_or(Error::NotPositiveDefinite)?;
        Ok(Matrix::from_nalgebra(&c.l()))
    }

    /// Symmetric square root through the eigendecomposition.
    pub fn sqrt(&self) -> Result<Matrix<f64>> {
        let e = self.p.to_nalgebra().symmetric_eigen();
        if e.eigenvalues.iter().any(|&l| l < 0.0) {
            return Err(Error::NotPositiveDefinite);
        }
        let d = nalgebra::DMatrix::from_diagonal(&e.eigenvalues.map(f64::sqrt));
        let s = &e.eigenvectors * d * e.eigenvectors.transpose();
        Ok(Matrix::from_nalgebra(&s))
    }
}

/// Parsed covariance input file.
#[derive(Clone, Debug)]
pub enum CovarianceInput {
    Exact(Matrix<Rational>),
    Float(Matrix<f64>),
}

impl CovarianceInput {
    /// `{"r": int, "entries": [[string|number]], "mode": "exact"|"float"}`
    pub fn from_json(v: &Value) -> Result<Self> {
        let bad = |m: &str| Error::Parse(format!("covariance: {m}"));
        let mode = v.get("mode").and_then(Value::as_str).unwrap_or("exact");
        let rows = v
            .get("entries")
            .and_then(Value::as_array)
            .ok_or_else(|| bad("missing entries"))?;
        let mut parsed: Vec<Vec<Rational>> = Vec::new();
        for row in rows {
            let row = row.as_array().ok_or_else(|| bad("entries must be rows"))?;
            let mut out = Vec::new();
            for x in row {
                out.push(match x {
                    Value::String(s) => parse_rational(s)?,
                    Value::Number(n) => parse_rational(&n.to_string())?,
                    _ => return Err(bad("entry must be a string or number")),
                });
            }
            parsed.push(out);
        }
        let m = Matrix::from_rows(parsed)?;
        if let Some(r) = v.get("r") {
            let r = r.as_u64().ok_or_else(|| bad("r must be an integer"))?;
            if r as usize != m.rows() || r as usize != m.cols() {
                return Err(Error::Dimension(format!(
                    "r = {r} but entries are {}x{}",
                    m.rows(),
                    m.cols()
                )));
            }
        }
        match mode {
            "exact" => Ok(CovarianceInput::Exact(m)),
            "float" => Ok(CovarianceInput::Float(m.to_f64())),
            other => Err(bad(&format!("unknown mode {other:?}"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{int, rat};

    fn ctx(d: &[i64]) -> CovarianceContext<Rational> {
        let d: Vec<Rational> = d.iter().map(|&x| int(x)).collect();
        CovarianceContext::exact(Matrix::diag(&d), ContextOptions::default()).unwrap()
    }

    #[test]
    fn monomial_eval() {
        let p = TracePolynomial::t(1) * TracePolynomial::t(1) * TracePolynomial::t(2)
            + TracePolynomial::constant(int(3));
        let c = ctx(&[1, 2]);
        assert_eq!(p.eval(&c).unwrap(), int(9 * 5 + 3));
        let m = TraceMonomial::from_indices(vec![2, 1, 1]);
        assert_eq!(m.exponents(), BTreeMap::from([(1, 2), (2, 1)]));
        assert_eq!(TracePolynomial::t(0).eval(&c).unwrap(), int(2));
    }

    #[test]
    fn cancellation_removes_terms() {
        let p = TracePolynomial::t(3) - TracePolynomial::t(3);
        assert!(p.is_zero());
        assert_eq!(p.to_json(), json!([]));
    }

    #[test]
    fn json_roundtrip() {
        let p = (TracePolynomial::t(1) * TracePolynomial::t(2)).scale(&rat(3, 2))
            + TracePolynomial::t(10);
        let back = TracePolynomial::from_json(&p.to_json()).unwrap();
        assert_eq!(back, p);
        let m = MatrixPolynomial::term(2, p.clone()).shift(1);
        assert_eq!(MatrixPolynomial::from_json(&m.to_json()).unwrap(), m);
    }

    #[test]
    fn matrix_poly_eval() {
        let c = ctx(&[1, 2]);
        let m = MatrixPolynomial::term(1, TracePolynomial::t(1));
        assert_eq!(m.eval(&c).unwrap(), Matrix::diag(&[int(3), int(6)]));
        assert_eq!(m.trace(), TracePolynomial::t(1) * TracePolynomial::t(1));
    }

    #[test]
    fn rejects_bad_inputs() {
        let ns = Matrix::from_rows(vec![vec![int(1), int(2)], vec![int(0), int(1)]]).unwrap();
        assert!(matches!(
            CovarianceContext::exact(ns, ContextOptions::default()),
            Err(Error::NotSymmetric(_))
        ));
        let indef = Matrix::diag(&[int(1), int(-1)]);
        assert_eq!(
            CovarianceContext::exact(indef, ContextOptions::default()).unwrap_err(),
            Error::NotPositiveDefinite
        );
        let f = Matrix::from_rows(vec![vec![1.0, 0.5 + 1e-15], vec![0.5, 1.0]]).unwrap();
        let c = CovarianceContext::float(f, ContextOptions::default()).unwrap();
        assert!(c.asymmetry() > 0.0);
        assert_eq!(c.matrix()[(0, 1)], c.matrix()[(1, 0)]);
    }

    #[test]
    fn float_sqrt_and_cholesky() {
        let p = Matrix::from_rows(vec![vec![2.0, 1.0], vec![1.0, 2.0]]).unwrap();
        let c = CovarianceContext::float(p.clone(), ContextOptions::default()).unwrap();
        let s = c.sqrt().unwrap();
        assert!((&(&s * &s) - &p).max_abs() < 1e-12);
        let l = c.cholesky().unwrap();
        assert!((&(&l * &l.transpose()) - &p).max_abs() < 1e-12);
    }

    #[test]
    fn covariance_json() {
        let v = json!({"r": 2, "entries": [["1", "1/2"], [0.5, 2]], "mode": "exact"});
        match CovarianceInput::from_json(&v).unwrap() {
            CovarianceInput::Exact(m) => assert_eq!(m[(0, 1)], rat(1, 2)),
            _ => panic!(),
        }
        let bad = json!({"r": 3, "entries": [["1"]]});
        assert!(CovarianceInput::from_json(&bad).is_err());
    }
}
