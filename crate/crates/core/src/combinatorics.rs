//! Permutations in cycle form, injections, weak compositions, extended
//! binomial coefficients and complete Bell polynomials.
//!
//! All index sets are 0-based: a permutation of size n acts on {0, …, n−1}
//! and its distinguished element is n−1.

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::limits::Limits;
use crate::scalar::{Rational, Ring};

/// A weak composition / moment word `v = (v_1, …, v_m)`.
pub type MultiIndex = Vec<u32>;

pub fn factorial(n: u64) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * k)
}

/// `(m)_k = m (m−1) ⋯ (m−k+1)`, zero when k > m.
pub fn falling(m: u64, k: u64) -> BigInt {
    if k > m {
        return BigInt::zero();
    }
    (0..k).fold(BigInt::one(), |acc, i| acc * (m - i))
}

pub fn binomial(n: u64, k: u64) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    (0..k).fold(BigInt::one(), |acc, i| acc * (n - i) / (i + 1))
}

pub fn binomial_q(n: u64, k: u64) -> Rational {
    Rational::from_integer(binomial(n, k))
}

/// Permutation in canonical cycle form: every cycle starts with its largest
/// element, and cycles are ordered by increasing largest element. Fixed points
/// appear as singleton cycles. A cycle `[c0, c1, …]` means σ(c0) = c1, σ(c1) = c2, ….
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CycleDecomposition {
    n: usize,
    cycles: Vec<Vec<usize>>,
}

impl CycleDecomposition {
    /// From one-line notation, `image[i] = σ(i)`.
    pub fn from_one_line(image: &[usize]) -> Result<Self> {
        let n = image.len();
        let mut seen = vec![false; n];
        for &x in image {
            if x >= n || seen[x] {
                return Err(Error::OutOfRange(format!("{image:?} is not a permutation")));
            }
            seen[x] = true;
        }
        let mut visited = vec![false; n];
        let mut cycles = Vec::new();
        // Scanning starts from the largest unvisited element so that each
        // cycle begins with its maximum.
        for start in (0..n).rev() {
            if visited[start] {
                continue;
            }
            let mut cycle = vec![start];
            visited[start] = true;
            let mut x = image[start];
            while x != start {
                visited[x] = true;
                cycle.push(x);
                x = image[x];
            }
            cycles.push(cycle);
        }
        cycles.reverse();
        Ok(CycleDecomposition { n, cycles })
    }

    /// From arbitrary disjoint cycles covering {0, …, n−1}; the result is canonical.
    pub fn from_cycles(n: usize, cycles: &[Vec<usize>]) -> Result<Self> {
        let mut image: Vec<Option<usize>> = vec![None; n];
        for c in cycles {
            for (i, &x) in c.iter().enumerate() {
                let y = c[(i + 1) % c.len()];
                if x >= n || image[x].is_some() {
                    return Err(Error::OutOfRange(format!("bad cycle list {cycles:?}")));
                }
                image[x] = Some(y);
            }
        }
        let image: Option<Vec<usize>> = image.into_iter().collect();
        let image = image.ok_or_else(|| Error::OutOfRange("cycles do not cover 0..n".into()))?;
        Self::from_one_line(&image)
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn cycles(&self) -> &[Vec<usize>] {
        &self.cycles
    }

    pub fn num_cycles(&self) -> usize {
        self.cycles.len()
    }

    pub fn to_one_line(&self) -> Vec<usize> {
        let mut image = vec![0; self.n];
        for c in &self.cycles {
            for (i, &x) in c.iter().enumerate() {
                image[x] = c[(i + 1) % c.len()];
            }
        }
        image
    }

    pub fn inverse(&self) -> Self {
        let image = self.to_one_line();
        let mut inv = vec![0; self.n];
        for (i, &x) in image.iter().enumerate() {
            inv[x] = i;
        }
        Self::from_one_line(&inv).expect("inverse of a permutation")
    }

    /// Index of the cycle containing `i`.
    pub fn cycle_index_of(&self, i: usize) -> Option<usize> {
        self.cycles.iter().position(|c| c.contains(&i))
    }

    /// The cycle containing `i` together with the rooted remainder: the
    /// elements following `i` in cycle order, starting at σ(i) and ending at
    /// σ⁻¹(i). For a fixed point the remainder is empty.
    pub fn distinguished_cycle(&self, i: usize) -> Result<(Vec<usize>, Vec<usize>)> {
        let ci = self
            .cycle_index_of(i)
            .ok_or_else(|| Error::OutOfRange(format!("{i} not in 0..{}", self.n)))?;
        let c = &self.cycles[ci];
        let p = c.iter().position(|&x| x == i).unwrap();
        let rooted = c[p + 1..].iter().chain(&c[..p]).copied().collect();
        Ok((c.clone(), rooted))
    }
}

impl std::fmt::Display for CycleDecomposition {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "[")?;
        for (k, c) in self.cycles.iter().enumerate() {
            if k > 0 {
                write!(f, " ")?;
            }
            let s: Vec<String> = c.iter().map(|x| x.to_string()).collect();
            write!(f, "({})", s.join(" "))?;
        }
        write!(f, "]")
    }
}

/// One-line permutations of {0, …, n−1} in lexicographic order.
pub struct OneLinePermutations {
    next: Option<Vec<usize>>,
}

impl Iterator for OneLinePermutations {
    type Item = Vec<usize>;
    fn next(&mut self) -> Option<Vec<usize>> {
        let cur = self.next.take()?;
        let mut p = cur.clone();
        // Standard next-permutation step.
        if let Some(i) = (0..p.len().saturating_sub(1))
            .rev()
            .find(|&i| p[i] < p[i + 1])
        {
            let j = (i + 1..p.len()).rev().find(|&j| p[j] > p[i]).unwrap();
            p.swap(i, j);
            p[i + 1..].reverse();
            self.next = Some(p);
        }
        Some(cur)
    }
}

pub fn one_line_permutations(n: usize, limits: &Limits) -> Result<OneLinePermutations> {
    Limits::check("permutation size", n, limits.max_perm_n)?;
    Ok(OneLinePermutations {
        next: Some((0..n).collect()),
    })
}

/// All n! permutations in canonical cycle form, in lexicographic order of
/// their one-line notation.
pub fn enumerate_permutations(
    n: usize,
    limits: &Limits,
) -> Result<impl Iterator<Item = CycleDecomposition>> {
    Ok(one_line_permutations(n, limits)?
        .map(|p| CycleDecomposition::from_one_line(&p).expect("valid permutation")))
}

/// Injections {0..m} → {0..n} as image vectors, lexicographic.
pub fn enumerate_injections(m: usize, n: usize, limits: &Limits) -> Result<Vec<Vec<usize>>> {
    Limits::check("injection codomain", n, limits.max_injection_n)?;
    let mut out = Vec::new();
    if m > n {
        return Ok(out);
    }
    let mut cur = Vec::with_capacity(m);
    let mut used = vec![false; n];
    fn rec(m: usize, cur: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if cur.len() == m {
            out.push(cur.clone());
            return;
        }
        for x in 0..used.len() {
            if !used[x] {
                used[x] = true;
                cur.push(x);
                rec(m, cur, used, out);
                cur.pop();
                used[x] = false;
            }
        }
    }
    rec(m, &mut cur, &mut used, &mut out);
    Ok(out)
}

/// k-element subsets of {0..n} as increasing vectors, lexicographic.
pub fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for x in start..n {
            if n - x < k - cur.len() {
                break;
            }
            cur.push(x);
            rec(x + 1, n, k, cur, out);
            cur.pop();
        }
    }
    rec(0, n, k, &mut cur, &mut out);
    out
}

/// `V_{m,n}`: length-m vectors of non-negative integers summing to n, in
/// lexicographic order. `V_{0,0} = {()}` and `V_{0,n} = ∅` for n > 0.
pub fn compositions(m: usize, n: u32) -> Vec<MultiIndex> {
    let mut out = Vec::new();
    if m == 0 {
        if n == 0 {
            out.push(Vec::new());
        }
        return out;
    }
    let mut cur = Vec::with_capacity(m);
    fn rec(m: usize, left: u32, cur: &mut MultiIndex, out: &mut Vec<MultiIndex>) {
        if cur.len() + 1 == m {
            cur.push(left);
            out.push(cur.clone());
            cur.pop();
            return;
        }
        for x in 0..=left {
            cur.push(x);
            rec(m, left - x, cur, out);
            cur.pop();
        }
    }
    rec(m, n, &mut cur, &mut out);
    out
}

/// Ordered compositions of n into positive parts, i.e. the gaps of the
/// increasing sequences 0 = k_0 < k_1 < … < k_p = n.
pub fn positive_compositions(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    (0u64..1 << (n - 1))
        .map(|mask| {
            let mut parts = Vec::new();
            let mut run = 1;
            for b in 0..n - 1 {
                if mask >> b & 1 == 1 {
                    parts.push(run);
                    run = 1;
                } else {
                    run += 1;
                }
            }
            parts.push(run);
            parts
        })
        .collect()
}

/// Extended binomial coefficient `Σ_{v ∈ V_{m,n}} s_{v_1} ⋯ s_{v_m}`, by the
/// recursion on the last entry. Needs `s[0..=n]`.
pub fn extended_binomial<R: Ring>(s: &[R], m: usize, n: usize) -> R {
    // row[j] = value for (current length, j)
    let mut row: Vec<R> = (0..=n)
        .map(|j| if j == 0 { R::one() } else { R::zero() })
        .collect();
    for _ in 0..m {
        let mut next = vec![R::zero(); n + 1];
        for (j, slot) in next.iter_mut().enumerate() {
            let mut acc = R::zero();
            for i in 0..=j {
                if !row[j - i].is_zero() {
                    acc = acc + s[i].clone() * row[j - i].clone();
                }
            }
            *slot = acc;
        }
        row = next;
    }
    row[n].clone()
}

/// Complete Bell polynomial `B_n(b_1, …, b_n)` via
/// `B_{n+1} = Σ_k C(n,k) b_{k+1} B_{n−k}`. `b[0]` holds b_1.
pub fn complete_bell_recursive<R: Ring>(b: &[R], n: usize) -> R {
    let mut bell = vec![R::one()];
    for m in 0..n {
        let mut acc = R::zero();
        for k in 0..=m {
            acc = acc + (b[k].clone() * bell[m - k].clone()).scale(&binomial_q(m as u64, k as u64));
        }
        bell.push(acc);
    }
    bell[n].clone()
}

/// Complete Bell polynomial from the sum over increasing sequences
/// `0 = k_0 < … < k_p = n` of `n! ∏_l b_{k_l−k_{l−1}} / (k_l (k_l−k_{l−1}−1)!)`.
pub fn complete_bell_explicit<R: Ring>(b: &[R], n: usize) -> R {
    let nf = Rational::from_integer(factorial(n as u64));
    let mut total = R::zero();
    for parts in positive_compositions(n) {
        let mut k = 0usize;
        let mut coeff = nf.clone();
        let mut prod = R::one();
        for &d in &parts {
            k += d;
            coeff /= Rational::from_integer(BigInt::from(k) * factorial(d as u64 - 1));
            prod = prod * b[d - 1].clone();
        }
        total = total + prod.scale(&coeff);
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::int;

    #[test]
    fn counts_and_order() {
        let l = Limits::default();
        let perms: Vec<_> = enumerate_permutations(3, &l).unwrap().collect();
        assert_eq!(perms.len(), 6);
        assert_eq!(perms[0].num_cycles(), 3);
        assert_eq!(compositions(2, 2), vec![vec![0, 2], vec![1, 1], vec![2, 0]]);
        assert_eq!(compositions(0, 0), vec![Vec::<u32>::new()]);
        assert!(compositions(0, 1).is_empty());
        assert_eq!(enumerate_injections(2, 3, &l).unwrap().len(), 6);
        assert_eq!(
            enumerate_injections(0, 3, &l).unwrap(),
            vec![Vec::<usize>::new()]
        );
        assert_eq!(subsets(4, 2).len(), 6);
    }

    #[test]
    fn canonical_form() {
        // σ = (2 0 1): σ(2)=0, σ(0)=1, σ(1)=2
        let s = CycleDecomposition::from_cycles(3, &[vec![0, 1, 2]]).unwrap();
        assert_eq!(s.cycles(), &[vec![2, 0, 1]]);
        let (c, rooted) = s.distinguished_cycle(2).unwrap();
        assert_eq!(c, vec![2, 0, 1]);
        assert_eq!(rooted, vec![0, 1]);
        let t = CycleDecomposition::from_cycles(2, &[vec![0, 1]]).unwrap();
        assert_eq!(t.to_string(), "[(1 0)]");
        assert_eq!(t.distinguished_cycle(1).unwrap(), (vec![1, 0], vec![0]));
        let id = CycleDecomposition::from_one_line(&[0, 1, 2]).unwrap();
        assert_eq!(id.distinguished_cycle(2).unwrap().1, Vec::<usize>::new());
    }

    #[test]
    fn guard_limit() {
        let l = Limits::default();
        assert!(matches!(
            enumerate_permutations(11, &l).map(|_| ()),
            Err(Error::GuardLimit { .. })
        ));
        assert!(enumerate_injections(2, 13, &l).is_err());
    }

    #[test]
    fn bell_small() {
        let b = vec![int(1), int(2), int(8)];
        assert_eq!(complete_bell_recursive(&b, 3), int(15));
        assert_eq!(complete_bell_explicit(&b, 3), int(15));
        assert_eq!(complete_bell_recursive(&b, 0), int(1));
    }

    #[test]
    fn extended_binomial_with_ones_is_binomial() {
        let ones = vec![int(1); 8];
        for m in 1..6 {
            for n in 0..6 {
                assert_eq!(
                    extended_binomial(&ones, m, n),
                    binomial_q((m + n - 1) as u64, n as u64)
                );
            }
        }
    }

    #[test]
    fn falling_factorials() {
        assert_eq!(falling(5, 2), BigInt::from(20));
        assert_eq!(falling(3, 4), BigInt::zero());
        assert_eq!(falling(0, 0), BigInt::one());
        assert_eq!(binomial(6, 3), BigInt::from(20));
    }
}
