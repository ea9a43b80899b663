//! Monte Carlo estimates of `M(v)` with reproducible, thread-count
//! independent results.
//!
//! Sample `i` draws its normals from a ChaCha8 stream keyed by `(seed, i)`,
//! turned into Gaussians by the Box–Muller transform. Samples are grouped in
//! fixed blocks whose partial statistics are merged in index order, so the
//! result depends only on `(samples, seed)`.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::trace_algebra::CovarianceContext;

const BLOCK: u64 = 4096;

#[derive(Clone, Debug)]
pub struct McConfig {
    pub samples: u64,
    pub seed: u64,
    /// Blocks handed to a worker at a time; does not affect the result.
    pub batch: usize,
    /// Worker threads; `None` uses the global pool. Does not affect the result.
    pub threads: Option<usize>,
}

impl Default for McConfig {
    fn default() -> Self {
        McConfig {
            samples: 100_000,
            seed: 0,
            batch: 4,
            threads: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct McEstimate {
    pub mean: Matrix<f64>,
    pub stderr: Matrix<f64>,
    pub samples: u64,
}

impl McEstimate {
    /// Largest `|mean − exact| / stderr` over entries; entries with zero
    /// standard error must match to within `1e-12` relative.
    pub fn max_sigma(&self, exact: &Matrix<f64>) -> f64 {
        let scale = exact.max_abs().max(1.0);
        let mut worst: f64 = 0.0;
        for ((m, s), e) in self
            .mean
            .entries()
            .iter()
            .zip(self.stderr.entries())
            .zip(exact.entries())
        {
            let d = (m - e).abs();
            let z = if *s > 0.0 {
                d / s
            } else if d <= 1e-12 * scale {
                0.0
            } else {
                f64::INFINITY
            };
            worst = worst.max(z);
        }
        worst
    }
}

/// Running mean and centred second moment per entry.
#[derive(Clone, Debug)]
struct Stats {
    count: u64,
    mean: Vec<f64>,
    m2: Vec<f64>,
}

impl Stats {
    fn new(len: usize) -> Self {
        Stats {
            count: 0,
            mean: vec![0.0; len],
            m2: vec![0.0; len],
        }
    }

    fn push(&mut self, x: &[f64]) {
        self.count += 1;
        let n = self.count as f64;
        for ((m, s), &xi) in self.mean.iter_mut().zip(self.m2.iter_mut()).zip(x) {
            let d = xi - *m;
            *m += d / n;
            *s += d * (xi - *m);
        }
    }

    fn merge(mut self, other: &Stats) -> Stats {
        if other.count == 0 {
            return self;
        }
        if self.count == 0 {
            return other.clone();
        }
        let (na, nb) = (self.count as f64, other.count as f64);
        let n = na + nb;
        for i in 0..self.mean.len() {
            let d = other.mean[i] - self.mean[i];
            self.mean[i] += d * nb / n;
            self.m2[i] += other.m2[i] + d * d * na * nb / n;
        }
        self.count += other.count;
        self
    }
}

fn uniform_open(rng: &mut ChaCha8Rng) -> f64 {
    // (0, 1]: never zero so the logarithm stays finite
    ((rng.next_u64() >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Standard normal draws for sample `index`.
fn normals(key: &[u8; 32], index: u64, out: &mut [f64]) {
    let mut rng = ChaCha8Rng::from_seed(*key);
    rng.set_stream(index);
    let mut i = 0;
    while i < out.len() {
        let u1 = uniform_open(&mut rng);
        let u2 = uniform_open(&mut rng);
        let rad = (-2.0 * u1.ln()).sqrt();
        let ang = std::f64::consts::TAU * u2;
        out[i] = rad * ang.cos();
        if i + 1 < out.len() {
            out[i + 1] = rad * ang.sin();
        }
        i += 2;
    }
}

fn seed_key(seed: u64) -> [u8; 32] {
    let mut key = [0u8; 32];
    ChaCha8Rng::seed_from_u64(seed).fill_bytes(&mut key);
    key
}

/// Monte Carlo estimate of `M(v)` at a float covariance.
pub fn monte_carlo_moment(
    ctx: &CovarianceContext<f64>,
    v: &[u32],
    cfg: &McConfig,
) -> Result<McEstimate> {
    if v.is_empty() {
        return Err(Error::OutOfRange(
            "Monte Carlo needs a non-empty word".into(),
        ));
    }
    if cfg.samples < 2 {
        return Err(Error::OutOfRange("need at least two samples".into()));
    }
    let r = ctx.dim();
    let l = ctx.cholesky()?;
    let powers: Vec<Matrix<f64>> = v
        .iter()
        .map(|&k| ctx.power(k).map(|m| m.into_owned()))
        .collect::<Result<_>>()?;
    let key = seed_key(cfg.seed);
    let blocks = cfg.samples.div_ceil(BLOCK);

    let run_block = |b: u64| -> Stats {
        let mut stats = Stats::new(r * r);
        let mut z = vec![0.0; r];
        let mut sample = vec![0.0; r * r];
        let lo = b * BLOCK;
        let hi = (lo + BLOCK).min(cfg.samples);
        for i in lo..hi {
            normals(&key, i, &mut z);
            let x = l.mat_vec(&z);
            // 𝒳P^{v_1}⋯𝒳P^{v_m} = (∏_{i<m} xᵀP^{v_i}x) · x (P^{v_m} x)ᵀ
            let mut scalar = 1.0;
            for p in &powers[..powers.len() - 1] {
                let px = p.mat_vec(&x);
                scalar *= x.iter().zip(&px).map(|(a, b)| a * b).sum::<f64>();
            }
            let y = powers[powers.len() - 1].mat_vec(&x);
            for a in 0..r {
                for c in 0..r {
                    sample[a * r + c] = 0.5 * scalar * (x[a] * y[c] + x[c] * y[a]);
                }
            }
            stats.push(&sample);
        }
        stats
    };

    let compute = || -> Vec<Stats> {
        (0..blocks as usize)
            .into_par_iter()
            .with_min_len(cfg.batch.max(1))
            .map(|b| run_block(b as u64))
            .collect()
    };
    let parts = match cfg.threads {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| Error::OutOfRange(format!("thread pool: {e}")))?
            .install(compute),
        None => compute(),
    };
    let total = parts.iter().fold(Stats::new(r * r), |acc, s| acc.merge(s));
    let n = total.count as f64;
    let mean = Matrix::from_fn(r, r, |a, c| total.mean[a * r + c]);
    let stderr = Matrix::from_fn(r, r, |a, c| (total.m2[a * r + c] / (n - 1.0) / n).sqrt());
    Ok(McEstimate {
        mean,
        stderr,
        samples: total.count,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trace_algebra::ContextOptions;

    fn ctx() -> CovarianceContext<f64> {
        CovarianceContext::float(Matrix::diag(&[1.0, 2.0]), ContextOptions::default()).unwrap()
    }

    #[test]
    fn normals_look_standard() {
        let key = seed_key(7);
        let mut z = [0.0; 2];
        let (mut s1, mut s2) = (0.0, 0.0);
        let n = 20_000;
        for i in 0..n {
            normals(&key, i, &mut z);
            s1 += z[0] + z[1];
            s2 += z[0] * z[0] + z[1] * z[1];
        }
        let m = s1 / (2 * n) as f64;
        let v = s2 / (2 * n) as f64;
        assert!(m.abs() < 0.03 && (v - 1.0).abs() < 0.03, "{m} {v}");
    }

    #[test]
    fn independent_of_threads_and_batch() {
        let a = monte_carlo_moment(
            &ctx(),
            &[0, 1],
            &McConfig {
                samples: 10_000,
                seed: 3,
                batch: 1,
                threads: Some(1),
            },
        )
        .unwrap();
        let b = monte_carlo_moment(
            &ctx(),
            &[0, 1],
            &McConfig {
                samples: 10_000,
                seed: 3,
                batch: 7,
                threads: Some(3),
            },
        )
        .unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn first_moment_is_p() {
        let est = monte_carlo_moment(
            &ctx(),
            &[0],
            &McConfig {
                samples: 50_000,
                seed: 1,
                ..Default::default()
            },
        )
        .unwrap();
        assert!(est.max_sigma(&Matrix::diag(&[1.0, 2.0])) < 5.0);
    }
}
