//! Seeded simulation of the correlation coefficient.
//!
//! A run is split into `partitions` blocks. Block `i` draws from a ChaCha8
//! generator seeded with the master seed on stream `i`, so the output depends
//! only on `(seed, samples, partitions)` and not on the thread count.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::density::{Scenario, MIN_SAMPLE_SIZE};
use crate::error::{domain, Result};
use crate::real::Real;
use crate::sld::{Method, TailEstimate};

pub const DEFAULT_PARTITIONS: usize = 8;

/// Redraws allowed for a degenerate (zero-variance) sample.
const MAX_REDRAWS: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate<T> {
    pub p_hat: T,
    pub std_err: T,
    pub hits: u64,
    pub samples: u64,
    pub seed: u64,
    pub partitions: usize,
}

impl<T: Real> McEstimate<T> {
    /// Log-domain view; `log_error` is the delta-method error `std_err / p̂`.
    pub fn to_tail_estimate(&self) -> TailEstimate<T> {
        TailEstimate {
            log_prob: self.p_hat.ln(),
            method: Method::MonteCarlo,
            leading_exponent: None,
            log_prefactor: None,
            log_error: Some(self.std_err / self.p_hat),
        }
    }
}

fn check_size(n: usize) -> Result<()> {
    if n < MIN_SAMPLE_SIZE {
        return domain(format!("sample size must be at least {MIN_SAMPLE_SIZE}, got {n}"));
    }
    Ok(())
}

/// One draw of the coefficient from `n` pairs.
pub fn sample_coefficient<T: Real, R: Rng + ?Sized>(s: Scenario<T>, n: usize, rng: &mut R) -> Result<T> {
    s.validate()?;
    check_size(n)?;
    let rho = s.rho().as_f64();
    let tail = (1.0 - rho * rho).sqrt();
    let centered = !s.is_known_mean();
    for _ in 0..MAX_REDRAWS {
        // Co-moment updates keep the centred sums stable in one pass.
        let (mut mx, mut my) = (0.0f64, 0.0f64);
        let (mut sxx, mut syy, mut sxy) = (0.0f64, 0.0f64, 0.0f64);
        for i in 0..n {
            let x: f64 = rng.sample(StandardNormal);
            let z: f64 = rng.sample(StandardNormal);
            let y = rho * x + tail * z;
            if centered {
                let k = (i + 1) as f64;
                let dx = x - mx;
                mx += dx / k;
                let dy = y - my;
                my += dy / k;
                sxx += dx * (x - mx);
                syy += dy * (y - my);
                sxy += dx * (y - my);
            } else {
                sxx += x * x;
                syy += y * y;
                sxy += x * y;
            }
        }
        if sxx > 0.0 && syy > 0.0 {
            return Ok(T::lit((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0)));
        }
    }
    domain(format!("{MAX_REDRAWS} consecutive degenerate samples"))
}

fn partition_sizes(samples: u64, partitions: usize) -> impl Iterator<Item = (usize, u64)> {
    let p = partitions as u64;
    (0..partitions).map(move |i| (i, samples / p + u64::from((i as u64) < samples % p)))
}

fn partition_rng(seed: u64, partition: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(partition as u64);
    rng
}

fn check_partitions(partitions: usize) -> Result<()> {
    if partitions == 0 {
        return domain("partition count must be positive".to_string());
    }
    Ok(())
}

/// `count` draws, concatenated in partition order.
pub fn sample_coefficients<T: Real>(
    s: Scenario<T>,
    n: usize,
    count: u64,
    seed: u64,
    partitions: usize,
) -> Result<Vec<T>> {
    check_partitions(partitions)?;
    let blocks: Result<Vec<Vec<T>>> = partition_sizes(count, partitions)
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|(i, size)| {
            let mut rng = partition_rng(seed, i);
            (0..size).map(|_| sample_coefficient(s, n, &mut rng)).collect()
        })
        .collect();
    Ok(blocks?.into_iter().flatten().collect())
}

/// Monte Carlo estimate of `P(R_n >= c)` with [`DEFAULT_PARTITIONS`] blocks.
pub fn tail_mc<T: Real>(s: Scenario<T>, n: usize, c: T, samples: u64, seed: u64) -> Result<McEstimate<T>> {
    tail_mc_partitioned(s, n, c, samples, seed, DEFAULT_PARTITIONS)
}

/// Monte Carlo estimate of `P(R_n >= c)`; blocks run on the rayon pool.
pub fn tail_mc_partitioned<T: Real>(
    s: Scenario<T>,
    n: usize,
    c: T,
    samples: u64,
    seed: u64,
    partitions: usize,
) -> Result<McEstimate<T>> {
    s.validate()?;
    check_size(n)?;
    check_partitions(partitions)?;
    if samples == 0 {
        return domain("sample count must be positive".to_string());
    }
    let counts: Result<Vec<u64>> = partition_sizes(samples, partitions)
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|(i, size)| {
            let mut rng = partition_rng(seed, i);
            let mut hits = 0u64;
            for _ in 0..size {
                if sample_coefficient(s, n, &mut rng)? >= c {
                    hits += 1;
                }
            }
            Ok(hits)
        })
        .collect();
    let hits: u64 = counts?.iter().sum();
    let p = hits as f64 / samples as f64;
    Ok(McEstimate {
        p_hat: T::lit(p),
        std_err: T::lit((p * (1.0 - p) / samples as f64).sqrt()),
        hits,
        samples,
        seed,
        partitions,
    })
}
