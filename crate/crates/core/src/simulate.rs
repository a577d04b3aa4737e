//! One-walk and median-of-averages estimators plus the replication
//! harness used to check coverage and MSE against the certified bounds.
//!
//! Replication `j` of an experiment seeded with `seed` draws from the
//! stream `stream_seed(seed, j)`; run `k` of a median-of-averages estimate
//! seeded with `s` uses `stream_seed(s, k)`. Results are collected in index
//! order, so they do not depend on the number of worker threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::models::ChainModel;
use crate::numeric::{wilson_interval, CompensatedSum, WilsonInterval, Z_95};

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of sub-stream `index` under `master`:
/// `splitmix64(splitmix64(master) ^ index)`.
pub fn stream_seed(master: u64, index: u64) -> u64 {
    splitmix64(splitmix64(master) ^ index)
}

/// `(1/n) sum_{i=t}^{t+n-1} f(X_i)` along one trajectory from the model's
/// starting state, with randomness seeded by `seed`.
pub fn run_one_walk<M: ChainModel>(model: &M, t: u64, n: u64, seed: u64) -> Result<f64> {
    if n == 0 {
        return domain("run length n must be at least 1");
    }
    let end = t.checked_add(n).ok_or_else(|| crate::Error::Domain("t + n overflows".into()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x = model.initial_state();
    for _ in 0..t {
        x = model.step(&x, &mut rng);
    }
    let mut sum = CompensatedSum::new();
    for i in t..end {
        sum.add(model.f(&x));
        if i + 1 < end {
            x = model.step(&x, &mut rng);
        }
    }
    Ok(sum.value() / n as f64)
}

/// Median of a slice with an odd number of finite entries.
pub fn median(values: &mut [f64]) -> f64 {
    assert!(values.len() % 2 == 1, "median of an even-length slice");
    let mid = values.len() / 2;
    let (_, m, _) = values.select_nth_unstable_by(mid, f64::total_cmp);
    *m
}

/// Median of `m` independent one-walk estimates.
pub fn run_ma<M: ChainModel>(model: &M, t: u64, n: u64, m: u64, seed: u64) -> Result<f64> {
    if m == 0 || m.is_multiple_of(2) {
        return domain(format!("number of runs m must be odd, got {m}"));
    }
    let mut runs = (0..m)
        .map(|k| run_one_walk(model, t, n, stream_seed(seed, k)))
        .collect::<Result<Vec<_>>>()?;
    Ok(median(&mut runs))
}

fn replicate<M: ChainModel>(model: &M, t: u64, n: u64, m: u64, reps: u64, seed: u64) -> Result<Vec<f64>> {
    if reps == 0 {
        return domain("reps must be at least 1");
    }
    (0..reps)
        .into_par_iter()
        .map(|j| run_ma(model, t, n, m, stream_seed(seed, j)))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoverageReport {
    pub hits: u64,
    pub reps: u64,
    pub coverage: f64,
    /// 95% Wilson interval for the coverage probability.
    pub wilson: WilsonInterval,
}

impl CoverageReport {
    /// `coverage >= target - 3 * half_width`.
    pub fn consistent_with(&self, target: f64) -> bool {
        self.coverage >= target - 3.0 * self.wilson.half_width()
    }
}

/// Fraction of `reps` independent estimates within `eps` of the true value.
pub fn coverage_experiment<M: ChainModel>(
    model: &M,
    t: u64,
    n: u64,
    m: u64,
    eps: f64,
    reps: u64,
    seed: u64,
) -> Result<CoverageReport> {
    let Some(exact) = model.exact_i() else {
        return domain("coverage needs the exact value of pi f");
    };
    if !(eps >= 0.0) {
        return domain(format!("eps must be nonnegative, got {eps}"));
    }
    let estimates = replicate(model, t, n, m, reps, seed)?;
    let hits = estimates.iter().filter(|&&e| (e - exact).abs() <= eps).count() as u64;
    Ok(CoverageReport {
        hits,
        reps,
        coverage: hits as f64 / reps as f64,
        wilson: wilson_interval(hits, reps, Z_95),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MseEstimate {
    pub mse: f64,
    /// Standard error of the mean of the squared deviations.
    pub std_error: f64,
    pub reps: u64,
}

/// Mean squared deviation of one-walk estimates from the true value.
pub fn empirical_mse<M: ChainModel>(model: &M, t: u64, n: u64, reps: u64, seed: u64) -> Result<MseEstimate> {
    let Some(exact) = model.exact_i() else {
        return domain("MSE needs the exact value of pi f");
    };
    let sq: Vec<f64> = replicate(model, t, n, 1, reps, seed)?
        .into_iter()
        .map(|e| (e - exact) * (e - exact))
        .collect();
    let mut sum = CompensatedSum::new();
    sq.iter().for_each(|&s| sum.add(s));
    let mse = sum.value() / reps as f64;
    let var = if reps > 1 {
        sq.iter().map(|s| (s - mse).powi(2)).sum::<f64>() / (reps - 1) as f64
    } else {
        0.0
    };
    Ok(MseEstimate { mse, std_error: (var / reps as f64).sqrt(), reps })
}
