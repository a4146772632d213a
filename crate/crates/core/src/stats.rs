//! Summary statistics, log-log regression and bootstrap intervals.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Unbiased sample variance (0 for fewer than two samples).
pub fn variance(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() - 1) as f64
}

/// Least-squares line y = a + b x; returns (a, b).
pub fn linear_fit(x: &[f64], y: &[f64]) -> Result<(f64, f64)> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::InvalidParameter("fit needs at least two paired points".into()));
    }
    let mx = mean(x);
    let my = mean(y);
    let sxx: f64 = x.iter().map(|v| (v - mx) * (v - mx)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidParameter("fit abscissae are all equal".into()));
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let b = sxy / sxx;
    Ok((my - b * mx, b))
}

/// Slope and prefactor of y = A x^k from a fit in log space.
pub fn log_log_fit(x: &[f64], y: &[f64]) -> Result<(f64, f64)> {
    if x.iter().chain(y).any(|v| !(*v > 0.0)) {
        return Err(Error::InvalidParameter("log-log fit needs positive data".into()));
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let (a, k) = linear_fit(&lx, &ly)?;
    Ok((k, a.exp()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub low: f64,
    pub high: f64,
}

/// Percentile bootstrap of the log-log slope: each resample redraws the
/// samples behind every point and refits the means.
pub fn bootstrap_log_log_slope(x: &[f64], samples: &[Vec<f64>], resamples: usize, seed: u64) -> Result<Interval> {
    if x.len() != samples.len() || resamples == 0 {
        return Err(Error::InvalidParameter("bootstrap needs one sample set per point".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut slopes = Vec::with_capacity(resamples);
    let mut means = vec![0.0; x.len()];
    for _ in 0..resamples {
        for (m, s) in means.iter_mut().zip(samples) {
            if s.is_empty() {
                return Err(Error::InvalidParameter("empty sample set".into()));
            }
            let total: f64 = (0..s.len()).map(|_| s[rng.random_range(0..s.len())]).sum();
            *m = total / s.len() as f64;
        }
        if let Ok((k, _)) = log_log_fit(x, &means) {
            slopes.push(k);
        }
    }
    if slopes.is_empty() {
        return Err(Error::InvalidParameter("no resample gave a positive fit".into()));
    }
    slopes.sort_by(f64::total_cmp);
    let pick = |q: f64| slopes[((q * (slopes.len() - 1) as f64).round() as usize).min(slopes.len() - 1)];
    Ok(Interval { low: pick(0.025), high: pick(0.975) })
}

/// Counts over `bins` equal bins spanning [lo, hi]; values outside are
/// clamped into the end bins.
pub fn histogram(xs: &[f64], lo: f64, hi: f64, bins: usize) -> Vec<usize> {
    let mut h = vec![0; bins.max(1)];
    let n = h.len();
    let width = (hi - lo) / n as f64;
    for &x in xs {
        let k = if width > 0.0 { ((x - lo) / width).floor() } else { 0.0 };
        let k = if k.is_nan() { 0 } else { (k.max(0.0) as usize).min(n - 1) };
        h[k] += 1;
    }
    h
}
