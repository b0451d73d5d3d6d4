//! Truncated Fourier series of the saw-tooth over the octant, and the
//! annulus histogram that controls the truncation tail.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{check_t, octant_limit, psi_sum};
use crate::numeric::{frac_sqrt, isqrt, phase_of, CompensatedSum};

/// Rows of the octant handled by one parallel task. Fixed so that the
/// reduction order never depends on the worker count.
const CHUNK: u64 = 4096;

/// Exponent slack used by the truncation-tail envelope `t^(1/2 + eps) / R`.
pub const TAIL_EPSILON: f64 = 0.01;

/// Frozen ceiling for [`tail_bound_check`] ratios over
/// `t in [10^3, 10^10]`, `R in [t^(1/8), t^(1/4)]`.
pub const TAIL_RATIO_THRESHOLD: f64 = 10.0;

fn check_truncation(t: u64, big_r: u64) -> Result<()> {
    check_t(t)?;
    if big_r == 0 || big_r > isqrt(t).max(1) {
        return Err(Error::Precondition(format!(
            "truncation R = {big_r} must satisfy 1 <= R <= sqrt(t) for t = {t}"
        )));
    }
    Ok(())
}

/// `-(1/pi) sum_{m=0}^{floor(sqrt(t/2))} sum_{r=1}^{R} sin(2 pi r sqrt(t - m^2)) / r`.
pub fn truncated_fourier_sum(t: u64, big_r: u64) -> Result<f64> {
    check_truncation(t, big_r)?;
    let limit = octant_limit(t);
    let chunks: Vec<CompensatedSum> = (0..=limit / CHUNK)
        .into_par_iter()
        .map(|c| {
            let mut acc = CompensatedSum::new();
            let lo = c * CHUNK;
            let hi = (lo + CHUNK - 1).min(limit);
            for m in lo..=hi {
                let root = frac_sqrt::<f64>(t - m * m);
                if root.is_perfect_square() {
                    continue;
                }
                let mut inner = CompensatedSum::new();
                for r in 1..=big_r {
                    let theta = phase_of(r, &root).centered();
                    inner.add((std::f64::consts::TAU * theta).sin() / r as f64);
                }
                acc.add(inner.value());
            }
            acc
        })
        .collect();
    let mut total = CompensatedSum::new();
    for c in &chunks {
        total.merge(c);
    }
    Ok(-total.value() / std::f64::consts::PI)
}

/// Counts of nearest lattice points per annulus `k/(2R) <= |(m,n)| - sqrt(t) < (k+1)/(2R)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnulusHistogram {
    pub t: u64,
    pub big_r: u64,
    /// `k -> n(J_k)` for `-R <= k <= R - 1`; empty bins included.
    pub counts: BTreeMap<i64, u64>,
}

impl AnnulusHistogram {
    pub fn total(&self) -> u64 {
        self.counts.values().sum()
    }

    /// `sum_{k<=-2} n_k / (-k-1) + sum_{k>=2} n_k / k + n_{-1} + n_0`.
    pub fn tail_majorant(&self) -> f64 {
        self.counts
            .iter()
            .map(|(&k, &n)| {
                let n = n as f64;
                match k {
                    -1 | 0 => n,
                    k if k <= -2 => n / (-k - 1) as f64,
                    k if k >= 2 => n / k as f64,
                    // k = 1 lies in neither split; weight it like k = 0.
                    _ => n,
                }
            })
            .sum()
    }
}

/// Buckets each octant row's nearest lattice point by its radial offset.
pub fn annulus_histogram(t: u64, big_r: u64) -> Result<AnnulusHistogram> {
    check_truncation(t, big_r)?;
    let r = big_r as i64;
    let mut counts: BTreeMap<i64, u64> = (-r..r).map(|k| (k, 0)).collect();
    let sqrt_t = (t as f64).sqrt();
    for m in 0..=octant_limit(t) {
        let root = frac_sqrt::<f64>(t - m * m);
        // Window sqrt(t - m^2) - 1/2 <= n < sqrt(t - m^2) + 1/2, ties downward.
        let n = root.nearest_int();
        let norm2 = (m as i128) * (m as i128) + (n as i128) * (n as i128);
        // |(m,n)| - sqrt(t) with an exact integer numerator.
        let offset = (norm2 - t as i128) as f64 / ((norm2 as f64).sqrt() + sqrt_t);
        let k = (2.0 * big_r as f64 * offset).floor() as i64;
        *counts.entry(k.clamp(-r, r - 1)).or_default() += 1;
    }
    Ok(AnnulusHistogram { t, big_r, counts })
}

/// `|psi-sum - truncated Fourier sum| / (t^(1/2 + eps) / R)`.
pub fn tail_bound_check(t: u64, big_r: u64, eps: f64) -> Result<f64> {
    let direct = psi_sum(t)?.sum;
    let truncated = truncated_fourier_sum(t, big_r)?;
    let envelope = (t as f64).powf(0.5 + eps) / big_r as f64;
    Ok((direct - truncated).abs() / envelope)
}
