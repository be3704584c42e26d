//! Seeded Monte Carlo estimators.
//!
//! Every random draw comes from a ChaCha8 stream keyed by
//! `(base_seed, replica)`, with the sample index as the stream id and the
//! cell index fixing the word position, so results do not depend on how
//! replicas are scheduled.

mod droplets;
mod manifest;
mod pc;
mod spanning;

pub use droplets::{droplet_stats, DropletStats, DROPLET_SUBCUBE_GUARD};
pub use manifest::{append_results_log, RunManifest, RESULTS_LOG_HEADER};
pub use pc::{pc_bisect, theta_curve, PcEstimate, PcOptions, Probe, ThetaCurve};
pub use spanning::{coupled_cube_compare, estimate_spanning, CubeComparison, Target};

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{Configuration, GridShape};

/// Two-sided 99% normal quantile.
pub const Z99: f64 = 2.575_829_303_548_900_4;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McConfig {
    pub shape: GridShape,
    pub r: u32,
    pub p: f64,
    pub samples: u64,
    pub base_seed: u64,
    pub replicas: u32,
}

impl McConfig {
    pub fn new(shape: GridShape, p: f64, samples: u64, base_seed: u64) -> Self {
        Self {
            shape,
            r: 2,
            p,
            samples,
            base_seed,
            replicas: 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.p) {
            return Err(Error::InvalidArgument(format!("p must lie in [0, 1], got {}", self.p)));
        }
        if self.samples == 0 {
            return Err(Error::InvalidArgument("need at least one sample".into()));
        }
        if self.replicas == 0 {
            return Err(Error::InvalidArgument("need at least one replica".into()));
        }
        if self.r == 0 {
            return Err(Error::InvalidArgument("threshold r must be at least 1".into()));
        }
        Ok(())
    }

    /// Sample indices owned by each replica.
    fn split(&self) -> Vec<(u32, u64)> {
        let k = self.replicas as u64;
        (0..self.replicas)
            .map(|i| (i, self.samples / k + u64::from((i as u64) < self.samples % k)))
            .collect()
    }
}

/// Estimate of a mean with its standard error.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct McEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub n: u64,
    /// For Bernoulli targets.
    pub successes: Option<u64>,
    pub base_seed: u64,
    pub replicas: u32,
}

impl McEstimate {
    pub fn bernoulli(successes: u64, n: u64, base_seed: u64, replicas: u32) -> Self {
        let mean = successes as f64 / n as f64;
        Self {
            mean,
            std_error: (mean * (1.0 - mean) / n as f64).sqrt(),
            n,
            successes: Some(successes),
            base_seed,
            replicas,
        }
    }

    /// Wilson score interval at normal quantile `z`; Bernoulli estimates only.
    pub fn wilson(&self, z: f64) -> Option<(f64, f64)> {
        let s = self.successes? as f64;
        let n = self.n as f64;
        let ph = s / n;
        let z2 = z * z;
        let denom = 1.0 + z2 / n;
        let centre = (ph + z2 / (2.0 * n)) / denom;
        let half = z * (ph * (1.0 - ph) / n + z2 / (4.0 * n * n)).sqrt() / denom;
        Some(((centre - half).max(0.0), (centre + half).min(1.0)))
    }

    /// `(mean - target) / std_error`; infinite when the error is zero and the
    /// mean differs.
    pub fn z_score(&self, target: f64) -> f64 {
        let diff = self.mean - target;
        if self.std_error > 0.0 {
            diff / self.std_error
        } else if diff == 0.0 {
            0.0
        } else {
            diff.signum() * f64::INFINITY
        }
    }
}

/// Stream for one sample: key `base_seed ‖ replica`, stream id `sample`.
pub fn sample_stream(base_seed: u64, replica: u32, sample: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&base_seed.to_le_bytes());
    key[8..12].copy_from_slice(&replica.to_le_bytes());
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(sample);
    rng
}

/// Integer threshold `t` with `P(u64 < t) = p` (to 2^-64); `None` means
/// every draw passes.
pub(crate) fn threshold(p: f64) -> Option<u64> {
    if p >= 1.0 {
        None
    } else {
        Some((p * 18_446_744_073_709_551_616.0) as u64)
    }
}

/// One uniform `u64` per cell, cell `i` at word position `2i`.
pub fn sample_uniforms(shape: &GridShape, stream: &mut ChaCha8Rng) -> Vec<u64> {
    stream.set_word_pos(0);
    (0..shape.cell_count()).map(|_| stream.next_u64()).collect()
}

pub(crate) fn threshold_uniforms(shape: &GridShape, uniforms: &[u64], p: f64) -> Configuration {
    match threshold(p) {
        None => Configuration::full(shape),
        Some(t) => Configuration::from_indices(
            shape,
            uniforms.iter().enumerate().filter(|(_, &u)| u < t).map(|(i, _)| i),
        ),
    }
}

/// Each cell included independently with probability `p`.
pub fn sample_configuration(shape: &GridShape, p: f64, stream: &mut ChaCha8Rng) -> Result<Configuration> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidArgument(format!("p must lie in [0, 1], got {p}")));
    }
    if p == 0.0 {
        return Ok(Configuration::empty(shape));
    }
    Ok(threshold_uniforms(shape, &sample_uniforms(shape, stream), p))
}

/// Runs `f(replica, sample, stream)` over every sample of `cfg`, replicas in
/// parallel, and sums the `u64` pairs it returns.
pub(crate) fn run_replicas<F>(cfg: &McConfig, f: F) -> Result<(u64, u64)>
where
    F: Fn(&mut ChaCha8Rng) -> Result<(u64, u64)> + Sync,
{
    let parts: Vec<(u64, u64)> = cfg
        .split()
        .into_par_iter()
        .map(|(replica, count)| {
            let mut acc = (0u64, 0u64);
            for s in 0..count {
                let mut stream = sample_stream(cfg.base_seed, replica, s);
                let (a, b) = f(&mut stream)?;
                acc.0 += a;
                acc.1 += b;
            }
            Ok(acc)
        })
        .collect::<Result<_>>()?;
    Ok(parts.iter().fold((0, 0), |acc, x| (acc.0 + x.0, acc.1 + x.1)))
}

/// A new seed for sub-run `label` of a run seeded with `seed`
/// (SplitMix64 finaliser).
pub fn derive_seed(seed: u64, label: u64) -> u64 {
    let mut z = seed ^ label.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trivial_densities() {
        let s = GridShape::hypercube(6).unwrap();
        let mut st = sample_stream(1, 0, 0);
        assert!(sample_configuration(&s, 0.0, &mut st).unwrap().is_empty());
        assert!(sample_configuration(&s, 1.0, &mut st).unwrap().is_full());
        assert!(sample_configuration(&s, 1.5, &mut st).is_err());
    }

    #[test]
    fn density_within_four_sigma() {
        let s = GridShape::uniform(1000, 2).unwrap();
        let p = 0.3;
        let a = sample_configuration(&s, p, &mut sample_stream(7, 0, 0)).unwrap();
        let n = s.cell_count() as f64;
        let sigma = (p * (1.0 - p) / n).sqrt();
        assert!((a.len() as f64 / n - p).abs() < 4.0 * sigma);
    }

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let s = GridShape::hypercube(8).unwrap();
        let a = sample_configuration(&s, 0.5, &mut sample_stream(3, 1, 5)).unwrap();
        let b = sample_configuration(&s, 0.5, &mut sample_stream(3, 1, 5)).unwrap();
        let c = sample_configuration(&s, 0.5, &mut sample_stream(3, 1, 6)).unwrap();
        let d = sample_configuration(&s, 0.5, &mut sample_stream(3, 2, 5)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_ne!(a, d);
    }

    #[test]
    fn wilson_and_std_error() {
        let e = McEstimate::bernoulli(50, 100, 0, 1);
        assert!((e.std_error - 0.05).abs() < 1e-15);
        let (lo, hi) = e.wilson(Z99).unwrap();
        assert!(lo < 0.5 && hi > 0.5 && lo > 0.36 && hi < 0.64);
        let zero = McEstimate::bernoulli(0, 10, 0, 1);
        assert_eq!(zero.wilson(Z99).unwrap().0, 0.0);
        assert_eq!(zero.z_score(0.0), 0.0);
    }

    #[test]
    fn replica_split() {
        let mut cfg = McConfig::new(GridShape::hypercube(2).unwrap(), 0.5, 10, 0);
        cfg.replicas = 3;
        assert_eq!(cfg.split(), vec![(0, 4), (1, 3), (2, 3)]);
    }
}
