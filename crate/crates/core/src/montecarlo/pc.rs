use rayon::prelude::*;
use serde::Serialize;

use super::{
    derive_seed, estimate_spanning, sample_stream, sample_uniforms, threshold_uniforms, McConfig, McEstimate, Target,
    Z99,
};
use crate::bootstrap::percolates;
use crate::error::{Error, Result};
use crate::lattice::GridShape;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PcOptions {
    pub target: f64,
    pub samples_per_probe: u64,
    /// Stop once the bracket is narrower than this.
    pub tol: f64,
    pub max_probes: usize,
    pub replicas: u32,
    /// Normal quantile of the Wilson interval.
    pub z: f64,
}

impl Default for PcOptions {
    fn default() -> Self {
        Self {
            target: 0.5,
            samples_per_probe: 10_000,
            tol: 1e-4,
            max_probes: 40,
            replicas: 1,
            z: Z99,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Probe {
    pub p: f64,
    pub estimate: McEstimate,
    pub ci: (f64, f64),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PcEstimate {
    /// Probed `p` whose estimated `θ(p)` is nearest the target.
    pub p_hat: f64,
    pub theta_hat: McEstimate,
    pub bracket: (f64, f64),
    pub probes: Vec<Probe>,
    pub warnings: Vec<String>,
}

/// Bisection for `θ(p) = target` with `θ(p)` the full-grid percolation
/// probability. Each probe uses a fresh seed derived from `seed` and the
/// probe index. The bracket moves while the probe's Wilson interval excludes
/// the target; the search ends at the first probe whose interval contains
/// it, once the bracket is narrower than `tol`, or after `max_probes`.
pub fn pc_bisect(shape: &GridShape, r: u32, seed: u64, opts: &PcOptions) -> Result<PcEstimate> {
    if !(opts.target > 0.0 && opts.target < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "target must lie in (0, 1), got {}",
            opts.target
        )));
    }
    if opts.tol.is_nan() || opts.tol <= 0.0 || opts.max_probes == 0 {
        return Err(Error::InvalidArgument("need tol > 0 and at least one probe".into()));
    }
    let mut lo = 0.0f64;
    let mut hi = 1.0f64;
    let mut probes: Vec<Probe> = Vec::new();
    let mut warnings = Vec::new();
    for k in 0..opts.max_probes {
        if hi - lo < opts.tol {
            break;
        }
        let p = 0.5 * (lo + hi);
        let mut cfg = McConfig::new(shape.clone(), p, opts.samples_per_probe, derive_seed(seed, k as u64));
        cfg.r = r;
        cfg.replicas = opts.replicas;
        let estimate = estimate_spanning(&cfg, &Target::FullGrid)?;
        let ci = estimate.wilson(opts.z).expect("Bernoulli estimate");
        // Intervals that do not overlap in the wrong order are beyond noise.
        for prev in &probes {
            let ((p_lo, ci_lo), (p_hi, ci_hi)) = if prev.p < p {
                ((prev.p, prev.ci), (p, ci))
            } else {
                ((p, ci), (prev.p, prev.ci))
            };
            if ci_lo.0 > ci_hi.1 {
                warnings.push(format!(
                    "non-monotone probes: θ({p_lo:.6e}) interval {ci_lo:?} lies above θ({p_hi:.6e}) interval {ci_hi:?}"
                ));
            }
        }
        probes.push(Probe { p, estimate, ci });
        if ci.1 < opts.target {
            lo = p;
        } else if ci.0 > opts.target {
            hi = p;
        } else {
            break;
        }
    }
    let best = probes
        .iter()
        .min_by(|a, b| {
            let da = (a.estimate.mean - opts.target).abs();
            let db = (b.estimate.mean - opts.target).abs();
            da.total_cmp(&db)
        })
        .expect("at least one probe");
    Ok(PcEstimate {
        p_hat: best.p,
        theta_hat: best.estimate.clone(),
        bracket: (lo, hi),
        probes: probes.clone(),
        warnings,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ThetaCurve {
    pub ps: Vec<f64>,
    pub estimates: Vec<McEstimate>,
    /// Samples whose percolation indicator decreased somewhere along the
    /// increasing `ps`.
    pub monotone_violations: u64,
}

/// `θ(p)` at every `p` in `ps` (sorted ascending), with each sample's cells
/// thresholded from one shared set of uniforms.
pub fn theta_curve(shape: &GridShape, r: u32, ps: &[f64], samples: u64, seed: u64) -> Result<ThetaCurve> {
    if ps.iter().any(|p| !(0.0..=1.0).contains(p)) || ps.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::InvalidArgument("ps must be ascending values in [0, 1]".into()));
    }
    if samples == 0 {
        return Err(Error::InvalidArgument("need at least one sample".into()));
    }
    let (hits, violations) = (0..samples)
        .into_par_iter()
        .map(|s| {
            let u = sample_uniforms(shape, &mut sample_stream(seed, 0, s));
            let mut hits = vec![0u64; ps.len()];
            let mut prev = false;
            let mut bad = 0u64;
            for (i, &p) in ps.iter().enumerate() {
                let now = percolates(&threshold_uniforms(shape, &u, p), r);
                if prev && !now {
                    bad = 1;
                }
                prev = now;
                hits[i] = u64::from(now);
            }
            (hits, bad)
        })
        .reduce(
            || (vec![0u64; ps.len()], 0u64),
            |mut a, b| {
                for (x, y) in a.0.iter_mut().zip(&b.0) {
                    *x += y;
                }
                (a.0, a.1 + b.1)
            },
        );
    Ok(ThetaCurve {
        ps: ps.to_vec(),
        estimates: hits
            .into_iter()
            .map(|h| McEstimate::bernoulli(h, samples, seed, 1))
            .collect(),
        monotone_violations: violations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bisect_hypercube_six() {
        let s = GridShape::hypercube(6).unwrap();
        let opts = PcOptions {
            samples_per_probe: 4000,
            ..Default::default()
        };
        let est = pc_bisect(&s, 2, 17, &opts).unwrap();
        assert!(est.theta_hat.mean > 0.4 && est.theta_hat.mean < 0.6, "{est:?}");
        assert!(est.bracket.0 <= est.p_hat && est.p_hat <= est.bracket.1);
        assert!(est.warnings.is_empty());
        assert!(pc_bisect(
            &s,
            2,
            1,
            &PcOptions {
                target: 1.0,
                ..Default::default()
            }
        )
        .is_err());
    }

    #[test]
    fn coupled_curve_is_monotone() {
        let s = GridShape::hypercube(5).unwrap();
        let ps: Vec<f64> = (1..20).map(|i| i as f64 / 20.0).collect();
        let c = theta_curve(&s, 2, &ps, 500, 4).unwrap();
        assert_eq!(c.monotone_violations, 0);
        assert!(c.estimates.windows(2).all(|w| w[0].mean <= w[1].mean));
        assert!(theta_curve(&s, 2, &[0.5, 0.2], 10, 0).is_err());
    }
}
