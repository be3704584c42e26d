use serde::Serialize;

use super::{sample_configuration, sample_stream, McConfig, McEstimate};
use crate::bootstrap::sequential::sequential_points;
use crate::error::{Error, Result};
use crate::lattice::{Cube, GridShape};
use rayon::prelude::*;

/// Largest number of `[2]^{2l}` subcubes scanned per sample.
pub const DROPLET_SUBCUBE_GUARD: u64 = 1_000_000;

/// Sample mean and variance of `X(2l, p)`, the number of sequentially
/// spanned `[2]^{2l}` subcubes.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DropletStats {
    pub ell: usize,
    pub subcubes: u64,
    pub mean: McEstimate,
    pub variance: f64,
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut c: Vec<usize> = (0..k).collect();
    if k > n {
        return out;
    }
    loop {
        out.push(c.clone());
        let Some(i) = (0..k).rev().find(|&i| c[i] < n - k + i) else {
            return out;
        };
        c[i] += 1;
        for j in i + 1..k {
            c[j] = c[j - 1] + 1;
        }
    }
}

/// Every `[2]^{2l}` subcube of `shape`, as (cube, cell indices).
fn droplet_cubes(shape: &GridShape, ell: usize) -> Result<Vec<(Cube, Vec<usize>)>> {
    let d = shape.dim();
    let k = 2 * ell;
    if k > d {
        return Err(Error::InvalidArgument(format!("2l = {k} exceeds the dimension {d}")));
    }
    let mut count: u128 = 0;
    let axis_sets = combinations(d, k);
    for axes in &axis_sets {
        let mut c: u128 = 1;
        for (i, &s) in shape.sides().iter().enumerate() {
            c *= if axes.contains(&i) { s.saturating_sub(1) } else { s } as u128;
        }
        count += c;
    }
    if count > DROPLET_SUBCUBE_GUARD as u128 {
        return Err(Error::GuardExceeded(format!(
            "{count} subcubes per sample exceeds {DROPLET_SUBCUBE_GUARD}"
        )));
    }
    let mut out = Vec::with_capacity(count as usize);
    for axes in &axis_sets {
        // Range of the lower corner on each axis.
        let ranges: Vec<usize> = shape
            .sides()
            .iter()
            .enumerate()
            .map(|(i, &s)| if axes.contains(&i) { s.saturating_sub(1) } else { s })
            .collect();
        if ranges.contains(&0) {
            continue;
        }
        let mut lo = vec![0usize; d];
        loop {
            let hi: Vec<usize> = (0..d).map(|i| lo[i] + usize::from(axes.contains(&i))).collect();
            let q = Cube::new(lo.clone(), hi).expect("lo <= hi");
            let cells = shape.cube_indices(&q);
            out.push((q, cells));
            let mut i = d;
            loop {
                if i == 0 {
                    break;
                }
                i -= 1;
                lo[i] += 1;
                if lo[i] < ranges[i] {
                    break;
                }
                lo[i] = 0;
            }
            if lo.iter().all(|&x| x == 0) {
                break;
            }
        }
    }
    Ok(out)
}

/// Scans every subcube of each sample; the sequential check runs only where
/// the subcube holds exactly `l+1` infected cells, which it needs.
pub fn droplet_stats(cfg: &McConfig, ell: usize) -> Result<DropletStats> {
    cfg.validate()?;
    let cubes = droplet_cubes(&cfg.shape, ell)?;
    let need = ell + 1;
    let parts: Vec<(u64, u128)> = cfg
        .split()
        .into_par_iter()
        .map(|(replica, count)| {
            let mut sum = 0u64;
            let mut sumsq = 0u128;
            let mut pts: Vec<Vec<usize>> = Vec::with_capacity(need);
            for s in 0..count {
                let a = sample_configuration(&cfg.shape, cfg.p, &mut sample_stream(cfg.base_seed, replica, s))?;
                let mut x = 0u64;
                if a.len() >= need {
                    for (q, cells) in &cubes {
                        let inside = cells.iter().filter(|&&i| a.contains_index(i)).count();
                        if inside != need {
                            continue;
                        }
                        pts.clear();
                        pts.extend(
                            cells
                                .iter()
                                .filter(|&&i| a.contains_index(i))
                                .map(|&i| cfg.shape.cell_at(i).0),
                        );
                        if sequential_points(q, &pts).is_some() {
                            x += 1;
                        }
                    }
                }
                sum += x;
                sumsq += (x as u128) * (x as u128);
            }
            Ok((sum, sumsq))
        })
        .collect::<Result<_>>()?;
    let (sum, sumsq) = parts.iter().fold((0u64, 0u128), |a, b| (a.0 + b.0, a.1 + b.1));
    let n = cfg.samples as f64;
    let mean = sum as f64 / n;
    let variance = if cfg.samples > 1 {
        ((sumsq as f64 - n * mean * mean) / (n - 1.0)).max(0.0)
    } else {
        0.0
    };
    Ok(DropletStats {
        ell,
        subcubes: cubes.len() as u64,
        mean: McEstimate {
            mean,
            std_error: (variance / n).sqrt(),
            n: cfg.samples,
            successes: None,
            base_seed: cfg.base_seed,
            replicas: cfg.replicas,
        },
        variance,
    })
}
