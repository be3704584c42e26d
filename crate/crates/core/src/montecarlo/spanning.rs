use serde::Serialize;

use super::{derive_seed, run_replicas, sample_configuration, McConfig, McEstimate};
use crate::bootstrap::{percolates, sequential_spanning, spans};
use crate::error::{Error, Result};
use crate::lattice::{Cube, GridShape};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case", tag = "kind", content = "cube")]
pub enum Target {
    /// The closure of the sample is the whole grid (threshold `cfg.r`).
    FullGrid,
    /// The sample internally spans the cube.
    Cube(Cube),
    /// The sample sequentially spans the even-dimensional hypercube.
    SequentialCube(Cube),
}

impl Target {
    /// `[2]^dim` placed at the origin of `shape`, on the first `dim` axes.
    pub fn corner_cube(shape: &GridShape, dim: usize) -> Result<Cube> {
        if dim > shape.dim() || shape.sides()[..dim].iter().any(|&s| s < 2) {
            return Err(Error::InvalidArgument(format!("[2]^{dim} does not fit in {shape}")));
        }
        let lo = vec![0; shape.dim()];
        let hi: Vec<usize> = (0..shape.dim()).map(|i| usize::from(i < dim)).collect();
        Cube::new(lo, hi)
    }
}

pub fn estimate_spanning(cfg: &McConfig, target: &Target) -> Result<McEstimate> {
    cfg.validate()?;
    match target {
        Target::FullGrid => {}
        Target::Cube(q) | Target::SequentialCube(q) => {
            if !cfg.shape.contains_cube(q) {
                return Err(Error::InvalidCube(format!("{q} does not fit in {}", cfg.shape)));
            }
            if cfg.r != 2 {
                return Err(Error::UnsupportedThreshold(cfg.r));
            }
        }
    }
    if let Target::SequentialCube(q) = target {
        if !q.is_hypercube() || q.dim() % 2 != 0 {
            return Err(Error::InvalidCube(format!("{q} is not an even-dimensional hypercube")));
        }
    }
    let (hits, _) = run_replicas(cfg, |stream| {
        let a = sample_configuration(&cfg.shape, cfg.p, stream)?;
        let hit = match target {
            Target::FullGrid => percolates(&a, cfg.r),
            Target::Cube(q) => spans(q, &a),
            Target::SequentialCube(q) => a.count_in(q) == q.dim() / 2 + 1 && sequential_spanning(q, &a).is_some(),
        };
        Ok((u64::from(hit), 0))
    })?;
    Ok(McEstimate::bernoulli(hits, cfg.samples, cfg.base_seed, cfg.replicas))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CubeComparison {
    pub a: McEstimate,
    pub b: McEstimate,
    /// `estimate(a) <= estimate(b) + 3 sqrt(se_a^2 + se_b^2)`.
    pub consistent: bool,
}

/// Independent internal-spanning estimates on two grids of equal dimension,
/// e.g. `[3] x [2]^k` against `[2]^{k+2}`.
pub fn coupled_cube_compare(qa: &GridShape, qb: &GridShape, p: f64, samples: u64, seed: u64) -> Result<CubeComparison> {
    let dim = |s: &GridShape| -> usize { s.sides().iter().map(|x| x - 1).sum() };
    if dim(qa) != dim(qb) {
        return Err(Error::ShapeMismatch(format!(
            "{qa} has dimension {}, {qb} has {}",
            dim(qa),
            dim(qb)
        )));
    }
    let run = |shape: &GridShape, label: u64| {
        let cfg = McConfig::new(shape.clone(), p, samples, derive_seed(seed, label));
        estimate_spanning(&cfg, &Target::FullGrid)
    };
    let a = run(qa, 0)?;
    let b = run(qb, 1)?;
    let sigma = (a.std_error.powi(2) + b.std_error.powi(2)).sqrt();
    Ok(CubeComparison {
        consistent: a.mean <= b.mean + 3.0 * sigma,
        a,
        b,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::q_exact;

    #[test]
    fn full_grid_extremes() {
        let s = GridShape::hypercube(2).unwrap();
        let cfg = McConfig::new(s.clone(), 1.0, 100, 1);
        assert_eq!(estimate_spanning(&cfg, &Target::FullGrid).unwrap().mean, 1.0);
        let cfg = McConfig::new(s, 0.0, 100, 1);
        assert_eq!(estimate_spanning(&cfg, &Target::FullGrid).unwrap().mean, 0.0);
    }

    #[test]
    fn sequential_target_matches_closed_form() {
        let s = GridShape::hypercube(4).unwrap();
        let q = s.full_cube();
        let mut cfg = McConfig::new(s, 0.1, 100_000, 11);
        cfg.replicas = 4;
        let e = estimate_spanning(&cfg, &Target::SequentialCube(q.clone())).unwrap();
        assert!(e.z_score(q_exact(2, 0.1).unwrap()).abs() < 4.0, "{e:?}");
        let p = estimate_spanning(&cfg, &Target::Cube(q)).unwrap();
        assert!(e.mean <= p.mean + 3.0 * p.std_error);
    }

    #[test]
    fn replica_count_changes_draws_not_validity() {
        let s = GridShape::hypercube(3).unwrap();
        let mut cfg = McConfig::new(s, 0.3, 2000, 5);
        let one = estimate_spanning(&cfg, &Target::FullGrid).unwrap();
        let again = estimate_spanning(&cfg, &Target::FullGrid).unwrap();
        assert_eq!(one, again);
        cfg.replicas = 3;
        let three = estimate_spanning(&cfg, &Target::FullGrid).unwrap();
        assert_eq!(three.n, 2000);
    }

    #[test]
    fn corner_cube_and_errors() {
        let s = GridShape::hypercube(6).unwrap();
        let q = Target::corner_cube(&s, 4).unwrap();
        assert_eq!(q.dim(), 4);
        assert!(Target::corner_cube(&s, 7).is_err());
        let mut cfg = McConfig::new(s, 0.1, 10, 0);
        cfg.r = 3;
        assert!(estimate_spanning(&cfg, &Target::Cube(q)).is_err());
    }

    #[test]
    fn compare_extremes_and_mismatch() {
        let a = GridShape::new(vec![3, 2, 2]).unwrap();
        let b = GridShape::hypercube(4).unwrap();
        let c = coupled_cube_compare(&a, &b, 1.0, 50, 1).unwrap();
        assert_eq!((c.a.mean, c.b.mean), (1.0, 1.0));
        let c = coupled_cube_compare(&a, &b, 0.0, 50, 1).unwrap();
        assert_eq!((c.a.mean, c.b.mean), (0.0, 0.0));
        let c = coupled_cube_compare(&a, &b, 0.05, 20_000, 1).unwrap();
        assert!(c.consistent);
        assert!(coupled_cube_compare(&a, &GridShape::hypercube(3).unwrap(), 0.1, 10, 1).is_err());
    }
}
