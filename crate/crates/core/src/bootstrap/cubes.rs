use serde::Serialize;

use super::{closure_set, localize, ClosureResult};
use crate::error::{Error, Result};
use crate::lattice::{for_each_cube_cell, Configuration, Cube, GridShape};

/// Above this many points `spans` switches from the cubes process to a
/// cellwise closure inside the cube.
const CUBES_PROCESS_LIMIT: usize = 48;

/// A cube of the cubes process with the initial points that built it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TrackedCube {
    pub cube: Cube,
    /// Row-major indices of the points, sorted.
    pub witnesses: Vec<usize>,
}

#[derive(Clone, Debug)]
pub struct Merge {
    pub first: TrackedCube,
    pub second: TrackedCube,
    pub result: Cube,
}

/// Repeatedly merges two cubes at distance at most 2 into their span,
/// always taking the lexicographically first such pair of the sorted list.
#[derive(Clone, Debug)]
pub struct CubesProcess {
    cubes: Vec<TrackedCube>,
}

impl CubesProcess {
    pub fn new(shape: &GridShape, points: impl IntoIterator<Item = usize>) -> Self {
        let mut cubes: Vec<TrackedCube> = points
            .into_iter()
            .map(|i| TrackedCube {
                cube: Cube::point(shape.cell_at(i).coords()),
                witnesses: vec![i],
            })
            .collect();
        cubes.sort_by(|a, b| a.cube.cmp(&b.cube));
        cubes.dedup_by(|a, b| a.cube == b.cube);
        Self { cubes }
    }

    pub fn cubes(&self) -> &[TrackedCube] {
        &self.cubes
    }

    pub fn step(&mut self) -> Option<Merge> {
        let n = self.cubes.len();
        let (i, j) = (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .find(|&(i, j)| self.cubes[i].cube.distance(&self.cubes[j].cube) <= 2)?;
        let second = self.cubes.remove(j);
        let first = self.cubes.remove(i);
        let result = first.cube.span(&second.cube);
        let mut witnesses = first.witnesses.clone();
        witnesses.extend_from_slice(&second.witnesses);
        witnesses.sort_unstable();
        let merged = TrackedCube {
            cube: result.clone(),
            witnesses,
        };
        let pos = self
            .cubes
            .binary_search_by(|c| c.cube.cmp(&merged.cube))
            .unwrap_or_else(|p| p);
        self.cubes.insert(pos, merged);
        Some(Merge { first, second, result })
    }

    pub fn run(mut self) -> Vec<TrackedCube> {
        while self.step().is_some() {}
        self.cubes
    }
}

/// Two-neighbour closure computed by the cubes process.
pub fn closure_cubes(a: &Configuration) -> ClosureResult {
    let shape = a.shape();
    let cubes = CubesProcess::new(shape, a.indices()).run();
    let mut infected = Configuration::empty(shape);
    let mut components: Vec<Cube> = Vec::with_capacity(cubes.len());
    for t in cubes {
        for_each_cube_cell(&t.cube, |c| infected.insert_index(shape.index(c)));
        components.push(t.cube);
    }
    components.sort();
    ClosureResult { components, infected }
}

fn coords_of(shape: &GridShape, indices: &[usize]) -> Vec<Vec<usize>> {
    indices.iter().map(|&i| shape.cell_at(i).0).collect()
}

/// Whether the points (all inside `q`) internally span `q`.
pub(crate) fn spans_points(q: &Cube, points: &[Vec<usize>]) -> bool {
    if points.is_empty() {
        return false;
    }
    if points.len() <= CUBES_PROCESS_LIMIT {
        let mut cubes: Vec<Cube> = points.iter().map(|p| Cube::point(p)).collect();
        // Merge order does not affect the final cube set, so take any pair.
        'outer: loop {
            for i in 0..cubes.len() {
                for j in i + 1..cubes.len() {
                    if cubes[i].distance(&cubes[j]) <= 2 {
                        let b = cubes.swap_remove(j);
                        cubes[i] = cubes[i].span(&b);
                        continue 'outer;
                    }
                }
            }
            break;
        }
        cubes.len() == 1 && &cubes[0] == q
    } else {
        let local = localize(q, points).expect("a sub-cube of a valid grid is a valid grid");
        closure_set(&local, 2).is_full()
    }
}

/// `[A ∩ Q] = Q`.
pub fn spans(q: &Cube, a: &Configuration) -> bool {
    let pts = coords_of(a.shape(), &a.indices_in(q));
    spans_points(q, &pts)
}

/// Two internally spanned cubes whose span is the target, with disjoint
/// witness sets.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Decomposition {
    pub s: Cube,
    pub t: Cube,
    #[serde(serialize_with = "ser_config")]
    pub witness_s: Configuration,
    #[serde(serialize_with = "ser_config")]
    pub witness_t: Configuration,
}

fn ser_config<S: serde::Serializer>(c: &Configuration, s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let cells = c.cells();
    let mut seq = s.serialize_seq(Some(cells.len()))?;
    for cell in &cells {
        seq.serialize_element(cell)?;
    }
    seq.end()
}

fn decomposition_from(shape: &GridShape, merge: Merge) -> Decomposition {
    let (a, b) = (merge.first, merge.second);
    // Larger dimension first, ties to the smaller corner.
    let a_first = (a.cube.dim(), std::cmp::Reverse(&a.cube)) >= (b.cube.dim(), std::cmp::Reverse(&b.cube));
    let (s, t) = if a_first { (a, b) } else { (b, a) };
    Decomposition {
        witness_s: Configuration::from_indices(shape, s.witnesses.iter().copied()),
        witness_t: Configuration::from_indices(shape, t.witnesses.iter().copied()),
        s: s.cube,
        t: t.cube,
    }
}

/// The last merge of the cubes process on `A ∩ Q`, which produces `Q` from two
/// proper internally spanned subcubes.
pub fn span_decompose(q: &Cube, a: &Configuration) -> Result<Decomposition> {
    if q.dim() == 0 {
        return Err(Error::InvalidArgument(
            "a single vertex has no decomposition into proper subcubes".into(),
        ));
    }
    let shape = a.shape();
    let mut process = CubesProcess::new(shape, a.indices_in(q));
    while let Some(m) = process.step() {
        if m.result == *q {
            return Ok(decomposition_from(shape, m));
        }
    }
    Err(Error::NotSpanning(q.to_string()))
}

/// The first merge of the cubes process on all of `A` that creates a cube of
/// dimension at least `ell`. The witness depends on the fixed merge order.
pub fn find_crossing_pair(a: &Configuration, ell: usize) -> Option<Decomposition> {
    let shape = a.shape();
    let mut process = CubesProcess::new(shape, a.indices());
    while let Some(m) = process.step() {
        if m.result.dim() >= ell && m.first.cube.dim() < ell && m.second.cube.dim() < ell {
            return Some(decomposition_from(shape, m));
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bootstrap::closure;

    fn config(shape: &GridShape, pts: &[&[usize]]) -> Configuration {
        Configuration::from_coords(shape, pts).unwrap()
    }

    #[test]
    fn cubes_process_examples() {
        let s = GridShape::hypercube(2).unwrap();
        let res = closure_cubes(&config(&s, &[&[0, 0], &[1, 1]]));
        assert_eq!(res.components, vec![s.full_cube()]);

        let line = GridShape::new(vec![9]).unwrap();
        let res = closure_cubes(&config(&line, &[&[0], &[4]]));
        assert_eq!(res.components.len(), 2);
        assert_eq!(res.components[0].distance(&res.components[1]), 4);
    }

    #[test]
    fn spans_examples() {
        let s2 = GridShape::hypercube(2).unwrap();
        assert!(spans(&s2.full_cube(), &config(&s2, &[&[0, 0], &[1, 1]])));
        assert!(!spans(&s2.full_cube(), &config(&s2, &[&[0, 0], &[0, 1]])));
        let s4 = GridShape::hypercube(4).unwrap();
        let a = config(&s4, &[&[0, 0, 0, 0], &[1, 1, 0, 0], &[0, 0, 1, 1]]);
        assert!(spans(&s4.full_cube(), &a));
        assert!(!spans(&s4.full_cube(), &Configuration::empty(&s4)));
    }

    #[test]
    fn cellwise_fallback_agrees() {
        // Enough points to force the cellwise route.
        let s = GridShape::hypercube(7).unwrap();
        let a = Configuration::from_indices(&s, (0..128).filter(|i| i % 2 == 0));
        assert!(a.len() > CUBES_PROCESS_LIMIT);
        assert_eq!(spans(&s.full_cube(), &a), closure(&a, 2).percolates());
    }

    #[test]
    fn decompose_examples() {
        let s2 = GridShape::hypercube(2).unwrap();
        let dec = span_decompose(&s2.full_cube(), &config(&s2, &[&[0, 0], &[1, 1]])).unwrap();
        assert_eq!(dec.s, Cube::point(&[0, 0]));
        assert_eq!(dec.t, Cube::point(&[1, 1]));

        let s4 = GridShape::hypercube(4).unwrap();
        let a = config(&s4, &[&[0, 0, 0, 0], &[1, 1, 0, 0], &[0, 0, 1, 1]]);
        let dec = span_decompose(&s4.full_cube(), &a).unwrap();
        assert_eq!(dec.s, Cube::from_pattern("00**").unwrap());
        assert_eq!(dec.t, Cube::point(&[1, 1, 0, 0]));
        assert!(dec.witness_s.is_disjoint(&dec.witness_t));

        let bad = config(&s4, &[&[0, 0, 0, 0], &[1, 1, 1, 1]]);
        assert!(matches!(
            span_decompose(&s4.full_cube(), &bad),
            Err(Error::NotSpanning(_))
        ));
    }

    #[test]
    fn crossing_pair_examples() {
        let s = GridShape::hypercube(6).unwrap();
        let one = config(&s, &[&[0; 6]]);
        assert!(find_crossing_pair(&one, 1).is_none());
        let a = config(
            &s,
            &[
                &[0, 0, 0, 0, 0, 0],
                &[1, 1, 0, 0, 0, 0],
                &[0, 0, 1, 1, 0, 0],
                &[0, 0, 0, 0, 1, 1],
            ],
        );
        assert!(closure(&a, 2).percolates());
        let dec = find_crossing_pair(&a, 3).unwrap();
        assert!(dec.t.dim() <= dec.s.dim() && dec.s.dim() < 3);
        assert!(dec.s.span(&dec.t).dim() >= 3);
    }
}
