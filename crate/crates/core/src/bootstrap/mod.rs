//! The r-neighbour process: closures, internal spanning, spanning sequences,
//! final pairs, decompositions and minimal percolating sets.

pub(crate) mod cubes;
mod minset;
pub(crate) mod sequential;

use std::collections::VecDeque;

use crate::error::Result;
use crate::lattice::{Configuration, Cube, GridShape};

pub use cubes::{
    closure_cubes, find_crossing_pair, span_decompose, spans, CubesProcess, Decomposition, Merge, TrackedCube,
};
pub use minset::{min_percolating_set, min_percolating_size};
pub use sequential::{
    endings, final_pairs_and_elements, sequential_spanning, sequential_spanning_exhaustive, FinalEvents,
    SpanningSequence,
};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClosureResult {
    /// For `r = 2` these are the maximal cubes of the closure. For other
    /// thresholds each entry is the bounding box of one connected component.
    pub components: Vec<Cube>,
    pub infected: Configuration,
}

impl ClosureResult {
    pub fn percolates(&self) -> bool {
        self.infected.is_full()
    }
}

/// Least fixpoint of `A -> A ∪ {v : |N(v) ∩ A| >= r}`.
pub fn closure_set(a: &Configuration, r: u32) -> Configuration {
    let shape = a.shape();
    if r == 0 {
        return Configuration::full(shape);
    }
    let mut infected = a.clone();
    let mut counts = vec![0u32; shape.cell_count()];
    let mut queue: Vec<usize> = a.indices().collect();
    while let Some(v) = queue.pop() {
        shape.for_each_neighbour(v, |w| {
            if !infected.contains_index(w) {
                counts[w] += 1;
                if counts[w] >= r {
                    infected.insert_index(w);
                    queue.push(w);
                }
            }
        });
    }
    infected
}

pub fn percolates(a: &Configuration, r: u32) -> bool {
    closure_set(a, r).is_full()
}

/// Closure together with its component decomposition.
pub fn closure(a: &Configuration, r: u32) -> ClosureResult {
    let infected = closure_set(a, r);
    let components = component_boxes(&infected);
    ClosureResult { components, infected }
}

/// Bounding boxes of the connected components of `set`, sorted.
pub(crate) fn component_boxes(set: &Configuration) -> Vec<Cube> {
    let shape: &GridShape = set.shape();
    let d = shape.dim();
    let mut seen = Configuration::empty(shape);
    let mut out = Vec::new();
    let mut queue = VecDeque::new();
    let mut c = vec![0; d];
    for start in set.indices() {
        if seen.contains_index(start) {
            continue;
        }
        seen.insert_index(start);
        queue.push_back(start);
        shape.coords_into(start, &mut c);
        let mut lo = c.clone();
        let mut hi = c.clone();
        while let Some(v) = queue.pop_front() {
            shape.coords_into(v, &mut c);
            for i in 0..d {
                lo[i] = lo[i].min(c[i]);
                hi[i] = hi[i].max(c[i]);
            }
            shape.for_each_neighbour(v, |w| {
                if set.contains_index(w) && !seen.contains_index(w) {
                    seen.insert_index(w);
                    queue.push_back(w);
                }
            });
        }
        out.push(Cube::new(lo, hi).expect("bounding box corners are ordered"));
    }
    out.sort();
    out
}

/// Restricts `a` to `q` and re-indexes it as a configuration of the grid `q`.
pub(crate) fn localize(q: &Cube, points: &[Vec<usize>]) -> Result<Configuration> {
    let sides: Vec<usize> = q.lo().iter().zip(q.hi()).map(|(l, h)| h - l + 1).collect();
    let shape = GridShape::new(sides)?;
    let mut local = Configuration::empty(&shape);
    let mut c = vec![0; q.axes()];
    for p in points {
        for i in 0..q.axes() {
            c[i] = p[i] - q.lo()[i];
        }
        local.insert_index(shape.index(&c));
    }
    Ok(local)
}
