use serde::Serialize;

use super::cubes::spans_points;
use crate::lattice::{subcube_family, Cell, Configuration, Cube, FamilyMode};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SpanningSequence {
    pub order: Vec<Cell>,
    /// `prefix_cubes[j]` is the span of `order[0..=j]`.
    pub prefix_cubes: Vec<Cube>,
}

fn points_in(q: &Cube, a: &Configuration) -> Vec<Vec<usize>> {
    a.indices_in(q).into_iter().map(|i| a.shape().cell_at(i).0).collect()
}

/// Number of points a spanning sequence of `q` needs, if `q` is an
/// even-dimensional hypercube.
fn sequence_length(q: &Cube) -> Option<usize> {
    (q.is_hypercube() && q.dim() % 2 == 0).then(|| q.dim() / 2 + 1)
}

fn build_sequence(points: &[Vec<usize>], order: &[usize]) -> SpanningSequence {
    let mut prefix = Cube::point(&points[order[0]]);
    let mut prefix_cubes = vec![prefix.clone()];
    for &k in &order[1..] {
        prefix = prefix.span(&Cube::point(&points[k]));
        prefix_cubes.push(prefix.clone());
    }
    SpanningSequence {
        order: order.iter().map(|&k| Cell(points[k].clone())).collect(),
        prefix_cubes,
    }
}

fn greedy_from(points: &[Vec<usize>], start: usize) -> Option<Vec<usize>> {
    let mut used = vec![false; points.len()];
    used[start] = true;
    let mut order = vec![start];
    let mut prefix = Cube::point(&points[start]);
    while order.len() < points.len() {
        let next = (0..points.len()).find(|&k| !used[k] && prefix.distance(&Cube::point(&points[k])) == 2)?;
        used[next] = true;
        order.push(next);
        prefix = prefix.span(&Cube::point(&points[next]));
    }
    Some(order)
}

pub(crate) fn sequential_points(q: &Cube, points: &[Vec<usize>]) -> Option<SpanningSequence> {
    if sequence_length(q)? != points.len() {
        return None;
    }
    (0..points.len())
        .find_map(|start| greedy_from(points, start))
        .map(|order| build_sequence(points, &order))
}

/// A spanning sequence of the even-dimensional hypercube `q` drawn from
/// `A ∩ Q`. Greedy extension from every possible first point.
pub fn sequential_spanning(q: &Cube, a: &Configuration) -> Option<SpanningSequence> {
    sequential_points(q, &points_in(q, a))
}

fn backtrack(points: &[Vec<usize>], used: &mut [bool], order: &mut Vec<usize>, prefix: &Cube) -> bool {
    if order.len() == points.len() {
        return true;
    }
    for k in 0..points.len() {
        if used[k] {
            continue;
        }
        let p = Cube::point(&points[k]);
        if prefix.distance(&p) != 2 {
            continue;
        }
        used[k] = true;
        order.push(k);
        if backtrack(points, used, order, &prefix.span(&p)) {
            return true;
        }
        order.pop();
        used[k] = false;
    }
    false
}

/// Same contract as [`sequential_spanning`], by exhaustive search over all
/// orders.
pub fn sequential_spanning_exhaustive(q: &Cube, a: &Configuration) -> Option<SpanningSequence> {
    let points = points_in(q, a);
    if sequence_length(q)? != points.len() {
        return None;
    }
    for start in 0..points.len() {
        let mut used = vec![false; points.len()];
        used[start] = true;
        let mut order = vec![start];
        if backtrack(&points, &mut used, &mut order, &Cube::point(&points[start])) {
            return Some(build_sequence(&points, &order));
        }
    }
    None
}

/// Final pairs `{j,k}` and final elements `{i}` of `A` in `Q` (axes 0-based).
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct FinalEvents {
    pub pairs: Vec<(usize, usize)>,
    pub elements: Vec<usize>,
}

impl FinalEvents {
    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty() && self.elements.is_empty()
    }
}

/// Does some member `C` of `family` satisfy `|A \ C| = 1` and `test(C, A ∩ C)`?
fn one_off_member(family: &[Cube], points: &[Vec<usize>], test: impl Fn(&Cube, &[Vec<usize>]) -> bool) -> bool {
    family.iter().any(|c| {
        let inside: Vec<Vec<usize>> = points.iter().filter(|p| c.contains(p)).cloned().collect();
        inside.len() + 1 == points.len() && test(c, &inside)
    })
}

pub(crate) fn final_events_points(q: &Cube, points: &[Vec<usize>], want_elements: bool) -> FinalEvents {
    let mut out = FinalEvents::default();
    if !spans_points(q, points) {
        return out;
    }
    let free = q.free_axes();
    for (x, &j) in free.iter().enumerate() {
        for &k in &free[x + 1..] {
            let fam = subcube_family(q, &[j, k], FamilyMode::ConstantOn).expect("axes are free");
            if one_off_member(&fam, points, spans_points) {
                out.pairs.push((j, k));
            }
        }
    }
    if want_elements {
        for &i in &free {
            let fam = subcube_family(q, &[i], FamilyMode::ConstantOn).expect("axis is free");
            if one_off_member(&fam, points, spans_points) {
                out.elements.push(i);
            }
        }
    }
    out
}

/// Final pairs (event `M(j,k)`) and final elements (event `L(i)`) of `A` in
/// `Q`. Both lists are empty unless `A` internally spans `Q`.
pub fn final_pairs_and_elements(q: &Cube, a: &Configuration) -> FinalEvents {
    final_events_points(q, &points_in(q, a), true)
}

pub(crate) fn endings_points(q: &Cube, points: &[Vec<usize>]) -> Vec<(usize, usize)> {
    if sequential_points(q, points).is_none() {
        return Vec::new();
    }
    let free = q.free_axes();
    let mut out = Vec::new();
    for (x, &j) in free.iter().enumerate() {
        for &k in &free[x + 1..] {
            let fam = subcube_family(q, &[j, k], FamilyMode::ConstantOn).expect("axes are free");
            if one_off_member(&fam, points, |c, inside| sequential_points(c, inside).is_some()) {
                out.push((j, k));
            }
        }
    }
    out
}

/// Endings of a sequentially spanning `A` in `Q`: pairs `{j,k}` such that all
/// but one point of `A` sequentially span a member of `Q<j,k>`.
pub fn endings(q: &Cube, a: &Configuration) -> Vec<(usize, usize)> {
    endings_points(q, &points_in(q, a))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::GridShape;

    #[test]
    fn square_sequence() {
        let s = GridShape::hypercube(2).unwrap();
        let a = Configuration::from_coords(&s, &[&[0, 0], &[1, 1]]).unwrap();
        let seq = sequential_spanning(&s.full_cube(), &a).unwrap();
        assert_eq!(seq.order, vec![Cell(vec![0, 0]), Cell(vec![1, 1])]);
        assert_eq!(seq.prefix_cubes[1], s.full_cube());
        assert_eq!(endings(&s.full_cube(), &a), vec![(0, 1)]);
    }

    #[test]
    fn four_cube_example() {
        let s = GridShape::hypercube(4).unwrap();
        let q = s.full_cube();
        let a = Configuration::from_coords(&s, &[&[0, 0, 0, 0], &[1, 1, 0, 0], &[0, 0, 1, 1]]).unwrap();
        let ev = final_pairs_and_elements(&q, &a);
        assert_eq!(ev.pairs, vec![(0, 1), (2, 3)]);
        assert!(ev.elements.is_empty());
        let seq = sequential_spanning(&q, &a).unwrap();
        for (j, c) in seq.prefix_cubes.iter().enumerate() {
            assert_eq!(c.dim(), 2 * j);
        }
        let none = Configuration::from_coords(&s, &[&[0, 0, 0, 0], &[1, 1, 1, 1]]).unwrap();
        assert!(final_pairs_and_elements(&q, &none).is_empty());
    }

    #[test]
    fn wrong_size_has_no_sequence() {
        let s = GridShape::hypercube(4).unwrap();
        let a = Configuration::from_coords(&s, &[&[0, 0, 0, 0], &[1, 1, 0, 0], &[0, 0, 1, 1], &[1, 1, 1, 1]]).unwrap();
        assert!(sequential_spanning(&s.full_cube(), &a).is_none());
        let odd = GridShape::hypercube(3).unwrap();
        let b = Configuration::from_coords(&odd, &[&[0, 0, 0], &[1, 1, 1]]).unwrap();
        assert!(sequential_spanning(&odd.full_cube(), &b).is_none());
    }
}
