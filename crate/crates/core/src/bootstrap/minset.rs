use crate::error::{Error, Result};
use crate::lattice::{Configuration, GridShape};

/// `ceil(sum_i (a_i - 1) / 2) + 1`, the size of a smallest two-neighbour
/// percolating set.
pub fn min_percolating_size(shape: &GridShape) -> usize {
    let total: usize = shape.sides().iter().map(|s| s - 1).sum();
    total.div_ceil(2) + 1
}

/// A smallest percolating set for the two-neighbour process.
///
/// Starts at the origin and repeatedly places a point two steps beyond the
/// upper corner of the current closure cube, consuming axes in order. If the
/// total number of steps is odd the last point is only one step away.
pub fn min_percolating_set(shape: &GridShape, r: u32) -> Result<Configuration> {
    if r != 2 {
        return Err(Error::UnsupportedThreshold(r));
    }
    let steps: Vec<usize> = shape
        .sides()
        .iter()
        .enumerate()
        .flat_map(|(axis, &s)| std::iter::repeat(axis).take(s - 1))
        .collect();
    let mut hi = vec![0; shape.dim()];
    let mut a = Configuration::empty(shape);
    a.insert_index(0);
    for chunk in steps.chunks(2) {
        for &axis in chunk {
            hi[axis] += 1;
        }
        a.insert_index(shape.index(&hi));
    }
    Ok(a)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bootstrap::percolates;

    #[test]
    fn small_examples() {
        for (n, d, size) in [(2, 4, 3), (3, 2, 3), (2, 1, 2)] {
            let s = GridShape::uniform(n, d).unwrap();
            let a = min_percolating_set(&s, 2).unwrap();
            assert_eq!(a.len(), size);
            assert_eq!(min_percolating_size(&s), size);
            assert!(percolates(&a, 2));
        }
    }

    #[test]
    fn rejects_other_thresholds() {
        let s = GridShape::uniform(3, 3).unwrap();
        assert!(matches!(
            min_percolating_set(&s, 3),
            Err(Error::UnsupportedThreshold(3))
        ));
    }

    #[test]
    fn single_cell_grid() {
        let s = GridShape::uniform(1, 3).unwrap();
        let a = min_percolating_set(&s, 2).unwrap();
        assert_eq!(a.len(), 1);
        assert!(percolates(&a, 2));
    }
}
