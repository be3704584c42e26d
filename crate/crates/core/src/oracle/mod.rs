//! Brute-force ground truth on `[2]^d` for small `d`: subset enumeration in
//! colexicographic order, exact spanning polynomials and the ending-count
//! identities.

mod enumerate;
mod poly;
mod structure;

pub use enumerate::{
    enumerate_counts, params_checksum, Checkpoint, EnumerationCounts, EnumerationOptions, EnumerationReport,
    ShardState, CHECKPOINT_VERSION, DEFAULT_GUARD,
};
pub use poly::{r_event_polynomial, span_polynomial, SpanPolynomial, MAX_POLY_DIM};
pub use structure::{check_final_structure, njk_closed_form, njk_intersection};

use crate::lattice::Cube;

/// `C(n, k)` in `u64`, saturating.
pub fn binom(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
        if acc > u64::MAX as u128 {
            return u64::MAX;
        }
    }
    acc as u64
}

/// The `k`-subset of `{0, 1, ...}` with colexicographic rank `rank`.
pub fn unrank_colex(mut rank: u64, k: usize) -> Vec<usize> {
    let mut out = vec![0; k];
    for i in (0..k).rev() {
        // Largest c with C(c, i+1) <= rank.
        let mut c = i;
        while binom(c as u64 + 1, i as u64 + 1) <= rank {
            c += 1;
        }
        rank -= binom(c as u64, i as u64 + 1);
        out[i] = c;
    }
    out
}

pub fn rank_colex(subset: &[usize]) -> u64 {
    subset
        .iter()
        .enumerate()
        .map(|(i, &c)| binom(c as u64, i as u64 + 1))
        .sum()
}

/// Advances `c` to the next `k`-subset of `{0..n}` in colex order; false
/// after the last one.
pub fn next_colex(c: &mut [usize], n: usize) -> bool {
    let k = c.len();
    for i in 0..k {
        let limit = if i + 1 < k { c[i + 1] } else { n };
        if c[i] + 1 < limit {
            c[i] += 1;
            for (j, v) in c.iter_mut().enumerate().take(i) {
                *v = j;
            }
            return true;
        }
    }
    false
}

/// `[2]^d` as a cube, including `d = 0`.
pub fn hypercube(d: usize) -> Cube {
    Cube::new(vec![0; d], vec![1; d]).expect("lo <= hi")
}

/// Coordinates of vertex `v` of `[2]^d`, numbered as cell indices of
/// `GridShape::hypercube(d)` (axis 0 is the most significant bit).
pub fn vertex(v: usize, d: usize) -> Vec<usize> {
    (0..d).map(|i| (v >> (d - 1 - i)) & 1).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn colex_roundtrip() {
        let mut c: Vec<usize> = (0..3).collect();
        let mut rank = 0;
        loop {
            assert_eq!(rank_colex(&c), rank);
            assert_eq!(unrank_colex(rank, 3), c);
            rank += 1;
            if !next_colex(&mut c, 7) {
                break;
            }
        }
        assert_eq!(rank, binom(7, 3));
        assert_eq!(unrank_colex(0, 0), Vec::<usize>::new());
    }

    #[test]
    fn binom_values() {
        assert_eq!(binom(64, 4), 635_376);
        assert_eq!(binom(128, 5), 264_566_400);
        assert_eq!(binom(3, 4), 0);
    }
}
