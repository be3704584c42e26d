use num_bigint::BigUint;

use super::{hypercube, next_colex, vertex};
use crate::bootstrap::cubes::spans_points;
use crate::bootstrap::sequential::{endings_points, sequential_points, FinalEvents};
use crate::error::{Error, Result};
use crate::exact::{pow2, spanning_count};
use crate::lattice::Cube;

fn pairs_disjoint(pairs: &[(usize, usize)]) -> bool {
    let mut seen = Vec::new();
    for &(j, k) in pairs {
        if j == k || seen.contains(&j) || seen.contains(&k) {
            return false;
        }
        seen.push(j);
        seen.push(k);
    }
    true
}

fn validate_pairs(ell: usize, pairs: &[(usize, usize)]) -> Result<()> {
    if ell < 2 {
        return Err(Error::InvalidArgument(format!("need l >= 2, got {ell}")));
    }
    if pairs.is_empty() {
        return Err(Error::InvalidArgument("need at least one pair".into()));
    }
    for (x, &(j, k)) in pairs.iter().enumerate() {
        if j >= 2 * ell || k >= 2 * ell {
            return Err(Error::InvalidArgument(format!(
                "pair ({j},{k}) outside [0, {})",
                2 * ell
            )));
        }
        let norm = (j.min(k), j.max(k));
        if pairs[..x].iter().any(|&(a, b)| (a.min(b), a.max(b)) == norm) {
            return Err(Error::InvalidArgument(format!("pair ({j},{k}) repeated")));
        }
    }
    Ok(())
}

/// `2^{2m} (2^{2l-2m})^m |S(l-m)|` for `m` disjoint pairs, else 0.
pub fn njk_closed_form(ell: usize, pairs: &[(usize, usize)]) -> BigUint {
    let m = pairs.len();
    if !pairs_disjoint(pairs) || 2 * m > 2 * ell {
        return BigUint::ZERO;
    }
    pow2(2 * m as u64) * pow2(((2 * ell - 2 * m) * m) as u64) * spanning_count(ell - m)
}

/// Number of sequentially spanning `(l+1)`-subsets of `[2]^{2l}` for which
/// every given pair (0-based axes) is an ending, by enumeration.
pub fn njk_intersection(ell: usize, pairs: &[(usize, usize)]) -> Result<BigUint> {
    validate_pairs(ell, pairs)?;
    if ell > 3 {
        return Err(Error::GuardExceeded(format!(
            "l = {ell} > 3 enumerates C(2^{}, {}) sets",
            2 * ell,
            ell + 1
        )));
    }
    let want: Vec<(usize, usize)> = pairs.iter().map(|&(j, k)| (j.min(k), j.max(k))).collect();
    let d = 2 * ell;
    let q = hypercube(d);
    let mut c: Vec<usize> = (0..=ell).collect();
    let mut count: u64 = 0;
    loop {
        let pts: Vec<Vec<usize>> = c.iter().map(|&v| vertex(v, d)).collect();
        let ends = endings_points(&q, &pts);
        if want.iter().all(|p| ends.contains(p)) {
            count += 1;
        }
        if !next_colex(&mut c, 1 << d) {
            break;
        }
    }
    Ok(BigUint::from(count))
}

fn delta_vertex_cube(a: &[usize], c: &Cube) -> Vec<usize> {
    (0..a.len()).filter(|&i| !c.is_free(i) && c.lo()[i] != a[i]).collect()
}

/// Checks the final-event structure of a spanning set `pts` of `q`:
///
/// - final pairs are pairwise disjoint and share no axis with a final element;
/// - for `dim(q) >= 3`, each final pair `{j,k}` has a unique point `a` with
///   `j, k` in `Δ(a, c)` for every other point `c`; these points are distinct,
///   the rest `A'` lies in and spans a cube `C'` constant on all pair axes,
///   and `Δ(a, C') = {j, k}`;
/// - if `endings` is given, the same holds with `A'` sequentially spanning
///   the `C'` obtained from the endings alone.
pub fn check_final_structure(
    q: &Cube,
    pts: &[Vec<usize>],
    events: &FinalEvents,
    endings: Option<&[(usize, usize)]>,
) -> bool {
    if !pairs_disjoint(&events.pairs) {
        return false;
    }
    if events
        .elements
        .iter()
        .any(|i| events.pairs.iter().any(|&(j, k)| *i == j || *i == k))
    {
        return false;
    }
    if q.dim() < 3 || pts.len() < 3 {
        return true;
    }
    if !strip_pairs(q, pts, &events.pairs, false) {
        return false;
    }
    match endings {
        Some(e) => strip_pairs(q, pts, e, true),
        None => true,
    }
}

fn strip_pairs(q: &Cube, pts: &[Vec<usize>], pairs: &[(usize, usize)], sequential: bool) -> bool {
    if pairs.is_empty() {
        return true;
    }
    let mut removed = Vec::new();
    for &(j, k) in pairs {
        let owners: Vec<usize> = (0..pts.len())
            .filter(|&x| {
                (0..pts.len())
                    .filter(|&y| y != x)
                    .all(|y| pts[x][j] != pts[y][j] && pts[x][k] != pts[y][k])
            })
            .collect();
        if owners.len() != 1 || removed.contains(&owners[0]) {
            return false;
        }
        removed.push(owners[0]);
    }
    let rest: Vec<Vec<usize>> = (0..pts.len())
        .filter(|x| !removed.contains(x))
        .map(|x| pts[x].clone())
        .collect();
    let mut lo = q.lo().to_vec();
    let mut hi = q.hi().to_vec();
    for &(j, k) in pairs {
        for axis in [j, k] {
            let v = rest[0][axis];
            if rest.iter().any(|p| p[axis] != v) {
                return false;
            }
            lo[axis] = v;
            hi[axis] = v;
        }
    }
    let c = Cube::new(lo, hi).expect("lo <= hi");
    let spanned = if sequential {
        sequential_points(&c, &rest).is_some()
    } else {
        spans_points(&c, &rest)
    };
    if !spanned {
        return false;
    }
    pairs.iter().zip(&removed).all(|(&(j, k), &x)| {
        let mut want = vec![j.min(k), j.max(k)];
        want.sort_unstable();
        delta_vertex_cube(&pts[x], &c) == want
    })
}
