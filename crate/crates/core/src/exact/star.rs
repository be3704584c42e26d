use num_bigint::BigUint;

use super::{binomial, factorial, pow2, spanning_sequence, BoundValue, CountKind, CountTable};
use crate::error::{Error, Result};

pub const MAX_STAR_ELL: usize = 60;

/// Tables of `P*`, `R*` and `Y*` for dimensions `1..=2*ell_max+1`.
///
/// `P*(d)` counts sets of size `ceil(d/2)+1` spanning `[2]^d`, `R*(d)` those
/// with a final pair (or, for odd `d`, a final element) and `Y*(d)` the rest.
#[derive(Clone, Debug)]
pub struct StarTables {
    pub ell_max: usize,
    pub pstar: CountTable,
    pub rstar: CountTable,
    pub ystar: CountTable,
    /// `|S(l)|` for `l = 0..=ell_max`.
    pub s: Vec<BigUint>,
}

impl StarTables {
    pub fn max_dim(&self) -> usize {
        2 * self.ell_max + 1
    }
}

fn u(v: u64) -> BigUint {
    BigUint::from(v)
}

/// Upper bound on `Y*(2l)`: sum over `(k,m)` with `2 <= m <= k <= 2l-4`,
/// `k+m = 2l-2`, both even, of `2^{2l} C(2l,k) C(2l-k,m) P*(k) P*(m)`,
/// halved when `k = m`.
fn ystar_even(ell: u64, pstar_up: &dyn Fn(u64) -> BigUint) -> BigUint {
    let d = 2 * ell;
    let mut acc = BigUint::ZERO;
    let mut m = 2;
    while 2 * m <= d - 2 {
        let k = d - 2 - m;
        if k <= d - 4 {
            let mut term = pow2(d) * binomial(d, k) * binomial(d - k, m) * pstar_up(k) * pstar_up(m);
            if k == m {
                term >>= 1;
            }
            acc += term;
        }
        m += 2;
    }
    acc
}

/// Upper bound on `Y*(2l+1) = Y*_1 + Y*_2`.
fn ystar_odd(ell: u64, pstar_up: &dyn Fn(u64) -> BigUint) -> BigUint {
    let d = 2 * ell + 1;
    let mut acc = BigUint::ZERO;
    // k + m = 2l - 1, 2 <= m <= k <= 2l - 3.
    if ell >= 2 {
        for m in 2..=ell {
            let k = 2 * ell - 1 - m;
            if m > k || k > 2 * ell - 3 {
                continue;
            }
            acc += pow2(d) * binomial(d, k) * binomial(d - k, m) * pstar_up(k) * pstar_up(m);
        }
    }
    // k + m = 2l, both even, 4 <= m <= k <= 2l - 4.
    let mut m = 4;
    while 2 * m <= 2 * ell {
        let k = 2 * ell - m;
        if k <= 2 * ell - 4 {
            let weight = pow2(2 * ell - 1) * factorial(d) * u(k * m + 4) / (factorial(k) * factorial(m));
            acc += weight * pstar_up(k) * pstar_up(m);
        }
        m += 2;
    }
    acc
}

pub fn star_tables(ell_max: usize) -> Result<StarTables> {
    if ell_max > MAX_STAR_ELL {
        return Err(Error::InvalidArgument(format!(
            "star tables are limited to l <= {MAX_STAR_ELL}, got {ell_max}"
        )));
    }
    let s = spanning_sequence(ell_max.max(2));
    let max_dim = 2 * ell_max as u64 + 1;
    let mut pstar = CountTable::new(CountKind::Pstar);
    let mut rstar = CountTable::new(CountKind::Rstar);
    let mut ystar = CountTable::new(CountKind::Ystar);

    // Exact small cases: P* = R*, Y* = 0.
    for (d, v) in [(1u64, 1u64), (2, 2), (3, 32), (4, 144)] {
        if d <= max_dim {
            pstar.insert(d as usize, BoundValue::exact(u(v)));
            rstar.insert(d as usize, BoundValue::exact(u(v)));
            ystar.insert(d as usize, BoundValue::exact(BigUint::ZERO));
        }
    }

    for d in 5..=max_dim {
        let ell = d / 2;
        let up = |k: u64| pstar.upper(k as usize).expect("smaller dims filled first").clone();
        let (r_up, r_lo, y_up) = if d % 2 == 0 {
            let r_up = binomial(d, 2) * pow2(d) * up(d - 2);
            (r_up, s[ell as usize].clone(), ystar_even(ell, &up))
        } else {
            let r_up = u(d) * pow2(d) * up(d - 1) + binomial(d, 2) * pow2(d) * up(d - 2);
            (r_up, pow2(d) * &s[ell as usize], ystar_odd(ell, &up))
        };
        let p_up = &r_up + &y_up;
        let dd = d as usize;
        rstar.insert(dd, BoundValue::upper(r_up));
        rstar.insert(dd, BoundValue::lower(r_lo.clone()));
        if d == 5 {
            ystar.insert(dd, BoundValue::exact(y_up));
        } else {
            ystar.insert(dd, BoundValue::upper(y_up));
        }
        pstar.insert(dd, BoundValue::upper(p_up));
        pstar.insert(dd, BoundValue::lower(r_lo));
    }
    let mut s = s;
    s.truncate(ell_max + 1);
    Ok(StarTables {
        ell_max,
        pstar,
        rstar,
        ystar,
        s,
    })
}
