use std::collections::BTreeMap;
use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Signed};
use serde::{Deserialize, Serialize};

use super::{ln_big, pow2, LambdaContext};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundTag {
    Exact,
    Upper,
    Lower,
}

impl fmt::Display for BoundTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BoundTag::Exact => "exact",
            BoundTag::Upper => "upper",
            BoundTag::Lower => "lower",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoundValue {
    pub value: BigUint,
    pub tag: BoundTag,
}

impl BoundValue {
    pub fn exact(value: BigUint) -> Self {
        Self {
            value,
            tag: BoundTag::Exact,
        }
    }
    pub fn upper(value: BigUint) -> Self {
        Self {
            value,
            tag: BoundTag::Upper,
        }
    }
    pub fn lower(value: BigUint) -> Self {
        Self {
            value,
            tag: BoundTag::Lower,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum CountKind {
    S,
    Pstar,
    Rstar,
    Ystar,
}

impl fmt::Display for CountKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CountKind::S => "S",
            CountKind::Pstar => "Pstar",
            CountKind::Rstar => "Rstar",
            CountKind::Ystar => "Ystar",
        })
    }
}

/// Big-integer values indexed by hypercube dimension. A dimension holds either
/// one exact value or an upper and/or a lower bound.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CountTable {
    pub kind: CountKind,
    entries: BTreeMap<usize, Vec<BoundValue>>,
}

impl CountTable {
    pub fn new(kind: CountKind) -> Self {
        Self {
            kind,
            entries: BTreeMap::new(),
        }
    }

    pub fn insert(&mut self, dim: usize, v: BoundValue) {
        let slot = self.entries.entry(dim).or_default();
        slot.retain(|old| old.tag != v.tag);
        slot.push(v);
        slot.sort_by_key(|b| b.tag);
    }

    pub fn get(&self, dim: usize) -> &[BoundValue] {
        self.entries.get(&dim).map(Vec::as_slice).unwrap_or(&[])
    }

    fn tagged(&self, dim: usize, tag: BoundTag) -> Option<&BigUint> {
        self.get(dim).iter().find(|b| b.tag == tag).map(|b| &b.value)
    }

    pub fn exact(&self, dim: usize) -> Option<&BigUint> {
        self.tagged(dim, BoundTag::Exact)
    }

    /// The exact value if known, else the upper bound.
    pub fn upper(&self, dim: usize) -> Option<&BigUint> {
        self.exact(dim).or_else(|| self.tagged(dim, BoundTag::Upper))
    }

    /// The exact value if known, else the lower bound.
    pub fn lower(&self, dim: usize) -> Option<&BigUint> {
        self.exact(dim).or_else(|| self.tagged(dim, BoundTag::Lower))
    }

    pub fn dims(&self) -> impl Iterator<Item = usize> + '_ {
        self.entries.keys().copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, &BoundValue)> {
        self.entries.iter().flat_map(|(d, vs)| vs.iter().map(move |v| (*d, v)))
    }
}

/// `|S(l)|` for `l = 0..=ell_max` by the integer recursion
/// `|S(l)| = sum_m (-1)^{m+1} (2l)!/(2^m m! (2l-2m)!) 2^{2lm-2m^2+2m} |S(l-m)|`.
pub fn spanning_sequence(ell_max: usize) -> Vec<BigUint> {
    let mut s: Vec<BigInt> = vec![BigInt::one(), BigInt::from(2)];
    let mut fact = vec![BigUint::one()];
    for i in 1..=2 * ell_max as u64 {
        let next = fact.last().expect("non-empty") * i;
        fact.push(next);
    }
    for ell in 2..=ell_max {
        let l = ell as u64;
        let mut acc = BigInt::ZERO;
        for m in 1..=l {
            let pairs = &fact[2 * ell] / (pow2(m) * &fact[m as usize] * &fact[2 * ell - 2 * m as usize]);
            let term = BigInt::from(pairs * pow2(2 * l * m - 2 * m * m + 2 * m)) * &s[(l - m) as usize];
            if m % 2 == 1 {
                acc += term;
            } else {
                acc -= term;
            }
        }
        debug_assert!(acc.is_positive());
        s.push(acc);
    }
    s.truncate(ell_max + 1);
    s.into_iter()
        .map(|v| v.to_biguint().expect("counts are positive"))
        .collect()
}

pub fn spanning_count(ell: usize) -> BigUint {
    spanning_sequence(ell).pop().expect("non-empty")
}

/// Table of kind `S` keyed by dimension `2l`, all entries exact.
pub fn spanning_counts(ell_max: usize) -> CountTable {
    let mut t = CountTable::new(CountKind::S);
    for (ell, v) in spanning_sequence(ell_max).into_iter().enumerate() {
        t.insert(2 * ell, BoundValue::exact(v));
    }
    t
}

/// `g(l) = |S(l)| / ((2l)! λ^(-l) 2^(l^2))`, from the exact count.
pub fn g_normalized(ctx: &LambdaContext, ell: usize) -> f64 {
    (ln_big(&spanning_count(ell)) - ctx.ln_z(ell)).exp()
}

/// `g(0..=ell_max)` from the exact counts.
pub fn g_normalized_sequence(ctx: &LambdaContext, ell_max: usize) -> Vec<f64> {
    spanning_sequence(ell_max)
        .iter()
        .enumerate()
        .map(|(ell, s)| (ln_big(s) - ctx.ln_z(ell)).exp())
        .collect()
}

/// `g(0..=ell_max)` from `g(l) = sum_m (-1)^{m+1} a_m g(l-m)` in floating
/// point, an implementation independent of the integer recursion.
pub fn g_recursive(ctx: &LambdaContext, ell_max: usize) -> Vec<f64> {
    let mut g = vec![1.0, ctx.lambda() / 2.0];
    let a: Vec<f64> = (0..=ell_max).map(|m| if m == 0 { 0.0 } else { ctx.a_m(m) }).collect();
    for ell in 2..=ell_max {
        let mut acc = 0.0;
        // Smallest terms first.
        for m in (1..=ell).rev() {
            let t = a[m] * g[ell - m];
            if m % 2 == 1 {
                acc += t;
            } else {
                acc -= t;
            }
        }
        g.push(acc);
    }
    g.truncate(ell_max + 1);
    g
}
