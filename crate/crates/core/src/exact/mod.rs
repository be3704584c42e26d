//! Closed forms and recursions: λ, `a_m`, exact spanning counts `|S(l)|`, the
//! `P*`, `R*`, `Y*` tables, probabilities `Q(2l,p)`, the `R(2l,p)` recursion,
//! small-p bounds, expected droplet counts, critical-probability formulas and
//! the technical-lemma evaluator.

mod aprops;
mod bounds;
mod counts;
mod export;
mod lambda;
mod probability;
mod published;
mod star;
mod techlemma;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};

pub use aprops::{check_a_properties, APropertyReport};
pub use bounds::{
    hypercube_order_threshold, leading_coefficient_bounds, pc_predict, thm_bounds, PcVariant, ThmBounds, DEFAULT_DELTA,
};
pub use counts::{
    g_normalized, g_normalized_sequence, g_recursive, spanning_count, spanning_counts, spanning_sequence, BoundTag,
    BoundValue, CountKind, CountTable,
};
pub use export::{tables_to_csv, tables_to_json, ExportHeader};
pub use lambda::{lambda_root, truncated_series, LambdaContext, DEFAULT_PRECISION_BITS, MAX_TOLERANCE};
pub use probability::{
    e_factor, expected_droplets, ln_q_exact, q_exact, r2ell_coefficient, r2ell_coefficient_via_lambda, r2ell_rhs,
    r2ell_rhs_exact, subcube_count,
};
pub use published::{global_ratio_checks, published_check, GlobalCheck, PublishedCheck, PublishedEntry};
pub use star::{star_tables, StarTables, MAX_STAR_ELL};
pub use techlemma::{heffect_bound, inductive_g_schedule, tech_lemma_eval, TechLemmaRun, TechLemmaVerdict};

/// Natural log of a positive big integer, accurate to about 1e-16 relative.
pub fn ln_big(n: &BigUint) -> f64 {
    let bits = n.bits();
    if bits <= 64 {
        return (n.to_u64().expect("fits in 64 bits") as f64).ln();
    }
    let shift = bits - 64;
    let top = (n >> shift).to_u64().expect("64 leading bits");
    (top as f64).ln() + shift as f64 * std::f64::consts::LN_2
}

pub fn ln_factorial(n: u64) -> f64 {
    (2..=n).map(|i| (i as f64).ln()).sum()
}

pub fn factorial(n: u64) -> BigUint {
    (2..=n).fold(BigUint::one(), |acc, i| acc * i)
}

pub fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::ZERO;
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

pub fn pow2(e: u64) -> BigUint {
    BigUint::one() << e
}
