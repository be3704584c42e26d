use std::sync::OnceLock;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use sha2::{Digest, Sha256};

use super::ln_factorial;
use crate::error::{Error, Result};

/// Largest accepted series tolerance.
pub const MAX_TOLERANCE: f64 = 1e-2;

/// Working precision of [`LambdaContext::standard`].
pub const DEFAULT_PRECISION_BITS: u32 = 128;

/// The bisection always resolves the truncated root to at least this many
/// fractional bits, however loose the series tolerance.
const MIN_FRACTION_BITS: u32 = 64;

/// λ, the smallest positive root of `sum_k (-1)^k x^k / (2^(k^2-k) k!)`,
/// held as an exact dyadic rational.
#[derive(Clone, Debug)]
pub struct LambdaContext {
    value: BigRational,
    approx: f64,
    truncation_order: usize,
    tolerance: f64,
    residual: f64,
}

fn pow2(e: u64) -> BigInt {
    BigInt::one() << e
}

/// Partial sum `sum_{k<=order} (-1)^k x^k / (2^(k^2-k) k!)`.
pub fn truncated_series(x: &BigRational, order: usize) -> BigRational {
    let mut term = BigRational::one();
    let mut sum = BigRational::one();
    for k in 1..=order {
        term = term * x / BigRational::from_integer(pow2(2 * (k as u64 - 1)) * BigInt::from(k));
        if k % 2 == 1 {
            sum -= &term;
        } else {
            sum += &term;
        }
    }
    sum
}

/// Smallest `K` such that the first omitted term at `x` is below `bound`.
fn truncation_order(x: &BigRational, bound: &BigRational) -> usize {
    let mut term = BigRational::one();
    let mut k = 0usize;
    loop {
        let next = &term * x / BigRational::from_integer(pow2(2 * k as u64) * BigInt::from(k + 1));
        if &next < bound {
            return k;
        }
        term = next;
        k += 1;
    }
}

pub fn lambda_root(tolerance: f64) -> Result<LambdaContext> {
    if !(tolerance > 0.0 && tolerance <= MAX_TOLERANCE) {
        return Err(Error::InvalidArgument(format!(
            "tolerance must lie in (0, {MAX_TOLERANCE}], got {tolerance}"
        )));
    }
    let tol = BigRational::from_float(tolerance).expect("finite tolerance");
    let mut lo = BigRational::one();
    let mut hi = BigRational::new(BigInt::from(6), BigInt::from(5));
    let order = truncation_order(&hi, &(&tol / BigRational::from_integer(BigInt::from(10))));

    if !(truncated_series(&lo, order).is_positive() && truncated_series(&hi, order).is_negative()) {
        return Err(Error::NoSignChange { lo: 1.0, hi: 1.2 });
    }
    let floor = BigRational::new(BigInt::one(), pow2(MIN_FRACTION_BITS as u64));
    let width = tol.clone().min(floor) / BigRational::from_integer(BigInt::from(4));
    let two = BigRational::from_integer(BigInt::from(2));
    while &hi - &lo > width {
        let mid = (&lo + &hi) / &two;
        if truncated_series(&mid, order).is_positive() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let value = (lo + hi) / two;

    // The defining identity in terms of a_m: sum_{m>=1} (-1)^{m+1} a_m = 1.
    let mut alt = BigRational::zero();
    for m in 1..=order.max(1) {
        let a = a_m_rational(&value, m);
        if m % 2 == 1 {
            alt += a;
        } else {
            alt -= a;
        }
    }
    let residual = (alt - BigRational::one()).abs().to_f64().unwrap_or(f64::INFINITY);
    if residual >= tolerance {
        return Err(Error::InvalidArgument(format!(
            "series residual {residual:e} not below tolerance {tolerance:e}"
        )));
    }
    Ok(LambdaContext {
        approx: value.to_f64().expect("λ is a small rational"),
        value,
        truncation_order: order,
        tolerance,
        residual,
    })
}

fn a_m_rational(lambda: &BigRational, m: usize) -> BigRational {
    let two_lambda = lambda * BigRational::from_integer(BigInt::from(2));
    let num = num_traits::pow(two_lambda, m);
    let fact: BigUint = (1..=m as u64).map(BigUint::from).product();
    let den = BigRational::from_integer(pow2((m * m) as u64) * BigInt::from(fact));
    num / den
}

impl LambdaContext {
    /// Context with series tolerance `2^-bits`.
    pub fn with_precision_bits(bits: u32) -> Result<Self> {
        if !(7..=1000).contains(&bits) {
            return Err(Error::InvalidArgument(format!(
                "precision must be between 7 and 1000 bits, got {bits}"
            )));
        }
        lambda_root(2f64.powi(-(bits as i32)))
    }

    /// Shared 128-bit context.
    pub fn standard() -> &'static LambdaContext {
        static CTX: OnceLock<LambdaContext> = OnceLock::new();
        CTX.get_or_init(|| Self::with_precision_bits(DEFAULT_PRECISION_BITS).expect("default precision is valid"))
    }

    pub fn lambda(&self) -> f64 {
        self.approx
    }

    pub fn exact(&self) -> &BigRational {
        &self.value
    }

    pub fn truncation_order(&self) -> usize {
        self.truncation_order
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    /// `|1 - sum_{m<=K} (-1)^{m+1} a_m|` at the stored value.
    pub fn residual(&self) -> f64 {
        self.residual
    }

    /// Bits of precision implied by the tolerance.
    pub fn precision_bits(&self) -> u32 {
        (-self.tolerance.log2()).ceil().max(0.0) as u32
    }

    /// λ truncated to `digits` decimal places.
    pub fn decimal(&self, digits: usize) -> String {
        let scale = BigInt::from(10u32).pow(digits as u32);
        let scaled = (&self.value * BigRational::from_integer(scale)).floor().to_integer();
        let s = scaled.to_string();
        let (int, frac) = s.split_at(s.len() - digits);
        if digits == 0 {
            int.to_string()
        } else {
            format!("{int}.{frac}")
        }
    }

    /// Short digest identifying the exact value, for run manifests.
    pub fn digest(&self) -> String {
        let mut h = Sha256::new();
        h.update(self.value.numer().to_str_radix(16).as_bytes());
        h.update(b"/");
        h.update(self.value.denom().to_str_radix(16).as_bytes());
        hex::encode(h.finalize())[..16].to_string()
    }

    /// `a_m = (2λ)^m / (2^(m^2) m!)` as an exact rational at the stored λ.
    pub fn a_m_exact(&self, m: usize) -> BigRational {
        a_m_rational(&self.value, m)
    }

    /// `ln a_m`.
    pub fn a_m_log(&self, m: usize) -> f64 {
        let m_f = m as f64;
        m_f * (2.0 * self.approx).ln() - m_f * m_f * std::f64::consts::LN_2 - ln_factorial(m as u64)
    }

    pub fn a_m(&self, m: usize) -> f64 {
        self.a_m_log(m).exp()
    }

    /// `ln z(2l)` with `z(2l) = (2l)! λ^(-l) 2^(l^2)`.
    pub fn ln_z(&self, ell: usize) -> f64 {
        let l = ell as f64;
        ln_factorial(2 * ell as u64) - l * self.approx.ln() + l * l * std::f64::consts::LN_2
    }

    /// `ln` of `(2l+1)! λ^(-l) 2^((l+1)^2)`, the odd-dimension analogue.
    pub fn ln_z_odd(&self, ell: usize) -> f64 {
        let l = ell as f64;
        ln_factorial(2 * ell as u64 + 1) - l * self.approx.ln() + (l + 1.0) * (l + 1.0) * std::f64::consts::LN_2
    }
}
