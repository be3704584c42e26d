use std::collections::BTreeMap;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Zero};

use super::{binomial, factorial, ln_big, pow2, spanning_count, LambdaContext};
use crate::error::{Error, Result};

fn check_p(p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("p must lie in [0, 1], got {p}")))
    }
}

/// `ln Q(2l, p)`; `-inf` when the probability is zero.
pub fn ln_q_exact(ell: usize, p: f64) -> Result<f64> {
    check_p(p)?;
    let s = spanning_count(ell);
    let k = (ell + 1) as f64;
    let rest = 2f64.powi(2 * ell as i32) - k;
    if p == 0.0 || (p == 1.0 && rest > 0.0) {
        return Ok(f64::NEG_INFINITY);
    }
    let tail = if rest == 0.0 { 0.0 } else { rest * (-p).ln_1p() };
    Ok(ln_big(&s) + k * p.ln() + tail)
}

/// `Q(2l, p) = |S(l)| p^{l+1} (1-p)^{2^{2l}-l-1}`, the probability that
/// `[2]^{2l}` is sequentially spanned.
pub fn q_exact(ell: usize, p: f64) -> Result<f64> {
    Ok(ln_q_exact(ell, p)?.exp())
}

/// `E_{L,m,p} = (1-p)^{2^L - 2^{L-2m} - m}` for dimension `L`.
pub fn e_factor(dim: usize, m: usize, p: f64) -> f64 {
    assert!(2 * m <= dim, "need 2m <= dim");
    let exponent = 2f64.powi(dim as i32) - 2f64.powi((dim - 2 * m) as i32) - m as f64;
    (exponent * (-p).ln_1p()).exp()
}

fn e_exponent(dim: usize, m: usize) -> BigUint {
    pow2(dim as u64) - pow2((dim - 2 * m) as u64) - BigUint::from(m)
}

/// `a_m z(2l) / z(2l-2m)`, which is free of λ:
/// `2^m (2l)! 2^{2lm-2m^2} / (m! (2l-2m)!)`.
pub fn r2ell_coefficient(ell: usize, m: usize) -> BigUint {
    let (l, m) = (ell as u64, m as u64);
    pow2(m) * factorial(2 * l) * pow2(2 * l * m - 2 * m * m) / (factorial(m) * factorial(2 * l - 2 * m))
}

/// The same coefficient through λ, `exp(ln a_m + ln z(2l) - ln z(2l-2m))`.
pub fn r2ell_coefficient_via_lambda(ctx: &LambdaContext, ell: usize, m: usize) -> f64 {
    (ctx.a_m_log(m) + ctx.ln_z(ell) - ctx.ln_z(ell - m)).exp()
}

fn check_ell(ell: usize) -> Result<()> {
    if ell < 2 {
        return Err(Error::InvalidArgument(format!(
            "the R(2l,p) recursion needs l >= 2, got {ell}"
        )));
    }
    Ok(())
}

/// Right-hand side of the recursion
/// `R(2l,p) = sum_m (-1)^{m+1} a_m p^m E_{2l,m,p} z(2l)/z(2l-2m) P(2l-2m,p)`.
///
/// `p_values` maps a dimension `2l-2m` to `P(2l-2m, p)`.
pub fn r2ell_rhs(ell: usize, p: f64, p_values: &BTreeMap<usize, f64>) -> Result<f64> {
    check_ell(ell)?;
    check_p(p)?;
    let mut acc = 0.0;
    for m in 1..=ell {
        let dim = 2 * ell - 2 * m;
        let pv = *p_values
            .get(&dim)
            .ok_or_else(|| Error::MissingValue(format!("P({dim}, p)")))?;
        let coeff = super::ln_big(&r2ell_coefficient(ell, m)).exp();
        let term = coeff * p.powi(m as i32) * e_factor(2 * ell, m, p) * pv;
        if m % 2 == 1 {
            acc += term;
        } else {
            acc -= term;
        }
    }
    Ok(acc)
}

/// [`r2ell_rhs`] in exact rational arithmetic.
pub fn r2ell_rhs_exact(ell: usize, p: &BigRational, p_values: &BTreeMap<usize, BigRational>) -> Result<BigRational> {
    check_ell(ell)?;
    if p < &BigRational::zero() || p > &BigRational::one() {
        return Err(Error::InvalidArgument("p must lie in [0, 1]".into()));
    }
    let q = BigRational::one() - p;
    let mut acc = BigRational::zero();
    for m in 1..=ell {
        let dim = 2 * ell - 2 * m;
        let pv = p_values
            .get(&dim)
            .ok_or_else(|| Error::MissingValue(format!("P({dim}, p)")))?;
        let e = e_exponent(2 * ell, m);
        let e: usize = e
            .try_into()
            .map_err(|_| Error::InvalidArgument("exponent too large".into()))?;
        let term = BigRational::from_integer(BigInt::from(r2ell_coefficient(ell, m)))
            * num_traits::pow(p.clone(), m)
            * num_traits::pow(q.clone(), e)
            * pv;
        if m % 2 == 1 {
            acc += term;
        } else {
            acc -= term;
        }
    }
    Ok(acc)
}

/// Number of `[2]^{2l}` subcubes of `[n]^d`: `C(d,2l) (n-1)^{2l} n^{d-2l}`.
pub fn subcube_count(n: usize, d: usize, ell: usize) -> BigUint {
    if 2 * ell > d {
        return BigUint::ZERO;
    }
    binomial(d as u64, 2 * ell as u64)
        * num_traits::pow(BigUint::from(n.saturating_sub(1)), 2 * ell)
        * num_traits::pow(BigUint::from(n), d - 2 * ell)
}

/// `E[X(2l,p)] = C(d,2l) n^d ((n-1)/n)^{2l} Q(2l,p)`, the expected number of
/// sequentially spanned `[2]^{2l}` subcubes of `[n]^d`.
pub fn expected_droplets(n: usize, d: usize, ell: usize, p: f64) -> Result<f64> {
    let count = subcube_count(n, d, ell);
    if count.is_zero() {
        return Ok(0.0);
    }
    Ok((ln_big(&count) + ln_q_exact(ell, p)?).exp())
}
