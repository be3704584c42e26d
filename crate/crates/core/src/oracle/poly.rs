use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;

use super::{hypercube, vertex};
use crate::bootstrap::cubes::spans_points;
use crate::bootstrap::sequential::final_events_points;
use crate::error::{Error, Result};
use crate::exact::ln_big;

pub const MAX_POLY_DIM: usize = 4;

/// `P(p) = sum_k c_k p^k (1-p)^{2^dim - k}` with `c_k` the number of
/// `k`-subsets of `[2]^dim` in the event.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SpanPolynomial {
    pub dim: usize,
    #[serde(serialize_with = "as_strings")]
    pub coefficients: Vec<BigUint>,
}

fn as_strings<S: serde::Serializer>(v: &[BigUint], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(|x| x.to_string()))
}

impl SpanPolynomial {
    pub fn cells(&self) -> usize {
        1 << self.dim
    }

    /// Smallest `k` with `c_k > 0`.
    pub fn lowest_degree(&self) -> Option<usize> {
        self.coefficients.iter().position(|c| !c.is_zero())
    }

    pub fn eval_exact(&self, p: &BigRational) -> BigRational {
        let q = BigRational::one() - p;
        let n = self.cells();
        let mut acc = BigRational::zero();
        for (k, c) in self.coefficients.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            acc += BigRational::from_integer(BigInt::from(c.clone()))
                * num_traits::pow(p.clone(), k)
                * num_traits::pow(q.clone(), n - k);
        }
        acc
    }

    /// Log-space evaluation; `p` in `[0, 1]`.
    pub fn eval(&self, p: f64) -> f64 {
        let n = self.cells() as f64;
        let (lp, lq) = (p.ln(), (-p).ln_1p());
        let mut acc = 0.0;
        for (k, c) in self.coefficients.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let kf = k as f64;
            let lp_term = if k == 0 { 0.0 } else { kf * lp };
            let lq_term = if n - kf == 0.0 { 0.0 } else { (n - kf) * lq };
            acc += (ln_big(c) + lp_term + lq_term).exp();
        }
        acc
    }
}

fn check_dim(dim: usize) -> Result<()> {
    if dim > MAX_POLY_DIM {
        return Err(Error::GuardExceeded(format!(
            "polynomials enumerate 2^(2^{dim}) subsets; dim must be at most {MAX_POLY_DIM}"
        )));
    }
    Ok(())
}

fn polynomial_of(dim: usize, event: impl Fn(&[Vec<usize>]) -> bool) -> SpanPolynomial {
    let n = 1usize << dim;
    let verts: Vec<Vec<usize>> = (0..n).map(|v| vertex(v, dim)).collect();
    let mut counts = vec![0u64; n + 1];
    let mut pts = Vec::with_capacity(n);
    for mask in 0u64..(1u64 << n) {
        pts.clear();
        for (v, coords) in verts.iter().enumerate() {
            if mask >> v & 1 == 1 {
                pts.push(coords.clone());
            }
        }
        if event(&pts) {
            counts[pts.len()] += 1;
        }
    }
    SpanPolynomial {
        dim,
        coefficients: counts.into_iter().map(BigUint::from).collect(),
    }
}

/// `P(dim, p)`, the probability that a `p`-random subset of `[2]^dim`
/// internally spans it.
pub fn span_polynomial(dim: usize) -> Result<SpanPolynomial> {
    check_dim(dim)?;
    let q = hypercube(dim);
    Ok(polynomial_of(dim, |pts| spans_points(&q, pts)))
}

/// `R(dim, p)`: the union of the final-pair events, together with the
/// final-element events when `dim` is odd.
pub fn r_event_polynomial(dim: usize) -> Result<SpanPolynomial> {
    check_dim(dim)?;
    let q = hypercube(dim);
    let odd = dim % 2 == 1;
    Ok(polynomial_of(dim, |pts| !final_events_points(&q, pts, odd).is_empty()))
}

impl SpanPolynomial {
    /// `c_k` as `f64`, for display.
    pub fn coefficient_f64(&self, k: usize) -> f64 {
        self.coefficients.get(k).and_then(|c| c.to_f64()).unwrap_or(0.0)
    }
}
