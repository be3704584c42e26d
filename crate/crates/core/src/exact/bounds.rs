use serde::{Deserialize, Serialize};

use super::LambdaContext;
use crate::error::{Error, Result};

/// Default small-p regime: `l^2 2^{2l} p <= 0.01`.
pub const DEFAULT_DELTA: f64 = 0.01;

/// Natural logs of the small-p sandwich bounds at even dimension `2l`
/// (on `Q(2l,p) <= P(2l,p)`) and odd dimension `2l+1` (on `P(2l+1,p)`).
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ThmBounds {
    pub ell: usize,
    pub p: f64,
    pub ln_even_lower: f64,
    pub ln_even_upper: f64,
    pub ln_odd_lower: f64,
    pub ln_odd_upper: f64,
}

impl ThmBounds {
    pub fn even(&self) -> (f64, f64) {
        (self.ln_even_lower.exp(), self.ln_even_upper.exp())
    }

    pub fn odd(&self) -> (f64, f64) {
        (self.ln_odd_lower.exp(), self.ln_odd_upper.exp())
    }
}

pub fn thm_bounds(ctx: &LambdaContext, ell: usize, p: f64, delta: f64) -> Result<ThmBounds> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::InvalidArgument(format!("p must lie in (0, 1), got {p}")));
    }
    let l = ell as f64;
    let regime = l * l * 2f64.powf(2.0 * l) * p;
    if regime > delta {
        return Err(Error::OutOfRegime(format!(
            "l^2 2^(2l) p = {regime:e} exceeds delta = {delta:e}"
        )));
    }
    let ln_p = p.ln();
    let even = ctx.ln_z(ell) + (l + 1.0) * ln_p;
    let odd = ctx.ln_z_odd(ell) + (l + 2.0) * ln_p;
    Ok(ThmBounds {
        ell,
        p,
        ln_even_lower: (0.4f64).ln() + even,
        ln_even_upper: even,
        ln_odd_lower: (0.01f64).ln() + odd,
        ln_odd_upper: 5f64.ln() + odd,
    })
}

/// Bounds on the coefficient of the lowest power of `p` in `P(dim, p)`:
/// `[2/5 z(2l), z(2l)]` for `dim = 2l` and `[z'/100, 5 z']` for `dim = 2l+1`
/// with `z' = (2l+1)! λ^{-l} 2^{(l+1)^2}`.
pub fn leading_coefficient_bounds(ctx: &LambdaContext, dim: usize) -> (f64, f64) {
    let ell = dim / 2;
    if dim % 2 == 0 {
        let z = ctx.ln_z(ell).exp();
        (0.4 * z, z)
    } else {
        let z = ctx.ln_z_odd(ell).exp();
        (0.01 * z, 5.0 * z)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PcVariant {
    HypercubeLower,
    HypercubeUpper,
    GridUpper,
    GridLower,
    Sharp,
}

impl PcVariant {
    pub const ALL: [PcVariant; 5] = [
        PcVariant::HypercubeLower,
        PcVariant::HypercubeUpper,
        PcVariant::GridUpper,
        PcVariant::GridLower,
        PcVariant::Sharp,
    ];
}

/// Closed-form critical-probability expressions (logs base 2).
pub fn pc_predict(ctx: &LambdaContext, n: usize, d: usize, variant: PcVariant) -> Result<f64> {
    if d < 2 || n < 2 {
        return Err(Error::InvalidArgument(format!(
            "formulas need n >= 2 and d >= 2, got n = {n}, d = {d}"
        )));
    }
    let lam = ctx.lambda();
    let df = d as f64;
    let log_d = df.log2();
    let log_n = (n as f64).log2();
    let value = match variant {
        PcVariant::HypercubeLower | PcVariant::HypercubeUpper => {
            let correction = if variant == PcVariant::HypercubeLower {
                log_d
            } else {
                5.0 * log_d * log_d
            };
            16.0 * lam / (df * df) * (1.0 + correction / df.sqrt()) * 2f64.powf(-2.0 * df.sqrt())
        }
        PcVariant::GridUpper | PcVariant::GridLower | PcVariant::Sharp => {
            let ratio = n as f64 / (n as f64 - 1.0);
            let root = (df * log_n).sqrt();
            // Written with `log n - 1` so that n = 2 gives the hypercube
            // expressions bit for bit.
            let correction = match variant {
                PcVariant::GridUpper => 5.0 * log_d * log_d + 11.0 * (log_n - 1.0),
                PcVariant::GridLower => log_d - 16.0 * (log_n - 1.0),
                _ => 0.0,
            };
            4.0 * lam * ratio * ratio / (df * df) * (1.0 + correction / root) * 2f64.powf(-2.0 * root)
        }
    };
    Ok(value)
}

/// Smallest `d0 >= 2` such that the hypercube lower formula is below the upper
/// one for every `d` in `d0..=d_max`.
pub fn hypercube_order_threshold(ctx: &LambdaContext, d_max: usize) -> Option<usize> {
    let mut d0 = None;
    for d in (2..=d_max).rev() {
        let lo = pc_predict(ctx, 2, d, PcVariant::HypercubeLower).ok()?;
        let hi = pc_predict(ctx, 2, d, PcVariant::HypercubeUpper).ok()?;
        if lo < hi {
            d0 = Some(d);
        } else {
            break;
        }
    }
    d0
}
