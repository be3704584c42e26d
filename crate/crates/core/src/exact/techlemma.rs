use serde::Serialize;

use super::LambdaContext;
use crate::error::{Error, Result};

/// Relative slack for comparing floating-point values against the bounds.
const SLACK: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TechLemmaVerdict {
    pub f_ell: f64,
    pub lower_bound: f64,
    pub upper_bound: f64,
    pub within_bounds: bool,
    /// Steps `t` at which `(λ/2) h(t-1) f(t-1) <= f(t) <= (3λ/2) h(t-1) f(t-1)`
    /// fails.
    pub step_bound_violations: Vec<usize>,
}

impl TechLemmaVerdict {
    pub fn holds(&self) -> bool {
        self.within_bounds && self.step_bound_violations.is_empty()
    }
}

/// `f(0..=l)` from `f(0) = 1`, `f(1) = λ/2` and
/// `f(t) = sum_{m=1}^t (-1)^{m+1} a_m h(t-m) f(t-m)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TechLemmaRun {
    pub ell: usize,
    pub lambda: f64,
    /// `g(0..l)`.
    pub g: Vec<f64>,
    /// `h(0..l)`.
    pub h: Vec<f64>,
    pub f: Vec<f64>,
    /// Largest relative gap between `f(t)` and the recursion summed in the
    /// opposite order.
    pub recursion_residual: f64,
    pub verdict: TechLemmaVerdict,
}

/// The schedule `g(0) = 0`, `g(1) = g(2) = cδ`, `g(m) = cδ/m^2 + 2^{-m}`.
pub fn inductive_g_schedule(c_delta: f64, len: usize) -> Vec<f64> {
    (0..len)
        .map(|m| match m {
            0 => 0.0,
            1 | 2 => c_delta,
            _ => c_delta / (m * m) as f64 + 2f64.powi(-(m as i32)),
        })
        .collect()
}

/// `H(l) = (λ/2) exp(sum_{m=1}^{l-1} g(m) / (2-λ))`.
pub fn heffect_bound(lambda: f64, g: &[f64], ell: usize) -> f64 {
    let s: f64 = g.iter().take(ell).skip(1).sum();
    lambda / 2.0 * (s / (2.0 - lambda)).exp()
}

fn validate(ell: usize, g: &[f64], h: &[f64]) -> Result<()> {
    if ell == 0 {
        return Err(Error::InvalidArgument("l must be at least 1".into()));
    }
    if g.len() < ell || h.len() < ell {
        return Err(Error::InvalidArgument(format!(
            "need g(0..{ell}) and h(0..{ell}), got {} and {} values",
            g.len(),
            h.len()
        )));
    }
    if g[0] != 0.0 {
        return Err(Error::InvalidArgument(format!("g(0) must be 0, got {}", g[0])));
    }
    for m in 0..ell {
        if !(g[m].is_finite() && g[m] >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "g({m}) = {} is not a nonnegative number",
                g[m]
            )));
        }
        if !(h[m] >= 1.0 && h[m] <= 1.0 + g[m]) {
            return Err(Error::InvalidArgument(format!(
                "h({m}) = {} is outside [1, 1 + g({m})] = [1, {}]",
                h[m],
                1.0 + g[m]
            )));
        }
    }
    Ok(())
}

pub fn tech_lemma_eval(ctx: &LambdaContext, ell: usize, g: &[f64], h: &[f64]) -> Result<TechLemmaRun> {
    validate(ell, g, h)?;
    let lambda = ctx.lambda();
    let a: Vec<f64> = (0..=ell).map(|m| if m == 0 { 0.0 } else { ctx.a_m(m) }).collect();
    let term = |f: &[f64], t: usize, m: usize| {
        let v = a[m] * h[t - m] * f[t - m];
        if m % 2 == 1 {
            v
        } else {
            -v
        }
    };
    let mut f = vec![1.0, lambda / 2.0];
    for t in 2..=ell {
        let v: f64 = (1..=t).rev().map(|m| term(&f, t, m)).sum();
        f.push(v);
    }
    f.truncate(ell + 1);

    let mut residual: f64 = 0.0;
    for t in 2..=ell {
        let v: f64 = (1..=t).map(|m| term(&f, t, m)).sum();
        residual = residual.max(((v - f[t]) / f[t]).abs());
    }

    let mut step_bound_violations = Vec::new();
    for t in 1..=ell {
        let base = h[t - 1] * f[t - 1];
        let lo = lambda / 2.0 * base;
        let hi = 1.5 * lambda * base;
        if !(lo > 0.0 && f[t] >= lo * (1.0 - SLACK) && f[t] <= hi * (1.0 + SLACK)) {
            step_bound_violations.push(t);
        }
    }
    let lower_bound = 1.0 - lambda / 2.0;
    let upper_bound = heffect_bound(lambda, g, ell);
    let f_ell = f[ell];
    let within_bounds = f_ell >= lower_bound * (1.0 - SLACK) && f_ell <= upper_bound * (1.0 + SLACK);
    Ok(TechLemmaRun {
        ell,
        lambda,
        g: g[..ell].to_vec(),
        h: h[..ell].to_vec(),
        f,
        recursion_residual: residual,
        verdict: TechLemmaVerdict {
            f_ell,
            lower_bound,
            upper_bound,
            within_bounds,
            step_bound_violations,
        },
    })
}

impl TechLemmaRun {
    /// Largest relative gap between `f(t)` and the rewritten form
    /// `1 - λ/2 + sum_m b(m) h(t-m) f(t-m) + sum_m (h(t-m) - 1) f(t-m)`
    /// with `b(m) = sum_{i<=m} (-1)^{i+1} a_i - 1`, over `1 <= t <= l`.
    pub fn rewritten_recursion_gap(&self, ctx: &LambdaContext) -> f64 {
        let lambda = self.lambda;
        let mut b = vec![0.0; self.ell + 1];
        let mut partial = 0.0;
        for (m, bm) in b.iter_mut().enumerate().skip(1) {
            let a = ctx.a_m(m);
            partial += if m % 2 == 1 { a } else { -a };
            *bm = partial - 1.0;
        }
        let mut worst: f64 = 0.0;
        for t in 1..=self.ell {
            let mut v = 1.0 - lambda / 2.0;
            for (m, bm) in b.iter().enumerate().take(t + 1).skip(1) {
                v += bm * self.h[t - m] * self.f[t - m];
                v += (self.h[t - m] - 1.0) * self.f[t - m];
            }
            worst = worst.max(((v - self.f[t]) / self.f[t]).abs());
        }
        worst
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_h() {
        let ctx = LambdaContext::standard();
        let g = vec![0.0; 50];
        let h = vec![1.0; 50];
        let run = tech_lemma_eval(ctx, 50, &g, &h).unwrap();
        let lam = ctx.lambda();
        assert!(run.f[50] >= 1.0 - lam / 2.0 && run.f[50] <= lam / 2.0);
        assert!(run.verdict.holds());
        assert!(run.recursion_residual < 1e-12);
        assert!(run.rewritten_recursion_gap(ctx) < 1e-12);
    }

    #[test]
    fn saturated_h() {
        let ctx = LambdaContext::standard();
        let mut g: Vec<f64> = (0..100).map(|m| 0.01 / (m * m).max(1) as f64).collect();
        g[0] = 0.0;
        let h: Vec<f64> = g.iter().map(|x| 1.0 + x).collect();
        let run = tech_lemma_eval(ctx, 100, &g, &h).unwrap();
        assert!(run.verdict.holds(), "{:?}", run.verdict);
        assert!(run.rewritten_recursion_gap(ctx) < 1e-10);
    }

    #[test]
    fn base_case() {
        let ctx = LambdaContext::standard();
        let run = tech_lemma_eval(ctx, 1, &[0.0], &[1.0]).unwrap();
        assert_eq!(run.f[1], ctx.lambda() / 2.0);
        assert!(run.verdict.holds());
    }

    #[test]
    fn preset_schedule() {
        let ctx = LambdaContext::standard();
        let g = inductive_g_schedule(0.01, 80);
        assert!(g.iter().sum::<f64>() < 1.0 / 3.0);
        let run = tech_lemma_eval(ctx, 80, &g, &g.iter().map(|x| 1.0 + x).collect::<Vec<_>>()).unwrap();
        assert!(run.verdict.holds());
        assert!(run.f[80] <= heffect_bound(ctx.lambda(), &g, 80));
    }

    #[test]
    fn rejects_bad_h() {
        let ctx = LambdaContext::standard();
        assert!(tech_lemma_eval(ctx, 3, &[0.0, 0.1, 0.1], &[1.0, 1.2, 1.0]).is_err());
        assert!(tech_lemma_eval(ctx, 3, &[0.1, 0.1, 0.1], &[1.0, 1.0, 1.0]).is_err());
        assert!(tech_lemma_eval(ctx, 3, &[0.0, 0.1], &[1.0, 1.0, 1.0]).is_err());
        assert!(tech_lemma_eval(ctx, 0, &[], &[]).is_err());
    }
}
