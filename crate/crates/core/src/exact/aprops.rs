use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use super::LambdaContext;

/// Extra terms summed past the last index a check needs.
const TAIL_TERMS: usize = 12;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AViolation {
    pub property: char,
    pub m: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct APropertyReport {
    pub m_max: usize,
    pub precision_bits: u32,
    /// Number of `(property, m)` pairs checked.
    pub checked: usize,
    /// Indices at which the tail form of `b(m)` was also compared with the
    /// direct partial sum.
    pub cross_checked: usize,
    pub violations: Vec<AViolation>,
}

impl APropertyReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }
}

fn rat(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

fn pow2(e: i64) -> BigRational {
    if e >= 0 {
        BigRational::from_integer(BigInt::one() << e as u64)
    } else {
        BigRational::new(BigInt::one(), BigInt::one() << (-e) as u64)
    }
}

/// Interval `[lo, hi]` containing `|x|` for `x` in `[c - r, c + r]`, or
/// `None` when the sign of `x` is not determined.
fn abs_interval(c: &BigRational, r: &BigRational) -> Option<(BigRational, BigRational)> {
    let lo = c - r;
    let hi = c + r;
    if lo.is_positive() {
        Some((lo, hi))
    } else if hi.is_negative() {
        Some((-hi, -lo))
    } else {
        None
    }
}

/// Checks, for `1 <= m <= m_max`, at the stored λ in exact rationals:
///
/// - (a) `a_m / a_{m+1} = 2^{2m}(m+1)/λ >= 6/λ`
/// - (b) `a_m > sum_{i>m} a_i`
/// - (c) `s(2m) < 1 < s(2m-1)` with `s(k) = sum_{i<=k} (-1)^{i+1} a_i`
/// - (d) `a_{m+1}/2 < |s(m) - 1| < a_{m+1}`
/// - (e) `|s(m) - 1| >= (3/λ) |s(m+1) - 1|`
///
/// `s(k) - 1` is obtained as minus the tail `sum_{i>k} (-1)^{i+1} a_i`, which is
/// exact at the true root; the stored λ only resolves the partial sums to
/// about the context tolerance, far coarser than `a_{61}`. The tail is summed
/// to `N` terms and carried as an interval of radius `2 a_{N+1}` widened by a
/// relative `2^-90` for the λ approximation. Where `a_{m+1}` dwarfs the
/// tolerance the tail form is also compared with the direct partial sum.
pub fn check_a_properties(ctx: &LambdaContext, m_max: usize) -> APropertyReport {
    let lambda = ctx.exact();
    let n_terms = 2 * m_max.max(1) + TAIL_TERMS;
    // a[0] unused.
    let mut a = vec![BigRational::zero(), lambda.clone()];
    for i in 1..=n_terms + 1 {
        let next = &a[i] * lambda / (pow2(2 * i as i64) * rat(i as i64 + 1));
        a.push(next);
    }
    let sign = |i: usize| if i % 2 == 1 { 1 } else { -1 };

    // tail[k] = sum_{i=k+1}^{N} (-1)^{i+1} a_i.
    let mut tail = vec![BigRational::zero(); n_terms + 1];
    for k in (0..n_terms).rev() {
        let t = &a[k + 1];
        tail[k] = if sign(k + 1) > 0 {
            &tail[k + 1] + t
        } else {
            &tail[k + 1] - t
        };
    }
    let trunc = rat(2) * &a[n_terms + 1];
    let rel = pow2(-90);
    let b = |k: usize| -> (BigRational, BigRational) { (-tail[k].clone(), &trunc + &rel * &a[k + 1]) };

    let tol = BigRational::from_float(ctx.tolerance()).unwrap_or_else(BigRational::zero);
    let cross_floor = pow2(64) * &tol;

    let mut violations = Vec::new();
    let mut checked = 0;
    let mut cross_checked = 0;
    let mut fail = |property: char, m: usize, ok: bool| {
        if !ok {
            violations.push(AViolation { property, m });
        }
    };
    let six_over_lambda = rat(6) / lambda;
    let three_over_lambda = rat(3) / lambda;

    let mut direct = BigRational::zero();
    let mut direct_sums = vec![BigRational::zero()];
    for (i, ai) in a.iter().enumerate().take(2 * m_max + 2).skip(1) {
        if sign(i) > 0 {
            direct += ai;
        } else {
            direct -= ai;
        }
        direct_sums.push(direct.clone());
    }

    for m in 1..=m_max {
        // (a)
        let ratio = &a[m] / &a[m + 1];
        let closed = pow2(2 * m as i64) * rat(m as i64 + 1) / lambda;
        fail('a', m, ratio == closed && ratio >= six_over_lambda);

        // (b): sum_{i>m} a_i <= sum_{i=m+1}^{N} a_i + 2 a_{N+1}.
        let mut rest = trunc.clone();
        for ai in &a[m + 1..=n_terms] {
            rest += ai;
        }
        fail('b', m, a[m] > rest);

        // (c)
        let (c_even, r_even) = b(2 * m);
        let (c_odd, r_odd) = b(2 * m - 1);
        fail(
            'c',
            m,
            (&c_even + &r_even).is_negative() && (&c_odd - &r_odd).is_positive(),
        );

        // (d)
        let (c, r) = b(m);
        let half = &a[m + 1] / rat(2);
        let ok = match abs_interval(&c, &r) {
            Some((lo, hi)) => lo > half && hi < a[m + 1],
            None => false,
        };
        fail('d', m, ok);

        // (e)
        let (c1, r1) = b(m + 1);
        let ok = match (abs_interval(&c, &r), abs_interval(&c1, &r1)) {
            (Some((lo, _)), Some((_, hi1))) => lo >= &three_over_lambda * hi1,
            _ => false,
        };
        fail('e', m, ok);
        checked += 5;

        for k in [m, 2 * m - 1, 2 * m] {
            if a[k + 1] > cross_floor {
                let d = &direct_sums[k] - BigRational::one();
                let (c, _) = b(k);
                let agree = d.is_positive() == c.is_positive() && (d - c).abs() < &a[k + 1] * pow2(-32);
                fail('x', k, agree);
                cross_checked += 1;
            }
        }
    }
    APropertyReport {
        m_max,
        precision_bits: ctx.precision_bits(),
        checked,
        cross_checked,
        violations,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clean_to_thirty() {
        let ctx = LambdaContext::standard();
        let report = check_a_properties(ctx, 30);
        assert!(report.is_clean(), "{:?}", report.violations);
        assert_eq!(report.checked, 150);
        assert!(report.cross_checked > 0);
        assert!(report.precision_bits >= 128);
    }

    #[test]
    fn coarse_lambda_still_clean_on_large_gaps() {
        // The tail form does not depend on resolving the partial sums.
        let ctx = LambdaContext::with_precision_bits(40).unwrap();
        assert!(check_a_properties(&ctx, 12).is_clean());
    }

    #[test]
    fn abs_interval_sign() {
        let (lo, hi) = abs_interval(&rat(-5), &rat(1)).unwrap();
        assert_eq!((lo, hi), (rat(4), rat(6)));
        assert!(abs_interval(&rat(1), &rat(2)).is_none());
    }
}
