use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::{pow2, StarTables};
use crate::error::{Error, Result};

const TABLE_DATA: &str = include_str!("../../data/published_tables.json");

/// One printed cell of the small-dimension `P*`/`R*`/`Y*` tables.
///
/// `quantity` is `S`, `Pstar`, `Rstar`, `Ystar` or `ratio`; the even-table
/// ratio is `2^l Y*(2l) / |S(l)|` and the odd-table ratio is
/// `Y*(2l+1) / R*(2l+1)` with the lower bound for `R*`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PublishedEntry {
    pub table: String,
    pub quantity: String,
    pub tag: String,
    pub dim: usize,
    pub printed: String,
}

impl PublishedEntry {
    pub fn all() -> Vec<PublishedEntry> {
        serde_json::from_str(TABLE_DATA).expect("embedded table data parses")
    }

    /// The printed value and one unit of its last printed digit.
    pub fn printed_value(&self) -> Result<(BigRational, BigRational)> {
        parse_printed(&self.printed)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PublishedCheck {
    pub entry: PublishedEntry,
    pub computed: String,
    pub matches: bool,
}

fn ten_pow(e: i64) -> BigRational {
    let p = BigInt::from(10u32).pow(e.unsigned_abs() as u32);
    if e >= 0 {
        BigRational::from_integer(p)
    } else {
        BigRational::new(BigInt::from(1), p)
    }
}

/// Parses `"144"`, `"0.794"`, `"1.2e9"`.
fn parse_printed(s: &str) -> Result<(BigRational, BigRational)> {
    let bad = || Error::Parse(format!("bad printed value {s:?}"));
    let (mantissa, exp) = match s.split_once('e') {
        Some((m, e)) => (m, e.parse::<i64>().map_err(|_| bad())?),
        None => (s, 0),
    };
    let (int, frac) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    let digits: BigInt = format!("{int}{frac}").parse().map_err(|_| bad())?;
    let scale = exp - frac.len() as i64;
    let unit = ten_pow(scale);
    Ok((BigRational::from_integer(digits) * &unit, unit))
}

fn as_rational(v: &BigUint) -> BigRational {
    BigRational::from_integer(BigInt::from(v.clone()))
}

fn computed_value(t: &StarTables, e: &PublishedEntry) -> Result<BigRational> {
    let missing = || Error::MissingValue(format!("{} {} at dim {}", e.quantity, e.tag, e.dim));
    let d = e.dim;
    let pick = |table: &super::CountTable| -> Option<BigRational> {
        let v = match e.tag.as_str() {
            "upper" => table.upper(d),
            "lower" => table.lower(d),
            _ => table.exact(d),
        }?;
        Some(as_rational(v))
    };
    let v = match e.quantity.as_str() {
        "S" => {
            if d % 2 != 0 {
                return Err(missing());
            }
            as_rational(t.s.get(d / 2).ok_or_else(missing)?)
        }
        "Pstar" => pick(&t.pstar).ok_or_else(missing)?,
        "Rstar" => pick(&t.rstar).ok_or_else(missing)?,
        "Ystar" => pick(&t.ystar).ok_or_else(missing)?,
        "ratio" => {
            let y = as_rational(t.ystar.upper(d).ok_or_else(missing)?);
            if d % 2 == 0 {
                let ell = d / 2;
                y * as_rational(&pow2(ell as u64)) / as_rational(t.s.get(ell).ok_or_else(missing)?)
            } else {
                y / as_rational(t.rstar.lower(d).ok_or_else(missing)?)
            }
        }
        _ => return Err(Error::Parse(format!("unknown quantity {}", e.quantity))),
    };
    Ok(v)
}

fn render(v: &BigRational) -> String {
    if v.is_integer() {
        v.to_integer().to_string()
    } else {
        format!("{:.6}", v.to_f64().unwrap_or(f64::NAN))
    }
}

/// Compares every embedded printed cell with `tables`. A cell matches when the
/// computed value is within one unit of the last printed digit.
pub fn published_check(tables: &StarTables) -> Result<Vec<PublishedCheck>> {
    let mut out = Vec::new();
    for entry in PublishedEntry::all() {
        if entry.dim > tables.max_dim() {
            return Err(Error::InvalidArgument(format!(
                "tables stop at dim {}, need {}",
                tables.max_dim(),
                entry.dim
            )));
        }
        let (printed, unit) = entry.printed_value()?;
        let ours = computed_value(tables, &entry)?;
        let matches = (&ours - printed).abs() < unit;
        out.push(PublishedCheck {
            computed: render(&ours),
            entry,
            matches,
        });
    }
    Ok(out)
}

/// `2^l Y*(2l) < (4/5)|S(l)|` and `Y*(2l+1) < (9/50) R*(2l+1)` at one `l`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GlobalCheck {
    pub ell: usize,
    pub even_ratio: f64,
    pub even_ok: bool,
    pub odd_ratio: f64,
    pub odd_ok: bool,
}

pub fn global_ratio_checks(tables: &StarTables, ell_max: usize) -> Result<Vec<GlobalCheck>> {
    if 2 * ell_max + 1 > tables.max_dim() {
        return Err(Error::InvalidArgument(format!(
            "tables stop at dim {}, need {}",
            tables.max_dim(),
            2 * ell_max + 1
        )));
    }
    let mut out = Vec::new();
    for ell in 0..=ell_max {
        let even = if ell == 0 {
            BigRational::zero()
        } else {
            as_rational(&(tables.ystar.upper(2 * ell).expect("filled") * pow2(ell as u64)))
                / as_rational(&tables.s[ell])
        };
        let odd = as_rational(tables.ystar.upper(2 * ell + 1).expect("filled"))
            / as_rational(tables.rstar.lower(2 * ell + 1).expect("filled"));
        let four_fifths = BigRational::new(4.into(), 5.into());
        let nine_fiftieths = BigRational::new(9.into(), 50.into());
        out.push(GlobalCheck {
            ell,
            even_ratio: even.to_f64().unwrap_or(f64::NAN),
            even_ok: even < four_fifths,
            odd_ratio: odd.to_f64().unwrap_or(f64::NAN),
            odd_ok: odd < nine_fiftieths,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::star_tables;

    #[test]
    fn parse_units() {
        let (v, u) = parse_printed("1.2e9").unwrap();
        assert_eq!(v, BigRational::from_integer(1_200_000_000.into()));
        assert_eq!(u, BigRational::from_integer(100_000_000.into()));
        let (v, u) = parse_printed("0.440").unwrap();
        assert_eq!(v, BigRational::new(44.into(), 100.into()));
        assert_eq!(u, BigRational::new(1.into(), 1000.into()));
        let (_, u) = parse_printed("144").unwrap();
        assert_eq!(u, BigRational::from_integer(1.into()));
        assert!(parse_printed("1.x").is_err());
    }

    #[test]
    fn data_shape() {
        let all = PublishedEntry::all();
        assert_eq!(all.len(), 70);
        assert!(all.iter().all(|e| e.printed_value().is_ok()));
    }

    #[test]
    fn integer_cells_and_global_checks() {
        let t = star_tables(25).unwrap();
        let checks = published_check(&t).unwrap();
        for c in &checks {
            if !c.entry.printed.contains(['.', 'e']) {
                assert!(c.matches, "{c:?}");
            }
        }
        let g = global_ratio_checks(&t, 25).unwrap();
        assert_eq!(g.len(), 26);
        assert!(g.iter().all(|c| c.even_ok && c.odd_ok));
        let worst = g.iter().map(|c| c.even_ratio).fold(0.0, f64::max);
        assert!(worst > 0.79 && worst < 0.8);
    }
}
