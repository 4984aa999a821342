//! Exact rational scalars and the exact-or-approximate magnitude type.
//!
//! All combinatorial data (interval endpoints, polygon vertices, set-function
//! tables, integrand values) is kept as arbitrary-precision rationals so that
//! one-dimensional results and all set-level equalities are exact. Square
//! roots are unavoidable for planar distances; quantities that may pass
//! through a square root are carried as [`Mag`], which stays exact as long as
//! it can and degrades to `f64` only when forced.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::traits::{Signed, ToPrimitive, Zero};
use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

/// Arbitrary-precision rational number.
pub type Rat = BigRational;

/// Shorthand constructor from an integer pair.
pub fn rat(numer: i64, denom: i64) -> Rat {
    Rat::new(BigInt::from(numer), BigInt::from(denom))
}

/// Shorthand constructor from an integer.
pub fn rat_int(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

/// Parses a rational from `"p/q"`, an integer string, a decimal such as
/// `"0.25"`, or scientific notation such as `"1e-9"` / `"2.5e-3"`.
///
/// Decimal and scientific forms are converted exactly (`1e-9` becomes
/// `1/1000000000`), never through a float.
pub fn parse_rat(s: &str) -> Result<Rat, RatParseError> {
    let s = s.trim();
    if s.is_empty() {
        return Err(RatParseError::new(s, "empty string"));
    }
    if let Some((num, den)) = s.split_once('/') {
        let n = BigInt::from_str(num.trim()).map_err(|_| RatParseError::new(s, "bad numerator"))?;
        let d =
            BigInt::from_str(den.trim()).map_err(|_| RatParseError::new(s, "bad denominator"))?;
        if d.is_zero() {
            return Err(RatParseError::new(s, "zero denominator"));
        }
        return Ok(Rat::new(n, d));
    }
    // Split off a scientific exponent if present.
    let (mantissa, exp) = match s.find(['e', 'E']) {
        Some(pos) => {
            let e = i64::from_str(&s[pos + 1..])
                .map_err(|_| RatParseError::new(s, "bad exponent"))?;
            (&s[..pos], e)
        }
        None => (s, 0),
    };
    let (int_part, frac_part) = match mantissa.split_once('.') {
        Some((i, f)) => (i, f),
        None => (mantissa, ""),
    };
    let digits = format!("{}{}", int_part, frac_part);
    if digits.is_empty() || digits == "-" || digits == "+" {
        return Err(RatParseError::new(s, "no digits"));
    }
    let n = BigInt::from_str(&digits).map_err(|_| RatParseError::new(s, "bad digits"))?;
    let scale = exp - frac_part.len() as i64;
    let ten = BigInt::from(10u8);
    let pow = ten.pow(scale.unsigned_abs() as u32);
    Ok(if scale >= 0 {
        Rat::from_integer(n * pow)
    } else {
        Rat::new(n, pow)
    })
}

/// Error from [`parse_rat`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RatParseError {
    pub input: String,
    pub reason: &'static str,
}

impl RatParseError {
    fn new(input: &str, reason: &'static str) -> Self {
        Self {
            input: input.to_string(),
            reason,
        }
    }
}

impl fmt::Display for RatParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid rational {:?}: {}", self.input, self.reason)
    }
}

impl std::error::Error for RatParseError {}

/// Canonical string form: `"p/q"`, or `"p"` when the denominator is one.
pub fn fmt_rat(r: &Rat) -> String {
    r.to_string()
}

/// Lossy conversion for metric output.
pub fn rat_to_f64(r: &Rat) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Formats a float with twelve significant digits, the fixed precision used
/// for every approximate value that leaves the library in a report.
pub fn fmt_f64_12(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    format!("{:.11e}", x)
}

/// A nonnegative-ish magnitude that is exact whenever the computation that
/// produced it never left the rationals (all one-dimensional metric
/// quantities), and an `f64` otherwise (planar distances and norms).
#[derive(Debug, Clone)]
pub enum Mag {
    Exact(Rat),
    Approx(f64),
}

impl Mag {
    pub fn zero() -> Self {
        Mag::Exact(Rat::zero())
    }

    pub fn from_rat(r: Rat) -> Self {
        Mag::Exact(r)
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Mag::Exact(r) => rat_to_f64(r),
            Mag::Approx(x) => *x,
        }
    }

    pub fn as_exact(&self) -> Option<&Rat> {
        match self {
            Mag::Exact(r) => Some(r),
            Mag::Approx(_) => None,
        }
    }

    /// Exact zero test: an `Approx` value is zero only when it is exactly
    /// `0.0`, which in this library happens only along all-zero computations.
    pub fn is_zero(&self) -> bool {
        match self {
            Mag::Exact(r) => r.is_zero(),
            Mag::Approx(x) => *x == 0.0,
        }
    }

    pub fn add(&self, other: &Mag) -> Mag {
        match (self, other) {
            (Mag::Exact(a), Mag::Exact(b)) => Mag::Exact(a + b),
            _ => Mag::Approx(self.to_f64() + other.to_f64()),
        }
    }

    pub fn max(&self, other: &Mag) -> Mag {
        if self.ge(other) {
            self.clone()
        } else {
            other.clone()
        }
    }

    /// `self / other`; the caller must ensure `other` is nonzero.
    pub fn ratio(&self, other: &Mag) -> Mag {
        match (self, other) {
            (Mag::Exact(a), Mag::Exact(b)) => Mag::Exact(a / b),
            _ => Mag::Approx(self.to_f64() / other.to_f64()),
        }
    }

    /// `|self - other|`.
    pub fn abs_diff(&self, other: &Mag) -> Mag {
        match (self, other) {
            (Mag::Exact(a), Mag::Exact(b)) => Mag::Exact((a - b).abs()),
            _ => Mag::Approx((self.to_f64() - other.to_f64()).abs()),
        }
    }

    pub fn scale(&self, c: &Rat) -> Mag {
        match self {
            Mag::Exact(r) => Mag::Exact(r * c),
            Mag::Approx(x) => Mag::Approx(x * rat_to_f64(c)),
        }
    }

    fn cmp_val(&self, other: &Mag) -> Ordering {
        match (self, other) {
            (Mag::Exact(a), Mag::Exact(b)) => a.cmp(b),
            _ => self
                .to_f64()
                .partial_cmp(&other.to_f64())
                .unwrap_or(Ordering::Equal),
        }
    }

    pub fn lt(&self, other: &Mag) -> bool {
        self.cmp_val(other) == Ordering::Less
    }

    pub fn le(&self, other: &Mag) -> bool {
        self.cmp_val(other) != Ordering::Greater
    }

    pub fn ge(&self, other: &Mag) -> bool {
        self.cmp_val(other) != Ordering::Less
    }

    pub fn gt(&self, other: &Mag) -> bool {
        self.cmp_val(other) == Ordering::Greater
    }

    /// Report string: exact values print as rationals, approximate values
    /// with twelve significant digits.
    pub fn display(&self) -> String {
        match self {
            Mag::Exact(r) => fmt_rat(r),
            Mag::Approx(x) => fmt_f64_12(*x),
        }
    }
}

impl PartialEq for Mag {
    fn eq(&self, other: &Self) -> bool {
        self.cmp_val(other) == Ordering::Equal
    }
}

impl fmt::Display for Mag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.display())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_fraction_integer_decimal_scientific() {
        assert_eq!(parse_rat("3/4").unwrap(), rat(3, 4));
        assert_eq!(parse_rat("-3/4").unwrap(), rat(-3, 4));
        assert_eq!(parse_rat("7").unwrap(), rat_int(7));
        assert_eq!(parse_rat("0.25").unwrap(), rat(1, 4));
        assert_eq!(parse_rat("1e-9").unwrap(), rat(1, 1_000_000_000));
        assert_eq!(parse_rat("2.5e-3").unwrap(), rat(1, 400));
        assert_eq!(parse_rat("2.5e3").unwrap(), rat_int(2500));
        assert!(parse_rat("1/0").is_err());
        assert!(parse_rat("").is_err());
        assert!(parse_rat("x").is_err());
    }

    #[test]
    fn rational_round_trip_via_display() {
        for r in [rat(3, 4), rat(-5, 7), rat_int(12), Rat::zero()] {
            assert_eq!(parse_rat(&fmt_rat(&r)).unwrap(), r);
        }
    }

    #[test]
    fn mag_arithmetic_stays_exact_until_forced() {
        let a = Mag::Exact(rat(1, 3));
        let b = Mag::Exact(rat(2, 3));
        assert_eq!(a.add(&b), Mag::Exact(rat_int(1)));
        assert!(a.add(&b).as_exact().is_some());
        let c = Mag::Approx(0.5);
        assert!(a.add(&c).as_exact().is_none());
        assert!(a.lt(&b));
        assert!(Mag::zero().is_zero());
    }
}
