//! Exact-comparable path lengths.
//!
//! Magnitude chains are graded by total path length, and a tuple belongs to a
//! grade only when its distances sum *exactly* to that length. [`Length`]
//! provides an equality that is an equivalence relation in both backends:
//!
//! * `Exact` holds a reduced `i64` rational and compares exactly.
//! * `Bucketed` holds a float together with a bucket width `tau`; two values
//!   are equal iff they land in the same bucket `round(value / tau)`.
//!   Values that straddle a bucket edge may split, so sums are always
//!   accumulated in the same (left-to-right) order.

use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};

use num_bigint::BigInt;
use num_rational::{BigRational, Ratio};
use num_traits::{CheckedAdd, CheckedMul, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Rational = Ratio<i64>;

pub const DEFAULT_TAU: f64 = 1e-9;

/// Arithmetic backend of a metric space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Backend {
    Rational,
    Bucketed { tau: f64 },
}

impl Backend {
    pub fn bucketed(tau: f64) -> Result<Self> {
        if !(tau.is_finite() && tau > 0.0) {
            return Err(Error::InvalidTolerance(tau));
        }
        Ok(Backend::Bucketed { tau })
    }

    pub fn tau(&self) -> Option<f64> {
        match self {
            Backend::Rational => None,
            Backend::Bucketed { tau } => Some(*tau),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Backend::Rational => "rational",
            Backend::Bucketed { .. } => "bucketed",
        }
    }

    pub fn zero(&self) -> Length {
        match *self {
            Backend::Rational => Length::Exact(Rational::zero()),
            Backend::Bucketed { tau } => Length::Bucketed { value: 0.0, tau },
        }
    }
}

impl Default for Backend {
    fn default() -> Self {
        Backend::Bucketed { tau: DEFAULT_TAU }
    }
}

#[derive(Debug, Clone, Copy)]
pub enum Length {
    Exact(Rational),
    Bucketed { value: f64, tau: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
enum Key {
    Exact(Rational),
    Bucket { tau_bits: u64, index: i64 },
}

impl Length {
    pub fn exact(r: Rational) -> Self {
        Length::Exact(r)
    }

    pub fn integer(v: i64) -> Self {
        Length::Exact(Rational::from_integer(v))
    }

    pub fn bucketed(value: f64, tau: f64) -> Self {
        Length::Bucketed { value, tau }
    }

    pub fn backend(&self) -> Backend {
        match *self {
            Length::Exact(_) => Backend::Rational,
            Length::Bucketed { tau, .. } => Backend::Bucketed { tau },
        }
    }

    /// Bucket index for the bucketed backend.
    pub fn bucket_index(value: f64, tau: f64) -> i64 {
        (value / tau).round() as i64
    }

    fn key(&self) -> Key {
        match *self {
            Length::Exact(r) => Key::Exact(r),
            Length::Bucketed { value, tau } => Key::Bucket {
                tau_bits: tau.to_bits(),
                index: Self::bucket_index(value, tau),
            },
        }
    }

    pub fn to_f64(&self) -> f64 {
        match *self {
            Length::Exact(r) => *r.numer() as f64 / *r.denom() as f64,
            Length::Bucketed { value, .. } => value,
        }
    }

    pub fn as_rational(&self) -> Option<Rational> {
        match *self {
            Length::Exact(r) => Some(r),
            Length::Bucketed { .. } => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        *self == self.backend().zero()
    }

    pub fn is_negative(&self) -> bool {
        match *self {
            Length::Exact(r) => r.is_negative(),
            Length::Bucketed { value, tau } => Self::bucket_index(value, tau) < 0,
        }
    }

    /// Sum in the same backend. `None` on rational overflow; mixing backends
    /// is a bug and panics.
    pub fn checked_add(&self, other: &Length) -> Option<Length> {
        match (*self, *other) {
            (Length::Exact(a), Length::Exact(b)) => a.checked_add(&b).map(Length::Exact),
            (Length::Bucketed { value: a, tau }, Length::Bucketed { value: b, tau: t2 }) => {
                assert_eq!(tau.to_bits(), t2.to_bits(), "mixed bucket widths");
                Some(Length::Bucketed { value: a + b, tau })
            }
            _ => panic!("cannot add lengths from different backends"),
        }
    }

    pub fn checked_mul_int(&self, m: i64) -> Option<Length> {
        match *self {
            Length::Exact(a) => a.checked_mul(&Rational::from_integer(m)).map(Length::Exact),
            Length::Bucketed { value, tau } => Some(Length::Bucketed {
                value: value * m as f64,
                tau,
            }),
        }
    }

    /// Number of multiples of `unit` in this length, if it is an exact
    /// integer multiple.
    pub fn multiple_of(&self, unit: &Rational) -> Option<i64> {
        let r = self.as_rational()?;
        let q = r / unit;
        q.is_integer().then(|| q.to_integer())
    }

    /// Text form: rationals as `"p/q"` (or `"p"` for integers), floats in
    /// round-trip notation.
    pub fn to_text(&self) -> String {
        match *self {
            Length::Exact(r) => format_rational(&r),
            Length::Bucketed { value, .. } => format!("{value:?}"),
        }
    }
}

impl PartialEq for Length {
    fn eq(&self, other: &Self) -> bool {
        self.key() == other.key()
    }
}

impl Eq for Length {}

impl Hash for Length {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.key().hash(state)
    }
}

impl PartialOrd for Length {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Length {
    fn cmp(&self, other: &Self) -> Ordering {
        self.key().cmp(&other.key())
    }
}

impl fmt::Display for Length {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

pub fn format_rational(r: &Rational) -> String {
    if r.is_integer() {
        format!("{}", r.numer())
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Parse `"p/q"`, `"p"`, or a decimal literal (`"1.25"`, `"3e-2"`) exactly.
pub fn parse_big_rational(text: &str) -> Option<BigRational> {
    let s = text.trim();
    if s.is_empty() {
        return None;
    }
    if let Some((p, q)) = s.split_once('/') {
        let p: BigInt = p.trim().parse().ok()?;
        let q: BigInt = q.trim().parse().ok()?;
        if q.is_zero() {
            return None;
        }
        return Some(BigRational::new(p, q));
    }
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(pos) => (&s[..pos], s[pos + 1..].parse::<i32>().ok()?),
        None => (s, 0),
    };
    let (negative, mantissa) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits: BigInt = format!("{int_part}{frac_part}0").parse().ok()?;
    let digits = digits / BigInt::from(10);
    let scale = exponent - frac_part.len() as i32;
    let ten = BigInt::from(10);
    let mut value = BigRational::from_integer(digits);
    if scale >= 0 {
        value *= BigRational::from_integer(num_traits::pow(ten, scale as usize));
    } else {
        value /= BigRational::from_integer(num_traits::pow(ten, (-scale) as usize));
    }
    Some(if negative { -value } else { value })
}

/// The decimal value a float was written as, e.g. `0.1` maps to `1/10`
/// rather than to its binary expansion.
pub fn decimal_rational_of_f64(x: f64) -> Option<BigRational> {
    if !x.is_finite() {
        return None;
    }
    parse_big_rational(&format!("{x:e}"))
}

pub fn big_to_small(r: &BigRational) -> Option<Rational> {
    let p = r.numer().to_i64()?;
    let q = r.denom().to_i64()?;
    Some(Rational::new(p, q))
}

pub fn parse_rational(text: &str) -> Option<Rational> {
    big_to_small(&parse_big_rational(text)?)
}

/// Exact square root of a nonnegative rational, if it is a perfect square.
pub fn rational_sqrt(r: &BigRational) -> Option<BigRational> {
    if r.is_negative() {
        return None;
    }
    let p = r.numer();
    let q = r.denom();
    let sp = p.sqrt();
    let sq = q.sqrt();
    (&sp * &sp == *p && &sq * &sq == *q).then(|| BigRational::new(sp, sq))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bucketed_equality_is_by_bucket() {
        let tau = 1e-9;
        let a = Length::bucketed(0.1 + 0.2, tau);
        let b = Length::bucketed(0.3, tau);
        assert_eq!(a, b);
        let c = Length::bucketed(0.3 + 2e-9, tau);
        assert_ne!(b, c);
        assert!(b < c);
    }

    #[test]
    fn exact_addition_and_overflow() {
        let a = Length::exact(Rational::new(1, 3));
        let b = Length::exact(Rational::new(2, 3));
        assert_eq!(a.checked_add(&b).unwrap(), Length::integer(1));
        let big = Length::integer(i64::MAX);
        assert!(big.checked_add(&Length::integer(1)).is_none());
    }

    #[test]
    fn parses_rationals_and_decimals() {
        assert_eq!(parse_rational("3/4"), Some(Rational::new(3, 4)));
        assert_eq!(parse_rational("2"), Some(Rational::from_integer(2)));
        assert_eq!(parse_rational("1.25"), Some(Rational::new(5, 4)));
        assert_eq!(parse_rational("-2.5e-1"), Some(Rational::new(-1, 4)));
        assert_eq!(parse_rational("12e2"), Some(Rational::from_integer(1200)));
        assert_eq!(parse_rational("1/0"), None);
        assert_eq!(parse_rational("abc"), None);
        assert_eq!(
            decimal_rational_of_f64(0.1).and_then(|r| big_to_small(&r)),
            Some(Rational::new(1, 10))
        );
    }

    #[test]
    fn perfect_square_roots() {
        let r = parse_big_rational("9/4").unwrap();
        assert_eq!(rational_sqrt(&r), parse_big_rational("3/2"));
        assert_eq!(rational_sqrt(&parse_big_rational("2").unwrap()), None);
    }

    #[test]
    fn text_forms() {
        assert_eq!(Length::integer(2).to_text(), "2");
        assert_eq!(Length::exact(Rational::new(1, 2)).to_text(), "1/2");
        assert_eq!(Length::bucketed(1.5, 1e-9).to_text(), "1.5");
    }
}
