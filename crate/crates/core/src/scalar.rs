//! Scalar backends: exact rationals and floats behind one trait.
//!
//! Every probabilistic object in this crate is generic over [`Scalar`].
//! The exact backend ([`Exact`], arbitrary-precision rationals) is the
//! reference semantics; the `f64` backend mirrors it with a tolerance.
//! Comparison helpers take an epsilon which the exact backend ignores,
//! so algorithms are written once and stay branch-free over the backend.

use alloc::string::String;
use core::fmt::{Debug, Display};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, Signed, ToPrimitive, Zero};

/// Arbitrary-precision rational scalar, the exact reference backend.
pub type Exact = BigRational;

/// Comparison tolerance threaded through validating constructors and
/// support/equality decisions. Ignored by the exact backend.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tol {
    pub eps: f64,
}

impl Tol {
    pub const DEFAULT_EPS: f64 = 1e-9;

    pub fn new(eps: f64) -> Self {
        Tol { eps }
    }
}

impl Default for Tol {
    fn default() -> Self {
        Tol { eps: Self::DEFAULT_EPS }
    }
}

/// Field operations plus the tolerance-aware decisions the library needs.
pub trait Scalar: Clone + PartialOrd + Debug + Display + Signed {
    /// True for backends whose arithmetic is exact.
    const EXACT: bool;

    fn from_int(n: i64) -> Self;

    /// `num / den`. Panics if `den` is zero.
    fn ratio(num: i64, den: i64) -> Self;

    /// Exact value of a finite float. `None` for NaN or infinities.
    fn from_f64(x: f64) -> Option<Self>;

    fn to_f64(&self) -> f64;

    /// Parses `"p/q"`, integer, or decimal text (optional exponent).
    /// Decimals are read exactly: `"0.2"` is two tenths, not the nearest
    /// binary double.
    fn parse_text(text: &str) -> Option<Self>;

    /// `|self| <= eps` for floats; `self == 0` for the exact backend.
    fn is_zero_within(&self, eps: f64) -> bool;

    /// Equality up to `eps` (exact backend: plain equality).
    fn eq_within(&self, other: &Self, eps: f64) -> bool {
        (self.clone() - other.clone()).is_zero_within(eps)
    }

    /// `self <= other` up to `eps` (exact backend: plain `<=`).
    fn le_within(&self, other: &Self, eps: f64) -> bool;

    /// `self < other` by more than `eps` (exact backend: plain `<`).
    fn lt_beyond(&self, other: &Self, eps: f64) -> bool;
}

impl Scalar for Exact {
    const EXACT: bool = true;

    fn from_int(n: i64) -> Self {
        BigRational::from_integer(BigInt::from(n))
    }

    fn ratio(num: i64, den: i64) -> Self {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }

    fn from_f64(x: f64) -> Option<Self> {
        <BigRational as FromPrimitive>::from_f64(x)
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn parse_text(text: &str) -> Option<Self> {
        parse_rational(text)
    }

    fn is_zero_within(&self, _eps: f64) -> bool {
        self.is_zero()
    }

    fn eq_within(&self, other: &Self, _eps: f64) -> bool {
        self == other
    }

    fn le_within(&self, other: &Self, _eps: f64) -> bool {
        self <= other
    }

    fn lt_beyond(&self, other: &Self, _eps: f64) -> bool {
        self < other
    }
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn from_int(n: i64) -> Self {
        n as f64
    }

    fn ratio(num: i64, den: i64) -> Self {
        assert!(den != 0, "zero denominator");
        num as f64 / den as f64
    }

    fn from_f64(x: f64) -> Option<Self> {
        x.is_finite().then_some(x)
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn parse_text(text: &str) -> Option<Self> {
        if let Some((num, den)) = text.split_once('/') {
            let n: f64 = num.trim().parse().ok()?;
            let d: f64 = den.trim().parse().ok()?;
            if d == 0.0 {
                return None;
            }
            Some(n / d)
        } else {
            let v: f64 = text.trim().parse().ok()?;
            v.is_finite().then_some(v)
        }
    }

    fn is_zero_within(&self, eps: f64) -> bool {
        self.abs() <= eps
    }

    fn le_within(&self, other: &Self, eps: f64) -> bool {
        *self <= other + eps
    }

    fn lt_beyond(&self, other: &Self, eps: f64) -> bool {
        *self < other - eps
    }
}

fn parse_big_int(text: &str) -> Option<BigInt> {
    let text = text.trim();
    if text.is_empty() {
        return None;
    }
    text.parse().ok()
}

/// Exact parser for `"p/q"`, integer, and decimal forms.
fn parse_rational(text: &str) -> Option<Exact> {
    let text = text.trim();
    if let Some((num, den)) = text.split_once('/') {
        let n = parse_big_int(num)?;
        let d = parse_big_int(den)?;
        if d.is_zero() {
            return None;
        }
        return Some(BigRational::new(n, d));
    }

    // Decimal form: [sign] digits [. digits] [e|E [sign] digits]
    let (mantissa, exp10) = match text.find(['e', 'E']) {
        Some(pos) => {
            let e: i64 = text[pos + 1..].trim().parse().ok()?;
            (&text[..pos], e)
        }
        None => (text, 0),
    };
    let mantissa = mantissa.trim();
    let (int_part, frac_part) = match mantissa.find('.') {
        Some(pos) => (&mantissa[..pos], &mantissa[pos + 1..]),
        None => (mantissa, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    let negative = int_part.starts_with('-');
    let int_digits = int_part.trim_start_matches(['-', '+']);
    if !int_digits.chars().all(|c| c.is_ascii_digit())
        || !frac_part.chars().all(|c| c.is_ascii_digit())
    {
        return None;
    }
    let mut digits = String::with_capacity(int_digits.len() + frac_part.len());
    digits.push_str(int_digits);
    digits.push_str(frac_part);
    if digits.is_empty() {
        return None;
    }
    let mut value = BigRational::from_integer(digits.parse::<BigInt>().ok()?);
    if negative {
        value = -value;
    }
    let shift = exp10 - frac_part.len() as i64;
    let scale = num_traits::pow(BigInt::from(10), shift.unsigned_abs() as usize);
    if shift >= 0 {
        value *= BigRational::from_integer(scale);
    } else {
        value /= BigRational::from_integer(scale);
    }
    Some(value)
}

/// Sum of a scalar iterator. `Iterator::sum` needs a `Sum` bound that the
/// trait does not require, so fold explicitly.
pub fn total<S: Scalar>(values: impl IntoIterator<Item = S>) -> S {
    values.into_iter().fold(S::zero(), |acc, v| acc + v)
}

/// Convenience constructor for exact rationals, used heavily in tests.
pub fn rat(num: i64, den: i64) -> Exact {
    Exact::ratio(num, den)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;
    use proptest::prelude::*;

    #[test]
    fn parses_fractions_exactly() {
        assert_eq!(Exact::parse_text("3/4").unwrap(), rat(3, 4));
        assert_eq!(Exact::parse_text("-3/4").unwrap(), rat(-3, 4));
        assert_eq!(Exact::parse_text("3/-4").unwrap(), rat(-3, 4));
        assert_eq!(Exact::parse_text("6/8").unwrap(), rat(3, 4));
        assert!(Exact::parse_text("1/0").is_none());
    }

    #[test]
    fn parses_decimals_exactly() {
        // 0.2 as text is exactly one fifth, unlike the nearest double.
        assert_eq!(Exact::parse_text("0.2").unwrap(), rat(1, 5));
        assert_ne!(Exact::parse_text("0.2").unwrap(), <Exact as Scalar>::from_f64(0.2).unwrap());
        assert_eq!(Exact::parse_text("-1.25").unwrap(), rat(-5, 4));
        assert_eq!(Exact::parse_text("2.5e-1").unwrap(), rat(1, 4));
        assert_eq!(Exact::parse_text("1e3").unwrap(), rat(1000, 1));
        assert_eq!(Exact::parse_text(".5").unwrap(), rat(1, 2));
        assert_eq!(Exact::parse_text("7").unwrap(), rat(7, 1));
        assert!(Exact::parse_text("").is_none());
        assert!(Exact::parse_text("one").is_none());
        assert!(Exact::parse_text("1.2.3").is_none());
    }

    #[test]
    fn float_backend_parses_both_forms() {
        assert_eq!(f64::parse_text("3/4").unwrap(), 0.75);
        assert_eq!(f64::parse_text("0.2").unwrap(), 0.2);
        assert!(f64::parse_text("1/0").is_none());
        assert!(f64::parse_text("inf").is_none());
    }

    #[test]
    fn tolerance_is_ignored_by_exact_backend() {
        let tiny = rat(1, 1_000_000_000_000);
        assert!(!tiny.is_zero_within(1e-9));
        assert!(!tiny.eq_within(&Exact::zero(), 1e-9));
        assert!(Exact::zero().is_zero_within(0.0));
    }

    #[test]
    fn tolerance_drives_float_decisions() {
        assert!(1e-10_f64.is_zero_within(1e-9));
        assert!(!1e-8_f64.is_zero_within(1e-9));
        assert!(0.5_f64.le_within(&(0.5 - 1e-12), 1e-9));
        assert!(!0.5_f64.lt_beyond(&(0.5 + 1e-12), 1e-9));
        assert!(0.4_f64.lt_beyond(&0.5, 1e-9));
    }

    #[test]
    fn from_f64_is_exact_on_dyadics() {
        assert_eq!(<Exact as Scalar>::from_f64(0.375).unwrap(), rat(3, 8));
        assert!(<Exact as Scalar>::from_f64(f64::NAN).is_none());
    }

    proptest! {
        #[test]
        fn display_text_round_trips(n in -1000i64..1000, d in 1i64..1000) {
            let x = rat(n, d);
            let back = Exact::parse_text(&x.to_string()).unwrap();
            prop_assert_eq!(back, x);
        }

        #[test]
        fn exact_and_float_parse_agree(n in -1000i64..1000, d in 1i64..1000) {
            let text = alloc::format!("{n}/{d}");
            let exact = Exact::parse_text(&text).unwrap();
            let float = f64::parse_text(&text).unwrap();
            prop_assert!((Scalar::to_f64(&exact) - float).abs() <= 1e-12);
        }
    }
}
