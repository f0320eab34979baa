//! Exact rational and dyadic helpers.
//!
//! These back the correctly rounded decimal conversions of [`DoubleDouble`](super::DoubleDouble)
//! and serve as the reference arithmetic when auditing the double-double kernel.

use std::cmp::Ordering;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::DoubleDouble;
use crate::error::{Error, Result};

const MAX_DECIMAL_EXPONENT: i64 = 20_000;

/// Splits a finite float into `(m, e)` with `x == m * 2^e` exactly.
pub fn decompose(x: f64) -> (i64, i64) {
    assert!(x.is_finite(), "decompose requires a finite value");
    if x == 0.0 {
        return (0, 0);
    }
    let bits = x.to_bits();
    let sign = if bits >> 63 == 1 { -1 } else { 1 };
    let biased = ((bits >> 52) & 0x7ff) as i64;
    let frac = (bits & ((1u64 << 52) - 1)) as i64;
    let (m, e) = if biased == 0 {
        (frac, -1074)
    } else {
        (frac | (1i64 << 52), biased - 1075)
    };
    (sign * m, e)
}

/// Exact binary fraction `m * 2^e`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Dyadic {
    m: BigInt,
    e: i64,
}

impl Dyadic {
    pub fn zero() -> Self {
        Dyadic { m: BigInt::zero(), e: 0 }
    }

    pub fn from_f64(x: f64) -> Self {
        let (m, e) = decompose(x);
        Dyadic { m: BigInt::from(m), e }
    }

    pub fn from_dd(x: DoubleDouble) -> Self {
        Dyadic::from_f64(x.hi()).add(&Dyadic::from_f64(x.lo()))
    }

    pub fn is_zero(&self) -> bool {
        self.m.is_zero()
    }

    fn aligned(&self, other: &Dyadic) -> (BigInt, BigInt, i64) {
        let e = self.e.min(other.e);
        let a = &self.m << ((self.e - e) as usize);
        let b = &other.m << ((other.e - e) as usize);
        (a, b, e)
    }

    pub fn add(&self, other: &Dyadic) -> Dyadic {
        if self.is_zero() {
            return other.clone();
        }
        if other.is_zero() {
            return self.clone();
        }
        let (a, b, e) = self.aligned(other);
        Dyadic { m: a + b, e }
    }

    pub fn sub(&self, other: &Dyadic) -> Dyadic {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Dyadic) -> Dyadic {
        Dyadic {
            m: &self.m * &other.m,
            e: self.e + other.e,
        }
    }

    pub fn neg(&self) -> Dyadic {
        Dyadic { m: -&self.m, e: self.e }
    }

    pub fn abs(&self) -> Dyadic {
        Dyadic { m: self.m.abs(), e: self.e }
    }

    /// Multiplies by `2^k` exactly.
    pub fn scale(&self, k: i64) -> Dyadic {
        Dyadic { m: self.m.clone(), e: self.e + k }
    }

    pub fn signum(&self) -> i32 {
        match self.m.sign() {
            Sign::Minus => -1,
            Sign::NoSign => 0,
            Sign::Plus => 1,
        }
    }

    pub fn to_rational(&self) -> BigRational {
        if self.e >= 0 {
            BigRational::from_integer(&self.m << (self.e as usize))
        } else {
            BigRational::new(self.m.clone(), BigInt::one() << ((-self.e) as usize))
        }
    }

    pub fn to_f64(&self) -> f64 {
        round_rational(&self.to_rational())
    }
}

impl PartialOrd for Dyadic {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        let (a, b, _) = self.aligned(other);
        Some(a.cmp(&b))
    }
}

pub fn rational_from_f64(x: f64) -> BigRational {
    Dyadic::from_f64(x).to_rational()
}

pub fn rational_from_dd(x: DoubleDouble) -> BigRational {
    Dyadic::from_dd(x).to_rational()
}

/// Rounds a rational to the nearest float, ties to even.
pub fn round_rational(x: &BigRational) -> f64 {
    if x.is_zero() {
        return 0.0;
    }
    let negative = x.is_negative();
    let n: BigUint = x.numer().abs().to_biguint().expect("nonnegative");
    let d: BigUint = x.denom().abs().to_biguint().expect("nonnegative");

    let quotient = |e: i64| -> (BigUint, BigUint, BigUint) {
        if e >= 0 {
            let div = &d << (e as usize);
            let (q, r) = n.div_rem(&div);
            (q, r, div)
        } else {
            let num = &n << ((-e) as usize);
            let (q, r) = num.div_rem(&d);
            (q, r, d.clone())
        }
    };

    let two52 = BigUint::one() << 52usize;
    let two53 = BigUint::one() << 53usize;
    let mut e = n.bits() as i64 - d.bits() as i64 - 53;
    let (mut q, mut r, mut div) = quotient(e);
    while q >= two53 {
        e += 1;
        (q, r, div) = quotient(e);
    }
    while q < two52 && e > -1074 {
        e -= 1;
        (q, r, div) = quotient(e);
    }
    if e < -1074 {
        e = -1074;
        (q, r, div) = quotient(e);
    }
    let twice = &r << 1usize;
    let round_up = match twice.cmp(&div) {
        Ordering::Greater => true,
        Ordering::Equal => q.is_odd(),
        Ordering::Less => false,
    };
    if round_up {
        q += 1u32;
        if q == two53 {
            q = two52.clone();
            e += 1;
        }
    }
    let q = q.to_u64().expect("53-bit significand");
    let bits = if q >= 1u64 << 52 {
        let biased = e + 52 + 1023;
        if biased >= 2047 {
            0x7ffu64 << 52
        } else {
            ((biased as u64) << 52) | (q - (1u64 << 52))
        }
    } else {
        q
    };
    let magnitude = f64::from_bits(bits);
    if negative {
        -magnitude
    } else {
        magnitude
    }
}

/// Parses a decimal floating point literal into an exact rational.
pub fn parse_decimal(s: &str) -> Result<BigRational> {
    let err = || Error::Parse(format!("malformed decimal literal {s:?}"));
    let t = s.trim();
    let (negative, body) = match t.as_bytes().first() {
        Some(b'-') => (true, &t[1..]),
        Some(b'+') => (false, &t[1..]),
        _ => (false, t),
    };
    let (mantissa, exponent) = match body.find(['e', 'E']) {
        Some(p) => (&body[..p], Some(&body[p + 1..])),
        None => (body, None),
    };
    let (int_part, frac_part) = match mantissa.find('.') {
        Some(p) => (&mantissa[..p], &mantissa[p + 1..]),
        None => (mantissa, ""),
    };
    let all_digits = |x: &str| x.bytes().all(|c| c.is_ascii_digit());
    if int_part.len() + frac_part.len() == 0 || !all_digits(int_part) || !all_digits(frac_part) {
        return Err(err());
    }
    let mut exp10: i64 = match exponent {
        None => 0,
        Some(x) => {
            let digits = x.strip_prefix(['+', '-']).unwrap_or(x);
            if digits.is_empty() || !all_digits(digits) || digits.len() > 9 {
                return Err(err());
            }
            x.parse::<i64>().map_err(|_| err())?
        }
    };
    exp10 -= frac_part.len() as i64;
    let digits = format!("{int_part}{frac_part}");
    let mut m = BigInt::parse_bytes(digits.as_bytes(), 10).ok_or_else(err)?;
    if m.is_zero() {
        return Ok(BigRational::zero());
    }
    if exp10.abs() > MAX_DECIMAL_EXPONENT {
        return Err(Error::Range(format!("decimal exponent out of range in {s:?}")));
    }
    if negative {
        m = -m;
    }
    let p = num_traits::pow(BigInt::from(10), exp10.unsigned_abs() as usize);
    Ok(if exp10 >= 0 {
        BigRational::from_integer(m * p)
    } else {
        BigRational::new(m, p)
    })
}

/// Scientific notation with `digits` significant digits, round half to even.
pub fn format_sci(x: &BigRational, digits: usize) -> String {
    assert!(digits >= 1);
    if x.is_zero() {
        return format!("{}e0", pad_zero(digits));
    }
    let sign = if x.is_negative() { "-" } else { "" };
    let a = x.abs();
    let ten = BigInt::from(10);
    let lo = num_traits::pow(ten.clone(), digits - 1);
    let hi = &lo * &ten;
    let mut p = a.numer().to_string().len() as i64 - a.denom().to_string().len() as i64;
    loop {
        let shift = digits as i64 - 1 - p;
        let scaled = if shift >= 0 {
            &a * BigRational::from_integer(num_traits::pow(ten.clone(), shift as usize))
        } else {
            &a / BigRational::from_integer(num_traits::pow(ten.clone(), (-shift) as usize))
        };
        let (q, r): (BigInt, BigInt) = scaled.numer().div_rem(scaled.denom());
        let twice: BigInt = &r * BigInt::from(2);
        let q = match twice.cmp(scaled.denom()) {
            Ordering::Greater => q + 1,
            Ordering::Equal if q.is_odd() => q + 1,
            _ => q,
        };
        if q >= hi {
            p += 1;
            continue;
        }
        if q < lo {
            p -= 1;
            continue;
        }
        let s = q.to_string();
        let (first, rest) = s.split_at(1);
        return if rest.is_empty() {
            format!("{sign}{first}e{p}")
        } else {
            format!("{sign}{first}.{rest}e{p}")
        };
    }
}

fn pad_zero(digits: usize) -> String {
    if digits == 1 {
        "0".to_string()
    } else {
        format!("0.{}", "0".repeat(digits - 1))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decompose_roundtrip() {
        for &x in &[1.0, -0.1, 5e-324, f64::MAX, 3.0e-310, 1e20, -0.0] {
            assert_eq!(Dyadic::from_f64(x).to_f64(), x);
        }
        assert_eq!(decompose(1.0), (1 << 52, -52));
        assert_eq!(decompose(-5e-324), (-1, -1074));
    }

    #[test]
    fn rounding_matches_std_parse() {
        for s in ["0.1", "1e23", "2.2250738585072011e-308", "4.9e-324", "2.5e-324", "9007199254740993", "1.7976931348623157e308", "123456789.987654321e-7"] {
            let r = parse_decimal(s).unwrap();
            assert_eq!(round_rational(&r), s.parse::<f64>().unwrap(), "{s}");
        }
    }

    #[test]
    fn ties_go_to_even() {
        // 2^53 + 1 lies halfway between 2^53 and 2^53 + 2.
        let r = BigRational::from_integer(BigInt::from((1u64 << 53) + 1));
        assert_eq!(round_rational(&r), 9007199254740992.0);
        let r = BigRational::from_integer(BigInt::from((1u64 << 53) + 3));
        assert_eq!(round_rational(&r), 9007199254740996.0);
    }

    #[test]
    fn overflow_rounds_to_infinity() {
        let r = parse_decimal("1e309").unwrap();
        assert_eq!(round_rational(&r), f64::INFINITY);
        assert_eq!(round_rational(&-r), f64::NEG_INFINITY);
    }

    #[test]
    fn malformed_literals() {
        for s in ["", "-", ".", "1e", "1.2.3", "abc", "1e+", "inf", "NaN", "0x10"] {
            assert!(parse_decimal(s).is_err(), "{s:?}");
        }
        assert!(parse_decimal(" +.5 ").is_ok());
        assert!(parse_decimal("5.").is_ok());
    }

    #[test]
    fn sci_formatting() {
        let third = BigRational::new(BigInt::from(1), BigInt::from(3));
        assert_eq!(format_sci(&third, 5), "3.3333e-1");
        assert_eq!(format_sci(&parse_decimal("-123.45").unwrap(), 3), "-1.23e2");
        assert_eq!(format_sci(&parse_decimal("9.9996").unwrap(), 4), "1.000e1");
        assert_eq!(format_sci(&parse_decimal("0.125").unwrap(), 2), "1.2e-1");
        assert_eq!(format_sci(&BigRational::zero(), 3), "0.00e0");
    }

    #[test]
    fn dyadic_ordering() {
        let a = Dyadic::from_f64(1.5);
        let b = Dyadic::from_f64(1.25);
        assert!(a > b);
        assert_eq!(a.sub(&b).to_f64(), 0.25);
        assert_eq!(a.mul(&b).to_f64(), 1.875);
        assert_eq!(a.scale(-1).to_f64(), 0.75);
    }
}
