//! Double-double arithmetic.
//!
//! A [`DoubleDouble`] is the unevaluated sum `hi + lo` of two `f64` values with
//! `|lo| <= ulp(hi)/2`, giving roughly twice the working precision. Only the
//! operations the solver needs are provided: `+ - * /`, square root, comparison
//! and conversions.

pub mod exact;

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};

use crate::error::{Error, Result};

/// Machine precision of the working format (2^-52).
pub const ULP_UNIT: f64 = f64::EPSILON;

/// Error-free product used by multiplication and division.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum TwoProd {
    /// Fused multiply-add.
    #[default]
    Fma,
    /// Dekker's splitting, no FMA required.
    Dekker,
}

impl TwoProd {
    #[inline]
    pub fn apply(self, a: f64, b: f64) -> DoubleDouble {
        match self {
            TwoProd::Fma => two_prod(a, b),
            TwoProd::Dekker => two_prod_dekker(a, b),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct DoubleDouble {
    hi: f64,
    lo: f64,
}

/// Knuth's branch-free TwoSum: `hi + lo == a + b` exactly.
#[inline]
pub fn two_sum(a: f64, b: f64) -> DoubleDouble {
    let s = a + b;
    let bb = s - a;
    let err = (a - (s - bb)) + (b - bb);
    DoubleDouble { hi: s, lo: err }
}

/// [`two_sum`] that reports overflow instead of returning a non-finite pair.
pub fn try_two_sum(a: f64, b: f64) -> Result<DoubleDouble> {
    if !a.is_finite() || !b.is_finite() {
        return Err(Error::Input(format!("non-finite operand in two_sum({a}, {b})")));
    }
    let r = two_sum(a, b);
    if !r.hi.is_finite() {
        return Err(Error::Range(format!("{a} + {b} overflows")));
    }
    Ok(r)
}

#[inline]
pub fn two_diff(a: f64, b: f64) -> DoubleDouble {
    two_sum(a, -b)
}

// Requires |a| >= |b| or a == 0.
#[inline]
fn quick_two_sum(a: f64, b: f64) -> DoubleDouble {
    let s = a + b;
    if !s.is_finite() {
        return DoubleDouble { hi: s, lo: 0.0 };
    }
    DoubleDouble { hi: s, lo: b - (s - a) }
}

#[inline]
pub fn two_prod(a: f64, b: f64) -> DoubleDouble {
    let p = a * b;
    if !p.is_finite() {
        return DoubleDouble { hi: p, lo: 0.0 };
    }
    DoubleDouble { hi: p, lo: a.mul_add(b, -p) }
}

const SPLITTER: f64 = 134_217_729.0; // 2^27 + 1
const SPLIT_LIMIT: f64 = 6.696_928_794_914_17e299; // 2^996

#[inline]
fn split(a: f64) -> (f64, f64) {
    if a.abs() > SPLIT_LIMIT {
        let s = a * 3.725_290_298_461_914e-9; // 2^-28
        let t = SPLITTER * s;
        let hi = t - (t - s);
        let lo = s - hi;
        (hi * 268_435_456.0, lo * 268_435_456.0)
    } else {
        let t = SPLITTER * a;
        let hi = t - (t - a);
        (hi, a - hi)
    }
}

/// Dekker's TwoProduct.
pub fn two_prod_dekker(a: f64, b: f64) -> DoubleDouble {
    let p = a * b;
    if !p.is_finite() {
        return DoubleDouble { hi: p, lo: 0.0 };
    }
    let (ah, al) = split(a);
    let (bh, bl) = split(b);
    let err = ((ah * bh - p) + ah * bl + al * bh) + al * bl;
    DoubleDouble { hi: p, lo: err }
}

impl DoubleDouble {
    pub const ZERO: DoubleDouble = DoubleDouble { hi: 0.0, lo: 0.0 };
    pub const ONE: DoubleDouble = DoubleDouble { hi: 1.0, lo: 0.0 };

    /// Normalizes `hi + lo`.
    pub fn new(hi: f64, lo: f64) -> Self {
        let r = two_sum(hi, lo);
        if !r.hi.is_finite() {
            return DoubleDouble { hi: r.hi, lo: 0.0 };
        }
        r
    }

    /// Binary interpretation: the float padded with zeros.
    pub const fn from_f64(x: f64) -> Self {
        DoubleDouble { hi: x, lo: 0.0 }
    }

    #[inline]
    pub fn hi(self) -> f64 {
        self.hi
    }

    #[inline]
    pub fn lo(self) -> f64 {
        self.lo
    }

    /// Rounds to working precision.
    #[inline]
    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    pub fn is_finite(self) -> bool {
        self.hi.is_finite() && self.lo.is_finite()
    }

    pub fn is_zero(self) -> bool {
        self.hi == 0.0
    }

    pub fn is_sign_negative(self) -> bool {
        self.hi < 0.0 || (self.hi == 0.0 && self.lo < 0.0)
    }

    pub fn abs(self) -> Self {
        if self.is_sign_negative() {
            -self
        } else {
            self
        }
    }

    /// Exact square of a float.
    #[inline]
    pub fn square_f64(x: f64) -> Self {
        two_prod(x, x)
    }

    pub fn square(self) -> Self {
        self * self
    }

    /// Exact multiplication by a power of two.
    pub fn mul_pow2(self, s: f64) -> Self {
        DoubleDouble { hi: self.hi * s, lo: self.lo * s }
    }

    pub fn mul_f64_with(self, b: f64, tp: TwoProd) -> Self {
        let p = tp.apply(self.hi, b);
        quick_two_sum(p.hi, p.lo + self.lo * b)
    }

    pub fn mul_f64(self, b: f64) -> Self {
        self.mul_f64_with(b, TwoProd::Fma)
    }

    pub fn mul_with(self, rhs: Self, tp: TwoProd) -> Self {
        let p = tp.apply(self.hi, rhs.hi);
        let err = p.lo + (self.hi * rhs.lo + self.lo * rhs.hi);
        quick_two_sum(p.hi, err)
    }

    /// Three-quotient long division.
    pub fn div_with(self, rhs: Self, tp: TwoProd) -> Self {
        let q1 = self.hi / rhs.hi;
        if !q1.is_finite() || q1 == 0.0 {
            return DoubleDouble::from_f64(q1);
        }
        let r = self - rhs.mul_f64_with(q1, tp);
        let q2 = r.hi / rhs.hi;
        let r = r - rhs.mul_f64_with(q2, tp);
        let q3 = r.hi / rhs.hi;
        quick_two_sum(q1, q2) + DoubleDouble::from_f64(q3)
    }

    pub fn checked_div(self, rhs: Self) -> Result<Self> {
        if rhs.is_zero() {
            return Err(Error::Singular("double-double division by zero".into()));
        }
        let q = self / rhs;
        if !q.is_finite() && self.is_finite() {
            return Err(Error::Range("double-double quotient overflows".into()));
        }
        Ok(q)
    }

    pub fn checked_add(self, rhs: Self) -> Result<Self> {
        let s = self + rhs;
        if !s.is_finite() && self.is_finite() && rhs.is_finite() {
            return Err(Error::Range("double-double sum overflows".into()));
        }
        Ok(s)
    }

    pub fn checked_mul(self, rhs: Self) -> Result<Self> {
        let p = self * rhs;
        if !p.is_finite() && self.is_finite() && rhs.is_finite() {
            return Err(Error::Range("double-double product overflows".into()));
        }
        Ok(p)
    }

    pub fn recip(self) -> Self {
        DoubleDouble::ONE / self
    }

    /// Square root: hardware seed plus one Newton correction.
    pub fn sqrt(self) -> Self {
        if self.hi <= 0.0 {
            return if self.hi == 0.0 {
                DoubleDouble::ZERO
            } else {
                DoubleDouble::from_f64(f64::NAN)
            };
        }
        let x = 1.0 / self.hi.sqrt();
        let ax = self.hi * x;
        let diff = self - two_prod(ax, ax);
        two_sum(ax, diff.hi * (x * 0.5))
    }

    /// Overflow-safe `sqrt(a^2 + b^2)` of two floats.
    pub fn hypot(a: f64, b: f64) -> Self {
        let s = a.abs().max(b.abs());
        if s == 0.0 {
            return DoubleDouble::ZERO;
        }
        // Scale by a power of two so the squares stay in range.
        let k = s.log2().floor() as i32;
        let (h1, h2) = (-k / 2, -k - (-k / 2));
        let (p1, p2) = (2f64.powi(h1), 2f64.powi(h2));
        let (x, y) = (a * p1 * p2, b * p1 * p2);
        (two_prod(x, x) + two_prod(y, y))
            .sqrt()
            .mul_pow2(1.0 / p1)
            .mul_pow2(1.0 / p2)
    }

    /// Correctly rounded conversion of a decimal literal.
    pub fn from_decimal_str(s: &str) -> Result<Self> {
        let r = exact::parse_decimal(s)?;
        let hi = exact::round_rational(&r);
        if !hi.is_finite() {
            return Err(Error::Range(format!("{s:?} overflows the working format")));
        }
        let lo = exact::round_rational(&(r - exact::rational_from_f64(hi)));
        Ok(DoubleDouble { hi, lo })
    }

    /// Scientific notation with `digits` significant decimal digits.
    pub fn to_sci_string(self, digits: usize) -> String {
        if !self.is_finite() {
            return format!("{}", self.hi);
        }
        exact::format_sci(&exact::rational_from_dd(self), digits)
    }
}

impl From<f64> for DoubleDouble {
    fn from(x: f64) -> Self {
        DoubleDouble::from_f64(x)
    }
}

impl Neg for DoubleDouble {
    type Output = Self;
    fn neg(self) -> Self {
        DoubleDouble { hi: -self.hi, lo: -self.lo }
    }
}

impl Add for DoubleDouble {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        let s = two_sum(self.hi, rhs.hi);
        if !s.hi.is_finite() {
            return DoubleDouble::from_f64(s.hi);
        }
        let t = two_sum(self.lo, rhs.lo);
        let u = quick_two_sum(s.hi, s.lo + t.hi);
        quick_two_sum(u.hi, u.lo + t.lo)
    }
}

impl Sub for DoubleDouble {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        self + (-rhs)
    }
}

impl Mul for DoubleDouble {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        self.mul_with(rhs, TwoProd::Fma)
    }
}

impl Div for DoubleDouble {
    type Output = Self;
    fn div(self, rhs: Self) -> Self {
        self.div_with(rhs, TwoProd::Fma)
    }
}

impl AddAssign for DoubleDouble {
    fn add_assign(&mut self, rhs: Self) {
        *self = *self + rhs;
    }
}

impl SubAssign for DoubleDouble {
    fn sub_assign(&mut self, rhs: Self) {
        *self = *self - rhs;
    }
}

impl PartialOrd for DoubleDouble {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match self.hi.partial_cmp(&other.hi)? {
            Ordering::Equal => self.lo.partial_cmp(&other.lo),
            o => Some(o),
        }
    }
}

impl fmt::Display for DoubleDouble {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let digits = f.precision().map_or(32, |p| p + 1);
        f.write_str(&self.to_sci_string(digits))
    }
}
