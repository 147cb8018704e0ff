//! Exact arithmetic in the real quadratic field Q(sqrt 2).
//!
//! Every number that appears in a breakpoint table, a slack or a linear
//! system is a [`QNum`] `a + b*sqrt2` with `a, b` arbitrary-precision
//! rationals.  Comparison is exact: the sign of `a + b*sqrt2` is decided by
//! comparing `a^2` with `2 b^2` whenever `a` and `b` have opposite signs.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Arbitrary-precision rational, always kept in lowest terms with a positive
/// denominator.
pub type Rat = BigRational;

pub fn rat(numer: i64, denom: i64) -> Rat {
    Rat::new(BigInt::from(numer), BigInt::from(denom))
}

/// An element `a + b*sqrt2` of Q(sqrt 2).
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct QNum {
    a: Rat,
    b: Rat,
}

impl QNum {
    pub fn new(a: Rat, b: Rat) -> Self {
        QNum { a, b }
    }

    pub fn zero() -> Self {
        QNum::default()
    }

    pub fn one() -> Self {
        QNum::from_int(1)
    }

    pub fn sqrt2() -> Self {
        QNum::new(Rat::zero(), Rat::one())
    }

    pub fn from_int(n: i64) -> Self {
        QNum::new(Rat::from_integer(BigInt::from(n)), Rat::zero())
    }

    /// The rational `numer/denom`.
    pub fn frac(numer: i64, denom: i64) -> Self {
        QNum::new(rat(numer, denom), Rat::zero())
    }

    /// `rational + coeff*sqrt2` from machine-size fractions.
    pub fn from_parts(rational: (i64, i64), sqrt2_coeff: (i64, i64)) -> Self {
        QNum::new(
            rat(rational.0, rational.1),
            rat(sqrt2_coeff.0, sqrt2_coeff.1),
        )
    }

    pub fn from_rat(a: Rat) -> Self {
        QNum::new(a, Rat::zero())
    }

    /// Rational part `a`.
    pub fn rational_part(&self) -> &Rat {
        &self.a
    }

    /// Coefficient `b` of sqrt2.
    pub fn sqrt2_part(&self) -> &Rat {
        &self.b
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    pub fn is_rational(&self) -> bool {
        self.b.is_zero()
    }

    /// Exact sign: `Less` for negative numbers, `Equal` for zero.
    pub fn sign(&self) -> Ordering {
        let sa = self.a.cmp(&Rat::zero());
        let sb = self.b.cmp(&Rat::zero());
        match (sa, sb) {
            (Ordering::Equal, s) | (s, Ordering::Equal) => s,
            (sa, sb) if sa == sb => sa,
            (sa, _) => {
                // opposite signs: |a| vs |b|*sqrt2, decided in floating point
                // when the gap is far above the conversion error
                let x = self.a.to_f64().unwrap_or(f64::NAN).abs();
                let y = self.b.to_f64().unwrap_or(f64::NAN).abs() * std::f64::consts::SQRT_2;
                let big = x.max(y);
                if big.is_finite() && big > 1e-200 && (x - y).abs() > 1e-9 * big {
                    return if x > y { sa } else { sa.reverse() };
                }
                let a2 = &self.a * &self.a;
                let b2 = &self.b * &self.b * Rat::from_integer(BigInt::from(2));
                match a2.cmp(&b2) {
                    Ordering::Greater => sa,
                    Ordering::Less => sa.reverse(),
                    Ordering::Equal => Ordering::Equal,
                }
            }
        }
    }

    pub fn is_positive(&self) -> bool {
        self.sign() == Ordering::Greater
    }

    pub fn is_negative(&self) -> bool {
        self.sign() == Ordering::Less
    }

    pub fn abs(&self) -> QNum {
        if self.is_negative() {
            -self
        } else {
            self.clone()
        }
    }

    /// Conjugate `a - b*sqrt2`.
    pub fn conjugate(&self) -> QNum {
        QNum::new(self.a.clone(), -&self.b)
    }

    /// Field norm `a^2 - 2 b^2`.
    pub fn norm(&self) -> Rat {
        &self.a * &self.a - &self.b * &self.b * Rat::from_integer(BigInt::from(2))
    }

    pub fn inv(&self) -> Result<QNum> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        if self.b.is_zero() {
            return Ok(QNum::from_rat(self.a.recip()));
        }
        let n = self.norm();
        Ok(QNum::new(&self.a / &n, -&self.b / &n))
    }

    pub fn checked_div(&self, rhs: &QNum) -> Result<QNum> {
        if rhs.b.is_zero() {
            if rhs.a.is_zero() {
                return Err(Error::DivisionByZero);
            }
            return Ok(QNum::new(&self.a / &rhs.a, &self.b / &rhs.a));
        }
        Ok(self * &rhs.inv()?)
    }

    pub fn scale(&self, r: &Rat) -> QNum {
        QNum::new(&self.a * r, &self.b * r)
    }

    pub fn half(&self) -> QNum {
        self.scale(&rat(1, 2))
    }

    pub fn to_f64(&self) -> f64 {
        let a = self.a.to_f64().unwrap_or(f64::NAN);
        let b = self.b.to_f64().unwrap_or(f64::NAN);
        a + b * std::f64::consts::SQRT_2
    }

    /// Largest integer not exceeding the number.
    pub fn floor(&self) -> BigInt {
        if self.b.is_zero() {
            return self.a.floor().to_integer();
        }
        let approx = self.to_f64().floor();
        let mut n = BigInt::from(approx as i64);
        loop {
            let q = QNum::from_rat(Rat::from_integer(n.clone()));
            if q > *self {
                n -= 1;
                continue;
            }
            let q1 = QNum::from_rat(Rat::from_integer(&n + 1));
            if q1 <= *self {
                n += 1;
                continue;
            }
            return n;
        }
    }

    /// Representative of the class modulo 1 in `[0, 1)`.
    pub fn frac_part(&self) -> QNum {
        let n = self.floor();
        if n.is_zero() {
            return self.clone();
        }
        QNum::new(&self.a - Rat::from_integer(n), self.b.clone())
    }

    pub fn min(self, other: QNum) -> QNum {
        if other < self {
            other
        } else {
            self
        }
    }

    pub fn max(self, other: QNum) -> QNum {
        if other > self {
            other
        } else {
            self
        }
    }
}

impl Ord for QNum {
    fn cmp(&self, other: &Self) -> Ordering {
        if self.b == other.b {
            return self.a.cmp(&other.a);
        }
        (self - other).sign()
    }
}

impl PartialOrd for QNum {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl From<i64> for QNum {
    fn from(n: i64) -> Self {
        QNum::from_int(n)
    }
}

impl From<Rat> for QNum {
    fn from(r: Rat) -> Self {
        QNum::from_rat(r)
    }
}

impl Neg for QNum {
    type Output = QNum;
    fn neg(self) -> QNum {
        QNum::new(-self.a, -self.b)
    }
}

impl Neg for &QNum {
    type Output = QNum;
    fn neg(self) -> QNum {
        QNum::new(-&self.a, -&self.b)
    }
}

fn mul_parts(x: &QNum, y: &QNum) -> QNum {
    if x.b.is_zero() {
        return QNum::new(&x.a * &y.a, &x.a * &y.b);
    }
    if y.b.is_zero() {
        return QNum::new(&x.a * &y.a, &x.b * &y.a);
    }
    let two = Rat::from_integer(BigInt::from(2));
    QNum::new(&x.a * &y.a + &x.b * &y.b * two, &x.a * &y.b + &x.b * &y.a)
}

macro_rules! forward_binop {
    ($tr:ident, $method:ident, $body:expr) => {
        impl $tr<&QNum> for &QNum {
            type Output = QNum;
            fn $method(self, rhs: &QNum) -> QNum {
                let f: fn(&QNum, &QNum) -> QNum = $body;
                f(self, rhs)
            }
        }
        impl $tr<QNum> for QNum {
            type Output = QNum;
            fn $method(self, rhs: QNum) -> QNum {
                (&self).$method(&rhs)
            }
        }
        impl $tr<&QNum> for QNum {
            type Output = QNum;
            fn $method(self, rhs: &QNum) -> QNum {
                (&self).$method(rhs)
            }
        }
        impl $tr<QNum> for &QNum {
            type Output = QNum;
            fn $method(self, rhs: QNum) -> QNum {
                self.$method(&rhs)
            }
        }
    };
}

forward_binop!(Add, add, |x, y| QNum::new(&x.a + &y.a, &x.b + &y.b));
forward_binop!(Sub, sub, |x, y| QNum::new(&x.a - &y.a, &x.b - &y.b));
forward_binop!(Mul, mul, mul_parts);
// Panics on a zero divisor; use `checked_div` where the divisor may vanish.
forward_binop!(Div, div, |x, y| x
    .checked_div(y)
    .expect("QNum division by zero"));

impl AddAssign<&QNum> for QNum {
    fn add_assign(&mut self, rhs: &QNum) {
        self.a += &rhs.a;
        self.b += &rhs.b;
    }
}

impl AddAssign<QNum> for QNum {
    fn add_assign(&mut self, rhs: QNum) {
        *self += &rhs;
    }
}

impl SubAssign<&QNum> for QNum {
    fn sub_assign(&mut self, rhs: &QNum) {
        self.a -= &rhs.a;
        self.b -= &rhs.b;
    }
}

impl SubAssign<QNum> for QNum {
    fn sub_assign(&mut self, rhs: QNum) {
        *self -= &rhs;
    }
}

impl std::iter::Sum for QNum {
    fn sum<I: Iterator<Item = QNum>>(iter: I) -> QNum {
        iter.fold(QNum::zero(), |acc, x| acc + x)
    }
}

fn fmt_rat(r: &Rat) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Canonical text form: `a`, `b*sqrt2`, `a + b*sqrt2` or `a - b*sqrt2`.
pub fn format_qnum(x: &QNum) -> String {
    match (x.a.is_zero(), x.b.is_zero()) {
        (_, true) => fmt_rat(&x.a),
        (true, false) => format!("{}*sqrt2", fmt_rat(&x.b)),
        (false, false) => {
            if x.b.is_negative() {
                format!("{} - {}*sqrt2", fmt_rat(&x.a), fmt_rat(&-&x.b))
            } else {
                format!("{} + {}*sqrt2", fmt_rat(&x.a), fmt_rat(&x.b))
            }
        }
    }
}

impl fmt::Display for QNum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_qnum(self))
    }
}

impl fmt::Debug for QNum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "QNum({})", format_qnum(self))
    }
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T> {
        Err(Error::Parse {
            pos: self.pos,
            msg: msg.into(),
        })
    }

    fn integer(&mut self) -> Result<BigInt> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return self.err("expected digits");
        }
        let digits = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii digits");
        Ok(digits.parse::<BigInt>().expect("validated digits"))
    }

    fn keyword(&mut self, kw: &str) -> bool {
        self.skip_ws();
        if self.src[self.pos..].starts_with(kw.as_bytes()) {
            self.pos += kw.len();
            true
        } else {
            false
        }
    }

    /// One term: `R`, `R*sqrt2` or `sqrt2`, unsigned.
    fn term(&mut self) -> Result<(Rat, bool)> {
        if self.keyword("sqrt2") {
            return Ok((Rat::one(), true));
        }
        let numer = self.integer()?;
        let mut value = Rat::from_integer(numer);
        if self.peek() == Some(b'/') {
            self.pos += 1;
            let denom = self.integer()?;
            if denom.is_zero() {
                return self.err("zero denominator");
            }
            value = Rat::new(value.to_integer(), denom);
        }
        if self.peek() == Some(b'*') {
            self.pos += 1;
            if !self.keyword("sqrt2") {
                return self.err("expected `sqrt2` after `*`");
            }
            return Ok((value, true));
        }
        Ok((value, false))
    }
}

/// Parses the literal grammar `R | R*sqrt2 | R + R*sqrt2 | R - R*sqrt2`
/// (terms may appear in either order; `R` is an optionally signed integer or
/// fraction).
pub fn parse_qnum(text: &str) -> Result<QNum> {
    let mut lx = Lexer {
        src: text.as_bytes(),
        pos: 0,
    };
    let mut rational: Option<Rat> = None;
    let mut irrational: Option<Rat> = None;
    let mut first = true;
    loop {
        let negative = match lx.peek() {
            Some(b'-') => {
                lx.pos += 1;
                true
            }
            Some(b'+') if !first => {
                lx.pos += 1;
                false
            }
            None if first => return lx.err("empty literal"),
            None => break,
            _ if first => false,
            _ => return lx.err("expected `+` or `-`"),
        };
        let term_pos = lx.pos;
        let (mut value, is_sqrt2) = lx.term()?;
        if negative {
            value = -value;
        }
        let slot = if is_sqrt2 {
            &mut irrational
        } else {
            &mut rational
        };
        if slot.is_some() {
            return Err(Error::Parse {
                pos: term_pos,
                msg: "duplicate term".into(),
            });
        }
        *slot = Some(value);
        first = false;
    }
    Ok(QNum::new(
        rational.unwrap_or_else(Rat::zero),
        irrational.unwrap_or_else(Rat::zero),
    ))
}

impl FromStr for QNum {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        parse_qnum(s)
    }
}

impl Serialize for QNum {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&format_qnum(self))
    }
}

impl<'de> Deserialize<'de> for QNum {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        parse_qnum(&s).map_err(serde::de::Error::custom)
    }
}

/// Shorthand used throughout the catalog and tests: parses a literal,
/// panicking on malformed input.
pub fn q(text: &str) -> QNum {
    parse_qnum(text).unwrap_or_else(|e| panic!("bad literal {text:?}: {e}"))
}

/// Integer quotient `x / step` when it is an integer.
pub fn rat_integer_ratio(x: &Rat, step: &Rat) -> Option<BigInt> {
    let r = x / step;
    r.is_integer().then(|| r.to_integer())
}

/// `x mod step` in `[0, step)` for a positive rational `step`.
pub fn rat_mod(x: &Rat, step: &Rat) -> Rat {
    let k = (x / step).floor();
    x - step * k
}


#[cfg(test)]
mod props {
    use super::*;
    use num_bigint::Sign;
    use proptest::prelude::*;

    fn small_rat() -> impl Strategy<Value = Rat> {
        (-2000i64..2000, 1i64..500).prop_map(|(n, d)| rat(n, d))
    }

    fn qnum() -> impl Strategy<Value = QNum> {
        (small_rat(), small_rat()).prop_map(|(a, b)| QNum::new(a, b))
    }

    // floor(sqrt(2) * 10^100) by integer square root, independent of `sign`.
    fn sqrt2_scaled() -> BigInt {
        let ten = BigInt::from(10);
        (BigInt::from(2) * num_traits::pow(ten, 200)).sqrt()
    }

    // Sign of a + b*sqrt2 from a 100-digit truncation of sqrt2.
    fn decimal_sign(x: &QNum, s2: &BigInt) -> Ordering {
        let scale = num_traits::pow(BigInt::from(10), 100);
        let a = x.a.numer() * x.b.denom() * &scale;
        let b = x.b.numer() * x.a.denom();
        // truncation error is below |b|, far smaller than the scaled value
        let approx = a + b * s2;
        match approx.sign() {
            Sign::Minus => Ordering::Less,
            Sign::NoSign => Ordering::Equal,
            Sign::Plus => Ordering::Greater,
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(10_000))]
        #[test]
        fn cmp_matches_decimal_oracle(x in qnum(), y in qnum()) {
            let s2 = sqrt2_scaled();
            let diff = &x - &y;
            if diff.b.is_zero() {
                prop_assert_eq!(x.cmp(&y), diff.a.cmp(&Rat::zero()));
            } else {
                prop_assert_eq!(x.cmp(&y), decimal_sign(&diff, &s2));
            }
            prop_assert_eq!(x.cmp(&x), Ordering::Equal);
            prop_assert_eq!(x.cmp(&y), y.cmp(&x).reverse());
        }
    }

    proptest! {
        #[test]
        fn field_axioms(x in qnum(), y in qnum(), z in qnum()) {
            prop_assert_eq!((&x + &y) + &z, &x + (&y + &z));
            prop_assert_eq!((&x * &y) * &z, &x * (&y * &z));
            prop_assert_eq!(&x * (&y + &z), &x * &y + &x * &z);
            prop_assert_eq!(&x * &y, &y * &x);
            if !x.is_zero() {
                prop_assert_eq!(&x * x.inv().unwrap(), QNum::one());
            }
            prop_assert_eq!(&x - &x, QNum::zero());
        }

        #[test]
        fn order_compatible(x in qnum(), y in qnum(), z in qnum()) {
            if x < y {
                prop_assert!(&x + &z < &y + &z);
                if z.is_positive() {
                    prop_assert!(&x * &z < &y * &z);
                }
            }
        }

        #[test]
        fn parse_format_round_trip(x in qnum()) {
            prop_assert_eq!(parse_qnum(&format_qnum(&x)).unwrap(), x);
        }

        #[test]
        fn floor_brackets(x in qnum()) {
            let n = QNum::from_rat(Rat::from_integer(x.floor()));
            prop_assert!(n <= x);
            prop_assert!(x < n + QNum::one());
            let r = x.frac_part();
            prop_assert!(!r.is_negative() && r < QNum::one());
        }
    }
}
