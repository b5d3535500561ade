//! Exact rationals and their extension with `+∞`.
//!
//! Every time, size, rate and curve value in the crate is a [`Q`]. Arithmetic
//! is checked: an `i128` overflow panics instead of wrapping.

use std::cmp::Ordering;
use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{CheckedAdd, CheckedDiv, CheckedMul, CheckedSub, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Exact rational number in canonical form: `gcd(n, d) = 1`, `d > 0`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Q(Ratio<i128>);

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParseQError {
    #[error("empty rational literal")]
    Empty,
    #[error("zero denominator in `{0}`")]
    ZeroDenominator(String),
    #[error("malformed rational literal `{0}`")]
    Malformed(String),
}

impl Q {
    pub const ZERO: Q = Q(Ratio::new_raw(0, 1));
    pub const ONE: Q = Q(Ratio::new_raw(1, 1));

    /// Panics when `d == 0`.
    pub fn new(n: i128, d: i128) -> Q {
        assert!(d != 0, "rational with zero denominator");
        Q(Ratio::new(n, d))
    }

    pub fn int(n: i128) -> Q {
        Q(Ratio::from_integer(n))
    }

    pub fn numer(self) -> i128 {
        *self.0.numer()
    }

    pub fn denom(self) -> i128 {
        *self.0.denom()
    }

    pub fn is_zero(self) -> bool {
        self.0.is_zero()
    }

    pub fn is_positive(self) -> bool {
        self.0.is_positive()
    }

    pub fn is_negative(self) -> bool {
        self.0.is_negative()
    }

    pub fn abs(self) -> Q {
        Q(self.0.abs())
    }

    /// `max(self, 0)`.
    pub fn pos(self) -> Q {
        if self.is_negative() {
            Q::ZERO
        } else {
            self
        }
    }

    pub fn floor(self) -> i128 {
        Integer::div_floor(&self.numer(), &self.denom())
    }

    pub fn ceil(self) -> i128 {
        -(-self).floor()
    }

    pub fn recip(self) -> Q {
        assert!(!self.is_zero(), "reciprocal of zero");
        Q(self.0.recip())
    }

    /// Display-only conversion; never used in a decision.
    pub fn to_f64(self) -> f64 {
        self.numer() as f64 / self.denom() as f64
    }

    pub fn mid(self, other: Q) -> Q {
        (self + other) / Q::int(2)
    }

    /// Least common multiple of two positive rationals.
    pub fn lcm(self, other: Q) -> Q {
        assert!(self.is_positive() && other.is_positive(), "lcm of non-positive rationals");
        let n = self.numer().lcm(&other.numer());
        let d = self.denom().gcd(&other.denom());
        Q::new(n, d)
    }
}

fn overflow(op: &str) -> ! {
    panic!("rational overflow in {op}")
}

impl Add for Q {
    type Output = Q;
    fn add(self, rhs: Q) -> Q {
        if self.denom() == 1 && rhs.denom() == 1 {
            return Q::int(self.numer().checked_add(rhs.numer()).unwrap_or_else(|| overflow("add")));
        }
        Q(self.0.checked_add(&rhs.0).unwrap_or_else(|| overflow("add")))
    }
}

impl Sub for Q {
    type Output = Q;
    fn sub(self, rhs: Q) -> Q {
        if self.denom() == 1 && rhs.denom() == 1 {
            return Q::int(self.numer().checked_sub(rhs.numer()).unwrap_or_else(|| overflow("sub")));
        }
        Q(self.0.checked_sub(&rhs.0).unwrap_or_else(|| overflow("sub")))
    }
}

impl Mul for Q {
    type Output = Q;
    fn mul(self, rhs: Q) -> Q {
        Q(self.0.checked_mul(&rhs.0).unwrap_or_else(|| overflow("mul")))
    }
}

impl Div for Q {
    type Output = Q;
    fn div(self, rhs: Q) -> Q {
        assert!(!rhs.is_zero(), "rational division by zero");
        Q(self.0.checked_div(&rhs.0).unwrap_or_else(|| overflow("div")))
    }
}

impl Neg for Q {
    type Output = Q;
    fn neg(self) -> Q {
        Q(Ratio::new_raw(self.numer().checked_neg().unwrap_or_else(|| overflow("neg")), self.denom()))
    }
}

impl AddAssign for Q {
    fn add_assign(&mut self, rhs: Q) {
        *self = *self + rhs;
    }
}

impl SubAssign for Q {
    fn sub_assign(&mut self, rhs: Q) {
        *self = *self - rhs;
    }
}

impl Sum for Q {
    fn sum<I: Iterator<Item = Q>>(iter: I) -> Q {
        iter.fold(Q::ZERO, |a, b| a + b)
    }
}

impl<'a> Sum<&'a Q> for Q {
    fn sum<I: Iterator<Item = &'a Q>>(iter: I) -> Q {
        iter.fold(Q::ZERO, |a, b| a + *b)
    }
}

impl From<i128> for Q {
    fn from(n: i128) -> Q {
        Q::int(n)
    }
}

impl From<i64> for Q {
    fn from(n: i64) -> Q {
        Q::int(n as i128)
    }
}

impl From<i32> for Q {
    fn from(n: i32) -> Q {
        Q::int(n as i128)
    }
}

impl fmt::Display for Q {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.denom() == 1 {
            write!(f, "{}", self.numer())
        } else {
            write!(f, "{}/{}", self.numer(), self.denom())
        }
    }
}

impl fmt::Debug for Q {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Accepts `n`, `n/d` and finite decimals such as `-0.85`.
impl FromStr for Q {
    type Err = ParseQError;

    fn from_str(s: &str) -> Result<Q, ParseQError> {
        let s = s.trim();
        if s.is_empty() {
            return Err(ParseQError::Empty);
        }
        let bad = || ParseQError::Malformed(s.to_string());
        if let Some((n, d)) = s.split_once('/') {
            let n: i128 = n.trim().parse().map_err(|_| bad())?;
            let d: i128 = d.trim().parse().map_err(|_| bad())?;
            if d == 0 {
                return Err(ParseQError::ZeroDenominator(s.to_string()));
            }
            return Ok(Q::new(n, d));
        }
        if let Some((int, frac)) = s.split_once('.') {
            let neg = int.starts_with('-');
            let digits = int.trim_start_matches(['-', '+']);
            if frac.is_empty() || !frac.bytes().all(|c| c.is_ascii_digit()) || frac.len() > 30 {
                return Err(bad());
            }
            let whole: i128 = if digits.is_empty() { 0 } else { digits.parse().map_err(|_| bad())? };
            let scale = 10i128.pow(frac.len() as u32);
            let f: i128 = frac.parse().map_err(|_| bad())?;
            let mag = Q::int(whole) + Q::new(f, scale);
            return Ok(if neg { -mag } else { mag });
        }
        let n: i128 = s.parse().map_err(|_| bad())?;
        Ok(Q::int(n))
    }
}

#[derive(Serialize, Deserialize)]
struct QRepr {
    #[serde(deserialize_with = "any_int")]
    n: i128,
    #[serde(deserialize_with = "any_int")]
    d: i128,
}

/// Accepts any integer width, so rationals also load from buffered content
/// (internally tagged enums), which carries at most 64-bit integers.
fn any_int<'de, D: Deserializer<'de>>(d: D) -> Result<i128, D::Error> {
    struct V;
    impl serde::de::Visitor<'_> for V {
        type Value = i128;
        fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            f.write_str("an integer")
        }
        fn visit_i64<E: serde::de::Error>(self, v: i64) -> Result<i128, E> {
            Ok(v as i128)
        }
        fn visit_u64<E: serde::de::Error>(self, v: u64) -> Result<i128, E> {
            Ok(v as i128)
        }
        fn visit_i128<E: serde::de::Error>(self, v: i128) -> Result<i128, E> {
            Ok(v)
        }
        fn visit_u128<E: serde::de::Error>(self, v: u128) -> Result<i128, E> {
            i128::try_from(v).map_err(|_| E::custom("integer out of range"))
        }
    }
    d.deserialize_any(V)
}

impl Serialize for Q {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        QRepr { n: self.numer(), d: self.denom() }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Q {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Q, D::Error> {
        let r = QRepr::deserialize(d)?;
        if r.d <= 0 {
            return Err(serde::de::Error::custom("rational denominator must be positive"));
        }
        let q = Q::new(r.n, r.d);
        if q.numer() != r.n || q.denom() != r.d {
            return Err(serde::de::Error::custom("rational is not in lowest terms"));
        }
        Ok(q)
    }
}

/// A rational or `+∞`. Ordered with `Inf` above every finite value.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Ext {
    Fin(Q),
    Inf,
}

impl Ext {
    pub fn fin(self) -> Option<Q> {
        match self {
            Ext::Fin(q) => Some(q),
            Ext::Inf => None,
        }
    }

    pub fn is_inf(self) -> bool {
        matches!(self, Ext::Inf)
    }

    /// Panics on `Inf`.
    pub fn unwrap(self) -> Q {
        self.fin().expect("expected a finite value, found +inf")
    }

    pub fn cmp_q(self, q: Q) -> Ordering {
        match self {
            Ext::Fin(x) => x.cmp(&q),
            Ext::Inf => Ordering::Greater,
        }
    }
}

impl From<Q> for Ext {
    fn from(q: Q) -> Ext {
        Ext::Fin(q)
    }
}

impl Add<Q> for Ext {
    type Output = Ext;
    fn add(self, rhs: Q) -> Ext {
        match self {
            Ext::Fin(x) => Ext::Fin(x + rhs),
            Ext::Inf => Ext::Inf,
        }
    }
}

impl Add for Ext {
    type Output = Ext;
    fn add(self, rhs: Ext) -> Ext {
        match (self, rhs) {
            (Ext::Fin(x), Ext::Fin(y)) => Ext::Fin(x + y),
            _ => Ext::Inf,
        }
    }
}

impl Sub<Q> for Ext {
    type Output = Ext;
    fn sub(self, rhs: Q) -> Ext {
        match self {
            Ext::Fin(x) => Ext::Fin(x - rhs),
            Ext::Inf => Ext::Inf,
        }
    }
}

impl fmt::Display for Ext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Ext::Fin(q) => write!(f, "{q}"),
            Ext::Inf => write!(f, "inf"),
        }
    }
}

impl Serialize for Ext {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Ext::Fin(q) => q.serialize(s),
            Ext::Inf => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Ext {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Ext, D::Error> {
        struct V;
        impl<'de> serde::de::Visitor<'de> for V {
            type Value = Ext;
            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a rational {\"n\", \"d\"} or \"inf\"")
            }
            fn visit_str<E: serde::de::Error>(self, w: &str) -> Result<Ext, E> {
                if w == "inf" {
                    Ok(Ext::Inf)
                } else {
                    Err(E::custom(format!("expected rational or \"inf\", got {w:?}")))
                }
            }
            fn visit_map<A: serde::de::MapAccess<'de>>(self, map: A) -> Result<Ext, A::Error> {
                Q::deserialize(serde::de::value::MapAccessDeserializer::new(map)).map(Ext::Fin)
            }
        }
        d.deserialize_any(V)
    }
}

/// Shorthand for `Q::new(n, d)`.
pub fn q(n: i128, d: i128) -> Q {
    Q::new(n, d)
}
