//! Exact rational scalars and their `"p/q"` text form.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

/// Every measure, gauge value, weight and bound is one of these.
pub type ExactScalar = BigRational;

pub fn int(v: i64) -> ExactScalar {
    BigRational::from_integer(BigInt::from(v))
}

pub fn ratio(p: i64, q: i64) -> ExactScalar {
    BigRational::new(BigInt::from(p), BigInt::from(q))
}

pub fn from_biguint(v: &BigUint) -> ExactScalar {
    BigRational::from_integer(BigInt::from(v.clone()))
}

/// `2^e` for any integer exponent.
pub fn pow2(e: i64) -> ExactScalar {
    let mag = BigInt::one() << e.unsigned_abs() as usize;
    if e >= 0 {
        BigRational::from_integer(mag)
    } else {
        BigRational::new(BigInt::one(), mag)
    }
}

/// Exponent `e` when `x == 2^e`.
pub fn log2_exact(x: &ExactScalar) -> Option<i64> {
    if !x.is_positive() {
        return None;
    }
    let is_pow2 = |v: &BigInt| {
        let v = v.magnitude();
        v.count_ones() == 1
    };
    let (n, d) = (x.numer(), x.denom());
    if d.is_one() && is_pow2(n) {
        Some(n.bits() as i64 - 1)
    } else if n.is_one() && is_pow2(d) {
        Some(-(d.bits() as i64 - 1))
    } else {
        None
    }
}

pub fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc *= BigUint::from(n - i);
        acc /= BigUint::from(i + 1);
    }
    acc
}

/// Canonical `"p/q"` form; the denominator is always written.
pub fn to_pq(x: &ExactScalar) -> String {
    format!("{}/{}", x.numer(), x.denom())
}

pub fn parse_pq(s: &str) -> Result<ExactScalar> {
    let s = s.trim();
    let bad = || Error::InvalidInput(format!("not a rational \"p/q\": {s:?}"));
    let (p, q) = match s.split_once('/') {
        Some((p, q)) => (p.trim(), q.trim()),
        None => (s, "1"),
    };
    let p: BigInt = p.parse().map_err(|_| bad())?;
    let q: BigInt = q.parse().map_err(|_| bad())?;
    if q.is_zero() {
        return Err(bad());
    }
    Ok(BigRational::new(p, q))
}

/// Parses `"2^-j"`, `"1/4"`, `"inf"` style δ arguments; `None` means ∞.
pub fn parse_delta(s: &str) -> Result<Option<ExactScalar>> {
    let t = s.trim();
    if t.eq_ignore_ascii_case("inf") || t == "∞" {
        return Ok(None);
    }
    if let Some(e) = t.strip_prefix("2^") {
        let e: i64 = e.parse().map_err(|_| Error::InvalidInput(format!("bad exponent in {t:?}")))?;
        return Ok(Some(pow2(e)));
    }
    parse_pq(t).map(Some)
}

/// Exact integer ceiling of a nonnegative rational.
pub fn ceil(x: &ExactScalar) -> BigInt {
    let (q, r) = x.numer().div_rem(x.denom());
    if r.is_zero() || x.is_negative() {
        q
    } else {
        q + 1
    }
}

pub fn to_f64(x: &ExactScalar) -> f64 {
    use num_traits::ToPrimitive;
    x.to_f64().unwrap_or(f64::NAN)
}

/// Serde adapters writing rationals as `"p/q"` strings.
pub mod pq {
    use super::*;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &ExactScalar, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&to_pq(x))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<ExactScalar, D::Error> {
        let s = String::deserialize(d)?;
        parse_pq(&s).map_err(serde::de::Error::custom)
    }
}

pub mod pq_vec {
    use super::*;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(xs: &[ExactScalar], s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_seq(xs.iter().map(to_pq))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<ExactScalar>, D::Error> {
        let v = Vec::<String>::deserialize(d)?;
        v.iter().map(|s| parse_pq(s).map_err(serde::de::Error::custom)).collect()
    }
}

pub mod pq_opt {
    use super::*;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &Option<ExactScalar>, s: S) -> std::result::Result<S::Ok, S::Error> {
        match x {
            Some(x) => s.serialize_some(&to_pq(x)),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Option<ExactScalar>, D::Error> {
        let v = Option::<String>::deserialize(d)?;
        v.map(|s| parse_pq(&s).map_err(serde::de::Error::custom)).transpose()
    }
}
