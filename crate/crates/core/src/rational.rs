//! Exact rational numbers used for every coefficient built outside the LP kernel.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::de::{self, Visitor};
use serde::{Deserializer, Serializer};
use std::fmt;
use std::str::FromStr;

pub type Rational = BigRational;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("not a rational number: {0:?}")]
pub struct ParseRationalError(pub String);

pub fn int(v: i64) -> Rational {
    Rational::from_integer(BigInt::from(v))
}

pub fn frac(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn zero() -> Rational {
    Rational::zero()
}

pub fn one() -> Rational {
    Rational::one()
}

pub fn to_f64(q: &Rational) -> f64 {
    q.to_f64().unwrap_or_else(|| {
        // huge numerators/denominators: fall back to a scaled quotient
        let n = q.numer().to_f64().unwrap_or(f64::NAN);
        let d = q.denom().to_f64().unwrap_or(f64::NAN);
        n / d
    })
}

/// Exact value of a finite double.
pub fn from_f64(v: f64) -> Option<Rational> {
    Rational::from_float(v)
}

/// Longest accepted integer or `p/q` text. Decimals are capped at `MAX_DECIMAL`, so
/// `format` of anything `parse` accepts parses again.
const MAX_LEN: usize = 2048;
const MAX_DECIMAL: usize = 512;

/// Parses `"3"`, `"-3/4"`, `"2.5"` or `"1e-3"` exactly.
pub fn parse(s: &str) -> Result<Rational, ParseRationalError> {
    let err = || ParseRationalError(s.to_string());
    let t = s.trim();
    if t.is_empty() || t.len() > MAX_LEN {
        return Err(err());
    }
    if let Some((n, d)) = t.split_once('/') {
        let n = BigInt::from_str(n.trim()).map_err(|_| err())?;
        let d = BigInt::from_str(d.trim()).map_err(|_| err())?;
        if d.is_zero() {
            return Err(err());
        }
        return Ok(Rational::new(n, d));
    }
    // only a point or an exponent can make the formatted value longer
    if t.len() > MAX_DECIMAL && t.contains(['.', 'e', 'E']) {
        return Err(err());
    }
    let (mantissa, exp) = match t.find(['e', 'E']) {
        Some(p) => {
            let e: i32 = t[p + 1..].parse().map_err(|_| err())?;
            if e.abs() > 400 {
                return Err(err());
            }
            (&t[..p], e)
        }
        None => (t, 0),
    };
    let (neg, digits) = match mantissa.strip_prefix('-') {
        Some(r) => (true, r),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (ip, fp) = digits.split_once('.').unwrap_or((digits, ""));
    if ip.is_empty() && fp.is_empty() {
        return Err(err());
    }
    if !ip.bytes().chain(fp.bytes()).all(|b| b.is_ascii_digit()) {
        return Err(err());
    }
    let all = format!("{ip}{fp}");
    let mut n = BigInt::from_str(if all.is_empty() { "0" } else { &all }).map_err(|_| err())?;
    if neg {
        n = -n;
    }
    let scale = exp - fp.len() as i32;
    let ten = BigInt::from(10);
    Ok(if scale >= 0 {
        Rational::from_integer(n * num_traits::pow(ten, scale as usize))
    } else {
        Rational::new(n, num_traits::pow(ten, (-scale) as usize))
    })
}

/// Integers print bare, everything else as `p/q`.
pub fn format(q: &Rational) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

pub fn abs(q: &Rational) -> Rational {
    q.abs()
}

/// Serde adapter: integers as JSON numbers, other values as `"p/q"` strings.
/// Accepts numbers (decimal text is read exactly) or strings on input.
pub mod serde_q {
    use super::*;

    pub fn serialize<S: Serializer>(q: &Rational, s: S) -> Result<S::Ok, S::Error> {
        if q.is_integer() {
            if let Some(v) = q.numer().to_i64() {
                return s.serialize_i64(v);
            }
        }
        s.serialize_str(&format(q))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        d.deserialize_any(QVisitor)
    }

    struct QVisitor;

    impl<'de> Visitor<'de> for QVisitor {
        type Value = Rational;
        fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
            f.write_str("a number or a \"p/q\" string")
        }
        fn visit_i64<E: de::Error>(self, v: i64) -> Result<Rational, E> {
            Ok(int(v))
        }
        fn visit_u64<E: de::Error>(self, v: u64) -> Result<Rational, E> {
            Ok(Rational::from_integer(BigInt::from(v)))
        }
        fn visit_f64<E: de::Error>(self, v: f64) -> Result<Rational, E> {
            if !v.is_finite() {
                return Err(E::custom("non-finite number"));
            }
            // shortest round-trip text, then exact decimal
            parse(&format!("{v:?}")).map_err(E::custom)
        }
        fn visit_str<E: de::Error>(self, v: &str) -> Result<Rational, E> {
            parse(v).map_err(E::custom)
        }
    }

    pub mod map {
        use super::*;
        use serde::ser::SerializeMap;
        use std::collections::BTreeMap;

        pub fn serialize<K, S>(m: &BTreeMap<K, Rational>, s: S) -> Result<S::Ok, S::Error>
        where
            K: fmt::Display,
            S: Serializer,
        {
            struct W<'a>(&'a Rational);
            impl serde::Serialize for W<'_> {
                fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
                    super::serialize(self.0, s)
                }
            }
            let mut mp = s.serialize_map(Some(m.len()))?;
            for (k, v) in m {
                mp.serialize_entry(&k.to_string(), &W(v))?;
            }
            mp.end()
        }

        pub fn deserialize<'de, K, D>(d: D) -> Result<BTreeMap<K, Rational>, D::Error>
        where
            K: FromStr + Ord,
            D: Deserializer<'de>,
        {
            #[derive(serde::Deserialize)]
            struct W(#[serde(with = "super")] Rational);
            let raw: BTreeMap<String, W> = serde::Deserialize::deserialize(d)?;
            raw.into_iter()
                .map(|(k, W(v))| {
                    k.trim()
                        .parse::<K>()
                        .map(|k| (k, v))
                        .map_err(|_| de::Error::custom(format!("bad key {k:?}")))
                })
                .collect()
        }
    }

    pub mod vec {
        use super::*;
        use serde::ser::SerializeSeq;

        pub fn serialize<S: Serializer>(v: &[Rational], s: S) -> Result<S::Ok, S::Error> {
            struct W<'a>(&'a Rational);
            impl serde::Serialize for W<'_> {
                fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
                    super::serialize(self.0, s)
                }
            }
            let mut sq = s.serialize_seq(Some(v.len()))?;
            for q in v {
                sq.serialize_element(&W(q))?;
            }
            sq.end()
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Rational>, D::Error> {
            #[derive(serde::Deserialize)]
            struct W(#[serde(with = "super")] Rational);
            let raw: Vec<W> = serde::Deserialize::deserialize(d)?;
            Ok(raw.into_iter().map(|W(q)| q).collect())
        }
    }
}
