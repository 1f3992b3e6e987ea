//! Exact rational numbers used for every load, time and fraction.
//!
//! Values are `num_rational::Ratio<i128>`, which keeps itself in lowest terms
//! with a positive denominator. Files carry them as `"a/b"` strings (or bare
//! integers), never as floats.

use std::str::FromStr;

use num_rational::Ratio;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

pub type Rational = Ratio<i128>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseRationalError {
    #[error("empty rational string")]
    Empty,
    #[error("`{0}` is not an integer or an `a/b` fraction")]
    Malformed(String),
    #[error("`{0}` has a zero denominator")]
    ZeroDenominator(String),
}

/// Parses `"a/b"`, `"a"`, with optional surrounding whitespace.
pub fn parse_rational(s: &str) -> Result<Rational, ParseRationalError> {
    let s = s.trim();
    if s.is_empty() {
        return Err(ParseRationalError::Empty);
    }
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let num = i128::from_str(num).map_err(|_| ParseRationalError::Malformed(s.to_string()))?;
    let den = i128::from_str(den).map_err(|_| ParseRationalError::Malformed(s.to_string()))?;
    if den == 0 {
        return Err(ParseRationalError::ZeroDenominator(s.to_string()));
    }
    Ok(Rational::new(num, den))
}

/// Canonical text form: `"a/b"` in lowest terms, or `"a"` for integers.
pub fn format_rational(r: &Rational) -> String {
    r.to_string()
}

pub fn int(n: i128) -> Rational {
    Rational::from_integer(n)
}

pub fn frac(n: i128, d: i128) -> Rational {
    Rational::new(n, d)
}

pub fn sum<'a>(values: impl IntoIterator<Item = &'a Rational>) -> Rational {
    values.into_iter().fold(Rational::zero(), |acc, v| acc + v)
}

/// True when `r` is stored in lowest terms with a positive denominator.
pub fn is_canonical(r: &Rational) -> bool {
    use num_integer::Integer;
    *r.denom() > 0 && r.numer().abs().gcd(r.denom()).is_one()
}

/// Serde adapter for a single rational stored as a string.
pub mod serde_str {
    use super::{format_rational, parse_rational, Rational};
    use serde::{de, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(r))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Int(i64),
            Text(String),
        }
        match Repr::deserialize(d)? {
            Repr::Int(n) => Ok(Rational::from_integer(n as i128)),
            Repr::Text(t) => parse_rational(&t).map_err(de::Error::custom),
        }
    }
}

/// Serde adapter for a vector of rationals stored as strings.
pub mod serde_str_vec {
    use super::{format_rational, parse_rational, Rational};
    use serde::{de, ser::SerializeSeq, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &[Rational], s: S) -> Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(v.len()))?;
        for r in v {
            seq.serialize_element(&format_rational(r))?;
        }
        seq.end()
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Rational>, D::Error> {
        let raw = Vec::<String>::deserialize(d)?;
        raw.iter()
            .map(|t| parse_rational(t).map_err(de::Error::custom))
            .collect()
    }
}

/// Serde adapter for an optional rational stored as a string.
pub mod serde_str_opt {
    use super::{format_rational, parse_rational, Rational};
    use serde::{de, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &Option<Rational>, s: S) -> Result<S::Ok, S::Error> {
        match r {
            Some(r) => s.serialize_some(&format_rational(r)),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Rational>, D::Error> {
        Option::<String>::deserialize(d)?
            .map(|t| parse_rational(&t).map_err(de::Error::custom))
            .transpose()
    }
}
