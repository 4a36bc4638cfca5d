//! JSON encoding for reals that may be non-finite.
//!
//! Certificates legitimately evaluate to `+inf` (vacuous bounds) and
//! occasionally to `nan`. JSON has no literal for either, so finite values are
//! written as numbers and non-finite values as the strings `"inf"`, `"-inf"`
//! and `"nan"`. Use with `#[serde(with = "crate::real")]` on `f64` fields and
//! `#[serde(with = "crate::real::vec")]` on `Vec<f64>` fields.

use serde::de::{self, Deserializer, Visitor};
use serde::ser::Serializer;
use serde::{Deserialize, Serialize};
use std::fmt;

/// Newtype carrying the non-finite-aware encoding, handy inside collections.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Real(pub f64);

impl Serialize for Real {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        serialize(&self.0, s)
    }
}

impl<'de> Deserialize<'de> for Real {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        deserialize(d).map(Real)
    }
}

pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
    if v.is_nan() {
        s.serialize_str("nan")
    } else if *v == f64::INFINITY {
        s.serialize_str("inf")
    } else if *v == f64::NEG_INFINITY {
        s.serialize_str("-inf")
    } else {
        s.serialize_f64(*v)
    }
}

struct RealVisitor;

impl<'de> Visitor<'de> for RealVisitor {
    type Value = f64;

    fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
        f.write_str("a number or one of \"inf\", \"-inf\", \"nan\"")
    }

    fn visit_f64<E: de::Error>(self, v: f64) -> Result<f64, E> {
        Ok(v)
    }

    fn visit_i64<E: de::Error>(self, v: i64) -> Result<f64, E> {
        Ok(v as f64)
    }

    fn visit_u64<E: de::Error>(self, v: u64) -> Result<f64, E> {
        Ok(v as f64)
    }

    fn visit_str<E: de::Error>(self, v: &str) -> Result<f64, E> {
        match v {
            "inf" => Ok(f64::INFINITY),
            "-inf" => Ok(f64::NEG_INFINITY),
            "nan" => Ok(f64::NAN),
            other => Err(E::custom(format!("invalid real literal {other:?}"))),
        }
    }
}

pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
    d.deserialize_any(RealVisitor)
}

pub mod vec {
    use super::Real;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &[f64], s: S) -> Result<S::Ok, S::Error> {
        let wrapped: Vec<Real> = v.iter().copied().map(Real).collect();
        wrapped.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<f64>, D::Error> {
        let wrapped = Vec::<Real>::deserialize(d)?;
        Ok(wrapped.into_iter().map(|r| r.0).collect())
    }
}

pub mod option {
    use super::Real;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
        v.map(Real).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<f64>, D::Error> {
        Ok(Option::<Real>::deserialize(d)?.map(|r| r.0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[derive(Debug, Serialize, Deserialize)]
    struct Holder {
        #[serde(with = "crate::real")]
        x: f64,
        #[serde(with = "crate::real::vec")]
        xs: Vec<f64>,
    }

    #[test]
    fn non_finite_values_are_strings() {
        let h = Holder {
            x: f64::INFINITY,
            xs: vec![1.5, f64::NAN, f64::NEG_INFINITY],
        };
        let s = serde_json::to_string(&h).unwrap();
        assert_eq!(s, r#"{"x":"inf","xs":[1.5,"nan","-inf"]}"#);
        let back: Holder = serde_json::from_str(&s).unwrap();
        assert_eq!(back.x, f64::INFINITY);
        assert!(back.xs[1].is_nan());
        assert_eq!(back.xs[2], f64::NEG_INFINITY);
    }

    #[test]
    fn rejects_unknown_literal() {
        assert!(serde_json::from_str::<Real>(r#""infinity""#).is_err());
        assert_eq!(serde_json::from_str::<Real>("3").unwrap(), Real(3.0));
    }
}
