//! Extended exponents in `[1, ∞]`, with `∞` kept symbolic so that `1/∞ = 0` is exact.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Exponent {
    Finite(f64),
    Infinite,
}

impl Exponent {
    pub const INF: Exponent = Exponent::Infinite;

    pub fn finite(p: f64) -> Result<Exponent> {
        if !p.is_finite() || p <= 0.0 {
            return Err(Error::Exponent(format!("{p}")));
        }
        Ok(Exponent::Finite(p))
    }

    /// Builds the exponent whose reciprocal is `t`; `t == 0` gives `∞`.
    pub fn from_inv(t: f64) -> Result<Exponent> {
        if !t.is_finite() || t < 0.0 {
            return Err(Error::Exponent(format!("reciprocal {t}")));
        }
        if t == 0.0 {
            Ok(Exponent::Infinite)
        } else {
            Ok(Exponent::Finite(1.0 / t))
        }
    }

    pub fn inv(self) -> f64 {
        match self {
            Exponent::Finite(p) => 1.0 / p,
            Exponent::Infinite => 0.0,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, Exponent::Infinite)
    }

    /// Value as a float, `f64::INFINITY` for `∞`.
    pub fn value(self) -> f64 {
        match self {
            Exponent::Finite(p) => p,
            Exponent::Infinite => f64::INFINITY,
        }
    }

    /// Hölder conjugate `p'` with `1/p + 1/p' = 1`. Requires `p ≥ 1`.
    pub fn conjugate(self) -> Result<Exponent> {
        let t = self.inv();
        if t > 1.0 + 1e-15 {
            return Err(Error::Exponent(format!("conjugate of {self} below 1")));
        }
        Exponent::from_inv((1.0 - t).max(0.0))
    }

    pub fn require_norm_range(self) -> Result<()> {
        if self.inv() > 1.0 + 1e-15 {
            return Err(Error::Exponent(format!("{self} < 1 is outside the norm range")));
        }
        Ok(())
    }
}

impl From<f64> for Exponent {
    fn from(p: f64) -> Self {
        if p.is_infinite() {
            Exponent::Infinite
        } else {
            Exponent::Finite(p)
        }
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Exponent::Finite(p) => write!(f, "{p}"),
            Exponent::Infinite => write!(f, "inf"),
        }
    }
}

impl FromStr for Exponent {
    type Err = Error;

    fn from_str(s: &str) -> Result<Exponent> {
        let t = s.trim();
        match t.to_ascii_lowercase().as_str() {
            "inf" | "infinity" | "∞" => Ok(Exponent::Infinite),
            _ => {
                let p: f64 = t.parse().map_err(|_| Error::Parse(format!("exponent {s:?}")))?;
                Exponent::finite(p)
            }
        }
    }
}

impl Serialize for Exponent {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Exponent {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Str(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(p) => Exponent::finite(p).map_err(serde::de::Error::custom),
            Raw::Str(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}
