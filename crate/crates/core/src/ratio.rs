//! Exact rational helpers shared by every exact-arithmetic path.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Exact rational number used for weights, satisfaction values and distances.
pub type Ratio = BigRational;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("cannot parse rational `{0}`")]
pub struct ParseRatioError(pub String);

pub fn int(v: i64) -> Ratio {
    Ratio::from_integer(BigInt::from(v))
}

pub fn frac(num: i64, den: i64) -> Ratio {
    Ratio::new(BigInt::from(num), BigInt::from(den))
}

pub fn one() -> Ratio {
    Ratio::one()
}

pub fn zero() -> Ratio {
    Ratio::zero()
}

pub fn half() -> Ratio {
    frac(1, 2)
}

/// Parses `"p/q"`, `"p"` or a finite decimal such as `"0.25"`.
pub fn parse(s: &str) -> Result<Ratio, ParseRatioError> {
    let t = s.trim();
    let err = || ParseRatioError(s.to_string());
    if let Some((n, d)) = t.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| err())?;
        let d: BigInt = d.trim().parse().map_err(|_| err())?;
        if d.is_zero() {
            return Err(err());
        }
        return Ok(Ratio::new(n, d));
    }
    if let Some((whole, fraction)) = t.split_once('.') {
        if fraction.is_empty() || !fraction.bytes().all(|b| b.is_ascii_digit()) {
            return Err(err());
        }
        let negative = whole.starts_with('-');
        let whole_abs = whole.trim_start_matches(['-', '+']);
        let whole_abs: BigInt = if whole_abs.is_empty() {
            BigInt::zero()
        } else {
            whole_abs.parse().map_err(|_| err())?
        };
        let digits: BigInt = fraction.parse().map_err(|_| err())?;
        let scale = num_traits::pow(BigInt::from(10), fraction.len());
        let v = Ratio::new(whole_abs * &scale + digits, scale);
        return Ok(if negative { -v } else { v });
    }
    let n: BigInt = t.parse().map_err(|_| err())?;
    Ok(Ratio::from_integer(n))
}

/// Formats as `"p/q"`, or `"p"` for integers.
pub fn format(r: &Ratio) -> String {
    r.to_string()
}

pub fn to_f64(r: &Ratio) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        if r.is_negative() {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        }
    })
}

/// Best rational approximation of a finite float (exact for dyadic values).
pub fn from_f64(x: f64) -> Option<Ratio> {
    Ratio::from_float(x)
}

pub fn pow(r: &Ratio, e: usize) -> Ratio {
    num_traits::pow(r.clone(), e)
}

pub fn in_unit_interval(r: &Ratio) -> bool {
    !r.is_negative() && *r <= Ratio::one()
}

pub mod serde_str {
    //! Serialize a [`Ratio`](super::Ratio) as a `"p/q"` string.
    use super::Ratio;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &Ratio, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&super::format(r))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Ratio, D::Error> {
        let s = String::deserialize(d)?;
        super::parse(&s).map_err(serde::de::Error::custom)
    }
}

pub mod serde_str_vec {
    use super::Ratio;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(rs: &[Ratio], s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(rs.iter().map(super::format))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Ratio>, D::Error> {
        let v = Vec::<String>::deserialize(d)?;
        v.iter()
            .map(|s| super::parse(s).map_err(serde::de::Error::custom))
            .collect()
    }
}
