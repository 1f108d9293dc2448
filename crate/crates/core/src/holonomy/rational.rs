//! Exact rationals and their text form.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

pub type Q = BigRational;

pub fn q(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn one() -> Q {
    Q::one()
}

pub fn zero() -> Q {
    Q::zero()
}

/// `p/q` in lowest terms, or `p` for integers.
pub fn to_text(x: &Q) -> String {
    if x.denom().is_one() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

pub fn from_text(s: &str) -> Result<Q, String> {
    let s = s.trim();
    let bad = || format!("invalid rational `{s}`");
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().map_err(|_| bad())?;
            let d: BigInt = d.trim().parse().map_err(|_| bad())?;
            if d.is_zero() {
                return Err(bad());
            }
            Ok(Q::new(n, d))
        }
        None => s.parse::<BigInt>().map(Q::from_integer).map_err(|_| bad()),
    }
}

/// Like [`from_text`], also accepting exact decimals such as `0.25` and
/// scientific notation such as `1e-12`.
pub fn from_decimal(s: &str) -> Result<Q, String> {
    let s = s.trim();
    if s.contains('/') {
        return from_text(s);
    }
    let bad = || format!("invalid number `{s}`");
    let (mantissa, exp) = match s.split_once(['e', 'E']) {
        Some((m, e)) => (m, e.parse::<i32>().map_err(|_| bad())?),
        None => (s, 0),
    };
    let (whole, frac) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if frac.starts_with(['+', '-']) || (whole.is_empty() && frac.is_empty()) {
        return Err(bad());
    }
    let digits: BigInt = format!("{whole}{frac}").parse().map_err(|_| bad())?;
    let shift = exp - frac.len() as i32;
    let ten = BigInt::from(10u32);
    Ok(if shift >= 0 {
        Q::from_integer(digits * ten.pow(shift as u32))
    } else {
        Q::new(digits, ten.pow(shift.unsigned_abs()))
    })
}

/// Approximate value, for diagnostics and iteration budgets only.
pub fn to_f64(x: &Q) -> f64 {
    use num_traits::ToPrimitive;
    x.to_f64().unwrap_or(if x.is_negative() { f64::NEG_INFINITY } else { f64::INFINITY })
}

/// `10^-k` as an exact rational.
pub fn ten_to_minus(k: u32) -> Q {
    Q::new(BigInt::one(), BigInt::from(10u32).pow(k))
}

/// Rational in `[-1, 1]` closest to `x` with denominator `2^bits`.
pub fn dyadic_near(x: f64, bits: u32) -> Q {
    let scale = 2f64.powi(bits as i32);
    let n = (x.clamp(-1.0, 1.0) * scale).round() as i64;
    Q::new(BigInt::from(n), BigInt::from(1i64 << bits))
}

/// Serde adapter: rationals as `"p/q"` strings.
pub mod text {
    use super::Q;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &Q, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&super::to_text(x))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Q, D::Error> {
        let s = String::deserialize(d)?;
        super::from_text(&s).map_err(serde::de::Error::custom)
    }
}

/// Serde adapter for `Vec<Q>`.
pub mod text_vec {
    use super::Q;
    use serde::ser::SerializeSeq;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(xs: &[Q], s: S) -> Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(xs.len()))?;
        for x in xs {
            seq.serialize_element(&super::to_text(x))?;
        }
        seq.end()
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Q>, D::Error> {
        let v = Vec::<String>::deserialize(d)?;
        v.iter().map(|s| super::from_text(s).map_err(serde::de::Error::custom)).collect()
    }
}
