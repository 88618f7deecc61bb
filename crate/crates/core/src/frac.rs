//! Exact rationals as `"num/den"` strings in JSON.

use num_rational::Rational64;
use serde::{de, Deserialize, Deserializer, Serializer};

pub fn to_string(r: &Rational64) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Parses `"a/b"`, an integer, or a finite decimal such as `"0.05"` exactly.
pub fn parse(s: &str) -> Option<Rational64> {
    let s = s.trim();
    if let Some((num, den)) = s.split_once('/') {
        let num: i64 = num.trim().parse().ok()?;
        let den: i64 = den.trim().parse().ok()?;
        if den == 0 {
            return None;
        }
        return Some(Rational64::new(num, den));
    }
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s),
    };
    let (int_part, frac_part) = body.split_once('.').unwrap_or((body, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part
        .chars()
        .chain(frac_part.chars())
        .all(|c| c.is_ascii_digit())
        || frac_part.len() > 17
    {
        return None;
    }
    let den = 10i64.checked_pow(frac_part.len() as u32)?;
    let digits = format!("{int_part}{frac_part}");
    let num: i64 = if digits.is_empty() {
        0
    } else {
        digits.parse().ok()?
    };
    let r = Rational64::new(num, den);
    Some(if neg { -r } else { r })
}

pub fn serialize<S: Serializer>(r: &Rational64, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&to_string(r))
}

pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational64, D::Error> {
    let s = String::deserialize(d)?;
    parse(&s).ok_or_else(|| de::Error::custom(format!("not a fraction: {s:?}")))
}

pub mod option {
    use super::*;

    pub fn serialize<S: Serializer>(r: &Option<Rational64>, s: S) -> Result<S::Ok, S::Error> {
        match r {
            Some(r) => super::serialize(r, s),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Rational64>, D::Error> {
        let s = Option::<String>::deserialize(d)?;
        s.map(|s| parse(&s).ok_or_else(|| de::Error::custom(format!("not a fraction: {s:?}"))))
            .transpose()
    }
}
