//! Model parameters: the viability probability, the product range and the
//! arithmetic backend.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Viability probability of a single capability, held as an exact rational
/// in (0, 1]. A combination of `s` capabilities is viable with probability
/// `rho^s`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Rho(BigRational);

impl Rho {
    pub fn new(value: BigRational) -> Result<Self> {
        if !value.is_positive() || value > BigRational::one() {
            return Err(Error::RhoOutOfRange(value.to_string()));
        }
        Ok(Rho(value))
    }

    pub fn from_ratio(numer: i64, denom: i64) -> Result<Self> {
        if denom == 0 {
            return Err(Error::InvalidRho {
                input: format!("{numer}/{denom}"),
                reason: "zero denominator",
            });
        }
        Rho::new(BigRational::new(numer.into(), denom.into()))
    }

    pub fn one() -> Self {
        Rho(BigRational::one())
    }

    pub fn value(&self) -> &BigRational {
        &self.0
    }

    /// Reduced numerator `p` of `rho = p/q`.
    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    /// Reduced denominator `q` of `rho = p/q`.
    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn is_one(&self) -> bool {
        self.0.is_one()
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().expect("rho lies in (0, 1]")
    }

    pub fn ln(&self) -> f64 {
        if self.is_one() {
            0.0
        } else {
            crate::scalar::ln_rational(&self.0)
        }
    }
}

impl fmt::Display for Rho {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.0.numer(), self.0.denom())
    }
}

/// Accepts `p/q`, plain integers and plain decimals (`0.5`, `.25`).
/// Decimals are read as the exact rational they denote. Exponent notation is
/// rejected.
impl FromStr for Rho {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let input = s.trim();
        let bad = |reason| Error::InvalidRho {
            input: s.to_string(),
            reason,
        };
        if input.is_empty() {
            return Err(bad("empty value"));
        }
        if input.contains(['e', 'E']) {
            return Err(bad("exponent notation is not accepted"));
        }
        let value = if let Some((num, den)) = input.split_once('/') {
            let num = parse_digits(num.trim()).ok_or_else(|| bad("numerator is not an integer"))?;
            let den =
                parse_digits(den.trim()).ok_or_else(|| bad("denominator is not an integer"))?;
            if den.is_zero() {
                return Err(bad("zero denominator"));
            }
            BigRational::new(num, den)
        } else if let Some((int, frac)) = input.split_once('.') {
            if int.is_empty() && frac.is_empty() {
                return Err(bad("no digits"));
            }
            let int = if int.is_empty() {
                BigInt::zero()
            } else {
                parse_digits(int).ok_or_else(|| bad("malformed decimal"))?
            };
            let scale = BigInt::from(10u32).pow(frac.len() as u32);
            let frac = if frac.is_empty() {
                BigInt::zero()
            } else {
                parse_digits(frac).ok_or_else(|| bad("malformed decimal"))?
            };
            BigRational::new(int * &scale + frac, scale)
        } else {
            BigRational::from_integer(parse_digits(input).ok_or_else(|| bad("not a number"))?)
        };
        Rho::new(value)
    }
}

fn parse_digits(s: &str) -> Option<BigInt> {
    if s.is_empty() || !s.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    s.parse().ok()
}

impl Serialize for Rho {
    fn serialize<S: serde::Serializer>(
        &self,
        serializer: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Rho {
    fn deserialize<D: serde::Deserializer<'de>>(
        deserializer: D,
    ) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Product range `r`: an economy with `n` capabilities produces lengths in
/// `[n - r, n]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Range {
    Bounded(u64),
    Unbounded,
}

impl Range {
    /// Shortest product length kept at `n` capabilities.
    pub fn window_start(self, n: u64) -> u64 {
        match self {
            Range::Bounded(r) => n.saturating_sub(r),
            Range::Unbounded => 0,
        }
    }

    /// True when the window covers every length `0..=n`, i.e. `r >= n`.
    pub fn covers(self, n: u64) -> bool {
        match self {
            Range::Bounded(r) => r >= n,
            Range::Unbounded => true,
        }
    }

    pub fn bound(self) -> Option<u64> {
        match self {
            Range::Bounded(r) => Some(r),
            Range::Unbounded => None,
        }
    }
}

impl fmt::Display for Range {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Range::Bounded(r) => write!(f, "{r}"),
            Range::Unbounded => f.write_str("unbounded"),
        }
    }
}

impl FromStr for Range {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        if t.eq_ignore_ascii_case("unbounded") {
            return Ok(Range::Unbounded);
        }
        t.parse::<u64>()
            .map(Range::Bounded)
            .map_err(|_| Error::InvalidRange(s.to_string()))
    }
}

impl Serialize for Range {
    fn serialize<S: serde::Serializer>(
        &self,
        serializer: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Range {
    fn deserialize<D: serde::Deserializer<'de>>(
        deserializer: D,
    ) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    /// Arbitrary-precision rationals; every identity holds with zero tolerance.
    Exact,
    /// Log-domain `f64`, for large `n` and fast sweeps.
    LogFloat,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelParams {
    pub rho: Rho,
    pub range: Range,
    pub backend: Backend,
}

impl ModelParams {
    pub fn new(rho: Rho, range: Range, backend: Backend) -> Self {
        ModelParams {
            rho,
            range,
            backend,
        }
    }

    pub fn exact(rho: Rho, range: Range) -> Self {
        Self::new(rho, range, Backend::Exact)
    }

    /// Default trajectory length: long enough for the hump to show when it exists.
    pub fn default_horizon(&self) -> u64 {
        match self.range {
            Range::Bounded(r) => (3 * r).max(50),
            Range::Unbounded => 50,
        }
    }
}
