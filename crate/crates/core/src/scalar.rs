//! The two number representations used by the model: exact rationals and
//! log-domain nonnegative reals, plus the fixed 12-significant-digit decimal
//! rendering used in every output file.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

/// A nonnegative real stored by its natural logarithm. Zero is the explicit
/// marker `ln = -inf`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogReal {
    ln: f64,
}

impl LogReal {
    pub const ZERO: LogReal = LogReal {
        ln: f64::NEG_INFINITY,
    };
    pub const ONE: LogReal = LogReal { ln: 0.0 };

    pub fn from_ln(ln: f64) -> Self {
        debug_assert!(!ln.is_nan());
        LogReal { ln }
    }

    /// Panics on negative or NaN input.
    pub fn from_f64(x: f64) -> Self {
        assert!(x >= 0.0, "LogReal holds nonnegative reals only, got {x}");
        LogReal { ln: x.ln() }
    }

    pub fn ln(self) -> f64 {
        self.ln
    }

    pub fn is_zero(self) -> bool {
        self.ln == f64::NEG_INFINITY
    }

    /// May overflow to `inf` for very large values.
    pub fn to_f64(self) -> f64 {
        self.ln.exp()
    }

    /// Stable log-sum-exp over the logarithms of the summands.
    pub fn sum_ln<I: IntoIterator<Item = f64>>(lns: I) -> LogReal {
        let lns: Vec<f64> = lns
            .into_iter()
            .filter(|l| *l != f64::NEG_INFINITY)
            .collect();
        let max = lns.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if max == f64::NEG_INFINITY {
            return LogReal::ZERO;
        }
        let acc: f64 = lns.iter().map(|l| (l - max).exp()).sum();
        LogReal { ln: max + acc.ln() }
    }
}

impl std::ops::Mul for LogReal {
    type Output = LogReal;

    fn mul(self, other: LogReal) -> LogReal {
        if self.is_zero() || other.is_zero() {
            return LogReal::ZERO;
        }
        LogReal {
            ln: self.ln + other.ln,
        }
    }
}

impl std::ops::Div for LogReal {
    type Output = LogReal;

    /// Panics when dividing by zero.
    fn div(self, other: LogReal) -> LogReal {
        assert!(!other.is_zero(), "division by a log-domain zero");
        if self.is_zero() {
            return LogReal::ZERO;
        }
        LogReal {
            ln: self.ln - other.ln,
        }
    }
}

impl std::ops::Add for LogReal {
    type Output = LogReal;

    fn add(self, other: LogReal) -> LogReal {
        let (hi, lo) = if self.ln >= other.ln {
            (self, other)
        } else {
            (other, self)
        };
        if lo.is_zero() {
            return hi;
        }
        LogReal {
            ln: hi.ln + (lo.ln - hi.ln).exp().ln_1p(),
        }
    }
}

impl std::ops::Sub for LogReal {
    type Output = SignedLog;

    /// Signed difference `self - other`.
    fn sub(self, other: LogReal) -> SignedLog {
        let (hi, lo, negative) = if self.ln >= other.ln {
            (self, other, false)
        } else {
            (other, self, true)
        };
        if lo.is_zero() {
            return SignedLog {
                negative,
                magnitude: hi,
            };
        }
        let gap = lo.ln - hi.ln;
        if gap == 0.0 {
            return SignedLog {
                negative: false,
                magnitude: LogReal::ZERO,
            };
        }
        SignedLog {
            negative,
            magnitude: LogReal {
                ln: hi.ln + (-gap.exp()).ln_1p(),
            },
        }
    }
}

impl PartialOrd for LogReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        self.ln.partial_cmp(&other.ln)
    }
}

/// A signed real in log-magnitude form; used for variety increments.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignedLog {
    pub negative: bool,
    pub magnitude: LogReal,
}

impl SignedLog {
    pub fn to_f64(self) -> f64 {
        let m = self.magnitude.to_f64();
        if self.negative {
            -m
        } else {
            m
        }
    }

    pub fn is_negative(self) -> bool {
        self.negative && !self.magnitude.is_zero()
    }
}

/// A nonnegative model quantity in either backend.
#[derive(Debug, Clone, PartialEq)]
pub enum Scalar {
    Exact(BigRational),
    Log(LogReal),
}

impl Scalar {
    pub fn as_exact(&self) -> Option<&BigRational> {
        match self {
            Scalar::Exact(q) => Some(q),
            Scalar::Log(_) => None,
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Scalar::Exact(q) => rational_to_f64(q),
            Scalar::Log(l) => l.to_f64(),
        }
    }

    /// Natural logarithm; `-inf` for zero.
    pub fn ln(&self) -> f64 {
        match self {
            Scalar::Exact(q) if q.is_zero() => f64::NEG_INFINITY,
            Scalar::Exact(q) => ln_rational(q),
            Scalar::Log(l) => l.ln(),
        }
    }

    /// 12-significant-digit decimal rendering.
    pub fn decimal(&self) -> String {
        match self {
            Scalar::Exact(q) => format_rational_sig12(q),
            Scalar::Log(l) => format_ln_sig12(false, l.ln()),
        }
    }

    /// Canonical `p/q` string; `None` for log-domain values.
    pub fn exact_string(&self) -> Option<String> {
        self.as_exact().map(format_exact)
    }
}

/// Signed counterpart of [`Scalar`].
#[derive(Debug, Clone, PartialEq)]
pub enum SignedScalar {
    Exact(BigRational),
    Log(SignedLog),
}

impl SignedScalar {
    pub fn as_exact(&self) -> Option<&BigRational> {
        match self {
            SignedScalar::Exact(q) => Some(q),
            SignedScalar::Log(_) => None,
        }
    }

    pub fn is_negative(&self) -> bool {
        match self {
            SignedScalar::Exact(q) => q.is_negative(),
            SignedScalar::Log(l) => l.is_negative(),
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            SignedScalar::Exact(q) => rational_to_f64(q),
            SignedScalar::Log(l) => l.to_f64(),
        }
    }

    pub fn decimal(&self) -> String {
        match self {
            SignedScalar::Exact(q) => format_rational_sig12(q),
            SignedScalar::Log(l) => format_ln_sig12(l.is_negative(), l.magnitude.ln()),
        }
    }
}

/// Canonical exact form: `p/q` in lowest terms, denominator always written.
pub fn format_exact(q: &BigRational) -> String {
    format!("{}/{}", q.numer(), q.denom())
}

/// Inverse of [`format_exact`]. Accepts an optional sign on the numerator.
pub fn parse_exact(s: &str) -> Option<BigRational> {
    let (p, q) = s.trim().split_once('/')?;
    let digits = |t: &str| !t.is_empty() && t.bytes().all(|b| b.is_ascii_digit());
    let unsigned = p.strip_prefix('-').unwrap_or(p);
    if !digits(unsigned) || !digits(q) {
        return None;
    }
    let q: BigInt = q.parse().ok()?;
    if q.is_zero() {
        return None;
    }
    Some(BigRational::new(p.parse().ok()?, q))
}

/// Natural log of a positive big integer, accurate for any size.
pub fn ln_bigint(x: &BigInt) -> f64 {
    assert!(x.is_positive(), "ln of a nonpositive integer");
    let bits = x.bits();
    if bits <= 1000 {
        return x.to_f64().expect("fits in f64").ln();
    }
    let shift = bits - 64;
    let top = (x >> shift).to_f64().expect("64-bit prefix");
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

/// Natural log of a positive rational.
pub fn ln_rational(q: &BigRational) -> f64 {
    assert!(q.is_positive(), "ln of a nonpositive rational");
    if let Some(x) = q.to_f64().filter(|x| x.is_normal()) {
        return x.ln();
    }
    ln_bigint(q.numer()) - ln_bigint(q.denom())
}

/// Nearest `f64`; `±inf` when out of range.
pub fn rational_to_f64(q: &BigRational) -> f64 {
    q.to_f64().unwrap_or_else(|| {
        if q.is_negative() {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        }
    })
}

const SIG_DIGITS: i32 = 12;

/// Renders `x` with exactly 12 significant digits. Fixed notation for
/// decimal exponents in `[-5, 12)`, otherwise `d.ddddddddddde<exp>`.
pub fn format_sig12(x: f64) -> String {
    assert!(x.is_finite(), "cannot render non-finite value {x}");
    if x == 0.0 {
        return format!("{:.*}", (SIG_DIGITS - 1) as usize, 0.0);
    }
    let sci = format!("{:.*e}", (SIG_DIGITS - 1) as usize, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..SIG_DIGITS).contains(&exp) {
        format!("{:.*}", (SIG_DIGITS - 1 - exp) as usize, x)
    } else {
        format!("{mantissa}e{exp}")
    }
}

/// Same rendering as [`format_sig12`] for a value given by sign and natural
/// log of its magnitude; does not overflow.
pub fn format_ln_sig12(negative: bool, ln: f64) -> String {
    if ln == f64::NEG_INFINITY {
        return format_sig12(0.0);
    }
    let x = ln.exp();
    if x.is_finite() && x.is_normal() {
        return format_sig12(if negative { -x } else { x });
    }
    let log10 = ln / std::f64::consts::LN_10;
    let mut exp = log10.floor();
    let mut mantissa = format!("{:.*}", (SIG_DIGITS - 1) as usize, 10f64.powf(log10 - exp));
    if mantissa.starts_with("10") {
        exp += 1.0;
        mantissa = format!("{:.*}", (SIG_DIGITS - 1) as usize, 1.0);
    }
    let sign = if negative { "-" } else { "" };
    format!("{sign}{mantissa}e{}", exp as i64)
}

pub fn format_rational_sig12(q: &BigRational) -> String {
    let x = rational_to_f64(q);
    if x.is_finite() && (x != 0.0 || q.is_zero()) {
        format_sig12(x)
    } else {
        format_ln_sig12(q.is_negative(), ln_rational(&q.abs()))
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Exact(q) => f.write_str(&format_exact(q)),
            Scalar::Log(l) => f.write_str(&format_ln_sig12(false, l.ln())),
        }
    }
}

/// Wire form: exact values as `{"exact": "p/q"}`, log values as `{"ln": x}`.
#[derive(Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum ScalarRepr {
    Exact(String),
    Ln(f64),
}

impl Serialize for Scalar {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            Scalar::Exact(q) => ScalarRepr::Exact(format_exact(q)),
            Scalar::Log(l) => ScalarRepr::Ln(l.ln()),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Scalar {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        match ScalarRepr::deserialize(deserializer)? {
            ScalarRepr::Exact(s) => parse_exact(&s)
                .map(Scalar::Exact)
                .ok_or_else(|| serde::de::Error::custom(format!("malformed rational {s:?}"))),
            ScalarRepr::Ln(x) => Ok(Scalar::Log(LogReal::from_ln(x))),
        }
    }
}
