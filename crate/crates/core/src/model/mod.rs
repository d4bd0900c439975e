//! Closed-form quantities of the capability model: variety, average product
//! length, the variety increment, the hump condition and the development
//! stage. Every quantity is available in both backends; [`Model`] dispatches
//! on [`Backend`] and returns [`Scalar`]s.

pub mod exact;
pub mod logspace;

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::params::{Backend, ModelParams, Range, Rho};
use crate::scalar::{ln_rational, Scalar, SignedScalar};

/// Development stage of an economy with `n` capabilities.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StageLabel {
    /// `r >= n`: no product length is excluded.
    Developing,
    /// `r < n`, variety still growing.
    Transitioning,
    /// `r < n`, the next capability loses more products than it adds.
    Developed,
}

impl StageLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            StageLabel::Developing => "developing",
            StageLabel::Transitioning => "transitioning",
            StageLabel::Developed => "developed",
        }
    }

    fn from_parts(covered: bool, hump: bool) -> Self {
        match (covered, hump) {
            (true, _) => StageLabel::Developing,
            (false, false) => StageLabel::Transitioning,
            (false, true) => StageLabel::Developed,
        }
    }
}

impl fmt::Display for StageLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for StageLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "developing" => Ok(StageLabel::Developing),
            "transitioning" => Ok(StageLabel::Transitioning),
            "developed" => Ok(StageLabel::Developed),
            _ => Err(Error::invalid("stage", format!("unknown stage {s:?}"))),
        }
    }
}

/// Exact binomial coefficient; zero outside `0..=n`.
pub fn binom(n: u64, s: i64) -> BigInt {
    exact::binom(n, s)
}

/// Stage from the exact backend.
pub fn classify_stage(n: u64, range: Range, rho: &Rho) -> StageLabel {
    StageLabel::from_parts(range.covers(n), exact::hump_condition(n, range, rho))
}

/// Backend-dispatching view of the closed forms for one parameter set.
#[derive(Debug, Clone)]
pub struct Model {
    params: ModelParams,
}

impl Model {
    pub fn new(params: ModelParams) -> Self {
        Model { params }
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    fn rho(&self) -> &Rho {
        &self.params.rho
    }

    pub fn variety_unconstrained(&self, n: u64) -> Scalar {
        match self.params.backend {
            Backend::Exact => Scalar::Exact(exact::variety_unconstrained(n, self.rho())),
            Backend::LogFloat => Scalar::Log(logspace::variety_unconstrained(n, self.rho())),
        }
    }

    pub fn avg_length_unconstrained(&self, n: u64) -> Scalar {
        match self.params.backend {
            Backend::Exact => Scalar::Exact(exact::avg_length_unconstrained(n, self.rho())),
            Backend::LogFloat => Scalar::Log(logspace::avg_length_unconstrained(n, self.rho())),
        }
    }

    pub fn variety(&self, n: u64) -> Scalar {
        let (range, rho) = (self.params.range, self.rho());
        match self.params.backend {
            Backend::Exact => Scalar::Exact(exact::variety_constrained(n, range, rho)),
            Backend::LogFloat => Scalar::Log(logspace::variety_constrained(n, range, rho)),
        }
    }

    pub fn avg_length(&self, n: u64) -> Scalar {
        let (range, rho) = (self.params.range, self.rho());
        match self.params.backend {
            Backend::Exact => Scalar::Exact(exact::avg_length_constrained(n, range, rho)),
            Backend::LogFloat => Scalar::Log(logspace::avg_length_constrained(n, range, rho)),
        }
    }

    /// `d(n+1, r) - d(n, r)`.
    pub fn variety_delta(&self, n: u64) -> SignedScalar {
        let (range, rho) = (self.params.range, self.rho());
        match self.params.backend {
            Backend::Exact => SignedScalar::Exact(exact::variety_delta(n, range, rho)),
            Backend::LogFloat => SignedScalar::Log(logspace::variety_delta(n, range, rho)),
        }
    }

    pub fn hump_condition(&self, n: u64) -> bool {
        let (range, rho) = (self.params.range, self.rho());
        match self.params.backend {
            Backend::Exact => exact::hump_condition(n, range, rho),
            Backend::LogFloat => logspace::hump_condition(n, range, rho),
        }
    }

    pub fn stage(&self, n: u64) -> StageLabel {
        StageLabel::from_parts(self.params.range.covers(n), self.hump_condition(n))
    }
}

/// Relative deviation of the log backend from the exact backend at one point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossValidation {
    pub n: u64,
    pub range: Range,
    pub rho: Rho,
    pub tolerance: f64,
    pub variety_deviation: f64,
    pub avg_length_deviation: f64,
}

impl CrossValidation {
    pub fn within_tolerance(&self) -> bool {
        self.variety_deviation <= self.tolerance && self.avg_length_deviation <= self.tolerance
    }
}

/// `|approx - exact| / |exact|`, computed through logarithms so it stays
/// meaningful when the values overflow `f64`.
pub fn relative_deviation(exact: &BigRational, approx: &Scalar) -> f64 {
    let approx_ln = approx.ln();
    if exact.is_zero() {
        return if approx_ln == f64::NEG_INFINITY {
            0.0
        } else {
            approx.to_f64().abs()
        };
    }
    if approx_ln == f64::NEG_INFINITY {
        return 1.0;
    }
    (approx_ln - ln_rational(exact)).exp_m1().abs()
}

/// Evaluates constrained variety and average length in both backends and
/// reports their relative deviations against `tol`.
pub fn cross_validate(n: u64, range: Range, rho: &Rho, tol: f64) -> Result<CrossValidation, Error> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::invalid(
            "tol",
            format!("must be positive, got {tol}"),
        ));
    }
    let variety_exact = exact::variety_constrained(n, range, rho);
    let avg_exact = exact::avg_length_constrained(n, range, rho);
    let variety_log = Scalar::Log(logspace::variety_constrained(n, range, rho));
    let avg_log = Scalar::Log(logspace::avg_length_constrained(n, range, rho));
    Ok(CrossValidation {
        n,
        range,
        rho: rho.clone(),
        tolerance: tol,
        variety_deviation: relative_deviation(&variety_exact, &variety_log),
        avg_length_deviation: relative_deviation(&avg_exact, &avg_log),
    })
}
