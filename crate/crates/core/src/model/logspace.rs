//! Log-domain floating-point evaluation of the closed forms. Sums are
//! accumulated with log-sum-exp over `ln C(n,s) + s ln rho`, so nothing
//! overflows for large `n`.

use statrs::function::factorial::ln_binomial;

use super::exact;
use crate::params::{Range, Rho};
use crate::scalar::{LogReal, SignedLog};

/// Relative gap under which a log-domain comparison is treated as a tie and
/// handed to the exact backend.
pub const TIE_TOLERANCE: f64 = 1e-12;

pub fn ln_binom(n: u64, s: i64) -> f64 {
    if s < 0 || s as u64 > n {
        return f64::NEG_INFINITY;
    }
    ln_binomial(n, s as u64)
}

pub fn variety_unconstrained(n: u64, rho: &Rho) -> LogReal {
    LogReal::from_ln(n as f64 * rho.to_f64().ln_1p())
}

pub fn avg_length_unconstrained(n: u64, rho: &Rho) -> LogReal {
    let rho = rho.to_f64();
    LogReal::from_f64(rho * n as f64 / (1.0 + rho))
}

pub(crate) fn window_sum(n: u64, lo: u64, ln_rho: f64) -> LogReal {
    LogReal::sum_ln((lo..=n).map(|s| ln_binom(n, s as i64) + s as f64 * ln_rho))
}

pub fn variety_constrained(n: u64, range: Range, rho: &Rho) -> LogReal {
    if range.covers(n) {
        return variety_unconstrained(n, rho);
    }
    window_sum(n, range.window_start(n), rho.ln())
}

pub(crate) fn avg_length_from(n: u64, prev: LogReal, cur: LogReal, rho: &Rho) -> LogReal {
    if n == 0 {
        return LogReal::ZERO;
    }
    LogReal::from_ln(rho.ln() + (n as f64).ln() + prev.ln() - cur.ln())
}

pub fn avg_length_constrained(n: u64, range: Range, rho: &Rho) -> LogReal {
    if n == 0 {
        return LogReal::ZERO;
    }
    let prev = variety_constrained(n - 1, range, rho);
    let cur = variety_constrained(n, range, rho);
    avg_length_from(n, prev, cur, rho)
}

pub fn variety_delta(n: u64, range: Range, rho: &Rho) -> SignedLog {
    variety_constrained(n + 1, range, rho) - variety_constrained(n, range, rho)
}

/// Hump test against a log-domain variety; near-ties are settled exactly.
pub(crate) fn hump_condition_given(n: u64, range: Range, rho: &Rho, variety: LogReal) -> bool {
    let r = match range {
        Range::Bounded(r) if r < n => r,
        _ => return false,
    };
    let threshold = ln_binom(n, r as i64) + (n - r - 1) as f64 * rho.ln();
    let gap = variety.ln() - threshold;
    if gap.abs() <= TIE_TOLERANCE {
        return exact::hump_condition(n, range, rho);
    }
    gap < 0.0
}

pub fn hump_condition(n: u64, range: Range, rho: &Rho) -> bool {
    if range.covers(n) {
        return false;
    }
    hump_condition_given(n, range, rho, variety_constrained(n, range, rho))
}
