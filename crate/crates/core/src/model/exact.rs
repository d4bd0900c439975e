//! Exact-rational evaluation of the closed forms.
//!
//! With `rho = p/q` every sum is carried out over integers scaled by `q^n`:
//! `d(n, r) = D(n, lo) / q^n` where `D(n, lo) = sum_{s=lo}^{n} C(n,s) p^s q^(n-s)`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::params::{Range, Rho};

/// Binomial coefficient `C(n, s)`, zero outside `0..=n`.
pub fn binom(n: u64, s: i64) -> BigInt {
    if s < 0 || s as u64 > n {
        return BigInt::zero();
    }
    let k = (s as u64).min(n - s as u64);
    let mut acc = BigInt::one();
    for i in 0..k {
        acc *= n - i;
        acc /= i + 1;
    }
    acc
}

/// `sum_{s=lo}^{n} C(n,s) p^s q^(n-s)`, walking down from `s = n` with
/// `term(s-1) = term(s) * s q / ((n-s+1) p)`; each division is exact.
pub(crate) fn scaled_window_sum(n: u64, lo: u64, p: &BigInt, q: &BigInt) -> BigInt {
    if lo > n {
        return BigInt::zero();
    }
    let mut term = p.pow(n as u32);
    let mut total = term.clone();
    for s in (lo + 1..=n).rev() {
        term = term * s * q;
        term /= p * (n - s + 1);
        total += &term;
    }
    total
}

fn q_pow(rho: &Rho, n: u64) -> BigInt {
    rho.denom().pow(n as u32)
}

fn rho_pow(rho: &Rho, e: u64) -> BigRational {
    BigRational::new(rho.numer().pow(e as u32), rho.denom().pow(e as u32))
}

/// `D(n, r)`: variety scaled by `q^n`.
fn scaled_variety(n: u64, range: Range, rho: &Rho) -> BigInt {
    scaled_window_sum(n, range.window_start(n), rho.numer(), rho.denom())
}

/// `(1 + rho)^n`.
pub fn variety_unconstrained(n: u64, rho: &Rho) -> BigRational {
    let (p, q) = (rho.numer(), rho.denom());
    BigRational::new((p + q).pow(n as u32), q_pow(rho, n))
}

/// `rho n / (1 + rho)`.
pub fn avg_length_unconstrained(n: u64, rho: &Rho) -> BigRational {
    let (p, q) = (rho.numer(), rho.denom());
    BigRational::new(p * n, p + q)
}

/// `d(n, r) = sum_{s=max(0,n-r)}^{n} C(n,s) rho^s`.
pub fn variety_constrained(n: u64, range: Range, rho: &Rho) -> BigRational {
    if range.covers(n) {
        return variety_unconstrained(n, rho);
    }
    BigRational::new(scaled_variety(n, range, rho), q_pow(rho, n))
}

/// `s(n, r) = n rho d(n-1, r) / d(n, r)`, zero at `n = 0`.
pub fn avg_length_constrained(n: u64, range: Range, rho: &Rho) -> BigRational {
    if n == 0 {
        return BigRational::zero();
    }
    // n (p/q) (D(n-1)/q^(n-1)) / (D(n)/q^n) = n p D(n-1) / D(n)
    let prev = scaled_variety(n - 1, range, rho);
    let cur = scaled_variety(n, range, rho);
    BigRational::new(rho.numer() * n * prev, cur)
}

/// Average length from an already computed pair `d(n-1, r)`, `d(n, r)`.
pub(crate) fn avg_length_from(
    n: u64,
    prev: &BigRational,
    cur: &BigRational,
    rho: &Rho,
) -> BigRational {
    if n == 0 {
        return BigRational::zero();
    }
    rho.value() * BigRational::from_integer(n.into()) * prev / cur
}

/// `d(n+1, r) - d(n, r)` by direct difference of the two sums.
pub fn variety_delta(n: u64, range: Range, rho: &Rho) -> BigRational {
    // D(n+1)/q^(n+1) - D(n)/q^n = (D(n+1) - q D(n)) / q^(n+1)
    let next = scaled_variety(n + 1, range, rho);
    let cur = scaled_variety(n, range, rho);
    BigRational::new(next - rho.denom() * cur, q_pow(rho, n + 1))
}

/// Closed-form increment `rho d(n, r) - C(n, r) rho^(n-r)`; for `r > n` the
/// binomial vanishes and this is `rho (1 + rho)^n`.
pub fn variety_delta_closed_form(n: u64, range: Range, rho: &Rho) -> BigRational {
    let grown = rho.value() * variety_constrained(n, range, rho);
    match range {
        Range::Bounded(r) if r <= n => {
            grown - BigRational::from_integer(binom(n, r as i64)) * rho_pow(rho, n - r)
        }
        _ => grown,
    }
}

/// `C(n, r) rho^(n-r-1)`, the variety level below which the next
/// capability loses more products than it adds. Requires `r < n`.
pub(crate) fn hump_threshold(n: u64, r: u64, rho: &Rho) -> BigRational {
    debug_assert!(r < n);
    BigRational::from_integer(binom(n, r as i64)) * rho_pow(rho, n - r - 1)
}

/// `d(n, r) < C(n, r) rho^(n-r-1)`; always false while `r >= n`.
pub fn hump_condition(n: u64, range: Range, rho: &Rho) -> bool {
    match range {
        Range::Bounded(r) if r < n => {
            // Compare over integers: D(n) < C(n,r) p^(n-r-1) q^(r+1)
            let lhs = scaled_variety(n, range, rho);
            let rhs = binom(n, r as i64)
                * rho.numer().pow((n - r - 1) as u32)
                * rho.denom().pow((r + 1) as u32);
            lhs < rhs
        }
        _ => false,
    }
}

/// Hump test against a variety value the caller already holds.
pub(crate) fn hump_condition_given(n: u64, range: Range, rho: &Rho, variety: &BigRational) -> bool {
    match range {
        Range::Bounded(r) if r < n => *variety < hump_threshold(n, r, rho),
        _ => false,
    }
}
