//! Brute-force reference values, computed term by term with plain rational
//! arithmetic and factorial-based binomials. Shares no code with the crate's
//! integer-scaled sums.
#![allow(dead_code)]

use capmodel::Rho;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

pub fn rat(p: i64, q: i64) -> BigRational {
    BigRational::new(p.into(), q.into())
}

pub fn rho_grid() -> Vec<Rho> {
    [(1, 10), (1, 4), (1, 2), (3, 4), (1, 1)]
        .into_iter()
        .map(|(p, q)| Rho::from_ratio(p, q).unwrap())
        .collect()
}

pub struct Factorials(Vec<BigInt>);

impl Factorials {
    pub fn up_to(n: u64) -> Self {
        let mut v = vec![BigInt::one()];
        for k in 1..=n {
            let next = v.last().unwrap() * k;
            v.push(next);
        }
        Factorials(v)
    }

    pub fn binom(&self, n: u64, s: i64) -> BigInt {
        if s < 0 || s as u64 > n {
            return BigInt::zero();
        }
        let s = s as usize;
        let n = n as usize;
        &self.0[n] / (&self.0[s] * &self.0[n - s])
    }
}

/// All terms `C(n,s) rho^s` for one `n`, with suffix sums so every window
/// `[lo, n]` is available in O(1).
pub struct Row {
    pub n: u64,
    /// `variety[lo] = sum_{s >= lo} C(n,s) rho^s`
    variety: Vec<BigRational>,
    /// `length[lo] = sum_{s >= lo} s C(n,s) rho^s`
    length: Vec<BigRational>,
}

impl Row {
    pub fn new(n: u64, rho: &Rho, fact: &Factorials) -> Self {
        let terms: Vec<BigRational> = (0..=n)
            .map(|s| BigRational::from_integer(fact.binom(n, s as i64)) * rho.value().pow(s as i32))
            .collect();
        let mut variety = vec![BigRational::zero(); n as usize + 2];
        let mut length = vec![BigRational::zero(); n as usize + 2];
        for s in (0..=n as usize).rev() {
            variety[s] = &variety[s + 1] + &terms[s];
            length[s] = &length[s + 1] + &terms[s] * BigRational::from_integer(s.into());
        }
        Row { n, variety, length }
    }

    fn lo(&self, r: Option<u64>) -> usize {
        r.map_or(0, |r| self.n.saturating_sub(r)) as usize
    }

    /// `d(n, r)`; `r = None` is unbounded.
    pub fn variety(&self, r: Option<u64>) -> BigRational {
        self.variety[self.lo(r)].clone()
    }

    /// Direct weighted mean `sum s C(n,s) rho^s / d(n, r)`.
    pub fn mean_length(&self, r: Option<u64>) -> BigRational {
        let lo = self.lo(r);
        &self.length[lo] / &self.variety[lo]
    }
}

/// Rows for `n = 0..=n_max`.
pub fn rows(rho: &Rho, n_max: u64) -> Vec<Row> {
    let fact = Factorials::up_to(n_max);
    (0..=n_max).map(|n| Row::new(n, rho, &fact)).collect()
}
