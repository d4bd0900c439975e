//! Ground truth for the closed forms: exhaustive enumeration of capability
//! subsets, and Monte Carlo draws of the stochastic recipe book.
//!
//! Every draw is a pure function of `(n, rho, seed, mode)`. Multi-trial runs
//! derive the seed of trial `i` with [`derive_seed`], so results do not depend
//! on scheduling or thread count.

use num_rational::BigRational;
use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::exact;
use crate::params::{Range, Rho};

/// Largest `n` for which all `2^n` subsets are visited.
pub const MAX_ENUMERATION_N: u64 = 20;
/// Largest `n` for per-length binomial draws (`C(64, 32)` still fits in `u64`).
pub const MAX_BINOMIAL_N: u64 = 64;
pub const MIN_TRIALS: u64 = 30;

/// Variety and average length obtained by explicit counting with every
/// combination viable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Enumeration {
    pub variety: u64,
    pub avg_length: BigRational,
}

/// Visits every subset of `n` capabilities and keeps those whose length lies
/// in `[n - r, n]`.
pub fn enumerate_products(n: u64, range: Range) -> Result<Enumeration> {
    if n > MAX_ENUMERATION_N {
        return Err(Error::ResourceBound {
            what: "subset enumeration",
            limit: MAX_ENUMERATION_N,
            n,
        });
    }
    let lo = range.window_start(n);
    let (mut variety, mut total_length) = (0u64, 0u64);
    for subset in 0u64..(1u64 << n) {
        let len = u64::from(subset.count_ones());
        if len >= lo {
            variety += 1;
            total_length += len;
        }
    }
    Ok(Enumeration {
        variety,
        avg_length: BigRational::new(total_length.into(), variety.into()),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SampleMode {
    /// One Bernoulli(`rho^s`) draw per subset. With `persistent`, the draw for
    /// a subset depends only on `(seed, subset)`, so a subset of the first `n`
    /// capabilities keeps its viability when `n` grows.
    PerSubset { persistent: bool },
    /// `counts_by_length[s] ~ Binomial(C(n,s), rho^s)`.
    PerLengthBinomial,
}

impl SampleMode {
    pub fn max_n(self) -> u64 {
        match self {
            SampleMode::PerSubset { .. } => MAX_ENUMERATION_N,
            SampleMode::PerLengthBinomial => MAX_BINOMIAL_N,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            SampleMode::PerSubset { persistent: false } => "per-subset",
            SampleMode::PerSubset { persistent: true } => "per-subset-persistent",
            SampleMode::PerLengthBinomial => "per-length",
        }
    }
}

/// One draw of which capability combinations are viable, summarised by the
/// number of viable products of each length.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RecipeBookSample {
    pub n: u64,
    pub rho: Rho,
    pub seed: u64,
    pub mode: SampleMode,
    pub counts_by_length: Vec<u64>,
}

/// SplitMix64 finaliser.
pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Seed of trial `i` in a run seeded with `base`:
/// `splitmix64(base ^ splitmix64(i))`.
pub fn derive_seed(base: u64, trial: u64) -> u64 {
    splitmix64(base ^ splitmix64(trial))
}

fn unit_from_bits(bits: u64) -> f64 {
    (bits >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// `C(n, s)` for `n <= 64`.
pub fn binom_u64(n: u64, s: u64) -> u64 {
    if s > n {
        return 0;
    }
    let k = s.min(n - s);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * u128::from(n - i) / u128::from(i + 1);
    }
    u64::try_from(acc).expect("binomial exceeds u64")
}

/// `rho^s` as `f64` for every `s` in `0..=n`.
fn viability(rho: &Rho, n: u64) -> Vec<f64> {
    let rho = rho.to_f64();
    (0..=n).map(|s| rho.powi(s as i32)).collect()
}

pub fn sample_recipe_book(
    n: u64,
    rho: &Rho,
    seed: u64,
    mode: SampleMode,
) -> Result<RecipeBookSample> {
    if n > mode.max_n() {
        return Err(Error::ResourceBound {
            what: mode.name(),
            limit: mode.max_n(),
            n,
        });
    }
    let p = viability(rho, n);
    let mut counts = vec![0u64; n as usize + 1];
    match mode {
        SampleMode::PerSubset { persistent: false } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for subset in 0u64..(1u64 << n) {
                let len = subset.count_ones() as usize;
                if rng.random_bool(p[len]) {
                    counts[len] += 1;
                }
            }
        }
        SampleMode::PerSubset { persistent: true } => {
            for subset in 0u64..(1u64 << n) {
                let len = subset.count_ones() as usize;
                if unit_from_bits(splitmix64(seed ^ splitmix64(subset))) < p[len] {
                    counts[len] += 1;
                }
            }
        }
        SampleMode::PerLengthBinomial => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for s in 0..=n {
                let trials = binom_u64(n, s);
                counts[s as usize] = if rho.is_one() {
                    trials
                } else {
                    Binomial::new(trials, p[s as usize])
                        .expect("probability lies in [0, 1]")
                        .sample(&mut rng)
                };
            }
        }
    }
    Ok(RecipeBookSample {
        n,
        rho: rho.clone(),
        seed,
        mode,
        counts_by_length: counts,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmpiricalStats {
    pub variety: u64,
    pub total_length: u64,
    /// Zero for an empty portfolio.
    pub avg_length: f64,
}

/// Variety and average length of a sampled book restricted to the range window.
pub fn empirical_stats(sample: &RecipeBookSample, range: Range) -> EmpiricalStats {
    let lo = range.window_start(sample.n) as usize;
    let (variety, total_length) = sample
        .counts_by_length
        .iter()
        .enumerate()
        .skip(lo)
        .fold((0u64, 0u64), |(v, l), (s, &c)| (v + c, l + s as u64 * c));
    let avg_length = if variety == 0 {
        0.0
    } else {
        total_length as f64 / variety as f64
    };
    EmpiricalStats {
        variety,
        total_length,
        avg_length,
    }
}

/// Sample moments of the count of one product length across trials.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LengthMoments {
    pub s: u64,
    pub expected_mean: f64,
    pub expected_variance: f64,
    pub empirical_mean: f64,
    pub empirical_variance: f64,
    pub std_error: f64,
    pub z: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleReport {
    pub n: u64,
    pub rho: Rho,
    pub range: Range,
    pub mode: SampleMode,
    pub base_seed: u64,
    pub trials: u64,
    pub expected_variety: f64,
    pub empirical_variety: f64,
    pub variety_std_error: f64,
    pub variety_z: f64,
    pub expected_avg_length: f64,
    /// Pooled ratio: total length over total count across all trials.
    pub empirical_avg_length: f64,
    pub avg_length_std_error: f64,
    pub avg_length_z: f64,
    pub per_length: Vec<LengthMoments>,
}

impl OracleReport {
    pub fn per_length_zscores(&self) -> Vec<f64> {
        self.per_length.iter().map(|m| m.z).collect()
    }

    /// Largest |z| over total variety, average length and every length count.
    pub fn max_abs_z(&self) -> f64 {
        self.per_length
            .iter()
            .map(|m| m.z.abs())
            .chain([self.variety_z.abs(), self.avg_length_z.abs()])
            .fold(0.0, f64::max)
    }
}

fn z_score(observed: f64, expected: f64, std_error: f64) -> f64 {
    let diff = observed - expected;
    if std_error > 0.0 {
        diff / std_error
    } else if diff.abs() <= 1e-12 * expected.abs().max(1.0) {
        0.0
    } else {
        diff.signum() * f64::INFINITY
    }
}

fn mean_and_variance(xs: impl Iterator<Item = f64> + Clone, m: f64) -> (f64, f64) {
    let mean = xs.clone().sum::<f64>() / m;
    let var = xs.map(|x| (x - mean) * (x - mean)).sum::<f64>() / (m - 1.0);
    (mean, var)
}

/// Runs `trials` independent recipe-book draws and compares their moments
/// with the closed-form expectations `E[count_s] = C(n,s) rho^s`.
pub fn validate_expectations(
    n: u64,
    rho: &Rho,
    range: Range,
    trials: u64,
    base_seed: u64,
    mode: SampleMode,
) -> Result<OracleReport> {
    if trials < MIN_TRIALS {
        return Err(Error::invalid(
            "trials",
            format!("need at least {MIN_TRIALS}, got {trials}"),
        ));
    }
    if n > mode.max_n() {
        return Err(Error::ResourceBound {
            what: mode.name(),
            limit: mode.max_n(),
            n,
        });
    }
    let samples: Vec<RecipeBookSample> = (0..trials)
        .into_par_iter()
        .map(|i| sample_recipe_book(n, rho, derive_seed(base_seed, i), mode))
        .collect::<Result<_>>()?;
    let m = trials as f64;
    let p = viability(rho, n);

    let per_length = (0..=n)
        .map(|s| {
            let c = binom_u64(n, s) as f64;
            let ps = p[s as usize];
            let expected_mean = c * ps;
            let expected_variance = c * ps * (1.0 - ps);
            let counts = samples
                .iter()
                .map(|x| x.counts_by_length[s as usize] as f64);
            let (empirical_mean, empirical_variance) = mean_and_variance(counts, m);
            let std_error = (expected_variance / m).sqrt();
            LengthMoments {
                s,
                expected_mean,
                expected_variance,
                empirical_mean,
                empirical_variance,
                std_error,
                z: z_score(empirical_mean, expected_mean, std_error),
            }
        })
        .collect::<Vec<_>>();

    let lo = range.window_start(n) as usize;
    let stats: Vec<EmpiricalStats> = samples.iter().map(|x| empirical_stats(x, range)).collect();
    let expected_variety = exact::variety_constrained(n, range, rho)
        .to_f64()
        .unwrap_or(f64::INFINITY);
    let variety_var: f64 = per_length[lo..].iter().map(|l| l.expected_variance).sum();
    let variety_std_error = (variety_var / m).sqrt();
    let empirical_variety = stats.iter().map(|x| x.variety as f64).sum::<f64>() / m;

    // Ratio-of-means estimator with a delta-method standard error.
    let expected_avg_length = exact::avg_length_constrained(n, range, rho)
        .to_f64()
        .unwrap_or(f64::NAN);
    let mean_len = stats.iter().map(|x| x.total_length as f64).sum::<f64>() / m;
    let (empirical_avg_length, avg_length_std_error) = if empirical_variety > 0.0 {
        let ratio = mean_len / empirical_variety;
        let resid = stats
            .iter()
            .map(|x| {
                let e = x.total_length as f64 - ratio * x.variety as f64;
                e * e
            })
            .sum::<f64>()
            / (m - 1.0);
        (ratio, (resid / m).sqrt() / empirical_variety)
    } else {
        (0.0, 0.0)
    };

    Ok(OracleReport {
        n,
        rho: rho.clone(),
        range,
        mode,
        base_seed,
        trials,
        expected_variety,
        empirical_variety,
        variety_std_error,
        variety_z: z_score(empirical_variety, expected_variety, variety_std_error),
        expected_avg_length,
        empirical_avg_length,
        avg_length_std_error,
        avg_length_z: z_score(
            empirical_avg_length,
            expected_avg_length,
            avg_length_std_error,
        ),
        per_length,
    })
}
