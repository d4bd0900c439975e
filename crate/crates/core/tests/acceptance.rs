//! Acceptance suite. Runs every criterion at its stated tolerance and time
//! limit, prints one PASS/FAIL line per criterion, and exits non-zero if any
//! criterion fails.

mod common;

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use capmodel::model::{exact, logspace};
use capmodel::oracle::{self, SampleMode};
use capmodel::trajectory::{find_hump_onset, run_trajectory, sweep_range};
use capmodel::{cross_validate, Backend, Model, ModelParams, Range, Rho, Scalar};
use common::{rat, rho_grid, rows};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

type Outcome = Result<String, String>;

type Criterion = (&'static str, Option<Duration>, Box<dyn Fn() -> Outcome>);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn exact_of(s: Scalar) -> BigRational {
    s.as_exact().expect("exact backend").clone()
}

/// 1. Basic model: d(n) = 2^n, s(n) = n/2 for n = 0..60, rho = 1, unbounded.
fn basic_model_exactness() -> Outcome {
    let model = Model::new(ModelParams::exact(Rho::one(), Range::Unbounded));
    for n in 0..=60u64 {
        let two_n = BigRational::from_integer(BigInt::one() << n);
        ensure(exact_of(model.variety(n)) == two_n, || {
            format!("d({n}) != 2^{n}")
        })?;
        ensure(exact_of(model.variety_unconstrained(n)) == two_n, || {
            format!("(1+1)^{n} != 2^{n}")
        })?;
        ensure(exact_of(model.avg_length(n)) == rat(n as i64, 2), || {
            format!("s({n}) != {n}/2")
        })?;
        ensure(
            exact_of(model.avg_length_unconstrained(n)) == rat(n as i64, 2),
            || format!("s({n}) != {n}/2"),
        )?;
    }
    Ok("61 values of n, zero tolerance".into())
}

/// 2. Expected length rho n / (1 + rho) equals the direct weighted mean.
fn expected_length_exactness() -> Outcome {
    let mut checked = 0;
    for rho in rho_grid() {
        let oracle = rows(&rho, 60);
        for n in 0..=60u64 {
            let closed = rho.value() * BigRational::from_integer(n.into())
                / (BigRational::one() + rho.value());
            let lib = exact::avg_length_unconstrained(n, &rho);
            ensure(lib == closed, || {
                format!("rho={rho} n={n}: {lib} != {closed}")
            })?;
            let direct = oracle[n as usize].mean_length(None);
            ensure(lib == direct, || {
                format!("rho={rho} n={n}: closed form {lib} != direct mean {direct}")
            })?;
            let constrained = exact::avg_length_constrained(n, Range::Unbounded, &rho);
            ensure(constrained == closed, || {
                format!("rho={rho} n={n}: ratio formula disagrees")
            })?;
            checked += 1;
        }
    }
    Ok(format!("{checked} (rho, n) pairs, zero tolerance"))
}

/// 3. Closed-form identities for 1 <= r < n <= 200 on the rho grid.
fn closed_form_identities() -> Outcome {
    const N_MAX: u64 = 200;
    let mut checked = 0u64;
    for rho in rho_grid() {
        let oracle = rows(&rho, N_MAX + 1);
        let fact = common::Factorials::up_to(N_MAX + 1);
        let lower_rate = rho.value() / (BigRational::one() + rho.value());
        for n in 2..=N_MAX {
            for r in 1..n {
                let range = Range::Bounded(r);
                let d = exact::variety_constrained(n, range, &rho);
                ensure(d == oracle[n as usize].variety(Some(r)), || {
                    format!("d({n},{r}) rho={rho} wrong")
                })?;

                // (a) ratio formula against the direct weighted mean
                let s = exact::avg_length_constrained(n, range, &rho);
                let direct = oracle[n as usize].mean_length(Some(r));
                ensure(s == direct, || {
                    format!("(a) rho={rho} n={n} r={r}: {s} != {direct}")
                })?;

                // (b) increment: direct difference against the closed form, both ways
                let diff = exact::variety_delta(n, range, &rho);
                let closed = exact::variety_delta_closed_form(n, range, &rho);
                let oracle_diff =
                    oracle[n as usize + 1].variety(Some(r)) - oracle[n as usize].variety(Some(r));
                let oracle_closed = rho.value() * oracle[n as usize].variety(Some(r))
                    - BigRational::from_integer(fact.binom(n, r as i64))
                        * rho.value().pow((n - r) as i32);
                ensure(diff == oracle_closed, || {
                    format!("(b) rho={rho} n={n} r={r}: difference != closed form")
                })?;
                ensure(closed == oracle_diff, || {
                    format!("(b) rho={rho} n={n} r={r}: closed form != difference")
                })?;

                // (c) rho n / (1 + rho) < s(n, r) < n
                ensure(
                    &lower_rate * BigRational::from_integer(n.into()) < s,
                    || format!("(c) rho={rho} n={n} r={r}: lower bound violated"),
                )?;
                ensure(s < BigRational::from_integer(n.into()), || {
                    format!("(c) rho={rho} n={n} r={r}: s >= n")
                })?;

                // (d) rho = 1: 1/2 < d(n-1,r)/d(n,r) < 1 and d(n,r) = 2 d(n-1,r) - C(n-1,r)
                if rho.is_one() {
                    let prev = exact::variety_constrained(n - 1, range, &rho);
                    let ratio = &prev / &d;
                    ensure(rat(1, 2) < ratio && ratio < BigRational::one(), || {
                        format!("(d) n={n} r={r}: ratio {ratio} outside (1/2, 1)")
                    })?;
                    let rebuilt = BigRational::from_integer(2.into()) * &prev
                        - BigRational::from_integer(exact::binom(n - 1, r as i64));
                    ensure(d == rebuilt, || {
                        format!("(d) n={n} r={r}: recurrence fails")
                    })?;
                }
                checked += 1;
            }
        }
    }
    Ok(format!("{checked} (rho, n, r) triples, zero tolerance"))
}

/// 4. Exhaustive enumeration equals the closed forms at rho = 1.
fn oracle_equivalence() -> Outcome {
    let one = Rho::one();
    let mut checked = 0;
    for n in 0..=15u64 {
        for r in 0..=n + 2 {
            let range = Range::Bounded(r);
            let e = oracle::enumerate_products(n, range).map_err(|e| e.to_string())?;
            let d = exact::variety_constrained(n, range, &one);
            let s = exact::avg_length_constrained(n, range, &one);
            ensure(d == BigRational::from_integer(e.variety.into()), || {
                format!("n={n} r={r}: variety")
            })?;
            ensure(s == e.avg_length, || {
                format!("n={n} r={r}: {s} != {}", e.avg_length)
            })?;
            checked += 1;
        }
    }
    Ok(format!("{checked} (n, r) pairs, zero tolerance"))
}

/// 5. The hump at rho = 1/2, r = 30.
fn hump_reproduction() -> Outcome {
    let rho = Rho::from_ratio(1, 2).unwrap();
    let params = ModelParams::exact(rho.clone(), Range::Bounded(30));
    let t = run_trajectory(&params, params.default_horizon());
    let delta = |n: u64| {
        t.points[n as usize]
            .delta_variety
            .as_exact()
            .unwrap()
            .clone()
    };
    for n in 0..=31 {
        ensure(delta(n) > BigRational::zero(), || {
            format!("variety not increasing at n={n}")
        })?;
    }
    let onset = find_hump_onset(30, &rho, 500)
        .map_err(|e| e.to_string())?
        .ok_or("no hump found")?;
    ensure(t.hump_onset_at == Some(onset), || {
        format!("trajectory onset {:?} != scan {onset}", t.hump_onset_at)
    })?;
    ensure(
        exact::hump_condition(onset, Range::Bounded(30), &rho),
        || "hump(n*) false".into(),
    )?;
    ensure(
        !exact::hump_condition(onset - 1, Range::Bounded(30), &rho),
        || "hump(n*-1) true".into(),
    )?;
    let window = 10;
    ensure(t.horizon() >= onset + window, || {
        "trajectory too short for the decline window".into()
    })?;
    for n in onset..onset + window {
        ensure(delta(n) < BigRational::zero(), || {
            format!("variety not decreasing from n={n}")
        })?;
    }
    let mut post = 0;
    for p in t.points.iter().filter(|p| p.n > onset) {
        let bound = rho.value() * BigRational::from_integer(p.n.into());
        ensure(*p.avg_length.as_exact().unwrap() > bound, || {
            format!("s({}) <= rho n", p.n)
        })?;
        post += 1;
    }
    Ok(format!(
        "onset n* = {onset}; decline over {window} steps; s > rho n at {post} post-hump points"
    ))
}

/// 6. No hump at rho = 1.
fn no_hump_at_rho_one() -> Outcome {
    let one = Rho::one();
    let mut checked = 0;
    for n in 2..=200u64 {
        for r in 1..n {
            let range = Range::Bounded(r);
            ensure(!exact::hump_condition(n, range, &one), || {
                format!("hump at n={n} r={r}")
            })?;
            ensure(
                exact::variety_delta(n, range, &one) > BigRational::zero(),
                || format!("delta <= 0 at n={n} r={r}"),
            )?;
            checked += 1;
        }
        // r = 0 keeps only the full product: variety stays at 1.
        ensure(!exact::hump_condition(n, Range::Bounded(0), &one), || {
            format!("hump at n={n} r=0")
        })?;
        ensure(
            exact::variety_delta(n, Range::Bounded(0), &one).is_zero(),
            || format!("r=0 delta at n={n}"),
        )?;
    }
    Ok(format!(
        "{checked} (n, r) pairs with 1 <= r < n; r = 0 flat"
    ))
}

fn binary() -> &'static str {
    env!("CARGO_BIN_EXE_capmodel")
}

fn run_cli(args: &[&str]) -> Result<i32, String> {
    let out = Command::new(binary())
        .args(args)
        .output()
        .map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(format!(
            "{args:?} exited {:?}: {}",
            out.status.code(),
            String::from_utf8_lossy(&out.stderr)
        ));
    }
    Ok(0)
}

/// 7. Hump onsets strictly increase with the range; report written as CSV.
fn range_ordering(dir: &Path) -> Outcome {
    let rho = Rho::from_ratio(1, 2).unwrap();
    let ranges = [5u64, 10, 20, 30];
    let sweep = sweep_range(&rho, &ranges, None, Backend::Exact).map_err(|e| e.to_string())?;
    let onsets: Vec<u64> = sweep
        .trajectories
        .iter()
        .map(|t| {
            t.hump_onset_at
                .ok_or_else(|| format!("no hump for {:?}", t.params.range))
        })
        .collect::<Result<_, _>>()?;
    ensure(onsets.windows(2).all(|w| w[0] < w[1]), || {
        format!("onsets {onsets:?} not strictly increasing")
    })?;

    let csv_path = dir.join("range_sweep.csv");
    run_cli(&[
        "sweep",
        "--rho",
        "0.5",
        "--r-values",
        "5,10,20,30",
        "--out",
        csv_path.to_str().unwrap(),
    ])?;
    let text = std::fs::read_to_string(&csv_path).map_err(|e| e.to_string())?;
    let mut lines = text.lines();
    ensure(
        lines.next()
            == Some("r,n_max,constrained_from,hump_onset,non_monotone,onsets_nondecreasing"),
        || "unexpected sweep header".into(),
    )?;
    let csv_onsets: Vec<u64> = lines
        .map(|l| l.split(',').nth(3).unwrap().parse().unwrap())
        .collect();
    ensure(csv_onsets == onsets, || {
        format!("CSV onsets {csv_onsets:?} != {onsets:?}")
    })?;
    Ok(format!(
        "onsets {:?} for r = {:?}; CSV report written",
        onsets, ranges
    ))
}

/// 8. Monte Carlo means within 3 standard errors at n = 12, rho = 1/2.
fn monte_carlo_consistency() -> Outcome {
    const SEED: u64 = capmodel::cli::DEFAULT_SEED;
    let rho = Rho::from_ratio(1, 2).unwrap();
    let expected_total = 1.5f64.powi(12);
    let mut details = Vec::new();
    for mode in [
        SampleMode::PerSubset { persistent: false },
        SampleMode::PerLengthBinomial,
    ] {
        let report = oracle::validate_expectations(12, &rho, Range::Unbounded, 1000, SEED, mode)
            .map_err(|e| e.to_string())?;
        ensure(
            (report.expected_variety - expected_total).abs() < 1e-9,
            || "expected variety != 1.5^12".into(),
        )?;
        ensure(report.variety_z.abs() <= 3.0, || {
            format!("{}: total variety z = {}", mode.name(), report.variety_z)
        })?;
        for m in &report.per_length {
            let c = oracle::binom_u64(12, m.s) as f64 * 0.5f64.powi(m.s as i32);
            ensure((m.expected_mean - c).abs() < 1e-12, || {
                format!("expected count s={}", m.s)
            })?;
            ensure(m.z.abs() <= 3.0, || {
                format!(
                    "{}: length {} mean {:.6} vs expected {:.6}, SE {:.6}, z = {:.3}",
                    mode.name(),
                    m.s,
                    m.empirical_mean,
                    m.expected_mean,
                    m.std_error,
                    m.z
                )
            })?;
        }
        let again = oracle::validate_expectations(12, &rho, Range::Unbounded, 1000, SEED, mode)
            .map_err(|e| e.to_string())?;
        ensure(again == report, || {
            format!("{}: rerun differs", mode.name())
        })?;
        details.push(format!(
            "{} max|z| = {:.2}",
            mode.name(),
            report.max_abs_z()
        ));
    }
    Ok(format!("seed {SEED}; {}", details.join(", ")))
}

/// 9. Log backend within 1e-9 relative of the exact backend.
fn backend_agreement() -> Outcome {
    const TOL: f64 = 1e-9;
    let mut worst = 0f64;
    let mut checked = 0;
    for rho in rho_grid() {
        for n in 1..=300u64 {
            let mut rs = vec![1, n / 4, n / 2, 3 * n / 4, n - 1];
            rs.sort_unstable();
            rs.dedup();
            for r in rs {
                let cv =
                    cross_validate(n, Range::Bounded(r), &rho, TOL).map_err(|e| e.to_string())?;
                worst = worst.max(cv.variety_deviation).max(cv.avg_length_deviation);
                ensure(cv.within_tolerance(), || format!("{cv:?}"))?;
                checked += 1;
            }
        }
    }
    // Hump decisions agree too, including at large n.
    let half = Rho::from_ratio(1, 2).unwrap();
    for r in [5u64, 30, 100] {
        for n in r + 1..=300 {
            let range = Range::Bounded(r);
            ensure(
                exact::hump_condition(n, range, &half) == logspace::hump_condition(n, range, &half),
                || format!("hump disagreement at n={n} r={r}"),
            )?;
        }
    }
    Ok(format!(
        "{checked} points, worst relative deviation {worst:.2e}"
    ))
}

/// 10. Every CLI command is byte-for-byte reproducible.
fn cli_determinism(dir: &Path) -> Outcome {
    let commands: Vec<Vec<&str>> = vec![
        vec!["eval", "--rho", "0.5", "--r", "30", "--n", "40"],
        vec![
            "eval",
            "--rho",
            "0.5",
            "--r",
            "30",
            "--n",
            "40",
            "--backend",
            "both",
            "--format",
            "json",
        ],
        vec![
            "trajectory",
            "--rho",
            "1",
            "--r",
            "unbounded",
            "--n-max",
            "20",
        ],
        vec![
            "trajectory",
            "--rho",
            "3/10",
            "--r",
            "12",
            "--n-max",
            "60",
            "--backend",
            "both",
        ],
        vec![
            "trajectory",
            "--rho",
            "0.5",
            "--r",
            "30",
            "--backend",
            "logfloat",
            "--format",
            "json",
        ],
        vec!["sweep", "--rho", "0.5", "--r-values", "5,10,20,30"],
        vec![
            "sweep",
            "--rho",
            "0.5",
            "--r-values",
            "1,4",
            "--format",
            "json",
        ],
        vec![
            "hump",
            "--rho",
            "0.5",
            "--r",
            "30",
            "--n-max",
            "200",
            "--backend",
            "both",
        ],
        vec![
            "oracle", "--n", "12", "--rho", "0.5", "--trials", "200", "--seed", "7",
        ],
        vec![
            "oracle",
            "--n",
            "10",
            "--rho",
            "0.5",
            "--r",
            "4",
            "--mode",
            "per-subset",
            "--trials",
            "100",
            "--format",
            "json",
        ],
        vec![
            "oracle", "--n", "8", "--rho", "1", "--r", "3", "--trials", "30",
        ],
        vec![
            "validate", "--rho", "0.5", "--r", "20", "--n-max", "200", "--tol", "1e-9",
        ],
        vec!["figures", "--id", "1"],
        vec!["figures", "--id", "2"],
        vec!["figures", "--id", "3", "--format", "json"],
    ];
    for (i, cmd) in commands.iter().enumerate() {
        let mut outputs = Vec::new();
        for pass in 0..2 {
            let path = dir.join(format!("det_{i}_{pass}.out"));
            let mut args = cmd.clone();
            args.extend(["--out", path.to_str().unwrap()]);
            run_cli(&args)?;
            outputs.push(std::fs::read(&path).map_err(|e| e.to_string())?);
        }
        ensure(!outputs[0].is_empty(), || {
            format!("{cmd:?} produced no output")
        })?;
        ensure(outputs[0] == outputs[1], || {
            format!("{cmd:?} not byte-identical")
        })?;
    }
    Ok(format!(
        "{} commands, identical bytes on rerun",
        commands.len()
    ))
}

fn main() {
    if std::env::args().any(|a| a == "--list") {
        return;
    }
    let dir = tempfile::tempdir().expect("temp dir");
    let d = dir.path().to_path_buf();
    let d2 = d.clone();
    let criteria: Vec<Criterion> = vec![
        (
            "1 basic-model exactness",
            Some(Duration::from_secs(1)),
            Box::new(basic_model_exactness),
        ),
        (
            "2 expected-length exactness",
            Some(Duration::from_secs(1)),
            Box::new(expected_length_exactness),
        ),
        (
            "3 closed-form identity suite",
            Some(Duration::from_secs(60)),
            Box::new(closed_form_identities),
        ),
        (
            "4 enumeration oracle equivalence",
            Some(Duration::from_secs(30)),
            Box::new(oracle_equivalence),
        ),
        (
            "5 hump reproduction (rho=1/2, r=30)",
            Some(Duration::from_secs(10)),
            Box::new(hump_reproduction),
        ),
        (
            "6 no hump at rho=1",
            Some(Duration::from_secs(10)),
            Box::new(no_hump_at_rho_one),
        ),
        (
            "7 hump onset ordering in r",
            Some(Duration::from_secs(10)),
            Box::new(move || range_ordering(&d)),
        ),
        (
            "8 Monte Carlo consistency",
            Some(Duration::from_secs(60)),
            Box::new(monte_carlo_consistency),
        ),
        (
            "9 backend agreement",
            Some(Duration::from_secs(60)),
            Box::new(backend_agreement),
        ),
        (
            "10 CLI determinism",
            None,
            Box::new(move || cli_determinism(&d2)),
        ),
    ];
    let mut failures = 0;
    for (name, limit, check) in &criteria {
        let start = Instant::now();
        let result = check();
        let elapsed = start.elapsed();
        let timing = match limit {
            Some(l) => format!("{:.2}s / limit {}s", elapsed.as_secs_f64(), l.as_secs()),
            None => format!("{:.2}s", elapsed.as_secs_f64()),
        };
        let result = match (result, limit) {
            (Ok(_), Some(l)) if elapsed > *l => Err("runtime limit exceeded".to_string()),
            (r, _) => r,
        };
        match result {
            Ok(detail) => println!("[PASS] criterion {name} ({timing}): {detail}"),
            Err(why) => {
                failures += 1;
                println!("[FAIL] criterion {name} ({timing}): {why}");
            }
        }
    }
    println!(
        "acceptance: {} passed, {} failed",
        criteria.len() - failures,
        failures
    );
    if failures > 0 {
        std::process::exit(1);
    }
}
