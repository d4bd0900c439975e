//! Capability acquisition one at a time: trajectories over `n = 0..=N`,
//! hump onset search, range sweeps and the datasets behind the standard
//! variety/length plots.

use num_rational::BigRational;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{exact, logspace, StageLabel};
use crate::params::{Backend, ModelParams, Range, Rho};
use crate::scalar::{format_exact, LogReal, Scalar, SignedScalar};

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryPoint {
    pub n: u64,
    pub variety: Scalar,
    pub avg_length: Scalar,
    /// `d(n+1, r) - d(n, r)`.
    pub delta_variety: SignedScalar,
    pub stage: StageLabel,
    /// `r < n`.
    pub constrained: bool,
    pub hump: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub params: ModelParams,
    pub points: Vec<TrajectoryPoint>,
    /// First `n` with `r < n`.
    pub transition_constrained_at: Option<u64>,
    /// First `n` where the hump condition holds.
    pub hump_onset_at: Option<u64>,
    /// Set when the hump condition turns false again after having held.
    pub non_monotone_flag: bool,
}

impl Trajectory {
    pub fn horizon(&self) -> u64 {
        self.points.last().map_or(0, |p| p.n)
    }
}

fn summarise(params: ModelParams, points: Vec<TrajectoryPoint>) -> Trajectory {
    let transition_constrained_at = points.iter().find(|p| p.constrained).map(|p| p.n);
    let hump_onset_at = points.iter().find(|p| p.hump).map(|p| p.n);
    let non_monotone_flag = points.windows(2).any(|w| w[0].hump && !w[1].hump);
    Trajectory {
        params,
        points,
        transition_constrained_at,
        hump_onset_at,
        non_monotone_flag,
    }
}

fn stage_of(constrained: bool, hump: bool) -> StageLabel {
    match (constrained, hump) {
        (false, _) => StageLabel::Developing,
        (true, false) => StageLabel::Transitioning,
        (true, true) => StageLabel::Developed,
    }
}

/// Evaluates the model at every `n` in `0..=n_max` with the backend in
/// `params`. Average lengths and increments reuse the varieties of the same
/// trajectory, so `delta(n) = variety(n+1) - variety(n)` holds exactly in the
/// exact backend.
pub fn run_trajectory(params: &ModelParams, n_max: u64) -> Trajectory {
    let (range, rho) = (params.range, &params.rho);
    let points = match params.backend {
        Backend::Exact => {
            let varieties: Vec<BigRational> = (0..=n_max + 1)
                .map(|n| exact::variety_constrained(n, range, rho))
                .collect();
            (0..=n_max)
                .map(|n| {
                    let i = n as usize;
                    let cur = &varieties[i];
                    let avg = if n == 0 {
                        BigRational::default()
                    } else {
                        exact::avg_length_from(n, &varieties[i - 1], cur, rho)
                    };
                    let hump = exact::hump_condition_given(n, range, rho, cur);
                    let constrained = !range.covers(n);
                    TrajectoryPoint {
                        n,
                        variety: Scalar::Exact(cur.clone()),
                        avg_length: Scalar::Exact(avg),
                        delta_variety: SignedScalar::Exact(&varieties[i + 1] - cur),
                        stage: stage_of(constrained, hump),
                        constrained,
                        hump,
                    }
                })
                .collect()
        }
        Backend::LogFloat => {
            let varieties: Vec<LogReal> = (0..=n_max + 1)
                .map(|n| logspace::variety_constrained(n, range, rho))
                .collect();
            (0..=n_max)
                .map(|n| {
                    let i = n as usize;
                    let cur = varieties[i];
                    let avg = if n == 0 {
                        LogReal::ZERO
                    } else {
                        logspace::avg_length_from(n, varieties[i - 1], cur, rho)
                    };
                    let hump = logspace::hump_condition_given(n, range, rho, cur);
                    let constrained = !range.covers(n);
                    TrajectoryPoint {
                        n,
                        variety: Scalar::Log(cur),
                        avg_length: Scalar::Log(avg),
                        delta_variety: SignedScalar::Log(varieties[i + 1] - cur),
                        stage: stage_of(constrained, hump),
                        constrained,
                        hump,
                    }
                })
                .collect()
        }
    };
    summarise(params.clone(), points)
}

/// Smallest `n <= n_max` at which the hump condition holds, scanning with
/// the exact backend.
pub fn find_hump_onset(r: u64, rho: &Rho, n_max: u64) -> Result<Option<u64>> {
    find_hump_onset_with(Backend::Exact, r, rho, n_max)
}

pub fn find_hump_onset_with(
    backend: Backend,
    r: u64,
    rho: &Rho,
    n_max: u64,
) -> Result<Option<u64>> {
    if n_max < r + 1 {
        return Err(Error::invalid(
            "n_max",
            format!("must be at least r + 1 = {}, got {n_max}", r + 1),
        ));
    }
    let range = Range::Bounded(r);
    let hit = (r + 1..=n_max).find(|&n| match backend {
        Backend::Exact => exact::hump_condition(n, range, rho),
        Backend::LogFloat => logspace::hump_condition(n, range, rho),
    });
    Ok(hit)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sweep {
    pub rho: Rho,
    pub trajectories: Vec<Trajectory>,
    /// Whether hump onsets are nondecreasing in `r` (absent onsets count as
    /// later than any present one). Reported, not enforced.
    pub onsets_nondecreasing: bool,
}

impl Sweep {
    pub fn onsets(&self) -> Vec<(u64, Option<u64>)> {
        self.trajectories
            .iter()
            .map(|t| (t.params.range.bound().unwrap_or(u64::MAX), t.hump_onset_at))
            .collect()
    }
}

/// One trajectory per product range. `n_max` defaults to `max(3 r_max, 50)`.
/// Trajectories are computed in parallel; output order follows `r_values`.
pub fn sweep_range(
    rho: &Rho,
    r_values: &[u64],
    n_max: Option<u64>,
    backend: Backend,
) -> Result<Sweep> {
    let r_max = *r_values
        .iter()
        .max()
        .ok_or_else(|| Error::invalid("r_values", "at least one range is required"))?;
    let n_max = n_max.unwrap_or((3 * r_max).max(50));
    let trajectories: Vec<Trajectory> = r_values
        .par_iter()
        .map(|&r| {
            run_trajectory(
                &ModelParams::new(rho.clone(), Range::Bounded(r), backend),
                n_max,
            )
        })
        .collect();
    let mut sorted: Vec<(u64, Option<u64>)> = trajectories
        .iter()
        .map(|t| (t.params.range.bound().unwrap(), t.hump_onset_at))
        .collect();
    sorted.sort_by_key(|(r, _)| *r);
    let onsets_nondecreasing = sorted.windows(2).all(|w| {
        w[1].1
            .is_none_or(|later| w[0].1.is_some_and(|earlier| earlier <= later))
    });
    Ok(Sweep {
        rho: rho.clone(),
        trajectories,
        onsets_nondecreasing,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FigureId {
    /// `rho = 1`: unconstrained against `r = 5`.
    BasicDynamics,
    /// `rho = 1/2`: unconstrained against `r = 30`, with stage markers.
    RecipeBook,
    /// `rho = 1/2` over several ranges.
    RangeComparison,
}

impl FigureId {
    pub fn from_number(id: u8) -> Result<Self> {
        match id {
            1 => Ok(FigureId::BasicDynamics),
            2 => Ok(FigureId::RecipeBook),
            3 => Ok(FigureId::RangeComparison),
            _ => Err(Error::invalid(
                "id",
                format!("figure id must be 1, 2 or 3, got {id}"),
            )),
        }
    }

    pub fn number(self) -> u8 {
        match self {
            FigureId::BasicDynamics => 1,
            FigureId::RecipeBook => 2,
            FigureId::RangeComparison => 3,
        }
    }
}

pub const FIGURE3_DEFAULT_RANGES: [u64; 4] = [5, 10, 20, 30];

/// Overrides for figure datasets; `None`/empty falls back to defaults.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FigureSpec {
    pub n_max: Option<u64>,
    pub ranges: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetRow {
    pub n: u64,
    pub variety_exact: String,
    pub variety_decimal: String,
    pub avg_length_exact: String,
    pub avg_length_decimal: String,
    pub stage: StageLabel,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Series {
    pub name: String,
    pub range: Range,
    pub rows: Vec<DatasetRow>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Marker {
    pub name: String,
    pub series: String,
    pub n: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dataset {
    pub figure: u8,
    pub rho: Rho,
    pub n_max: u64,
    pub series: Vec<Series>,
    pub markers: Vec<Marker>,
}

fn series_name(range: Range) -> String {
    match range {
        Range::Unbounded => "unconstrained".to_string(),
        Range::Bounded(r) => format!("r={r}"),
    }
}

fn to_series(t: &Trajectory) -> Series {
    let rows = t
        .points
        .iter()
        .map(|p| DatasetRow {
            n: p.n,
            variety_exact: format_exact(p.variety.as_exact().expect("exact trajectory")),
            variety_decimal: p.variety.decimal(),
            avg_length_exact: format_exact(p.avg_length.as_exact().expect("exact trajectory")),
            avg_length_decimal: p.avg_length.decimal(),
            stage: p.stage,
        })
        .collect();
    Series {
        name: series_name(t.params.range),
        range: t.params.range,
        rows,
    }
}

fn markers_for(t: &Trajectory) -> Vec<Marker> {
    let series = series_name(t.params.range);
    let mut out = Vec::new();
    if let Some(n) = t.transition_constrained_at {
        out.push(Marker {
            name: "constrained_from".into(),
            series: series.clone(),
            n,
        });
    }
    if let Some(n) = t.hump_onset_at {
        out.push(Marker {
            name: "hump_onset".into(),
            series,
            n,
        });
    }
    out
}

/// Exact-backend data behind the three standard plots. Pure computation, so
/// the output is identical across runs.
pub fn emit_figure_data(figure: FigureId, spec: &FigureSpec) -> Result<Dataset> {
    let (rho, ranges): (Rho, Vec<Range>) = match figure {
        FigureId::BasicDynamics => (Rho::one(), vec![Range::Unbounded, Range::Bounded(5)]),
        FigureId::RecipeBook => (
            Rho::from_ratio(1, 2)?,
            vec![Range::Unbounded, Range::Bounded(30)],
        ),
        FigureId::RangeComparison => {
            let rs = if spec.ranges.is_empty() {
                FIGURE3_DEFAULT_RANGES.to_vec()
            } else {
                spec.ranges.clone()
            };
            (
                Rho::from_ratio(1, 2)?,
                rs.into_iter().map(Range::Bounded).collect(),
            )
        }
    };
    let r_max = ranges.iter().filter_map(|r| r.bound()).max().unwrap_or(0);
    let n_max = spec.n_max.unwrap_or((3 * r_max).max(50));
    let trajectories: Vec<Trajectory> = ranges
        .par_iter()
        .map(|&range| run_trajectory(&ModelParams::exact(rho.clone(), range), n_max))
        .collect();
    Ok(Dataset {
        figure: figure.number(),
        rho,
        n_max,
        series: trajectories.iter().map(to_series).collect(),
        markers: trajectories.iter().flat_map(markers_for).collect(),
    })
}
