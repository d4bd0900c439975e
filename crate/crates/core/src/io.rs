//! Structured text output. Every writer renders into memory first so that
//! identical inputs give identical bytes.

use std::io::Write;

use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::StageLabel;
use crate::scalar::parse_exact;
use crate::trajectory::{Dataset, Trajectory};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

/// One line of trajectory output. Exact columns are `p/q` strings and are
/// left empty when only the log backend was evaluated.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrajectoryRow {
    pub n: u64,
    pub variety_exact: Option<String>,
    pub variety_float: String,
    pub avg_length_exact: Option<String>,
    pub avg_length_float: String,
    pub delta_variety_float: String,
    pub stage: StageLabel,
    pub constrained: bool,
    pub hump: bool,
}

/// Rows for `primary`; decimal columns come from `floats` when given (the
/// log-backend run of the same parameters), otherwise from `primary`.
pub fn trajectory_rows(primary: &Trajectory, floats: Option<&Trajectory>) -> Vec<TrajectoryRow> {
    let floats = floats.unwrap_or(primary);
    assert_eq!(
        primary.points.len(),
        floats.points.len(),
        "trajectories must share a horizon"
    );
    primary
        .points
        .iter()
        .zip(&floats.points)
        .map(|(p, f)| TrajectoryRow {
            n: p.n,
            variety_exact: p.variety.exact_string(),
            variety_float: f.variety.decimal(),
            avg_length_exact: p.avg_length.exact_string(),
            avg_length_float: f.avg_length.decimal(),
            delta_variety_float: f.delta_variety.decimal(),
            stage: p.stage,
            constrained: p.constrained,
            hump: p.hump,
        })
        .collect()
}

/// Serialises a homogeneous list of records. CSV always carries a header row
/// (also for an empty list); JSON is a pretty-printed array with a trailing
/// newline.
pub fn render_records<T: Serialize>(
    records: &[T],
    header: &[&str],
    format: Format,
) -> Result<Vec<u8>> {
    match format {
        Format::Csv => {
            let mut w = csv::WriterBuilder::new()
                .has_headers(false)
                .from_writer(Vec::new());
            w.write_record(header).map_err(csv_err)?;
            for rec in records {
                w.serialize(rec).map_err(csv_err)?;
            }
            w.into_inner()
                .map_err(|e| Error::invalid("output", e.to_string()))
        }
        Format::Json => render_json(records),
    }
}

pub fn render_json<T: Serialize + ?Sized>(value: &T) -> Result<Vec<u8>> {
    let mut out =
        serde_json::to_vec_pretty(value).map_err(|e| Error::invalid("output", e.to_string()))?;
    out.push(b'\n');
    Ok(out)
}

fn csv_err(e: csv::Error) -> Error {
    Error::invalid("output", e.to_string())
}

pub const TRAJECTORY_HEADER: [&str; 9] = [
    "n",
    "variety_exact",
    "variety_float",
    "avg_length_exact",
    "avg_length_float",
    "delta_variety_float",
    "stage",
    "constrained",
    "hump",
];

pub fn render_trajectory(rows: &[TrajectoryRow], format: Format) -> Result<Vec<u8>> {
    render_records(rows, &TRAJECTORY_HEADER, format)
}

/// Exact fields recovered from a trajectory CSV.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrajectoryRecord {
    pub n: u64,
    pub variety: Option<BigRational>,
    pub avg_length: Option<BigRational>,
    pub stage: StageLabel,
    pub constrained: bool,
    pub hump: bool,
}

/// Parses output of [`render_trajectory`] in CSV form.
pub fn parse_trajectory_csv(text: &str) -> Result<Vec<TrajectoryRecord>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(text.as_bytes());
    let header = reader.headers().map_err(csv_err)?.clone();
    if header.iter().ne(TRAJECTORY_HEADER) {
        return Err(Error::invalid(
            "header",
            format!("unexpected trajectory header {header:?}"),
        ));
    }
    let exact = |s: Option<String>, field: &'static str| -> Result<Option<BigRational>> {
        s.map(|s| {
            parse_exact(&s)
                .ok_or_else(|| Error::invalid(field, format!("malformed rational {s:?}")))
        })
        .transpose()
    };
    reader
        .deserialize::<TrajectoryRow>()
        .map(|row| {
            let row = row.map_err(csv_err)?;
            Ok(TrajectoryRecord {
                n: row.n,
                variety: exact(row.variety_exact, "variety_exact")?,
                avg_length: exact(row.avg_length_exact, "avg_length_exact")?,
                stage: row.stage,
                constrained: row.constrained,
                hump: row.hump,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FigureRow<'a> {
    pub series: &'a str,
    /// `point` for data rows, otherwise the marker name.
    pub kind: &'a str,
    pub n: u64,
    pub variety_exact: &'a str,
    pub variety_float: &'a str,
    pub avg_length_exact: &'a str,
    pub avg_length_float: &'a str,
    pub stage: &'a str,
}

pub const FIGURE_HEADER: [&str; 8] = [
    "series",
    "kind",
    "n",
    "variety_exact",
    "variety_float",
    "avg_length_exact",
    "avg_length_float",
    "stage",
];

/// CSV: one row per data point followed by one row per marker (marker rows
/// leave the value columns empty). JSON: the dataset object.
pub fn render_figure(dataset: &Dataset, format: Format) -> Result<Vec<u8>> {
    if format == Format::Json {
        return render_json(dataset);
    }
    let points = dataset.series.iter().flat_map(|s| {
        s.rows.iter().map(move |r| FigureRow {
            series: &s.name,
            kind: "point",
            n: r.n,
            variety_exact: &r.variety_exact,
            variety_float: &r.variety_decimal,
            avg_length_exact: &r.avg_length_exact,
            avg_length_float: &r.avg_length_decimal,
            stage: r.stage.as_str(),
        })
    });
    let markers = dataset.markers.iter().map(|m| FigureRow {
        series: &m.series,
        kind: &m.name,
        n: m.n,
        variety_exact: "",
        variety_float: "",
        avg_length_exact: "",
        avg_length_float: "",
        stage: "",
    });
    let rows: Vec<FigureRow> = points.chain(markers).collect();
    render_records(&rows, &FIGURE_HEADER, Format::Csv)
}

/// Writes `bytes` to `path`, or to stdout when `path` is `None`.
pub fn write_output(path: Option<&std::path::Path>, bytes: &[u8]) -> std::io::Result<()> {
    match path {
        Some(p) => std::fs::write(p, bytes),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(bytes)?;
            out.flush()
        }
    }
}
