//! Cumulative software-failure datasets.
//!
//! A dataset is an ordered list of observation times together with the
//! cumulative number of faults detected by each time. The on-disk format is a
//! small CSV file:
//!
//! ```text
//! # optional comment lines
//! t,cumulative_faults
//! 1,5
//! 2,9
//! 3,12
//! ```

use std::fmt::Write as _;
use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Header row required at the top of every dataset file.
pub const HEADER: &str = "t,cumulative_faults";

#[derive(Debug, Error, PartialEq)]
pub enum DatasetError {
    #[error("io error: {0}")]
    Io(String),
    #[error("line {line}: expected header `{HEADER}`, found `{found}`")]
    Header { line: u64, found: String },
    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },
    #[error("{0}")]
    Validation(String),
}

/// One observation: time `t` and cumulative faults `m` detected by `t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub t: f64,
    pub m: f64,
}

/// A validated cumulative-failure dataset.
///
/// Construction always goes through [`FailureDataset::new`], so every value of
/// this type satisfies: at least two points, strictly increasing positive
/// times, nonnegative nondecreasing counts.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FailureDataset {
    name: String,
    points: Vec<Observation>,
}

impl FailureDataset {
    pub fn new(name: impl Into<String>, points: Vec<Observation>) -> Result<Self, DatasetError> {
        validate(&points)?;
        Ok(Self {
            name: name.into(),
            points,
        })
    }

    /// Builds a dataset from parallel slices of times and counts.
    pub fn from_pairs(
        name: impl Into<String>,
        times: &[f64],
        counts: &[f64],
    ) -> Result<Self, DatasetError> {
        if times.len() != counts.len() {
            return Err(DatasetError::Validation(format!(
                "{} times but {} counts",
                times.len(),
                counts.len()
            )));
        }
        let points = times
            .iter()
            .zip(counts)
            .map(|(&t, &m)| Observation { t, m })
            .collect();
        Self::new(name, points)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn points(&self) -> &[Observation] {
        &self.points
    }

    /// Sample size.
    pub fn k(&self) -> usize {
        self.points.len()
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        self.points.iter().map(|p| p.t)
    }

    pub fn counts(&self) -> impl Iterator<Item = f64> + '_ {
        self.points.iter().map(|p| p.m)
    }

    /// Last observation time.
    pub fn last_time(&self) -> f64 {
        self.points[self.points.len() - 1].t
    }

    /// Actual cumulative faults at the end of testing (`M_a`).
    pub fn total_faults(&self) -> f64 {
        self.points[self.points.len() - 1].m
    }

    /// Parses the CSV form. Row numbers in validation errors are 1-based data
    /// rows; line numbers in parse errors are physical file lines.
    pub fn parse<R: Read>(name: impl Into<String>, source: R) -> Result<Self, DatasetError> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .flexible(true)
            .from_reader(source);

        let mut points = Vec::new();
        let mut seen_header = false;
        for record in reader.records() {
            let record = record.map_err(|e| {
                let line = e.position().map_or(0, |p| p.line());
                DatasetError::Parse {
                    line,
                    message: e.to_string(),
                }
            })?;
            let line = record.position().map_or(0, |p| p.line());
            if record.iter().all(str::is_empty) {
                continue;
            }
            if !seen_header {
                let found = record.iter().collect::<Vec<_>>().join(",");
                if found != HEADER {
                    return Err(DatasetError::Header { line, found });
                }
                seen_header = true;
                continue;
            }
            if record.len() != 2 {
                return Err(DatasetError::Parse {
                    line,
                    message: format!("expected 2 fields, found {}", record.len()),
                });
            }
            let field = |i: usize, what: &str| -> Result<f64, DatasetError> {
                let raw = &record[i];
                match raw.parse::<f64>() {
                    Ok(v) if v.is_finite() => Ok(v),
                    _ => Err(DatasetError::Parse {
                        line,
                        message: format!("malformed {what} `{raw}`"),
                    }),
                }
            };
            points.push(Observation {
                t: field(0, "time")?,
                m: field(1, "cumulative fault count")?,
            });
        }
        if !seen_header {
            return Err(DatasetError::Header {
                line: 1,
                found: String::new(),
            });
        }
        Self::new(name, points)
    }

    pub fn parse_str(name: impl Into<String>, text: &str) -> Result<Self, DatasetError> {
        Self::parse(name, text.as_bytes())
    }

    /// Reads a dataset file; the dataset name is the file stem.
    pub fn from_path(path: &Path) -> Result<Self, DatasetError> {
        let file = std::fs::File::open(path)
            .map_err(|e| DatasetError::Io(format!("{}: {e}", path.display())))?;
        let name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "dataset".to_owned());
        Self::parse(name, file)
    }

    /// Serializes to the CSV form accepted by [`FailureDataset::parse`].
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(16 * (self.points.len() + 1));
        out.push_str(HEADER);
        out.push('\n');
        for p in &self.points {
            let _ = writeln!(out, "{},{}", p.t, p.m);
        }
        out
    }
}

fn validate(points: &[Observation]) -> Result<(), DatasetError> {
    if points.len() < 2 {
        return Err(DatasetError::Validation(format!(
            "dataset needs at least 2 rows, found {}",
            points.len()
        )));
    }
    for (i, p) in points.iter().enumerate() {
        let row = i + 1;
        if !p.t.is_finite() || !p.m.is_finite() {
            return Err(DatasetError::Validation(format!(
                "non-finite value at row {row}"
            )));
        }
        if p.t <= 0.0 {
            return Err(DatasetError::Validation(format!(
                "time must be positive at row {row}"
            )));
        }
        if p.m < 0.0 {
            return Err(DatasetError::Validation(format!(
                "cumulative count is negative at row {row}"
            )));
        }
    }
    for (i, w) in points.windows(2).enumerate() {
        let row = i + 2;
        if w[1].t <= w[0].t {
            return Err(DatasetError::Validation(format!(
                "times not strictly increasing at row {row}"
            )));
        }
        if w[1].m < w[0].m {
            return Err(DatasetError::Validation(format!(
                "cumulative counts decrease at row {row}"
            )));
        }
    }
    Ok(())
}
