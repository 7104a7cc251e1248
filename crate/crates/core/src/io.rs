//! Distribution file format.
//!
//! One CSV file per input distribution: two columns `value,cum_prob`,
//! strictly increasing in both, `#`-prefixed comment lines allowed.

use crate::dist::{DistError, Interp, StepDistribution, SupportKind};
use std::fmt::Write as _;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum LoadError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("{path}:{line}: {reason}")]
    Parse {
        path: String,
        line: usize,
        reason: String,
    },
    #[error("{path}: {source}")]
    Invalid {
        path: String,
        source: DistError,
    },
}

/// Value-axis shift applied to digitized flow-size inputs so the smallest
/// flows clear the minimum Layer-2 flow a TCP handshake produces.
pub const FLOW_SIZE_SHIFT_BYTES: f64 = 219.0;

/// Value-axis shift applied to digitized entry-volume inputs, keeping the
/// matrix entries consistent with the enlarged flow sizes.
pub const VOLUME_SHIFT_BYTES: f64 = 1000.0;

/// Parses the two-column CSV distribution format. Both columns must be
/// strictly increasing; blank lines and `#` comments are skipped.
pub fn parse_distribution(
    text: &str,
    kind: SupportKind,
    interp: Interp,
    path: &str,
) -> Result<StepDistribution, LoadError> {
    let mut points: Vec<(f64, f64)> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut cols = line.split(',');
        let parse = |field: Option<&str>, what: &str| -> Result<f64, LoadError> {
            field
                .map(str::trim)
                .and_then(|s| s.parse::<f64>().ok())
                .ok_or_else(|| LoadError::Parse {
                    path: path.to_string(),
                    line: i + 1,
                    reason: format!("expected numeric {what}"),
                })
        };
        let value = parse(cols.next(), "value")?;
        let cum = parse(cols.next(), "cum_prob")?;
        if cols.next().is_some() {
            return Err(LoadError::Parse {
                path: path.to_string(),
                line: i + 1,
                reason: "expected exactly two columns".into(),
            });
        }
        if let Some(&(pv, pc)) = points.last() {
            if value <= pv || cum <= pc {
                return Err(LoadError::Parse {
                    path: path.to_string(),
                    line: i + 1,
                    reason: "values and cum_prob must be strictly increasing".into(),
                });
            }
        }
        points.push((value, cum));
    }
    StepDistribution::new(points, kind, interp).map_err(|source| LoadError::Invalid {
        path: path.to_string(),
        source,
    })
}

pub fn load_distribution(
    path: &Path,
    kind: SupportKind,
    interp: Interp,
) -> Result<StepDistribution, LoadError> {
    let text = std::fs::read_to_string(path).map_err(|source| LoadError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_distribution(&text, kind, interp, &path.display().to_string())
}

/// Serializes a distribution in the same CSV format the loader reads.
pub fn distribution_to_csv(dist: &StepDistribution) -> String {
    let mut out = String::from("# value,cum_prob\n");
    for &(v, c) in dist.points() {
        let _ = writeln!(out, "{v},{c}");
    }
    out
}
