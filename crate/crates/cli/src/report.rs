//! Validation runner: rebuilds the generated Layer-2 statistics from a
//! schedule and writes the comparison report plus QQ/PP point exports.

use crate::config::RunConfig;
use crate::schedule::Schedule;
use anyhow::{Context, Result};
use rackload::dist::ComparisonReport;
use rackload::validate::{validate, L2Model, ObservedSet, ValidationReport};
use std::fmt::Write as _;
use std::path::Path;

/// Number of QQ quantile points exported per comparison.
pub const QQ_POINTS: usize = 256;

pub fn build_l2_model(cfg: &RunConfig) -> Result<L2Model> {
    Ok(L2Model {
        ack: cfg.ack_model()?,
        ..L2Model::default()
    })
}

/// Validates a schedule against the configured observed inputs.
pub fn run_validation(cfg: &RunConfig, schedule: &Schedule) -> Result<ValidationReport> {
    let observed = cfg.load_observed().context("loading inputs")?;
    let layout = cfg.layout()?;
    let model = build_l2_model(cfg)?;
    let set = ObservedSet {
        volume_intra: observed.bytes_intra,
        volume_inter: observed.bytes_inter,
        partners_intra: observed.partners_intra,
        partners_inter: observed.partners_inter,
        flow_sizes: observed.flow_sizes,
        iat: observed.iat,
    };
    let report = validate(
        &schedule.epochs(),
        &set,
        &model,
        &layout,
        schedule.meta.epoch_length,
        QQ_POINTS,
    )?;
    Ok(report)
}

fn points_csv(points: &[(f64, f64)], header: &str) -> String {
    let mut out = String::with_capacity(points.len() * 16 + header.len() + 1);
    out.push_str(header);
    out.push('\n');
    for &(a, b) in points {
        let _ = writeln!(out, "{a},{b}");
    }
    out
}

/// Writes `validation.json` plus per-comparison `qq_*.csv` / `pp_*.csv`
/// files into `dir`.
pub fn write_validation_outputs(dir: &Path, report: &ValidationReport) -> Result<()> {
    std::fs::create_dir_all(dir)
        .with_context(|| format!("creating output directory {}", dir.display()))?;
    let json = serde_json::to_string_pretty(report)?;
    std::fs::write(dir.join("validation.json"), json)?;
    let comparisons: [(&str, &ComparisonReport); 6] = [
        ("volume_intra", &report.volume_intra),
        ("volume_inter", &report.volume_inter),
        ("partners_intra", &report.partners_intra),
        ("partners_inter", &report.partners_inter),
        ("flow_size", &report.flow_size),
        ("iat", &report.iat),
    ];
    for (name, cmp) in comparisons {
        std::fs::write(
            dir.join(format!("qq_{name}.csv")),
            points_csv(&cmp.qq_points, "quantile_generated,quantile_observed"),
        )?;
        std::fs::write(
            dir.join(format!("pp_{name}.csv")),
            points_csv(&cmp.pp_points, "cum_prob_generated,cum_prob_observed"),
        )?;
    }
    Ok(())
}

/// One-line human summary of a validation report.
pub fn summarize(report: &ValidationReport) -> String {
    let mut out = String::new();
    let rows = [
        ("bytes intra", &report.volume_intra, false),
        ("bytes inter", &report.volume_inter, false),
        ("partners intra", &report.partners_intra, false),
        ("partners inter", &report.partners_inter, false),
        ("flow sizes", &report.flow_size, false),
        ("inter-arrivals", &report.iat, report.iat_expected_mismatch),
    ];
    for (name, cmp, expected_mismatch) in rows {
        let note = if expected_mismatch {
            "  (expected mismatch: arrival gaps are rescaled for volume balance)"
        } else {
            ""
        };
        let _ = writeln!(
            out,
            "{name:15} KS = {:.4}  Topsoe = {:.4}{note}",
            cmp.ks_sup_distance, cmp.topsoe
        );
    }
        let _ = write!(
        out,
        "epochs = {}, flows = {}",
        report.epoch_count, report.flow_count
    );
    out
}
