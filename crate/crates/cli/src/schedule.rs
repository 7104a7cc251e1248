//! Schedule persistence.
//!
//! A schedule file is one `#`-prefixed JSON meta header line followed by a
//! CSV body `start_seconds,src_id,dst_id,payload_bytes`, sorted by start
//! time. The format is diffable, parseable from any language, and two runs
//! with the same seed produce byte-identical files.

use anyhow::{bail, Context, Result};
use rackload::mapper::MappedFlow;
use serde::{Deserialize, Serialize};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

/// Per-epoch generation diagnostics kept in the schedule header.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct EpochMeta {
    pub epoch: usize,
    /// Volume imbalance of the accepted flow set, `s_m / s_f`.
    pub epsilon: f64,
    pub iat_scale: f64,
    pub attempts: u32,
    /// Topsøe distance between the demanded and realized matrices.
    pub topsoe: f64,
    pub flows: usize,
}

/// Schedule provenance.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ScheduleMeta {
    pub tool_version: String,
    pub seed: u64,
    pub config_digest: String,
    pub racks: usize,
    pub hosts_per_rack: usize,
    pub epoch_length: f64,
    pub duration: f64,
    pub epochs: Vec<EpochMeta>,
}

/// The final ordered list of payload transmissions plus provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct Schedule {
    pub meta: ScheduleMeta,
    /// Flows with absolute start times, sorted by
    /// (start_time, src, dst, size).
    pub flows: Vec<MappedFlow>,
}

impl Schedule {
    pub fn sort_flows(flows: &mut [MappedFlow]) {
        flows.sort_by(|a, b| {
            a.start_time
                .partial_cmp(&b.start_time)
                .unwrap()
                .then(a.src.cmp(&b.src))
                .then(a.dst.cmp(&b.dst))
                .then(a.size.cmp(&b.size))
        });
    }

    pub fn write_to(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path)
            .with_context(|| format!("creating schedule file {}", path.display()))?;
        let mut w = BufWriter::new(file);
        let meta = serde_json::to_string(&self.meta)?;
        writeln!(w, "#{meta}")?;
        writeln!(w, "start_seconds,src_id,dst_id,payload_bytes")?;
        for f in &self.flows {
            writeln!(w, "{},{},{},{}", f.start_time, f.src, f.dst, f.size)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_from(path: &Path) -> Result<Schedule> {
        let file = std::fs::File::open(path)
            .with_context(|| format!("opening schedule file {}", path.display()))?;
        let mut lines = BufReader::new(file).lines();
        let header = match lines.next() {
            Some(line) => line?,
            None => bail!("{}: empty schedule file", path.display()),
        };
        let Some(json) = header.strip_prefix('#') else {
            bail!("{}:1: expected '#'-prefixed JSON meta header", path.display());
        };
        let meta: ScheduleMeta = serde_json::from_str(json)
            .with_context(|| format!("{}:1: malformed meta header", path.display()))?;
        let mut flows = Vec::new();
        for (i, line) in lines.enumerate() {
            let line = line?;
            let lineno = i + 2;
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if lineno == 2 && line.starts_with("start_seconds") {
                continue;
            }
            let mut cols = line.split(',');
            let mut field = |what: &str| -> Result<&str> {
                cols.next()
                    .ok_or_else(|| anyhow::anyhow!("{}:{lineno}: missing {what}", path.display()))
            };
            let start_time: f64 = field("start_seconds")?
                .parse()
                .with_context(|| format!("{}:{lineno}: bad start_seconds", path.display()))?;
            let src: u32 = field("src_id")?
                .parse()
                .with_context(|| format!("{}:{lineno}: bad src_id", path.display()))?;
            let dst: u32 = field("dst_id")?
                .parse()
                .with_context(|| format!("{}:{lineno}: bad dst_id", path.display()))?;
            let size: u64 = field("payload_bytes")?
                .parse()
                .with_context(|| format!("{}:{lineno}: bad payload_bytes", path.display()))?;
            flows.push(MappedFlow {
                start_time,
                src,
                dst,
                size,
            });
        }
        Ok(Schedule { meta, flows })
    }

    /// Splits the flows back into per-epoch groups by start time.
    pub fn epochs(&self) -> Vec<Vec<MappedFlow>> {
        let n = self.meta.epochs.len().max(1);
        let mut out = vec![Vec::new(); n];
        for f in &self.flows {
            let idx = ((f.start_time / self.meta.epoch_length) as usize).min(n - 1);
            out[idx].push(*f);
        }
        out
    }
}
