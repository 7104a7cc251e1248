//! Run configuration: scale, seed, model parameters, and the six input
//! distribution files.

use anyhow::{bail, Context, Result};
use rackload::ack::AckModel;
use rackload::degseq::RackLayout;
use rackload::dist::{Interp, StepDistribution, SupportKind};
use rackload::io::{load_distribution, FLOW_SIZE_SHIFT_BYTES, VOLUME_SHIFT_BYTES};
use rackload::mapper::DrrParams;
use rackload::tm::DirectionRule;
use serde::Serialize;
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};

/// Which strategy assigns flows to matrix entries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum MapperStrategy {
    Drr,
    Random,
}

impl std::str::FromStr for MapperStrategy {
    type Err = anyhow::Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "drr" => Ok(Self::Drr),
            "random" => Ok(Self::Random),
            other => bail!("unknown mapper strategy '{other}' (expected drr|random)"),
        }
    }
}

/// Paths of the six observed input distributions.
#[derive(Debug, Clone, Serialize)]
pub struct InputPaths {
    pub bytes_intra: PathBuf,
    pub bytes_inter: PathBuf,
    pub partners_intra: PathBuf,
    pub partners_inter: PathBuf,
    pub flow_sizes: PathBuf,
    pub iat: PathBuf,
}

impl InputPaths {
    fn all(&self) -> [(&'static str, &Path); 6] {
        [
            ("bytes_intra", &self.bytes_intra),
            ("bytes_inter", &self.bytes_inter),
            ("partners_intra", &self.partners_intra),
            ("partners_inter", &self.partners_inter),
            ("flow_sizes", &self.flow_sizes),
            ("iat", &self.iat),
        ]
    }
}

/// Everything one generation run depends on.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub racks: usize,
    pub hosts_per_rack: usize,
    /// Total schedule length in seconds; a positive multiple of the epoch.
    pub duration: f64,
    pub epoch_length: f64,
    pub seed: u64,
    pub r: f64,
    pub mss: u64,
    pub ack_packet_size: u64,
    pub inputs: InputPaths,
    pub mapper: MapperStrategy,
    pub alpha: f64,
    pub omega: f64,
    /// Apply the fixed digitized-input adjustments (flow sizes +219 bytes,
    /// entry volumes +1000 bytes).
    pub input_adjustments: bool,
    /// Read byte/seconds CDFs as pure step functions instead of
    /// piecewise-linear curves.
    pub step_cdfs: bool,
    /// Populate both directions of every communication edge instead of one
    /// uniformly chosen direction.
    pub both_directions: bool,
}

impl RunConfig {
    pub fn layout(&self) -> Result<RackLayout> {
        RackLayout::new(self.racks * self.hosts_per_rack, self.hosts_per_rack)
            .context("invalid rack layout")
    }

    pub fn ack_model(&self) -> Result<AckModel> {
        AckModel::new(self.r, self.mss, self.ack_packet_size).context("invalid ACK model")
    }

    pub fn epochs(&self) -> Result<usize> {
        let n = self.duration / self.epoch_length;
        if self.duration <= 0.0 || self.epoch_length <= 0.0 || (n - n.round()).abs() > 1e-9 {
            bail!(
                "duration {} must be a positive multiple of epoch_length {}",
                self.duration,
                self.epoch_length
            );
        }
        Ok(n.round() as usize)
    }

    pub fn drr_params(&self) -> DrrParams {
        DrrParams {
            alpha: self.alpha,
            omega: self.omega,
        }
    }

    pub fn direction_rule(&self) -> DirectionRule {
        if self.both_directions {
            DirectionRule::Both
        } else {
            DirectionRule::OneUniform
        }
    }

    fn value_interp(&self) -> Interp {
        if self.step_cdfs {
            Interp::Step
        } else {
            Interp::Linear
        }
    }

    /// Digest over the canonical config serialization and the contents of
    /// every referenced distribution file, so any input edit changes the
    /// schedule provenance.
    pub fn digest(&self) -> Result<String> {
        let mut hasher = Sha256::new();
        let canon = serde_json::to_string(self).context("serializing config")?;
        hasher.update(canon.as_bytes());
        for (name, path) in self.inputs.all() {
            let bytes = std::fs::read(path)
                .with_context(|| format!("reading {name} input {}", path.display()))?;
            hasher.update([0u8]);
            hasher.update(name.as_bytes());
            hasher.update([0u8]);
            hasher.update(&bytes);
        }
        Ok(hex::encode(hasher.finalize()))
    }

    /// Loads the six observed distributions, applying the input
    /// adjustments when enabled. Count distributions are always read with
    /// step semantics; a count-valued CDF is inherently atomic.
    ///
    /// The flow-size shift is exposed separately rather than baked into a
    /// shifted curve: ACK-flow mass in the observed data sits on the
    /// ACK-size lattice, and shifting the curve before extraction would
    /// move that mass off every position the extraction algorithm
    /// subtracts at. The pipeline therefore extracts payload sizes from
    /// the raw curve and applies the shift to the result.
    pub fn load_observed(&self) -> Result<ObservedInputs> {
        let vi = self.value_interp();
        let load = |path: &Path, kind, interp| {
            load_distribution(path, kind, interp)
                .with_context(|| format!("loading distribution {}", path.display()))
        };
        let mut bytes_intra = load(&self.inputs.bytes_intra, SupportKind::Bytes, vi)?;
        let mut bytes_inter = load(&self.inputs.bytes_inter, SupportKind::Bytes, vi)?;
        let partners_intra = load(
            &self.inputs.partners_intra,
            SupportKind::Count,
            Interp::Step,
        )?;
        let partners_inter = load(
            &self.inputs.partners_inter,
            SupportKind::Count,
            Interp::Step,
        )?;
        let flow_sizes_raw = load(&self.inputs.flow_sizes, SupportKind::Bytes, vi)?;
        let iat = load(&self.inputs.iat, SupportKind::Seconds, vi)?;
        let flow_size_shift = if self.input_adjustments {
            FLOW_SIZE_SHIFT_BYTES
        } else {
            0.0
        };
        if self.input_adjustments {
            bytes_intra = bytes_intra.shift_values(VOLUME_SHIFT_BYTES);
            bytes_inter = bytes_inter.shift_values(VOLUME_SHIFT_BYTES);
        }
        let flow_sizes = flow_sizes_raw.shift_values(flow_size_shift);
        Ok(ObservedInputs {
            bytes_intra,
            bytes_inter,
            partners_intra,
            partners_inter,
            flow_sizes,
            flow_sizes_raw,
            flow_size_shift,
            iat,
        })
    }
}

/// The observed distributions after input preparation — what the pipeline
/// consumes and what validation compares against.
#[derive(Debug, Clone)]
pub struct ObservedInputs {
    pub bytes_intra: StepDistribution,
    pub bytes_inter: StepDistribution,
    pub partners_intra: StepDistribution,
    pub partners_inter: StepDistribution,
    /// Flow sizes with the fixed adjustment applied; the validation
    /// reference.
    pub flow_sizes: StepDistribution,
    /// Flow sizes as read from the file; the payload extractor works here.
    pub flow_sizes_raw: StepDistribution,
    pub flow_size_shift: f64,
    pub iat: StepDistribution,
}
