//! End-to-end schedule generation.
//!
//! One run: deconvolve the observed entry-volume distributions into payload
//! volumes, extract payload flow sizes from the observed flow sizes, then
//! per epoch build a payload traffic matrix, generate a volume-balanced
//! flow set, and map the flows onto matrix entries. Epochs are independent
//! and generated in parallel; every epoch derives its own random streams
//! from (seed, epoch, stage), so results do not depend on thread timing.

use crate::config::{MapperStrategy, ObservedInputs, RunConfig};
use crate::schedule::{EpochMeta, Schedule, ScheduleMeta};
use anyhow::{Context, Result};
use rackload::deconv::{deconvolve, DeconvolutionConfig};
use rackload::flowset::{create_flowset, MAX_ATTEMPTS};
use rackload::mapper::{map_drr, map_random, mapping_quality, MappedFlow};
use rackload::payload::FlowSizePmf;
use rackload::rng::{epoch_rng, Stage};
use rackload::tm::{build_tm, TrafficMatrix, TrafficProfile};
use rayon::prelude::*;

/// Schedule plus the per-epoch payload matrices (kept only when asked).
pub struct PipelineOutput {
    pub schedule: Schedule,
    pub tms: Option<Vec<TrafficMatrix>>,
}

/// Derives the generation profile from the observed inputs: payload volume
/// distributions by deconvolution, payload flow sizes by ACK extraction.
pub fn derive_profile(cfg: &RunConfig, observed: &ObservedInputs) -> Result<TrafficProfile> {
    let model = cfg.ack_model()?;
    let dcfg = DeconvolutionConfig::default();
    let volume_intra = deconvolve(&observed.bytes_intra, &model, &dcfg)
        .context("deconvolver: intra-rack entry volumes")?;
    let volume_inter = deconvolve(&observed.bytes_inter, &model, &dcfg)
        .context("deconvolver: inter-rack entry volumes")?;
    // Extraction runs on the raw curve, where ACK mass sits on the
    // ACK-size lattice; the fixed size adjustment lands on the result.
    let obs_pmf = FlowSizePmf::from_distribution(&observed.flow_sizes_raw, model)
        .context("payload extractor: discretizing observed flow sizes")?;
    let (pl_pmf, _stats) = obs_pmf.infer_payload_sizes();
    let flow_sizes = pl_pmf
        .to_step_distribution()
        .context("payload extractor: empty payload flow-size distribution")?
        .shift_values(observed.flow_size_shift);
    Ok(TrafficProfile {
        partners_intra: observed.partners_intra.clone(),
        partners_inter: observed.partners_inter.clone(),
        volume_intra,
        volume_inter,
        flow_sizes,
        iat: observed.iat.clone(),
        model,
    })
}

struct EpochResult {
    flows: Vec<MappedFlow>,
    meta: EpochMeta,
    tm: Option<TrafficMatrix>,
}

fn generate_epoch(
    cfg: &RunConfig,
    profile: &TrafficProfile,
    epoch: usize,
    keep_tm: bool,
) -> Result<EpochResult> {
    let layout = cfg.layout()?;
    let mut tm_rng = epoch_rng(cfg.seed, epoch as u64, Stage::Tm);
    let tm = build_tm(
        profile,
        &layout,
        cfg.epoch_length,
        &mut tm_rng,
        cfg.direction_rule(),
    );

    let mut fs_rng = epoch_rng(cfg.seed, epoch as u64, Stage::Flowset);
    let flowset = create_flowset(
        &tm,
        &profile.flow_sizes,
        &profile.iat,
        &mut fs_rng,
        MAX_ATTEMPTS,
    )
    .with_context(|| format!("epoch {epoch}: flowset"))?;

    let mut map_rng = epoch_rng(cfg.seed, epoch as u64, Stage::Mapper);
    let mapped = match cfg.mapper {
        MapperStrategy::Drr => map_drr(&flowset.flows, &tm, &mut map_rng, cfg.drr_params()),
        MapperStrategy::Random => map_random(&flowset.flows, &tm, &mut map_rng),
    };
    let topsoe = mapping_quality(&tm, &mapped)
        .with_context(|| format!("epoch {epoch}: mapper quality"))?;

    let offset = epoch as f64 * cfg.epoch_length;
    let flows: Vec<MappedFlow> = mapped
        .into_iter()
        .map(|f| MappedFlow {
            start_time: offset + f.start_time,
            ..f
        })
        .collect();
    Ok(EpochResult {
        meta: EpochMeta {
            epoch,
            epsilon: flowset.epsilon,
            iat_scale: flowset.iat_scale,
            attempts: flowset.attempts,
            topsoe,
            flows: flows.len(),
        },
        flows,
        tm: keep_tm.then_some(tm),
    })
}

/// Runs the full pipeline for every epoch of the configured duration.
pub fn run_pipeline(cfg: &RunConfig, keep_tms: bool) -> Result<PipelineOutput> {
    let epochs = cfg.epochs()?;
    let observed = cfg.load_observed().context("loading inputs")?;
    let profile = derive_profile(cfg, &observed)?;
    let digest = cfg.digest()?;

    let results: Vec<EpochResult> = (0..epochs)
        .into_par_iter()
        .map(|e| generate_epoch(cfg, &profile, e, keep_tms))
        .collect::<Result<Vec<_>>>()?;

    let mut flows = Vec::with_capacity(results.iter().map(|r| r.flows.len()).sum());
    let mut metas = Vec::with_capacity(epochs);
    let mut tms = keep_tms.then(Vec::new);
    for r in results {
        flows.extend(r.flows);
        metas.push(r.meta);
        if let (Some(tms), Some(tm)) = (tms.as_mut(), r.tm) {
            tms.push(tm);
        }
    }
    Schedule::sort_flows(&mut flows);

    Ok(PipelineOutput {
        schedule: Schedule {
            meta: ScheduleMeta {
                tool_version: env!("CARGO_PKG_VERSION").to_string(),
                seed: cfg.seed,
                config_digest: digest,
                racks: cfg.racks,
                hosts_per_rack: cfg.hosts_per_rack,
                epoch_length: cfg.epoch_length,
                duration: cfg.duration,
                epochs: metas,
            },
            flows,
        },
        tms,
    })
}
