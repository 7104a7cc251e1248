//! Dev-only calibration harness: synthesizes the example input
//! distributions, writes them to data/, and measures the acceptance-facing
//! quantities (deconvolution round trip, extraction round trip, pair
//! fractions, flowset convergence, validation KS values).

use rackload::ack::AckModel;
use rackload::deconv::{deconvolve, reconvolve_check, DeconvolutionConfig};
use rackload::dist::{ks_distance, ks_distance_above, Interp, StepDistribution, SupportKind};
use rackload::io::distribution_to_csv;
use rackload::payload::FlowSizePmf;
use rackload_cli::config::{InputPaths, MapperStrategy, RunConfig};
use rackload_cli::pipeline::run_pipeline;
use rackload_cli::report::run_validation;
use std::path::PathBuf;
use std::time::Instant;

fn lin(points: &[(f64, f64)], kind: SupportKind) -> StepDistribution {
    StepDistribution::new(points.to_vec(), kind, Interp::Linear).unwrap()
}

fn step(points: &[(f64, f64)], kind: SupportKind) -> StepDistribution {
    StepDistribution::new(points.to_vec(), kind, Interp::Step).unwrap()
}

/// Digitizes a CDF at n log-spaced knots, dropping ~flat increments.
fn digitize(d: &StepDistribution, n: usize) -> StepDistribution {
    let lo = d.min_value().max(1.0);
    let hi = d.max_value();
    let mut points: Vec<(f64, f64)> = Vec::new();
    let first_cum = d.cdf(lo);
    points.push((lo, first_cum));
    for i in 1..n {
        let v = lo * (hi / lo).powf(i as f64 / n as f64);
        let c = d.cdf(v);
        if let Some(&(pv, pc)) = points.last() {
            if v <= pv * 1.0001 || c <= pc + 1e-4 {
                continue;
            }
        }
        points.push((v, c));
    }
    if points.last().unwrap().1 < 1.0 {
        points.push((hi, 1.0));
    } else {
        points.last_mut().unwrap().1 = 1.0;
    }
    lin(&points, d.kind())
}

/// The observed flow-size curve: a 50/50 payload/ACK mixture digitized on a
/// log grid. The ACK comb below ~3 KB is read at deliberately coarse
/// resolution (as a low-res plot would be), which keeps its mass spread
/// across neighboring ACK-lattice cells.
fn mixture_obs(pl: &StepDistribution, ack: &AckModel, n: usize) -> StepDistribution {
    let bytes_per_ack = ack.bytes_per_ack();
    let unit = ack.ack_packet_size as f64;
    let cdf_mix =
        |v: f64| 0.5 * pl.cdf(v) + 0.5 * pl.cdf(bytes_per_ack * (v / unit).floor());
    let lo = unit;
    let hi = pl.max_value();
    let n_knots = n;
    let mut points: Vec<(f64, f64)> = vec![(lo, cdf_mix(lo))];
    for i in 1..=n_knots {
        let v = lo * (hi / lo).powf(i as f64 / n_knots as f64);
        let c = cdf_mix(v);
        if let Some(&(pv, pc)) = points.last() {
            let min_gap = if v < 3000.0 { 550.0 } else { 0.05 * v };
            if v <= pv + min_gap || c <= pc + 2e-4 {
                continue;
            }
        }
        points.push((v, c));
    }
    points.last_mut().unwrap().1 = 1.0;
    lin(&points, SupportKind::Bytes)
}

fn main() {
    let model = AckModel::default();
    let beta = model.beta();
    let data = PathBuf::from("data");
    std::fs::create_dir_all(&data).unwrap();

    // Payload entry volumes (ground truth for synthesizing the observed
    // files). Intra: small or large. Inter: small or medium.
    let x_intra = lin(
        &[
            (1e3, 0.0),
            (1e4, 0.22),
            (1e5, 0.36),
            (1e6, 0.45),
            (5e6, 0.55),
            (2e7, 0.78),
            (5e7, 0.94),
            (1e8, 1.0),
        ],
        SupportKind::Bytes,
    );
    let x_inter = lin(
        &[
            (1e3, 0.0),
            (1e4, 0.25),
            (1e5, 0.42),
            (5e5, 0.55),
            (2e6, 0.65),
            (8e6, 0.80),
            (2e7, 0.92),
            (5e7, 1.0),
        ],
        SupportKind::Bytes,
    );
    println!("mean X intra {:.3e}  inter {:.3e}", x_intra.mean(), x_inter.mean());

    // Observed = forward convolution X + beta*X', digitized.
    let z_intra = digitize(&reconvolve_check(&x_intra, &model), 64);
    let z_inter = digitize(&reconvolve_check(&x_inter, &model), 64);
    println!(
        "mean Z intra {:.3e}  inter {:.3e} (knots {} / {})",
        z_intra.mean(),
        z_inter.mean(),
        z_intra.points().len(),
        z_inter.points().len()
    );

    // Payload flow sizes, then the observed L2 mixture.
    let s_pl = lin(
        &[
            (300.0, 0.0),
            (600.0, 0.18),
            (1200.0, 0.35),
            (2500.0, 0.48),
            (5000.0, 0.58),
            (1e4, 0.66),
            (2e4, 0.73),
            (5.4e4, 0.80),
            (1.5e5, 0.865),
            (4e5, 0.925),
            (1e6, 0.975),
            (3e6, 1.0),
        ],
        SupportKind::Bytes,
    );
    println!("mean S_PL {:.3e}", s_pl.mean());
    let s_obs = mixture_obs(&s_pl, &model, 160);
    println!("mean S_obs {:.3e} (knots {})", s_obs.mean(), s_obs.points().len());

    // Partner counts.
    let n_intra = step(
        &[
            (0.0, 0.25),
            (1.0, 0.60),
            (2.0, 0.80),
            (3.0, 0.90),
            (4.0, 0.94),
            (11.0, 0.96),
            (12.0, 0.98),
            (13.0, 0.99),
            (14.0, 0.995),
            (15.0, 1.0),
        ],
        SupportKind::Count,
    );
    let n_inter = step(
        &[
            (0.0, 0.28),
            (1.0, 0.42),
            (2.0, 0.52),
            (3.0, 0.60),
            (4.0, 0.66),
            (5.0, 0.71),
            (6.0, 0.75),
            (8.0, 0.80),
            (10.0, 0.84),
            (13.0, 0.875),
            (16.0, 0.90),
            (20.0, 0.925),
            (25.0, 0.945),
            (32.0, 0.96),
            (40.0, 0.971),
            (50.0, 0.98),
            (65.0, 0.987),
            (80.0, 0.992),
            (100.0, 0.996),
            (120.0, 1.0),
        ],
        SupportKind::Count,
    );
    println!(
        "mean N intra {:.3}  pair frac {:.4}",
        n_intra.mean(),
        n_intra.mean() / 19.0
    );
    println!(
        "mean N inter {:.3}  pair frac {:.5}",
        n_inter.mean(),
        n_inter.mean() * 1440.0 / 2.0 / 1_022_400.0
    );

    let iat = lin(
        &[
            (1e-6, 0.0),
            (5e-6, 0.30),
            (1e-5, 0.55),
            (2e-5, 0.75),
            (5e-5, 0.90),
            (1e-4, 0.96),
            (5e-4, 0.99),
            (1e-3, 1.0),
        ],
        SupportKind::Seconds,
    );
    println!("mean IAT {:.3e}", iat.mean());

    // Write everything.
    let write = |name: &str, d: &StepDistribution| {
        std::fs::write(data.join(name), distribution_to_csv(d)).unwrap();
    };
    write("bytes_obs_intra.csv", &z_intra);
    write("bytes_obs_inter.csv", &z_inter);
    write("flow_sizes_obs.csv", &s_obs);
    write("partners_obs_intra.csv", &n_intra);
    write("partners_obs_inter.csv", &n_inter);
    write("flow_iat_obs.csv", &iat);
    println!("--- files written; measuring ---");

    // Criterion 1: deconvolution round trip on the prepared inter input.
    let z_prepared = z_inter.shift_values(1000.0);
    let t0 = Instant::now();
    let x_hat = deconvolve(&z_prepared, &model, &DeconvolutionConfig::default()).unwrap();
    let z_again = reconvolve_check(&x_hat, &model);
    let ks1 = ks_distance(&z_again, &z_prepared);
    println!(
        "C1 deconvolution round trip: KS = {:.4} in {:?} (mean ratio {:.4})",
        ks1,
        t0.elapsed(),
        x_hat.mean() * (1.0 + beta) / z_prepared.mean()
    );
    let zi_prepared = z_intra.shift_values(1000.0);
    let xi_hat = deconvolve(&zi_prepared, &model, &DeconvolutionConfig::default()).unwrap();
    let zi_again = reconvolve_check(&xi_hat, &model);
    println!(
        "   intra round trip:        KS = {:.4}",
        ks_distance(&zi_again, &zi_prepared)
    );

    // Criterion 2: extraction round trip above 1000 bytes (raw space).
    let pmf = FlowSizePmf::from_distribution(&s_obs, model).unwrap();
    let (pl_pmf, stats) = pmf.infer_payload_sizes();
    let l2 = pl_pmf.implied_l2_flow_sizes(0.5).unwrap();
    let obs_step = pmf.to_step_distribution().unwrap();
    println!(
        "C2 extraction round trip: KS>1000 = {:.4}  (full KS {:.4}, clamped {} selfsub {})",
        ks_distance_above(&l2, &obs_step, 1000.0),
        ks_distance(&l2, &obs_step),
        stats.clamped_bins,
        stats.self_subtractions
    );
    println!("   mean S_PL recovered {:.3e}", pl_pmf.mean());
    for v in [300.0, 1000.0, 2000.0, 5000.0, 2e4, 1e5, 3e5, 1e6, 5e6] {
        println!(
            "   v={v:9.0}: F_l2 {:.4}  F_obs {:.4}  F_plrec {:.4}  F_pltrue {:.4}",
            l2.cdf(v),
            obs_step.cdf(v),
            pl_pmf.to_step_distribution().unwrap().cdf(v),
            s_pl.cdf(v),
        );
    }

    // Small pipeline run at paper scale: 2 epochs, then validation.
    let cfg = RunConfig {
        racks: 72,
        hosts_per_rack: 20,
        duration: 20.0,
        epoch_length: 10.0,
        seed: 11,
        r: 2.5,
        mss: 1448,
        ack_packet_size: 66,
        inputs: InputPaths {
            bytes_intra: data.join("bytes_obs_intra.csv"),
            bytes_inter: data.join("bytes_obs_inter.csv"),
            partners_intra: data.join("partners_obs_intra.csv"),
            partners_inter: data.join("partners_obs_inter.csv"),
            flow_sizes: data.join("flow_sizes_obs.csv"),
            iat: data.join("flow_iat_obs.csv"),
        },
        mapper: MapperStrategy::Drr,
        alpha: 0.1,
        omega: 100.0,
        input_adjustments: true,
        step_cdfs: false,
        both_directions: false,
    };
    let t0 = Instant::now();
    let out = run_pipeline(&cfg, true).unwrap();
    println!(
        "pipeline 2 epochs in {:?}: flows {} ",
        t0.elapsed(),
        out.schedule.flows.len()
    );
    for em in &out.schedule.meta.epochs {
        println!(
            "  epoch {}: flows {} eps {:.4} attempts {} iat_scale {:.3} topsoe {:.5}",
            em.epoch, em.flows, em.epsilon, em.attempts, em.iat_scale, em.topsoe
        );
    }
    for tm in out.tms.as_ref().unwrap() {
        let st = tm.pair_stats();
        println!(
            "  C6 pair fractions: intra {:.4} (target 0.11 +-20%)  inter {:.5} (target 0.005 +-20%)",
            st.intra_fraction(),
            st.inter_fraction()
        );
    }
    let t0 = Instant::now();
    let report = run_validation(&cfg, &out.schedule).unwrap();
    println!("validation in {:?}", t0.elapsed());
    println!(
        "C7 volume_inter KS {:.4} (<0.05 above 1e4)  volume_intra KS {:.4} (<0.10)",
        report.volume_inter.ks_sup_distance, report.volume_intra.ks_sup_distance
    );
    println!(
        "C7 partners_inter KS {:.4} (<0.05)  partners_intra KS {:.4} (<0.10)",
        report.partners_inter.ks_sup_distance, report.partners_intra.ks_sup_distance
    );
    println!(
        "   flow_size KS {:.4}   iat KS {:.4} (expected mismatch)",
        report.flow_size.ks_sup_distance, report.iat.ks_sup_distance
    );
    // Restricted (criterion-form) volume comparisons.
    {
        use rackload::validate::{synthesize_l2_tm, L2Model};
        use std::collections::BTreeMap;
        let layout = cfg.layout().unwrap();
        let observed = cfg.load_observed().unwrap();
        let model = L2Model { ack: cfg.ack_model().unwrap(), ..L2Model::default() };
        let mut vol_intra: Vec<f64> = Vec::new();
        let mut vol_inter: Vec<f64> = Vec::new();
        for flows in out.schedule.epochs() {
            let tmg = synthesize_l2_tm(&flows, &model, &layout, 10.0);
            let mut pair_sums: BTreeMap<(u32, u32), f64> = BTreeMap::new();
            for (&(s, d), &v) in tmg.entries() {
                let key = if s < d { (s, d) } else { (d, s) };
                *pair_sums.entry(key).or_insert(0.0) += v;
            }
            for (&(a, b), &v) in &pair_sums {
                if layout.same_rack(a as usize, b as usize) {
                    vol_intra.push(v);
                } else {
                    vol_inter.push(v);
                }
            }
        }
        let gi = rackload::dist::empirical_cdf(&vol_intra, SupportKind::Bytes).unwrap();
        let ge = rackload::dist::empirical_cdf(&vol_inter, SupportKind::Bytes).unwrap();
        println!(
            "C7 restricted: vol_inter KS>1e4 {:.4} (<0.05)  vol_intra KS>1e4 {:.4} (<0.10)",
            ks_distance_above(&ge, &observed.bytes_inter, 1e4),
            ks_distance_above(&gi, &observed.bytes_intra, 1e4)
        );
        for v in [1e4, 3e4, 1e5, 3e5, 1e6, 1e7, 5e7] {
            println!(
                "   inter v={v:9.0}: F_gen {:.4} F_obs {:.4} | intra F_gen {:.4} F_obs {:.4}",
                ge.cdf(v),
                observed.bytes_inter.cdf(v),
                gi.cdf(v),
                observed.bytes_intra.cdf(v)
            );
        }
    }
}
