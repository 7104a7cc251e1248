use rackload::flowset::create_flowset;
use rackload::mapper::{map_drr, map_random};
use rackload::rng::{epoch_rng, Stage};
use rackload::tm::build_tm;
use rackload_cli::config::{InputPaths, MapperStrategy, RunConfig};
use rackload_cli::pipeline::derive_profile;
use std::collections::BTreeMap;
use std::path::PathBuf;

fn main() {
    let data = PathBuf::from("data");
    let cfg = RunConfig {
        racks: 72, hosts_per_rack: 20, duration: 20.0, epoch_length: 10.0, seed: 11,
        r: 2.5, mss: 1448, ack_packet_size: 66,
        inputs: InputPaths {
            bytes_intra: data.join("bytes_obs_intra.csv"),
            bytes_inter: data.join("bytes_obs_inter.csv"),
            partners_intra: data.join("partners_obs_intra.csv"),
            partners_inter: data.join("partners_obs_inter.csv"),
            flow_sizes: data.join("flow_sizes_obs.csv"),
            iat: data.join("flow_iat_obs.csv"),
        },
        mapper: MapperStrategy::Drr, alpha: 0.1, omega: 100.0,
        input_adjustments: true, step_cdfs: false, both_directions: false,
    };
    let observed = cfg.load_observed().unwrap();
    let profile = derive_profile(&cfg, &observed).unwrap();
    let layout = cfg.layout().unwrap();
    let mut rng = epoch_rng(11, 0, Stage::Tm);
    let tm = build_tm(&profile, &layout, 10.0, &mut rng, Default::default());
    let mut rng = epoch_rng(11, 0, Stage::Flowset);
    let fs = create_flowset(&tm, &profile.flow_sizes, &profile.iat, &mut rng, 50).unwrap();
    for (label, mapped) in [
        ("drr   ", { let mut r = epoch_rng(11, 0, Stage::Mapper); map_drr(&fs.flows, &tm, &mut r, Default::default()) }),
        ("random", { let mut r = epoch_rng(11, 0, Stage::Mapper); map_random(&fs.flows, &tm, &mut r) }),
    ] {
        let mut sums: BTreeMap<(u32,u32), f64> = BTreeMap::new();
        for f in &mapped { *sums.entry((f.src,f.dst)).or_insert(0.0) += f.size as f64; }
        println!("--- {label}");
        for (lo, hi) in [(0.0, 1e4), (1e4, 1e5), (1e5, 1e6), (1e6, 1e7), (1e7, 1e12)] {
            let mut fill = Vec::new();
            let mut got_total = 0.0; let mut want_total = 0.0;
            for (&k, &v) in tm.entries() {
                if v >= lo && v < hi {
                    let got = sums.get(&k).copied().unwrap_or(0.0);
                    fill.push(got / v);
                    got_total += got; want_total += v;
                }
            }
            fill.sort_by(|a,b| a.partial_cmp(b).unwrap());
            if fill.is_empty() { continue; }
            println!("  entries [{lo:9.0},{hi:9.0}): n {:5}  fill p10 {:.2} p50 {:.2} p90 {:.2}  bytes ratio {:.3}",
                fill.len(), fill[fill.len()/10], fill[fill.len()/2], fill[fill.len()*9/10], got_total/want_total);
        }
    }
}
// appended: intra/inter split analysis in main via second fn? quick hack below
