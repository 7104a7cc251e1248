use rackload::flowset::create_flowset;
use rackload::mapper::map_drr;
use rackload::rng::{epoch_rng, Stage};
use rackload::tm::build_tm;
use rackload::dist::{empirical_cdf, SupportKind};
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
    // intra ENTRY values vs observed (sanity of volumes themselves)
    let intra_entries: Vec<f64> = tm.entries().filter(|(&(s,d), _)| layout.same_rack(s as usize, d as usize)).map(|(_, &v)| v).collect();
    let inter_entries: Vec<f64> = tm.entries().filter(|(&(s,d), _)| !layout.same_rack(s as usize, d as usize)).map(|(_, &v)| v).collect();
    println!("intra edges {} inter edges {}", intra_entries.len(), inter_entries.len());
    let gi = empirical_cdf(&intra_entries, SupportKind::Bytes).unwrap();
    println!("intra ENTRY dist vs obs_intra (+1000):");
    for v in [1e4, 3e4, 1e5, 1e6, 1e7] {
        println!("  v={v:9.0}: F_entry {:.4} F_obs {:.4} F_xhat {:.4}", gi.cdf(v), observed.bytes_intra.cdf(v), profile.volume_intra.cdf(v));
    }
    let mut rng2 = epoch_rng(11, 0, Stage::Flowset);
    let fs = create_flowset(&tm, &profile.flow_sizes, &profile.iat, &mut rng2, 50).unwrap();
    let mut rng3 = epoch_rng(11, 0, Stage::Mapper);
    let mapped = map_drr(&fs.flows, &tm, &mut rng3, Default::default());
    let mut sums: BTreeMap<(u32,u32), f64> = BTreeMap::new();
    for f in &mapped { *sums.entry((f.src,f.dst)).or_insert(0.0) += f.size as f64; }
    for (label, intra) in [("intra", true), ("inter", false)] {
        let mut fills = Vec::new();
        for (&k, &v) in tm.entries() {
            if layout.same_rack(k.0 as usize, k.1 as usize) == intra && v >= 1e5 && v < 1e6 {
                fills.push(sums.get(&k).copied().unwrap_or(0.0) / v);
            }
        }
        fills.sort_by(|a,b| a.partial_cmp(b).unwrap());
        println!("{label} fills (1e5..1e6): n {} p10 {:.3} p50 {:.3} p90 {:.3}",
            fills.len(), fills[fills.len()/10], fills[fills.len()/2], fills[fills.len()*9/10]);
    }
}
