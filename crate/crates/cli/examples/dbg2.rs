use rackload::flowset::create_flowset;
use rackload::mapper::{map_drr, mapping_quality, DrrParams};
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
    println!("pairs {} flows {} s_m {:.3e} s_f {:.3e}", tm.entry_count(), fs.flows.len(), fs.s_m, fs.s_f);
    // flow size stats
    let mut sz: Vec<u64> = fs.flows.iter().map(|f| f.size).collect();
    sz.sort_unstable();
    println!("flow size min {} p10 {} p50 {} p90 {} max {}", sz[0], sz[sz.len()/10], sz[sz.len()/2], sz[sz.len()*9/10], sz[sz.len()-1]);
    let mut rng = epoch_rng(11, 0, Stage::Mapper);
    let mapped = map_drr(&fs.flows, &tm, &mut rng, DrrParams::default());
    println!("topsoe {:.5}", mapping_quality(&tm, &mapped).unwrap());
    let mut counts: BTreeMap<(u32,u32), u64> = BTreeMap::new();
    for f in &mapped { *counts.entry((f.src,f.dst)).or_insert(0) += 1; }
    let starved = tm.entries().filter(|(&k, _)| !counts.contains_key(&k)).count();
    println!("starved pairs {} / {}", starved, tm.entry_count());
    // entry size distribution of starved vs served
    let mut small_starved = 0; let mut small_total = 0;
    for (&k, &v) in tm.entries() {
        if v < 50_000.0 { small_total += 1; if !counts.contains_key(&k) { small_starved += 1; } }
    }
    println!("entries < 50K: {small_total}, starved {small_starved}");
    let mut mid_starved = 0; let mut mid_total = 0;
    for (&k, &v) in tm.entries() {
        if (50_000.0..1e6).contains(&v) { mid_total += 1; if !counts.contains_key(&k) { mid_starved += 1; } }
    }
    println!("entries 50K..1e6: {mid_total}, starved {mid_starved}");
    let mut big_starved = 0; let mut big_total = 0;
    for (&k, &v) in tm.entries() {
        if v >= 1e6 { big_total += 1; if !counts.contains_key(&k) { big_starved += 1; } }
    }
    println!("entries >= 1e6: {big_total}, starved {big_starved}");
}
