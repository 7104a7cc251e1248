//! Command-line front end for the traffic-schedule generator.

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use rackload::deconv::{deconvolve, DeconvolutionConfig};
use rackload::degseq::{degree_shortfall, erdos_gallai_check, havel_hakimi, Realization};
use rackload::dist::{Interp, SupportKind};
use rackload::io::{distribution_to_csv, load_distribution};
use rackload_cli::config::{InputPaths, MapperStrategy, RunConfig};
use rackload_cli::report::{run_validation, summarize, write_validation_outputs};
use rackload_cli::schedule::Schedule;
use rackload_cli::{pipeline, PipelineOutput};
use serde::Serialize;
use std::path::PathBuf;

#[derive(Debug, Parser)]
#[command(
    name = "rackload",
    version,
    about = "Generates rack-aware TCP payload schedules from observed Layer-2 traffic distributions"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct InputArgs {
    /// Observed intra-rack entry-volume CDF (CSV value,cum_prob)
    #[arg(long)]
    bytes_intra: PathBuf,
    /// Observed inter-rack entry-volume CDF
    #[arg(long)]
    bytes_inter: PathBuf,
    /// Observed intra-rack partner-count CDF
    #[arg(long)]
    partners_intra: PathBuf,
    /// Observed inter-rack partner-count CDF
    #[arg(long)]
    partners_inter: PathBuf,
    /// Observed Layer-2 flow-size CDF
    #[arg(long)]
    flow_sizes: PathBuf,
    /// Observed flow inter-arrival-time CDF (seconds)
    #[arg(long)]
    iat: PathBuf,
}

#[derive(Debug, Args)]
struct ModelArgs {
    /// Payload packets acknowledged per ACK packet
    #[arg(long, default_value_t = 2.5)]
    r: f64,
    /// Maximum segment size in bytes
    #[arg(long, default_value_t = 1448)]
    mss: u64,
    /// On-wire ACK packet size in bytes
    #[arg(long, default_value_t = 66)]
    ack_size: u64,
}

#[derive(Debug, Args)]
struct ScaleArgs {
    #[arg(long, default_value_t = 72)]
    racks: usize,
    #[arg(long, default_value_t = 20)]
    hosts_per_rack: usize,
    /// Seconds of traffic to generate; a multiple of the epoch length
    #[arg(long, default_value_t = 60.0)]
    duration: f64,
    #[arg(long, default_value_t = 10.0)]
    epoch_length: f64,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the full pipeline and write a schedule
    Generate {
        #[command(flatten)]
        scale: ScaleArgs,
        #[command(flatten)]
        inputs: InputArgs,
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Flow-to-pair assignment strategy (drr|random)
        #[arg(long, default_value = "drr")]
        mapper: MapperStrategy,
        /// DRR credit fraction of the residual entry
        #[arg(long, default_value_t = 0.1)]
        alpha: f64,
        /// DRR minimum credit per visit, bytes
        #[arg(long, default_value_t = 100.0)]
        omega: f64,
        /// Output directory
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Also write per-epoch payload traffic matrices
        #[arg(long)]
        emit_tms: bool,
        /// Skip the digitized-input adjustments (+219-byte flow sizes,
        /// +1000-byte entry volumes)
        #[arg(long)]
        no_input_adjustments: bool,
        /// Read value CDFs as pure step functions
        #[arg(long)]
        step_cdfs: bool,
        /// Draw an independent volume for each direction of an edge
        #[arg(long)]
        both_directions: bool,
    },
    /// Recompute Layer-2 statistics of a schedule and compare with the inputs
    Validate {
        /// Schedule file written by `generate`
        #[arg(long)]
        schedule: PathBuf,
        #[command(flatten)]
        inputs: InputArgs,
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        #[arg(long)]
        no_input_adjustments: bool,
        #[arg(long)]
        step_cdfs: bool,
    },
    /// Deconvolve an observed entry-volume CDF into its payload CDF
    Deconvolve {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value_t = 1 << 14)]
        grid_size: usize,
        #[arg(long, default_value_t = 64)]
        product_terms: usize,
        #[arg(long, default_value_t = 5)]
        smoothing_window: usize,
    },
    /// Check a degree sequence for realizability and construct a graph
    Degcheck {
        /// Comma-separated degrees, e.g. 3,3,2,2
        #[arg(long, conflicts_with = "file")]
        degrees: Option<String>,
        /// File with one degree per line
        #[arg(long)]
        file: Option<PathBuf>,
        /// Print the edge list of a realization
        #[arg(long)]
        construct: bool,
    },
}

fn input_paths(a: InputArgs) -> InputPaths {
    InputPaths {
        bytes_intra: a.bytes_intra,
        bytes_inter: a.bytes_inter,
        partners_intra: a.partners_intra,
        partners_inter: a.partners_inter,
        flow_sizes: a.flow_sizes,
        iat: a.iat,
    }
}

#[derive(Serialize)]
struct TmSidecar {
    epoch: usize,
    seed: u64,
    racks: usize,
    hosts_per_rack: usize,
    epoch_length: f64,
    total_bytes: f64,
    entries: usize,
}

fn cmd_generate(cfg: RunConfig, out: PathBuf, emit_tms: bool) -> Result<()> {
    std::fs::create_dir_all(&out)
        .with_context(|| format!("creating output directory {}", out.display()))?;
    let PipelineOutput { schedule, tms } = pipeline::run_pipeline(&cfg, emit_tms)?;
    let path = out.join("schedule.csv");
    schedule.write_to(&path)?;
    if let Some(tms) = tms {
        for (e, tm) in tms.iter().enumerate() {
            std::fs::write(out.join(format!("tm_{e:04}.csv")), tm.to_csv_string())?;
            let sidecar = TmSidecar {
                epoch: e,
                seed: cfg.seed,
                racks: cfg.racks,
                hosts_per_rack: cfg.hosts_per_rack,
                epoch_length: cfg.epoch_length,
                total_bytes: tm.total(),
                entries: tm.entry_count(),
            };
            std::fs::write(
                out.join(format!("tm_{e:04}.json")),
                serde_json::to_string_pretty(&sidecar)?,
            )?;
        }
    }
    for em in &schedule.meta.epochs {
        println!(
            "epoch {:3}: flows {:8}  epsilon {:.4}  attempts {}  topsoe {:.4}",
            em.epoch, em.flows, em.epsilon, em.attempts, em.topsoe
        );
    }
    println!("schedule written to {}", path.display());
    Ok(())
}

fn cmd_degcheck(degrees: Option<String>, file: Option<PathBuf>, construct: bool) -> Result<()> {
    let degrees: Vec<u32> = match (degrees, file) {
        (Some(s), None) => s
            .split(',')
            .map(|t| t.trim().parse().context("parsing degree list"))
            .collect::<Result<_>>()?,
        (None, Some(path)) => std::fs::read_to_string(&path)
            .with_context(|| format!("reading {}", path.display()))?
            .lines()
            .filter(|l| !l.trim().is_empty() && !l.trim_start().starts_with('#'))
            .map(|l| l.trim().parse().context("parsing degree file"))
            .collect::<Result<_>>()?,
        _ => bail!("pass exactly one of --degrees or --file"),
    };
    let realizable = erdos_gallai_check(&degrees);
    println!(
        "sequence of {} degrees: {}",
        degrees.len(),
        if realizable { "realizable" } else { "unrealizable" }
    );
    match havel_hakimi(&degrees) {
        Realization::Graph(g) => {
            assert!(realizable, "construction disagrees with the realizability test");
            println!("constructed {} edges", g.edge_count());
            assert_eq!(degree_shortfall(&g, &degrees), 0);
            if construct {
                for (a, b) in g.edges() {
                    println!("{a},{b}");
                }
            }
        }
        Realization::Unrealizable => {
            assert!(!realizable, "construction disagrees with the realizability test");
        }
    }
    Ok(())
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::Generate {
            scale,
            inputs,
            model,
            seed,
            mapper,
            alpha,
            omega,
            out,
            emit_tms,
            no_input_adjustments,
            step_cdfs,
            both_directions,
        } => {
            let cfg = RunConfig {
                racks: scale.racks,
                hosts_per_rack: scale.hosts_per_rack,
                duration: scale.duration,
                epoch_length: scale.epoch_length,
                seed,
                r: model.r,
                mss: model.mss,
                ack_packet_size: model.ack_size,
                inputs: input_paths(inputs),
                mapper,
                alpha,
                omega,
                input_adjustments: !no_input_adjustments,
                step_cdfs,
                both_directions,
            };
            cmd_generate(cfg, out, emit_tms)
        }
        Command::Validate {
            schedule,
            inputs,
            model,
            out,
            no_input_adjustments,
            step_cdfs,
        } => {
            let sched = Schedule::read_from(&schedule)?;
            let cfg = RunConfig {
                racks: sched.meta.racks,
                hosts_per_rack: sched.meta.hosts_per_rack,
                duration: sched.meta.duration,
                epoch_length: sched.meta.epoch_length,
                seed: sched.meta.seed,
                r: model.r,
                mss: model.mss,
                ack_packet_size: model.ack_size,
                inputs: input_paths(inputs),
                mapper: MapperStrategy::Drr,
                alpha: 0.1,
                omega: 100.0,
                input_adjustments: !no_input_adjustments,
                step_cdfs,
                both_directions: false,
            };
            let report = run_validation(&cfg, &sched)?;
            write_validation_outputs(&out, &report)?;
            println!("{}", summarize(&report));
            println!("report written to {}", out.join("validation.json").display());
            Ok(())
        }
        Command::Deconvolve {
            input,
            output,
            model,
            grid_size,
            product_terms,
            smoothing_window,
        } => {
            let ack = rackload::ack::AckModel::new(model.r, model.mss, model.ack_size)
                .context("invalid ACK model")?;
            let z = load_distribution(&input, SupportKind::Bytes, Interp::Linear)
                .with_context(|| format!("loading {}", input.display()))?;
            let cfg = DeconvolutionConfig {
                grid_size,
                product_terms,
                smoothing_window,
                ..Default::default()
            };
            let x = deconvolve(&z, &ack, &cfg).context("deconvolver")?;
            std::fs::write(&output, distribution_to_csv(&x))
                .with_context(|| format!("writing {}", output.display()))?;
            println!("payload distribution written to {}", output.display());
            Ok(())
        }
        Command::Degcheck {
            degrees,
            file,
            construct,
        } => cmd_degcheck(degrees, file, construct),
    }
}
