//! Flow-level traffic synthesis for data-center networks.
//!
//! The crate turns step-function descriptions of observed Layer-2 traffic
//! into a Layer-4 TCP payload-transmission schedule whose implied Layer-2
//! traffic reproduces the observed distributions. The pieces, in pipeline
//! order:
//!
//! * [`dist`] — step-function CDFs, sampling, convolution, and the
//!   distance/diagnostic statistics shared by everything else.
//! * [`ack`] — the fixed payload-to-ACK model (`r`, MSS, ACK packet size).
//! * [`deconv`] — recovers payload byte-volume distributions from observed
//!   Layer-2 volume distributions by characteristic-function deconvolution.
//! * [`payload`] — strips implied ACK-flow mass from the observed flow-size
//!   distribution to obtain payload flow sizes.
//! * [`degseq`] — degree-sequence realizability and graph construction,
//!   including the k-partite (inter-rack) and penalty-minimizing
//!   (intra-rack) solvers.
//! * [`tm`] — per-epoch payload traffic matrices.
//! * [`flowset`] — unmapped payload flows balancing the matrix volume.
//! * [`mapper`] — assignment of flows to matrix entries (random and
//!   deficit-round-robin strategies).
//! * [`validate`] — analytic reconstruction of the generated Layer-2
//!   statistics and comparison against the inputs.
//!
//! All types are immutable values after construction and all operations
//! take explicit random streams, so everything here is safe to drive from
//! multiple threads.

pub mod ack;
pub mod deconv;
pub mod degseq;
pub mod dist;
pub mod flowset;
pub mod io;
pub mod mapper;
pub mod payload;
pub mod rng;
pub mod tm;
pub mod validate;

pub use ack::AckModel;
pub use deconv::{deconvolve, reconvolve_check, DeconvolutionConfig};
pub use dist::{
    compare, empirical_cdf, ks_distance, ComparisonReport, DensityGrid, Interp, StepDistribution,
    SupportKind,
};
pub use degseq::{
    brute_force_realize, erdos_gallai_check, havel_hakimi, solve_inter_rack, solve_intra_rack,
    AdjacencyGraph, DegreeKind, DegreePrior, DegreeSequence, IntraSolveReport, RackLayout,
    Realization,
};
pub use flowset::{create_flowset, FlowsetResult, UnmappedFlow};
pub use mapper::{
    map_drr, map_drr_with, map_random, mapping_quality, DrrParams, DrrQueueDiscipline, MappedFlow,
};
pub use payload::FlowSizePmf;
pub use tm::{topsoe_distance, TrafficMatrix, TrafficProfile};
pub use validate::{l2_flow_sizes, synthesize_l2_tm, validate, L2Model, ValidationReport};
