//! Library surface of the rackload command-line tool: run configuration,
//! pipeline orchestration, schedule persistence, and validation reports.

pub mod config;
pub mod pipeline;
pub mod report;
pub mod schedule;

pub use config::{InputPaths, MapperStrategy, ObservedInputs, RunConfig};
pub use pipeline::{derive_profile, run_pipeline, PipelineOutput};
pub use report::{run_validation, write_validation_outputs};
pub use schedule::{EpochMeta, Schedule, ScheduleMeta};
