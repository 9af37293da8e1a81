//! Headline bounds, experiment configs and report bundles.

mod bounds;
mod config;
mod run;

pub use bounds::{
    bounds_from, compute_bounds, compute_bounds_named, measure_level_bound, BoundMode, Bounds, BoundsProvenance,
    BoundsReport, EntropyConfig, GrowthConfig, LocalDiffeo,
};
pub use config::{ExperimentConfig, Pipeline, SystemSpec, SCHEMA_VERSION};
pub use run::{run_experiment, run_pipeline, to_json, CombiReport, OscilleSummary, PipelineResult, Report, RunMetadata, RunOutput, Table};
