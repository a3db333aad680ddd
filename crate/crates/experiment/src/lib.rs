//! Replicated experiments over the benchmark models: configs, presets, the
//! parallel runner and CSV output.

pub mod config;
mod error;
pub mod output;
pub mod presets;
pub mod runner;

pub use config::{ExperimentConfig, ModelKind};
pub use error::{HarnessError, Result};
pub use output::{run_experiment, run_set, RunOutput};
pub use presets::{load_preset, preset, PRESETS};
pub use runner::{run_replicate, ReplicateOutcome, Status, StepRecord};
