//! Experiment driver for `svogs-core`.

pub mod config;
pub mod experiment;
pub mod instance;
pub mod libsvm;
pub mod trace;
pub mod verify;

pub use config::{load_config, ConfigError, ExperimentConfig};
pub use experiment::{run_experiment, ExperimentError, ExperimentSummary};
pub use libsvm::{parse_libsvm, write_libsvm, LibsvmError, SparseRow};
pub use trace::{emit_trace, write_trace};
pub use verify::{verify_suite, VerifyReport};
