//! Configured runs, parameter sweeps and their on-disk formats.

pub mod checkpoint;
pub mod config;
pub mod init;
pub mod output;
pub mod run;
pub mod sweep;

pub use checkpoint::Checkpoint;
pub use config::{InitFamily, RunConfig};
pub use init::{hardy_survey, make_initial_data};
pub use output::{read_ndjson, RecordRow};
pub use run::{run_to_files, RunSink, RunStatus, RunSummary, Simulation};
pub use sweep::{sweep, SweepCell, SweepSummary};
