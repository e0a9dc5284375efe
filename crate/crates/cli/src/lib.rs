//! Configuration, orchestration and persistence for solver runs.

pub mod checkpoint;
pub mod config;
pub mod error;
pub mod output;
pub mod run;

pub use checkpoint::{checkpoint_load, checkpoint_save, Checkpoint};
pub use config::{Mode, RunConfig};
pub use error::CliError;
pub use run::{emit_plotdata, execute, run, RunOutput};
