//! Configuration-driven runner for dissipact: build a zoo model or load a
//! system file, integrate it, certify the energy balance and write CSV and
//! JSON artifacts.

pub mod config;
pub mod error;
pub mod output;
pub mod runner;
pub mod sysfile;

pub use config::{parse_config, CheckLevel, GridSpec, ModelSource, Outputs, RunSpec, SchemeName};
pub use error::CliError;
pub use runner::{run, CheckResult, ExitStatus, RunReport};
pub use sysfile::{load_system_file, parse_system_file, EnergySpec, LoadedSystem, SystemFile};
