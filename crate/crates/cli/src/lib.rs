//! Command-line front end for `leafdens-core`: configuration resolution and
//! one function per subcommand, so every stage can be scripted or tested
//! without spawning the binary.

pub mod commands;
pub mod config;
mod error;

pub use commands::{cluster, densify, distmat, load_dataset, pipeline, plot, synth, Report};
pub use config::{resolve_run, resolve_synth, ConfigFile, DistanceChoice, RunConfig, RunOverrides, SynthOverrides};
pub use error::{CliError, Stage};
