//! Command-line front end: configuration, subcommands, and plot emission.

pub mod commands;
pub mod config;
pub mod svg;

pub use commands::{cmd_bands, cmd_energies, cmd_path, cmd_scan, cmd_verify};
pub use config::{Averaging, Overrides, PathSpec, PotentialSpec, ProtocolDescriptor, RunConfig, StateChoice};
