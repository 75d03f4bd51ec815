//! Library surface of the pipeline CLI: configuration, run manifests and the
//! stage implementations behind the subcommands.

pub mod commands;
pub mod config;
pub mod manifest;
