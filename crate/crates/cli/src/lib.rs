//! File formats, artifacts and the command-line front end for
//! `uavcharge-core`.

pub mod artifact;
pub mod cli;
pub mod commands;
pub mod config;
pub mod instance;
pub mod oracle;
