//! Workstation-side companion to `jointburr-core`: file formats, the
//! Monte Carlo study harness, report writers, and the CLI.

pub mod cli;
pub mod io;
pub mod report;
pub mod study;
