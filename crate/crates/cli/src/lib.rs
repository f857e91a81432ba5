//! Command-line front end: JSON configs in, JSON summaries and CSV grids
//! out.

pub mod commands;
pub mod config;
pub mod output;
