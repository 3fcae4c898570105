//! Command-line frontend, output formats and parallel drivers for `critsense-core`.

pub mod cli;
pub mod format;
pub mod parallel;
pub mod parse;

pub use critsense_core;
