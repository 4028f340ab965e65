//! Experiment runners, reports and the command-line front end for `slicealign`.

pub mod bench;
pub mod cli;
pub mod data;
pub mod error;
pub mod experiment;
pub mod report;
pub mod studies;

pub use error::{HarnessError, Result};
