#![allow(clippy::needless_range_loop)]

pub mod actions;
pub mod classical;
pub mod cli;
pub mod crossed;
pub mod error;
pub mod examples;
pub mod groupoid;
pub mod hilbert;
pub mod linalg;
pub mod matched_pair;
pub mod pmu;
pub mod quantum;
pub mod report;
pub mod structure;
pub mod suite;
pub mod weight;

pub use error::{Error, Result};
