//! Generalized pairwise comparisons for cluster-randomized trials with
//! several prioritised or weighted endpoints.

pub mod data;
pub mod dist;
pub mod error;
pub mod inference;
pub mod mixed;
pub mod oracle;
pub mod ranks;
pub mod report;
pub mod sim;
pub mod stream;

pub use error::{Error, Result};
