//! Territorial scientific specialization from bibliometric records.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytics;
pub mod config;
pub mod corpus;
pub mod error;
pub mod format;
pub mod normalize;
pub mod pipeline;
pub mod report;
pub mod specialization;
pub mod strength;
pub mod synth;

pub use error::{Error, Result};
