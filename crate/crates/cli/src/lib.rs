// `!(a < b)` is deliberate: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bundle;
pub mod config;
pub mod error;
pub mod fixture;
pub mod ingest;
pub mod pipeline;
pub mod plots;
