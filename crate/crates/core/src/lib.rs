// NaN has to fail the range checks, hence `!(x >= 0.0)` rather than `x < 0.0`.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod metrics;
pub mod pipeline;
pub mod refactor;
pub mod similarity;
pub mod source;
pub mod stats;
pub mod verify;
