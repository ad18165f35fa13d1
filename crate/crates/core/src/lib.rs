// Negated comparisons such as `!(x > 0.0)` are how inputs reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channel;
pub mod cli;
pub mod error;
pub mod reproduce;
pub mod sim;
pub mod specfun;
pub mod threshold;
