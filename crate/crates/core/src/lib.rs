// Guards such as `!(x > 0.0)` are written to reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod control;
pub mod equipment;
pub mod h2props;
pub mod sim;
pub mod ugsa;
