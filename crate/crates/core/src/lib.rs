#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod artifact;
pub mod data_io;
pub mod decompose;
pub mod evaluate;
pub mod sentiment;
pub mod spline;
pub mod stats;
pub mod surface;
pub mod synthgen;
pub mod varfit;
