//! Capacity-expansion planning on a sparse LP: domain types, a bounded
//! revised simplex solver, the planning model builder and post-solution
//! metrics. Needs only `alloc`.

#![no_std]
// `!(x >= 0.0)` is used on purpose so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod data;
pub mod finance;
pub mod lp;
pub mod metrics;
pub mod model;
pub mod solution;
