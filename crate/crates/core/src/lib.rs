#![no_std]
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

extern crate alloc;
#[cfg(any(feature = "std", test))]
extern crate std;

pub mod distgeo;
pub mod inscribe;
pub mod linalg;
pub mod polar;
pub mod simspace;
pub mod spheres;
