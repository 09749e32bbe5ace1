//! Exact multi-hump travelling solitons of the conformable coupled KdV
//! system, constructed by a rapidly convergent approximation scheme on
//! exponential sums and checked against the closed form.

// `!(x < y)` is used on purpose so that NaN falls into the failing branch.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![cfg_attr(test, allow(clippy::excessive_precision))]

pub mod boundedness;
pub mod cli;
pub mod closed_form;
pub mod conformable;
pub mod error;
pub mod expsum;
pub mod params;
pub mod rcam;
pub mod sample;
pub mod stencil;
pub mod table;

pub use error::{Error, Result};
pub use params::Params;
