#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod entropy;
pub mod error;
pub mod export;
pub mod fisher;
pub mod fit;
pub mod geodesic;
pub mod geometry;
pub mod jacobi;
pub mod models;
pub mod ode;
pub mod quadrature;
pub mod tensor;

pub use error::{Error, Result};
