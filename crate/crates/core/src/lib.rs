// `!(x > 0.0)` is used throughout so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod config;
pub mod eigen;
pub mod error;
pub mod experiments;
pub mod math;
pub mod ode;
pub mod oracle;
pub mod potentials;
pub mod quadrature;
pub mod schrodinger;
pub mod winding;

pub use error::{Error, Result};
