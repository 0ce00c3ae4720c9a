//! H2-optimal controller synthesis for two-player systems with a nested
//! (block-lower-triangular) information structure.

pub mod ensemble;
mod error;
pub mod exec;
pub mod linalg;
pub mod stabilization;
pub mod synthesis;
pub mod sysmodel;
pub mod validation;

pub use error::{Error, Result};
