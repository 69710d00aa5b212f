//! Constructive diagonals and pinchings of finite operator truncations.
//!
//! Every construction returns a certificate that can be re-checked independently.

pub mod cli;
pub mod diagnostics;
pub mod diagonal;
pub mod error;
pub mod foundation;
pub mod inverse_range;
pub mod io;
pub mod moments;
pub mod numrange;
pub mod pinching;

pub use error::{Error, Result};

/// Version tag written into every serialized artifact.
pub const SCHEMA: &str = "blaschke-forge/1";
