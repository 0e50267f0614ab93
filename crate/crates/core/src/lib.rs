//! Entanglement generation among partially distinguishable identical particles
//! that spatially overlap at a set of detectors.
//!
//! The pipeline is: build a [`transform::TransformSpec`], expand the N-particle
//! product ([`expansion`]), keep the no-bunching outcomes and trace out the
//! distinguishability labels ([`reduce`]), then test the resulting spin density
//! matrix against GHZ and W fidelity witnesses ([`entanglement`]). The
//! [`tomography`] module simulates and reconstructs measured states, and
//! [`oracle`] is an independent brute-force path used for verification.

pub mod cli;
pub mod density;
pub mod entanglement;
pub mod error;
pub mod expansion;
pub mod linalg;
pub mod oracle;
pub mod reduce;
pub mod spin;
pub mod tomography;
pub mod transform;

pub use density::DensityMatrix;
pub use error::{Error, Result};
pub use num_complex::Complex64;
pub use reduce::{simulate, GramMatrix};
pub use spin::Spin;
pub use transform::TransformSpec;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
