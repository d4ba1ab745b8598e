//! Tight upper bounds on the CHSH parameter for two-valued qubit observables
//! of arbitrary strength, bias and direction.
//!
//! The crate is organised bottom-up:
//!
//! * [`linalg`]: fixed-size SVD, eigenvalues and frames.
//! * [`model`]: observables, two-qubit states in Fano form, random samplers.
//! * [`chsh`]: exact correlation expectations and CHSH values.
//! * [`bounds`]: closed-form bounds, thresholds and compatibility tests.
//! * [`construct`]: measurement configurations that attain the bounds.
//! * [`oracle`]: numerical maximisation used to certify the bounds.

pub mod bounds;
pub mod chsh;
pub mod construct;
pub mod error;
pub mod linalg;
pub mod model;
pub mod oracle;

pub use error::{Error, Result};
