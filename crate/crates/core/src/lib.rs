//! Numerical laboratory for growing modes of the linearized Prandtl equations
//! around time-dependent shear flows with a non-degenerate critical point.

pub mod config;
pub mod eigen;
pub mod error;
pub mod evolve;
pub mod experiments;
pub mod export;
pub mod modes;
pub mod norms;
pub mod ode;
pub mod profiles;
pub mod quad;

pub use error::{LabError, Result};
