//! Host-vector dengue transmission with adulticide control.
//!
//! The crate simulates the seven-compartment human/mosquito model, constructs
//! its equilibria, computes the basic reproduction number by two independent
//! routes, classifies local stability from Jacobian eigenvalues, and solves
//! for the smallest constant insecticide level that brings R0 below one.
//!
//! ```
//! use dengue_core::{model::{ControlLevel, ModelParams}, reproduction, threshold};
//!
//! let p = ModelParams::cape_verde();
//! let r0 = reproduction::r0_spectral(&p, ControlLevel::NONE).unwrap();
//! assert!((r0 - 2.396).abs() < 1e-3);
//! if let threshold::ControlOutcome::Threshold(t) = threshold::min_control(&p, 1e-6).unwrap() {
//!     assert_eq!(format!("{:.6}", t.c_star), "0.156961");
//! }
//! ```

pub mod cli;
pub mod equilibria;
pub mod error;
pub mod integrator;
pub mod linalg;
pub mod model;
pub mod reproduction;
pub mod stability;
pub mod threshold;

pub use error::{Error, Result};
