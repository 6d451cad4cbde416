//! Pseudo-spectral simulation of the 2D Euler equations near Couette flow
//! in shear-back coordinates, with inviscid-damping diagnostics and
//! time-stepping-free multiplier checks.

pub mod diagnostics;
pub mod dynamics;
pub mod envelope;
pub mod error;
pub mod harness;
pub mod oracle;
pub mod spectral;

pub use error::{Error, Result};
