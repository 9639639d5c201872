//! Dispersive stabilization of first-order systems by nonscalar
//! Schrödinger terms: symbol checks, Fourier-side stability scans, a
//! discrete paradifferential calculus on the torus, and spectral evolution.

pub mod bundled;
pub mod cli;
pub mod error;
pub mod evolution;
pub mod linalg;
pub mod paracalc;
pub mod stability;
pub mod symbol;

pub use error::{Error, Result};
