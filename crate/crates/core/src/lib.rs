//! Periodic and solitary traveling waves of the steady Whitham equation
//! −μφ + Lφ + φ² = 0, where L is the Fourier multiplier with symbol
//! m(ξ) = √(tanh ξ / ξ).
//!
//! Periodic waves are computed by Newton's method on cosine coefficients
//! with the crest height as the continuation parameter. Solitary waves are
//! obtained as long-period limits followed by a Galilean shift.

pub mod error;
pub mod kernel;
pub mod quadrature;
pub mod solitary;
pub mod solver;
pub mod special;
pub mod spectral;
pub mod verify;

pub use error::{Error, Result};
