//! Metaplectic Wigner distributions of Wigner-decomposable type, their
//! explicit metaplectic atoms, and metaplectic Gabor frames, realized on
//! sampled one-dimensional signals.

pub mod baselines;
pub mod error;
pub mod family;
pub mod frames;
pub mod grid;
pub mod io;
pub mod spaces;
pub mod symplectic;
pub mod tfr;
pub mod verify;
pub mod window;

pub use error::{Error, Result};
