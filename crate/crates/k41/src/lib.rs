//! Deterministic spectral diagnostics for K41 turbulence on the periodic box.

pub mod error;
pub mod fft;
pub mod field;
pub mod numtheory;
pub mod rng;
pub mod sum;

pub use error::{K41Error, Result};
pub mod quad;
pub mod spectrum;
pub mod evolve;
pub mod analysis;
pub mod structfn;
pub mod figures;
pub mod io;
