//! Reducibility of quasi-periodically forced Klein-Gordon operators on
//! truncated Fourier lattices.

pub mod app;
pub mod bony;
pub mod cantor;
pub mod config;
pub mod diffeo;
pub mod error;
pub mod evolution;
pub mod fourier;
pub mod pipeline;
pub mod pseudo;
pub mod report;
pub mod toeplitz;
pub mod transport;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
