//! Truncated Fourier series on `T^nu x T`.

mod family;
mod grid;
mod lattice;
mod torus;

pub use family::ParamFamily;
pub use grid::{fft_nd, Grid};
pub use lattice::{jap, LatticeBox, MultiRange};
pub use torus::{eval_profile, ModeRecord, SymmetryReport, TorusFunction};
