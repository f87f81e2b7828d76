//! Spectral inference for large sample covariance matrices.
//!
//! The crate is organised bottom-up:
//!
//! * [`linalg`]: complex matrices, Hermitian eigendecomposition, seeded Gaussian sampling.
//! * [`stieltjes`]: Marčenko–Pastur law, the companion fixed-point solver, limiting densities.
//! * [`gest`]: consistent estimators of population eigenvalues and source powers.
//! * [`spike`]: spiked models, Tracy–Widom tables, detection and failure localization.
//! * [`doa`]: MUSIC and G-MUSIC angle-of-arrival estimation.
//!
//! Every routine is deterministic given its inputs; randomness enters only through an
//! explicit [`linalg::RngStream`].

pub mod doa;
pub mod error;
pub mod gest;
pub mod linalg;
pub mod special;
pub mod spike;
pub mod stieltjes;

pub use error::{Error, Result};
pub use num_complex::Complex64;
