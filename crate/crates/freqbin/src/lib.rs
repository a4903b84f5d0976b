//! Simulation and analysis toolkit for frequency-bin entangled qudits.
//!
//! A multi-ring photonic source emits signal/idler photon pairs into a comb of
//! frequency bins; electro-optic phase modulators mix neighbouring bins with
//! Bessel-function sideband weights, and coincidence counts behind narrowband
//! filters probe the two-photon state. This crate models that chain end to end:
//!
//! - [`binspace`]: bin grids, two-photon states, density matrices, and the
//!   Cholesky parameterization used by tomography.
//! - [`eom`]: phase-modulator sideband matrices, RF-power calibration, and
//!   mutually unbiased measurement bases.
//! - [`source`]: ring-resonator joint spectral amplitudes, pairwise
//!   indistinguishability, circuit-programmed state preparation, and
//!   brightness/geometry arithmetic.
//! - [`measurement`]: outcome probabilities, loss and Poisson count statistics,
//!   two-photon fringes, visibility fits, and the on-chip phase calibration loop.
//! - [`tomography`]: measurement settings, POVM assembly, the likelihood cost,
//!   and particle-swarm reconstruction over Cholesky parameters.
//! - [`metrics`]: CGLMP Bell parameter, dimension witness, and correlations on
//!   mutually unbiased bases.
//! - [`io`] / [`config`] / [`cli`]: file formats, experiment configuration, and
//!   the batch command driver.
//!
//! Runnable walkthroughs for each capability live in `examples/`.

pub mod bessel;
pub mod binspace;
pub mod cli;
pub mod config;
pub mod eom;
mod error;
pub mod io;
pub mod linalg;
pub mod measurement;
pub mod metrics;
pub mod pso;
pub mod source;
pub mod tomography;

pub use error::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
