//! Simulation library for a two-mode bosonic dimer with competing coherent
//! and incoherent hopping.
//!
//! The crate covers four layers of the same model:
//!
//! * [`meanfield`] — thermodynamic-limit dynamics of the scaled quadratures,
//!   closed-form fixed points and phase classification (stationary vs. the
//!   three time-crystal phases TC1/TC2/TC3),
//! * [`liouvillian`] — exact finite-N physics through the U(1)
//!   block decomposition of the Lindblad generator: spectra, steady states,
//!   block evolution and cross-model validation oracles,
//! * [`fluctuations`] / [`correlations`] — Gaussian fluctuations around the
//!   mean field (Lyapunov covariance dynamics) and the derived two-mode
//!   correlation measures (logarithmic negativity, Gaussian discord),
//! * [`experiments`] — the composite protocols: Fourier analysis, hysteresis
//!   sweeps, phase diagrams, scaling fits and spectral-gap studies.
//!
//! Everything is expressed in units of the overall dissipation rate κ.

// Force linkage of the system BLAS used by ndarray's matrix products.
extern crate blas_src;

pub mod correlations;
pub mod error;
pub mod fluctuations;
pub mod io;
pub mod linalg;
pub mod liouvillian;
pub mod meanfield;
pub mod params;
pub mod spin;

pub mod experiments;

mod ode;

pub use error::{Error, Result};
pub use params::{derive_rates, Conventions, DerivedRates, ModelParams};
