//! Two-polarization weak-pulse propagation in a coherently prepared,
//! inhomogeneously broadened Λ-type medium, with controlled-broadening-flip
//! (time-reversed echo) retrieval.
//!
//! The crate is organized in three layers:
//!
//! * closed-form spectral propagation and backward-retrieval solutions
//!   ([`analytic`]), driven by the linear response kernels of [`kernels`]
//!   over media described by [`medium`];
//! * a full finite-difference Maxwell–Bloch integrator over an ensemble of
//!   detuning classes ([`blochsim`]), which doubles as the validation oracle
//!   for the closed forms and as the general-case solver;
//! * qubit-level protocol calculators ([`protocols`]): polarization filter,
//!   sieve, tunable splitter and backward-retrieval quantum memory metrics.
//!
//! Units: rates are expressed in inverse pulse durations (the input pulse
//! duration is 1 by convention) and the medium length is normalized to 1,
//! so spatial positions are reported as the dimensionless optical distance
//! `alpha * z`.

pub mod analytic;
pub mod blochsim;
pub mod error;
pub mod kernels;
pub mod medium;
pub mod protocols;
mod quad;

pub use error::{Error, Result};

/// Complex double-precision scalar used throughout.
pub type C64 = num_complex::Complex64;
