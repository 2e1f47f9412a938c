//! Polarization self-rotation (PSR) and vacuum squeezing in a driven 4-level
//! atomic ensemble.
//!
//! The crate is organised around the physical pipeline:
//!
//! * [`params`] holds the validated parameter records and the unit system
//!   (all rates in units of the optical coherence decay rate γ, lengths in
//!   units of the cell length).
//! * [`matsko`] is the phenomenological cross-phase-modulation squeezing
//!   model, kept as the prediction to compare against.
//! * [`bloch`] solves the semi-classical 4-level Bloch equations and
//!   propagates the circular field components through the cell.
//! * [`fluctuations`] linearizes around the steady state and transports the
//!   quadrature covariance of the orthogonally polarized vacuum mode,
//!   including atomic Langevin noise.
//! * [`ensemble`] adds Doppler and hyperfine averaging for classical
//!   transmission / rotation maps and least-squares fitting of traces.
//!
//! [`ode`] is a small adaptive Runge-Kutta integrator shared by the
//! propagation code.

pub mod bloch;
pub mod ensemble;
pub mod fluctuations;
pub mod matsko;
pub mod ode;
pub mod params;

pub use num_complex::Complex64;
