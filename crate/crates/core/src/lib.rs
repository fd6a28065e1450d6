//! Simulation and analysis of sub-Rayleigh fringes produced by an unseeded
//! high-gain optical parametric amplifier.
//!
//! The two-mode squeezed vacuum is propagated through decoherence, phase and
//! polarizing-beam-splitter stages and analysed with three backends that
//! check one another: a dense Fock-space engine, a Gaussian (Wick) engine
//! and a pulse-by-pulse Monte Carlo of threshold detectors. Closed-form
//! fringe laws and least-squares calibration fits complete the toolkit.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytic;
pub mod error;
pub mod fit;
pub mod fock;
pub mod gaussian;
pub mod linalg;
pub mod montecarlo;
pub mod par;
pub mod params;
pub mod pipeline;

pub use error::{Error, Result};
pub use params::OpaParams;
