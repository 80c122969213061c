//! Spectral estimation of the characteristic triplet of a Lévy process with
//! finite jump activity from unit-spaced increments.
//!
//! The pipeline is: [`simulate`] (or external data) → [`ecf::compute_ecf`] →
//! [`estimators::estimate_triplet`] → [`estimators::estimate_rho`], with
//! [`harness`] driving Monte Carlo sweeps of the whole chain.

pub mod cli;
pub mod ecf;
pub mod estimators;
pub mod harness;
pub mod kernels;
pub mod model;
pub mod quadrature;
pub mod simulate;

pub use ecf::{compute_ecf, EcfGrid};
pub use estimators::{default_config, DensityEstimate, EstimatorConfig, TripletEstimate};
pub use kernels::{KernelSet, SpectralKernel};
pub use model::{ClassParams, JumpDensity, LevyTriplet};
