//! Numerical laboratory for weakly coupled damped wave systems
//! `U″ + ℒU + AU + D𝒢*𝒢U′ = 0`.
//!
//! The crate is generic over the real scalar type (`f32` or `f64`); the
//! `*64` aliases at the root fix double precision, which is what the
//! examples and the command line use.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod discretize;
pub mod error;
pub mod evolve;
pub mod fit;
pub mod io;
pub mod kalman;
pub mod linalg;
pub mod sampling;
pub mod scalar;
pub mod spectra;

pub use error::{Error, Result};
pub use scalar::{Field, Real};

pub type Matrix64 = linalg::Matrix<f64>;
pub type CouplingPair64 = kalman::CouplingPair<f64>;
pub type EigenGroups64 = kalman::EigenGroups<f64>;
pub type BlockPartition64 = kalman::BlockPartition<f64>;
pub type SpectralFactorD64 = kalman::SpectralFactorD<f64>;
pub type ModelSpec64 = discretize::ModelSpec<f64>;
pub type Generator64 = discretize::Generator<f64>;
pub type SpectrumReport64 = spectra::SpectrumReport<f64>;
pub type ResolventScan64 = spectra::ResolventScan<f64>;
pub type BranchRoot64 = spectra::BranchRoot<f64>;
pub type State64 = evolve::State<f64>;
pub type DecayReport64 = evolve::DecayReport<f64>;
