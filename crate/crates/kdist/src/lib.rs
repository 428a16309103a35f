//! Kernel distances between probability measures: kernels with their
//! spectra, measures, population and sample MMD, classical probability
//! metrics, constructions of hard-to-separate pairs and a permutation test.
//!
//! Everything is generic over the scalar (`f32` or `f64`); the aliases at
//! the bottom fix it to `f64`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod classical_metrics;
pub mod constructions;
pub mod error;
pub mod kernels;
pub mod measures;
pub mod mmd;
pub mod parse;
pub mod quadrature;
pub mod scalar;
pub mod special;
pub mod testing;

pub use error::{Error, Result};
pub use scalar::Real;

pub type Kernel = kernels::KernelSpec<f64>;
pub type TorusKernel = kernels::TorusKernelSpec<f64>;
pub type Measure = measures::Measure<f64>;
pub type Discrete = measures::Discrete<f64>;
pub type Sample = measures::Sample<f64>;
pub type MMDResult = mmd::MMDResult<f64>;
pub type MetricReport = classical_metrics::MetricReport<f64>;
pub type ConstructedPair = constructions::ConstructedPair<f64>;
pub type TestResult = testing::TestResult<f64>;
