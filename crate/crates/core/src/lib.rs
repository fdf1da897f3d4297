#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

//! Finite-strain poro-visco-elasticity in one space dimension and its
//! small-strain limit.
//!
//! The numerical core is generic over [`Scalar`]; the aliases below fix `f64`.

pub mod cli;
pub mod constitutive;
pub mod discretization;
pub mod error;
pub mod experiments;
pub mod linear_solver;
pub mod loading;
pub mod nonlinear_solver;
pub mod scalar;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type MaterialParams = constitutive::MaterialParams<f64>;
pub type MaterialModel = constitutive::MaterialModel<f64>;
pub type LinearizedTensors = constitutive::LinearizedTensors<f64>;
pub type LinearCoefficients = constitutive::LinearCoefficients<f64>;
pub type Grid1D = discretization::Grid1D<f64>;
pub type Field = discretization::Field<f64>;
pub type NonlinearState = nonlinear_solver::NonlinearState<f64>;
pub type NonlinearRun = nonlinear_solver::NonlinearRun<f64>;
pub type EnergyLedger = nonlinear_solver::EnergyLedger<f64>;
pub type LinearState = linear_solver::LinearState<f64>;
pub type LinearRun = linear_solver::LinearRun<f64>;
pub type LinearLedger = linear_solver::LinearLedger<f64>;
