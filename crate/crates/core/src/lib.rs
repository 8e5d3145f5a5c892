pub mod copies;
pub mod error;
pub mod exponent;
pub mod interp;
pub mod matcore;
pub mod normlib;
mod optim;
pub mod rng;
pub mod spaces;

pub use error::{Error, Result};
pub use exponent::Exponent;
pub use matcore::{ComplexMatrix, Density, MatrixJson, SubalgebraSpec};
pub use normlib::{NormSpec, OptimizerReport, Placement, SolverOptions};
