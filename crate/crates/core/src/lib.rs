//! Numerical verification of trace inequalities for measurable operators,
//! instantiated on finite-dimensional weighted block-trace algebras.

pub mod algebra;
pub mod cli;
pub mod error;
pub mod functions;
pub mod harness;
pub mod identities;
pub mod inequalities;
pub mod spectral;

pub use algebra::{AlgebraElement, TracialAlgebra, C64};
pub use error::{Error, Result};
pub use functions::{ConvexityClass, FunctionChoice, FunctionForm, ScalarFunction};
