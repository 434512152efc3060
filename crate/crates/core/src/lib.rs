//! Eigenvalue inequalities for superquadratic functions of real symmetric
//! matrices: bound builders, sharp reverse-Jensen constants and a seeded
//! verification harness.

pub mod bounds;
pub mod constants;
pub mod error;
pub mod harness;
pub mod linalg;
pub mod scalar;

pub use error::{Error, Result};
pub use linalg::{
    ComparisonTolerance, Matrix, OrderVerdict, OrthogonalMatrix, SpectralDecomposition,
    SpectralRange, SymmetricMatrix,
};
pub use scalar::{ClassFlags, ScalarFunctionModel};
