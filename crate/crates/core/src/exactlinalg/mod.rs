//! Exact integer linear algebra: Smith normal form, kernels, lattice
//! intersections and subquotients of lattices.

mod lattice;
mod matrix;
mod snf;
pub mod sparse;
mod sparse_quotient;

pub use lattice::{
    group_order, integer_kernel, lattice_intersection, solve_with_snf, subquotient, BasisDivisors, Subquotient,
};
pub use matrix::IntMatrix;
pub use sparse_quotient::SparseSubquotient;
pub use snf::{smith_normal_form, SnfDecomposition};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LinalgError {
    #[error("index ({row}, {col}) out of bounds for {rows}x{cols} matrix")]
    OutOfBounds { row: usize, col: usize, rows: usize, cols: usize },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
}
