//! Dense complex linear algebra for matrices up to 8x8.

mod eigen;
mod elim;
mod matrix;
mod poly;

use thiserror::Error;

pub use eigen::{
    defect_report, defect_report_with, eig, eig_with, left_null_vector, normalize_unit, right_null_vector, spectrum,
    DefectReport, EigOptions, EigenSystem,
};
pub use matrix::{determinant, inner, pairing, vec_norm, ComplexSquareMatrix};
pub use poly::{char_poly, poly_roots, sort_spectrum, spectral_cmp, spectral_order, Polynomial};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("matrix dimension {dim} outside 1..=8")]
    InvalidDimension { dim: usize },
    #[error("{len} entries given for a {dim}x{dim} matrix")]
    EntryCount { dim: usize, len: usize },
    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },
    #[error("matrix is singular")]
    Singular,
    #[error("polynomial has degree zero")]
    DegreeZero,
    #[error("value is {distance:e} from the spectrum, outside cluster radius {radius:e}")]
    NotAnEigenvalue { distance: f64, radius: f64 },
}
