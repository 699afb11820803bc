//! Exceptional points of non-Hermitian matrix families.
//!
//! - [`linalg`]: small dense complex linear algebra (eigenpairs, defect checks).
//! - [`two_level`]: closed forms for the 2x2 model `diag(e1, e2) + lambda S diag(w1, w2) S^-1`.
//! - [`oscillator`]: two coupled damped driven oscillators.
//! - [`ep_finder`]: EP searches, branch tracking, monodromy, biorthogonal expansion.

pub mod ep_finder;
pub mod linalg;
pub mod oscillator;
pub mod two_level;

pub use linalg::{ComplexSquareMatrix, LinalgError};
pub use num_complex::Complex64;
