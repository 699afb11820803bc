//! Locating and characterizing exceptional points of matrix families.

mod analysis;
mod family;
mod newton;
mod quintic;
mod tracking;

use num_complex::Complex64;
use thiserror::Error;

use crate::linalg::LinalgError;

pub use analysis::{biorth_expansion, branch_exponent, branch_exponent_at};
pub use family::{
    secular_det, secular_polynomial, FnFamily, MatrixFamily, OscillatorFamily, SpectralVariable, TwoLevelFamily,
};
pub use newton::{
    coalescence_residual, critical_points, find_oscillator_ep, grid_scan, newton_ep_search, CoalescenceResidual,
    EpSeed, ExceptionalPoint, FreeParams, GridScan, NewtonOptions,
};
pub use quintic::{resultant_quintic_in_f, tune_g_for_real_f, RealFEp};
pub use tracking::{monodromy_loop, track_branches, BranchTrack, MonodromyResult};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EpError {
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("Newton search did not converge in {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("converged to a genuine degeneracy (geometric multiplicity {geometric})")]
    ConvergedToDegenerate { geometric: usize },
    #[error("point is not an EP: {reason}")]
    NotAnEp { reason: String },
    #[error("secular discriminant has degree {degree} in f, expected 5")]
    DegenerateFamily { degree: usize },
    #[error("branch matching ambiguous near parameters {at:?}")]
    TrackingAmbiguous { at: Vec<Complex64> },
    #[error("log-log fit residual {residual:.3} exceeds 0.05")]
    FitUnstable { residual: f64 },
    #[error("eigenbasis is defective at these parameters")]
    DefectiveBasis,
    #[error("labels not restored within {loops} loops")]
    NoPeriod { loops: usize },
    #[error("invalid input: {0}")]
    InvalidInput(String),
}
