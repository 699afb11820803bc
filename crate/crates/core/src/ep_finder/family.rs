use num_complex::Complex64;

use crate::linalg::{self, char_poly, ComplexSquareMatrix, Polynomial};
use crate::oscillator::{build_m_complex, OscillatorParams};
use crate::two_level::{TwoLevelError, TwoLevelSystem};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// How the spectral unknown `w` relates to an eigenvalue `x` of the matrix.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SpectralVariable {
    /// `x = w`; the secular function is `det(w - M)`.
    Eigenvalue,
    /// `x = i w`; the secular function is `det(i w - M)`.
    Frequency,
}

impl SpectralVariable {
    pub fn to_eigenvalue(self, w: Complex64) -> Complex64 {
        match self {
            SpectralVariable::Eigenvalue => w,
            SpectralVariable::Frequency => I * w,
        }
    }

    pub fn from_eigenvalue(self, x: Complex64) -> Complex64 {
        match self {
            SpectralVariable::Eigenvalue => x,
            SpectralVariable::Frequency => -I * x,
        }
    }
}

/// A matrix-valued function of a few complex parameters.
///
/// `evaluate` must be deterministic and free of interior mutation so that
/// scans can call it from several threads.
pub trait MatrixFamily: Sync {
    fn dim(&self) -> usize;
    fn param_names(&self) -> Vec<String>;
    fn evaluate(&self, params: &[Complex64]) -> ComplexSquareMatrix;

    fn spectral_variable(&self) -> SpectralVariable {
        SpectralVariable::Eigenvalue
    }

    fn num_params(&self) -> usize {
        self.param_names().len()
    }
}

/// Secular polynomial of `family` at `params` in the family's spectral
/// variable.
pub fn secular_polynomial<F: MatrixFamily + ?Sized>(family: &F, params: &[Complex64]) -> Polynomial {
    let c = char_poly(&family.evaluate(params));
    match family.spectral_variable() {
        SpectralVariable::Eigenvalue => c,
        SpectralVariable::Frequency => c.compose_scale(I),
    }
}

/// Secular determinant by direct elimination.
pub fn secular_det<F: MatrixFamily + ?Sized>(family: &F, params: &[Complex64], w: Complex64) -> Complex64 {
    let m = family.evaluate(params);
    let x = family.spectral_variable().to_eigenvalue(w);
    let a = &ComplexSquareMatrix::identity(m.dim()).scale(x) - &m;
    linalg::determinant(&a)
}

/// Family from a closure.
pub struct FnFamily<F> {
    dim: usize,
    names: Vec<String>,
    variable: SpectralVariable,
    f: F,
}

impl<F> FnFamily<F>
where
    F: Fn(&[Complex64]) -> ComplexSquareMatrix + Sync,
{
    pub fn new(dim: usize, names: &[&str], variable: SpectralVariable, f: F) -> Self {
        Self {
            dim,
            names: names.iter().map(|s| s.to_string()).collect(),
            variable,
            f,
        }
    }
}

impl<F> MatrixFamily for FnFamily<F>
where
    F: Fn(&[Complex64]) -> ComplexSquareMatrix + Sync,
{
    fn dim(&self) -> usize {
        self.dim
    }

    fn param_names(&self) -> Vec<String> {
        self.names.clone()
    }

    fn evaluate(&self, params: &[Complex64]) -> ComplexSquareMatrix {
        (self.f)(params)
    }

    fn spectral_variable(&self) -> SpectralVariable {
        self.variable
    }
}

/// `h(lambda)` of a two-level system; one parameter, `lambda`.
#[derive(Clone, Debug)]
pub struct TwoLevelFamily {
    sys: TwoLevelSystem,
    h1: ComplexSquareMatrix,
}

impl TwoLevelFamily {
    pub fn new(sys: TwoLevelSystem) -> Result<Self, TwoLevelError> {
        Ok(Self { h1: sys.h1()?, sys })
    }

    pub fn system(&self) -> &TwoLevelSystem {
        &self.sys
    }
}

impl MatrixFamily for TwoLevelFamily {
    fn dim(&self) -> usize {
        2
    }

    fn param_names(&self) -> Vec<String> {
        vec!["lambda".into()]
    }

    fn evaluate(&self, params: &[Complex64]) -> ComplexSquareMatrix {
        let mut h = self.h1.scale(params[0]);
        h[(0, 0)] += self.sys.eps1;
        h[(1, 1)] += self.sys.eps2;
        h
    }
}

/// Oscillator matrix with `(f, g)` as complex parameters; frequency variable.
#[derive(Clone, Copy, Debug)]
pub struct OscillatorFamily {
    pub base: OscillatorParams,
}

impl OscillatorFamily {
    pub fn new(base: OscillatorParams) -> Self {
        Self { base }
    }

    /// `[f, g]` of `p` as family parameters.
    pub fn params_of(p: &OscillatorParams) -> Vec<Complex64> {
        vec![Complex64::new(p.f, 0.0), Complex64::new(p.g, 0.0)]
    }
}

impl MatrixFamily for OscillatorFamily {
    fn dim(&self) -> usize {
        4
    }

    fn param_names(&self) -> Vec<String> {
        vec!["f".into(), "g".into()]
    }

    fn evaluate(&self, params: &[Complex64]) -> ComplexSquareMatrix {
        build_m_complex(&self.base, params[0], params[1])
    }

    fn spectral_variable(&self) -> SpectralVariable {
        SpectralVariable::Frequency
    }
}
