//! Closed forms for the 2x2 family `h(lambda) = diag(e1, e2) + lambda S diag(w1, w2) S^-1`
//! with `S = [[cos p1, -sin p2], [sin p1, cos p2]]`.
//!
//! Angles are radians and may be complex. Square roots use the principal
//! branch; the two EP branches are selected explicitly through [`Branch`].

use num_complex::Complex64;
use thiserror::Error;

use crate::linalg::{self, ComplexSquareMatrix};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TwoLevelError {
    #[error("S is singular: |cos(phi1 - phi2)| = {det_abs:e}")]
    SingularS { det_abs: f64 },
    #[error("slopes coincide: |w1 - w2| = {gap:e}")]
    DegenerateSlopes { gap: f64 },
    #[error("EP eigenvector undefined at these angles")]
    AngleSingularity,
    #[error("real-spectrum analysis needs real parameters ({name} is complex)")]
    ComplexParameter { name: &'static str },
    #[error("need at least 2 samples, got {0}")]
    TooFewSamples(usize),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TwoLevelSystem {
    pub eps1: Complex64,
    pub eps2: Complex64,
    pub om1: Complex64,
    pub om2: Complex64,
    pub phi1: Complex64,
    pub phi2: Complex64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Branch {
    Plus,
    Minus,
}

impl Branch {
    pub fn sign(self) -> f64 {
        match self {
            Branch::Plus => 1.0,
            Branch::Minus => -1.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EpPair {
    pub lambda_plus: Complex64,
    pub lambda_minus: Complex64,
    pub coalesced_energy_plus: Complex64,
    pub coalesced_energy_minus: Complex64,
    pub both_real: bool,
}

impl EpPair {
    pub fn lambda(&self, branch: Branch) -> Complex64 {
        match branch {
            Branch::Plus => self.lambda_plus,
            Branch::Minus => self.lambda_minus,
        }
    }

    pub fn energy(&self, branch: Branch) -> Complex64 {
        match branch {
            Branch::Plus => self.coalesced_energy_plus,
            Branch::Minus => self.coalesced_energy_minus,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WindowSample {
    pub lambda: f64,
    pub e1: Complex64,
    pub e2: Complex64,
    pub is_real_pair: bool,
}

impl TwoLevelSystem {
    pub fn new(
        eps1: Complex64,
        eps2: Complex64,
        om1: Complex64,
        om2: Complex64,
        phi1: Complex64,
        phi2: Complex64,
    ) -> Self {
        Self {
            eps1,
            eps2,
            om1,
            om2,
            phi1,
            phi2,
        }
    }

    /// Real parameters with angles in degrees.
    pub fn from_degrees(eps1: f64, eps2: f64, om1: f64, om2: f64, phi1: f64, phi2: f64) -> Self {
        let r = |x: f64| Complex64::new(x, 0.0);
        Self::new(
            r(eps1),
            r(eps2),
            r(om1),
            r(om2),
            r(phi1.to_radians()),
            r(phi2.to_radians()),
        )
    }

    pub fn is_real(&self) -> bool {
        self.complex_field().is_none()
    }

    fn complex_field(&self) -> Option<&'static str> {
        [
            ("eps1", self.eps1),
            ("eps2", self.eps2),
            ("om1", self.om1),
            ("om2", self.om2),
            ("phi1", self.phi1),
            ("phi2", self.phi2),
        ]
        .into_iter()
        .find(|(_, z)| z.im != 0.0)
        .map(|(n, _)| n)
    }

    fn det_s(&self) -> Result<Complex64, TwoLevelError> {
        let d = (self.phi1 - self.phi2).cos();
        if d.norm() < 1e-12 {
            return Err(TwoLevelError::SingularS { det_abs: d.norm() });
        }
        Ok(d)
    }

    /// `S diag(w1, w2) S^-1`, the lambda-linear part.
    pub fn h1(&self) -> Result<ComplexSquareMatrix, TwoLevelError> {
        let det = self.det_s()?;
        let (c1, s1) = (self.phi1.cos(), self.phi1.sin());
        let (c2, s2) = (self.phi2.cos(), self.phi2.sin());
        let dw = self.om1 - self.om2;
        let m = [
            (c1 * c2 * self.om1 + s1 * s2 * self.om2) / det,
            c1 * s2 * dw / det,
            s1 * c2 * dw / det,
            (s1 * s2 * self.om1 + c1 * c2 * self.om2) / det,
        ];
        Ok(ComplexSquareMatrix::from_row_major(2, m.to_vec()).expect("finite 2x2"))
    }
}

pub fn build_h(sys: &TwoLevelSystem, lambda: Complex64) -> Result<ComplexSquareMatrix, TwoLevelError> {
    let h1 = sys.h1()?;
    let mut h = h1.scale(lambda);
    h[(0, 0)] += sys.eps1;
    h[(1, 1)] += sys.eps2;
    Ok(h)
}

/// `D^2` as a polynomial in lambda, factored through its roots when the
/// slopes differ so that it vanishes cleanly at the EPs.
fn discriminant_sq(sys: &TwoLevelSystem, lambda: Complex64) -> Result<Complex64, TwoLevelError> {
    let det = sys.det_s()?;
    let de = sys.eps1 - sys.eps2;
    let dw = sys.om1 - sys.om2;
    if dw != ZERO && de != ZERO {
        let (lp, lm) = ep_lambdas(sys, det);
        return Ok(dw * dw * (lambda - lp) * (lambda - lm));
    }
    let ratio = (sys.phi1 + sys.phi2).cos() / det;
    Ok(de * de + lambda * lambda * dw * dw + 2.0 * lambda * de * dw * ratio)
}

fn ep_lambdas(sys: &TwoLevelSystem, det: Complex64) -> (Complex64, Complex64) {
    let de = sys.eps1 - sys.eps2;
    let dw = sys.om1 - sys.om2;
    let root = ((2.0 * sys.phi1).sin() * (2.0 * sys.phi2).sin()).sqrt();
    let cp = (sys.phi1 + sys.phi2).cos();
    let pre = -de / dw / det;
    (pre * (cp + I * root), pre * (cp - I * root))
}

/// Principal square root of the discriminant.
pub fn discriminant(sys: &TwoLevelSystem, lambda: Complex64) -> Result<Complex64, TwoLevelError> {
    Ok(discriminant_sq(sys, lambda)?.sqrt())
}

/// `(E1, E2) = ((e1 + e2 + lambda (w1 + w2)) +- D) / 2`.
pub fn eigenvalues_closed_form(
    sys: &TwoLevelSystem,
    lambda: Complex64,
) -> Result<(Complex64, Complex64), TwoLevelError> {
    let d = discriminant(sys, lambda)?;
    let mid = sys.eps1 + sys.eps2 + lambda * (sys.om1 + sys.om2);
    Ok(((mid + d) / 2.0, (mid - d) / 2.0))
}

pub fn ep_locations(sys: &TwoLevelSystem) -> Result<EpPair, TwoLevelError> {
    let det = sys.det_s()?;
    let dw = sys.om1 - sys.om2;
    let scale = sys.om1.norm().max(sys.om2.norm()).max(1.0);
    if dw.norm() < 1e-12 * scale {
        return Err(TwoLevelError::DegenerateSlopes { gap: dw.norm() });
    }
    let (lp, lm) = ep_lambdas(sys, det);
    let energy = |l: Complex64| (sys.eps1 + sys.eps2 + l * (sys.om1 + sys.om2)) / 2.0;
    let real = |l: Complex64| l.im.abs() <= 1e-10 * l.norm();
    Ok(EpPair {
        lambda_plus: lp,
        lambda_minus: lm,
        coalesced_energy_plus: energy(lp),
        coalesced_energy_minus: energy(lm),
        both_real: real(lp) && real(lm),
    })
}

/// `sqrt(sin 2 phi1 sin 2 phi2)`, the same root that separates the two EPs.
fn angle_root(sys: &TwoLevelSystem) -> Complex64 {
    ((2.0 * sys.phi1).sin() * (2.0 * sys.phi2).sin()).sqrt()
}

fn special_angles(sys: &TwoLevelSystem) -> bool {
    angle_root(sys).norm() < 1e-12
}

/// Right EP eigenvector `(r, 1)` with `r^2 = -cot phi1 / cot phi2`.
///
/// The sign of `r` is the one that belongs to the chosen branch, so
/// `h(lambda_EP) (r, 1)^T = E_EP (r, 1)^T` holds for both branches.
/// When `sin 2 phi1 sin 2 phi2 = 0` the two EPs merge and the vector is
/// taken from the null space instead.
pub fn ep_eigenvector_right(sys: &TwoLevelSystem, branch: Branch) -> Result<[Complex64; 2], TwoLevelError> {
    if special_angles(sys) {
        return numeric_ep_vector(sys, branch, false);
    }
    let r = branch.sign() * I * 2.0 * sys.phi1.cos() * sys.phi2.sin() / angle_root(sys);
    Ok([r, ONE])
}

/// Left EP eigenvector `(l, 1)` with `l^2 = -tan phi1 / tan phi2`, and
/// `l r = -1` against the right vector of the same branch.
pub fn ep_eigenvector_left(sys: &TwoLevelSystem, branch: Branch) -> Result<[Complex64; 2], TwoLevelError> {
    if special_angles(sys) {
        return numeric_ep_vector(sys, branch, true);
    }
    let l = branch.sign() * I * 2.0 * sys.phi1.sin() * sys.phi2.cos() / angle_root(sys);
    Ok([l, ONE])
}

fn numeric_ep_vector(sys: &TwoLevelSystem, branch: Branch, left: bool) -> Result<[Complex64; 2], TwoLevelError> {
    let ep = ep_locations(sys)?;
    let h = build_h(sys, ep.lambda(branch))?;
    let a = h.shifted(ep.energy(branch));
    // a scalar matrix here means a genuine crossing: no unique vector
    let scale = h.frobenius_norm().max(1.0);
    if a.frobenius_norm() <= 1e-10 * scale {
        return Err(TwoLevelError::AngleSingularity);
    }
    let v = if left {
        linalg::left_null_vector(&h, ep.energy(branch))
    } else {
        linalg::right_null_vector(&h, ep.energy(branch))
    };
    if v[1].norm() > 1e-12 {
        Ok([v[0] / v[1], ONE])
    } else {
        Ok([ONE, v[1] / v[0]])
    }
}

/// `|<left|right>|` for the unnormalized EP vectors of one branch.
pub fn self_orthogonality(sys: &TwoLevelSystem, branch: Branch) -> Result<f64, TwoLevelError> {
    let r = ep_eigenvector_right(sys, branch)?;
    let l = ep_eigenvector_left(sys, branch)?;
    Ok(linalg::pairing(&l, &r).norm())
}

/// Closed-form spectrum on an evenly spaced real lambda grid.
pub fn real_spectrum_window(
    sys: &TwoLevelSystem,
    lambda_range: (f64, f64),
    samples: usize,
) -> Result<Vec<WindowSample>, TwoLevelError> {
    if let Some(name) = sys.complex_field() {
        return Err(TwoLevelError::ComplexParameter { name });
    }
    if samples < 2 {
        return Err(TwoLevelError::TooFewSamples(samples));
    }
    let (lo, hi) = lambda_range;
    let step = (hi - lo) / (samples - 1) as f64;
    (0..samples)
        .map(|k| {
            let lambda = if k == samples - 1 { hi } else { lo + step * k as f64 };
            let (e1, e2) = eigenvalues_closed_form(sys, Complex64::new(lambda, 0.0))?;
            Ok(WindowSample {
                lambda,
                e1,
                e2,
                is_real_pair: is_real(e1) && is_real(e2),
            })
        })
        .collect()
}

fn is_real(e: Complex64) -> bool {
    e.im.abs() <= 1e-9 * e.norm().max(1.0)
}
