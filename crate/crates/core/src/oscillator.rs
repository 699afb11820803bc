//! Two coupled damped oscillators driven at a common frequency.
//!
//! State ordering is `(p1, p2, q1, q2)` and the equations of motion are
//! `d/dt x = M x + (c1, c2, 0, 0) e^{i w t}`.
//!
//! # Frequency convention
//!
//! The secular equation `det(i w - M) = 0` taken literally has its damped
//! roots in the upper half plane. Frequencies called *physical* here are the
//! negated raw values, `w_phys = -w_raw`, which puts damping at `Im w < 0`
//! and resonances at positive real drive frequency. Every routine that
//! takes a frequency says which one it wants; [`FrequencyConvention`]
//! selects it where both are accepted.

use num_complex::Complex64;
use thiserror::Error;

use crate::linalg::{self, char_poly, ComplexSquareMatrix, Polynomial};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OscillatorError {
    #[error("invalid parameter {name}: {reason}")]
    InvalidParams { name: &'static str, reason: &'static str },
    #[error("drive amplitudes are both zero")]
    ZeroDrive,
    #[error("drive sits on a pole: condition estimate {condition:e}")]
    NearSingular { condition: f64 },
    #[error("not an EP: normalized residuals {det_residual:e}, {deriv_residual:e}")]
    NotAnEp { det_residual: f64, deriv_residual: f64 },
    #[error("the two amplitude-ratio forms disagree: {first} vs {second}")]
    FormMismatch { first: Complex64, second: Complex64 },
    #[error("need at least 2 samples, got {0}")]
    TooFewSamples(usize),
}

/// Natural frequencies `omega_j`, damping `k_j`, coupling spring `f` and
/// coupling damping `g`, in consistent (unchecked) units.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OscillatorParams {
    pub omega1: f64,
    pub omega2: f64,
    pub k1: f64,
    pub k2: f64,
    pub f: f64,
    pub g: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DriveSpec {
    pub c1: Complex64,
    pub c2: Complex64,
    pub omega: f64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum FrequencyConvention {
    /// Damping at `Im w < 0`; the solve uses `-w`.
    #[default]
    Physical,
    /// `det(i w - M) = 0` taken literally (damped roots at `Im w > 0`).
    Raw,
}

impl FrequencyConvention {
    pub fn to_raw(self, omega: Complex64) -> Complex64 {
        match self {
            FrequencyConvention::Physical => -omega,
            FrequencyConvention::Raw => omega,
        }
    }
}

pub fn physical_from_raw(raw: Complex64) -> Complex64 {
    -raw
}

pub fn raw_from_physical(physical: Complex64) -> Complex64 {
    -physical
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StationaryResponse {
    pub p1: Complex64,
    pub p2: Complex64,
    pub q1: Complex64,
    pub q2: Complex64,
    /// Frequency actually used in `(i w - M) x = c`.
    pub raw_omega: Complex64,
    /// `||(i w - M) x - c||`.
    pub residual: f64,
    /// Infinity-norm condition number of `i w - M`.
    pub condition: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SweepSample {
    pub omega: f64,
    pub abs_q1: f64,
    pub abs_q2: f64,
    /// Radians, unwrapped along the sweep.
    pub arg_q1: f64,
    pub arg_q2: f64,
    pub phase_diff: f64,
}

impl OscillatorParams {
    pub fn new(omega1: f64, omega2: f64, k1: f64, k2: f64, f: f64, g: f64) -> Self {
        Self {
            omega1,
            omega2,
            k1,
            k2,
            f,
            g,
        }
    }

    pub fn validate(&self) -> Result<(), OscillatorError> {
        for (name, v) in [
            ("omega1", self.omega1),
            ("omega2", self.omega2),
            ("k1", self.k1),
            ("k2", self.k2),
            ("f", self.f),
            ("g", self.g),
        ] {
            if !v.is_finite() {
                return Err(OscillatorError::InvalidParams {
                    name,
                    reason: "not finite",
                });
            }
        }
        if self.k1 < 0.0 {
            return Err(OscillatorError::InvalidParams {
                name: "k1",
                reason: "negative damping",
            });
        }
        if self.k2 < 0.0 {
            return Err(OscillatorError::InvalidParams {
                name: "k2",
                reason: "negative damping",
            });
        }
        Ok(())
    }

    /// Identical oscillators can only show genuine degeneracies, never EPs.
    pub fn is_symmetric(&self) -> bool {
        self.omega1 == self.omega2 && self.k1 == self.k2
    }

    pub fn with_coupling(&self, f: f64, g: f64) -> Self {
        Self { f, g, ..*self }
    }
}

/// Equation-of-motion matrix for complex coupling constants.
pub fn build_m_complex(params: &OscillatorParams, f: Complex64, g: Complex64) -> ComplexSquareMatrix {
    let r = |x: f64| Complex64::new(x, 0.0);
    let (w1, w2) = (r(params.omega1 * params.omega1), r(params.omega2 * params.omega2));
    let (k1, k2) = (r(params.k1), r(params.k2));
    let (one, z) = (r(1.0), ZERO);
    let rows = [
        [-2.0 * g - 2.0 * k1, 2.0 * g, -f - w1, f],
        [2.0 * g, -2.0 * g - 2.0 * k2, f, -f - w2],
        [one, z, z, z],
        [z, one, z, z],
    ];
    ComplexSquareMatrix::from_fn(4, |i, j| rows[i][j]).expect("finite parameters")
}

pub fn build_m(params: &OscillatorParams) -> ComplexSquareMatrix {
    build_m_complex(params, Complex64::new(params.f, 0.0), Complex64::new(params.g, 0.0))
}

/// `(M0, M1)` with `M = M0 + f M1`; `g` lives in `M0`.
pub fn build_m0_m1(params: &OscillatorParams) -> (ComplexSquareMatrix, ComplexSquareMatrix) {
    let m0 = build_m_complex(params, ZERO, Complex64::new(params.g, 0.0));
    let m1 = ComplexSquareMatrix::from_real_rows(&[
        &[0.0, 0.0, -1.0, 1.0],
        &[0.0, 0.0, 1.0, -1.0],
        &[0.0, 0.0, 0.0, 0.0],
        &[0.0, 0.0, 0.0, 0.0],
    ])
    .expect("constant matrix");
    (m0, m1)
}

/// `det(i w - M)` as a quartic in raw `w`.
pub fn secular_polynomial(params: &OscillatorParams) -> Polynomial {
    secular_polynomial_of(&build_m(params))
}

/// `det(i w - M)` for an arbitrary matrix: `c(x) = det(x - M)` at `x = i w`.
pub fn secular_polynomial_of(m: &ComplexSquareMatrix) -> Polynomial {
    char_poly(m).compose_scale(I)
}

/// `det(i w - M)` at raw `w`, by direct elimination.
pub fn secular_det(params: &OscillatorParams, omega: Complex64) -> Complex64 {
    let a = &ComplexSquareMatrix::identity(4).scale(I * omega) - &build_m(params);
    linalg::determinant(&a)
}

/// Analytic `d/dw det(i w - M)` at raw `w`.
pub fn secular_det_derivative(params: &OscillatorParams, omega: Complex64) -> Complex64 {
    secular_polynomial(params).derivative().eval(omega)
}

/// Normalized `(|P(w)|, |P'(w)|)`, each divided by its coefficient scale
/// `sum |c_k| |w|^k`.
pub fn normalized_secular_residuals(params: &OscillatorParams, raw_omega: Complex64) -> (f64, f64) {
    let p = secular_polynomial(params);
    let dp = p.derivative();
    (
        p.eval(raw_omega).norm() / p.magnitude_at(raw_omega),
        dp.eval(raw_omega).norm() / dp.magnitude_at(raw_omega),
    )
}

/// Stationary phasor response to `drive` with its frequency read in the
/// given convention.
pub fn stationary_response(
    params: &OscillatorParams,
    drive: &DriveSpec,
    convention: FrequencyConvention,
) -> Result<StationaryResponse, OscillatorError> {
    let raw = convention.to_raw(Complex64::new(drive.omega, 0.0));
    response_at(params, drive.c1, drive.c2, raw)
}

/// Stationary response at an arbitrary complex raw frequency.
pub fn response_at(
    params: &OscillatorParams,
    c1: Complex64,
    c2: Complex64,
    raw_omega: Complex64,
) -> Result<StationaryResponse, OscillatorError> {
    if c1 == ZERO && c2 == ZERO {
        return Err(OscillatorError::ZeroDrive);
    }
    let m = build_m(params);
    let a = m.shifted(I * raw_omega).scale(Complex64::new(-1.0, 0.0));
    let inv = a.inverse().map_err(|_| OscillatorError::NearSingular {
        condition: f64::INFINITY,
    })?;
    let condition = a.norm_inf() * inv.norm_inf();
    if condition.is_nan() || condition > 1e12 {
        return Err(OscillatorError::NearSingular { condition });
    }
    let rhs = [c1, c2, ZERO, ZERO];
    let x = a.solve(&rhs).map_err(|_| OscillatorError::NearSingular { condition })?;
    let ax = a.mul_vec(&x);
    let residual = linalg::vec_norm(&ax.iter().zip(&rhs).map(|(l, r)| l - r).collect::<Vec<_>>());
    Ok(StationaryResponse {
        p1: x[0],
        p2: x[1],
        q1: x[2],
        q2: x[3],
        raw_omega,
        residual,
        condition,
    })
}

/// Both closed forms of `q1/q2` at a physical EP frequency.
///
/// `first = (f + w2^2 - 2i(g + k2) w - w^2) / (f - 2 i g w)`,
/// `second = (f - 2 i g w) / (f + w1^2 - 2i(g + k1) w - w^2)`.
pub fn amplitude_ratio_forms(params: &OscillatorParams, omega: Complex64) -> (Complex64, Complex64) {
    let f = Complex64::new(params.f, 0.0);
    let cross = f - 2.0 * I * params.g * omega;
    let diag = |wj: f64, kj: f64| f + wj * wj - 2.0 * I * (params.g + kj) * omega - omega * omega;
    (
        diag(params.omega2, params.k2) / cross,
        cross / diag(params.omega1, params.k1),
    )
}

/// `q1/q2 = p1/p2` at the EP with physical frequency `omega_ep`.
///
/// Checks that `omega_ep` satisfies both coalescence conditions to 1e-6
/// (normalized) and that the two closed forms agree to 1e-4.
pub fn ep_amplitude_ratio(params: &OscillatorParams, omega_ep: Complex64) -> Result<Complex64, OscillatorError> {
    let (det_residual, deriv_residual) = normalized_secular_residuals(params, raw_from_physical(omega_ep));
    if det_residual > 1e-6 || deriv_residual > 1e-6 {
        return Err(OscillatorError::NotAnEp {
            det_residual,
            deriv_residual,
        });
    }
    let (first, second) = amplitude_ratio_forms(params, omega_ep);
    if (first - second).norm() > 1e-4 * first.norm().max(second.norm()) {
        return Err(OscillatorError::FormMismatch { first, second });
    }
    Ok(first)
}

/// Response moduli and unwrapped phases over an evenly spaced real grid of
/// drive frequencies.
pub fn frequency_sweep(
    params: &OscillatorParams,
    c1: Complex64,
    c2: Complex64,
    omega_range: (f64, f64),
    samples: usize,
    convention: FrequencyConvention,
) -> Result<Vec<SweepSample>, OscillatorError> {
    if samples < 2 {
        return Err(OscillatorError::TooFewSamples(samples));
    }
    let (lo, hi) = omega_range;
    let step = (hi - lo) / (samples - 1) as f64;
    let mut out: Vec<SweepSample> = Vec::with_capacity(samples);
    for k in 0..samples {
        let omega = if k == samples - 1 { hi } else { lo + step * k as f64 };
        let r = stationary_response(params, &DriveSpec { c1, c2, omega }, convention)?;
        let (a1, a2, d) = (r.q1.arg(), r.q2.arg(), (r.q1 / r.q2).arg());
        let (a1, a2, d) = match out.last() {
            Some(prev) => (
                unwrap(prev.arg_q1, a1),
                unwrap(prev.arg_q2, a2),
                unwrap(prev.phase_diff, d),
            ),
            None => (a1, a2, d),
        };
        out.push(SweepSample {
            omega,
            abs_q1: r.q1.norm(),
            abs_q2: r.q2.norm(),
            arg_q1: a1,
            arg_q2: a2,
            phase_diff: d,
        });
    }
    Ok(out)
}

/// The branch of `angle + 2 pi n` nearest to `prev`.
fn unwrap(prev: f64, angle: f64) -> f64 {
    let tau = std::f64::consts::TAU;
    angle + tau * ((prev - angle) / tau).round()
}
