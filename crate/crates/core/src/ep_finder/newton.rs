use num_complex::Complex64;

use super::family::{secular_det, secular_polynomial, MatrixFamily, OscillatorFamily, SpectralVariable};
use super::EpError;
use crate::linalg::{self, defect_report, ComplexSquareMatrix, DefectReport};
use crate::oscillator::OscillatorParams;

const I: Complex64 = Complex64::new(0.0, 1.0);
const POLISH_STEPS: usize = 3;

/// Secular function and its derivative at one point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CoalescenceResidual {
    /// `det(x - M)` with `x` the eigenvalue belonging to `w`.
    pub det: Complex64,
    /// `d/dw` of the same, from the polynomial coefficients.
    pub deriv: Complex64,
    /// `|det|` over the coefficient scale `sum |c_k| |w|^k`.
    pub det_normalized: f64,
    pub deriv_normalized: f64,
}

impl CoalescenceResidual {
    pub fn max_normalized(&self) -> f64 {
        self.det_normalized.max(self.deriv_normalized)
    }
}

pub fn coalescence_residual<F: MatrixFamily + ?Sized>(
    family: &F,
    params: &[Complex64],
    w: Complex64,
) -> CoalescenceResidual {
    let p = secular_polynomial(family, params);
    let dp = p.derivative();
    let det = secular_det(family, params, w);
    let deriv = dp.eval(w);
    CoalescenceResidual {
        det,
        deriv,
        det_normalized: det.norm() / p.magnitude_at(w),
        deriv_normalized: deriv.norm() / dp.magnitude_at(w).max(f64::MIN_POSITIVE),
    }
}

/// Which real unknowns Newton may move besides `w`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FreeParams {
    /// Real parts of two parameters; imaginary parts stay at the seed.
    TwoReal(usize, usize),
    /// Real and imaginary part of one parameter.
    OneComplex(usize),
}

impl FreeParams {
    fn check(self, n: usize) -> Result<(), EpError> {
        let ok = match self {
            FreeParams::TwoReal(a, b) => a < n && b < n && a != b,
            FreeParams::OneComplex(a) => a < n,
        };
        if ok {
            Ok(())
        } else {
            Err(EpError::InvalidInput(format!(
                "free parameters {self:?} for {n} parameters"
            )))
        }
    }

    fn get(self, p: &[Complex64]) -> [f64; 2] {
        match self {
            FreeParams::TwoReal(a, b) => [p[a].re, p[b].re],
            FreeParams::OneComplex(a) => [p[a].re, p[a].im],
        }
    }

    fn set(self, p: &mut [Complex64], v: [f64; 2]) {
        match self {
            FreeParams::TwoReal(a, b) => {
                p[a].re = v[0];
                p[b].re = v[1];
            }
            FreeParams::OneComplex(a) => p[a] = Complex64::new(v[0], v[1]),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EpSeed {
    pub params: Vec<Complex64>,
    pub omega: Complex64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NewtonOptions {
    /// Converged when both normalized residuals are below this.
    pub tol: f64,
    /// Accepted at the iteration limit when below this.
    pub admission: f64,
    pub max_iter: usize,
    /// Relative step for finite differences in the parameters.
    pub fd_step: f64,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            admission: 1e-8,
            max_iter: 100,
            fd_step: 1e-7,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExceptionalPoint {
    pub params: Vec<Complex64>,
    /// Coalesced root in the family's spectral variable (raw convention for
    /// frequency families).
    pub frequency: Complex64,
    /// The coalesced eigenvalue of the matrix.
    pub eigenvalue: Complex64,
    /// Unit-norm right null vector of `M - x`.
    pub eigenvector: Vec<Complex64>,
    /// Unit-norm left null vector of `M - x`.
    pub left_eigenvector: Vec<Complex64>,
    pub det_residual: f64,
    pub deriv_residual: f64,
    /// `|u . v|` of the unit vectors above.
    pub self_pairing: f64,
    pub defect: DefectReport,
    pub iterations: usize,
}

impl ExceptionalPoint {
    /// The mirror EP `(-conj w, conj params)` of a family with real matrix
    /// entries at real parameters (conjugated vectors).
    pub fn conjugate_partner(&self) -> Self {
        let conj = |v: &[Complex64]| v.iter().map(|z| z.conj()).collect::<Vec<_>>();
        Self {
            params: conj(&self.params),
            frequency: -self.frequency.conj(),
            eigenvalue: self.eigenvalue.conj(),
            eigenvector: conj(&self.eigenvector),
            left_eigenvector: conj(&self.left_eigenvector),
            defect: DefectReport {
                eigenvalue: self.defect.eigenvalue.conj(),
                ..self.defect.clone()
            },
            ..self.clone()
        }
    }
}

fn residual_vec(p: Complex64, dp: Complex64) -> [f64; 4] {
    [p.re, p.im, dp.re, dp.im]
}

/// Damped Newton on `(Re P, Im P, Re P', Im P')` in `(Re w, Im w)` and two
/// real parameter unknowns.
pub fn newton_ep_search<F: MatrixFamily + ?Sized>(
    family: &F,
    free: FreeParams,
    seed: &EpSeed,
    opts: &NewtonOptions,
) -> Result<ExceptionalPoint, EpError> {
    free.check(family.num_params())?;
    let mut params = seed.params.clone();
    let mut w = seed.omega;

    let merit = |params: &[Complex64], w: Complex64| {
        let p = secular_polynomial(family, params);
        let dp = p.derivative();
        (p.eval(w).norm() / p.magnitude_at(w)).max(dp.eval(w).norm() / dp.magnitude_at(w).max(f64::MIN_POSITIVE))
    };

    let mut best = merit(&params, w);
    let mut polish = 0;
    for it in 0..=opts.max_iter {
        // a few extra steps past the tolerance sharpen the EP vectors,
        // whose accuracy goes as the square root of the residual
        if best <= opts.tol {
            if polish == POLISH_STEPS || best == 0.0 {
                return finish(family, params, w, it);
            }
            polish += 1;
        }
        if it == opts.max_iter {
            break;
        }
        let p = secular_polynomial(family, &params);
        let dp = p.derivative();
        let d2p = dp.derivative();
        let (p0, p1, p2) = (p.eval(w), dp.eval(w), d2p.eval(w));
        let f0 = residual_vec(p0, p1);

        let mut jac = [[0.0f64; 4]; 4];
        let col_re = residual_vec(p1, p2);
        let col_im = residual_vec(I * p1, I * p2);
        let base = free.get(&params);
        let mut cols = vec![col_re, col_im];
        for k in 0..2 {
            let h = opts.fd_step * base[k].abs().max(1.0);
            let eval_at = |delta: f64| {
                let mut v = base;
                v[k] += delta;
                let mut q = params.clone();
                free.set(&mut q, v);
                let poly = secular_polynomial(family, &q);
                residual_vec(poly.eval(w), poly.derivative().eval(w))
            };
            let (fp, fm) = (eval_at(h), eval_at(-h));
            cols.push(std::array::from_fn(|r| (fp[r] - fm[r]) / (2.0 * h)));
        }
        for (c, col) in cols.iter().enumerate() {
            for r in 0..4 {
                jac[r][c] = col[r];
            }
        }
        let j = ComplexSquareMatrix::from_fn(4, |r, c| Complex64::new(jac[r][c], 0.0))?;
        let rhs: Vec<Complex64> = f0.iter().map(|&x| Complex64::new(-x, 0.0)).collect();
        let step = match j.solve(&rhs) {
            Ok(s) => s,
            Err(_) => {
                return Err(EpError::NoConvergence {
                    iterations: it,
                    residual: best,
                })
            }
        };
        let step: Vec<f64> = step.iter().map(|z| z.re).collect();

        // backtracking on the normalized merit
        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..12 {
            let w_new = w + t * Complex64::new(step[0], step[1]);
            let mut q = params.clone();
            free.set(&mut q, [base[0] + t * step[2], base[1] + t * step[3]]);
            let m = merit(&q, w_new);
            if m < best {
                accepted = Some((q, w_new, m));
                break;
            }
            t *= 0.5;
        }
        match accepted {
            Some((q, w_new, m)) => {
                params = q;
                w = w_new;
                best = m;
            }
            None => {
                if best <= opts.admission {
                    return finish(family, params, w, it);
                }
                return Err(EpError::NoConvergence {
                    iterations: it,
                    residual: best,
                });
            }
        }
    }
    if best <= opts.admission {
        return finish(family, params, w, opts.max_iter);
    }
    Err(EpError::NoConvergence {
        iterations: opts.max_iter,
        residual: best,
    })
}

fn finish<F: MatrixFamily + ?Sized>(
    family: &F,
    params: Vec<Complex64>,
    w: Complex64,
    iterations: usize,
) -> Result<ExceptionalPoint, EpError> {
    let m = family.evaluate(&params);
    let x = family.spectral_variable().to_eigenvalue(w);
    let defect = defect_report(&m, x).map_err(|e| EpError::NotAnEp { reason: e.to_string() })?;
    if defect.geometric_multiplicity >= 2 {
        return Err(EpError::ConvergedToDegenerate {
            geometric: defect.geometric_multiplicity,
        });
    }
    if !defect.is_defective {
        return Err(EpError::NotAnEp {
            reason: format!(
                "algebraic multiplicity {} at the converged point",
                defect.algebraic_multiplicity
            ),
        });
    }
    let v = linalg::right_null_vector(&m, x);
    let u = linalg::left_null_vector(&m, x);
    let self_pairing = linalg::pairing(&u, &v).norm();
    let res = coalescence_residual(family, &params, w);
    Ok(ExceptionalPoint {
        params,
        frequency: w,
        eigenvalue: x,
        eigenvector: v,
        left_eigenvector: u,
        det_residual: res.det_normalized,
        deriv_residual: res.deriv_normalized,
        self_pairing,
        defect,
        iterations,
    })
}

/// Roots of `P'` with the normalized `|P|` there, best first.
pub fn critical_points<F: MatrixFamily + ?Sized>(family: &F, params: &[Complex64]) -> Vec<(Complex64, f64)> {
    let p = secular_polynomial(family, params);
    let dp = p.derivative();
    let Ok(roots) = dp.roots() else {
        return Vec::new();
    };
    let mut out: Vec<(Complex64, f64)> = roots
        .into_iter()
        .map(|w| (w, p.eval(w).norm() / p.magnitude_at(w)))
        .collect();
    out.sort_by(|a, b| a.1.total_cmp(&b.1));
    out
}

#[derive(Clone, Debug)]
pub struct GridScan {
    pub axis_a: Vec<f64>,
    pub axis_b: Vec<f64>,
    /// `values[i][j]` at `(axis_a[i], axis_b[j])`: smallest normalized
    /// `|P|` over the critical points of `P`.
    pub values: Vec<Vec<f64>>,
    /// Local minima below the threshold, best first.
    pub seeds: Vec<EpSeed>,
}

/// Heat map of how close `P` comes to a double root over a grid of the
/// free unknowns, with local minima as Newton seeds.
pub fn grid_scan<F: MatrixFamily + ?Sized>(
    family: &F,
    base: &[Complex64],
    free: FreeParams,
    ranges: [(f64, f64); 2],
    shape: (usize, usize),
    threshold: f64,
) -> Result<GridScan, EpError> {
    free.check(family.num_params())?;
    if shape.0 < 2 || shape.1 < 2 {
        return Err(EpError::InvalidInput("grid needs at least 2 points per axis".into()));
    }
    let axis = |(lo, hi): (f64, f64), n: usize| -> Vec<f64> {
        (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect()
    };
    let (axis_a, axis_b) = (axis(ranges[0], shape.0), axis(ranges[1], shape.1));
    let mut values = vec![vec![0.0; shape.1]; shape.0];
    let mut omegas = vec![vec![Complex64::new(0.0, 0.0); shape.1]; shape.0];
    for (i, &a) in axis_a.iter().enumerate() {
        for (j, &b) in axis_b.iter().enumerate() {
            let mut p = base.to_vec();
            free.set(&mut p, [a, b]);
            let best = critical_points(family, &p).into_iter().next();
            let (w, v) = best.unwrap_or((Complex64::new(0.0, 0.0), f64::INFINITY));
            values[i][j] = v;
            omegas[i][j] = w;
        }
    }
    let mut minima = Vec::new();
    for i in 0..shape.0 {
        for j in 0..shape.1 {
            let v = values[i][j];
            if v.is_nan() || v >= threshold {
                continue;
            }
            let mut is_min = true;
            for di in -1i64..=1 {
                for dj in -1i64..=1 {
                    let (ii, jj) = (i as i64 + di, j as i64 + dj);
                    if (di, dj) == (0, 0) || ii < 0 || jj < 0 || ii >= shape.0 as i64 || jj >= shape.1 as i64 {
                        continue;
                    }
                    if values[ii as usize][jj as usize] < v {
                        is_min = false;
                    }
                }
            }
            if is_min {
                let mut p = base.to_vec();
                free.set(&mut p, [axis_a[i], axis_b[j]]);
                minima.push((
                    v,
                    EpSeed {
                        params: p,
                        omega: omegas[i][j],
                    },
                ));
            }
        }
    }
    minima.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(GridScan {
        axis_a,
        axis_b,
        values,
        seeds: minima.into_iter().map(|(_, s)| s).collect(),
    })
}

/// Newton search over real `(f, g)` for the oscillator family, seeded at
/// `(f, g)` with the critical point of the secular quartic that comes
/// closest to a double root.
///
/// The result is reported on the member of the mirror pair whose physical
/// frequency `-w` has a positive real part.
pub fn find_oscillator_ep(
    base: &OscillatorParams,
    seed_f: f64,
    seed_g: f64,
    opts: &NewtonOptions,
) -> Result<ExceptionalPoint, EpError> {
    let family = OscillatorFamily::new(*base);
    let params = OscillatorFamily::params_of(&base.with_coupling(seed_f, seed_g));
    let (omega, _) = critical_points(&family, &params)
        .into_iter()
        .next()
        .ok_or_else(|| EpError::InvalidInput("secular polynomial has no critical points".into()))?;
    let ep = newton_ep_search(&family, FreeParams::TwoReal(0, 1), &EpSeed { params, omega }, opts)?;
    debug_assert_eq!(family.spectral_variable(), SpectralVariable::Frequency);
    if (-ep.frequency).re < 0.0 {
        Ok(ep.conjugate_partner())
    } else {
        Ok(ep)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ep_finder::TwoLevelFamily;
    use crate::two_level::{ep_locations, TwoLevelSystem};

    #[test]
    fn two_level_complex_lambda_search() {
        let sys = TwoLevelSystem::from_degrees(-1.0, 1.0, -0.2, -0.6, 20.0, 35.0);
        let fam = TwoLevelFamily::new(sys).unwrap();
        let eps = ep_locations(&sys).unwrap();
        let target = eps.lambda_plus;
        let seed = EpSeed {
            params: vec![target + Complex64::new(0.05, -0.03)],
            omega: eps.coalesced_energy_plus + 0.02,
        };
        let ep = newton_ep_search(&fam, FreeParams::OneComplex(0), &seed, &NewtonOptions::default()).unwrap();
        assert!((ep.params[0] - target).norm() < 1e-9, "{:?} vs {target}", ep.params);
        assert!(ep.defect.is_defective);
    }

    #[test]
    fn bad_free_params_rejected() {
        let sys = TwoLevelSystem::from_degrees(-1.0, 1.0, -0.2, -0.6, 20.0, 35.0);
        let fam = TwoLevelFamily::new(sys).unwrap();
        let seed = EpSeed {
            params: vec![Complex64::new(1.0, 0.0)],
            omega: Complex64::new(0.0, 0.0),
        };
        assert!(matches!(
            newton_ep_search(&fam, FreeParams::TwoReal(0, 1), &seed, &NewtonOptions::default()),
            Err(EpError::InvalidInput(_))
        ));
    }

    #[test]
    fn reference_oscillator_ep() {
        let base = OscillatorParams::new(10.0, 10.0, 0.2, 0.1, 0.0, 0.0);
        let ep = find_oscillator_ep(&base, 1.0, 0.001, &NewtonOptions::default()).unwrap();
        assert!((ep.params[0].re - 1.00511364).abs() < 1e-7, "{:?}", ep.params);
        assert!((ep.params[1].re - 7.50084389e-4).abs() < 1e-10);
        let phys = -ep.frequency;
        assert!(
            (phys - Complex64::new(10.0487505159, -0.150750084)).norm() < 1e-8,
            "{phys}"
        );
        assert!(ep.self_pairing < 1e-8, "{}", ep.self_pairing);
    }

    #[test]
    fn identical_oscillators_are_degenerate() {
        let base = OscillatorParams::new(10.0, 10.0, 0.1, 0.1, 0.0, 0.0);
        assert!(matches!(
            find_oscillator_ep(&base, 0.0, 0.0, &NewtonOptions::default()),
            Err(EpError::ConvergedToDegenerate { geometric: 2 })
        ));
    }
}
