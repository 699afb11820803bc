//! EP condition for the oscillator as a polynomial in the spring constant.
//!
//! The secular quartic has a double root exactly where its discriminant
//! vanishes. As a function of `f` (all other constants fixed) that
//! discriminant is a degree-5 polynomial, recovered here by exact-degree
//! interpolation of `prod_{i<j} (x_i - x_j)^2` over integer nodes.

use num_complex::Complex64;

use super::family::{MatrixFamily, OscillatorFamily};
use super::newton::critical_points;
use super::EpError;
use crate::linalg::{defect_report, eig, ComplexSquareMatrix, Polynomial};
use crate::oscillator::{build_m_complex, OscillatorParams};

const NODES: [f64; 8] = [-4.0, -3.0, -2.0, -1.0, 0.0, 1.0, 2.0, 3.0];
const GOLDEN_ITERS: usize = 80;

/// Monic degree-5 polynomial in `f` whose roots are the spring constants
/// giving a double root of the secular quartic at the given `g`
/// (`base.f` is ignored).
pub fn resultant_quintic_in_f(base: &OscillatorParams) -> Result<Polynomial, EpError> {
    let g = Complex64::new(base.g, 0.0);
    let values: Vec<Complex64> = NODES
        .iter()
        .map(|&f| {
            let x = eig(&build_m_complex(base, Complex64::new(f, 0.0), g)).eigenvalues;
            let mut d = Complex64::new(1.0, 0.0);
            for i in 0..x.len() {
                for j in (i + 1)..x.len() {
                    d *= (x[i] - x[j]) * (x[i] - x[j]);
                }
            }
            d
        })
        .collect();
    let n = NODES.len();
    let vander = ComplexSquareMatrix::from_fn(n, |i, j| Complex64::new(NODES[i].powi(j as i32), 0.0))?;
    let coeffs = vander.solve(&values)?;

    let reach = NODES.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    let weight = |k: usize| coeffs[k].norm() * reach.powi(k as i32);
    let scale = (0..n).map(weight).fold(0.0, f64::max);
    if scale == 0.0 {
        return Err(EpError::DegenerateFamily { degree: 0 });
    }
    // degrees 6 and 7 are interpolation noise; the leading term must survive
    let degree = (0..=5).rev().find(|&k| weight(k) > 1e-9 * scale).unwrap_or(0);
    if degree < 5 {
        return Err(EpError::DegenerateFamily { degree });
    }
    Ok(Polynomial::new(coeffs[..=5].to_vec()).monic())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RealFEp {
    pub g: f64,
    pub f: f64,
    /// Coalesced root of `det(i w - M)`.
    pub raw_omega: Complex64,
    /// `-raw_omega`, on the member of the mirror pair with positive real part.
    pub omega: Complex64,
    /// True when `f` is a double root of the quintic reached by tuning `g`;
    /// false for a simple real root (purely imaginary frequency).
    pub tuned: bool,
}

/// Scan `g` and collect EPs at real positive `f`.
///
/// Simple real roots of the quintic are reported at every sample. A complex
/// pair of roots can only reach the real axis by touching it, so those are
/// found as minima over `g` of the squared half-separation of the pair,
/// `2 Q(f_c) / Q''(f_c)` at the real critical point `f_c` of `Q`, refined
/// by golden-section search.
pub fn tune_g_for_real_f(
    base: &OscillatorParams,
    g_range: (f64, f64),
    samples: usize,
) -> Result<Vec<RealFEp>, EpError> {
    if samples < 3 || !(g_range.0.is_finite() && g_range.1.is_finite()) {
        return Err(EpError::InvalidInput(
            "g scan needs a finite range and >= 3 samples".into(),
        ));
    }
    let (lo, hi) = g_range;
    let gs: Vec<f64> = (0..samples)
        .map(|k| lo + (hi - lo) * k as f64 / (samples - 1) as f64)
        .collect();
    let mut out = Vec::new();

    let mut touch: Vec<Vec<(f64, f64)>> = Vec::with_capacity(samples);
    for &g in &gs {
        let q = resultant_quintic_in_f(&base.with_coupling(0.0, g))?;
        for r in q.roots()? {
            let simple = r.im.abs() <= 1e-8 * r.norm() && r.re > 0.0;
            if simple {
                if let Some(ep) = admit(base, r.re, g, false) {
                    out.push(ep);
                }
            }
        }
        touch.push(touching_candidates(&q));
    }

    // follow each critical point across neighbouring samples by proximity
    for i in 1..samples.saturating_sub(1) {
        for &(fc, y2) in &touch[i] {
            let near = |k: usize| {
                touch[k]
                    .iter()
                    .filter(|(f, _)| (f - fc).abs() < 0.1 * fc.abs().max(1.0))
                    .map(|&(_, y)| y.abs())
                    .fold(f64::INFINITY, f64::min)
            };
            if !(y2.abs() <= near(i - 1) && y2.abs() <= near(i + 1)) {
                continue;
            }
            let (g, f, y2) = golden_refine(base, gs[i - 1], gs[i + 1], fc);
            let q = resultant_quintic_in_f(&base.with_coupling(0.0, g))?;
            let d2 = q.derivative().derivative();
            let c = Complex64::new(f, 0.0);
            let floor = (2.0 * 64.0 * f64::EPSILON * q.magnitude_at(c) / d2.eval(c).norm()).sqrt();
            let y = y2.abs().sqrt();
            if y <= (1e-8 * f.abs()).max(floor) {
                if let Some(ep) = admit(base, f, g, true) {
                    out.push(ep);
                }
            }
        }
    }
    out.sort_by(|a, b| a.g.total_cmp(&b.g).then(a.f.total_cmp(&b.f)));
    Ok(out)
}

/// Real positive critical points `f_c` of `q` with `2 q(f_c) / q''(f_c)`.
fn touching_candidates(q: &Polynomial) -> Vec<(f64, f64)> {
    let dq = q.derivative();
    let d2q = dq.derivative();
    let Ok(crit) = dq.roots() else {
        return Vec::new();
    };
    crit.into_iter()
        .filter(|c| c.im.abs() <= 1e-6 * c.norm().max(1.0) && c.re > 0.0)
        .map(|c| {
            let x = Complex64::new(c.re, 0.0);
            (c.re, (2.0 * q.eval(x) / d2q.eval(x)).re)
        })
        .collect()
}

/// Minimizes `|y^2|` over `g` in `[a, b]`, following the critical point
/// nearest `f_start`. Returns `(g, f_c, y^2)`.
fn golden_refine(base: &OscillatorParams, a: f64, b: f64, f_start: f64) -> (f64, f64, f64) {
    let eval = |g: f64, f_hint: f64| -> (f64, f64) {
        let Ok(q) = resultant_quintic_in_f(&base.with_coupling(0.0, g)) else {
            return (f_hint, f64::INFINITY);
        };
        touching_candidates(&q)
            .into_iter()
            .min_by(|x, y| (x.0 - f_hint).abs().total_cmp(&(y.0 - f_hint).abs()))
            .unwrap_or((f_hint, f64::INFINITY))
    };
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (a, b);
    let mut f_hint = f_start;
    let mut c = b - ratio * (b - a);
    let mut d = a + ratio * (b - a);
    let (mut fc, mut fd) = (eval(c, f_hint), eval(d, f_hint));
    for _ in 0..GOLDEN_ITERS {
        if fc.1.abs() < fd.1.abs() {
            b = d;
            d = c;
            fd = fc;
            c = b - ratio * (b - a);
            f_hint = fd.0;
            fc = eval(c, f_hint);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + ratio * (b - a);
            f_hint = fc.0;
            fd = eval(d, f_hint);
        }
        if b - a <= 1e-15 * (a.abs() + b.abs()) {
            break;
        }
    }
    let g = 0.5 * (a + b);
    let (f, y2) = eval(g, f_hint);
    (g, f, y2)
}

/// Frequency of the double root at `(f, g)`, rejecting genuine
/// degeneracies.
fn admit(base: &OscillatorParams, f: f64, g: f64, tuned: bool) -> Option<RealFEp> {
    let fam = OscillatorFamily::new(*base);
    let params = OscillatorFamily::params_of(&base.with_coupling(f, g));
    let (raw, _) = critical_points(&fam, &params).into_iter().next()?;
    let x = Complex64::new(0.0, 1.0) * raw;
    let report = defect_report(&fam.evaluate(&params), x).ok()?;
    if report.geometric_multiplicity >= 2 {
        return None;
    }
    let (raw, omega) = if (-raw).re < 0.0 {
        (-raw.conj(), raw.conj())
    } else {
        (raw, -raw)
    };
    Some(RealFEp {
        g,
        f,
        raw_omega: raw,
        omega,
        tuned,
    })
}
