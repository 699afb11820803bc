use num_complex::Complex64;

use super::family::MatrixFamily;
use super::newton::ExceptionalPoint;
use super::EpError;
use crate::linalg::{eig, spectrum};

const LADDER: usize = 7;

/// Slope of `log |E1 - E2|` against `log |p - p_EP|` for the pair of
/// eigenvalues nearest the coalesced one, with `params[index]` moved along
/// `direction` by offsets `1e-2 ... 1e-5` times `max(|p_EP|, 1)`.
pub fn branch_exponent<F: MatrixFamily + ?Sized>(
    family: &F,
    ep: &ExceptionalPoint,
    index: usize,
    direction: Complex64,
) -> Result<f64, EpError> {
    branch_exponent_at(family, &ep.params, ep.eigenvalue, index, direction)
}

/// As [`branch_exponent`] around an arbitrary point; `eigenvalue` is the
/// matrix eigenvalue the pair is taken around.
pub fn branch_exponent_at<F: MatrixFamily + ?Sized>(
    family: &F,
    params: &[Complex64],
    eigenvalue: Complex64,
    index: usize,
    direction: Complex64,
) -> Result<f64, EpError> {
    if index >= params.len() || direction.norm() == 0.0 || family.dim() < 2 {
        return Err(EpError::InvalidInput("bad approach parameter or direction".into()));
    }
    let dir = direction / direction.norm();
    let scale = params[index].norm().max(1.0);
    let mut xs = Vec::with_capacity(LADDER);
    let mut ys = Vec::with_capacity(LADDER);
    for k in 0..LADDER {
        let delta = scale * 10f64.powf(-2.0 - 3.0 * k as f64 / (LADDER - 1) as f64);
        let mut p = params.to_vec();
        p[index] += dir * delta;
        let mut ev = spectrum(&family.evaluate(&p));
        ev.sort_by(|a, b| (a - eigenvalue).norm().total_cmp(&(b - eigenvalue).norm()));
        let gap = (ev[0] - ev[1]).norm();
        if gap == 0.0 {
            return Err(EpError::FitUnstable {
                residual: f64::INFINITY,
            });
        }
        xs.push(delta.ln());
        ys.push(gap.ln());
    }
    let n = LADDER as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let slope = sxy / sxx;
    let residual = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - my - slope * (x - mx)).abs())
        .fold(0.0, f64::max);
    if residual > 0.05 {
        return Err(EpError::FitUnstable { residual });
    }
    Ok(slope)
}

/// Coefficients `beta_k = u_k . target` of `target` in the right
/// eigenvectors at `params`, with `u_k . v_k = 1`. Order follows the
/// sorted spectrum.
pub fn biorth_expansion<F: MatrixFamily + ?Sized>(
    family: &F,
    params: &[Complex64],
    target: &[Complex64],
) -> Result<Vec<Complex64>, EpError> {
    if target.len() != family.dim() {
        return Err(EpError::InvalidInput(format!(
            "target has {} components, family dimension is {}",
            target.len(),
            family.dim()
        )));
    }
    let es = eig(&family.evaluate(params));
    if es.any_defective() {
        return Err(EpError::DefectiveBasis);
    }
    Ok(es.expand(target))
}
