//! Eigenvalues with paired right/left eigenvectors for small dense matrices.
//!
//! Eigenvalues come from the characteristic polynomial; vectors from null
//! spaces of `M - E I` and its transpose. Near-defective clusters are
//! reported through flags rather than errors.

use num_complex::Complex64;

use super::elim::{null_space, Elimination};
use super::matrix::{pairing, vec_norm};
use super::poly::{char_poly, poly_roots};
use super::{ComplexSquareMatrix, LinalgError};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Tolerances for [`eig_with`] and [`defect_report_with`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EigOptions {
    /// Pivots below this fraction of the largest count as zero.
    pub rank_tol: f64,
    /// Roots closer than `cluster_radius * max(1, ||M||_F)` are grouped.
    pub cluster_radius: f64,
    /// Normalized `|u.v|` below this marks an eigenpair as near-defective.
    pub defect_threshold: f64,
}

impl Default for EigOptions {
    fn default() -> Self {
        Self {
            rank_tol: 1e-8,
            cluster_radius: 1e-6,
            defect_threshold: 1e-6,
        }
    }
}

impl EigOptions {
    pub fn radius_for(&self, m: &ComplexSquareMatrix) -> f64 {
        self.cluster_radius * m.frobenius_norm().max(1.0)
    }
}

#[derive(Clone, Debug)]
pub struct EigenSystem {
    pub eigenvalues: Vec<Complex64>,
    /// Unit norm, largest component real and positive.
    pub right_vectors: Vec<Vec<Complex64>>,
    /// Scaled so `u_i . v_i = 1` unless the entry is flagged defective, in
    /// which case unit norm.
    pub left_vectors: Vec<Vec<Complex64>>,
    /// `max(||M v - E v||, ||u M - E u|| / ||u||)`.
    pub residuals: Vec<f64>,
    /// Worst deviation of row `i` of `U V` from the identity row, with the
    /// diagonal skipped for flagged entries.
    pub pairing_residuals: Vec<f64>,
    /// `|u.v| / (||u|| ||v||)`; tends to zero at an exceptional point.
    pub self_pairings: Vec<f64>,
    pub defect_flags: Vec<bool>,
}

impl EigenSystem {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn any_defective(&self) -> bool {
        self.defect_flags.iter().any(|&d| d)
    }

    /// Coefficients of `target` in the right-eigenvector basis,
    /// `beta_k = u_k . target`.
    pub fn expand(&self, target: &[Complex64]) -> Vec<Complex64> {
        self.left_vectors.iter().map(|u| pairing(u, target)).collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DefectReport {
    pub eigenvalue: Complex64,
    pub geometric_multiplicity: usize,
    pub algebraic_multiplicity: usize,
    /// `||(M - e I)^2 w||` for the least-squares generalized vector `w`.
    pub jordan_residual: f64,
    pub is_defective: bool,
}

pub fn eig(m: &ComplexSquareMatrix) -> EigenSystem {
    eig_with(m, &EigOptions::default())
}

pub fn eig_with(m: &ComplexSquareMatrix, opts: &EigOptions) -> EigenSystem {
    let n = m.dim();
    let roots = spectrum(m);
    let radius = opts.radius_for(m);
    let clusters = cluster(&roots, radius);

    let mut eigenvalues = roots.clone();
    let mut right = vec![Vec::new(); n];
    let mut left = vec![Vec::new(); n];
    let mut flags = vec![false; n];

    for members in &clusters {
        if members.len() == 1 {
            let i = members[0];
            let (e, v, u) = simple_pair(m, roots[i], opts);
            eigenvalues[i] = e;
            right[i] = v;
            left[i] = u;
            continue;
        }
        let mean = members.iter().map(|&i| roots[i]).sum::<Complex64>() / members.len() as f64;
        let a = m.shifted(mean);
        let lu = Elimination::new(&a);
        let rank = lu.rank(opts.rank_tol).min(n - 1);
        let vs = lu.null_space(rank);
        let us = Elimination::new(&a.transpose()).null_space(rank);
        let mut vs: Vec<Vec<Complex64>> = vs.into_iter().map(normalize_unit).collect();
        let mut us: Vec<Vec<Complex64>> = us.into_iter().map(normalize_unit).collect();
        let k = vs.len();
        if k >= members.len() {
            vs.truncate(members.len());
            us.truncate(members.len());
            biorthogonalize(&mut us, &vs);
            for (slot, &i) in members.iter().enumerate() {
                eigenvalues[i] = mean;
                right[i] = vs[slot].clone();
                left[i] = us[slot].clone();
            }
        } else {
            for (slot, &i) in members.iter().enumerate() {
                eigenvalues[i] = mean;
                right[i] = vs[slot % k].clone();
                left[i] = us[slot % k].clone();
                flags[i] = true;
            }
        }
    }

    let mut self_pairings = vec![0.0; n];
    for i in 0..n {
        let s = pairing(&left[i], &right[i]).norm() / (vec_norm(&left[i]) * vec_norm(&right[i]));
        self_pairings[i] = s;
        if s < opts.defect_threshold {
            flags[i] = true;
        }
        if flags[i] {
            left[i] = normalize_unit(left[i].clone());
        } else {
            let p = pairing(&left[i], &right[i]);
            left[i] = left[i].iter().map(|z| z / p).collect();
        }
    }

    let residuals = (0..n)
        .map(|i| {
            let e = eigenvalues[i];
            let mv = m.mul_vec(&right[i]);
            let rr = vec_norm(&mv.iter().zip(&right[i]).map(|(a, b)| a - e * b).collect::<Vec<_>>());
            let um = m.vec_mul(&left[i]);
            let rl =
                vec_norm(&um.iter().zip(&left[i]).map(|(a, b)| a - e * b).collect::<Vec<_>>()) / vec_norm(&left[i]);
            rr.max(rl)
        })
        .collect();

    let pairing_residuals = (0..n)
        .map(|i| {
            (0..n)
                .filter(|&j| !(j == i && flags[i]))
                .map(|j| {
                    let target = if i == j { ONE } else { ZERO };
                    let same_cluster = flags[i] && flags[j] && eigenvalues[i] == eigenvalues[j];
                    if same_cluster {
                        0.0
                    } else {
                        (pairing(&left[i], &right[j]) - target).norm()
                    }
                })
                .fold(0.0, f64::max)
        })
        .collect();

    EigenSystem {
        eigenvalues,
        right_vectors: right,
        left_vectors: left,
        residuals,
        pairing_residuals,
        self_pairings,
        defect_flags: flags,
    }
}

/// Sorted eigenvalues with multiplicity, from the characteristic polynomial.
pub fn spectrum(m: &ComplexSquareMatrix) -> Vec<Complex64> {
    // degree is m.dim() >= 1, so this cannot fail
    poly_roots(&char_poly(m)).expect("characteristic polynomial has degree >= 1")
}

pub fn defect_report(m: &ComplexSquareMatrix, e: Complex64) -> Result<DefectReport, LinalgError> {
    defect_report_with(m, e, &EigOptions::default())
}

pub fn defect_report_with(
    m: &ComplexSquareMatrix,
    e: Complex64,
    opts: &EigOptions,
) -> Result<DefectReport, LinalgError> {
    let n = m.dim();
    let roots = spectrum(m);
    let radius = opts.radius_for(m);
    let distance = roots.iter().map(|r| (r - e).norm()).fold(f64::INFINITY, f64::min);
    if distance > radius {
        return Err(LinalgError::NotAnEigenvalue { distance, radius });
    }
    // roots in the same cluster as the closest one
    let clusters = cluster(&roots, radius);
    let closest = (0..n)
        .min_by(|&a, &b| (roots[a] - e).norm().total_cmp(&(roots[b] - e).norm()))
        .unwrap();
    let in_cluster = clusters.iter().find(|c| c.contains(&closest)).map_or(1, |c| c.len());

    let a = m.shifted(e);
    let a2 = &a * &a;
    let geometric = (n - Elimination::new(&a).rank(opts.rank_tol)).max(1);
    // judged against ||A||^2: an O(eta) perturbation of a Jordan block leaves
    // A^2 of size O(eta ||A||) while the split roots are O(sqrt(eta)) apart
    let from_square = n - Elimination::new(&a2).rank_against(opts.rank_tol, a.frobenius_norm().powi(2));
    let algebraic = in_cluster.max(from_square).max(geometric);

    let v = normalize_unit(null_space(&a, opts.rank_tol, 1).swap_remove(0));
    let w = tikhonov_solve(&a, &v, opts.rank_tol);
    let a2w = a2.mul_vec(&w);
    let jordan_residual = vec_norm(&a2w);

    Ok(DefectReport {
        eigenvalue: e,
        geometric_multiplicity: geometric,
        algebraic_multiplicity: algebraic,
        jordan_residual,
        is_defective: geometric < algebraic,
    })
}

/// Unit-norm right null vector of `m - e I` assuming nullity one.
pub fn right_null_vector(m: &ComplexSquareMatrix, e: Complex64) -> Vec<Complex64> {
    normalize_unit(null_space(&m.shifted(e), 1e-8, 1).swap_remove(0))
}

/// Unit-norm left null vector (`u (m - e I) = 0`) assuming nullity one.
pub fn left_null_vector(m: &ComplexSquareMatrix, e: Complex64) -> Vec<Complex64> {
    normalize_unit(null_space(&m.shifted(e).transpose(), 1e-8, 1).swap_remove(0))
}

/// Right/left vectors of a simple eigenvalue, with one two-sided Rayleigh
/// polish of the eigenvalue when it reduces the residual.
fn simple_pair(
    m: &ComplexSquareMatrix,
    e0: Complex64,
    opts: &EigOptions,
) -> (Complex64, Vec<Complex64>, Vec<Complex64>) {
    let vectors = |e: Complex64| {
        let a = m.shifted(e);
        let v = normalize_unit(null_space(&a, opts.rank_tol, 1).swap_remove(0));
        let u = normalize_unit(null_space(&a.transpose(), opts.rank_tol, 1).swap_remove(0));
        (v, u)
    };
    let resid = |e: Complex64, v: &[Complex64]| {
        let mv = m.mul_vec(v);
        vec_norm(&mv.iter().zip(v).map(|(a, b)| a - e * b).collect::<Vec<_>>())
    };

    let (v, u) = vectors(e0);
    let uv = pairing(&u, &v);
    if uv.norm() < opts.defect_threshold {
        return (e0, v, u);
    }
    let e1 = pairing(&u, &m.mul_vec(&v)) / uv;
    if (e1 - e0).norm() > opts.radius_for(m) || e1 == e0 {
        return (e0, v, u);
    }
    let (v1, u1) = vectors(e1);
    if resid(e1, &v1) < resid(e0, &v) {
        (e1, v1, u1)
    } else {
        (e0, v, u)
    }
}

/// Single-linkage grouping of sorted roots.
fn cluster(roots: &[Complex64], radius: f64) -> Vec<Vec<usize>> {
    let n = roots.len();
    let mut label: Vec<usize> = (0..n).collect();
    fn find(label: &mut [usize], mut i: usize) -> usize {
        while label[i] != i {
            label[i] = label[label[i]];
            i = label[i];
        }
        i
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if (roots[i] - roots[j]).norm() <= radius {
                let (a, b) = (find(&mut label, i), find(&mut label, j));
                if a != b {
                    label[a.max(b)] = a.min(b);
                }
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut heads: Vec<usize> = Vec::new();
    for i in 0..n {
        let h = find(&mut label, i);
        match heads.iter().position(|&x| x == h) {
            Some(k) => groups[k].push(i),
            None => {
                heads.push(h);
                groups.push(vec![i]);
            }
        }
    }
    groups
}

/// Unit norm with the largest-magnitude component real and positive.
pub fn normalize_unit(v: Vec<Complex64>) -> Vec<Complex64> {
    let norm = vec_norm(&v);
    if norm == 0.0 {
        return v;
    }
    let big = v.iter().copied().max_by(|a, b| a.norm().total_cmp(&b.norm())).unwrap();
    let phase = big.conj() / big.norm();
    v.into_iter().map(|z| z * phase / norm).collect()
}

/// Replaces `us` by `G^{-1} us` with `G_ij = u_i . v_j`, so `U V = I`.
fn biorthogonalize(us: &mut Vec<Vec<Complex64>>, vs: &[Vec<Complex64>]) {
    let k = us.len();
    if k == 0 {
        return;
    }
    let g = ComplexSquareMatrix::from_fn(k, |i, j| pairing(&us[i], &vs[j]));
    let Ok(g) = g else { return };
    let Ok(ginv) = g.inverse() else { return };
    let n = us[0].len();
    let new: Vec<Vec<Complex64>> = (0..k)
        .map(|i| (0..n).map(|c| (0..k).map(|j| ginv[(i, j)] * us[j][c]).sum()).collect())
        .collect();
    *us = new;
}

/// Regularized least squares `min ||A w - b||^2 + mu ||w||^2`.
fn tikhonov_solve(a: &ComplexSquareMatrix, b: &[Complex64], rel: f64) -> Vec<Complex64> {
    let n = a.dim();
    let ah = ComplexSquareMatrix::from_fn(n, |i, j| a[(j, i)].conj()).expect("finite");
    let mut normal = &ah * a;
    let mu = (rel * a.frobenius_norm()).powi(2).max(f64::MIN_POSITIVE);
    for i in 0..n {
        normal[(i, i)] += mu;
    }
    let rhs = ah.mul_vec(b);
    normal.solve(&rhs).unwrap_or_else(|_| vec![ZERO; n])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn diagonal_gives_standard_basis() {
        let m = ComplexSquareMatrix::diagonal(&[c(5.0, 0.0), c(7.0, 0.0)]);
        let es = eig(&m);
        assert_eq!(es.eigenvalues, vec![c(5.0, 0.0), c(7.0, 0.0)]);
        assert_eq!(es.right_vectors[0], vec![ONE, ZERO]);
        assert_eq!(es.right_vectors[1], vec![ZERO, ONE]);
        assert!(!es.any_defective());
    }

    #[test]
    fn jordan_block_is_flagged() {
        let a = c(0.3, -1.0);
        let m = ComplexSquareMatrix::from_rows(&[&[a, ONE], &[ZERO, a]]).unwrap();
        let es = eig(&m);
        assert!(es.defect_flags.iter().all(|&f| f));
        let r = defect_report(&m, a).unwrap();
        assert_eq!(r.geometric_multiplicity, 1);
        assert_eq!(r.algebraic_multiplicity, 2);
        assert!(r.is_defective);
    }

    #[test]
    fn genuine_degeneracy_is_not_defective() {
        let a = c(2.0, 1.0);
        let m = ComplexSquareMatrix::diagonal(&[a, a, c(-1.0, 0.0)]);
        let r = defect_report(&m, a).unwrap();
        assert_eq!(r.geometric_multiplicity, 2);
        assert_eq!(r.algebraic_multiplicity, 2);
        assert!(!r.is_defective);
        let es = eig(&m);
        assert!(!es.any_defective());
        assert!(es.pairing_residuals.iter().all(|&p| p < 1e-12));
    }

    #[test]
    fn far_from_spectrum_is_rejected() {
        let m = ComplexSquareMatrix::diagonal(&[c(1.0, 0.0), c(2.0, 0.0)]);
        assert!(matches!(
            defect_report(&m, c(1.5, 0.0)),
            Err(LinalgError::NotAnEigenvalue { .. })
        ));
    }

    #[test]
    fn non_normal_biorthogonality() {
        let m = ComplexSquareMatrix::from_rows(&[
            &[c(1.0, 0.5), c(2.0, 0.0), c(0.0, 1.0)],
            &[c(0.0, 0.0), c(-1.0, 0.0), c(3.0, -1.0)],
            &[c(0.5, 0.0), c(0.0, 0.0), c(2.0, 2.0)],
        ])
        .unwrap();
        let es = eig(&m);
        let scale = m.frobenius_norm();
        for i in 0..3 {
            assert!(es.residuals[i] < 1e-12 * scale, "{:?}", es.residuals);
            assert!(es.pairing_residuals[i] < 1e-10, "{:?}", es.pairing_residuals);
        }
    }
}
