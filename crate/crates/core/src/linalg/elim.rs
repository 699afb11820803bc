//! Gaussian elimination with complete pivoting: `P A Q = L U`.
//!
//! Used for determinants, solves, numerical rank and null spaces. Pivots are
//! non-increasing in magnitude, so the rank decision is a simple cut.

use num_complex::Complex64;

use super::{ComplexSquareMatrix, LinalgError};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Clone, Debug)]
pub(crate) struct Elimination {
    n: usize,
    /// Packed L (unit, strictly lower) and U (upper), row-major.
    lu: Vec<Complex64>,
    /// Row `i` of the factored matrix is row `row_perm[i]` of the input.
    row_perm: Vec<usize>,
    /// Column `j` of the factored matrix is column `col_perm[j]` of the input.
    col_perm: Vec<usize>,
    parity: f64,
}

impl Elimination {
    pub(crate) fn new(m: &ComplexSquareMatrix) -> Self {
        let n = m.dim();
        let mut lu = m.as_slice().to_vec();
        let mut row_perm: Vec<usize> = (0..n).collect();
        let mut col_perm: Vec<usize> = (0..n).collect();
        let mut parity = 1.0;

        for k in 0..n {
            let (mut pi, mut pj, mut best) = (k, k, -1.0);
            for i in k..n {
                for j in k..n {
                    let a = lu[i * n + j].norm();
                    if a > best {
                        best = a;
                        pi = i;
                        pj = j;
                    }
                }
            }
            if pi != k {
                for j in 0..n {
                    lu.swap(k * n + j, pi * n + j);
                }
                row_perm.swap(k, pi);
                parity = -parity;
            }
            if pj != k {
                for i in 0..n {
                    lu.swap(i * n + k, i * n + pj);
                }
                col_perm.swap(k, pj);
                parity = -parity;
            }
            let piv = lu[k * n + k];
            if piv == ZERO {
                // trailing block is exactly zero
                break;
            }
            for i in (k + 1)..n {
                let l = lu[i * n + k] / piv;
                lu[i * n + k] = l;
                if l == ZERO {
                    continue;
                }
                for j in (k + 1)..n {
                    let u = lu[k * n + j];
                    lu[i * n + j] -= l * u;
                }
            }
        }
        Self {
            n,
            lu,
            row_perm,
            col_perm,
            parity,
        }
    }

    #[inline]
    fn at(&self, i: usize, j: usize) -> Complex64 {
        self.lu[i * self.n + j]
    }

    pub(crate) fn pivots(&self) -> Vec<f64> {
        (0..self.n).map(|k| self.at(k, k).norm()).collect()
    }

    pub(crate) fn determinant(&self) -> Complex64 {
        let mut d = Complex64::new(self.parity, 0.0);
        for k in 0..self.n {
            d *= self.at(k, k);
        }
        d
    }

    pub(crate) fn rank(&self, rel_tol: f64) -> usize {
        self.rank_against(rel_tol, self.pivots()[0])
    }

    /// Rank with pivots compared to `rel_tol * scale` instead of the largest pivot.
    pub(crate) fn rank_against(&self, rel_tol: f64, scale: f64) -> usize {
        if scale == 0.0 {
            return 0;
        }
        self.pivots().iter().take_while(|&&p| p > rel_tol * scale).count()
    }

    pub(crate) fn solve(&self, b: &[Complex64]) -> Result<Vec<Complex64>, LinalgError> {
        let n = self.n;
        assert_eq!(b.len(), n);
        if (0..n).any(|k| self.at(k, k) == ZERO) {
            return Err(LinalgError::Singular);
        }
        let mut y: Vec<Complex64> = self.row_perm.iter().map(|&r| b[r]).collect();
        for i in 0..n {
            for k in 0..i {
                let l = self.at(i, k);
                let yk = y[k];
                y[i] -= l * yk;
            }
        }
        for i in (0..n).rev() {
            for k in (i + 1)..n {
                let u = self.at(i, k);
                let yk = y[k];
                y[i] -= u * yk;
            }
            y[i] /= self.at(i, i);
        }
        let mut x = vec![ZERO; n];
        for (j, &c) in self.col_perm.iter().enumerate() {
            x[c] = y[j];
        }
        Ok(x)
    }

    /// Basis of the null space treating the leading `rank` pivots as nonzero
    /// and the rest as exact zeros. Vectors are not normalized.
    pub(crate) fn null_space(&self, rank: usize) -> Vec<Vec<Complex64>> {
        let n = self.n;
        let mut basis = Vec::with_capacity(n - rank);
        for free in rank..n {
            let mut y = vec![ZERO; n];
            y[free] = Complex64::new(1.0, 0.0);
            for i in (0..rank).rev() {
                let s: Complex64 = ((i + 1)..n).map(|k| self.at(i, k) * y[k]).sum();
                y[i] = -s / self.at(i, i);
            }
            let mut x = vec![ZERO; n];
            for (j, &c) in self.col_perm.iter().enumerate() {
                x[c] = y[j];
            }
            basis.push(x);
        }
        basis
    }
}

/// Null-space basis of `m` with rank decided by `rel_tol`, but always at
/// least `min_nullity` vectors (the smallest pivots are dropped first).
pub(crate) fn null_space(m: &ComplexSquareMatrix, rel_tol: f64, min_nullity: usize) -> Vec<Vec<Complex64>> {
    let e = Elimination::new(m);
    let n = m.dim();
    let rank = e.rank(rel_tol).min(n - min_nullity.min(n));
    e.null_space(rank)
}
