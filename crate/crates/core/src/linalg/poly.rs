use std::cmp::Ordering;
use std::f64::consts::TAU;

use num_complex::Complex64;

use super::{ComplexSquareMatrix, LinalgError};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Polynomial with complex coefficients in ascending degree order.
///
/// Exactly-zero high coefficients are trimmed on construction, so the
/// leading coefficient is nonzero unless the polynomial is identically zero.
#[derive(Clone, Debug, PartialEq)]
pub struct Polynomial {
    coeffs: Vec<Complex64>,
}

impl Polynomial {
    pub fn new(mut coeffs: Vec<Complex64>) -> Self {
        while coeffs.len() > 1 && *coeffs.last().unwrap() == ZERO {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(ZERO);
        }
        Self { coeffs }
    }

    pub fn from_real(coeffs: &[f64]) -> Self {
        Self::new(coeffs.iter().map(|&c| Complex64::new(c, 0.0)).collect())
    }

    /// Monic polynomial with the given roots.
    pub fn from_roots(roots: &[Complex64]) -> Self {
        let mut c = vec![ONE];
        for &r in roots {
            let mut next = vec![ZERO; c.len() + 1];
            for (k, &a) in c.iter().enumerate() {
                next[k + 1] += a;
                next[k] -= a * r;
            }
            c = next;
        }
        Self::new(c)
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn leading(&self) -> Complex64 {
        *self.coeffs.last().unwrap()
    }

    pub fn eval(&self, x: Complex64) -> Complex64 {
        self.coeffs.iter().rev().fold(ZERO, |acc, &c| acc * x + c)
    }

    /// Value and first derivative by one Horner pass.
    pub fn eval_with_derivative(&self, x: Complex64) -> (Complex64, Complex64) {
        let mut p = ZERO;
        let mut dp = ZERO;
        for &c in self.coeffs.iter().rev() {
            dp = dp * x + p;
            p = p * x + c;
        }
        (p, dp)
    }

    /// `sum |c_k| |x|^k`, the natural magnitude against which a computed
    /// value of the polynomial at `x` is judged.
    pub fn magnitude_at(&self, x: Complex64) -> f64 {
        let r = x.norm();
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * r + c.norm())
    }

    pub fn derivative(&self) -> Self {
        if self.coeffs.len() == 1 {
            return Self::new(vec![ZERO]);
        }
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, &c)| c * k as f64)
                .collect(),
        )
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self::new(self.coeffs.iter().map(|&c| c * s).collect())
    }

    /// Substitutes `x -> s * x`.
    pub fn compose_scale(&self, s: Complex64) -> Self {
        let mut pow = ONE;
        let mut out = Vec::with_capacity(self.coeffs.len());
        for &c in &self.coeffs {
            out.push(c * pow);
            pow *= s;
        }
        Self::new(out)
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut c = vec![ZERO; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in other.coeffs.iter().enumerate() {
                c[i + j] += a * b;
            }
        }
        Self::new(c)
    }

    /// Drops leading coefficients whose magnitude is below `rel_tol` times
    /// the largest coefficient.
    pub fn trimmed(&self, rel_tol: f64) -> Self {
        let big = self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
        let mut c = self.coeffs.clone();
        while c.len() > 1 && c.last().unwrap().norm() <= rel_tol * big {
            c.pop();
        }
        Self::new(c)
    }

    pub fn monic(&self) -> Self {
        self.scale(ONE / self.leading())
    }

    pub fn roots(&self) -> Result<Vec<Complex64>, LinalgError> {
        poly_roots(self)
    }
}

/// Characteristic polynomial `det(x I - m)` by the Faddeev-LeVerrier
/// recursion. Monic of degree `m.dim()`.
pub fn char_poly(m: &ComplexSquareMatrix) -> Polynomial {
    let n = m.dim();
    let mut coeffs = vec![ZERO; n + 1];
    coeffs[n] = ONE;
    let mut mk = ComplexSquareMatrix::zeros(n);
    for k in 1..=n {
        // M_k = A M_{k-1} + c_{n-k+1} I
        let mut next = m * &mk;
        let c_prev = coeffs[n - k + 1];
        for i in 0..n {
            next[(i, i)] += c_prev;
        }
        mk = next;
        let am = m * &mk;
        coeffs[n - k] = -am.trace() / k as f64;
    }
    Polynomial::new(coeffs)
}

const ABERTH_MAX_ITER: usize = 1000;

/// All roots of `p` with multiplicity, by simultaneous Aberth-Ehrlich
/// iteration started on a perturbed circle. Sorted by [`spectral_cmp`].
pub fn poly_roots(p: &Polynomial) -> Result<Vec<Complex64>, LinalgError> {
    let n = p.degree();
    if n == 0 {
        return Err(LinalgError::DegreeZero);
    }
    // exact zero roots first
    let zeros = p.coeffs().iter().take_while(|&&c| c == ZERO).count();
    let mut roots = vec![ZERO; zeros];
    let reduced = Polynomial::new(p.coeffs()[zeros..].to_vec()).monic();
    let m = reduced.degree();
    if m == 1 {
        roots.push(-reduced.coeffs()[0]);
    } else if m > 1 {
        roots.extend(aberth(&reduced));
    }
    sort_spectrum(&mut roots);
    Ok(roots)
}

fn aberth(p: &Polynomial) -> Vec<Complex64> {
    let n = p.degree();
    let a = p.coeffs();
    let center = -a[n - 1] / n as f64;
    // Fujiwara-style radius about the centroid, from the shifted polynomial.
    let shifted = taylor_shift(p, center);
    let radius = (0..n)
        .map(|k| shifted.coeffs()[k].norm().powf(1.0 / (n - k) as f64))
        .fold(0.0, f64::max)
        .max(f64::MIN_POSITIVE);
    let mut z: Vec<Complex64> = (0..n)
        .map(|k| center + Complex64::from_polar(radius, TAU * k as f64 / n as f64 + 0.4))
        .collect();
    let mut done = vec![false; n];
    let eps = f64::EPSILON;

    for _ in 0..ABERTH_MAX_ITER {
        let mut all = true;
        for k in 0..n {
            if done[k] {
                continue;
            }
            let (pv, dpv) = p.eval_with_derivative(z[k]);
            if pv.norm() <= 4.0 * eps * p.magnitude_at(z[k]) {
                done[k] = true;
                continue;
            }
            all = false;
            let mut sum = ZERO;
            for j in 0..n {
                if j != k {
                    let d = z[k] - z[j];
                    if d != ZERO {
                        sum += ONE / d;
                    }
                }
            }
            let ratio = if dpv == ZERO {
                // nudge off a critical point
                Complex64::new(eps.sqrt() * (1.0 + z[k].norm()), 0.0)
            } else {
                pv / dpv
            };
            let w = ratio / (ONE - ratio * sum);
            if !w.re.is_finite() || !w.im.is_finite() {
                continue;
            }
            z[k] -= w;
            if w.norm() <= eps * z[k].norm() {
                done[k] = true;
            }
        }
        if all {
            break;
        }
    }
    z
}

/// Coefficients of `p(x + s)`.
fn taylor_shift(p: &Polynomial, s: Complex64) -> Polynomial {
    let mut c = p.coeffs().to_vec();
    let n = c.len();
    for i in 0..n {
        for k in (i..n - 1).rev() {
            let next = c[k + 1];
            c[k] += s * next;
        }
    }
    Polynomial::new(c)
}

/// Lexicographic order on (Re, Im) with real parts equal up to a relative
/// 1e-10 treated as ties.
pub fn spectral_cmp(a: &Complex64, b: &Complex64) -> Ordering {
    let scale = 1.0_f64.max(a.norm()).max(b.norm());
    let tol = 1e-10 * scale;
    if (a.re - b.re).abs() > tol {
        a.re.partial_cmp(&b.re).unwrap_or(Ordering::Equal)
    } else if (a.im - b.im).abs() > tol {
        a.im.partial_cmp(&b.im).unwrap_or(Ordering::Equal)
    } else {
        Ordering::Equal
    }
}

/// Stable insertion sort by [`spectral_cmp`]. The comparator is not a
/// strict total order near ties, which insertion sort tolerates.
pub fn sort_spectrum(v: &mut [Complex64]) {
    let perm = spectral_order(v);
    let sorted: Vec<Complex64> = perm.iter().map(|&i| v[i]).collect();
    v.copy_from_slice(&sorted);
}

/// Index permutation that sorts `v` by [`spectral_cmp`].
pub fn spectral_order(v: &[Complex64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    for i in 1..idx.len() {
        let mut j = i;
        while j > 0 && spectral_cmp(&v[idx[j - 1]], &v[idx[j]]) == Ordering::Greater {
            idx.swap(j - 1, j);
            j -= 1;
        }
    }
    idx
}
