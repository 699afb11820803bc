//! Continuation of eigenvalue branches along parameter paths.
//!
//! Consecutive spectra are matched by the cheapest assignment (brute force
//! over permutations). When the runner-up assignment costs less than twice
//! the best one the step is split in half, down to a relative floor of
//! 1e-12, where the path is declared to pass through a coalescence.

use std::f64::consts::TAU;

use num_complex::Complex64;

use super::family::MatrixFamily;
use super::EpError;
use crate::linalg::{eig, pairing, spectrum, vec_norm};

const STEP_FLOOR: f64 = 1e-12;
const MAX_LOOPS: usize = 8;

#[derive(Clone, Debug, PartialEq)]
pub struct BranchTrack {
    pub path: Vec<Vec<Complex64>>,
    /// `branches[b][k]` is branch `b` at `path[k]`.
    pub branches: Vec<Vec<Complex64>>,
    /// Sum of `|E_new - E_old|` over all matched steps, refinements included.
    pub matching_cost: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MonodromyResult {
    /// Branch starting on eigenvalue `b` ends on eigenvalue `permutation[b]`
    /// after one loop (indices into `start_eigenvalues`).
    pub permutation: Vec<usize>,
    pub loops_to_restore_eigenvalues: usize,
    pub loops_to_restore_eigenvector: usize,
    /// Factor picked up by a moved eigenvector once its eigenvalue is back:
    /// `v_b` after `loops_to_restore_eigenvalues` loops equals this times
    /// the starting `v_b`. One when no branch moves.
    pub accumulated_phase: Complex64,
    pub start_eigenvalues: Vec<Complex64>,
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn rec(cur: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if cur.len() == used.len() {
            out.push(cur.clone());
            return;
        }
        for i in 0..used.len() {
            if !used[i] {
                used[i] = true;
                cur.push(i);
                rec(cur, used, out);
                cur.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::with_capacity(n), &mut vec![false; n], &mut out);
    out
}

struct Assignment {
    /// Tracked branch `b` continues on candidate `perm[b]`.
    perm: Vec<usize>,
    cost: f64,
    ambiguous: bool,
}

fn assign(prev: &[Complex64], next: &[Complex64], perms: &[Vec<usize>]) -> Assignment {
    let mut best = (f64::INFINITY, 0usize);
    let mut second = f64::INFINITY;
    for (k, p) in perms.iter().enumerate() {
        let c: f64 = prev.iter().zip(p).map(|(a, &j)| (a - next[j]).norm()).sum();
        if c < best.0 {
            second = best.0;
            best = (c, k);
        } else if c < second {
            second = c;
        }
    }
    let scale = prev.iter().chain(next).fold(1.0f64, |a, z| a.max(z.norm()));
    let tiny = 1e-13 * scale;
    Assignment {
        perm: perms[best.1].clone(),
        cost: best.0,
        ambiguous: best.0 > tiny && second < 2.0 * best.0,
    }
}

fn midpoint(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    a.iter().zip(b).map(|(x, y)| (x + y) * 0.5).collect()
}

fn distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt()
}

type Eval<'a, T> = dyn Fn(&[Complex64]) -> Result<Vec<T>, EpError> + 'a;
type Visit<'a, T> = dyn FnMut(&[Complex64], &[T], f64) + 'a;

/// Walk from `(a, items_a)` to `b`, splitting ambiguous steps. Every
/// accepted point is passed to `visit` with its items in tracked order.
fn advance<T: Clone>(
    eval: &Eval<T>,
    value: &dyn Fn(&T) -> Complex64,
    perms: &[Vec<usize>],
    a: &[Complex64],
    items_a: &[T],
    b: &[Complex64],
    visit: &mut Visit<T>,
) -> Result<Vec<T>, EpError> {
    let cand = eval(b)?;
    let prev: Vec<Complex64> = items_a.iter().map(value).collect();
    let next: Vec<Complex64> = cand.iter().map(value).collect();
    let m = assign(&prev, &next, perms);
    if !m.ambiguous {
        let ordered: Vec<T> = m.perm.iter().map(|&j| cand[j].clone()).collect();
        visit(b, &ordered, m.cost);
        return Ok(ordered);
    }
    let scale = a.iter().fold(1.0f64, |s, z| s.max(z.norm()));
    if distance(a, b) <= STEP_FLOOR * scale {
        return Err(EpError::TrackingAmbiguous { at: b.to_vec() });
    }
    let mid = midpoint(a, b);
    let items_mid = advance(eval, value, perms, a, items_a, &mid, visit)?;
    advance(eval, value, perms, &mid, &items_mid, b, visit)
}

/// Eigenvalue branches of `family` along `path`.
pub fn track_branches<F: MatrixFamily + ?Sized>(family: &F, path: &[Vec<Complex64>]) -> Result<BranchTrack, EpError> {
    if path.is_empty() {
        return Err(EpError::InvalidInput("empty path".into()));
    }
    let n = family.dim();
    let perms = permutations(n);
    let eval = |p: &[Complex64]| -> Result<Vec<Complex64>, EpError> { Ok(spectrum(&family.evaluate(p))) };
    let value = |z: &Complex64| *z;

    let mut current = eval(&path[0])?;
    let mut branches: Vec<Vec<Complex64>> = current.iter().map(|&z| vec![z]).collect();
    let mut cost = 0.0;
    for w in path.windows(2) {
        let mut visit = |_: &[Complex64], _: &[Complex64], c: f64| cost += c;
        current = advance(&eval, &value, &perms, &w[0], &current, &w[1], &mut visit)?;
        for (b, z) in current.iter().enumerate() {
            branches[b].push(*z);
        }
    }
    Ok(BranchTrack {
        path: path.to_vec(),
        branches,
        matching_cost: cost,
    })
}

#[derive(Clone, Debug)]
struct Pair {
    value: Complex64,
    right: Vec<Complex64>,
    left: Vec<Complex64>,
}

/// Gauge-fixed, biorthonormal transport state of one branch.
#[derive(Clone, Debug)]
struct Transported {
    right: Vec<Complex64>,
    /// Fixed per branch: conjugated starting vectors.
    right_ref: Vec<Complex64>,
    left_ref: Vec<Complex64>,
}

/// Loop `params[index] = center + radius e^{i theta}` and report how the
/// branches and their eigenvectors come back.
///
/// Transport convention: each branch keeps the conjugates of its starting
/// right and left vectors as fixed references `r`, `l`; along the loop its
/// right vector is scaled to `r . v = 1` and its left vector to `u . l = 1`,
/// which keeps both analytic in the loop parameter. Both are then divided
/// by `sqrt(u . v)`, taking the sign of the root that keeps the right
/// vector nearest to its value at the previous step. For a loop small
/// enough that the references stay non-orthogonal to the branch vectors,
/// an encircled simple EP returns the eigenvalue after two loops and the
/// eigenvector after four, with a sign flip after two.
pub fn monodromy_loop<F: MatrixFamily + ?Sized>(
    family: &F,
    base: &[Complex64],
    index: usize,
    center: Complex64,
    radius: f64,
    steps: usize,
) -> Result<MonodromyResult, EpError> {
    if steps < 64 {
        return Err(EpError::InvalidInput(format!(
            "loop needs at least 64 steps, got {steps}"
        )));
    }
    if index >= base.len() || radius.is_nan() || radius <= 0.0 {
        return Err(EpError::InvalidInput("bad loop parameter or radius".into()));
    }
    let n = family.dim();
    let perms = permutations(n);
    let point = |theta: f64| {
        let mut p = base.to_vec();
        p[index] = center + Complex64::from_polar(radius, theta);
        p
    };
    let eval = |p: &[Complex64]| -> Result<Vec<Pair>, EpError> {
        let es = eig(&family.evaluate(p));
        if es.any_defective() {
            return Err(EpError::TrackingAmbiguous { at: p.to_vec() });
        }
        Ok((0..n)
            .map(|k| Pair {
                value: es.eigenvalues[k],
                right: es.right_vectors[k].clone(),
                left: es.left_vectors[k].clone(),
            })
            .collect())
    };
    let value = |p: &Pair| p.value;

    let start_point = point(0.0);
    let start = eval(&start_point)?;
    let start_values: Vec<Complex64> = start.iter().map(|p| p.value).collect();
    let fix = |p: &Pair, prev: &Transported| -> Transported {
        let rv = pairing(&prev.right_ref, &p.right);
        let ur = pairing(&p.left, &prev.left_ref);
        let v: Vec<Complex64> = p.right.iter().map(|z| z / rv).collect();
        let u: Vec<Complex64> = p.left.iter().map(|z| z / ur).collect();
        let mut s = pairing(&u, &v).sqrt();
        if !prev.right.is_empty() {
            let d = |s: Complex64| {
                let w: Vec<Complex64> = v.iter().zip(&prev.right).map(|(a, b)| a / s - b).collect();
                vec_norm(&w)
            };
            if d(-s) < d(s) {
                s = -s;
            }
        }
        Transported {
            right: v.iter().map(|z| z / s).collect(),
            right_ref: prev.right_ref.clone(),
            left_ref: prev.left_ref.clone(),
        }
    };

    let initial: Vec<Transported> = start
        .iter()
        .map(|p| {
            let seed = Transported {
                right: Vec::new(),
                right_ref: p.right.iter().map(|z| z.conj()).collect(),
                left_ref: p.left.iter().map(|z| z.conj()).collect(),
            };
            fix(p, &seed)
        })
        .collect();
    let mut transported = initial.clone();
    let mut items = start.clone();

    let mut permutation = Vec::new();
    let mut value_period = None;
    let mut vector_period = None;
    let mut phase = Complex64::new(1.0, 0.0);

    for lap in 1..=MAX_LOOPS {
        let mut here = start_point.clone();
        for k in 1..=steps {
            let next = point(TAU * k as f64 / steps as f64);
            let mut visit = |_: &[Complex64], ordered: &[Pair], _: f64| {
                for (b, p) in ordered.iter().enumerate() {
                    transported[b] = fix(p, &transported[b]);
                }
            };
            items = advance(&eval, &value, &perms, &here, &items, &next, &mut visit)?;
            here = next;
        }
        let landed: Vec<usize> = items
            .iter()
            .map(|p| {
                (0..n)
                    .min_by(|&a, &b| {
                        (start_values[a] - p.value)
                            .norm()
                            .total_cmp(&(start_values[b] - p.value).norm())
                    })
                    .unwrap()
            })
            .collect();
        if lap == 1 {
            permutation = landed.clone();
        }
        let identity = landed.iter().enumerate().all(|(b, &j)| b == j);
        if identity && value_period.is_none() {
            value_period = Some(lap);
            let moved = permutation
                .iter()
                .enumerate()
                .find(|(b, &j)| *b != j)
                .map_or(0, |(b, _)| b);
            let (v0, v1) = (&initial[moved].right, &transported[moved].right);
            let ratio = crate::linalg::inner(v0, v1) / crate::linalg::inner(v0, v0);
            phase = ratio / ratio.norm();
        }
        if identity && vector_period.is_none() {
            let restored = (0..n).all(|b| {
                let d: Vec<Complex64> = transported[b]
                    .right
                    .iter()
                    .zip(&initial[b].right)
                    .map(|(a, c)| a - c)
                    .collect();
                vec_norm(&d) <= 1e-6 * vec_norm(&initial[b].right)
            });
            if restored {
                vector_period = Some(lap);
            }
        }
        if value_period.is_some() && vector_period.is_some() {
            break;
        }
    }
    match (value_period, vector_period) {
        (Some(v), Some(w)) => Ok(MonodromyResult {
            permutation,
            loops_to_restore_eigenvalues: v,
            loops_to_restore_eigenvector: w,
            accumulated_phase: phase,
            start_eigenvalues: start_values,
        }),
        _ => Err(EpError::NoPeriod { loops: MAX_LOOPS }),
    }
}
