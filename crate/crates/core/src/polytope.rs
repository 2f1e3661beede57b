//! Polytopes of probability vectors `{q ∈ Δⁿ : a_k·q ≤ b_k}`: redundancy
//! pruning and vertex enumeration by active sets.
//!
//! Enumeration is combinatorial in the number of irredundant halfspaces,
//! so it is only attempted on small state spaces.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::lp::{LinearProgram, LpOutcome};
use crate::scalar::{dot, sup_norm, Scalar};
use crate::space::DiscreteMeasure;

/// Largest state count for which vertices are enumerated.
pub const MAX_VERTEX_STATES: usize = 6;

/// A polytope inside the probability simplex.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimplexPolytope<T> {
    pub n: usize,
    /// Irredundant halfspaces `a·q ≤ b` (the simplex constraints are implicit).
    pub halfspaces: Vec<(Vec<T>, T)>,
    pub vertices: Vec<DiscreteMeasure<T>>,
}

fn tol<T: Scalar>() -> T {
    T::epsilon().powf(T::lit(0.55))
}

// reduced coordinates z = (q_1, …, q_{n−1}), q_n = 1 − Σz
fn reduce<T: Scalar>(a: &[T], b: T) -> (Vec<T>, T) {
    let n = a.len();
    let last = a[n - 1];
    ((0..n - 1).map(|i| a[i] - last).collect(), b - last)
}

fn simplex_rows<T: Scalar>(d: usize) -> Vec<(Vec<T>, T)> {
    let mut rows = Vec::with_capacity(d + 1);
    for i in 0..d {
        let mut a = vec![T::zero(); d];
        a[i] = -T::one();
        rows.push((a, T::zero()));
    }
    rows.push((vec![T::one(); d], T::one()));
    rows
}

impl<T: Scalar> SimplexPolytope<T> {
    /// Prunes redundant halfspaces and enumerates vertices. An empty vertex
    /// list means the polytope is empty.
    pub fn new(n: usize, halfspaces: Vec<(Vec<T>, T)>) -> Result<Self> {
        if n == 0 || n > MAX_VERTEX_STATES {
            return Err(Error::Unsupported(format!(
                "vertex enumeration is limited to 1..={MAX_VERTEX_STATES} states"
            )));
        }
        for (a, _) in &halfspaces {
            if a.len() != n {
                return Err(Error::Shape { expected: n, got: a.len() });
            }
        }
        let kept = prune(n, halfspaces)?;
        let vertices = enumerate_vertices(n, &kept);
        Ok(SimplexPolytope {
            n,
            halfspaces: kept,
            vertices,
        })
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn contains(&self, q: &DiscreteMeasure<T>, tol: T) -> bool {
        self.halfspaces
            .iter()
            .all(|(a, b)| dot(a, q.weights()) <= *b + tol)
    }

    /// `max_{q ∈ polytope} x·q` by linear programming over the halfspaces.
    pub fn lp_max(&self, x: &[T]) -> Result<Option<(T, Vec<T>)>> {
        let n = self.n;
        let mut lp = LinearProgram::new(n).minimize(x.iter().map(|v| -*v).collect());
        lp.eq(vec![T::one(); n], T::one());
        for (a, b) in &self.halfspaces {
            lp.le(a.clone(), *b);
        }
        Ok(match lp.solve()? {
            LpOutcome::Optimal { x: q, value } => Some((-value, q)),
            LpOutcome::Infeasible => None,
            LpOutcome::Unbounded => unreachable!("the simplex is bounded"),
        })
    }

    /// `max` of `x·q` over the enumerated vertices.
    pub fn vertex_max(&self, x: &[T]) -> Option<(T, &DiscreteMeasure<T>)> {
        let mut best: Option<(T, &DiscreteMeasure<T>)> = None;
        for v in &self.vertices {
            let e = dot(v.weights(), x);
            if best.map_or(true, |(b, _)| e > b) {
                best = Some((e, v));
            }
        }
        best
    }
}

/// Drops halfspaces implied by the others (and by the simplex).
fn prune<T: Scalar>(n: usize, halfspaces: Vec<(Vec<T>, T)>) -> Result<Vec<(Vec<T>, T)>> {
    let t = tol::<T>();
    // scale each row to unit sup norm so that tolerances are comparable
    let mut rows: Vec<(Vec<T>, T)> = Vec::new();
    for (a, b) in halfspaces {
        let s = sup_norm(&a);
        if s == T::zero() {
            if b < -t {
                // 0 ≤ b fails: the polytope is empty; keep the row to record it
                rows.push((a, b));
            }
            continue;
        }
        let (a, b): (Vec<T>, T) = (a.iter().map(|v| *v / s).collect(), b / s);
        let dup = rows.iter().any(|(ra, rb)| {
            ra.iter().zip(&a).all(|(x, y)| (*x - *y).abs() <= t) && (*rb - b).abs() <= t
        });
        if !dup {
            rows.push((a, b));
        }
    }
    let mut keep = vec![true; rows.len()];
    for k in 0..rows.len() {
        let mut lp = LinearProgram::new(n).minimize(rows[k].0.iter().map(|v| -*v).collect());
        lp.eq(vec![T::one(); n], T::one());
        for (j, (a, b)) in rows.iter().enumerate() {
            if j != k && keep[j] {
                lp.le(a.clone(), *b);
            }
        }
        match lp.solve()? {
            LpOutcome::Optimal { value, .. } => {
                if -value <= rows[k].1 + t {
                    keep[k] = false;
                }
            }
            // the others are already infeasible; leave the row in place
            LpOutcome::Infeasible => {}
            LpOutcome::Unbounded => unreachable!("the simplex is bounded"),
        }
    }
    Ok(rows
        .into_iter()
        .zip(keep)
        .filter_map(|(r, k)| k.then_some(r))
        .collect())
}

fn enumerate_vertices<T: Scalar>(n: usize, halfspaces: &[(Vec<T>, T)]) -> Vec<DiscreteMeasure<T>> {
    let t = tol::<T>();
    let d = n - 1;
    let mut rows: Vec<(Vec<T>, T)> = halfspaces.iter().map(|(a, b)| reduce(a, *b)).collect();
    rows.extend(simplex_rows(d));
    let feasible = |z: &[T]| rows.iter().all(|(a, b)| dot(a, z) <= *b + t * (T::one() + b.abs()));
    let lift = |z: &[T]| -> Vec<T> {
        let mut q = z.to_vec();
        q.push(T::one() - z.iter().copied().sum::<T>());
        q.iter().map(|v| v.max(T::zero())).collect()
    };
    let mut out: Vec<Vec<T>> = Vec::new();
    if d == 0 {
        if feasible(&[]) {
            out.push(vec![T::one()]);
        }
    } else {
        let mut idx: Vec<usize> = (0..d).collect();
        let m = rows.len();
        if m >= d {
            loop {
                let a: Vec<Vec<T>> = idx.iter().map(|&k| rows[k].0.clone()).collect();
                let b: Vec<T> = idx.iter().map(|&k| rows[k].1).collect();
                if let Some(z) = solve(a, b) {
                    if feasible(&z) {
                        let q = lift(&z);
                        if !out.iter().any(|v| v.iter().zip(&q).all(|(x, y)| (*x - *y).abs() <= t)) {
                            out.push(q);
                        }
                    }
                }
                // next combination in lexicographic order
                let mut i = d;
                while i > 0 && idx[i - 1] == m - d + i - 1 {
                    i -= 1;
                }
                if i == 0 {
                    break;
                }
                idx[i - 1] += 1;
                for j in i..d {
                    idx[j] = idx[j - 1] + 1;
                }
            }
        }
    }
    out.into_iter()
        .filter_map(|q| DiscreteMeasure::normalized(q).ok())
        .collect()
}

/// Gaussian elimination with partial pivoting; `None` when singular.
pub(crate) fn solve<T: Scalar>(mut a: Vec<Vec<T>>, mut b: Vec<T>) -> Option<Vec<T>> {
    let n = b.len();
    let scale = a
        .iter()
        .flat_map(|r| r.iter())
        .fold(T::zero(), |m, v| m.max(v.abs()));
    let eps = T::epsilon().sqrt() * scale.max(T::one());
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap())?;
        if a[piv][col].abs() <= eps {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for r in col + 1..n {
            let f = a[r][col] / a[col][col];
            if f != T::zero() {
                for c in col..n {
                    let v = a[col][c];
                    a[r][c] -= f * v;
                }
                let v = b[col];
                b[r] -= f * v;
            }
        }
    }
    let mut x = vec![T::zero(); n];
    for r in (0..n).rev() {
        let s: T = (r + 1..n).map(|c| a[r][c] * x[c]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    Some(x)
}
