//! Exhaustive lattice searches used to validate the optimizers on tiny
//! state spaces. They work for any principle, convex or not.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::principles::PremiumPrinciple;
use crate::scalar::{dot, Scalar};
use crate::space::{Claim, DiscreteMeasure};

pub const MAX_ORACLE_STATES: usize = 3;
pub const MAX_LATTICE_POINTS: f64 = 1e8;
pub const DEFAULT_GRID_STEP: f64 = 1e-2;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct OracleValue<T> {
    /// `+∞` for a conjugate that grows without bound.
    pub value: T,
    /// Local Lipschitz estimate × grid step × √n.
    pub error_bound: T,
    pub argopt: Option<Claim<T>>,
    pub points: usize,
}

struct Scan<T> {
    value: T,
    point: Vec<T>,
    lipschitz: T,
    points: usize,
}

fn lattice_size(counts: &[usize]) -> f64 {
    counts.iter().map(|&c| c as f64).product()
}

/// Minimizes `f` over `{lo + k·step : 0 ≤ k < counts}`, visiting points in
/// lexicographic order so ties go to the smallest index. The Lipschitz
/// estimate is the largest difference quotient between lattice neighbors.
fn scan_min<T: Scalar>(lo: &[T], counts: &[usize], step: T, mut f: impl FnMut(&[T]) -> T) -> Scan<T> {
    let d = lo.len();
    let total: usize = counts.iter().product();
    let mut strides = vec![1usize; d];
    for i in (0..d.saturating_sub(1)).rev() {
        strides[i] = strides[i + 1] * counts[i + 1];
    }
    // ring buffer over the last `window` values covers every axis neighbor
    let window = strides.first().copied().unwrap_or(1).max(1);
    let mut ring = vec![T::zero(); window];
    let mut idx = vec![0usize; d];
    let mut y: Vec<T> = lo.to_vec();
    let mut best = T::infinity();
    let mut best_point = y.clone();
    let mut lip = T::zero();
    for flat in 0..total {
        for i in 0..d {
            y[i] = lo[i] + T::from_usize_lossy(idx[i]) * step;
        }
        let v = f(&y);
        for i in 0..d {
            if idx[i] > 0 {
                let prev = ring[(flat - strides[i]) % window];
                lip = lip.max((v - prev).abs() / step);
            }
        }
        ring[flat % window] = v;
        if v < best {
            best = v;
            best_point.copy_from_slice(&y);
        }
        for i in (0..d).rev() {
            idx[i] += 1;
            if idx[i] < counts[i] {
                break;
            }
            idx[i] = 0;
        }
    }
    Scan {
        value: best,
        point: best_point,
        lipschitz: lip,
        points: total,
    }
}

fn counts_for<T: Scalar>(lo: &[T], hi: &[T], step: T) -> Vec<usize> {
    lo.iter()
        .zip(hi)
        .map(|(l, h)| {
            let k = ((*h - *l) / step + T::lit(1e-9)).floor().to_f64_lossy();
            k.max(0.0) as usize + 1
        })
        .collect()
}

fn check_step<T: Scalar>(step: T, field: &str) -> Result<()> {
    if !(step > T::zero()) || !step.is_finite() {
        return Err(Error::invalid(field, "must be positive and finite"));
    }
    Ok(())
}

/// Coarse scan of `[lo, hi]` followed by one refinement pass with step/10
/// within ±5 steps of the incumbent.
fn refined_min<T: Scalar>(lo: &[T], hi: &[T], step: T, mut f: impl FnMut(&[T]) -> T) -> Result<Scan<T>> {
    let counts = counts_for(lo, hi, step);
    let size = lattice_size(&counts);
    if size > MAX_LATTICE_POINTS {
        return Err(Error::GridTooLarge {
            points: size,
            limit: MAX_LATTICE_POINTS,
        });
    }
    let coarse = scan_min(lo, &counts, step, &mut f);
    let fine_step = step / T::lit(10.0);
    let reach = T::lit(5.0) * step;
    let flo: Vec<T> = coarse.point.iter().zip(lo).map(|(c, l)| (*c - reach).max(*l)).collect();
    let fhi: Vec<T> = coarse.point.iter().zip(hi).map(|(c, h)| (*c + reach).min(*h)).collect();
    let fine = scan_min(&flo, &counts_for(&flo, &fhi, fine_step), fine_step, &mut f);
    let points = coarse.points + fine.points;
    let (value, point) = if fine.value < coarse.value {
        (fine.value, fine.point)
    } else {
        (coarse.value, coarse.point)
    };
    Ok(Scan {
        value,
        point,
        lipschitz: coarse.lipschitz,
        points,
    })
}

/// `min H(Y)` over the lattice `{Y : Xᵢ ≤ Yᵢ ≤ sup X + margin}` with spacing
/// `grid_step`, refined once around the incumbent.
pub fn brute_r_max<T: Scalar>(h: &PremiumPrinciple<T>, x: &Claim<T>, grid_step: T, margin: T) -> Result<OracleValue<T>> {
    let n = h.len();
    if x.len() != n {
        return Err(Error::Shape { expected: n, got: x.len() });
    }
    if n > MAX_ORACLE_STATES {
        return Err(Error::Unsupported(format!("the lattice oracle is limited to {MAX_ORACLE_STATES} states")));
    }
    check_step(grid_step, "gridStep")?;
    if !(margin >= T::zero()) || !margin.is_finite() {
        return Err(Error::invalid("margin", "must be nonnegative and finite"));
    }
    let lo = x.values().to_vec();
    let hi = vec![x.sup() + margin; n];
    let s = refined_min(&lo, &hi, grid_step, |y| h.eval_slice(y))?;
    Ok(OracleValue {
        value: s.value,
        error_bound: s.lipschitz * grid_step * T::from_usize_lossy(n).sqrt(),
        argopt: Some(Claim::from_vec_unchecked(s.point)),
        points: s.points,
    })
}

/// `max E_Q X − H(X)` over a lattice in `[−box, box]ⁿ`. The objective is
/// unchanged by adding constants, so the last coordinate is pinned to 0 and
/// the search runs in `n − 1` dimensions. Unbounded growth is detected by
/// repeating the search on boxes twice and four times as large (with
/// proportionally coarser lattices) and is reported as `+∞`.
pub fn brute_conjugate<T: Scalar>(
    h: &PremiumPrinciple<T>,
    q: &DiscreteMeasure<T>,
    grid_step: T,
    half_width: T,
) -> Result<OracleValue<T>> {
    let n = h.len();
    if q.len() != n {
        return Err(Error::Shape { expected: n, got: q.len() });
    }
    if n > MAX_ORACLE_STATES {
        return Err(Error::Unsupported(format!("the lattice oracle is limited to {MAX_ORACLE_STATES} states")));
    }
    check_step(grid_step, "gridStep")?;
    check_step(half_width, "box")?;
    let w = q.weights();
    let d = n - 1;
    let mut full = vec![T::zero(); n];
    let mut neg = |z: &[T]| {
        full[..d].copy_from_slice(z);
        full[d] = T::zero();
        h.eval_slice(&full) - dot(w, &full)
    };
    let run = |b: T, step: T, f: &mut dyn FnMut(&[T]) -> T| refined_min(&vec![-b; d], &vec![b; d], step, f);
    let base = run(half_width, grid_step, &mut neg)?;
    let err = base.lipschitz * grid_step * T::from_usize_lossy(n).sqrt();
    let two = T::lit(2.0);
    let wide = run(half_width * two, grid_step * two, &mut neg)?;
    let wider = run(half_width * two * two, grid_step * two * two, &mut neg)?;
    let (v0, v1, v2) = (-base.value, -wide.value, -wider.value);
    let slack = T::lit(4.0) * err + T::lit(1e-9);
    if v1 - v0 > slack && v2 - v1 > slack && v2 - v1 >= T::lit(1.5) * (v1 - v0) {
        return Ok(OracleValue {
            value: T::infinity(),
            error_bound: T::zero(),
            argopt: None,
            points: base.points + wide.points + wider.points,
        });
    }
    let mut x = base.point;
    x.push(T::zero());
    Ok(OracleValue {
        value: v0,
        error_bound: err,
        argopt: Some(Claim::from_vec_unchecked(x)),
        points: base.points + wide.points + wider.points,
    })
}
