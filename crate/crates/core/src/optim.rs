//! Deep-cut ellipsoid method for small convex programs
//! `min f(y)` over a box intersected with halfspaces.
//!
//! Every iteration yields a certified lower bound `f(c) − ‖g‖_P` on the
//! optimum, so the returned gap is an honest optimality certificate as long
//! as the oracle returns true subgradients.

use crate::scalar::{dot, Scalar};

/// `a·y ≤ b`.
#[derive(Debug, Clone)]
pub(crate) struct Halfspace<T> {
    pub a: Vec<T>,
    pub b: T,
}

#[derive(Debug, Clone)]
pub(crate) struct Minimum<T> {
    pub x: Vec<T>,
    pub value: T,
    /// Certified lower bound on the optimum over the feasible set.
    pub lower: T,
}

impl<T: Scalar> Minimum<T> {
    pub fn gap(&self) -> T {
        (self.value - self.lower).max(T::zero())
    }
}

pub(crate) struct Ellipsoid<'a, T> {
    pub lo: &'a [T],
    pub hi: &'a [T],
    pub cuts: &'a [Halfspace<T>],
    pub tol: T,
    pub max_iter: usize,
}

impl<'a, T: Scalar> Ellipsoid<'a, T> {
    /// The most violated constraint at `x` (relative to its normal's length).
    fn violated(&self, x: &[T]) -> Option<(Vec<T>, T)> {
        let n = x.len();
        let mut worst: Option<(Vec<T>, T, T)> = None;
        let mut consider = |a: Vec<T>, b: T| {
            let norm = dot(&a, &a).sqrt().max(T::min_positive_value());
            let rel = (dot(&a, x) - b) / norm;
            if rel > T::zero() && worst.as_ref().map_or(true, |w| rel > w.2) {
                worst = Some((a, b, rel));
            }
        };
        for i in 0..n {
            if x[i] > self.hi[i] || x[i] < self.lo[i] {
                let mut a = vec![T::zero(); n];
                if x[i] > self.hi[i] {
                    a[i] = T::one();
                    consider(a, self.hi[i]);
                } else {
                    a[i] = -T::one();
                    consider(a, -self.lo[i]);
                }
            }
        }
        for h in self.cuts {
            if dot(&h.a, x) > h.b {
                consider(h.a.clone(), h.b);
            }
        }
        worst.map(|(a, b, _)| (a, b))
    }

    /// Minimizes `f` (which writes a subgradient into its second argument
    /// and returns the value). Returns `None` when no feasible point is met.
    pub fn minimize(&self, mut f: impl FnMut(&[T], &mut [T]) -> T, start: Option<&[T]>) -> Option<Minimum<T>> {
        let n = self.lo.len();
        let mut g = vec![T::zero(); n];
        let mut best: Option<(Vec<T>, T)> = None;
        let mut lower = T::neg_infinity();
        let two = T::lit(2.0);

        if let Some(s) = start {
            if self.violated(s).is_none() {
                let v = f(s, &mut g);
                best = Some((s.to_vec(), v));
            }
        }

        let mut c: Vec<T> = (0..n).map(|i| (self.lo[i] + self.hi[i]) / two).collect();
        let nn = T::from_usize_lossy(n);
        // P = L·Lᵀ is kept in factored form so that widths aᵀPa = |Lᵀa|² are
        // computed without cancellation; the initial ball with radii
        // √n·halfwidth contains the box
        let mut l = vec![vec![T::zero(); n]; n];
        for i in 0..n {
            let w = ((self.hi[i] - self.lo[i]) / two).max(T::epsilon());
            l[i][i] = nn.sqrt() * w;
        }
        let shallow = -T::one() / (two * nn);

        let mut iterations = 0;
        while iterations < self.max_iter {
            iterations += 1;
            let cut = match self.violated(&c) {
                Some((a, b)) => {
                    let lta = mat_t_vec(&l, &a);
                    let width = dot(&lta, &lta).sqrt();
                    if !(width > T::zero()) {
                        break;
                    }
                    let alpha = (dot(&a, &c) - b) / width;
                    if alpha >= T::one() {
                        // the feasible set misses the ellipsoid
                        break;
                    }
                    (lta, width, alpha)
                }
                None => {
                    let v = f(&c, &mut g);
                    if best.as_ref().map_or(true, |(_, bv)| v < *bv) {
                        best = Some((c.clone(), v));
                    }
                    let ltg = mat_t_vec(&l, &g);
                    let w = dot(&ltg, &ltg).sqrt();
                    if !(w > T::zero()) {
                        // zero subgradient: c is optimal
                        lower = lower.max(v);
                        break;
                    }
                    lower = lower.max(v - w);
                    let bv = best.as_ref().unwrap().1;
                    if bv - lower <= self.tol * (T::one() + bv.abs()) {
                        break;
                    }
                    // a box face cutting deep into the ellipsoid bounds its
                    // growth along directions the objective never cuts
                    match self.shallow_box_cut(&c, &l, shallow) {
                        Some(cut) => cut,
                        None => {
                            let alpha = (v - bv) / w;
                            if alpha >= T::one() {
                                lower = lower.max(bv);
                                break;
                            }
                            (ltg, w, alpha)
                        }
                    }
                }
            };
            let (lta, width, alpha) = cut;
            let u: Vec<T> = lta.iter().map(|v| *v / width).collect();
            let b = mat_vec(&l, &u);
            if n == 1 {
                // exact interval update
                let r = l[0][0].abs();
                let (lo, hi) = if b[0] > T::zero() {
                    (c[0] - r, c[0] - alpha * r)
                } else {
                    (c[0] + alpha * r, c[0] + r)
                };
                c[0] = (lo + hi) / two;
                l[0][0] = (hi - lo) / two;
                if l[0][0] <= T::epsilon() * (T::one() + c[0].abs()) {
                    break;
                }
                continue;
            }
            let tau = (T::one() + nn * alpha) / (nn + T::one());
            let delta = nn * nn / (nn * nn - T::one()) * (T::one() - alpha * alpha);
            let sigma = two * (T::one() + nn * alpha) / ((nn + T::one()) * (T::one() + alpha));
            for i in 0..n {
                c[i] -= tau * b[i];
            }
            // L ← √δ·L·(I − γuuᵀ) with (1 − γ)² = 1 − σ
            let gamma = T::one() - (T::one() - sigma).max(T::zero()).sqrt();
            let sd = delta.sqrt();
            for row in l.iter_mut() {
                let lu = dot(row, &u);
                for j in 0..n {
                    row[j] = sd * (row[j] - gamma * lu * u[j]);
                }
            }
        }
        best.map(|(x, value)| Minimum {
            x,
            value,
            lower: lower.min(value),
        })
    }

    /// The deepest box face with cut depth above `threshold`, if any.
    fn shallow_box_cut(&self, c: &[T], l: &[Vec<T>], threshold: T) -> Option<(Vec<T>, T, T)> {
        let n = c.len();
        let mut best: Option<(usize, bool, T)> = None;
        for i in 0..n {
            let w = dot(&l[i], &l[i]).sqrt();
            if !(w > T::zero()) {
                continue;
            }
            for upper in [true, false] {
                let alpha = if upper { (c[i] - self.hi[i]) / w } else { (self.lo[i] - c[i]) / w };
                if alpha > threshold && best.map_or(true, |(_, _, a)| alpha > a) {
                    best = Some((i, upper, alpha));
                }
            }
        }
        best.map(|(i, upper, alpha)| {
            let s = if upper { T::one() } else { -T::one() };
            let lta: Vec<T> = (0..n).map(|k| s * l[i][k]).collect();
            let width = dot(&lta, &lta).sqrt();
            (lta, width, alpha)
        })
    }
}

fn mat_vec<T: Scalar>(l: &[Vec<T>], u: &[T]) -> Vec<T> {
    l.iter().map(|row| dot(row, u)).collect()
}

fn mat_t_vec<T: Scalar>(l: &[Vec<T>], a: &[T]) -> Vec<T> {
    let n = a.len();
    let mut out = vec![T::zero(); n];
    for (i, row) in l.iter().enumerate() {
        for j in 0..n {
            out[j] += row[j] * a[i];
        }
    }
    out
}
