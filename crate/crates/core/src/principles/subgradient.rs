//! Analytic subgradients of the catalog principles.
//!
//! For convex principles the returned vector `g` satisfies
//! `H(Y) ≥ H(X) + g·(Y − X)` for all `Y`. For nonconvex principles it is a
//! gradient wherever `H` is differentiable.

use super::{PremiumPrinciple, PrincipleKind};
use crate::scalar::{dot, Scalar};
use crate::stats::{ascending_order, moments_slice, quantile_slice};

fn argmax<T: Scalar>(v: impl Iterator<Item = T>) -> usize {
    let mut best = 0;
    let mut bv = T::neg_infinity();
    for (i, x) in v.enumerate() {
        if x > bv {
            bv = x;
            best = i;
        }
    }
    best
}

fn argmin<T: Scalar>(v: impl Iterator<Item = T>) -> usize {
    argmax(v.map(|x| -x))
}

/// `g ← A^T w` for the centering map `A = I − 1pᵀ`.
fn uncenter<T: Scalar>(p: &[T], w: &[T], g: &mut [T]) {
    let s: T = w.iter().copied().sum();
    for i in 0..g.len() {
        g[i] += w[i] - p[i] * s;
    }
}

impl<T: Scalar> PremiumPrinciple<T> {
    /// Writes a subgradient of `H` at `x` into `g` and returns `H(x)`.
    pub(crate) fn value_and_subgradient(&self, x: &[T], g: &mut [T]) -> T {
        use PrincipleKind::*;
        let n = x.len();
        debug_assert_eq!(g.len(), n);
        g.iter_mut().for_each(|v| *v = T::zero());
        let cfg = &self.config;
        let theta = cfg.theta.unwrap_or(T::zero());
        let half = T::lit(0.5);
        let base = || cfg.baseline.as_ref().expect("validated").weights();
        let models = || cfg.model_set.as_ref().expect("validated");
        match cfg.kind {
            Fair => g.copy_from_slice(base()),
            Economic => g.copy_from_slice(self.pricing.as_ref().expect("precomputed").weights()),
            Variance => {
                let p = base();
                let m = moments_slice(p, x);
                for i in 0..n {
                    g[i] = p[i] * (T::one() + theta * (x[i] - m.mean));
                }
            }
            StdDev => {
                let p = base();
                let m = moments_slice(p, x);
                let sd = m.variance.sqrt();
                for i in 0..n {
                    g[i] = p[i];
                    if sd > T::zero() {
                        g[i] += theta * p[i] * (x[i] - m.mean) / sd;
                    }
                }
            }
            MeanAbsDev => {
                let p = base();
                let mean = dot(p, x);
                g.copy_from_slice(p);
                let w: Vec<T> = (0..n).map(|i| theta * p[i] * sign(x[i] - mean)).collect();
                uncenter(p, &w, g);
            }
            LpDeviation => {
                let p = base();
                let e = cfg.p.expect("validated");
                let mean = dot(p, x);
                g.copy_from_slice(p);
                let s: T = (0..n).map(|i| p[i] * (x[i] - mean).abs().powf(e)).sum();
                let norm = s.powf(T::one() / e);
                if norm > T::zero() {
                    let w: Vec<T> = (0..n)
                        .map(|i| {
                            let u = x[i] - mean;
                            theta * p[i] * sign(u) * (u.abs() / norm).powf(e - T::one())
                        })
                        .collect();
                    uncenter(p, &w, g);
                }
            }
            RobustVariance => {
                let ms = models();
                let stats: Vec<_> = ms.iter().map(|q| moments_slice(q.weights(), x)).collect();
                let jm = argmax(stats.iter().map(|m| m.mean));
                let jv = argmax(stats.iter().map(|m| m.variance));
                let qm = ms[jm].weights();
                let qv = ms[jv].weights();
                let mv = stats[jv].mean;
                for i in 0..n {
                    g[i] = qm[i] + theta * T::lit(2.0) * qv[i] * (x[i] - mv);
                }
            }
            MaxminExpectedLoss | SmoothAmbiguity => {
                let l = cfg.loss.as_ref().expect("validated");
                let k = argmin(x.iter().copied());
                let lo = x[k];
                let ms = models();
                // weight on each model's E_j ℓ(X − inf X)
                let outer: Vec<T> = if cfg.kind == MaxminExpectedLoss {
                    let vals = ms.iter().map(|q| {
                        q.weights().iter().zip(x).map(|(&w, &xi)| w * l.eval(xi - lo)).sum::<T>()
                    });
                    let j = argmax(vals);
                    (0..ms.len()).map(|i| if i == j { T::one() } else { T::zero() }).collect()
                } else {
                    let phi = cfg.ambiguity.as_ref().expect("validated");
                    ms.iter()
                        .zip(&self.mixture)
                        .map(|(q, &mu)| {
                            let v: T = q.weights().iter().zip(x).map(|(&w, &xi)| w * l.eval(xi - lo)).sum();
                            mu * phi.derivative(v)
                        })
                        .collect()
                };
                let mut total = T::zero();
                for (q, &c) in ms.iter().zip(&outer) {
                    if c == T::zero() {
                        continue;
                    }
                    for i in 0..n {
                        let d = c * q.weights()[i] * l.derivative(x[i] - lo);
                        g[i] += d;
                        total += d;
                    }
                }
                g[k] += T::one() - total;
            }
            AmbiguityIndex => {
                let p = base();
                let ms = models();
                let hi = argmax(ms.iter().map(|q| dot(q.weights(), x)));
                let lo = argmin(ms.iter().map(|q| dot(q.weights(), x)));
                for i in 0..n {
                    g[i] = p[i] + theta * half * (ms[hi].weights()[i] - ms[lo].weights()[i]);
                }
            }
            Quantile => {
                let p = base();
                let v = quantile_slice(p, x, T::one() - cfg.epsilon.expect("validated"));
                let k = x.iter().position(|&xi| xi == v).expect("quantile is attained");
                g[k] = T::one();
            }
            AVaR => tail_weights(base(), x, cfg.epsilon.expect("validated"), g),
            AbsoluteDeviation => {
                let p = base();
                let med = quantile_slice(p, x, half);
                let (mut above, mut below, mut tie) = (T::zero(), T::zero(), T::zero());
                for i in 0..n {
                    if x[i] > med {
                        above += p[i];
                    } else if x[i] < med {
                        below += p[i];
                    } else {
                        tie += p[i];
                    }
                }
                // the tie states absorb the imbalance so that the median is
                // stationary, which makes this a subgradient of min_c E|X − c|
                let s_tie = if tie > T::zero() {
                    ((below - above) / tie).max(-T::one()).min(T::one())
                } else {
                    T::zero()
                };
                for i in 0..n {
                    let s = if x[i] > med {
                        T::one()
                    } else if x[i] < med {
                        -T::one()
                    } else {
                        s_tie
                    };
                    g[i] = p[i] * (T::one() + theta * s);
                }
            }
            ChoquetDistortion => {
                let p = cfg.baseline.as_ref().expect("validated");
                let gd = cfg.distortion.as_ref().expect("validated");
                let order = ascending_order(x);
                let mut mask = 0u64;
                let mut prev = T::zero();
                for &i in order.iter().rev() {
                    mask |= 1 << i;
                    let cur = gd.eval(p.mass(mask));
                    g[i] = cur - prev;
                    prev = cur;
                }
            }
            WorstCase => g[argmax(x.iter().copied())] = T::one(),
        }
        self.eval_slice(x)
    }
}

fn sign<T: Scalar>(v: T) -> T {
    if v > T::zero() {
        T::one()
    } else if v < T::zero() {
        -T::one()
    } else {
        T::zero()
    }
}

/// Density of the maximizing measure in the dual form of the upper tail mean.
fn tail_weights<T: Scalar>(p: &[T], x: &[T], eps: T, g: &mut [T]) {
    let order = ascending_order(x);
    let mut remaining = eps;
    for &i in order.iter().rev() {
        let take = p[i].min(remaining.max(T::zero()));
        g[i] = take / eps;
        remaining -= take;
    }
    if remaining > T::zero() {
        g[order[0]] += remaining / eps;
    }
}
