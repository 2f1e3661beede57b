//! Moments, quantiles, and tail means of claims under a discrete measure.
//!
//! Quantiles use the left-continuous inverse
//! `q(λ) = inf{a : P(X ≤ a) ≥ λ}` throughout. The right-continuous variant
//! `inf{a : P(X ≤ a) > λ}` differs only at atoms and is not exposed.

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::space::{Claim, DiscreteMeasure};

/// Mean and variance of a claim.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moments<T> {
    pub mean: T,
    pub variance: T,
}

pub fn moments<T: Scalar>(p: &DiscreteMeasure<T>, x: &Claim<T>) -> Result<Moments<T>> {
    p.check(x)?;
    Ok(moments_slice(p.weights(), x.values()))
}

pub(crate) fn moments_slice<T: Scalar>(p: &[T], x: &[T]) -> Moments<T> {
    let mean: T = p.iter().zip(x).map(|(&w, &v)| w * v).sum();
    let variance: T = p
        .iter()
        .zip(x)
        .map(|(&w, &v)| w * (v - mean) * (v - mean))
        .sum();
    Moments {
        mean,
        variance: variance.max(T::zero()),
    }
}

/// Tolerance for comparing accumulated probability against a level.
fn mass_tol<T: Scalar>(n: usize) -> T {
    T::epsilon() * T::lit(16.0) * T::from_usize_lossy(n.max(1))
}

/// Indices sorted by ascending claim value (stable, so ties keep state order).
pub(crate) fn ascending_order<T: Scalar>(x: &[T]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..x.len()).collect();
    idx.sort_by(|&a, &b| x[a].partial_cmp(&x[b]).expect("finite claim"));
    idx
}

fn check_level<T: Scalar>(name: &str, level: T) -> Result<()> {
    if level > T::zero() && level < T::one() {
        Ok(())
    } else {
        Err(Error::Domain(format!("{name} = {level} must lie in (0, 1)")))
    }
}

/// Left-continuous quantile `inf{a : P(X ≤ a) ≥ λ}`.
pub fn quantile<T: Scalar>(p: &DiscreteMeasure<T>, x: &Claim<T>, lambda: T) -> Result<T> {
    p.check(x)?;
    check_level("lambda", lambda)?;
    Ok(quantile_slice(p.weights(), x.values(), lambda))
}

pub(crate) fn quantile_slice<T: Scalar>(p: &[T], x: &[T], lambda: T) -> T {
    let order = ascending_order(x);
    let tol = mass_tol::<T>(x.len());
    let mut cum = T::zero();
    let mut k = 0;
    while k < order.len() {
        // merge ties so that P(X ≤ a) is evaluated at distinct levels only
        let level = x[order[k]];
        while k < order.len() && x[order[k]] == level {
            cum += p[order[k]];
            k += 1;
        }
        if cum + tol >= lambda {
            return level;
        }
    }
    x[order[order.len() - 1]]
}

/// Quantile-based premium `P_X^{-1}(1 − ε)`, i.e. `V@R_P^ε(−X)`.
pub fn value_at_risk<T: Scalar>(p: &DiscreteMeasure<T>, x: &Claim<T>, eps: T) -> Result<T> {
    check_level("epsilon", eps)?;
    quantile(p, x, T::one() - eps)
}

/// Upper tail mean `(1/ε) ∫₀^ε P_X^{-1}(1 − γ) dγ`, i.e. `AV@R_P^ε(−X)`.
///
/// The quantile function is a step function on a finite space, so the
/// integral is evaluated exactly by walking the atoms from the top.
pub fn average_value_at_risk_loss<T: Scalar>(
    p: &DiscreteMeasure<T>,
    x: &Claim<T>,
    eps: T,
) -> Result<T> {
    p.check(x)?;
    check_level("epsilon", eps)?;
    Ok(upper_tail_mean(p.weights(), x.values(), eps))
}

/// Exact upper tail mean at mass `eps ∈ (0, 1]`.
pub(crate) fn upper_tail_mean<T: Scalar>(p: &[T], x: &[T], eps: T) -> T {
    let order = ascending_order(x);
    let mut remaining = eps;
    let mut acc = T::zero();
    for &i in order.iter().rev() {
        if remaining <= T::zero() {
            break;
        }
        let take = p[i].min(remaining);
        acc += take * x[i];
        remaining -= take;
    }
    // guard against rounding leaving a sliver of mass unassigned
    if remaining > T::zero() {
        acc += remaining * x[order[0]];
    }
    acc / eps
}
