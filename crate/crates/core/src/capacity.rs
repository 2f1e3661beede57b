//! Capacities (monotone set functions) and Choquet integration.

use crate::error::{Error, Result};
use crate::functions::Distortion;
use crate::scalar::Scalar;
use crate::space::{Claim, DiscreteMeasure};
use crate::stats::ascending_order;

/// Largest state count for which a capacity is stored as an explicit table.
pub const MAX_EXPLICIT_STATES: usize = 16;

/// A normalized monotone set function on the power set of `{0, …, n−1}`.
///
/// Subsets are bitmasks. Explicit tables hold `2ⁿ` values; distorted
/// probabilities are evaluated lazily as `g(P(A))`.
#[derive(Debug, Clone, PartialEq)]
pub enum Capacity<T> {
    Explicit { n: usize, values: Vec<T> },
    Distorted { measure: DiscreteMeasure<T>, g: Distortion<T> },
}

impl<T: Scalar> Capacity<T> {
    /// Validates `γ(∅)=0`, `γ(Ω)=1`, and monotonicity under inclusion.
    pub fn explicit(n: usize, values: Vec<T>) -> Result<Self> {
        if n == 0 || n > MAX_EXPLICIT_STATES {
            return Err(Error::invalid(
                "capacity",
                format!("explicit capacities support 1..={MAX_EXPLICIT_STATES} states"),
            ));
        }
        if values.len() != 1 << n {
            return Err(Error::invalid("capacity", format!("expected {} set values", 1usize << n)));
        }
        let tol = T::lit(1e-12);
        if values[0].abs() > tol || (values[(1 << n) - 1] - T::one()).abs() > tol {
            return Err(Error::invalid("capacity", "requires γ(∅)=0 and γ(Ω)=1"));
        }
        for a in 0..values.len() {
            for i in 0..n {
                let b = a | 1 << i;
                if b != a && values[b] < values[a] - tol {
                    return Err(Error::invalid(
                        "capacity",
                        format!("not monotone: γ({b:#b}) < γ({a:#b})"),
                    ));
                }
            }
        }
        Ok(Capacity::Explicit { n, values })
    }

    /// The additive capacity `A ↦ P(A)`.
    pub fn from_measure(p: &DiscreteMeasure<T>) -> Self {
        Capacity::Distorted {
            measure: p.clone(),
            g: Distortion::Identity,
        }
    }

    pub fn len(&self) -> usize {
        match self {
            Capacity::Explicit { n, .. } => *n,
            Capacity::Distorted { measure, .. } => measure.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn value(&self, mask: u64) -> T {
        match self {
            Capacity::Explicit { values, .. } => values[mask as usize],
            Capacity::Distorted { measure, g } => g.eval(measure.mass(mask)),
        }
    }

    /// Materializes the set function (only for `n ≤ 16`).
    pub fn to_explicit(&self) -> Result<Self> {
        let n = self.len();
        if n > MAX_EXPLICIT_STATES {
            return Err(Error::Unsupported(format!(
                "explicit capacity tables are limited to {MAX_EXPLICIT_STATES} states"
            )));
        }
        let values = (0..1u64 << n).map(|m| self.value(m)).collect();
        Capacity::explicit(n, values)
    }
}

/// The distorted probability `γ = g ∘ P`.
pub fn distort<T: Scalar>(p: &DiscreteMeasure<T>, g: Distortion<T>) -> Result<Capacity<T>> {
    g.validate()?;
    Ok(Capacity::Distorted {
        measure: p.clone(),
        g,
    })
}

/// `∫_{inf X}^∞ γ({X > t}) dt + inf X`, summed exactly over the jump levels of `X`.
pub fn choquet_integral<T: Scalar>(gamma: &Capacity<T>, x: &Claim<T>) -> Result<T> {
    if gamma.len() != x.len() {
        return Err(Error::Shape {
            expected: gamma.len(),
            got: x.len(),
        });
    }
    Ok(choquet_slice(x.values(), |mask| gamma.value(mask)))
}

pub(crate) fn choquet_slice<T: Scalar>(x: &[T], gamma: impl Fn(u64) -> T) -> T {
    let order = ascending_order(x);
    let base = x[order[0]];
    let mut acc = base;
    let mut upper: u64 = 0;
    let mut k = order.len();
    // walk down from the largest value; `upper` is the set {X > t} on each layer
    while k > 0 {
        let level = x[order[k - 1]];
        while k > 0 && x[order[k - 1]] == level {
            upper |= 1 << order[k - 1];
            k -= 1;
        }
        let next = if k > 0 { x[order[k - 1]] } else { base };
        if level > next {
            acc += (level - next) * gamma(upper);
        }
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn additive_capacity_integrates_to_expectation() {
        let p = DiscreteMeasure::<f64>::from_f64(&[0.2, 0.3, 0.5]);
        let x = Claim::<f64>::from_f64(&[3.0, -1.0, 2.0]);
        let v = choquet_integral(&Capacity::from_measure(&p), &x).unwrap();
        assert!((v - p.expect(&x).unwrap()).abs() < 1e-14);
    }

    #[test]
    fn constant_claim() {
        let p = DiscreteMeasure::<f64>::uniform(3);
        let g = distort(&p, Distortion::Power { exponent: 0.5 }).unwrap();
        assert_eq!(choquet_integral(&g, &Claim::constant(3, -4.0)).unwrap(), -4.0);
    }

    #[test]
    fn squared_distortion_two_states() {
        let p = DiscreteMeasure::<f64>::uniform(2);
        let g = distort(&p, Distortion::Power { exponent: 2.0 }).unwrap();
        assert_eq!(g.value(0b01), 0.25);
        assert_eq!(g.value(0b11), 1.0);
        let v = choquet_integral(&g, &Claim::<f64>::from_f64(&[0.0, 1.0])).unwrap();
        assert!((v - 0.25).abs() < 1e-15);
    }

    #[test]
    fn identity_distortion_reproduces_measure() {
        let p = DiscreteMeasure::<f64>::from_f64(&[0.1, 0.2, 0.7]);
        let g = distort(&p, Distortion::Identity).unwrap();
        for m in 0..8u64 {
            assert!((g.value(m) - p.mass(m)).abs() < 1e-15);
        }
    }

    #[test]
    fn explicit_validation() {
        assert!(Capacity::<f64>::explicit(2, vec![0.0, 0.6, 0.5, 1.0]).is_ok());
        assert!(Capacity::<f64>::explicit(2, vec![0.0, 0.6, 0.5, 0.9]).is_err());
        assert!(Capacity::<f64>::explicit(2, vec![0.0, 0.6, 0.5]).is_err());
        // γ({0,1}) < γ({0}) is not monotone
        assert!(Capacity::<f64>::explicit(3, vec![0.0, 0.9, 0.1, 0.5, 0.1, 0.9, 0.2, 1.0]).is_err());
        let p = DiscreteMeasure::<f64>::uniform(3);
        let e = distort(&p, Distortion::Power { exponent: 2.0 }).unwrap().to_explicit().unwrap();
        assert!((e.value(0b011) - 4.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn ties_are_merged() {
        let gamma = Capacity::<f64>::explicit(3, vec![0.0, 0.5, 0.5, 0.6, 0.5, 0.6, 0.6, 1.0]).unwrap();
        let x = Claim::<f64>::from_f64(&[1.0, 1.0, 0.0]);
        // one layer of height 1 on the set {0,1}
        assert!((choquet_integral(&gamma, &x).unwrap() - 0.6).abs() < 1e-15);
    }
}
