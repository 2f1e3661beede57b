//! Finite state spaces, claims on them, and probability vectors.

use std::ops::{Add, Index, Mul, Neg, Sub};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// A finite state space `{ω₁, …, ωₙ}`; every subset is measurable.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StateSpace {
    n: usize,
    labels: Option<Vec<String>>,
}

impl StateSpace {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("n", "a state space needs at least one state"));
        }
        Ok(StateSpace { n, labels: None })
    }

    pub fn with_labels(labels: Vec<String>) -> Result<Self> {
        let n = labels.len();
        if n == 0 {
            return Err(Error::invalid("labels", "a state space needs at least one state"));
        }
        for (i, l) in labels.iter().enumerate() {
            if labels[..i].contains(l) {
                return Err(Error::invalid("labels", format!("duplicate state label `{l}`")));
            }
        }
        Ok(StateSpace {
            n,
            labels: Some(labels),
        })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub fn check(&self, got: usize) -> Result<()> {
        if got == self.n {
            Ok(())
        } else {
            Err(Error::Shape {
                expected: self.n,
                got,
            })
        }
    }
}

/// A bounded claim `X: Ω → ℝ`. Positive values are losses.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct Claim<T> {
    values: Vec<T>,
}

impl<T: Scalar> Claim<T> {
    pub fn new(values: Vec<T>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::invalid("claim", "empty claim"));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid("claim", format!("entry {i} is not finite")));
        }
        Ok(Claim { values })
    }

    /// Builds a claim from `f64` literals; panics on non-finite input.
    pub fn from_f64(values: &[f64]) -> Self {
        Self::new(values.iter().map(|&v| T::lit(v)).collect()).expect("finite claim")
    }

    pub(crate) fn from_vec_unchecked(values: Vec<T>) -> Self {
        Claim { values }
    }

    pub fn constant(n: usize, m: T) -> Self {
        Claim {
            values: vec![m; n],
        }
    }

    pub fn zero(n: usize) -> Self {
        Self::constant(n, T::zero())
    }

    /// Indicator of the states whose bits are set in `mask`.
    pub fn indicator(n: usize, mask: u64) -> Self {
        Claim {
            values: (0..n)
                .map(|i| if mask >> i & 1 == 1 { T::one() } else { T::zero() })
                .collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    pub fn sup(&self) -> T {
        self.values.iter().fold(T::neg_infinity(), |m, &x| m.max(x))
    }

    pub fn inf(&self) -> T {
        self.values.iter().fold(T::infinity(), |m, &x| m.min(x))
    }

    pub fn range(&self) -> T {
        self.sup() - self.inf()
    }

    pub fn shift(&self, m: T) -> Self {
        self.map(|x| x + m)
    }

    pub fn scale(&self, a: T) -> Self {
        self.map(|x| a * x)
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        Claim {
            values: self.values.iter().map(|&x| f(x)).collect(),
        }
    }

    pub fn zip_with(&self, other: &Self, f: impl Fn(T, T) -> T) -> Self {
        debug_assert_eq!(self.len(), other.len());
        Claim {
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    /// Reorders states: the result takes value `self[perm[i]]` in state `i`.
    pub fn permute(&self, perm: &[usize]) -> Self {
        Claim {
            values: perm.iter().map(|&j| self.values[j]).collect(),
        }
    }

    pub fn is_constant(&self, tol: T) -> bool {
        self.range() <= tol
    }

    /// Pointwise `self ≤ other + tol`.
    pub fn le(&self, other: &Self, tol: T) -> bool {
        self.values
            .iter()
            .zip(&other.values)
            .all(|(&a, &b)| a <= b + tol)
    }
}

impl<T> Index<usize> for Claim<T> {
    type Output = T;
    fn index(&self, i: usize) -> &T {
        &self.values[i]
    }
}

impl<T: Scalar> Add for &Claim<T> {
    type Output = Claim<T>;
    fn add(self, rhs: Self) -> Claim<T> {
        self.zip_with(rhs, |a, b| a + b)
    }
}

impl<T: Scalar> Sub for &Claim<T> {
    type Output = Claim<T>;
    fn sub(self, rhs: Self) -> Claim<T> {
        self.zip_with(rhs, |a, b| a - b)
    }
}

impl<T: Scalar> Neg for &Claim<T> {
    type Output = Claim<T>;
    fn neg(self) -> Claim<T> {
        self.map(|x| -x)
    }
}

impl<T: Scalar> Mul<T> for &Claim<T> {
    type Output = Claim<T>;
    fn mul(self, rhs: T) -> Claim<T> {
        self.scale(rhs)
    }
}

/// A probability vector on a finite state space.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct DiscreteMeasure<T> {
    weights: Vec<T>,
}

impl<T: Scalar> DiscreteMeasure<T> {
    /// Validates nonnegativity and total mass one (within `1e-12`, or a few
    /// ulps for low-precision scalars).
    pub fn new(weights: Vec<T>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::invalid("measure", "empty weight vector"));
        }
        for (i, &w) in weights.iter().enumerate() {
            if !w.is_finite() || w < T::zero() {
                return Err(Error::invalid(
                    "measure",
                    format!("weight {i} = {w} is negative or not finite"),
                ));
            }
        }
        let total: T = weights.iter().copied().sum();
        let tol = T::lit(1e-12).max(T::epsilon() * T::lit(8.0) * T::from_usize_lossy(weights.len()));
        if (total - T::one()).abs() > tol {
            return Err(Error::invalid(
                "measure",
                format!("weights sum to {total}, not 1"),
            ));
        }
        Ok(DiscreteMeasure { weights })
    }

    /// Rescales nonnegative weights to total mass one.
    pub fn normalized(weights: Vec<T>) -> Result<Self> {
        let total: T = weights.iter().copied().sum();
        if !(total > T::zero()) {
            return Err(Error::invalid("measure", "weights have no positive mass"));
        }
        Self::new(weights.into_iter().map(|w| w / total).collect())
    }

    pub fn from_f64(weights: &[f64]) -> Self {
        Self::new(weights.iter().map(|&w| T::lit(w)).collect()).expect("valid probability vector")
    }

    pub fn uniform(n: usize) -> Self {
        let w = T::one() / T::from_usize_lossy(n);
        DiscreteMeasure {
            weights: vec![w; n],
        }
    }

    pub fn dirac(n: usize, i: usize) -> Self {
        let mut weights = vec![T::zero(); n];
        weights[i] = T::one();
        DiscreteMeasure { weights }
    }

    pub(crate) fn from_vec_unchecked(weights: Vec<T>) -> Self {
        DiscreteMeasure { weights }
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    /// `E_P(X)`.
    pub fn expect(&self, x: &Claim<T>) -> Result<T> {
        self.check(x)?;
        Ok(self.expect_slice(x.values()))
    }

    pub(crate) fn expect_slice(&self, x: &[T]) -> T {
        self.weights.iter().zip(x).map(|(&p, &v)| p * v).sum()
    }

    /// `P(A)` for the states whose bits are set in `mask`.
    pub fn mass(&self, mask: u64) -> T {
        self.weights
            .iter()
            .enumerate()
            .filter(|(i, _)| mask >> i & 1 == 1)
            .map(|(_, &w)| w)
            .sum()
    }

    /// States carrying zero probability.
    pub fn null_states(&self) -> Vec<usize> {
        (0..self.len())
            .filter(|&i| self.weights[i] == T::zero())
            .collect()
    }

    /// `Q ≪ P`: every `P`-null state is `Q`-null (within `tol`).
    pub fn absolutely_continuous_wrt(&self, p: &Self, tol: T) -> bool {
        self.weights
            .iter()
            .zip(&p.weights)
            .all(|(&q, &pw)| pw > T::zero() || q <= tol)
    }

    /// Density `dQ/dP` on the support of `P`; `None` when `Q` is not
    /// absolutely continuous.
    pub fn density_wrt(&self, p: &Self) -> Option<Vec<T>> {
        self.weights
            .iter()
            .zip(&p.weights)
            .map(|(&q, &pw)| {
                if pw > T::zero() {
                    Some(q / pw)
                } else if q == T::zero() {
                    Some(T::zero())
                } else {
                    None
                }
            })
            .collect()
    }

    pub fn max_abs_diff(&self, other: &Self) -> T {
        self.weights
            .iter()
            .zip(&other.weights)
            .fold(T::zero(), |m, (&a, &b)| m.max((a - b).abs()))
    }

    pub(crate) fn check(&self, x: &Claim<T>) -> Result<()> {
        if x.len() == self.len() {
            Ok(())
        } else {
            Err(Error::Shape {
                expected: self.len(),
                got: x.len(),
            })
        }
    }
}
