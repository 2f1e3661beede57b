//! Built-in parametric scalar functions used as loss functions `ℓ`,
//! ambiguity attitudes `φ`, and distortions `g`.
//!
//! Only named families are supported so that configurations stay
//! serializable. Every loss family is nondecreasing with `f(0) = 0`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// A nondecreasing function `ℝ → ℝ` with `f(0) = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "type", rename_all = "camelCase")]
pub enum ScalarFn<T> {
    Identity,
    /// `slope · x`, `slope > 0`.
    Linear { slope: T },
    /// `scale · sign(x) · |x|^exponent`.
    Power { scale: T, exponent: T },
    /// `(e^{rate·x} − 1) / rate`.
    Exponential { rate: T },
    /// Slope `below` left of `kink`, slope `above` right of it, through the origin.
    PiecewiseLinear { kink: T, below: T, above: T },
}

impl<T: Scalar> ScalarFn<T> {
    pub fn validate(&self, field: &str) -> Result<()> {
        let bad = |why: &str| Err(Error::invalid(field, why.to_string()));
        match *self {
            ScalarFn::Identity => Ok(()),
            ScalarFn::Linear { slope } if !(slope > T::zero()) => bad("slope must be positive"),
            ScalarFn::Power { scale, exponent } if !(scale > T::zero() && exponent > T::zero()) => {
                bad("power needs positive scale and exponent")
            }
            ScalarFn::Exponential { rate } if !(rate > T::zero()) => bad("rate must be positive"),
            ScalarFn::PiecewiseLinear { kink, below, above }
                if !(kink.is_finite() && below >= T::zero() && above >= T::zero()) =>
            {
                bad("piecewise-linear slopes must be nonnegative")
            }
            _ => Ok(()),
        }
    }

    pub fn eval(&self, x: T) -> T {
        match *self {
            ScalarFn::Identity => x,
            ScalarFn::Linear { slope } => slope * x,
            ScalarFn::Power { scale, exponent } => scale * x.signum() * x.abs().powf(exponent),
            ScalarFn::Exponential { rate } => (rate * x).exp_m1() / rate,
            ScalarFn::PiecewiseLinear { kink, below, above } => {
                let at = |t: T| if t <= kink { below * t } else { below * kink + above * (t - kink) };
                at(x) - at(T::zero())
            }
        }
    }

    /// Derivative, taking the right derivative at kinks.
    pub fn derivative(&self, x: T) -> T {
        match *self {
            ScalarFn::Identity => T::one(),
            ScalarFn::Linear { slope } => slope,
            ScalarFn::Power { scale, exponent } => {
                if x == T::zero() {
                    if exponent > T::one() {
                        T::zero()
                    } else if exponent == T::one() {
                        scale
                    } else {
                        T::infinity()
                    }
                } else {
                    scale * exponent * x.abs().powf(exponent - T::one())
                }
            }
            ScalarFn::Exponential { rate } => (rate * x).exp(),
            ScalarFn::PiecewiseLinear { kink, below, above } => {
                if x < kink {
                    below
                } else {
                    above
                }
            }
        }
    }

    /// `Some(s)` when `f(x) = s·x` exactly.
    pub fn linear_slope(&self) -> Option<T> {
        match *self {
            ScalarFn::Identity => Some(T::one()),
            ScalarFn::Linear { slope } => Some(slope),
            ScalarFn::Power { scale, exponent } if exponent == T::one() => Some(scale),
            ScalarFn::PiecewiseLinear { below, above, .. } if below == above => Some(below),
            _ => None,
        }
    }
}

/// A distortion `g: [0,1] → [0,1]`, nondecreasing with `g(0)=0`, `g(1)=1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "type", rename_all = "camelCase")]
pub enum Distortion<T> {
    Identity,
    /// `u^exponent`.
    Power { exponent: T },
    /// Proportional hazard transform `u^{1/rho}`.
    ProportionalHazard { rho: T },
}

impl<T: Scalar> Distortion<T> {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Distortion::Power { exponent } if !(exponent > T::zero()) => {
                return Err(Error::invalid("distortion", "exponent must be positive"))
            }
            Distortion::ProportionalHazard { rho } if !(rho > T::zero()) => {
                return Err(Error::invalid("distortion", "rho must be positive"))
            }
            _ => {}
        }
        if self.eval(T::zero()) != T::zero() || (self.eval(T::one()) - T::one()).abs() > T::epsilon() {
            return Err(Error::invalid("distortion", "g(0)=0 and g(1)=1 are required"));
        }
        let mut prev = T::zero();
        for k in 1..=1000 {
            let v = self.eval(T::lit(k as f64 / 1000.0));
            if v < prev {
                return Err(Error::invalid("distortion", "g is not nondecreasing"));
            }
            prev = v;
        }
        Ok(())
    }

    pub fn eval(&self, u: T) -> T {
        let u = u.max(T::zero()).min(T::one());
        match *self {
            Distortion::Identity => u,
            Distortion::Power { exponent } => u.powf(exponent),
            Distortion::ProportionalHazard { rho } => u.powf(T::one() / rho),
        }
    }

    /// Concave distortions yield submodular capacities, hence convex
    /// Choquet premiums.
    pub fn is_concave(&self) -> bool {
        match *self {
            Distortion::Identity => true,
            Distortion::Power { exponent } => exponent <= T::one(),
            Distortion::ProportionalHazard { rho } => rho >= T::one(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn loss_functions_vanish_at_zero() {
        let fs: [ScalarFn<f64>; 5] = [
            ScalarFn::Identity,
            ScalarFn::Linear { slope: 2.0 },
            ScalarFn::Power { scale: 0.5, exponent: 2.0 },
            ScalarFn::Exponential { rate: 0.7 },
            ScalarFn::PiecewiseLinear { kink: 1.0, below: 1.0, above: 3.0 },
        ];
        for f in fs {
            f.validate("loss").unwrap();
            assert_eq!(f.eval(0.0), 0.0);
            assert!(f.eval(2.0) >= f.eval(1.0));
        }
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let f = ScalarFn::Power { scale: 0.5, exponent: 2.0 };
        assert_eq!(f.eval(1.0), 0.5);
        assert_eq!(f.derivative(1.0), 1.0);
        assert_eq!(f.derivative(0.0), 0.0);
        let e = ScalarFn::Exponential { rate: 0.5f64 };
        let h = 1e-6;
        assert!(((e.eval(1.0 + h) - e.eval(1.0 - h)) / (2.0 * h) - e.derivative(1.0)).abs() < 1e-8);
        let pl = ScalarFn::PiecewiseLinear { kink: 1.0, below: 1.0, above: 3.0 };
        assert_eq!(pl.eval(2.0), 4.0);
        assert_eq!(pl.derivative(2.0), 3.0);
    }

    #[test]
    fn invalid_parameters_rejected() {
        assert!(ScalarFn::Linear { slope: 0.0 }.validate("loss").is_err());
        assert!(ScalarFn::Exponential { rate: -1.0 }.validate("loss").is_err());
        assert!(Distortion::Power { exponent: -1.0 }.validate().is_err());
    }

    #[test]
    fn distortions() {
        let g = Distortion::Power { exponent: 2.0 };
        g.validate().unwrap();
        assert_eq!(g.eval(0.5), 0.25);
        assert!(!g.is_concave());
        let ph = Distortion::ProportionalHazard { rho: 2.0f64 };
        ph.validate().unwrap();
        assert!((ph.eval(0.25) - 0.5).abs() < 1e-15);
        assert!(ph.is_concave());
    }
}
