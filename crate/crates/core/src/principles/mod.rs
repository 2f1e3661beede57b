//! The catalog of premium principles and a sampling-based axiom checker.
//!
//! On a finite state space every claim is bounded, so the continuity
//! conditions sometimes imposed on `ℓ` and `φ` are vacuous and are not
//! enforced.

mod axioms;
mod config;
mod subgradient;

pub use axioms::{check_axioms, Axiom, AxiomOutcome, AxiomReport, ClaimSampler, Witness};
pub use config::{PrincipleConfig, PrincipleKind};

use serde::Serialize;

use crate::capacity::choquet_slice;
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::space::{Claim, DiscreteMeasure, StateSpace};
use crate::stats::{moments_slice, quantile_slice, upper_tail_mean};

/// Structural properties declared from known theory.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Flags {
    pub convex: bool,
    pub sublinear: bool,
    pub monotone: bool,
}

/// A validated premium principle `H`, ready for evaluation.
#[derive(Debug, Clone)]
pub struct PremiumPrinciple<T> {
    config: PrincipleConfig<T>,
    flags: Flags,
    n: usize,
    // Economic: the pricing measure with density ∝ ℓ'(Z)
    pricing: Option<DiscreteMeasure<T>>,
    // SmoothAmbiguity: the (defaulted) second-order weights
    mixture: Vec<T>,
}

fn require<'a, U>(v: &'a Option<U>, field: &str, kind: PrincipleKind) -> Result<&'a U> {
    v.as_ref().ok_or_else(|| Error::missing(field, kind))
}

impl<T: Scalar> PremiumPrinciple<T> {
    /// Validates `cfg` against the state space and precomputes what the
    /// evaluator needs.
    pub fn build(cfg: PrincipleConfig<T>, space: &StateSpace) -> Result<Self> {
        use PrincipleKind::*;
        let kind = cfg.kind;
        let n = space.len();

        if let Some(p) = &cfg.baseline {
            space.check(p.len())?;
        }
        if let Some(models) = &cfg.model_set {
            for q in models {
                space.check(q.len())?;
            }
        }
        if let Some(z) = &cfg.endowment {
            space.check(z.len())?;
        }
        if let Some(theta) = cfg.theta {
            if !(theta >= T::zero()) || !theta.is_finite() {
                return Err(Error::invalid("theta", format!("{theta} must be a finite nonnegative number")));
            }
        }
        if let Some(eps) = cfg.epsilon {
            if !(eps > T::zero() && eps < T::one()) {
                return Err(Error::invalid("epsilon", format!("{eps} must lie in (0, 1)")));
            }
        }
        if let Some(p) = cfg.p {
            if !(p >= T::one()) || !p.is_finite() {
                return Err(Error::invalid("p", format!("{p} must be a finite number ≥ 1")));
            }
        }
        if let Some(l) = &cfg.loss {
            l.validate("lossFn")?;
        }
        if let Some(phi) = &cfg.ambiguity {
            phi.validate("ambiguityFn")?;
        }
        if let Some(g) = &cfg.distortion {
            g.validate()?;
        }

        let needs_models = matches!(kind, RobustVariance | MaxminExpectedLoss | SmoothAmbiguity | AmbiguityIndex);
        let needs_baseline = !matches!(kind, RobustVariance | MaxminExpectedLoss | SmoothAmbiguity | WorstCase);
        if needs_baseline {
            require(&cfg.baseline, "baseline", kind)?;
        }
        if needs_models {
            let models = require(&cfg.model_set, "modelSet", kind)?;
            if models.is_empty() {
                return Err(Error::invalid("modelSet", "must be nonempty"));
            }
        }
        if matches!(kind, Variance | StdDev | MeanAbsDev | LpDeviation | RobustVariance | AmbiguityIndex | AbsoluteDeviation) {
            require(&cfg.theta, "theta", kind)?;
        }
        if kind == LpDeviation {
            require(&cfg.p, "p", kind)?;
        }
        if matches!(kind, Quantile | AVaR) {
            require(&cfg.epsilon, "epsilon", kind)?;
        }
        if matches!(kind, Economic | MaxminExpectedLoss | SmoothAmbiguity) {
            require(&cfg.loss, "lossFn", kind)?;
        }
        if kind == SmoothAmbiguity {
            require(&cfg.ambiguity, "ambiguityFn", kind)?;
        }
        if kind == Economic {
            require(&cfg.endowment, "endowment", kind)?;
        }
        if kind == ChoquetDistortion {
            require(&cfg.distortion, "distortion", kind)?;
        }

        let theta = cfg.theta.unwrap_or(T::zero());
        let half = T::lit(0.5);
        if kind == MeanAbsDev && cfg.claim_monotone && theta > half {
            return Err(Error::invalid(
                "theta",
                format!("MeanAbsDev is only monotone for θ ≤ 1/2, got {theta}"),
            ));
        }

        let pricing = if kind == Economic {
            let p = cfg.baseline.as_ref().unwrap();
            let z = cfg.endowment.as_ref().unwrap();
            let l = cfg.loss.as_ref().unwrap();
            let w: Vec<T> = p
                .weights()
                .iter()
                .zip(z.values())
                .map(|(&pi, &zi)| pi * l.derivative(zi))
                .collect();
            let total: T = w.iter().copied().sum();
            if !(total > T::zero()) || !total.is_finite() || w.iter().any(|v| !v.is_finite()) {
                return Err(Error::invalid(
                    "lossFn",
                    "ℓ' at the endowment has no positive finite expectation; the economic density is undefined",
                ));
            }
            Some(DiscreteMeasure::from_vec_unchecked(w.into_iter().map(|v| v / total).collect()))
        } else {
            None
        };

        let mixture = if kind == SmoothAmbiguity {
            let k = cfg.model_set.as_ref().unwrap().len();
            match &cfg.second_order_weights {
                Some(mu) => {
                    if mu.len() != k {
                        return Err(Error::invalid(
                            "secondOrderWeights",
                            format!("expected {k} weights, got {}", mu.len()),
                        ));
                    }
                    DiscreteMeasure::new(mu.clone())
                        .map_err(|e| Error::invalid("secondOrderWeights", e.to_string()))?
                        .weights()
                        .to_vec()
                }
                None => DiscreteMeasure::<T>::uniform(k).weights().to_vec(),
            }
        } else {
            Vec::new()
        };

        let flags = declared_flags(&cfg);
        Ok(PremiumPrinciple {
            config: cfg,
            flags,
            n,
            pricing,
            mixture,
        })
    }

    pub fn config(&self) -> &PrincipleConfig<T> {
        &self.config
    }

    pub fn kind(&self) -> PrincipleKind {
        self.config.kind
    }

    pub fn flags(&self) -> Flags {
        self.flags
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// The baseline measure, if the principle has one.
    pub fn baseline(&self) -> Option<&DiscreteMeasure<T>> {
        self.config.baseline.as_ref()
    }

    /// The pricing measure of the economic principle.
    pub fn pricing_measure(&self) -> Option<&DiscreteMeasure<T>> {
        self.pricing.as_ref()
    }

    /// The measures the principle depends on: the baseline and the model set.
    pub fn reference_measures(&self) -> Vec<&DiscreteMeasure<T>> {
        let mut out: Vec<&DiscreteMeasure<T>> = self.config.baseline.iter().collect();
        if let Some(m) = &self.config.model_set {
            out.extend(m.iter());
        }
        out
    }

    pub fn evaluate(&self, x: &Claim<T>) -> Result<T> {
        if x.len() != self.n {
            return Err(Error::Shape {
                expected: self.n,
                got: x.len(),
            });
        }
        Ok(self.eval_slice(x.values()))
    }

    /// Evaluates without a shape check. `x.len()` must equal `self.len()`.
    pub(crate) fn eval_slice(&self, x: &[T]) -> T {
        use PrincipleKind::*;
        debug_assert_eq!(x.len(), self.n);
        let cfg = &self.config;
        let theta = cfg.theta.unwrap_or(T::zero());
        let base = || cfg.baseline.as_ref().expect("validated").weights();
        let models = || cfg.model_set.as_ref().expect("validated");
        match cfg.kind {
            Fair => dot(base(), x),
            Variance => {
                let m = moments_slice(base(), x);
                m.mean + theta * T::lit(0.5) * m.variance
            }
            StdDev => {
                let m = moments_slice(base(), x);
                m.mean + theta * m.variance.sqrt()
            }
            MeanAbsDev => {
                let p = base();
                let mean = dot(p, x);
                let mad: T = p.iter().zip(x).map(|(&w, &v)| w * (v - mean).abs()).sum();
                mean + theta * mad
            }
            LpDeviation => {
                let p = base();
                let e = cfg.p.expect("validated");
                let mean = dot(p, x);
                let s: T = p.iter().zip(x).map(|(&w, &v)| w * (v - mean).abs().powf(e)).sum();
                mean + theta * s.powf(T::one() / e)
            }
            Economic => dot(self.pricing.as_ref().expect("precomputed").weights(), x),
            RobustVariance => {
                let mut sup_mean = T::neg_infinity();
                let mut sup_var = T::neg_infinity();
                for q in models() {
                    let m = moments_slice(q.weights(), x);
                    sup_mean = sup_mean.max(m.mean);
                    sup_var = sup_var.max(m.variance);
                }
                sup_mean + theta * sup_var
            }
            MaxminExpectedLoss => {
                let l = cfg.loss.as_ref().expect("validated");
                let lo = inf(x);
                let mut best = T::neg_infinity();
                for q in models() {
                    let v: T = q.weights().iter().zip(x).map(|(&w, &xi)| w * l.eval(xi - lo)).sum();
                    best = best.max(v);
                }
                best + lo
            }
            SmoothAmbiguity => {
                let l = cfg.loss.as_ref().expect("validated");
                let phi = cfg.ambiguity.as_ref().expect("validated");
                let lo = inf(x);
                let mut acc = T::zero();
                for (q, &mu) in models().iter().zip(&self.mixture) {
                    let v: T = q.weights().iter().zip(x).map(|(&w, &xi)| w * l.eval(xi - lo)).sum();
                    acc += mu * phi.eval(v);
                }
                acc + lo
            }
            AmbiguityIndex => dot(base(), x) + theta * ambiguity_slice(models(), x),
            Quantile => quantile_slice(base(), x, T::one() - cfg.epsilon.expect("validated")),
            AVaR => upper_tail_mean(base(), x, cfg.epsilon.expect("validated")),
            AbsoluteDeviation => {
                let p = base();
                let med = quantile_slice(p, x, T::lit(0.5));
                let dev: T = p.iter().zip(x).map(|(&w, &v)| w * (v - med).abs()).sum();
                dot(p, x) + theta * dev
            }
            ChoquetDistortion => {
                let p = cfg.baseline.as_ref().expect("validated");
                let g = cfg.distortion.as_ref().expect("validated");
                choquet_slice(x, |mask| g.eval(p.mass(mask)))
            }
            WorstCase => sup(x),
        }
    }
}

/// `Amb_𝒫(X) = ½ (max_Q E_Q X − min_Q E_Q X)` over a finite model set.
pub(crate) fn ambiguity_slice<T: Scalar>(models: &[DiscreteMeasure<T>], x: &[T]) -> T {
    let mut hi = T::neg_infinity();
    let mut lo = T::infinity();
    for q in models {
        let e = dot(q.weights(), x);
        hi = hi.max(e);
        lo = lo.min(e);
    }
    T::lit(0.5) * (hi - lo)
}

fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    crate::scalar::dot(a, b)
}

fn inf<T: Scalar>(x: &[T]) -> T {
    x.iter().copied().fold(T::infinity(), T::min)
}

fn sup<T: Scalar>(x: &[T]) -> T {
    x.iter().copied().fold(T::neg_infinity(), T::max)
}

fn declared_flags<T: Scalar>(cfg: &PrincipleConfig<T>) -> Flags {
    use PrincipleKind::*;
    let theta = cfg.theta.unwrap_or(T::zero());
    let all = Flags {
        convex: true,
        sublinear: true,
        monotone: true,
    };
    match cfg.kind {
        Fair | Economic | AVaR | WorstCase => all,
        Variance => Flags {
            convex: true,
            sublinear: theta == T::zero(),
            monotone: theta == T::zero(),
        },
        StdDev => Flags {
            convex: true,
            sublinear: true,
            monotone: theta == T::zero(),
        },
        LpDeviation => Flags {
            convex: true,
            sublinear: true,
            monotone: theta == T::zero() || (cfg.p == Some(T::one()) && theta <= T::lit(0.5)),
        },
        MeanAbsDev => Flags {
            convex: true,
            sublinear: true,
            monotone: theta <= T::lit(0.5),
        },
        AbsoluteDeviation => Flags {
            convex: true,
            sublinear: true,
            monotone: theta <= T::one(),
        },
        RobustVariance => Flags {
            convex: true,
            sublinear: theta == T::zero(),
            monotone: theta == T::zero(),
        },
        AmbiguityIndex => Flags {
            convex: true,
            sublinear: true,
            monotone: ambiguity_index_monotone(cfg),
        },
        MaxminExpectedLoss => {
            let slope = cfg.loss.as_ref().and_then(|l| l.linear_slope());
            Flags {
                convex: slope.map_or(false, |s| s >= T::one()),
                sublinear: slope.map_or(false, |s| s >= T::one()),
                monotone: slope.map_or(false, |s| s == T::one()),
            }
        }
        SmoothAmbiguity => {
            let s = cfg.loss.as_ref().and_then(|l| l.linear_slope());
            let r = cfg.ambiguity.as_ref().and_then(|f| f.linear_slope());
            let slope = s.zip(r).map(|(a, b)| a * b);
            Flags {
                convex: slope.map_or(false, |s| s >= T::one()),
                sublinear: slope.map_or(false, |s| s >= T::one()),
                monotone: slope.map_or(false, |s| s == T::one()),
            }
        }
        Quantile => Flags {
            convex: false,
            sublinear: false,
            monotone: true,
        },
        ChoquetDistortion => {
            let concave = cfg.distortion.as_ref().map_or(false, |g| g.is_concave());
            Flags {
                convex: concave,
                sublinear: concave,
                monotone: true,
            }
        }
    }
}

/// `E_P + θ·Amb_𝒫` is the maximum of the linear functionals with weights
/// `P + θ/2·(Q − Q')` over model pairs; it is declared monotone when all of
/// those weights are nonnegative.
fn ambiguity_index_monotone<T: Scalar>(cfg: &PrincipleConfig<T>) -> bool {
    let theta = cfg.theta.unwrap_or(T::zero());
    if theta == T::zero() {
        return true;
    }
    let (Some(p), Some(models)) = (&cfg.baseline, &cfg.model_set) else {
        return false;
    };
    let half = T::lit(0.5) * theta;
    for a in models {
        for b in models {
            for i in 0..p.len() {
                if p.weights()[i] + half * (a.weights()[i] - b.weights()[i]) < -T::lit(1e-12) {
                    return false;
                }
            }
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functions::{Distortion, ScalarFn};

    fn half() -> DiscreteMeasure<f64> {
        DiscreteMeasure::<f64>::from_f64(&[0.5, 0.5])
    }

    fn build(cfg: PrincipleConfig<f64>) -> PremiumPrinciple<f64> {
        let n = cfg
            .baseline
            .as_ref()
            .map(|p| p.len())
            .or_else(|| cfg.model_set.as_ref().map(|m| m[0].len()))
            .unwrap_or(2);
        PremiumPrinciple::build(cfg, &StateSpace::new(n).unwrap()).unwrap()
    }

    #[test]
    fn fair_flags() {
        let h = build(PrincipleConfig::fair(half()));
        assert_eq!(
            h.flags(),
            Flags {
                convex: true,
                sublinear: true,
                monotone: true
            }
        );
        assert_eq!(h.evaluate(&Claim::<f64>::from_f64(&[0.0, 1.0])).unwrap(), 0.5);
    }

    #[test]
    fn worked_values() {
        let x = Claim::<f64>::from_f64(&[0.0, 1.0]);
        let v = build(PrincipleConfig::variance(half(), 2.0));
        assert!((v.evaluate(&x).unwrap() - 0.75).abs() < 1e-15);
        let m = build(PrincipleConfig::mean_abs_dev(half(), 0.5));
        assert!((m.evaluate(&x).unwrap() - 0.75).abs() < 1e-15);
        let s = build(PrincipleConfig::std_dev(half(), 1.0));
        assert!((s.evaluate(&x).unwrap() - 1.0).abs() < 1e-15);
        let w = build(PrincipleConfig::worst_case());
        assert_eq!(w.evaluate(&x).unwrap(), 1.0);
    }

    #[test]
    fn economic_identity_loss_is_fair() {
        let p = DiscreteMeasure::<f64>::from_f64(&[0.2, 0.3, 0.5]);
        let cfg = PrincipleConfig::new(PrincipleKind::Economic)
            .with_baseline(p.clone())
            .with_loss(ScalarFn::Identity)
            .with_endowment(Claim::<f64>::from_f64(&[1.0, -2.0, 0.5]));
        let h = build(cfg);
        let x = Claim::<f64>::from_f64(&[1.0, 4.0, -3.0]);
        assert!((h.evaluate(&x).unwrap() - p.expect(&x).unwrap()).abs() < 1e-15);
    }

    #[test]
    fn economic_quadratic_loss() {
        let cfg = PrincipleConfig::new(PrincipleKind::Economic)
            .with_baseline(half())
            .with_loss(ScalarFn::Power { scale: 0.5, exponent: 2.0 })
            .with_endowment(Claim::<f64>::from_f64(&[0.0, 1.0]));
        let h = build(cfg);
        assert_eq!(h.pricing_measure().unwrap().weights(), &[0.0, 1.0]);
        assert_eq!(h.evaluate(&Claim::<f64>::from_f64(&[0.0, 1.0])).unwrap(), 1.0);
        assert_eq!(h.evaluate(&Claim::<f64>::from_f64(&[1.0, 0.0])).unwrap(), 0.0);
    }

    #[test]
    fn economic_rejects_vanishing_marginal_loss() {
        let cfg = PrincipleConfig::new(PrincipleKind::Economic)
            .with_baseline(half())
            .with_loss(ScalarFn::PiecewiseLinear { kink: 5.0, below: 0.0, above: 1.0 })
            .with_endowment(Claim::<f64>::from_f64(&[0.0, 1.0]));
        assert!(PremiumPrinciple::build(cfg, &StateSpace::new(2).unwrap()).is_err());
    }

    #[test]
    fn validation_errors() {
        let sp = StateSpace::new(2).unwrap();
        let neg = PrincipleConfig::variance(half(), -1.0);
        assert!(matches!(PremiumPrinciple::build(neg, &sp), Err(Error::Invalid { .. })));
        let missing = PrincipleConfig::new(PrincipleKind::Variance).with_baseline(half());
        assert!(matches!(
            PremiumPrinciple::build(missing, &sp),
            Err(Error::MissingField { .. })
        ));
        let empty = PrincipleConfig::new(PrincipleKind::RobustVariance)
            .with_models(vec![])
            .with_theta(1.0);
        assert!(PremiumPrinciple::build(empty, &sp).is_err());
        let mad = PrincipleConfig::mean_abs_dev(half(), 0.7).claiming_monotone();
        assert!(PremiumPrinciple::build(mad, &sp).is_err());
        let mad_ok = PrincipleConfig::mean_abs_dev(half(), 0.7);
        assert!(PremiumPrinciple::build(mad_ok, &sp).is_ok());
        let shape = PrincipleConfig::fair(DiscreteMeasure::<f64>::uniform(3));
        assert!(matches!(PremiumPrinciple::build(shape, &sp), Err(Error::Shape { .. })));
        let eps = PrincipleConfig::quantile(half(), 1.0);
        assert!(PremiumPrinciple::build(eps, &sp).is_err());
    }

    #[test]
    fn ambiguity_index_singleton_is_fair() {
        let p = DiscreteMeasure::<f64>::from_f64(&[0.1, 0.6, 0.3]);
        let cfg = PrincipleConfig::new(PrincipleKind::AmbiguityIndex)
            .with_baseline(p.clone())
            .with_models(vec![p.clone()])
            .with_theta(3.0);
        let h = build(cfg);
        let x = Claim::<f64>::from_f64(&[2.0, -1.0, 0.5]);
        assert!((h.evaluate(&x).unwrap() - p.expect(&x).unwrap()).abs() < 1e-15);
    }

    #[test]
    fn ambiguity_models() {
        let models = vec![
            DiscreteMeasure::<f64>::from_f64(&[0.8, 0.2]),
            DiscreteMeasure::<f64>::from_f64(&[0.2, 0.8]),
        ];
        let x = Claim::<f64>::from_f64(&[0.0, 1.0]);
        let maxmin = build(
            PrincipleConfig::new(PrincipleKind::MaxminExpectedLoss)
                .with_models(models.clone())
                .with_loss(ScalarFn::Identity),
        );
        assert!((maxmin.evaluate(&x).unwrap() - 0.8).abs() < 1e-15);
        assert!(maxmin.flags().monotone && maxmin.flags().sublinear);
        let smooth = build(
            PrincipleConfig::new(PrincipleKind::SmoothAmbiguity)
                .with_models(models.clone())
                .with_loss(ScalarFn::Identity)
                .with_ambiguity(ScalarFn::Power { scale: 1.0, exponent: 2.0 }),
        );
        // ½(0.2² + 0.8²)
        assert!((smooth.evaluate(&x).unwrap() - 0.34).abs() < 1e-15);
        assert!(!smooth.flags().convex);
        let shifted = smooth.evaluate(&x.shift(3.0)).unwrap();
        assert!((shifted - 3.34).abs() < 1e-14);
        let rv = build(
            PrincipleConfig::new(PrincipleKind::RobustVariance)
                .with_models(models)
                .with_theta(1.0),
        );
        assert!((rv.evaluate(&x).unwrap() - (0.8 + 0.16)).abs() < 1e-15);
    }

    #[test]
    fn tail_principles() {
        let p = DiscreteMeasure::<f64>::uniform(4);
        let x = Claim::<f64>::from_f64(&[0.0, 1.0, 2.0, 3.0]);
        let q = build(PrincipleConfig::quantile(p.clone(), 0.25));
        assert_eq!(q.evaluate(&x).unwrap(), 2.0);
        let a = build(PrincipleConfig::avar(p.clone(), 0.5));
        assert!((a.evaluate(&x).unwrap() - 2.5).abs() < 1e-15);
        // median 1, E|X − 1| = 1, mean 1.5
        let ad = build(PrincipleConfig::absolute_deviation(p.clone(), 2.0));
        assert!((ad.evaluate(&x).unwrap() - 3.5).abs() < 1e-15);
        let c = build(PrincipleConfig::choquet(p, Distortion::Identity));
        assert!((c.evaluate(&x).unwrap() - 1.5).abs() < 1e-15);
    }

    #[test]
    fn zero_maps_to_zero() {
        let p = DiscreteMeasure::<f64>::from_f64(&[0.3, 0.7]);
        let models = vec![p.clone(), half()];
        let cfgs = vec![
            PrincipleConfig::fair(p.clone()),
            PrincipleConfig::lp_deviation(p.clone(), 1.0, 3.0),
            PrincipleConfig::new(PrincipleKind::AmbiguityIndex)
                .with_baseline(p.clone())
                .with_models(models.clone())
                .with_theta(1.0),
            PrincipleConfig::choquet(p.clone(), Distortion::Power { exponent: 0.5 }),
        ];
        for cfg in cfgs {
            assert_eq!(build(cfg).evaluate(&Claim::zero(2)).unwrap(), 0.0);
        }
    }

    #[test]
    fn evaluate_checks_shape() {
        let h = build(PrincipleConfig::fair(half()));
        assert!(matches!(
            h.evaluate(&Claim::<f64>::from_f64(&[1.0, 2.0, 3.0])),
            Err(Error::Shape { .. })
        ));
    }
}
