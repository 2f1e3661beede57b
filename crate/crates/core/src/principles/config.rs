use serde::Serialize;

use crate::functions::{Distortion, ScalarFn};
use crate::space::{Claim, DiscreteMeasure};

/// The catalog of premium principles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum PrincipleKind {
    /// `E_P(X)`.
    Fair,
    /// `E_P(X) + (θ/2)·var_P(X)`.
    Variance,
    /// `E_P(X) + θ·σ_P(X)`.
    StdDev,
    /// `E_P(X) + θ·E_P|X − E_P X|`.
    MeanAbsDev,
    /// `E_P(X) + θ·(E_P|X − E_P X|^p)^{1/p}`.
    LpDeviation,
    /// `E_P(X ℓ'(Z)) / E_P(ℓ'(Z))`.
    Economic,
    /// `sup_𝒫 E(X) + θ·sup_𝒫 var(X)`.
    RobustVariance,
    /// `sup_𝒫 E(ℓ(X − inf X)) + inf X`.
    MaxminExpectedLoss,
    /// `Σ_j μ_j φ(E_j[ℓ(X − inf X)]) + inf X`.
    SmoothAmbiguity,
    /// `E_P(X) + θ·Amb_𝒫(X)`.
    AmbiguityIndex,
    /// `P_X^{-1}(1 − ε)`.
    Quantile,
    /// Upper tail mean of `X` at mass `ε`.
    AVaR,
    /// `E_P(X) + θ·E_P|X − P_X^{-1}(1/2)|`.
    AbsoluteDeviation,
    /// Choquet integral against `g ∘ P`.
    ChoquetDistortion,
    /// `sup X`.
    WorstCase,
}

impl PrincipleKind {
    pub const ALL: [PrincipleKind; 15] = [
        PrincipleKind::Fair,
        PrincipleKind::Variance,
        PrincipleKind::StdDev,
        PrincipleKind::MeanAbsDev,
        PrincipleKind::LpDeviation,
        PrincipleKind::Economic,
        PrincipleKind::RobustVariance,
        PrincipleKind::MaxminExpectedLoss,
        PrincipleKind::SmoothAmbiguity,
        PrincipleKind::AmbiguityIndex,
        PrincipleKind::Quantile,
        PrincipleKind::AVaR,
        PrincipleKind::AbsoluteDeviation,
        PrincipleKind::ChoquetDistortion,
        PrincipleKind::WorstCase,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            PrincipleKind::Fair => "Fair",
            PrincipleKind::Variance => "Variance",
            PrincipleKind::StdDev => "StdDev",
            PrincipleKind::MeanAbsDev => "MeanAbsDev",
            PrincipleKind::LpDeviation => "LpDeviation",
            PrincipleKind::Economic => "Economic",
            PrincipleKind::RobustVariance => "RobustVariance",
            PrincipleKind::MaxminExpectedLoss => "MaxminExpectedLoss",
            PrincipleKind::SmoothAmbiguity => "SmoothAmbiguity",
            PrincipleKind::AmbiguityIndex => "AmbiguityIndex",
            PrincipleKind::Quantile => "Quantile",
            PrincipleKind::AVaR => "AVaR",
            PrincipleKind::AbsoluteDeviation => "AbsoluteDeviation",
            PrincipleKind::ChoquetDistortion => "ChoquetDistortion",
            PrincipleKind::WorstCase => "WorstCase",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.iter().copied().find(|k| k.name() == s)
    }
}

/// Parameters of a premium principle. Which fields are required depends
/// on `kind`; [`super::PremiumPrinciple::build`] enforces that.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct PrincipleConfig<T> {
    pub kind: PrincipleKind,
    pub baseline: Option<DiscreteMeasure<T>>,
    pub model_set: Option<Vec<DiscreteMeasure<T>>>,
    pub theta: Option<T>,
    pub p: Option<T>,
    pub epsilon: Option<T>,
    pub loss: Option<ScalarFn<T>>,
    pub ambiguity: Option<ScalarFn<T>>,
    pub endowment: Option<Claim<T>>,
    pub second_order_weights: Option<Vec<T>>,
    pub distortion: Option<Distortion<T>>,
    /// Ask the builder to enforce the parameter range that makes the
    /// principle monotone (only meaningful for `MeanAbsDev`).
    pub claim_monotone: bool,
}

impl<T> PrincipleConfig<T> {
    pub fn new(kind: PrincipleKind) -> Self {
        PrincipleConfig {
            kind,
            baseline: None,
            model_set: None,
            theta: None,
            p: None,
            epsilon: None,
            loss: None,
            ambiguity: None,
            endowment: None,
            second_order_weights: None,
            distortion: None,
            claim_monotone: false,
        }
    }

    pub fn with_baseline(mut self, p: DiscreteMeasure<T>) -> Self {
        self.baseline = Some(p);
        self
    }

    pub fn with_models(mut self, models: Vec<DiscreteMeasure<T>>) -> Self {
        self.model_set = Some(models);
        self
    }

    pub fn with_theta(mut self, theta: T) -> Self {
        self.theta = Some(theta);
        self
    }

    pub fn with_p(mut self, p: T) -> Self {
        self.p = Some(p);
        self
    }

    pub fn with_epsilon(mut self, eps: T) -> Self {
        self.epsilon = Some(eps);
        self
    }

    pub fn with_loss(mut self, loss: ScalarFn<T>) -> Self {
        self.loss = Some(loss);
        self
    }

    pub fn with_ambiguity(mut self, phi: ScalarFn<T>) -> Self {
        self.ambiguity = Some(phi);
        self
    }

    pub fn with_endowment(mut self, z: Claim<T>) -> Self {
        self.endowment = Some(z);
        self
    }

    pub fn with_second_order_weights(mut self, mu: Vec<T>) -> Self {
        self.second_order_weights = Some(mu);
        self
    }

    pub fn with_distortion(mut self, g: Distortion<T>) -> Self {
        self.distortion = Some(g);
        self
    }

    pub fn claiming_monotone(mut self) -> Self {
        self.claim_monotone = true;
        self
    }

    // shorthands for the common single-model principles

    pub fn fair(p: DiscreteMeasure<T>) -> Self {
        Self::new(PrincipleKind::Fair).with_baseline(p)
    }

    pub fn variance(p: DiscreteMeasure<T>, theta: T) -> Self {
        Self::new(PrincipleKind::Variance).with_baseline(p).with_theta(theta)
    }

    pub fn std_dev(p: DiscreteMeasure<T>, theta: T) -> Self {
        Self::new(PrincipleKind::StdDev).with_baseline(p).with_theta(theta)
    }

    pub fn mean_abs_dev(p: DiscreteMeasure<T>, theta: T) -> Self {
        Self::new(PrincipleKind::MeanAbsDev).with_baseline(p).with_theta(theta)
    }

    pub fn lp_deviation(p: DiscreteMeasure<T>, theta: T, exponent: T) -> Self {
        Self::new(PrincipleKind::LpDeviation)
            .with_baseline(p)
            .with_theta(theta)
            .with_p(exponent)
    }

    pub fn quantile(p: DiscreteMeasure<T>, eps: T) -> Self {
        Self::new(PrincipleKind::Quantile).with_baseline(p).with_epsilon(eps)
    }

    pub fn avar(p: DiscreteMeasure<T>, eps: T) -> Self {
        Self::new(PrincipleKind::AVaR).with_baseline(p).with_epsilon(eps)
    }

    pub fn absolute_deviation(p: DiscreteMeasure<T>, theta: T) -> Self {
        Self::new(PrincipleKind::AbsoluteDeviation)
            .with_baseline(p)
            .with_theta(theta)
    }

    pub fn choquet(p: DiscreteMeasure<T>, g: Distortion<T>) -> Self {
        Self::new(PrincipleKind::ChoquetDistortion)
            .with_baseline(p)
            .with_distortion(g)
    }

    pub fn worst_case() -> Self {
        Self::new(PrincipleKind::WorstCase)
    }
}
