//! Premium principles on finite state spaces and their decomposition into
//! a maximal risk-neutral part and a minimal deviation part.
//!
//! Everything is generic over a [`Scalar`] (`f32` or `f64`); the `*F64`
//! aliases at the crate root fix the common double-precision case.

pub mod capacity;
pub mod decompose;
pub mod duality;
pub mod error;
pub mod functions;
pub mod lawinv;
pub mod lp;
pub mod market;
pub mod oracle;
mod optim;
pub mod polytope;
pub mod principles;
pub mod scalar;
pub mod space;
pub mod stats;

pub use capacity::{choquet_integral, distort, Capacity};
pub use decompose::{
    decompose, r_max_closed_form, r_max_generalized, r_max_primal, Decomposer, Decomposition, Method, Order, SolveConfig,
};
pub use duality::{
    ambiguity_index, conjugate, d_min_via_models, dual_r_max, model_deviation, plausible_membership, plausible_polytope,
    symmetry_center_check, ConjugateValue, EquivalenceReport, ModelSetDescription,
};
pub use error::{Error, Result};
pub use lawinv::{
    admissible_permutations, dominance_check, law_invariance_check, law_invariance_report, safety_loading_check,
    DiagnosticOutcome, LawInvReport,
};
pub use market::{
    consistency_check, martingale_membership, martingale_polytope, superhedge, ConsistencyReport, HedgeResult, MarketModel,
};
pub use functions::{Distortion, ScalarFn};
pub use oracle::{brute_conjugate, brute_r_max, OracleValue};
pub use principles::{
    check_axioms, Axiom, AxiomReport, ClaimSampler, Flags, PremiumPrinciple, PrincipleConfig, PrincipleKind,
};
pub use scalar::Scalar;
pub use space::{Claim, DiscreteMeasure, StateSpace};
pub use stats::{average_value_at_risk_loss, moments, quantile, value_at_risk, Moments};

pub type ClaimF64 = Claim<f64>;
pub type MeasureF64 = DiscreteMeasure<f64>;
pub type PrincipleF64 = PremiumPrinciple<f64>;
pub type ConfigF64 = PrincipleConfig<f64>;
pub type ClaimF32 = Claim<f32>;
pub type MeasureF32 = DiscreteMeasure<f32>;
pub type PrincipleF32 = PremiumPrinciple<f32>;
