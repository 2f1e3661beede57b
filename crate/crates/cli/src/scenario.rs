//! Scenario files: one JSON document naming measures, claims, principles
//! and markets over a common state space. Every number is a decimal string.

use std::collections::BTreeMap;

use premia::{Claim, DiscreteMeasure, Distortion, MarketModel, PremiumPrinciple, PrincipleConfig, PrincipleKind, ScalarFn, StateSpace};
use serde::Deserialize;

use crate::error::CliError;

pub const SCHEMA_VERSION: u32 = 1;

type Num = String;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawScenario {
    pub schema: u32,
    pub space: RawSpace,
    #[serde(default)]
    pub measures: BTreeMap<String, Vec<Num>>,
    #[serde(default)]
    pub claims: BTreeMap<String, Vec<Num>>,
    #[serde(default)]
    pub principles: BTreeMap<String, RawPrinciple>,
    #[serde(default)]
    pub markets: BTreeMap<String, RawMarket>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawSpace {
    pub states: usize,
    pub labels: Option<Vec<String>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "camelCase")]
pub struct RawPrinciple {
    pub kind: String,
    pub baseline: Option<String>,
    pub models: Option<Vec<String>>,
    pub theta: Option<Num>,
    pub p: Option<Num>,
    pub epsilon: Option<Num>,
    pub loss: Option<RawScalarFn>,
    pub ambiguity: Option<RawScalarFn>,
    pub endowment: Option<String>,
    pub second_order_weights: Option<Vec<Num>>,
    pub distortion: Option<RawDistortion>,
    #[serde(default)]
    pub claim_monotone: bool,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "type", rename_all = "camelCase", deny_unknown_fields)]
pub enum RawScalarFn {
    Identity,
    Linear { slope: Num },
    Power { scale: Num, exponent: Num },
    Exponential { rate: Num },
    PiecewiseLinear { kink: Num, below: Num, above: Num },
}

#[derive(Debug, Deserialize)]
#[serde(tag = "type", rename_all = "camelCase", deny_unknown_fields)]
pub enum RawDistortion {
    Identity,
    Power { exponent: Num },
    ProportionalHazard { rho: Num },
}

/// Traded claims by name, with their prices.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawMarket {
    pub basis: Vec<String>,
    pub prices: Vec<Num>,
}

/// A validated scenario with every reference resolved.
#[derive(Debug)]
pub struct Scenario {
    pub space: StateSpace,
    pub measures: BTreeMap<String, DiscreteMeasure<f64>>,
    pub claims: BTreeMap<String, Claim<f64>>,
    pub principles: BTreeMap<String, PremiumPrinciple<f64>>,
    pub markets: BTreeMap<String, MarketModel<f64>>,
}

fn invalid(field: impl Into<String>, reason: impl std::fmt::Display) -> CliError {
    CliError::Validation {
        field: field.into(),
        reason: reason.to_string(),
    }
}

/// Parses a decimal string such as `"0.25"`, `"-3"` or `"1e-3"`. Special
/// values (`inf`, `NaN`) are rejected.
pub fn parse_number(field: &str, s: &str) -> Result<f64, CliError> {
    let t = s.trim();
    let looks_decimal = !t.is_empty()
        && t.chars().all(|c| c.is_ascii_digit() || matches!(c, '+' | '-' | '.' | 'e' | 'E'))
        && t.chars().any(|c| c.is_ascii_digit());
    match t.parse::<f64>() {
        Ok(v) if looks_decimal && v.is_finite() => Ok(v),
        _ => Err(invalid(field, format!("`{s}` is not a finite decimal number"))),
    }
}

fn parse_vec(field: &str, values: &[Num]) -> Result<Vec<f64>, CliError> {
    values
        .iter()
        .enumerate()
        .map(|(i, s)| parse_number(&format!("{field}[{i}]"), s))
        .collect()
}

fn parse_opt(field: &str, s: &Option<Num>) -> Result<Option<f64>, CliError> {
    s.as_ref().map(|s| parse_number(field, s)).transpose()
}

fn check_name(section: &str, name: &str) -> Result<(), CliError> {
    let mut chars = name.chars();
    let ok = chars.next().is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_');
    if ok {
        Ok(())
    } else {
        Err(invalid(format!("{section}.{name}"), "names must be ASCII identifiers"))
    }
}

fn core(field: &str, e: premia::Error) -> CliError {
    if e.is_numerical() {
        CliError::Numerical(format!("{field}: {e}"))
    } else {
        invalid(field, e)
    }
}

fn scalar_fn(field: &str, raw: &RawScalarFn) -> Result<ScalarFn<f64>, CliError> {
    let num = |name: &str, s: &Num| parse_number(&format!("{field}.{name}"), s);
    Ok(match raw {
        RawScalarFn::Identity => ScalarFn::Identity,
        RawScalarFn::Linear { slope } => ScalarFn::Linear { slope: num("slope", slope)? },
        RawScalarFn::Power { scale, exponent } => ScalarFn::Power {
            scale: num("scale", scale)?,
            exponent: num("exponent", exponent)?,
        },
        RawScalarFn::Exponential { rate } => ScalarFn::Exponential { rate: num("rate", rate)? },
        RawScalarFn::PiecewiseLinear { kink, below, above } => ScalarFn::PiecewiseLinear {
            kink: num("kink", kink)?,
            below: num("below", below)?,
            above: num("above", above)?,
        },
    })
}

fn distortion(field: &str, raw: &RawDistortion) -> Result<Distortion<f64>, CliError> {
    Ok(match raw {
        RawDistortion::Identity => Distortion::Identity,
        RawDistortion::Power { exponent } => Distortion::Power {
            exponent: parse_number(&format!("{field}.exponent"), exponent)?,
        },
        RawDistortion::ProportionalHazard { rho } => Distortion::ProportionalHazard {
            rho: parse_number(&format!("{field}.rho"), rho)?,
        },
    })
}

impl RawScenario {
    pub fn resolve(self) -> Result<Scenario, CliError> {
        if self.schema != SCHEMA_VERSION {
            return Err(invalid(
                "schema",
                format!("unsupported version {} (expected {SCHEMA_VERSION})", self.schema),
            ));
        }
        let space = match &self.space.labels {
            Some(labels) => {
                if labels.len() != self.space.states {
                    return Err(invalid(
                        "space.labels",
                        format!("{} labels for {} states", labels.len(), self.space.states),
                    ));
                }
                StateSpace::with_labels(labels.clone())
            }
            None => StateSpace::new(self.space.states),
        }
        .map_err(|e| core("space", e))?;
        let n = space.len();

        let mut measures = BTreeMap::new();
        for (name, w) in &self.measures {
            check_name("measures", name)?;
            let field = format!("measures.{name}");
            let w = parse_vec(&field, w)?;
            space.check(w.len()).map_err(|e| core(&field, e))?;
            measures.insert(name.clone(), DiscreteMeasure::new(w).map_err(|e| core(&field, e))?);
        }
        let mut claims = BTreeMap::new();
        for (name, v) in &self.claims {
            check_name("claims", name)?;
            let field = format!("claims.{name}");
            let v = parse_vec(&field, v)?;
            space.check(v.len()).map_err(|e| core(&field, e))?;
            claims.insert(name.clone(), Claim::new(v).map_err(|e| core(&field, e))?);
        }

        let measure = |field: &str, name: &str| {
            measures
                .get(name)
                .cloned()
                .ok_or_else(|| invalid(field, format!("unknown measure `{name}`")))
        };
        let claim = |field: &str, name: &str| {
            claims
                .get(name)
                .cloned()
                .ok_or_else(|| invalid(field, format!("unknown claim `{name}`")))
        };

        let mut principles = BTreeMap::new();
        for (name, raw) in &self.principles {
            check_name("principles", name)?;
            let f = |k: &str| format!("principles.{name}.{k}");
            let kind = PrincipleKind::parse(&raw.kind).ok_or_else(|| {
                let known: Vec<&str> = PrincipleKind::ALL.iter().map(|k| k.name()).collect();
                invalid(f("kind"), format!("unknown kind `{}`; expected one of {}", raw.kind, known.join(", ")))
            })?;
            let mut cfg = PrincipleConfig::new(kind);
            if let Some(b) = &raw.baseline {
                cfg = cfg.with_baseline(measure(&f("baseline"), b)?);
            }
            if let Some(ms) = &raw.models {
                let models = ms.iter().map(|m| measure(&f("models"), m)).collect::<Result<_, _>>()?;
                cfg = cfg.with_models(models);
            }
            cfg.theta = parse_opt(&f("theta"), &raw.theta)?;
            cfg.p = parse_opt(&f("p"), &raw.p)?;
            cfg.epsilon = parse_opt(&f("epsilon"), &raw.epsilon)?;
            if let Some(l) = &raw.loss {
                cfg = cfg.with_loss(scalar_fn(&f("loss"), l)?);
            }
            if let Some(a) = &raw.ambiguity {
                cfg = cfg.with_ambiguity(scalar_fn(&f("ambiguity"), a)?);
            }
            if let Some(z) = &raw.endowment {
                cfg = cfg.with_endowment(claim(&f("endowment"), z)?);
            }
            if let Some(mu) = &raw.second_order_weights {
                cfg = cfg.with_second_order_weights(parse_vec(&f("secondOrderWeights"), mu)?);
            }
            if let Some(g) = &raw.distortion {
                cfg = cfg.with_distortion(distortion(&f("distortion"), g)?);
            }
            cfg.claim_monotone = raw.claim_monotone;
            let h = PremiumPrinciple::build(cfg, &space).map_err(|e| core(&format!("principles.{name}"), e))?;
            principles.insert(name.clone(), h);
        }

        let mut markets = BTreeMap::new();
        for (name, raw) in &self.markets {
            check_name("markets", name)?;
            let field = format!("markets.{name}");
            if raw.basis.len() != raw.prices.len() {
                return Err(invalid(
                    format!("{field}.prices"),
                    format!("{} prices for {} basis claims", raw.prices.len(), raw.basis.len()),
                ));
            }
            let basis = raw
                .basis
                .iter()
                .map(|b| claim(&format!("{field}.basis"), b))
                .collect::<Result<Vec<_>, _>>()?;
            let prices = parse_vec(&format!("{field}.prices"), &raw.prices)?;
            let mkt = if basis.is_empty() {
                MarketModel::constants(n)
            } else {
                MarketModel::new(basis, prices).map_err(|e| invalid(&field, e))?
            };
            markets.insert(name.clone(), mkt);
        }

        Ok(Scenario {
            space,
            measures,
            claims,
            principles,
            markets,
        })
    }
}

impl Scenario {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let raw: RawScenario = serde_json::from_str(text).map_err(|e| invalid("scenario", e))?;
        raw.resolve()
    }

    pub fn principle(&self, name: &str) -> Result<&PremiumPrinciple<f64>, CliError> {
        self.principles
            .get(name)
            .ok_or_else(|| invalid("principle", format!("unknown principle `{name}`")))
    }

    pub fn claim(&self, name: &str) -> Result<&Claim<f64>, CliError> {
        self.claims
            .get(name)
            .ok_or_else(|| invalid("claim", format!("unknown claim `{name}`")))
    }

    pub fn measure(&self, name: &str) -> Result<&DiscreteMeasure<f64>, CliError> {
        self.measures
            .get(name)
            .ok_or_else(|| invalid("measure", format!("unknown measure `{name}`")))
    }

    pub fn market(&self, name: &str) -> Result<&MarketModel<f64>, CliError> {
        self.markets
            .get(name)
            .ok_or_else(|| invalid("market", format!("unknown market `{name}`")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const TWO_STATE: &str = r#"{
        "schema": 1,
        "space": {"states": 2},
        "measures": {"P": ["0.5", "0.5"]},
        "claims": {"X": ["0", "2"]},
        "principles": {"variance": {"kind": "Variance", "baseline": "P", "theta": "2"}},
        "markets": {"constantsOnly": {"basis": [], "prices": []}}
    }"#;

    #[test]
    fn resolves_references() {
        let s = Scenario::parse(TWO_STATE).unwrap();
        assert_eq!(s.space.len(), 2);
        let h = s.principle("variance").unwrap();
        assert_eq!(h.evaluate(s.claim("X").unwrap()).unwrap(), 2.0);
        assert_eq!(s.market("constantsOnly").unwrap().len(), 2);
    }

    #[test]
    fn numbers_are_decimal_strings() {
        assert_eq!(parse_number("f", "1e-3").unwrap(), 1e-3);
        assert_eq!(parse_number("f", " -0.25 ").unwrap(), -0.25);
        for bad in ["inf", "NaN", "", "0x10", "1/2"] {
            assert!(parse_number("f", bad).is_err(), "{bad}");
        }
        let text = TWO_STATE.replace(r#""theta": "2""#, r#""theta": 2"#);
        assert!(Scenario::parse(&text).is_err());
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let text = TWO_STATE.replace(r#""theta": "2""#, r#""thetta": "2""#);
        let err = Scenario::parse(&text).unwrap_err().to_string();
        assert!(err.contains("thetta"), "{err}");
        let text = TWO_STATE.replace(r#""kind": "Variance""#, r#""kind": "Varaince""#);
        let err = Scenario::parse(&text).unwrap_err().to_string();
        assert!(err.contains("principles.variance.kind"), "{err}");
    }

    #[test]
    fn errors_name_the_field() {
        let text = TWO_STATE.replace(r#""X": ["0", "2"]"#, r#""X": ["0", "2", "3"]"#);
        let err = Scenario::parse(&text).unwrap_err().to_string();
        assert!(err.contains("claims.X"), "{err}");
        let text = TWO_STATE.replace(r#""baseline": "P""#, r#""baseline": "Q""#);
        let err = Scenario::parse(&text).unwrap_err().to_string();
        assert!(err.contains("principles.variance.baseline") && err.contains("`Q`"), "{err}");
    }
}
