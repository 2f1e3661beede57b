use std::fmt::Write as _;

use premia::oracle::{DEFAULT_GRID_STEP, MAX_ORACLE_STATES};
use premia::{
    brute_conjugate, brute_r_max, check_axioms, conjugate, consistency_check, dual_r_max, law_invariance_report,
    superhedge, Axiom, Claim, ClaimSampler, Decomposer, Error, PremiumPrinciple, SolveConfig,
};
use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::error::{from_core, CliError};
use crate::scenario::Scenario;

pub const CONSISTENCY_SAMPLES: usize = 200;
pub const AXIOM_SAMPLES: usize = 1000;
pub const LAWINV_TRIALS: usize = 200;
const ORACLE_BOX: f64 = 10.0;

#[derive(Debug, Clone, PartialEq)]
pub enum Command {
    Price { principle: String, claim: String },
    Decompose { principle: String, claim: String },
    Dual { principle: String, target: String },
    Hedge { market: String, claim: String },
    Consistency { principle: String, market: String },
    Axioms { principle: String },
    Lawinv { principle: String, measure: String },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Price { .. } => "price",
            Command::Decompose { .. } => "decompose",
            Command::Dual { .. } => "dual",
            Command::Hedge { .. } => "hedge",
            Command::Consistency { .. } => "consistency",
            Command::Axioms { .. } => "axioms",
            Command::Lawinv { .. } => "lawinv",
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Options {
    /// Solver tolerance.
    pub tol: f64,
    pub seed: u64,
    pub oracle: bool,
}

impl Options {
    /// Tolerance for pass/fail statements, looser than the solver's.
    pub fn check_tol(&self) -> f64 {
        (100.0 * self.tol).max(1e-9)
    }

    fn solve_config(&self) -> SolveConfig<f64> {
        SolveConfig {
            tol: self.tol,
            ..SolveConfig::default()
        }
    }
}

/// The outcome of one command.
#[derive(Debug, Clone)]
pub struct Report {
    pub json: Value,
    pub text: String,
    /// Some invariant or statement evaluated false.
    pub check_failed: bool,
}

/// JSON for a real that may be infinite.
fn num(v: f64) -> Value {
    if v.is_finite() {
        json!(v)
    } else if v > 0.0 {
        json!("inf")
    } else if v < 0.0 {
        json!("-inf")
    } else {
        json!("nan")
    }
}

fn to_json<S: Serialize>(v: &S) -> Value {
    serde_json::to_value(v).expect("reports serialize")
}

fn fmt_vec(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x}")).collect();
    format!("({})", parts.join(", "))
}

fn oracle_step(n: usize) -> f64 {
    if n <= 2 {
        DEFAULT_GRID_STEP
    } else {
        2.0 * DEFAULT_GRID_STEP
    }
}

fn oracle_r_max(h: &PremiumPrinciple<f64>, x: &Claim<f64>) -> Result<premia::OracleValue<f64>, CliError> {
    brute_r_max(h, x, oracle_step(h.len()), x.range() + 1.0).map_err(|e| from_core("oracle", e))
}

pub fn run(scenario: &Scenario, command: &Command, opts: &Options) -> Result<Report, CliError> {
    if !(opts.tol > 0.0) || !opts.tol.is_finite() {
        return Err(CliError::Validation {
            field: "--tol".into(),
            reason: "must be positive and finite".into(),
        });
    }
    let mut head = Map::new();
    head.insert("command".into(), json!(command.name()));
    head.insert("tol".into(), json!(opts.tol));
    head.insert("checkTol".into(), json!(opts.check_tol()));
    head.insert("seed".into(), json!(opts.seed));
    head.insert("states".into(), json!(scenario.space.len()));
    if let Some(labels) = scenario.space.labels() {
        head.insert("labels".into(), json!(labels));
    }
    let (body, text, check_failed) = match command {
        Command::Price { principle, claim } => price(scenario, principle, claim)?,
        Command::Decompose { principle, claim } => decompose(scenario, principle, claim, opts)?,
        Command::Dual { principle, target } => dual(scenario, principle, target, opts)?,
        Command::Hedge { market, claim } => hedge(scenario, market, claim, opts)?,
        Command::Consistency { principle, market } => consistency(scenario, principle, market, opts)?,
        Command::Axioms { principle } => axioms(scenario, principle, opts)?,
        Command::Lawinv { principle, measure } => lawinv(scenario, principle, measure, opts)?,
    };
    for (k, v) in body {
        head.insert(k, v);
    }
    head.insert("checkFailed".into(), json!(check_failed));
    Ok(Report {
        json: Value::Object(head),
        text,
        check_failed,
    })
}

type Body = (Map<String, Value>, String, bool);

fn body(pairs: Vec<(&str, Value)>) -> Map<String, Value> {
    pairs.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
}

fn price(s: &Scenario, principle: &str, claim: &str) -> Result<Body, CliError> {
    let h = s.principle(principle)?;
    let x = s.claim(claim)?;
    let v = h.evaluate(x).map_err(|e| from_core("price", e))?;
    let b = body(vec![
        ("principle", json!(principle)),
        ("kind", json!(h.kind().name())),
        ("claim", json!(claim)),
        ("result", json!({"premium": num(v), "method": "Evaluation", "gap": 0.0})),
    ]);
    Ok((b, format!("H({claim}) under {principle} = {v}\n"), false))
}

fn decompose(s: &Scenario, principle: &str, claim: &str, opts: &Options) -> Result<Body, CliError> {
    let h = s.principle(principle)?;
    let x = s.claim(claim)?;
    let n = h.len();
    let tol = opts.check_tol();
    let (premium, r_max, optimizer, method, gap) = match Decomposer::new(h, opts.solve_config()).decompose(x) {
        Ok(d) => (d.premium, d.r_max, d.optimizer, to_json(&d.method), d.gap),
        // nonconvex, nonmonotone principles go to the lattice search
        Err(Error::Unsupported(_)) if n <= MAX_ORACLE_STATES => {
            let o = oracle_r_max(h, x)?;
            let premium = h.evaluate(x).map_err(|e| from_core("decompose", e))?;
            let opt = o.argopt.clone().expect("the lattice search returns a point");
            (premium, o.value, opt, json!("LatticeOracle"), o.error_bound)
        }
        Err(e) => return Err(from_core("decompose", e)),
    };
    let d_min = premium - r_max;
    let mut failed = d_min < -tol || !x.le(&optimizer, tol);
    let mut result = json!({
        "premium": num(premium),
        "rMax": num(r_max),
        "dMin": num(d_min),
        "optimizer": optimizer.values(),
        "method": method,
        "gap": num(gap),
    });
    let mut text = format!(
        "decomposition of {claim} under {principle}\n  premium  {premium}\n  rMax     {r_max}\n  dMin     {d_min}\n  optimizer {}\n  method   {} (gap {gap:.3e})\n",
        fmt_vec(optimizer.values()),
        method.as_str().unwrap_or_default()
    );
    if opts.oracle {
        let (entry, line, bad) = oracle_cross_check(h, x, r_max, tol)?;
        failed |= bad;
        result["oracle"] = entry;
        text.push_str(&line);
    }
    let b = body(vec![
        ("principle", json!(principle)),
        ("kind", json!(h.kind().name())),
        ("claim", json!(claim)),
        ("result", result),
    ]);
    Ok((b, text, failed))
}

fn oracle_cross_check(h: &PremiumPrinciple<f64>, x: &Claim<f64>, r_max: f64, tol: f64) -> Result<(Value, String, bool), CliError> {
    if h.len() > MAX_ORACLE_STATES {
        let note = format!("the oracle is limited to {MAX_ORACLE_STATES} states");
        return Ok((json!({"skipped": note}), format!("  oracle   skipped: {note}\n"), false));
    }
    let o = oracle_r_max(h, x)?;
    let agrees = (o.value - r_max).abs() <= o.error_bound + tol;
    let entry = json!({
        "rMax": num(o.value),
        "errorBound": num(o.error_bound),
        "points": o.points,
        "agrees": agrees,
    });
    let line = format!(
        "  oracle   {} ± {:.3e} ({})\n",
        o.value,
        o.error_bound,
        if agrees { "agrees" } else { "DISAGREES" }
    );
    Ok((entry, line, !agrees))
}

fn dual(s: &Scenario, principle: &str, target: &str, opts: &Options) -> Result<Body, CliError> {
    let h = s.principle(principle)?;
    let cfg = opts.solve_config();
    let tol = opts.check_tol();
    let (is_claim, is_measure) = (s.claims.contains_key(target), s.measures.contains_key(target));
    if is_claim && is_measure {
        return Err(CliError::Validation {
            field: "target".into(),
            reason: format!("`{target}` names both a claim and a measure"),
        });
    }
    let mut failed = false;
    let (result, text) = if is_claim {
        let x = s.claim(target)?;
        let d = dual_r_max(h, x, &cfg).map_err(|e| from_core("dual", e))?;
        let mut result = json!({
            "rMax": num(d.value),
            "measure": d.measure.weights(),
            "method": to_json(&d.method),
            "gap": num(d.gap),
        });
        let mut text = format!(
            "dual R_Max of {target} under {principle} = {}\n  maximizing model {}\n  method {:?} (gap {:.3e})\n",
            d.value,
            fmt_vec(d.measure.weights()),
            d.method,
            d.gap
        );
        if opts.oracle {
            let (entry, line, bad) = oracle_cross_check(h, x, d.value, tol)?;
            failed |= bad;
            result["oracle"] = entry;
            text.push_str(&line);
        }
        (result, text)
    } else {
        let q = s.measure(target)?;
        let c = conjugate(h, q, &cfg).map_err(|e| from_core("dual", e))?;
        let mut result = json!({
            "conjugate": num(c.value),
            "witness": c.witness.as_ref().map(|w| w.values().to_vec()),
            "method": "BoxAscent",
            "gap": num(c.gap),
        });
        let mut text = format!("H*({target}) under {principle} = {} (gap {:.3e})\n", c.value, c.gap);
        if opts.oracle {
            if h.len() > MAX_ORACLE_STATES {
                result["oracle"] = json!({"skipped": format!("the oracle is limited to {MAX_ORACLE_STATES} states")});
            } else {
                let o = brute_conjugate(h, q, oracle_step(h.len()), ORACLE_BOX).map_err(|e| from_core("oracle", e))?;
                let agrees = if c.value.is_infinite() || o.value.is_infinite() {
                    c.value.is_infinite() && o.value.is_infinite()
                } else {
                    (c.value - o.value).abs() <= o.error_bound + tol
                };
                failed |= !agrees;
                result["oracle"] = json!({
                    "conjugate": num(o.value),
                    "errorBound": num(o.error_bound),
                    "points": o.points,
                    "agrees": agrees,
                });
                let _ = writeln!(
                    text,
                    "  oracle {} ± {:.3e} ({})",
                    o.value,
                    o.error_bound,
                    if agrees { "agrees" } else { "DISAGREES" }
                );
            }
        }
        (result, text)
    };
    let b = body(vec![
        ("principle", json!(principle)),
        ("kind", json!(h.kind().name())),
        ("target", json!(target)),
        ("result", result),
    ]);
    Ok((b, text, failed))
}

fn hedge(s: &Scenario, market: &str, claim: &str, opts: &Options) -> Result<Body, CliError> {
    let mkt = s.market(market)?;
    let x = s.claim(claim)?;
    let r = superhedge(mkt, x).map_err(|e| from_core("hedge", e))?;
    let covered = r.hedge.shift(r.price);
    let failed = !x.le(&covered, opts.check_tol());
    let b = body(vec![
        ("market", json!(market)),
        ("claim", json!(claim)),
        (
            "result",
            json!({
                "price": num(r.price),
                "portfolio": r.portfolio,
                "hedge": r.hedge.values(),
                "method": "LP",
                "gap": 0.0,
            }),
        ),
    ]);
    let text = format!(
        "superhedging price of {claim} in {market} = {}\n  portfolio {}\n  hedge     {}\n",
        r.price,
        fmt_vec(&r.portfolio),
        fmt_vec(r.hedge.values())
    );
    Ok((b, text, failed))
}

fn consistency(s: &Scenario, principle: &str, market: &str, opts: &Options) -> Result<Body, CliError> {
    let h = s.principle(principle)?;
    let mkt = s.market(market)?;
    let sampler = ClaimSampler::new(h.len(), CONSISTENCY_SAMPLES, opts.seed);
    let r = consistency_check(h, mkt, &opts.solve_config(), &sampler, opts.check_tol())
        .map_err(|e| from_core("consistency", e))?;
    let statements = [
        ("R_Max = R_*", &r.r_max_is_superhedging),
        ("securitized by traded claims", &r.securitized),
        ("plausible = martingale models", &r.models_are_martingale),
    ];
    let mut failed = !r.precondition_holds;
    let mut text = format!(
        "consistency of {principle} with {market} ({} sampled claims)\n  H = F on traded claims: {} (worst {:.3e})\n",
        r.claims_tested, r.precondition_holds, r.precondition_violation
    );
    for (label, st) in statements {
        match st {
            Some(st) => {
                failed |= !st.holds;
                let _ = writeln!(text, "  {label}: {} (worst {:.3e})", st.holds, st.worst_violation);
            }
            None => {
                let _ = writeln!(text, "  {label}: not evaluated");
            }
        }
    }
    let mut result = to_json(&r);
    result["agree"] = json!(r.agree());
    result["method"] = json!("SampledLP");
    result["gap"] = json!(0.0);
    let b = body(vec![
        ("principle", json!(principle)),
        ("market", json!(market)),
        ("result", result),
    ]);
    Ok((b, text, failed))
}

fn axioms(s: &Scenario, principle: &str, opts: &Options) -> Result<Body, CliError> {
    let h = s.principle(principle)?;
    let sampler = ClaimSampler::new(h.len(), AXIOM_SAMPLES, opts.seed);
    let r = check_axioms(h, &sampler, opts.check_tol()).map_err(|e| from_core("axioms", e))?;
    let flags = h.flags();
    // the defining axioms, and every property the principle claims to have
    let mut required = vec![Axiom::P1, Axiom::P2];
    if flags.convex {
        required.push(Axiom::Convexity);
    }
    if flags.sublinear {
        required.push(Axiom::PositiveHomogeneity);
    }
    if flags.monotone {
        required.push(Axiom::Monotonicity);
    }
    let failed = required.iter().any(|&a| !r.passed(a));
    let mut text = format!("axioms of {principle} ({} sampled claims)\n", r.samples);
    for o in &r.outcomes {
        let _ = writeln!(
            text,
            "  {:<20} {}{}",
            format!("{:?}", o.axiom),
            if o.passed { "no counterexample" } else { "FAILS" },
            o.witness
                .as_ref()
                .map(|w| format!(": {}", w.detail))
                .unwrap_or_default()
        );
    }
    let _ = writeln!(text, "  {}", r.note);
    let mut result = to_json(&r);
    result["flags"] = to_json(&flags);
    result["method"] = json!("Sampling");
    result["gap"] = json!(0.0);
    let b = body(vec![
        ("principle", json!(principle)),
        ("kind", json!(h.kind().name())),
        ("result", result),
    ]);
    Ok((b, text, failed))
}

fn lawinv(s: &Scenario, principle: &str, measure: &str, opts: &Options) -> Result<Body, CliError> {
    let h = s.principle(principle)?;
    let p = s.measure(measure)?;
    let r = law_invariance_report(h, p, LAWINV_TRIALS, opts.seed).map_err(|e| from_core("lawinv", e))?;
    let parts = [
        ("dominated by P", &r.dominated),
        ("law invariant", &r.law_invariant),
        ("safety loading", &r.safety_loading),
    ];
    let mut failed = false;
    let mut text = format!("law invariance of {principle} under {measure}\n");
    for (label, o) in parts {
        failed |= !o.holds;
        let status = if o.vacuous {
            "vacuous".to_string()
        } else if o.holds {
            match o.r_max_holds {
                Some(true) => "holds (R_Max too)".into(),
                Some(false) => "holds (R_Max does not)".into(),
                None => "holds".into(),
            }
        } else {
            match &o.witness {
                Some((x, y)) => format!("fails: X = {}, Y = {}", fmt_vec(x.values()), fmt_vec(y.values())),
                None => "fails".into(),
            }
        };
        let _ = writeln!(text, "  {label}: {status}");
    }
    let mut result = to_json(&r);
    result["method"] = json!("Sampling");
    result["gap"] = json!(0.0);
    let b = body(vec![
        ("principle", json!(principle)),
        ("measure", json!(measure)),
        ("result", result),
    ]);
    Ok((b, text, failed))
}
