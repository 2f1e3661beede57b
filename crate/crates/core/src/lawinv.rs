//! Dominance, law invariance and safety loading on finite spaces.
//!
//! Law invariance is tested with state permutations that preserve the
//! baseline measure. Under a uniform baseline every permutation qualifies,
//! which is the finite stand-in for an atomless space.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::decompose::{Decomposer, SolveConfig};
use crate::error::{Error, Result};
use crate::principles::{ClaimSampler, PremiumPrinciple};
use crate::scalar::Scalar;
use crate::space::{Claim, DiscreteMeasure};

/// Tolerance for comparing premia that should agree exactly.
pub const EXACT_TOL: f64 = 1e-9;
/// Tolerance for `R_Max`, which may come from an iterative solver.
pub const SOLVER_TOL: f64 = 1e-6;

/// Largest space on which all admissible permutations are enumerated.
pub const MAX_ENUMERATED_STATES: usize = 6;
const RANDOM_PERMUTATIONS: usize = 1000;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct DiagnosticOutcome<T> {
    pub holds: bool,
    /// True when no nontrivial test exists (no null states, or no
    /// nontrivial measure-preserving permutation).
    pub vacuous: bool,
    pub worst_violation: T,
    /// Claims `(X, Y)` on which the property fails, `Y` being the modified
    /// or permuted version of `X`.
    pub witness: Option<(Claim<T>, Claim<T>)>,
    /// The permutation behind a law-invariance witness.
    pub permutation: Option<Vec<usize>>,
    /// The same test run on `R_Max`, when `H` passes and `R_Max` is computable.
    pub r_max_holds: Option<bool>,
    pub note: Option<String>,
}

impl<T: Scalar> DiagnosticOutcome<T> {
    fn passing() -> Self {
        DiagnosticOutcome {
            holds: true,
            vacuous: false,
            worst_violation: T::zero(),
            witness: None,
            permutation: None,
            r_max_holds: None,
            note: None,
        }
    }

    fn record(&mut self, violation: T, tol: T, x: &Claim<T>, y: &Claim<T>, perm: Option<&[usize]>) {
        if violation > self.worst_violation {
            self.worst_violation = violation;
            if violation > tol && self.holds {
                self.holds = false;
                self.witness = Some((x.clone(), y.clone()));
                self.permutation = perm.map(<[usize]>::to_vec);
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct LawInvReport<T> {
    pub dominated: DiagnosticOutcome<T>,
    pub law_invariant: DiagnosticOutcome<T>,
    pub safety_loading: DiagnosticOutcome<T>,
}

fn check_len<T: Scalar>(h: &PremiumPrinciple<T>, p: &DiscreteMeasure<T>) -> Result<()> {
    if p.len() != h.len() {
        return Err(Error::Shape {
            expected: h.len(),
            got: p.len(),
        });
    }
    Ok(())
}

fn rel<T: Scalar>(a: T, b: T) -> T {
    (a - b).abs() / (T::one() + a.abs().max(b.abs()))
}

/// `R_Max` when the engine can compute it for `h`.
fn r_max_solver<'a, T: Scalar>(h: &'a PremiumPrinciple<T>) -> Option<Decomposer<'a, T>> {
    let f = h.flags();
    (f.convex || f.monotone).then(|| Decomposer::new(h, SolveConfig::default()))
}

/// Is `H` blind to changes on `P`-null states? Claims are modified on the
/// null states only; when `H` passes, the same test is run on `R_Max`.
pub fn dominance_check<T: Scalar>(
    h: &PremiumPrinciple<T>,
    p: &DiscreteMeasure<T>,
    trials: usize,
    seed: u64,
) -> Result<DiagnosticOutcome<T>> {
    check_len(h, p)?;
    let null = p.null_states();
    let mut out = DiagnosticOutcome::passing();
    if null.is_empty() {
        out.vacuous = true;
        out.note = Some("the measure has no null states".into());
        return Ok(out);
    }
    let pairs = modified_pairs(h.len(), &null, trials, seed);
    let tol = T::lit(EXACT_TOL);
    for (x, y) in &pairs {
        let v = rel(h.eval_slice(x.values()), h.eval_slice(y.values()));
        out.record(v, tol, x, y, None);
    }
    if out.holds {
        if let Some(dec) = r_max_solver(h) {
            let mut ok = true;
            for (x, y) in pairs.iter().take(50) {
                let a = dec.decompose(x)?.r_max;
                let b = dec.decompose(y)?.r_max;
                ok &= rel(a, b) <= T::lit(SOLVER_TOL);
            }
            out.r_max_holds = Some(ok);
        }
    }
    Ok(out)
}

fn modified_pairs<T: Scalar>(n: usize, null: &[usize], trials: usize, seed: u64) -> Vec<(Claim<T>, Claim<T>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x6e75_6c6c);
    ClaimSampler::new(n, trials, seed)
        .claims()
        .into_iter()
        .map(|x| {
            let mut y = x.values().to_vec();
            for &i in null {
                y[i] = T::lit(rng.gen_range(-10.0..10.0));
            }
            (x, Claim::from_vec_unchecked(y))
        })
        .collect()
}

/// Permutations `π` with `p[π(i)] = p[i]` for all `i`, identity excluded.
pub fn admissible_permutations<T: Scalar>(p: &DiscreteMeasure<T>, seed: u64) -> Vec<Vec<usize>> {
    let w = p.weights();
    let n = w.len();
    let same = |a: usize, b: usize| (w[a] - w[b]).abs() <= T::epsilon() * T::lit(16.0);
    let preserves = |perm: &[usize]| perm.iter().enumerate().all(|(i, &j)| same(i, j));
    let identity: Vec<usize> = (0..n).collect();
    if n <= MAX_ENUMERATED_STATES {
        let mut out = Vec::new();
        let mut perm = identity.clone();
        permute_all(&mut perm, 0, &mut |q| {
            if q != identity.as_slice() && preserves(q) {
                out.push(q.to_vec());
            }
        });
        return out;
    }
    // shuffle within blocks of equal mass
    let mut blocks: Vec<Vec<usize>> = Vec::new();
    for i in 0..n {
        match blocks.iter_mut().find(|b| same(b[0], i)) {
            Some(b) => b.push(i),
            None => blocks.push(vec![i]),
        }
    }
    if blocks.iter().all(|b| b.len() == 1) {
        return Vec::new();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(RANDOM_PERMUTATIONS);
    while out.len() < RANDOM_PERMUTATIONS {
        let mut perm = identity.clone();
        for b in &blocks {
            let mut shuffled = b.clone();
            shuffled.shuffle(&mut rng);
            for (&i, &j) in b.iter().zip(&shuffled) {
                perm[i] = j;
            }
        }
        if perm != identity {
            out.push(perm);
        }
    }
    out
}

fn permute_all(v: &mut Vec<usize>, k: usize, f: &mut impl FnMut(&[usize])) {
    if k == v.len() {
        f(v);
        return;
    }
    for i in k..v.len() {
        v.swap(k, i);
        permute_all(v, k + 1, f);
        v.swap(k, i);
    }
}

/// Is `H(X∘π) = H(X)` for measure-preserving permutations `π`? When `H`
/// passes, `R_Max` is checked under the same permutations.
pub fn law_invariance_check<T: Scalar>(
    h: &PremiumPrinciple<T>,
    p: &DiscreteMeasure<T>,
    trials: usize,
    seed: u64,
) -> Result<DiagnosticOutcome<T>> {
    check_len(h, p)?;
    let perms = admissible_permutations(p, seed);
    let mut out = DiagnosticOutcome::passing();
    if perms.is_empty() {
        out.vacuous = true;
        out.note = Some("test vacuous: no nontrivial permutation preserves the measure".into());
        return Ok(out);
    }
    if !uniform(p) {
        out.note = Some("non-uniform measure: only permutations within blocks of equal mass are tested".into());
    }
    let claims = ClaimSampler::new(h.len(), trials, seed).claims();
    let tol = T::lit(EXACT_TOL);
    for x in &claims {
        let hx = h.eval_slice(x.values());
        for perm in &perms {
            let y = x.permute(perm);
            out.record(rel(hx, h.eval_slice(y.values())), tol, x, &y, Some(perm));
        }
    }
    if out.holds {
        if let Some(dec) = r_max_solver(h) {
            let mut ok = true;
            for x in claims.iter().take(20) {
                let rx = dec.decompose(x)?.r_max;
                for perm in perms.iter().take(24) {
                    ok &= rel(rx, dec.decompose(&x.permute(perm))?.r_max) <= T::lit(SOLVER_TOL);
                }
            }
            out.r_max_holds = Some(ok);
        }
    }
    Ok(out)
}

fn uniform<T: Scalar>(p: &DiscreteMeasure<T>) -> bool {
    let w = p.weights();
    w.iter().all(|v| (*v - w[0]).abs() <= T::epsilon() * T::lit(16.0))
}

/// `H(X) ≥ E_P X` on sampled claims. Guaranteed for convex law-invariant
/// principles under a uniform baseline; otherwise the result is exploratory.
pub fn safety_loading_check<T: Scalar>(
    h: &PremiumPrinciple<T>,
    p: &DiscreteMeasure<T>,
    trials: usize,
    seed: u64,
) -> Result<DiagnosticOutcome<T>> {
    check_len(h, p)?;
    let mut out = DiagnosticOutcome::passing();
    let tol = T::lit(EXACT_TOL);
    for x in ClaimSampler::new(h.len(), trials, seed).claims() {
        let hx = h.eval_slice(x.values());
        let e = p.expect_slice(x.values());
        // the witness pair is (X, X): re-evaluate H(X) against E_P X
        out.record(e - hx, tol, &x, &x, None);
    }
    if !h.flags().convex {
        out.note = Some("exploratory: the principle is not convex".into());
    }
    Ok(out)
}

/// Runs all three diagnostics.
pub fn law_invariance_report<T: Scalar>(
    h: &PremiumPrinciple<T>,
    p: &DiscreteMeasure<T>,
    trials: usize,
    seed: u64,
) -> Result<LawInvReport<T>> {
    let dominated = dominance_check(h, p, trials, seed)?;
    let law_invariant = law_invariance_check(h, p, trials, seed)?;
    let mut safety_loading = safety_loading_check(h, p, trials, seed)?;
    if safety_loading.note.is_none() && !(law_invariant.holds && !law_invariant.vacuous) {
        safety_loading.note = Some("exploratory: the principle is not known to be law invariant".into());
    }
    Ok(LawInvReport {
        dominated,
        law_invariant,
        safety_loading,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functions::ScalarFn;
    use crate::principles::{PrincipleConfig, PrincipleKind};
    use crate::space::StateSpace;

    fn build(cfg: PrincipleConfig<f64>, n: usize) -> PremiumPrinciple<f64> {
        PremiumPrinciple::build(cfg, &StateSpace::new(n).unwrap()).unwrap()
    }

    #[test]
    fn dominance() {
        let u = DiscreteMeasure::<f64>::uniform(3);
        let fair = build(PrincipleConfig::fair(u.clone()), 3);
        assert!(dominance_check(&fair, &u, 100, 1).unwrap().vacuous);

        let p = DiscreteMeasure::<f64>::from_f64(&[1.0, 0.0]);
        let fair = build(PrincipleConfig::fair(p.clone()), 2);
        let r = dominance_check(&fair, &p, 100, 1).unwrap();
        assert!(r.holds && r.r_max_holds == Some(true));

        let worst = build(PrincipleConfig::worst_case(), 2);
        let r = dominance_check(&worst, &p, 100, 1).unwrap();
        assert!(!r.holds);
        let (x, y) = r.witness.unwrap();
        assert_eq!(x.values()[0], y.values()[0]);
        assert!(worst.evaluate(&x).unwrap() != worst.evaluate(&y).unwrap());
    }

    #[test]
    fn permutations_respect_blocks() {
        assert_eq!(admissible_permutations(&DiscreteMeasure::<f64>::uniform(3), 0).len(), 5);
        let p = DiscreteMeasure::<f64>::from_f64(&[0.25, 0.25, 0.5]);
        assert_eq!(admissible_permutations(&p, 0), vec![vec![1, 0, 2]]);
        assert!(admissible_permutations(&DiscreteMeasure::<f64>::from_f64(&[0.2, 0.8]), 0).is_empty());
        let big = DiscreteMeasure::<f64>::uniform(8);
        let perms = admissible_permutations(&big, 3);
        assert_eq!(perms.len(), RANDOM_PERMUTATIONS);
    }

    #[test]
    fn law_invariance() {
        let u = DiscreteMeasure::<f64>::uniform(3);
        for cfg in [PrincipleConfig::fair(u.clone()), PrincipleConfig::variance(u.clone(), 2.0)] {
            let r = law_invariance_check(&build(cfg, 3), &u, 100, 4).unwrap();
            assert!(r.holds && r.r_max_holds == Some(true));
        }
        let u2 = DiscreteMeasure::<f64>::uniform(2);
        let econ = build(
            PrincipleConfig::new(PrincipleKind::Economic)
                .with_baseline(u2.clone())
                .with_loss(ScalarFn::Power { scale: 0.5, exponent: 2.0 })
                .with_endowment(Claim::from_f64(&[0.0, 1.0])),
            2,
        );
        let r = law_invariance_check(&econ, &u2, 100, 4).unwrap();
        assert!(!r.holds);
        let (x, y) = r.witness.unwrap();
        assert_eq!(y, x.permute(&r.permutation.unwrap()));
        assert!((econ.evaluate(&Claim::from_f64(&[0.0, 1.0])).unwrap() - 1.0).abs() < 1e-12);

        let skew = DiscreteMeasure::<f64>::from_f64(&[0.2, 0.8]);
        let r = law_invariance_check(&build(PrincipleConfig::fair(skew.clone()), 2), &skew, 10, 0).unwrap();
        assert!(r.vacuous);
    }

    #[test]
    fn safety_loading() {
        let u = DiscreteMeasure::<f64>::uniform(2);
        let var = build(PrincipleConfig::variance(u.clone(), 1.0), 2);
        assert!(safety_loading_check(&var, &u, 100, 0).unwrap().holds);
        let q = build(PrincipleConfig::quantile(u.clone(), 0.5), 2);
        let r = safety_loading_check(&q, &u, 100, 0).unwrap();
        assert!(!r.holds && r.note.is_some());
        let x = Claim::from_f64(&[0.0, 1.0]);
        assert_eq!(q.evaluate(&x).unwrap(), 0.0);
        let report = law_invariance_report(&var, &u, 50, 0).unwrap();
        assert!(report.dominated.vacuous && report.law_invariant.holds && report.safety_loading.holds);
    }
}
