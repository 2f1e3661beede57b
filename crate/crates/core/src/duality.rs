//! Convex duality: conjugates `H*(Q) = sup_X E_Q X − H(X)`, the dual
//! representation `R_Max(X) = max_Q E_Q X − H*(Q)`, plausible sets of
//! sublinear principles and the model-based view of deviation.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::decompose::SolveConfig;
use crate::error::{Error, Result};
use crate::lp::{LinearProgram, LpOutcome};
use crate::optim::{Ellipsoid, Halfspace, Minimum};
use crate::polytope::{SimplexPolytope, MAX_VERTEX_STATES};
use crate::principles::{ClaimSampler, PremiumPrinciple};
use crate::scalar::{dot, Scalar};
use crate::space::{Claim, DiscreteMeasure};

/// `H*(Q)`; `value` is `+∞` when the supremum is unbounded.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConjugateValue<T> {
    pub value: T,
    /// A claim attaining `value` up to `gap` (absent when unbounded).
    pub witness: Option<Claim<T>>,
    pub gap: T,
}

impl<T: Scalar> ConjugateValue<T> {
    pub fn is_finite(&self) -> bool {
        self.value.is_finite()
    }
}

fn check_len<T: Scalar>(h: &PremiumPrinciple<T>, got: usize) -> Result<()> {
    if got != h.len() {
        return Err(Error::Shape {
            expected: h.len(),
            got,
        });
    }
    Ok(())
}

fn require_convex<T: Scalar>(h: &PremiumPrinciple<T>, what: &str) -> Result<()> {
    if !h.flags().convex {
        return Err(Error::Unsupported(format!(
            "{what} needs a convex principle; {} is not",
            h.kind().name()
        )));
    }
    Ok(())
}

/// `max E_Q X − H(X)` over `X = (z, 0)` with `z ∈ [−b, b]ⁿ⁻¹`. Fixing the
/// last coordinate loses nothing since the objective is shift invariant.
/// Returns the optimum, the full maximizer and the certified gap.
pub(crate) fn conjugate_in_box<T: Scalar>(
    h: &PremiumPrinciple<T>,
    q: &[T],
    b: T,
    tol: T,
    max_iter: usize,
) -> (T, Vec<T>, T) {
    let n = q.len();
    if n == 1 {
        let y = [T::zero()];
        return (q[0] * y[0] - h.eval_slice(&y), y.to_vec(), T::zero());
    }
    let d = n - 1;
    let lo = vec![-b; d];
    let hi = vec![b; d];
    let mut full = vec![T::zero(); n];
    let mut gfull = vec![T::zero(); n];
    let e = Ellipsoid {
        lo: &lo,
        hi: &hi,
        cuts: &[],
        tol,
        max_iter,
    };
    let m = e
        .minimize(
            |z, g| {
                full[..d].copy_from_slice(z);
                full[d] = T::zero();
                let v = h.value_and_subgradient(&full, &mut gfull);
                for i in 0..d {
                    g[i] = gfull[i] - q[i];
                }
                v - dot(&q[..d], z)
            },
            Some(&vec![T::zero(); d]),
        )
        .expect("the box is feasible");
    let mut x = m.x.clone();
    x.push(T::zero());
    (-m.value, x, m.gap())
}

/// `H*(Q)` for a convex principle. The supremum is taken over growing boxes
/// (`conjugate_box` times 1, 4 and 16); steady growth across the three is
/// reported as `+∞`.
pub fn conjugate<T: Scalar>(
    h: &PremiumPrinciple<T>,
    q: &DiscreteMeasure<T>,
    cfg: &SolveConfig<T>,
) -> Result<ConjugateValue<T>> {
    check_len(h, q.len())?;
    require_convex(h, "the conjugate")?;
    cfg.validate()?;
    let w = q.weights();
    let mut vals = Vec::with_capacity(3);
    let mut b = cfg.conjugate_box;
    for _ in 0..3 {
        vals.push(conjugate_in_box(h, w, b, cfg.tol, cfg.max_iter));
        b = b * T::lit(4.0);
    }
    let thr = T::lit(1e-6) * (T::one() + vals[0].0.abs());
    let growing = vals[1].0 > vals[0].0 + thr && vals[2].0 > vals[1].0 + thr;
    if growing || vals[2].0 > T::lit(1e6) {
        return Ok(ConjugateValue {
            value: T::infinity(),
            witness: None,
            gap: T::zero(),
        });
    }
    let (value, x, gap) = vals.pop().unwrap();
    Ok(ConjugateValue {
        value,
        witness: Some(Claim::from_vec_unchecked(x)),
        gap,
    })
}

/// A finite description of a set of probability models.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModelSetDescription<T> {
    /// The vertices when `exact`, otherwise sampled members.
    pub members: Vec<DiscreteMeasure<T>>,
    /// Constraints `E_Q X ≤ H(X)` cutting out the set.
    pub halfspaces: Vec<(Claim<T>, T)>,
    /// True when the members are the vertices of the plausible set.
    pub exact: bool,
}

impl<T: Scalar> ModelSetDescription<T> {
    /// `max_Q E_Q X` over the members.
    pub fn max_expectation(&self, x: &[T]) -> Option<T> {
        self.members
            .iter()
            .map(|q| dot(q.weights(), x))
            .fold(None, |m, v| Some(m.map_or(v, |m: T| m.max(v))))
    }
}

/// Directions whose halfspaces give a first outer approximation of the
/// plausible set: `±1_A` for proper subsets `A` and `1_i − 1_j`.
fn initial_directions<T: Scalar>(n: usize) -> Vec<Vec<T>> {
    let mut out = Vec::new();
    let full = (1u64 << n) - 1;
    for mask in 1..full {
        let ind = Claim::<T>::indicator(n, mask).into_values();
        out.push(ind.iter().map(|v| -*v).collect());
        out.push(ind);
    }
    for i in 0..n {
        for j in 0..n {
            if i != j {
                let mut v = vec![T::zero(); n];
                v[i] = T::one();
                v[j] = -T::one();
                out.push(v);
            }
        }
    }
    out
}

const MAX_CUT_ROUNDS: usize = 40;
// a smooth plausible set (standard deviation, Lp deviation) never closes up,
// and its vertex count grows with every round
const MAX_ADDED_CUTS: usize = 48;

/// The plausible set `{Q : E_Q X ≤ H(X) for all X}` of a sublinear
/// principle. On at most six states the vertices are enumerated and refined
/// by cutting planes until every vertex is certified to lie in the set; on
/// larger spaces only candidate members passing the sampled test are kept.
pub fn plausible_polytope<T: Scalar>(h: &PremiumPrinciple<T>, cfg: &SolveConfig<T>) -> Result<ModelSetDescription<T>> {
    let f = h.flags();
    if !(f.sublinear && f.convex) {
        return Err(Error::Unsupported(format!(
            "the plausible set is described by vertices only for sublinear principles; {} is not",
            h.kind().name()
        )));
    }
    cfg.validate()?;
    let n = h.len();
    if n > MAX_VERTEX_STATES {
        return Ok(sampled_description(h, cfg));
    }
    let mut halfspaces: Vec<(Vec<T>, T)> = initial_directions::<T>(n)
        .into_iter()
        .map(|d| {
            let b = h.eval_slice(&d);
            (d, b)
        })
        .collect();
    let sep_tol = T::lit(10.0) * cfg.tol;
    let initial = halfspaces.len();
    for _ in 0..MAX_CUT_ROUNDS {
        if halfspaces.len() - initial > MAX_ADDED_CUTS {
            break;
        }
        let poly = SimplexPolytope::new(n, halfspaces.clone())?;
        let mut added = false;
        let mut all_certified = true;
        for v in &poly.vertices {
            let (val, x, gap) = conjugate_in_box(h, v.weights(), T::one(), cfg.tol * T::lit(0.1), cfg.max_iter);
            if val > sep_tol {
                let b = h.eval_slice(&x);
                halfspaces.push((x, b));
                added = true;
            } else if val + gap > sep_tol {
                all_certified = false;
            }
        }
        if !added {
            return Ok(ModelSetDescription {
                members: poly.vertices,
                halfspaces: poly
                    .halfspaces
                    .into_iter()
                    .map(|(a, b)| (Claim::from_vec_unchecked(a), b))
                    .collect(),
                exact: all_certified,
            });
        }
    }
    let poly = SimplexPolytope::new(n, halfspaces)?;
    Ok(ModelSetDescription {
        members: poly.vertices,
        halfspaces: poly
            .halfspaces
            .into_iter()
            .map(|(a, b)| (Claim::from_vec_unchecked(a), b))
            .collect(),
        exact: false,
    })
}

fn sampled_description<T: Scalar>(h: &PremiumPrinciple<T>, cfg: &SolveConfig<T>) -> ModelSetDescription<T> {
    let n = h.len();
    let mut candidates: Vec<DiscreteMeasure<T>> = h.reference_measures().into_iter().cloned().collect();
    candidates.extend((0..n).map(|i| DiscreteMeasure::dirac(n, i)));
    let members = candidates
        .into_iter()
        .filter(|q| {
            let (val, _, _) = conjugate_in_box(h, q.weights(), T::one(), cfg.tol, cfg.max_iter);
            val <= T::lit(10.0) * cfg.tol
        })
        .collect();
    ModelSetDescription {
        members,
        halfspaces: Vec::new(),
        exact: false,
    }
}

/// Outcome of a sampled membership test.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Membership<T> {
    pub member: bool,
    /// `max_X E_Q X − H(X)` over the tested directions.
    pub worst_violation: T,
    pub witness: Option<Claim<T>>,
    pub checks: usize,
}

/// Tests `E_Q X ≤ H(X) + tol` on signed subset indicators, pairwise
/// differences and `random` claims from the unit box. Meaningful for
/// sublinear principles, where this characterizes the plausible set.
pub fn plausible_membership<T: Scalar>(
    h: &PremiumPrinciple<T>,
    q: &DiscreteMeasure<T>,
    tol: T,
    random: usize,
    seed: u64,
) -> Result<Membership<T>> {
    check_len(h, q.len())?;
    let n = h.len();
    let mut dirs: Vec<Vec<T>> = if n <= 16 {
        initial_directions::<T>(n)
    } else {
        (0..n)
            .flat_map(|i| {
                let e = Claim::<T>::indicator(n, 1u64 << i.min(63)).into_values();
                [e.iter().map(|v| -*v).collect(), e]
            })
            .collect()
    };
    dirs.extend(
        ClaimSampler::new(n, random, seed)
            .claims()
            .into_iter()
            .map(Claim::into_values),
    );
    let mut worst = T::neg_infinity();
    let mut witness = None;
    for d in &dirs {
        let v = dot(q.weights(), d) - h.eval_slice(d);
        if v > worst {
            worst = v;
            witness = Some(d);
        }
    }
    let member = worst <= tol;
    Ok(Membership {
        member,
        worst_violation: worst,
        witness: (!member).then(|| Claim::from_vec_unchecked(witness.unwrap().clone())),
        checks: dirs.len(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum DualMethod {
    /// Linear program over the exact plausible polytope.
    PolytopeLP,
    /// Ellipsoid over the simplex with an inner conjugate solve.
    Nested,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DualSolution<T> {
    pub value: T,
    /// A maximizing model.
    pub measure: DiscreteMeasure<T>,
    pub method: DualMethod,
    pub gap: T,
}

/// `R_Max(X) = max_Q E_Q X − H*(Q)` for convex `H`, computed without
/// reference to the primal problem.
pub fn dual_r_max<T: Scalar>(h: &PremiumPrinciple<T>, x: &Claim<T>, cfg: &SolveConfig<T>) -> Result<DualSolution<T>> {
    check_len(h, x.len())?;
    require_convex(h, "the dual problem")?;
    cfg.validate()?;
    let n = h.len();
    if n == 1 {
        return Ok(DualSolution {
            value: h.eval_slice(x.values()),
            measure: DiscreteMeasure::dirac(1, 0),
            method: DualMethod::Nested,
            gap: T::zero(),
        });
    }
    if h.flags().sublinear && n <= MAX_VERTEX_STATES {
        let set = plausible_polytope(h, cfg)?;
        if set.exact {
            let mut lp = LinearProgram::new(n).minimize(x.values().iter().map(|v| -*v).collect());
            lp.eq(vec![T::one(); n], T::one());
            for (a, b) in &set.halfspaces {
                lp.le(a.values().to_vec(), *b);
            }
            return match lp.solve()? {
                LpOutcome::Optimal { x: q, value } => Ok(DualSolution {
                    value: -value,
                    measure: DiscreteMeasure::normalized(q.iter().map(|v| v.max(T::zero())).collect())?,
                    method: DualMethod::PolytopeLP,
                    gap: T::zero(),
                }),
                _ => Err(Error::Degenerate("the plausible set is empty".into())),
            };
        }
    }
    nested_dual(h, x, cfg)
}

fn nested_dual<T: Scalar>(h: &PremiumPrinciple<T>, x: &Claim<T>, cfg: &SolveConfig<T>) -> Result<DualSolution<T>> {
    let n = h.len();
    let d = n - 1;
    let xv = x.values();
    // large enough to hold the normalized primal minimizer
    let b = T::lit(2.0) * (x.range() + cfg.margin_for(x));
    let lo = vec![T::zero(); d];
    let hi = vec![T::one(); d];
    let cuts = [Halfspace {
        a: vec![T::one(); d],
        b: T::one(),
    }];
    let inner_tol = cfg.tol * T::lit(0.01);
    let mut q = vec![T::zero(); n];
    let e = Ellipsoid {
        lo: &lo,
        hi: &hi,
        cuts: &cuts,
        tol: cfg.tol,
        max_iter: cfg.max_iter,
    };
    let start: Vec<T> = h
        .baseline()
        .map(|p| p.weights()[..d].to_vec())
        .unwrap_or_else(|| vec![T::one() / T::from_usize_lossy(n); d]);
    let m: Minimum<T> = e
        .minimize(
            |z, g| {
                q[..d].copy_from_slice(z);
                q[d] = (T::one() - z.iter().copied().sum::<T>()).max(T::zero());
                let (conj, y, _) = conjugate_in_box(h, &q, b, inner_tol, cfg.max_iter);
                for i in 0..d {
                    g[i] = (y[i] - xv[i]) - (y[d] - xv[d]);
                }
                conj - dot(&q, xv)
            },
            Some(&start),
        )
        .ok_or_else(|| Error::Degenerate("the simplex search found no feasible model".into()))?;
    let mut qw = m.x.clone();
    qw.push(T::one() - m.x.iter().copied().sum::<T>());
    Ok(DualSolution {
        value: -m.value,
        measure: DiscreteMeasure::normalized(qw.into_iter().map(|v| v.max(T::zero())).collect())?,
        method: DualMethod::Nested,
        gap: m.gap(),
    })
}

/// `Amb_𝒬(X) = ½(max_Q E_Q X − min_Q E_Q X)`.
pub fn ambiguity_index<T: Scalar>(models: &[DiscreteMeasure<T>], x: &Claim<T>) -> Result<T> {
    if models.is_empty() {
        return Err(Error::invalid("models", "at least one model is required"));
    }
    for q in models {
        q.check(x)?;
    }
    Ok(crate::principles::ambiguity_slice(models, x.values()))
}

/// `D_P(X) = H(X − E_P X)`.
pub fn model_deviation<T: Scalar>(h: &PremiumPrinciple<T>, p: &DiscreteMeasure<T>, x: &Claim<T>) -> Result<T> {
    check_len(h, x.len())?;
    p.check(x)?;
    let mean = p.expect_slice(x.values());
    Ok(h.eval_slice(x.shift(-mean).values()))
}

/// `min_Q D_Q(X) + H*(Q)` over the given models; members with an infinite
/// conjugate are skipped. Equals `D_Min(X)` when the models contain a dual
/// maximizer for `X`.
pub fn d_min_via_models<T: Scalar>(
    h: &PremiumPrinciple<T>,
    models: &[DiscreteMeasure<T>],
    x: &Claim<T>,
    cfg: &SolveConfig<T>,
) -> Result<T> {
    check_len(h, x.len())?;
    let mut best: Option<T> = None;
    for q in models {
        let c = conjugate(h, q, cfg)?;
        if c.is_finite() {
            let v = model_deviation(h, q, x)? + c.value;
            best = Some(best.map_or(v, |b| b.min(v)));
        }
    }
    best.ok_or_else(|| Error::Domain("every model has an infinite conjugate".into()))
}

/// One condition of the symmetry equivalence, checked numerically.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ConditionCheck<T> {
    pub holds: bool,
    pub worst_violation: T,
}

/// Four conditions that coincide when the center lies in the model set:
/// midpoint pricing, geometric symmetry, ambiguity as excess over the
/// center and the deviation identity.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct EquivalenceReport<T> {
    /// Every model is absolutely continuous with respect to the center.
    pub dominated: bool,
    pub center_is_member: bool,
    /// `E_P X = ½(R_Max(X) − R_Max(−X))`.
    pub midpoint: ConditionCheck<T>,
    /// `2P − Q` lies in the set for every listed `Q`.
    pub symmetric: ConditionCheck<T>,
    /// `Amb(X) = max_Q E_Q X − E_P X`.
    pub ambiguity_excess: ConditionCheck<T>,
    /// `D_P(X) = D_Min(X) + Amb(X)` for `H(X) = max_Q E_Q X`.
    pub deviation_identity: ConditionCheck<T>,
    pub claims_tested: usize,
}

impl<T> EquivalenceReport<T> {
    /// True when all four conditions agree.
    pub fn consistent(&self) -> bool {
        let s = self.symmetric.holds;
        self.midpoint.holds == s && self.ambiguity_excess.holds == s && self.deviation_identity.holds == s
    }
}

/// Is `target` a convex combination of `models`?
fn in_hull<T: Scalar>(models: &[DiscreteMeasure<T>], target: &[T], tol: T) -> Result<(bool, T)> {
    let k = models.len();
    let n = target.len();
    // minimize total slack s⁺ + s⁻ with Σλ_k Q_k + s⁺ − s⁻ = target
    let mut c = vec![T::zero(); k];
    c.extend(vec![T::one(); 2 * n]);
    let mut lp = LinearProgram::new(k + 2 * n).minimize(c);
    let mut row = vec![T::one(); k];
    row.extend(vec![T::zero(); 2 * n]);
    lp.eq(row, T::one());
    for i in 0..n {
        let mut r: Vec<T> = models.iter().map(|q| q.weights()[i]).collect();
        r.extend(vec![T::zero(); 2 * n]);
        r[k + i] = T::one();
        r[k + n + i] = -T::one();
        lp.eq(r, target[i]);
    }
    match lp.solve()? {
        LpOutcome::Optimal { value, .. } => Ok((value <= tol, value)),
        _ => Err(Error::Degenerate("hull membership program failed".into())),
    }
}

/// Checks the symmetry equivalence for the set `conv(models)` around
/// `center` on sampled claims.
pub fn symmetry_center_check<T: Scalar>(
    models: &[DiscreteMeasure<T>],
    center: &DiscreteMeasure<T>,
    sampler: &ClaimSampler<T>,
    tol: T,
) -> Result<EquivalenceReport<T>> {
    if models.is_empty() {
        return Err(Error::invalid("models", "at least one model is required"));
    }
    let n = center.len();
    for q in models {
        if q.len() != n {
            return Err(Error::Shape { expected: n, got: q.len() });
        }
    }
    if sampler.n != n {
        return Err(Error::Shape { expected: n, got: sampler.n });
    }
    let dominated = models.iter().all(|q| q.absolutely_continuous_wrt(center, tol));
    let (center_is_member, _) = in_hull(models, center.weights(), tol)?;

    let mut sym_worst = T::zero();
    for q in models {
        let r: Vec<T> = center
            .weights()
            .iter()
            .zip(q.weights())
            .map(|(p, w)| T::lit(2.0) * *p - *w)
            .collect();
        let neg = r.iter().fold(T::zero(), |m, v| m.max(-*v));
        let (_, slack) = in_hull(models, &r, tol)?;
        sym_worst = sym_worst.max(neg).max(slack);
    }

    let r_max = |x: &[T]| {
        models
            .iter()
            .map(|q| dot(q.weights(), x))
            .fold(T::neg_infinity(), T::max)
    };
    let claims = sampler.claims();
    let (mut mid, mut amb, mut dev) = (T::zero(), T::zero(), T::zero());
    for x in &claims {
        let xv = x.values();
        let neg: Vec<T> = xv.iter().map(|v| -*v).collect();
        let ep = dot(center.weights(), xv);
        let hi = r_max(xv);
        let lo = -r_max(&neg);
        mid = mid.max((ep - (hi + lo) / T::lit(2.0)).abs());
        let a = (hi - lo) / T::lit(2.0);
        amb = amb.max((a - (hi - ep)).abs());
        // with H = R_Max: D_P(X) = H(X) − E_P X and D_Min = 0
        let d_p = hi - ep;
        dev = dev.max((d_p - a).abs());
    }
    let check = |w: T| ConditionCheck {
        holds: w <= tol,
        worst_violation: w,
    };
    Ok(EquivalenceReport {
        dominated,
        center_is_member,
        midpoint: check(mid),
        symmetric: check(sym_worst),
        ambiguity_excess: check(amb),
        deviation_identity: check(dev),
        claims_tested: claims.len(),
    })
}

/// Evaluates the biconjugate `sup_Q E_Q X − H*(Q)` over random models and
/// the given ones; a lower bound on `H(X)` that is tight for convex `H`.
pub fn biconjugate_lower_bound<T: Scalar>(
    h: &PremiumPrinciple<T>,
    x: &Claim<T>,
    models: &[DiscreteMeasure<T>],
    cfg: &SolveConfig<T>,
) -> Result<T> {
    check_len(h, x.len())?;
    let mut best = T::neg_infinity();
    for q in models {
        let c = conjugate(h, q, cfg)?;
        if c.is_finite() {
            best = best.max(q.expect_slice(x.values()) - c.value);
        }
    }
    Ok(best)
}

/// Uniformly distributed probability vectors (flat Dirichlet).
pub fn random_measures<T: Scalar>(n: usize, count: usize, seed: u64) -> Vec<DiscreteMeasure<T>> {
    use rand::Rng;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let w: Vec<T> = (0..n)
                .map(|_| T::lit(-(1.0 - rng.gen::<f64>()).ln()))
                .collect();
            DiscreteMeasure::normalized(w).expect("positive weights")
        })
        .collect()
}
