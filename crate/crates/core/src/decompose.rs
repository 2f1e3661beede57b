//! `R_Max(X) = inf{H(Y) : Y ≥ X}` and `D_Min = H − R_Max`.
//!
//! Dispatch prefers exact methods: closed forms (monotone principles, the
//! variance principle, absolute deviation with `θ ≥ 1`), then a linear
//! program over the vertex-enumerated plausible set for sublinear
//! principles, then a certified ellipsoid descent over a box above `X`.

use std::cell::OnceCell;

use serde::Serialize;

use crate::duality::{plausible_polytope, ModelSetDescription};
use crate::error::{Error, Result};
use crate::market::MarketModel;
use crate::optim::{Ellipsoid, Halfspace, Minimum};
use crate::principles::{ClaimSampler, PremiumPrinciple, PrincipleKind};
use crate::scalar::Scalar;
use crate::space::Claim;
use crate::stats::{quantile_slice, upper_tail_mean};

/// Numerical settings shared by the solvers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct SolveConfig<T> {
    /// Relative optimality gap at which iterative solvers stop.
    pub tol: T,
    pub max_iter: usize,
    /// Height of the search box above `sup X`; `2·(sup X − inf X) + 1` when absent.
    pub box_margin: Option<T>,
    /// Half-width of the initial search box for conjugates.
    pub conjugate_box: T,
}

impl<T: Scalar> Default for SolveConfig<T> {
    fn default() -> Self {
        SolveConfig {
            tol: T::lit(1e-8).max(T::epsilon() * T::lit(100.0)),
            max_iter: 100_000,
            box_margin: None,
            conjugate_box: T::lit(10.0),
        }
    }
}

impl<T: Scalar> SolveConfig<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > T::zero()) {
            return Err(Error::invalid("tol", "must be positive"));
        }
        if let Some(m) = self.box_margin {
            if !(m > T::zero()) || !m.is_finite() {
                return Err(Error::invalid("boxMargin", "must be positive"));
            }
        }
        if !(self.conjugate_box > T::zero()) || !self.conjugate_box.is_finite() {
            return Err(Error::invalid("conjugateBox", "must be positive"));
        }
        Ok(())
    }

    pub(crate) fn margin_for(&self, x: &Claim<T>) -> T {
        self.box_margin
            .unwrap_or_else(|| T::lit(2.0) * x.range() + T::one())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Method {
    ClosedForm,
    PrimalDescent,
    DualLP,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Decomposition<T> {
    pub premium: T,
    pub r_max: T,
    pub d_min: T,
    /// A claim `Y ≥ X` with `H(Y)` within `gap` of `r_max`.
    pub optimizer: Claim<T>,
    pub method: Method,
    /// `H(optimizer) − r_max` for exact methods, the certified optimality
    /// gap for the descent.
    pub gap: T,
}

/// Result of the primal descent.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PrimalSolution<T> {
    pub value: T,
    pub optimizer: Claim<T>,
    pub gap: T,
}

fn check_shape<T: Scalar>(h: &PremiumPrinciple<T>, x: &Claim<T>) -> Result<()> {
    if x.len() != h.len() {
        return Err(Error::Shape {
            expected: h.len(),
            got: x.len(),
        });
    }
    Ok(())
}

/// `inf{H(Y) : X ≤ Y ≤ sup X + margin}` by the ellipsoid method with exact
/// subgradients. The box is enlarged once if the minimizer presses against
/// its top; a minimizer still there afterwards means the instance is not
/// coercive.
pub fn r_max_primal<T: Scalar>(
    h: &PremiumPrinciple<T>,
    x: &Claim<T>,
    cfg: &SolveConfig<T>,
) -> Result<PrimalSolution<T>> {
    check_shape(h, x)?;
    cfg.validate()?;
    if !h.flags().convex {
        return Err(Error::Unsupported(format!(
            "{} is not convex; use the lattice oracle for R_Max",
            h.kind().name()
        )));
    }
    let margin = cfg.margin_for(x);
    let first = primal_in_box(h, x, margin, cfg)?;
    let touching = |m: &Minimum<T>, margin: T| {
        let top = x.sup() + margin;
        m.x.iter().any(|&y| y >= top - T::lit(1e-3) * margin)
    };
    let best = if touching(&first, margin) {
        let wider = T::lit(4.0) * margin;
        let second = primal_in_box(h, x, wider, cfg)?;
        let improved = second.value < first.value - cfg.tol * (T::one() + first.value.abs());
        if touching(&second, wider) && improved {
            return Err(Error::NonCoercive(format!(
                "the minimizer of H above X stays on the box boundary after enlarging the margin to {wider}"
            )));
        }
        if second.value < first.value {
            second
        } else {
            first
        }
    } else {
        first
    };
    let gap = best.gap();
    Ok(PrimalSolution {
        value: best.value,
        optimizer: Claim::from_vec_unchecked(best.x),
        gap,
    })
}

fn primal_in_box<T: Scalar>(
    h: &PremiumPrinciple<T>,
    x: &Claim<T>,
    margin: T,
    cfg: &SolveConfig<T>,
) -> Result<Minimum<T>> {
    let lo = x.values().to_vec();
    let hi = vec![x.sup() + margin; x.len()];
    let e = Ellipsoid {
        lo: &lo,
        hi: &hi,
        cuts: &[],
        tol: cfg.tol,
        max_iter: cfg.max_iter,
    };
    e.minimize(|y, g| h.value_and_subgradient(y, g), Some(&lo))
        .ok_or_else(|| Error::Degenerate("descent found no feasible point".into()))
}

/// Closed-form `R_Max` where one is known: monotone principles (`H` itself),
/// the variance principle, and absolute deviation with `θ ≥ 1`.
pub fn r_max_closed_form<T: Scalar>(h: &PremiumPrinciple<T>, x: &Claim<T>) -> Option<T> {
    if x.len() != h.len() {
        return None;
    }
    closed_form(h, x).map(|(v, _)| v)
}

fn closed_form<T: Scalar>(h: &PremiumPrinciple<T>, x: &Claim<T>) -> Option<(T, Claim<T>)> {
    let cfg = h.config();
    if h.flags().monotone {
        return Some((h.eval_slice(x.values()), x.clone()));
    }
    match cfg.kind {
        PrincipleKind::Variance => {
            let p = cfg.baseline.as_ref()?.weights();
            let theta = cfg.theta?;
            let (value, level) = variance_r_max(p, x.values(), theta);
            Some((value, x.map(|v| v.max(level))))
        }
        PrincipleKind::AbsoluteDeviation if cfg.theta? >= T::one() => {
            let p = cfg.baseline.as_ref()?.weights();
            let eps = T::one() / (T::one() + cfg.theta?);
            let value = upper_tail_mean(p, x.values(), eps);
            let level = quantile_slice(p, x.values(), T::one() - eps);
            Some((value, x.map(|v| v.max(level))))
        }
        _ => None,
    }
}

/// Maximizes `E_Q X − var_P(dQ/dP)/(2θ)` over densities. The optimal
/// density is `θ(X − λ)⁺` with `λ` fixed by normalization; returns the value
/// and `λ` (the primal minimizer is `max(X, λ)`).
pub(crate) fn variance_r_max<T: Scalar>(p: &[T], x: &[T], theta: T) -> (T, T) {
    let mut idx: Vec<usize> = (0..x.len()).filter(|&i| p[i] > T::zero()).collect();
    idx.sort_by(|&a, &b| x[b].partial_cmp(&x[a]).expect("finite claim"));
    let mut mass = T::zero();
    let mut weighted = T::zero();
    let mut level = T::zero();
    for (k, &i) in idx.iter().enumerate() {
        mass += p[i];
        weighted += p[i] * x[i];
        // λ solving θ·Σ_{top k} p_i (x_i − λ) = 1
        level = (weighted - T::one() / theta) / mass;
        let next = idx.get(k + 1).map(|&j| x[j]);
        if next.map_or(true, |v| level >= v) {
            break;
        }
    }
    let mut value = T::zero();
    let mut gini = T::zero();
    for &i in &idx {
        let q = theta * p[i] * (x[i] - level).max(T::zero());
        value += q * x[i];
        gini += q * q / p[i];
    }
    value -= (gini - T::one()) / (T::lit(2.0) * theta);
    (value, level)
}

/// Computes decompositions for one principle, caching its plausible set
/// across claims.
pub struct Decomposer<'a, T> {
    h: &'a PremiumPrinciple<T>,
    cfg: SolveConfig<T>,
    plausible: OnceCell<Option<ModelSetDescription<T>>>,
}

impl<'a, T: Scalar> Decomposer<'a, T> {
    pub fn new(h: &'a PremiumPrinciple<T>, cfg: SolveConfig<T>) -> Self {
        Decomposer {
            h,
            cfg,
            plausible: OnceCell::new(),
        }
    }

    pub fn principle(&self) -> &PremiumPrinciple<T> {
        self.h
    }

    /// The exact vertex-enumerated plausible set, when the principle is
    /// sublinear on at most six states and enumeration succeeded.
    pub fn exact_plausible_set(&self) -> Option<&ModelSetDescription<T>> {
        self.plausible
            .get_or_init(|| {
                let f = self.h.flags();
                if !(f.sublinear && f.convex) || self.h.len() > crate::polytope::MAX_VERTEX_STATES {
                    return None;
                }
                plausible_polytope(self.h, &self.cfg).ok().filter(|d| d.exact)
            })
            .as_ref()
    }

    pub fn decompose(&self, x: &Claim<T>) -> Result<Decomposition<T>> {
        let h = self.h;
        check_shape(h, x)?;
        self.cfg.validate()?;
        let premium = h.eval_slice(x.values());
        let (r_max, optimizer, method, gap) = if let Some((v, y)) = closed_form(h, x) {
            let gap = (h.eval_slice(y.values()) - v).abs();
            (v, y, Method::ClosedForm, gap)
        } else if let Some(set) = self.exact_plausible_set() {
            let v = set
                .max_expectation(x.values())
                .ok_or_else(|| Error::Degenerate("empty plausible set".into()))?;
            let (y, hy) = self.staircase_optimizer(x, v)?;
            (v, y, Method::DualLP, hy - v)
        } else if h.flags().convex {
            let s = r_max_primal(h, x, &self.cfg)?;
            (s.value, s.optimizer, Method::PrimalDescent, s.gap)
        } else {
            return Err(Error::Unsupported(format!(
                "{} is neither monotone nor convex; use the lattice oracle for R_Max",
                h.kind().name()
            )));
        };
        Ok(Decomposition {
            premium,
            r_max,
            d_min: premium - r_max,
            optimizer,
            method,
            gap,
        })
    }

    /// Best `max(X, c)` over the levels of `X`, falling back to the descent
    /// when no such claim attains `target`.
    fn staircase_optimizer(&self, x: &Claim<T>, target: T) -> Result<(Claim<T>, T)> {
        let h = self.h;
        let mut best: Option<(Claim<T>, T)> = None;
        for &c in x.values() {
            let y = x.map(|v| v.max(c));
            let hy = h.eval_slice(y.values());
            if best.as_ref().map_or(true, |(_, b)| hy < *b) {
                best = Some((y, hy));
            }
        }
        let (y, hy) = best.expect("nonempty claim");
        if hy - target <= T::lit(10.0) * self.cfg.tol * (T::one() + target.abs()) {
            return Ok((y, hy));
        }
        let s = r_max_primal(h, x, &self.cfg)?;
        Ok((s.optimizer, s.value))
    }
}

/// `H(X) = R_Max(X) + D_Min(X)` with the best available method.
pub fn decompose<T: Scalar>(
    h: &PremiumPrinciple<T>,
    x: &Claim<T>,
    cfg: &SolveConfig<T>,
) -> Result<Decomposition<T>> {
    Decomposer::new(h, *cfg).decompose(x)
}

/// Preorder on claims used by [`r_max_generalized`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Order {
    /// `X ≤ Y` statewise.
    Pointwise,
    /// `E_P(X − t)⁺ ≤ E_P(Y − t)⁺` for all `t`, under the baseline `P`.
    IncreasingConvex,
}

/// Largest state count for the increasing convex order, which enumerates
/// the `n!` orderings of the minimizer.
pub const MAX_ICX_STATES: usize = 6;

/// `inf{H(Y) : Y ≥ X}` for the given preorder, with the traded claims of
/// `mkt` playing the role of cash. `H` must be additive along `M`.
pub fn r_max_generalized<T: Scalar>(
    h: &PremiumPrinciple<T>,
    x: &Claim<T>,
    mkt: &MarketModel<T>,
    order: Order,
    cfg: &SolveConfig<T>,
) -> Result<T> {
    check_shape(h, x)?;
    if mkt.len() != h.len() {
        return Err(Error::Shape {
            expected: h.len(),
            got: mkt.len(),
        });
    }
    cfg.validate()?;
    check_market_additivity(h, mkt)?;
    match order {
        Order::Pointwise => Ok(Decomposer::new(h, *cfg).decompose(x)?.r_max),
        Order::IncreasingConvex => icx_r_max(h, x, cfg),
    }
}

/// `H(X + m) = H(X) + H(m)` on sampled claims and traded `m`.
fn check_market_additivity<T: Scalar>(h: &PremiumPrinciple<T>, mkt: &MarketModel<T>) -> Result<()> {
    let n = h.len();
    let k = mkt.basis().len();
    let claims = ClaimSampler::<T>::new(n, 30, 11).claims();
    let coeffs = ClaimSampler::<T>::new(k, 30, 12).with_box(-T::lit(2.0), T::lit(2.0)).claims();
    let tol = T::lit(1e-6).max(T::epsilon().sqrt());
    for c in &coeffs {
        let m = mkt.combine(c.values());
        let hm = h.eval_slice(m.values());
        for x in &claims {
            let lhs = h.eval_slice((x + &m).values());
            let rhs = h.eval_slice(x.values()) + hm;
            if (lhs - rhs).abs() > tol * (T::one() + lhs.abs() + rhs.abs()) {
                return Err(Error::Precondition(format!(
                    "{} is not additive along the traded claims: H(X + m) = {lhs} but H(X) + H(m) = {rhs} for m = {:?}",
                    h.kind().name(),
                    m.values()
                )));
            }
        }
    }
    Ok(())
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out
}

/// Weights of each state in `∫_u^1 q_Y(s) ds` when `Y` is ascending along
/// `order`; exact for any `Y` sorted that way.
fn tail_weights<T: Scalar>(p: &[T], order: &[usize], u: T) -> Vec<T> {
    let mut w = vec![T::zero(); p.len()];
    let mut lo = T::zero();
    for &i in order {
        let hi = lo + p[i];
        w[i] = (hi - lo.max(u)).max(T::zero());
        lo = hi;
    }
    w
}

fn cumulative<T: Scalar>(p: &[T], order: &[usize]) -> Vec<T> {
    let mut c = T::zero();
    let mut out = vec![T::zero()];
    for &i in order {
        c += p[i];
        out.push(c);
    }
    out
}

fn icx_r_max<T: Scalar>(h: &PremiumPrinciple<T>, x: &Claim<T>, cfg: &SolveConfig<T>) -> Result<T> {
    let n = h.len();
    if !h.flags().convex {
        return Err(Error::Unsupported(format!(
            "the increasing convex order needs a convex principle; {} is not",
            h.kind().name()
        )));
    }
    if n > MAX_ICX_STATES {
        return Err(Error::Unsupported(format!(
            "the increasing convex order is limited to {MAX_ICX_STATES} states"
        )));
    }
    let p = h
        .baseline()
        .ok_or_else(|| Error::Precondition(format!("{} has no baseline measure to order claims by", h.kind().name())))?
        .weights()
        .to_vec();
    let xo = crate::stats::ascending_order(x.values());
    let x_breaks = cumulative(&p, &xo);
    let margin = cfg.margin_for(x);
    let run = |margin: T| -> Option<Minimum<T>> {
        let lo = vec![x.inf() - margin; n];
        let hi = vec![x.sup() + margin; n];
        let mut best: Option<Minimum<T>> = None;
        for sigma in permutations(n) {
            let mut cuts = Vec::new();
            for w in sigma.windows(2) {
                let mut a = vec![T::zero(); n];
                a[w[0]] = T::one();
                a[w[1]] = -T::one();
                cuts.push(Halfspace { a, b: T::zero() });
            }
            let mut us = cumulative(&p, &sigma);
            us.extend(x_breaks.iter().copied());
            us.sort_by(|a, b| a.partial_cmp(b).unwrap());
            us.dedup_by(|a, b| (*a - *b).abs() <= T::epsilon());
            for &u in &us {
                if u >= T::one() {
                    continue;
                }
                let wy = tail_weights(&p, &sigma, u);
                let wx = tail_weights(&p, &xo, u);
                let rhs: T = wx.iter().zip(x.values()).map(|(w, v)| *w * *v).sum();
                cuts.push(Halfspace {
                    a: wy.iter().map(|v| -*v).collect(),
                    b: -rhs,
                });
            }
            let e = Ellipsoid {
                lo: &lo,
                hi: &hi,
                cuts: &cuts,
                tol: cfg.tol,
                max_iter: cfg.max_iter,
            };
            if let Some(m) = e.minimize(|y, g| h.value_and_subgradient(y, g), None) {
                if best.as_ref().map_or(true, |b| m.value < b.value) {
                    best = Some(m);
                }
            }
        }
        best
    };
    let on_boundary = |m: &Minimum<T>, margin: T| {
        let slack = T::lit(1e-3) * margin;
        m.x.iter()
            .any(|&y| y <= x.inf() - margin + slack || y >= x.sup() + margin - slack)
    };
    let first = run(margin).ok_or_else(|| Error::Degenerate("no claim dominates X in the increasing convex order".into()))?;
    if !on_boundary(&first, margin) {
        return Ok(first.value);
    }
    let wider = T::lit(4.0) * margin;
    let second = run(wider).ok_or_else(|| Error::Degenerate("no claim dominates X in the increasing convex order".into()))?;
    if on_boundary(&second, wider) && second.value < first.value - cfg.tol * (T::one() + first.value.abs()) {
        return Err(Error::Degenerate(format!(
            "the premium keeps decreasing along claims dominating X (box half-width {wider})"
        )));
    }
    Ok(first.value.min(second.value))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::principles::PrincipleConfig;
    use crate::space::{DiscreteMeasure, StateSpace};

    fn build(cfg: PrincipleConfig<f64>, n: usize) -> PremiumPrinciple<f64> {
        PremiumPrinciple::build(cfg, &StateSpace::new(n).unwrap()).unwrap()
    }

    #[test]
    fn fair_is_its_own_risk_measure() {
        let p = DiscreteMeasure::<f64>::from_f64(&[0.2, 0.8]);
        let h = build(PrincipleConfig::fair(p), 2);
        let x = Claim::<f64>::from_f64(&[3.0, -1.0]);
        let s = r_max_primal(&h, &x, &SolveConfig::default()).unwrap();
        assert!((s.value - (-0.2)).abs() < 1e-8);
        assert!(s.optimizer.values().iter().zip(x.values()).all(|(a, b)| (a - b).abs() < 1e-3));
        let d = decompose(&h, &x, &SolveConfig::default()).unwrap();
        assert_eq!(d.method, Method::ClosedForm);
        assert_eq!(d.d_min, 0.0);
    }

    #[test]
    fn variance_two_state_values() {
        // R_Max equals H at X = (0, 1): the water-filling level is 0
        let h = build(PrincipleConfig::variance(DiscreteMeasure::uniform(2), 2.0), 2);
        let x = Claim::<f64>::from_f64(&[0.0, 1.0]);
        assert!((r_max_closed_form(&h, &x).unwrap() - 0.75).abs() < 1e-15);
        let s = r_max_primal(&h, &x, &SolveConfig::default()).unwrap();
        assert!((s.value - 0.75).abs() < 1e-7, "{s:?}");
        // at X = (0, 2) lifting the low state to 1 is optimal: H(1, 2) = 1.75
        let x2 = Claim::<f64>::from_f64(&[0.0, 2.0]);
        let d = decompose(&h, &x2, &SolveConfig::default()).unwrap();
        assert!((d.premium - 2.0).abs() < 1e-15);
        assert!((d.r_max - 1.75).abs() < 1e-12);
        assert!((d.d_min - 0.25).abs() < 1e-12);
        assert!(d.gap < 1e-12);
        assert!((d.optimizer.values()[0] - 1.0).abs() < 1e-12);
        let s = r_max_primal(&h, &x2, &SolveConfig::default()).unwrap();
        assert!((s.value - 1.75).abs() < 1e-7);
    }

    #[test]
    fn absolute_deviation_closed_form() {
        let p = DiscreteMeasure::<f64>::uniform(4);
        let x = Claim::<f64>::from_f64(&[0.0, 1.0, 2.0, 3.0]);
        let h1 = build(PrincipleConfig::absolute_deviation(p.clone(), 1.0), 4);
        assert!((r_max_closed_form(&h1, &x).unwrap() - 2.5).abs() < 1e-12);
        let h2 = build(PrincipleConfig::absolute_deviation(p.clone(), 2.0), 4);
        assert!((r_max_closed_form(&h2, &x).unwrap() - 2.75).abs() < 1e-12);
        let s = r_max_primal(&h2, &x, &SolveConfig::default()).unwrap();
        assert!((s.value - 2.75).abs() < 1e-7, "{s:?}");
        let half = build(PrincipleConfig::absolute_deviation(p, 0.5), 4);
        assert!(r_max_closed_form(&half, &x).is_some(), "monotone for θ ≤ 1");
    }

    #[test]
    fn constants_decompose_trivially() {
        let h = build(PrincipleConfig::variance(DiscreteMeasure::uniform(3), 5.0), 3);
        let d = decompose(&h, &Claim::constant(3, 2.5), &SolveConfig::default()).unwrap();
        assert!((d.premium - 2.5).abs() < 1e-15);
        assert!((d.r_max - 2.5).abs() < 1e-12);
        assert!(d.d_min.abs() < 1e-12);
    }

    #[test]
    fn nonconvex_is_refused() {
        let h = build(
            PrincipleConfig::new(PrincipleKind::SmoothAmbiguity)
                .with_models(vec![DiscreteMeasure::from_f64(&[0.3, 0.7]), DiscreteMeasure::uniform(2)])
                .with_loss(crate::functions::ScalarFn::Power { scale: 1.0, exponent: 2.0 })
                .with_ambiguity(crate::functions::ScalarFn::Power { scale: 1.0, exponent: 0.5 }),
            2,
        );
        let x = Claim::<f64>::from_f64(&[0.0, 1.0]);
        assert!(matches!(r_max_primal(&h, &x, &SolveConfig::default()), Err(Error::Unsupported(_))));
        assert!(matches!(decompose(&h, &x, &SolveConfig::default()), Err(Error::Unsupported(_))));
    }

    #[test]
    fn quantile_is_monotone_so_closed_form_applies() {
        let h = build(PrincipleConfig::quantile(DiscreteMeasure::uniform(2), 0.5), 2);
        let d = decompose(&h, &Claim::<f64>::from_f64(&[0.0, 1.0]), &SolveConfig::default()).unwrap();
        assert_eq!(d.method, Method::ClosedForm);
        assert_eq!(d.r_max, 0.0);
    }

    #[test]
    fn generalized_orders() {
        let p = DiscreteMeasure::<f64>::from_f64(&[0.2, 0.3, 0.5]);
        let fair = build(PrincipleConfig::fair(p.clone()), 3);
        let consts = MarketModel::constants(3);
        let cfg = SolveConfig::default();
        let x = Claim::<f64>::from_f64(&[1.0, -2.0, 0.5]);
        let icx = r_max_generalized(&fair, &x, &consts, Order::IncreasingConvex, &cfg).unwrap();
        assert!((icx - p.expect(&x).unwrap()).abs() < 1e-7, "{icx}");
        let var = build(PrincipleConfig::variance(p.clone(), 1.0), 3);
        let pw = r_max_generalized(&var, &x, &consts, Order::Pointwise, &cfg).unwrap();
        assert!((pw - r_max_closed_form(&var, &x).unwrap()).abs() < 1e-12);
        // pointwise domination implies icx domination, so icx can only go lower
        let icx = r_max_generalized(&var, &x, &consts, Order::IncreasingConvex, &cfg).unwrap();
        assert!(icx <= pw + 1e-7);
        let m = Claim::constant(3, 2.0);
        let c = r_max_generalized(&var, &m, &consts, Order::IncreasingConvex, &cfg).unwrap();
        assert!((c - 2.0).abs() < 1e-7);
    }

    #[test]
    fn market_additivity_is_required() {
        let var = build(PrincipleConfig::variance(DiscreteMeasure::uniform(2), 1.0), 2);
        let mkt = MarketModel::new(vec![Claim::from_f64(&[0.0, 2.0])], vec![1.0]).unwrap();
        let x = Claim::<f64>::from_f64(&[0.0, 1.0]);
        let r = r_max_generalized(&var, &x, &mkt, Order::Pointwise, &SolveConfig::default());
        assert!(matches!(r, Err(Error::Precondition(_))));
    }

    #[test]
    fn permutations_are_complete() {
        let ps = permutations(4);
        assert_eq!(ps.len(), 24);
        let mut sorted = ps.clone();
        sorted.sort();
        sorted.dedup();
        assert_eq!(sorted.len(), 24);
    }

    #[test]
    fn variance_water_filling_matches_descent() {
        let p = DiscreteMeasure::<f64>::from_f64(&[0.1, 0.2, 0.3, 0.4]);
        let h = build(PrincipleConfig::variance(p, 1.5), 4);
        for x in [[0.0, 3.0, -1.0, 2.0], [1.0, 1.0, 5.0, -2.0], [0.2, 0.1, 0.0, 0.3]] {
            let x = Claim::<f64>::from_f64(&x);
            let cf = r_max_closed_form(&h, &x).unwrap();
            let s = r_max_primal(&h, &x, &SolveConfig::default()).unwrap();
            assert!((cf - s.value).abs() < 1e-7, "{cf} vs {}", s.value);
        }
    }
}
