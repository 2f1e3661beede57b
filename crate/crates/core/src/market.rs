//! Frictionless markets `(M, F)`: superhedging, martingale measures and the
//! consistency of a sublinear premium principle with market prices.

use serde::Serialize;

use crate::decompose::{Decomposer, SolveConfig};
use crate::duality::conjugate_in_box;
use crate::error::{Error, Result};
use crate::lp::{LinearProgram, LpOutcome};
use crate::polytope::{SimplexPolytope, MAX_VERTEX_STATES};
use crate::principles::{ClaimSampler, PremiumPrinciple};
use crate::scalar::{dot, Scalar};
use crate::space::{Claim, DiscreteMeasure};

fn market_tol<T: Scalar>() -> T {
    T::lit(1e-9).max(T::epsilon() * T::lit(1e3))
}

/// Traded claims spanning `M` with prices `F` on them. The riskless claim
/// `1` with price 1 is always part of the basis.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MarketModel<T> {
    basis: Vec<Claim<T>>,
    prices: Vec<T>,
}

/// Superhedging price `R_*(X)` and a portfolio attaining it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HedgeResult<T> {
    pub price: T,
    /// Coefficients over the basis.
    pub portfolio: Vec<T>,
    /// `X₀ = Σ cⱼ(Bⱼ − F(Bⱼ))`, a zero-cost claim with `price + X₀ ≥ X`.
    pub hedge: Claim<T>,
}

impl<T: Scalar> MarketModel<T> {
    /// Validates the market: equal dimensions, prices that extend linearly
    /// to the span (including `F(1) = 1`), and no arbitrage.
    pub fn new(basis: Vec<Claim<T>>, prices: Vec<T>) -> Result<Self> {
        if basis.len() != prices.len() {
            return Err(Error::Shape {
                expected: basis.len(),
                got: prices.len(),
            });
        }
        let n = match basis.first() {
            Some(b) => b.len(),
            None => return Err(Error::invalid("basis", "at least one traded claim is required")),
        };
        for b in &basis {
            if b.len() != n {
                return Err(Error::Shape { expected: n, got: b.len() });
            }
        }
        if let Some(p) = prices.iter().find(|p| !p.is_finite()) {
            return Err(Error::invalid("prices", format!("price {p} is not finite")));
        }
        let one = Claim::constant(n, T::one());
        // adding (1, 1) up front lets the linearity check enforce F(1) = 1
        let mut mkt = MarketModel { basis, prices };
        mkt.basis.insert(0, one.clone());
        mkt.prices.insert(0, T::one());
        mkt.check_linear()?;
        let mut first = true;
        let (basis, prices) = mkt
            .basis
            .into_iter()
            .zip(mkt.prices)
            .filter(|(b, _)| *b != one || std::mem::take(&mut first))
            .unzip();
        mkt = MarketModel { basis, prices };
        mkt.check_no_arbitrage()?;
        Ok(mkt)
    }

    /// The market of constants only.
    pub fn constants(n: usize) -> Self {
        MarketModel {
            basis: vec![Claim::constant(n, T::one())],
            prices: vec![T::one()],
        }
    }

    pub fn basis(&self) -> &[Claim<T>] {
        &self.basis
    }

    pub fn prices(&self) -> &[T] {
        &self.prices
    }

    pub fn len(&self) -> usize {
        self.basis[0].len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// `Σ cⱼ Bⱼ`.
    pub fn combine(&self, coeffs: &[T]) -> Claim<T> {
        let mut out = vec![T::zero(); self.len()];
        for (c, b) in coeffs.iter().zip(&self.basis) {
            for (o, v) in out.iter_mut().zip(b.values()) {
                *o += *c * *v;
            }
        }
        Claim::from_vec_unchecked(out)
    }

    /// `F(Σ cⱼ Bⱼ)`.
    pub fn price_of(&self, coeffs: &[T]) -> T {
        dot(coeffs, &self.prices)
    }

    // prices must vanish on every null combination of the basis
    fn check_linear(&self) -> Result<()> {
        let k = self.basis.len();
        let n = self.len();
        let mut lp = LinearProgram::new(k).minimize(self.prices.iter().map(|p| -*p).collect()).all_free();
        for i in 0..n {
            lp.eq(self.basis.iter().map(|b| b.values()[i]).collect(), T::zero());
        }
        for j in 0..k {
            let mut e = vec![T::zero(); k];
            e[j] = T::one();
            lp.le(e.clone(), T::one());
            lp.ge(e, -T::one());
        }
        let scale = T::one() + self.prices.iter().fold(T::zero(), |m, p| m.max(p.abs()));
        match lp.solve()? {
            LpOutcome::Optimal { value, .. } if -value <= market_tol::<T>() * scale => Ok(()),
            LpOutcome::Optimal { .. } => Err(Error::invalid(
                "prices",
                "not linear on the span of the basis (a null portfolio has nonzero price, or F(1) ≠ 1)",
            )),
            _ => Err(Error::Degenerate("price consistency program failed".into())),
        }
    }

    fn check_no_arbitrage(&self) -> Result<()> {
        let v = self.min_price_of_bounded_nonnegative()?;
        if v < -market_tol::<T>() {
            return Err(Error::Arbitrage(format!(
                "a nonnegative traded claim bounded by 1 has price {v}"
            )));
        }
        Ok(())
    }

    /// `min F(X)` over `X ∈ M` with `0 ≤ X ≤ 1`; nonnegative iff there is
    /// no arbitrage.
    pub fn min_price_of_bounded_nonnegative(&self) -> Result<T> {
        let k = self.basis.len();
        let mut lp = LinearProgram::new(k).minimize(self.prices.clone()).all_free();
        for i in 0..self.len() {
            let row: Vec<T> = self.basis.iter().map(|b| b.values()[i]).collect();
            lp.ge(row.clone(), T::zero());
            lp.le(row, T::one());
        }
        match lp.solve()? {
            LpOutcome::Optimal { value, .. } => Ok(value),
            LpOutcome::Unbounded => Ok(T::neg_infinity()),
            LpOutcome::Infeasible => Err(Error::Degenerate("zero claim infeasible".into())),
        }
    }
}

/// `R_*(X) = inf{m : m + X₀ ≥ X for some X₀ ∈ M with F(X₀) = 0}` by linear
/// programming.
pub fn superhedge<T: Scalar>(mkt: &MarketModel<T>, x: &Claim<T>) -> Result<HedgeResult<T>> {
    let n = mkt.len();
    if x.len() != n {
        return Err(Error::Shape { expected: n, got: x.len() });
    }
    let k = mkt.basis.len();
    // variables (m, c_1 … c_k)
    let mut obj = vec![T::zero(); k + 1];
    obj[0] = T::one();
    let mut lp = LinearProgram::new(k + 1).minimize(obj).all_free();
    for i in 0..n {
        let mut row = vec![T::one()];
        row.extend(mkt.basis.iter().zip(&mkt.prices).map(|(b, f)| b.values()[i] - *f));
        lp.ge(row, x.values()[i]);
    }
    match lp.solve()? {
        LpOutcome::Optimal { x: sol, value } => {
            let portfolio = sol[1..].to_vec();
            let cost = mkt.price_of(&portfolio);
            let hedge = mkt.combine(&portfolio).shift(-cost);
            Ok(HedgeResult {
                price: value,
                portfolio,
                hedge,
            })
        }
        LpOutcome::Unbounded => Err(Error::Arbitrage("the superhedging program is unbounded".into())),
        LpOutcome::Infeasible => Err(Error::Degenerate("the superhedging program is infeasible".into())),
    }
}

/// `|E_Q(Bⱼ) − F(Bⱼ)| ≤ tol` for every basis element.
pub fn martingale_membership<T: Scalar>(mkt: &MarketModel<T>, q: &DiscreteMeasure<T>, tol: T) -> bool {
    q.len() == mkt.len()
        && mkt
            .basis
            .iter()
            .zip(&mkt.prices)
            .all(|(b, f)| (dot(q.weights(), b.values()) - *f).abs() <= tol)
}

/// The set `ℳ` of martingale measures as a vertex-enumerated polytope.
pub fn martingale_polytope<T: Scalar>(mkt: &MarketModel<T>) -> Result<SimplexPolytope<T>> {
    let mut hs = Vec::new();
    for (b, f) in mkt.basis.iter().zip(&mkt.prices) {
        hs.push((b.values().to_vec(), *f));
        hs.push((b.values().iter().map(|v| -*v).collect(), -*f));
    }
    SimplexPolytope::new(mkt.len(), hs)
}

/// One of the three statements, evaluated on samples.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct StatementCheck<T> {
    pub holds: bool,
    pub worst_violation: T,
    pub witness_claim: Option<Claim<T>>,
    pub witness_measure: Option<DiscreteMeasure<T>>,
}

impl<T: Scalar> StatementCheck<T> {
    fn new() -> Self {
        StatementCheck {
            holds: true,
            worst_violation: T::zero(),
            witness_claim: None,
            witness_measure: None,
        }
    }

    fn record(&mut self, violation: T, tol: T, claim: Option<&Claim<T>>, measure: Option<&DiscreteMeasure<T>>) {
        if violation > self.worst_violation {
            self.worst_violation = violation;
            if violation > tol {
                self.holds = false;
                self.witness_claim = claim.cloned();
                self.witness_measure = measure.cloned();
            }
        }
    }
}

/// Consistency of `H` with a market: (i) `R_Max = R_*`, (ii) every claim is
/// dominated by a traded claim priced at most `H(X)`, (iii) plausible and
/// martingale measures coincide. The statements are evaluated on a claim
/// sample, so the report is sample-based.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ConsistencyReport<T> {
    /// `H = F` on sampled traded claims.
    pub precondition_holds: bool,
    pub precondition_violation: T,
    pub r_max_is_superhedging: Option<StatementCheck<T>>,
    pub securitized: Option<StatementCheck<T>>,
    pub models_are_martingale: Option<StatementCheck<T>>,
    pub claims_tested: usize,
    pub sample_based: bool,
}

impl<T> ConsistencyReport<T> {
    /// All three statements evaluated and agreeing.
    pub fn agree(&self) -> bool {
        match (&self.r_max_is_superhedging, &self.securitized, &self.models_are_martingale) {
            (Some(a), Some(b), Some(c)) => a.holds == b.holds && b.holds == c.holds,
            _ => false,
        }
    }
}

/// Traded claims to test `H|_M = F` on: the basis and seeded combinations.
fn market_samples<T: Scalar>(mkt: &MarketModel<T>, count: usize, seed: u64) -> Vec<Vec<T>> {
    let k = mkt.basis.len();
    let mut out: Vec<Vec<T>> = (0..k)
        .flat_map(|j| {
            let mut e = vec![T::zero(); k];
            e[j] = T::one();
            let neg = e.iter().map(|v| -*v).collect();
            [e, neg]
        })
        .collect();
    out.extend(
        ClaimSampler::new(k, count, seed)
            .with_box(-T::lit(2.0), T::lit(2.0))
            .claims()
            .into_iter()
            .map(Claim::into_values),
    );
    out
}

pub fn consistency_check<T: Scalar>(
    h: &PremiumPrinciple<T>,
    mkt: &MarketModel<T>,
    cfg: &SolveConfig<T>,
    sampler: &ClaimSampler<T>,
    tol: T,
) -> Result<ConsistencyReport<T>> {
    let n = mkt.len();
    if h.len() != n || sampler.n != n {
        return Err(Error::Shape {
            expected: n,
            got: if h.len() != n { h.len() } else { sampler.n },
        });
    }
    if !(h.flags().sublinear && h.flags().convex) {
        return Err(Error::Precondition(format!(
            "market consistency is defined for sublinear principles; {} is not",
            h.kind().name()
        )));
    }
    let mut pre = T::zero();
    for c in market_samples(mkt, 100, sampler.seed) {
        let m = mkt.combine(&c);
        let f = mkt.price_of(&c);
        pre = pre.max((h.eval_slice(m.values()) - f).abs() / (T::one() + f.abs()));
    }
    let claims = sampler.claims();
    if pre > tol {
        return Ok(ConsistencyReport {
            precondition_holds: false,
            precondition_violation: pre,
            r_max_is_superhedging: None,
            securitized: None,
            models_are_martingale: None,
            claims_tested: 0,
            sample_based: true,
        });
    }

    let dec = Decomposer::new(h, *cfg);
    let mut s1 = StatementCheck::new();
    let mut s2 = StatementCheck::new();
    let mut extra = Vec::new();
    for x in &claims {
        let d = dec.decompose(x)?;
        let r_star = superhedge(mkt, x)?.price;
        s1.record((r_star - d.r_max).abs(), tol, Some(x), None);
        s2.record(r_star - d.premium, tol, Some(x), None);
        extra.push(d.optimizer);
    }
    // a gap R_Max(X) < R_*(X) shows up in (ii) at the minimizer for X
    for y in &extra {
        let r_star = superhedge(mkt, y)?.price;
        s2.record(r_star - h.eval_slice(y.values()), tol, Some(y), None);
    }

    // 𝒫 ⊆ ℳ iff R_Max(±Bⱼ) = ±F(Bⱼ); ℳ ⊆ 𝒫 is tested on the vertices of ℳ
    let mut s3 = StatementCheck::new();
    for (b, f) in mkt.basis.iter().zip(&mkt.prices) {
        for s in [T::one(), -T::one()] {
            let claim = b.scale(s);
            let d = dec.decompose(&claim)?;
            s3.record(d.r_max - s * *f, tol, Some(&claim), None);
        }
    }
    for q in martingale_members(mkt, sampler.seed)? {
        let (v, x, _) = conjugate_in_box(h, q.weights(), T::one(), cfg.tol, cfg.max_iter);
        s3.record(v, tol, Some(&Claim::from_vec_unchecked(x)), Some(&q));
    }
    Ok(ConsistencyReport {
        precondition_holds: true,
        precondition_violation: pre,
        r_max_is_superhedging: Some(s1),
        securitized: Some(s2),
        models_are_martingale: Some(s3),
        claims_tested: claims.len(),
        sample_based: true,
    })
}

/// Vertices of `ℳ` on small spaces, otherwise maximizers of random linear
/// objectives over `ℳ`.
fn martingale_members<T: Scalar>(mkt: &MarketModel<T>, seed: u64) -> Result<Vec<DiscreteMeasure<T>>> {
    let n = mkt.len();
    if n <= MAX_VERTEX_STATES {
        return Ok(martingale_polytope(mkt)?.vertices);
    }
    let mut out = Vec::new();
    for x in ClaimSampler::<T>::new(n, 200, seed).claims() {
        let mut lp = LinearProgram::new(n).minimize(x.values().iter().map(|v| -*v).collect());
        lp.eq(vec![T::one(); n], T::one());
        for (b, f) in mkt.basis.iter().zip(&mkt.prices) {
            lp.eq(b.values().to_vec(), *f);
        }
        if let LpOutcome::Optimal { x: q, .. } = lp.solve()? {
            out.push(DiscreteMeasure::normalized(q.into_iter().map(|v| v.max(T::zero())).collect())?);
        }
    }
    Ok(out)
}
