use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::PremiumPrinciple;
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::space::Claim;

/// Draws test claims: deterministic corner cases followed by uniform
/// random claims in `[lo, hi]ⁿ`.
#[derive(Debug, Clone, PartialEq)]
pub struct ClaimSampler<T> {
    pub n: usize,
    pub count: usize,
    pub lo: T,
    pub hi: T,
    pub seed: u64,
}

impl<T: Scalar> ClaimSampler<T> {
    /// Uniform entries in `[−1, 1]`.
    pub fn new(n: usize, count: usize, seed: u64) -> Self {
        ClaimSampler {
            n,
            count,
            lo: -T::one(),
            hi: T::one(),
            seed,
        }
    }

    pub fn with_box(mut self, lo: T, hi: T) -> Self {
        self.lo = lo;
        self.hi = hi;
        self
    }

    /// The zero claim, constants, indicators of single states and of their
    /// complements, then random claims up to `count` in total.
    pub fn claims(&self) -> Vec<Claim<T>> {
        let n = self.n;
        let mut out = vec![Claim::zero(n)];
        for c in [self.lo, self.hi, T::one(), -T::one()] {
            out.push(Claim::constant(n, c));
        }
        let full = if n >= 64 { u64::MAX } else { (1u64 << n) - 1 };
        for i in 0..n.min(63) {
            let m = 1u64 << i;
            for mask in [m, full & !m] {
                if mask != 0 && mask != full {
                    let ind = Claim::indicator(n, mask);
                    out.push(ind.scale(self.hi));
                    out.push(ind.scale(self.lo));
                }
            }
        }
        out.truncate(self.count.max(1));
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        while out.len() < self.count {
            out.push(self.random_claim(&mut rng));
        }
        out
    }

    fn random_claim(&self, rng: &mut ChaCha8Rng) -> Claim<T> {
        let (lo, hi) = (self.lo.to_f64_lossy(), self.hi.to_f64_lossy());
        Claim::from_vec_unchecked((0..self.n).map(|_| T::lit(rng.gen_range(lo..=hi))).collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Axiom {
    /// Cash additivity `H(X + m) = H(X) + m`.
    P1,
    /// `H(X) ≥ 0` for `X ≥ 0`, and `H(0) = 0`.
    P2,
    Convexity,
    PositiveHomogeneity,
    Monotonicity,
    /// `H(X) ≤ 0` for `X ≤ 0`.
    Internality,
    /// `H(X) ≤ sup X`.
    NoRipoff,
}

impl Axiom {
    pub const ALL: [Axiom; 7] = [
        Axiom::P1,
        Axiom::P2,
        Axiom::Convexity,
        Axiom::PositiveHomogeneity,
        Axiom::Monotonicity,
        Axiom::Internality,
        Axiom::NoRipoff,
    ];
}

/// The claims (and scalar, if any) on which an axiom failed.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Witness<T> {
    pub claims: Vec<Claim<T>>,
    pub scalar: Option<T>,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AxiomOutcome<T> {
    pub axiom: Axiom,
    pub passed: bool,
    /// Largest scaled violation seen (≤ 0 means none).
    pub worst_violation: T,
    pub checks: usize,
    pub witness: Option<Witness<T>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AxiomReport<T> {
    pub outcomes: Vec<AxiomOutcome<T>>,
    pub samples: usize,
    pub note: String,
}

impl<T: Scalar> AxiomReport<T> {
    pub fn outcome(&self, axiom: Axiom) -> &AxiomOutcome<T> {
        self.outcomes
            .iter()
            .find(|o| o.axiom == axiom)
            .expect("every axiom is checked")
    }

    pub fn passed(&self, axiom: Axiom) -> bool {
        self.outcome(axiom).passed
    }

    pub fn all_passed(&self) -> bool {
        self.outcomes.iter().all(|o| o.passed)
    }
}

struct Tracker<T> {
    axiom: Axiom,
    tol: T,
    worst: T,
    checks: usize,
    witness: Option<Witness<T>>,
}

impl<T: Scalar> Tracker<T> {
    fn new(axiom: Axiom, tol: T) -> Self {
        Tracker {
            axiom,
            tol,
            worst: T::neg_infinity(),
            checks: 0,
            witness: None,
        }
    }

    /// Records a violation amount `v` (positive = violated) with the
    /// magnitude `scale` of the quantities compared.
    fn record(&mut self, v: T, scale: T, witness: impl FnOnce() -> Witness<T>) {
        self.checks += 1;
        let scaled = v / (T::one() + scale.abs());
        if scaled > self.worst {
            self.worst = scaled;
            if scaled > self.tol {
                self.witness = Some(witness());
            }
        }
    }

    fn finish(self) -> AxiomOutcome<T> {
        AxiomOutcome {
            axiom: self.axiom,
            passed: self.witness.is_none(),
            worst_violation: self.worst,
            checks: self.checks,
            witness: self.witness,
        }
    }
}

/// Samples claims and tests each axiom. Failures are reported as witnesses;
/// a pass only means no counterexample was found among the samples.
pub fn check_axioms<T: Scalar>(
    h: &PremiumPrinciple<T>,
    sampler: &ClaimSampler<T>,
    tol: T,
) -> Result<AxiomReport<T>> {
    if sampler.count < 100 {
        return Err(Error::Precondition(format!(
            "the axiom checker needs at least 100 samples, got {}",
            sampler.count
        )));
    }
    if sampler.n != h.len() {
        return Err(Error::Shape {
            expected: h.len(),
            got: sampler.n,
        });
    }
    if !(sampler.lo < sampler.hi) {
        return Err(Error::invalid("sampler", "box must satisfy lo < hi"));
    }
    let claims = sampler.claims();
    let values: Vec<T> = claims.iter().map(|x| h.eval_slice(x.values())).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(sampler.seed ^ 0x5eed_a110);
    let span = sampler.hi.abs().max(sampler.lo.abs()).max(T::one()).to_f64_lossy();
    let n = h.len();
    let eval = |x: &Claim<T>| h.eval_slice(x.values());
    let zero = Claim::zero(n);
    let h0 = eval(&zero);

    let mut p1 = Tracker::new(Axiom::P1, tol);
    let mut p2 = Tracker::new(Axiom::P2, tol);
    let mut convex = Tracker::new(Axiom::Convexity, tol);
    let mut homog = Tracker::new(Axiom::PositiveHomogeneity, tol);
    let mut mono = Tracker::new(Axiom::Monotonicity, tol);
    let mut internal = Tracker::new(Axiom::Internality, tol);
    let mut ripoff = Tracker::new(Axiom::NoRipoff, tol);

    let zero_witness = || Witness {
        claims: vec![Claim::zero(n)],
        scalar: None,
        detail: format!("H(0) = {h0}"),
    };
    p2.record(h0.abs(), T::zero(), zero_witness);
    internal.record(h0, T::zero(), zero_witness);

    let scales = [T::one(), T::lit(10.0), T::lit(100.0)];
    for (k, x) in claims.iter().enumerate() {
        let hx = values[k];
        let y = &claims[(k + 1) % claims.len()];
        let hy = values[(k + 1) % claims.len()];

        let m = T::lit(rng.gen_range(-2.0 * span..=2.0 * span));
        let hxm = eval(&x.shift(m));
        p1.record((hxm - hx - m).abs(), hx.abs() + m.abs(), || Witness {
            claims: vec![x.clone()],
            scalar: Some(m),
            detail: format!("H(X+m) = {hxm}, H(X) + m = {}", hx + m),
        });

        let ax = x.map(|v| v.abs());
        let hax = eval(&ax);
        p2.record(-hax, hax, || Witness {
            claims: vec![ax.clone()],
            scalar: None,
            detail: format!("H(X) = {hax} < 0 for X ≥ 0"),
        });

        let lambda = T::lit(rng.gen_range(0.05..0.95));
        let z = x.zip_with(y, |a, b| lambda * a + (T::one() - lambda) * b);
        let hz = eval(&z);
        let rhs = lambda * hx + (T::one() - lambda) * hy;
        convex.record(hz - rhs, rhs.abs() + hz.abs(), || Witness {
            claims: vec![x.clone(), y.clone()],
            scalar: Some(lambda),
            detail: format!("H(λX+(1−λ)Y) = {hz} > λH(X)+(1−λ)H(Y) = {rhs}"),
        });

        let a = T::lit(rng.gen_range(0.1..3.0));
        let hax = eval(&x.scale(a));
        homog.record((hax - a * hx).abs(), hax.abs() + (a * hx).abs(), || Witness {
            claims: vec![x.clone()],
            scalar: Some(a),
            detail: format!("H(aX) = {hax}, aH(X) = {}", a * hx),
        });

        let s = scales[k % scales.len()];
        let bump = Claim::from_vec_unchecked((0..n).map(|_| s * T::lit(rng.gen_range(0.0..1.0))).collect());
        let up = x + &bump;
        let hup = eval(&up);
        mono.record(hx - hup, hx.abs() + hup.abs(), || Witness {
            claims: vec![x.clone(), up.clone()],
            scalar: None,
            detail: format!("X ≤ Y but H(X) = {hx} > H(Y) = {hup}"),
        });
        let mx = x.zip_with(y, T::max);
        let hmx = eval(&mx);
        mono.record(hx - hmx, hx.abs() + hmx.abs(), || Witness {
            claims: vec![x.clone(), mx.clone()],
            scalar: None,
            detail: format!("X ≤ Y but H(X) = {hx} > H(Y) = {hmx}"),
        });

        let neg = x.map(|v| -s * v.abs());
        let hneg = eval(&neg);
        mono.record(hneg - h0, hneg.abs(), || Witness {
            claims: vec![neg.clone(), zero.clone()],
            scalar: None,
            detail: format!("X ≤ 0 but H(X) = {hneg} > H(0) = {h0}"),
        });
        internal.record(hneg, hneg.abs(), || Witness {
            claims: vec![neg.clone()],
            scalar: None,
            detail: format!("X ≤ 0 but H(X) = {hneg} > 0"),
        });

        let sup = x.sup();
        ripoff.record(hx - sup, hx.abs() + sup.abs(), || Witness {
            claims: vec![x.clone()],
            scalar: None,
            detail: format!("H(X) = {hx} > sup X = {sup}"),
        });
    }

    Ok(AxiomReport {
        outcomes: vec![
            p1.finish(),
            p2.finish(),
            convex.finish(),
            homog.finish(),
            mono.finish(),
            internal.finish(),
            ripoff.finish(),
        ],
        samples: claims.len(),
        note: "sampling-based: a pass means no counterexample was found, not a proof".into(),
    })
}
