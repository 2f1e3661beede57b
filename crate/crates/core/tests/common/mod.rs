#![allow(dead_code)]

use premia::{Claim, DiscreteMeasure, Distortion, PremiumPrinciple, PrincipleConfig, PrincipleKind, ScalarFn, StateSpace};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Baseline with weights proportional to 1, 2, …, n.
pub fn ramp(n: usize) -> DiscreteMeasure<f64> {
    DiscreteMeasure::normalized((1..=n).map(|i| i as f64).collect()).unwrap()
}

/// One configured member per principle kind (two for the kinds whose
/// convexity depends on parameters), labelled for messages.
pub fn catalog(n: usize) -> Vec<(String, PremiumPrinciple<f64>)> {
    let p = ramp(n);
    let u = DiscreteMeasure::<f64>::uniform(n);
    let models = vec![p.clone(), u.clone()];
    let z = Claim::new((0..n).map(|i| i as f64 / n as f64).collect()).unwrap();
    let cfgs = vec![
        ("fair", PrincipleConfig::fair(p.clone())),
        ("variance", PrincipleConfig::variance(p.clone(), 2.0)),
        ("stdDev", PrincipleConfig::std_dev(p.clone(), 0.7)),
        ("meanAbsDev", PrincipleConfig::mean_abs_dev(p.clone(), 0.8)),
        ("lpDeviation", PrincipleConfig::lp_deviation(p.clone(), 0.6, 3.0)),
        (
            "economic",
            PrincipleConfig::new(PrincipleKind::Economic)
                .with_baseline(p.clone())
                .with_loss(ScalarFn::Exponential { rate: 0.5 })
                .with_endowment(z),
        ),
        (
            "robustVariance",
            PrincipleConfig::new(PrincipleKind::RobustVariance)
                .with_models(models.clone())
                .with_theta(1.0),
        ),
        (
            "maxminLinear",
            PrincipleConfig::new(PrincipleKind::MaxminExpectedLoss)
                .with_models(models.clone())
                .with_loss(ScalarFn::Linear { slope: 1.5 }),
        ),
        (
            "maxminExponential",
            PrincipleConfig::new(PrincipleKind::MaxminExpectedLoss)
                .with_models(models.clone())
                .with_loss(ScalarFn::Exponential { rate: 1.0 }),
        ),
        (
            "smoothLinear",
            PrincipleConfig::new(PrincipleKind::SmoothAmbiguity)
                .with_models(models.clone())
                .with_loss(ScalarFn::Identity)
                .with_ambiguity(ScalarFn::Linear { slope: 1.2 }),
        ),
        (
            "smoothConcave",
            PrincipleConfig::new(PrincipleKind::SmoothAmbiguity)
                .with_models(models.clone())
                .with_loss(ScalarFn::Power { scale: 1.0, exponent: 2.0 })
                .with_ambiguity(ScalarFn::Power { scale: 1.0, exponent: 0.5 }),
        ),
        (
            "ambiguityIndex",
            PrincipleConfig::new(PrincipleKind::AmbiguityIndex)
                .with_baseline(u.clone())
                .with_models(models)
                .with_theta(1.5),
        ),
        ("quantile", PrincipleConfig::quantile(p.clone(), 0.3)),
        ("avar", PrincipleConfig::avar(p.clone(), 0.3)),
        ("absoluteDeviation", PrincipleConfig::absolute_deviation(p.clone(), 2.0)),
        ("choquetConcave", PrincipleConfig::choquet(p.clone(), Distortion::ProportionalHazard { rho: 2.0 })),
        ("choquetConvex", PrincipleConfig::choquet(p, Distortion::Power { exponent: 2.0 })),
        ("worstCase", PrincipleConfig::worst_case()),
    ];
    let sp = StateSpace::new(n).unwrap();
    cfgs.into_iter()
        .map(|(name, c)| (name.to_string(), PremiumPrinciple::build(c, &sp).unwrap()))
        .collect()
}

pub fn convex_catalog(n: usize) -> Vec<(String, PremiumPrinciple<f64>)> {
    catalog(n).into_iter().filter(|(_, h)| h.flags().convex).collect()
}

pub fn random_claims(n: usize, count: usize, lo: f64, hi: f64, seed: u64) -> Vec<Claim<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| Claim::new((0..n).map(|_| rng.gen_range(lo..hi)).collect()).unwrap())
        .collect()
}

/// Flat Dirichlet draws.
pub fn random_measures(n: usize, count: usize, seed: u64) -> Vec<DiscreteMeasure<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let w: Vec<f64> = (0..n).map(|_| -(1.0 - rng.gen::<f64>()).ln()).collect();
            DiscreteMeasure::normalized(w).unwrap()
        })
        .collect()
}

/// `∫_{1−ε}^1 q_X(s) ds / ε` by sorting, written out independently of the
/// library's statistics.
pub fn tail_mean(p: &[f64], x: &[f64], eps: f64) -> f64 {
    let mut idx: Vec<usize> = (0..x.len()).collect();
    idx.sort_by(|&a, &b| x[b].partial_cmp(&x[a]).unwrap());
    let mut left = eps;
    let mut acc = 0.0;
    for i in idx {
        let take = p[i].min(left);
        acc += take * x[i];
        left -= take;
        if left <= 0.0 {
            break;
        }
    }
    acc / eps
}

/// Vertices of `{Q : a ≤ dQ/dP ≤ b}`: all densities but one sit at a bound
/// and the remaining one is fixed by normalization.
pub fn band_vertices(p: &[f64], a: f64, b: f64) -> Vec<DiscreteMeasure<f64>> {
    let n = p.len();
    let mut out: Vec<Vec<f64>> = Vec::new();
    for k in 0..n {
        for mask in 0..(1u32 << (n - 1)) {
            let mut d = vec![0.0; n];
            let mut bit = 0;
            let mut mass = 0.0;
            for i in (0..n).filter(|&i| i != k) {
                d[i] = if (mask >> bit) & 1 == 1 { b } else { a };
                bit += 1;
                mass += p[i] * d[i];
            }
            d[k] = (1.0 - mass) / p[k];
            if d[k] < a - 1e-12 || d[k] > b + 1e-12 {
                continue;
            }
            let q: Vec<f64> = d.iter().zip(p).map(|(d, p)| (d * p).max(0.0)).collect();
            if !out.iter().any(|v| same_point(v, &q, 1e-9)) {
                out.push(q);
            }
        }
    }
    out.into_iter().map(|q| DiscreteMeasure::normalized(q).unwrap()).collect()
}

pub fn same_point(a: &[f64], b: &[f64], tol: f64) -> bool {
    a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
}

/// Two finite point sets coincide up to `tol`.
pub fn same_vertex_set(a: &[DiscreteMeasure<f64>], b: &[DiscreteMeasure<f64>], tol: f64) -> bool {
    let covers = |u: &[DiscreteMeasure<f64>], v: &[DiscreteMeasure<f64>]| {
        u.iter().all(|q| v.iter().any(|r| same_point(q.weights(), r.weights(), tol)))
    };
    covers(a, b) && covers(b, a)
}
