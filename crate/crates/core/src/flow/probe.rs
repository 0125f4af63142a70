use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{MappingTorusPoint, SuspensionFlow, DECK_WINDOW};
use crate::birkhoff::{separation_certificate, GridSpec};
use crate::error::{Error, Result};
use crate::field::{rational_string, CirclePoint, QuadElem, RotationParams};
use crate::tower::convergents;

/// What the probe samples.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeSpec {
    /// Cross-section pairs `(x, 0)`, `(x + r, 0)`, split evenly over the
    /// scale windows of `levels`.
    pub samples: usize,
    pub levels: Vec<usize>,
    /// Pairs `p`, `φ^τ(p)` on one orbit with `0 < τ < ε`.
    pub same_orbit: usize,
    pub seed: u64,
    pub search_depth: usize,
}

impl Default for ProbeSpec {
    fn default() -> Self {
        Self {
            samples: 1000,
            levels: vec![1, 2],
            same_orbit: 20,
            seed: 0,
            search_depth: 12,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbePair {
    pub id: usize,
    pub n: usize,
    pub x: QuadElem,
    pub r: QuadElem,
    /// Section return count `k` whose time separated the pair best.
    #[serde(with = "crate::serde_bigint")]
    pub k: BigInt,
    /// The witness time `T′^{(k)}(x)`.
    pub time: QuadElem,
    /// Quotient distance between the two flowed points at `time`.
    pub distance: QuadElem,
    pub separated: bool,
}

/// Probe summary. `δ(ε)` is relative to the deck-minimized product metric.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeResult {
    pub a: u64,
    pub big_n: usize,
    pub epsilon: String,
    /// Rational lower bound of `min(ε/3, δ_cert)`.
    pub delta: String,
    pub delta_approx: f64,
    /// Separation modulus certified for the same pairs on the section.
    pub delta_cert: QuadElem,
    pub seed: u64,
    pub sample_count: usize,
    pub separated_count: usize,
    pub same_orbit_count: usize,
    /// Same-orbit pairs whose distance stayed within `τ` at every tested
    /// time, as it must.
    pub same_orbit_within_shift: usize,
    pub worst: Option<ProbePair>,
    pub pairs: Vec<ProbePair>,
}

impl ProbeResult {
    pub fn all_separated(&self) -> bool {
        self.separated_count == self.sample_count
    }
}

/// A positive rational `≤ x`, with about four significant digits.
fn rational_below(x: &QuadElem) -> BigRational {
    let f = x.to_f64();
    let digits = (-f.log10()).ceil().max(0.0) as u32 + 4;
    let den = BigInt::from(10).pow(digits);
    let num = x.scale_int(&den).floor();
    BigRational::new(num, den)
}

/// Flows cross-section pairs forward to the return times singled out by the
/// separation certificate and measures their quotient distance.
pub fn expansiveness_probe(
    params: &RotationParams,
    big_n: usize,
    epsilon: &BigRational,
    spec: &ProbeSpec,
) -> Result<ProbeResult> {
    if !epsilon.is_positive() {
        return Err(Error::InvalidParameter("ε must be positive".into()));
    }
    if spec.levels.is_empty() || spec.samples == 0 {
        return Err(Error::InvalidParameter(
            "probe needs levels and samples".into(),
        ));
    }
    let flow = SuspensionFlow::new(params, big_n)?;
    let per_level = spec.samples.div_ceil(spec.levels.len());
    let grid = GridSpec {
        levels: spec.levels.clone(),
        pairs_per_level: per_level,
        seed: spec.seed,
        search_depth: spec.search_depth,
    };
    let cert = separation_certificate(params, &grid)?;
    let third = BigRational::new(1.into(), 3.into());
    let eps3 = epsilon * &third;
    let cap = params.rational(eps3.clone());
    let delta_q = cert.delta.clone().min_of(cap);
    let delta = if delta_q.is_positive() {
        rational_below(&delta_q)
    } else {
        BigRational::zero()
    };
    let delta_e = params.rational(delta.clone());
    let mut pairs = Vec::new();
    for outcome in cert.pairs.iter().take(spec.samples) {
        let x = CirclePoint::reduce(&outcome.x);
        let y = x.translate(&outcome.r);
        let conv = convergents(params, outcome.n + 1);
        let m = &conv[outcome.n + 1].q / 2;
        let q = outcome.q.clone().unwrap_or_default();
        let mut best: Option<ProbePair> = None;
        for k in [q.clone(), &m + &q] {
            let time = flow.roof_sum(&x, &k);
            let p1 = flow.flow_by(
                &MappingTorusPoint {
                    y: x.clone(),
                    s: params.zero(),
                },
                &time,
            );
            let p2 = flow.flow_by(
                &MappingTorusPoint {
                    y: y.clone(),
                    s: params.zero(),
                },
                &time,
            );
            let distance = flow.quotient_dist(&p1, &p2, DECK_WINDOW);
            if best.as_ref().map_or(true, |b| distance > b.distance) {
                best = Some(ProbePair {
                    id: outcome.id,
                    n: outcome.n,
                    x: outcome.x.clone(),
                    r: outcome.r.clone(),
                    k,
                    time,
                    separated: delta_e.is_positive() && distance > delta_e,
                    distance,
                });
            }
        }
        pairs.push(best.expect("two candidate times"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed ^ 0x5eed);
    let mut within = 0;
    for _ in 0..spec.same_orbit {
        let num: u64 = rng.gen_range(0..1u64 << 30);
        let x = CirclePoint::reduce(
            &params.rational(BigRational::new(num.into(), (1u64 << 30).into())),
        );
        let tau = epsilon * BigRational::new(rng.gen_range(1..1000u32).into(), 1000.into());
        let p = MappingTorusPoint {
            y: x,
            s: params.zero(),
        };
        let p_tau = flow.flow(&p, &tau);
        let tau_e = params.rational(tau.clone());
        let ok = [0i64, 1, 7, 1000].iter().all(|&k| {
            let t = flow.roof_sum(&p.y, &BigInt::from(k));
            let d = flow.quotient_dist(
                &flow.flow_by(&p, &t),
                &flow.flow_by(&p_tau, &t),
                DECK_WINDOW,
            );
            d <= tau_e
        });
        if ok {
            within += 1;
        }
    }
    let separated_count = pairs.iter().filter(|p| p.separated).count();
    let worst = pairs
        .iter()
        .min_by(|a, b| a.distance.cmp_exact(&b.distance))
        .cloned();
    Ok(ProbeResult {
        a: params.a(),
        big_n,
        epsilon: rational_string(epsilon),
        delta_approx: num_traits::ToPrimitive::to_f64(&delta).unwrap_or(0.0),
        delta: rational_string(&delta),
        delta_cert: cert.delta,
        seed: spec.seed,
        sample_count: pairs.len(),
        separated_count,
        same_orbit_count: spec.same_orbit,
        same_orbit_within_shift: within,
        worst,
        pairs,
    })
}
