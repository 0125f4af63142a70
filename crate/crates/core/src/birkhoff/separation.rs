use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::Signed;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{CirclePoint, QuadElem, RotationParams};
use crate::return_time::LayeredReturnTime;
use crate::tower::{convergents, Side, TowerGeometry};

/// Deepest level considered when matching a scale `r` to a window.
const MAX_WINDOW_LEVEL: usize = 400;

/// The level `n ≥ 1` with `|q_{n+1}·α|/2 ≤ r ≤ |q_n·α|/2`; `None` when
/// `r ≤ 0` or `r > |q_1·α|/2`.
pub fn window_level(params: &RotationParams, r: &QuadElem) -> Option<usize> {
    if !r.is_positive() {
        return None;
    }
    let half = BigRational::new(1.into(), 2.into());
    let conv = convergents(params, MAX_WINDOW_LEVEL + 1);
    let w = |n: usize| conv[n].offset(params).abs().scale(&half);
    if *r > w(1) {
        return None;
    }
    (1..=MAX_WINDOW_LEVEL).find(|&n| *r >= w(n + 1))
}

/// The window level `n`, `m = ⌊q_{n+1}/2⌋` and the base point `x_r` of the
/// model pair `(x_r, x_r + r)`, a translate of `(0, x)` with `x ∈ J_n`.
fn model_pair(params: &RotationParams, r: &QuadElem) -> Result<(usize, BigInt, QuadElem)> {
    let n = window_level(params, r).ok_or_else(|| {
        Error::InvalidParameter(format!("r = {r} lies outside the covered windows"))
    })?;
    let conv = convergents(params, n + 1);
    let m = conv[n + 1].q.div_floor(&BigInt::from(2));
    let x_r = match Side::of(&conv[n].offset(params)) {
        Side::Right => params.zero(),
        Side::Left => -r,
    };
    Ok((n, m, x_r))
}

/// Truncated return times by level, built on demand.
struct Truncations {
    params: RotationParams,
    cache: BTreeMap<usize, LayeredReturnTime>,
}

impl Truncations {
    fn new(params: &RotationParams) -> Self {
        Self {
            params: params.clone(),
            cache: BTreeMap::new(),
        }
    }

    fn get(&mut self, big_n: usize) -> &LayeredReturnTime {
        self.cache
            .entry(big_n)
            .or_insert_with(|| LayeredReturnTime::truncated(&self.params, big_n).expect("N ≥ 1"))
    }

    /// `|T_{≤N}^{(k)}(y + r) − T_{≤N}^{(k)}(y)|` minus the certified
    /// `2k·tail`, with `N ≥ base` raised until the tail is below `budget`.
    fn separation(
        &mut self,
        y: &CirclePoint,
        r: &QuadElem,
        k: &BigInt,
        base: usize,
        budget: Option<&QuadElem>,
    ) -> (QuadElem, QuadElem, usize) {
        let mut big_n = base;
        loop {
            let f = self.get(big_n);
            let tail = f.tail_bound().scale_int(&(k.abs() * 2));
            let within = budget.map_or(true, |b| tail < *b);
            if within || big_n >= base + 40 {
                let d = f.birkhoff_fast(&y.translate(r), k) - f.birkhoff_fast(y, k);
                return (d.abs(), tail, big_n);
            }
            big_n += 1;
        }
    }
}

/// Outcome of transporting the model separation at `(x_r, x_r + r)` to
/// the pair `(x, x + r)` along the orbit of `x`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Lemma1Result {
    pub a: u64,
    pub x: QuadElem,
    pub r: QuadElem,
    pub n: usize,
    /// `m = ⌊q_{n+1}/2⌋`.
    #[serde(with = "crate::serde_bigint")]
    pub m: BigInt,
    /// Base point `x_r` of the model pair.
    pub x_r: QuadElem,
    /// Witness `q` with `R^q(x)` near `x_r` (the best one found when the
    /// search fails).
    #[serde(with = "crate::serde_bigint")]
    pub q: BigInt,
    /// Tower level whose localization produced `q`.
    pub level: usize,
    /// `|T^{(q)}(x + r) − T^{(q)}(x)|` and the same at `m + q`.
    pub d_q: QuadElem,
    pub d_mq: QuadElem,
    /// Larger of the two after subtracting certified tails.
    pub separation: QuadElem,
    pub delta: QuadElem,
    pub holds: bool,
}

/// Searches levels `n + 3 ..= search_depth` for a return of `x` near `x_r`
/// and checks that `T^{(q)}` or `T^{(m+q)}` separates `x` from `x + r` by
/// more than `delta`.
pub fn lemma1_scan(
    params: &RotationParams,
    x: &CirclePoint,
    r: &QuadElem,
    delta: &QuadElem,
    search_depth: usize,
) -> Result<Lemma1Result> {
    lemma1_with(&mut Truncations::new(params), x, r, delta, search_depth)
}

fn lemma1_with(
    tr: &mut Truncations,
    x: &CirclePoint,
    r: &QuadElem,
    delta: &QuadElem,
    search_depth: usize,
) -> Result<Lemma1Result> {
    let params = tr.params.clone();
    let (n, m, x_r) = model_pair(&params, r)?;
    let target = CirclePoint::reduce(&(&x_r - x.value()));
    let geometry = TowerGeometry::new(&params, search_depth.max(n + 3));
    let budget = delta.scale(&BigRational::new(1.into(), 4.into()));
    let mut best: Option<(BigInt, usize, QuadElem, QuadElem, QuadElem)> = None;
    for level in n + 3..=search_depth.max(n + 3) {
        let q = geometry.locate_at(&target, level).floor;
        let mq = &m + &q;
        let (dq, tq, _) = tr.separation(x, r, &q, n + 4, Some(&budget));
        let (dmq, tmq, _) = tr.separation(x, r, &mq, n + 4, Some(&budget));
        let sep = (&dq - &tq).max_of(&dmq - &tmq);
        let better = best.as_ref().map_or(true, |b| sep > b.4);
        if better {
            best = Some((q, level, dq, dmq, sep.clone()));
        }
        if sep > *delta {
            break;
        }
    }
    let (q, level, dq, dmq, sep) = best.expect("at least one level");
    let holds = sep > *delta;
    Ok(Lemma1Result {
        a: params.a(),
        x: x.value().clone(),
        r: r.clone(),
        n,
        m,
        x_r,
        q,
        level,
        d_q: dq,
        d_mq: dmq,
        separation: sep,
        delta: delta.clone(),
        holds,
    })
}

/// Pairs `(x, x + r)` for the certificate: `pairs_per_level` scales `r`
/// spread evenly over each window (ends included), the first with `x = 0`
/// and the rest with seeded random `x`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub levels: Vec<usize>,
    pub pairs_per_level: usize,
    pub seed: u64,
    /// Deepest tower level searched for returns near `x_r`.
    pub search_depth: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            levels: vec![1, 2],
            pairs_per_level: 50,
            seed: 0,
            search_depth: 12,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairOutcome {
    pub id: usize,
    /// Window level of `r`; an end shared by two windows goes to the lower
    /// level.
    pub n: usize,
    pub x: QuadElem,
    pub r: QuadElem,
    /// Certified `|T^{(m)}(x_r + r) − T^{(m)}(x_r)|`.
    pub base_margin: QuadElem,
    #[serde(with = "crate::serde_option_bigint")]
    pub q: Option<BigInt>,
    pub separation: Option<QuadElem>,
    /// `separation − δ`.
    pub margin: Option<QuadElem>,
    pub separated: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeparationCertificate {
    pub a: u64,
    pub delta: QuadElem,
    /// `3⁻¹·200⁻¹·c⁻¹`, the form of the bound `δ` is capped by.
    pub delta_cap: QuadElem,
    pub grid: GridSpec,
    pub min_base_margin: QuadElem,
    pub pairs: Vec<PairOutcome>,
    pub worst: Option<usize>,
    pub holds: bool,
}

fn grid_pairs(params: &RotationParams, grid: &GridSpec) -> Vec<(usize, CirclePoint, QuadElem)> {
    let half = BigRational::new(1.into(), 2.into());
    let top = grid.levels.iter().copied().max().unwrap_or(1) + 1;
    let conv = convergents(params, top);
    let mut rng = ChaCha8Rng::seed_from_u64(grid.seed);
    let mut out = Vec::new();
    for &n in &grid.levels {
        let hi = conv[n].offset(params).abs().scale(&half);
        let lo = conv[n + 1].offset(params).abs().scale(&half);
        let span = &hi - &lo;
        let count = grid.pairs_per_level.max(1);
        for k in 0..count {
            let t = if count == 1 {
                BigRational::new(1.into(), 2.into())
            } else {
                BigRational::new(k.into(), (count - 1).into())
            };
            let r = &lo + span.scale(&t);
            let x = if k == 0 {
                CirclePoint::zero(params.a())
            } else {
                let num: u64 = rng.gen_range(0..1u64 << 30);
                CirclePoint::reduce(
                    &params.rational(BigRational::new(num.into(), (1u64 << 30).into())),
                )
            };
            out.push((n, x, r));
        }
    }
    out
}

/// Certifies separation on a grid of pairs. `δ` is a third of the smallest
/// model margin (capped by `200⁻¹c⁻¹`), and every pair must be pushed more
/// than `δ` apart by some tested return time.
pub fn separation_certificate(
    params: &RotationParams,
    grid: &GridSpec,
) -> Result<SeparationCertificate> {
    if grid.levels.iter().any(|&n| n == 0) {
        return Err(Error::InvalidParameter("grid levels must be ≥ 1".into()));
    }
    let pairs = grid_pairs(params, grid);
    let mut tr = Truncations::new(params);
    let third = BigRational::new(1.into(), 3.into());
    let cap200 = params
        .alpha()
        .scale(&BigRational::new(1.into(), 200.into()));
    let mut bases = Vec::with_capacity(pairs.len());
    for (_, _, r) in &pairs {
        let (n, m, x_r) = model_pair(params, r)?;
        let (d, tail, _) = tr.separation(&CirclePoint::reduce(&x_r), r, &m, n + 4, None);
        bases.push((n, d - tail));
    }
    let min_base = bases
        .iter()
        .map(|b| b.1.clone())
        .reduce(QuadElem::min_of)
        .unwrap_or_else(|| params.zero());
    let delta = min_base.clone().min_of(cap200.clone()).scale(&third);
    let mut outcomes = Vec::with_capacity(pairs.len());
    for (id, ((_, x, r), (n, base))) in pairs.into_iter().zip(bases).enumerate() {
        let (q, separation, margin, separated) = if delta.is_positive() {
            let res = lemma1_with(&mut tr, &x, &r, &delta, grid.search_depth)?;
            let margin = &res.separation - &delta;
            (Some(res.q), Some(res.separation), Some(margin), res.holds)
        } else {
            (None, None, None, false)
        };
        outcomes.push(PairOutcome {
            id,
            n,
            x: x.into_value(),
            r,
            base_margin: base,
            q,
            separation,
            margin,
            separated,
        });
    }
    let worst = outcomes
        .iter()
        .filter_map(|o| o.margin.as_ref().map(|m| (o.id, m)))
        .reduce(|a, b| if b.1 < a.1 { b } else { a })
        .map(|(id, _)| id);
    let holds = delta.is_positive() && outcomes.iter().all(|o| o.separated);
    Ok(SeparationCertificate {
        a: params.a(),
        delta,
        delta_cap: cap200.scale(&third),
        grid: grid.clone(),
        min_base_margin: min_base,
        pairs: outcomes,
        worst,
        holds,
    })
}
