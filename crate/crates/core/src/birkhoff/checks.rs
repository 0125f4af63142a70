use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use super::{AssumptionContext, Evaluator};
use crate::error::{guard, Error, Result};
use crate::field::{alpha_f64, circle_norm, QuadElem, RotationParams};
use crate::return_time::{chi, CircleFunction, LayeredReturnTime, TnSpec};
use crate::tower::{convergents, interval_in, TowerGeometry};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PropId {
    P2,
    P3,
    P4,
    C5,
    P6,
    P7,
    Main,
}

impl fmt::Display for PropId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            PropId::P2 => "p2",
            PropId::P3 => "p3",
            PropId::P4 => "p4",
            PropId::C5 => "c5",
            PropId::P6 => "p6",
            PropId::P7 => "p7",
            PropId::Main => "main",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Pass,
    Fail,
    /// The inequality fails at an `a` where the constant budget
    /// `100⁻¹c⁻¹ > 9c⁻²` does not close.
    OutOfRegime,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::OutOfRegime => "out-of-regime",
        })
    }
}

/// One exact comparison inside a check. Structural checks are identities
/// that hold for every `a`; the others are estimates whose failure below
/// the budget threshold is reported as out-of-regime.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubCheck {
    pub name: String,
    pub lhs: QuadElem,
    pub rhs: QuadElem,
    pub margin: QuadElem,
    pub holds: bool,
    pub structural: bool,
}

impl SubCheck {
    fn equal(name: impl Into<String>, lhs: QuadElem, rhs: QuadElem) -> Self {
        let margin = -(&lhs - &rhs).abs();
        Self {
            name: name.into(),
            holds: margin.is_zero(),
            lhs,
            rhs,
            margin,
            structural: true,
        }
    }

    /// `lhs ≤ rhs` (or `<` when `strict`).
    fn at_most(name: impl Into<String>, lhs: QuadElem, rhs: QuadElem, strict: bool) -> Self {
        let margin = &rhs - &lhs;
        let holds = if strict {
            margin.is_positive()
        } else {
            !margin.is_negative()
        };
        Self {
            name: name.into(),
            lhs,
            rhs,
            margin,
            holds,
            structural: true,
        }
    }

    fn estimate(mut self) -> Self {
        self.structural = false;
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PropCheckResult {
    pub id: PropId,
    pub a: u64,
    pub n: usize,
    pub sample: String,
    pub x: QuadElem,
    #[serde(with = "crate::serde_bigint")]
    pub i: BigInt,
    pub big_n: usize,
    pub lhs: QuadElem,
    pub rhs: QuadElem,
    pub margin: QuadElem,
    pub verdict: Verdict,
    pub evaluator: Evaluator,
    pub checks: Vec<SubCheck>,
}

impl PropCheckResult {
    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    pub fn check(&self, name: &str) -> Option<&SubCheck> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// True when `100⁻¹c⁻¹ > 9c⁻²`, i.e. `c > 900`.
pub fn budget_closes(params: &RotationParams) -> bool {
    params
        .c()
        .add_rational(&BigRational::from_integer((-900).into()))
        .is_positive()
}

fn verdict(params: &RotationParams, checks: &[SubCheck]) -> Verdict {
    if checks.iter().any(|c| c.structural && !c.holds) {
        return Verdict::Fail;
    }
    if checks.iter().all(|c| c.holds) {
        Verdict::Pass
    } else if budget_closes(params) {
        Verdict::Fail
    } else {
        Verdict::OutOfRegime
    }
}

/// Per-layer Birkhoff sums `T_ν^{(i)}(x)` and `T_ν^{(i)}(0)` for
/// `ν = 1..=N` at one context, shared by all checks.
#[derive(Clone, Debug)]
pub struct ContextSums {
    pub ctx: AssumptionContext,
    pub big_n: usize,
    pub evaluator: Evaluator,
    at_x: Vec<QuadElem>,
    at_zero: Vec<QuadElem>,
    /// Fast-evaluator sums compared with naive ones on a prefix orbit.
    pub spot_check: Option<bool>,
    layered: LayeredReturnTime,
}

impl ContextSums {
    pub fn params(&self) -> &RotationParams {
        self.layered.params()
    }

    pub fn geometry(&self) -> &TowerGeometry {
        self.layered.geometry()
    }

    pub fn at_x(&self, nu: usize) -> &QuadElem {
        &self.at_x[nu - 1]
    }

    pub fn at_zero(&self, nu: usize) -> &QuadElem {
        &self.at_zero[nu - 1]
    }

    /// `T_ν^{(i)}(x) − T_ν^{(i)}(0)`; `0` for `ν = 0`, which is not part
    /// of the series.
    pub fn diff(&self, nu: usize) -> QuadElem {
        if nu == 0 {
            return self.params().zero();
        }
        self.at_x(nu) - self.at_zero(nu)
    }

    /// `Σ_{ν∈range} diff(ν)`.
    pub fn diff_sum(&self, range: impl Iterator<Item = usize>) -> QuadElem {
        range.fold(self.params().zero(), |acc, nu| acc + self.diff(nu))
    }

    /// `2i·tail_bound(N)`, covering the omitted layers in a difference of
    /// two sums.
    pub fn tail(&self) -> QuadElem {
        self.layered.tail_bound().scale_int(&(&self.ctx.i * 2))
    }

    fn result(
        &self,
        id: PropId,
        lhs: QuadElem,
        rhs: QuadElem,
        margin: QuadElem,
        mut checks: Vec<SubCheck>,
    ) -> PropCheckResult {
        if let Some(ok) = self.spot_check {
            let zero = self.params().zero();
            checks.push(SubCheck {
                name: "fast-matches-naive-prefix".into(),
                lhs: zero.clone(),
                rhs: zero.clone(),
                margin: zero,
                holds: ok,
                structural: true,
            });
        }
        PropCheckResult {
            id,
            a: self.params().a(),
            n: self.ctx.n,
            sample: self.ctx.sample.label(),
            x: self.ctx.x.value().clone(),
            i: self.ctx.i.clone(),
            big_n: self.big_n,
            lhs,
            rhs,
            margin,
            verdict: verdict(self.params(), &checks),
            evaluator: self.evaluator,
            checks,
        }
    }
}

/// Prefix length used to validate fast sums against naive ones.
const SPOT_PREFIX: u64 = 2000;

/// Computes the layer sums for `ν = 1..=N`, naively when `i ≤ cap` and by
/// the tower potentials otherwise.
pub fn evaluate_context(
    params: &RotationParams,
    ctx: &AssumptionContext,
    big_n: usize,
    cap: u64,
) -> Result<ContextSums> {
    if big_n < ctx.n + 2 {
        return Err(Error::InvalidParameter(format!(
            "truncation N = {big_n} must be at least n + 2 = {}",
            ctx.n + 2
        )));
    }
    if ctx.params_a != params.a() {
        return Err(Error::ParameterMismatch {
            left: params.a(),
            right: ctx.params_a,
        });
    }
    let layered = LayeredReturnTime::truncated(params, big_n)?;
    let zero = crate::field::CirclePoint::zero(params.a());
    let (at_x, at_zero, evaluator, spot_check) = if ctx.i <= BigInt::from(cap) {
        (
            layered.layer_sums_naive(&ctx.x, &ctx.i, cap)?,
            layered.layer_sums_naive(&zero, &ctx.i, cap)?,
            Evaluator::Naive,
            None,
        )
    } else {
        let prefix = BigInt::from(SPOT_PREFIX.min(cap));
        let ok = layered.layer_sums_fast(&ctx.x, &prefix)
            == layered.layer_sums_naive(&ctx.x, &prefix, cap)?;
        (
            layered.layer_sums_fast(&ctx.x, &ctx.i),
            layered.layer_sums_fast(&zero, &ctx.i),
            Evaluator::Fast,
            Some(ok),
        )
    };
    Ok(ContextSums {
        ctx: ctx.clone(),
        big_n,
        evaluator,
        at_x,
        at_zero,
        spot_check,
        layered,
    })
}

fn inv_c_pow(params: &RotationParams, k: u32, scale: i64) -> QuadElem {
    let inv = params.alpha().clone(); // α = 1/c
    let mut out = params.int(1);
    for _ in 0..k {
        out = out * &inv;
    }
    out.scale(&BigRational::new(1.into(), scale.into()))
}

fn sign_elem(params: &RotationParams, s: i8) -> QuadElem {
    params.int(s as i64)
}

/// Layer `T_n` at the context: exact zero at `0`, sign, size and the
/// closed form `C(i)·χ_{I_n}(x)`.
pub fn check_p2(sums: &ContextSums) -> PropCheckResult {
    let p = sums.params();
    let n = sums.ctx.n;
    let spec = TnSpec::new(p, n);
    let vx = sums.at_x(n).clone();
    let d = sums.diff(n);
    let q = sums.geometry().q(n + 1).clone();
    let bound = sums
        .geometry()
        .length(n + 1)
        .scale(&BigRational::new(q, 50.into()));
    let (i_n, _) = interval_in(p, n);
    let chi_x = chi(&i_n).expect("I_n is nondegenerate").eval(&sums.ctx.x);
    let i = &sums.ctx.i;
    let coef = if *i >= spec.j_prime {
        let c = BigRational::from_integer(spec.j.clone())
            - BigRational::new(i - &spec.j_prime, 2.into());
        c * BigRational::from_integer(spec.leading_sign.into())
    } else {
        spec.potential(i)
    };
    let closed = chi_x.scale(&coef);
    let size = SubCheck::at_most("size", bound.clone(), vx.abs(), false).estimate();
    let checks = vec![
        SubCheck::equal("zero-at-origin", sums.at_zero(n).clone(), p.zero()),
        SubCheck {
            name: "sign".into(),
            lhs: sign_elem(p, d.signum()),
            rhs: sign_elem(p, spec.leading_sign),
            margin: p.zero(),
            holds: d.signum() == spec.leading_sign,
            structural: false,
        },
        size.clone(),
        SubCheck::equal("closed-form", vx.clone(), closed),
    ];
    sums.result(PropId::P2, vx.abs(), bound, size.margin, checks)
}

/// Exact cancellation of the layer `T_{n−1}`; vacuous for `n = 1`.
pub fn check_p3(sums: &ContextSums) -> PropCheckResult {
    let p = sums.params();
    let n = sums.ctx.n;
    let d = sums.diff(n - 1);
    let c = SubCheck::equal("layer-below-cancels", d.clone(), p.zero()).estimate();
    sums.result(PropId::P3, d, p.zero(), c.margin.clone(), vec![c])
}

/// The layer `T_{n+1}` vanishes at `0` and pushes in the same direction as
/// `T_n`.
pub fn check_p4(sums: &ContextSums) -> PropCheckResult {
    let p = sums.params();
    let n = sums.ctx.n;
    let dn = sums.diff(n);
    let d1 = sums.diff(n + 1);
    let s = dn.signum();
    let agree = d1.signum() == 0 || d1.signum() == s;
    let margin = if s == 0 {
        -d1.abs()
    } else {
        d1.scale_int(&s.into())
    };
    let checks = vec![
        SubCheck::equal("zero-at-origin", sums.at_zero(n + 1).clone(), p.zero()),
        SubCheck {
            name: "same-sign".into(),
            lhs: sign_elem(p, d1.signum()),
            rhs: sign_elem(p, s),
            margin: margin.clone(),
            holds: agree,
            structural: false,
        },
    ];
    sums.result(PropId::P4, d1, p.zero(), margin, checks)
}

/// `|S^{(i)}(x) − S^{(i)}(0)| > 100⁻¹c⁻¹` for `S = T_{n−1} + T_n + T_{n+1}`.
pub fn check_c5(sums: &ContextSums) -> PropCheckResult {
    let p = sums.params();
    let n = sums.ctx.n;
    let layers = [n - 1, n, n + 1];
    let s = sums.diff_sum(layers.into_iter());
    let mags = layers
        .iter()
        .fold(p.zero(), |acc, &nu| acc + sums.diff(nu).abs());
    let rhs = inv_c_pow(p, 1, 100);
    let main = SubCheck::at_most("budget", rhs.clone(), s.abs(), true).estimate();
    let checks = vec![
        main.clone(),
        SubCheck::equal("magnitudes-add", s.abs(), mags).estimate(),
    ];
    sums.result(PropId::C5, s.abs(), rhs, main.margin, checks)
}

/// `Σ_{ν=n+2}^{N} |T_ν diff| + 2i·tail < 4c⁻²`.
pub fn check_p6(sums: &ContextSums) -> PropCheckResult {
    let p = sums.params();
    let n = sums.ctx.n;
    let explicit = (n + 2..=sums.big_n).fold(p.zero(), |acc, nu| acc + sums.diff(nu).abs());
    let lhs = &explicit + sums.tail();
    let rhs = inv_c_pow(p, 2, 1).scale_int(&4.into());
    let main = SubCheck::at_most("budget", lhs.clone(), rhs.clone(), true).estimate();
    let mut checks = vec![main.clone()];
    let third = BigRational::new(1.into(), 3.into());
    for nu in n + 2..=sums.big_n {
        let cap = sums
            .geometry()
            .length(nu)
            .scale(&third)
            .scale_int(&sums.ctx.i);
        for (which, v) in [("x", sums.at_x(nu)), ("0", sums.at_zero(nu))] {
            checks.push(SubCheck::at_most(
                format!("termwise-{nu}-{which}"),
                v.abs(),
                cap.clone(),
                false,
            ));
        }
    }
    sums.result(PropId::P6, lhs, rhs, main.margin, checks)
}

/// `|Σ_{ν=1}^{n−2} T_ν diff| < 5c⁻²` and the per-layer Lipschitz bound
/// `|T_ν diff| ≤ 2q_{ν+1}|x|`. The first-return part is
/// [`first_return_check`], run separately because it enumerates orbits.
pub fn check_p7(sums: &ContextSums) -> PropCheckResult {
    let p = sums.params();
    let n = sums.ctx.n;
    let top = n.saturating_sub(2);
    let explicit = sums.diff_sum(1..=top).abs();
    let rhs = inv_c_pow(p, 2, 1).scale_int(&5.into());
    let main = SubCheck::at_most("budget", explicit.clone(), rhs.clone(), true).estimate();
    let mut checks = vec![main.clone()];
    let xnorm = circle_norm(&sums.ctx.x);
    for nu in 1..=top {
        let q = sums.geometry().q(nu + 1) * 2;
        checks.push(SubCheck::at_most(
            format!("lipschitz-{nu}"),
            sums.diff(nu).abs(),
            xnorm.scale_int(&q),
            false,
        ));
    }
    sums.result(PropId::P7, explicit, rhs, main.margin, checks)
}

/// `|T_{≤N}^{(i)}(x) − T_{≤N}^{(i)}(0)| − 2i·tail > 200⁻¹c⁻¹`, with the
/// triangle-inequality ledger against the component checks.
pub fn main_separation(sums: &ContextSums) -> PropCheckResult {
    let p = sums.params();
    let n = sums.ctx.n;
    let value = sums.diff_sum(1..=sums.big_n).abs();
    let lhs = &value - sums.tail();
    let rhs = inv_c_pow(p, 1, 200);
    let main = SubCheck::at_most("budget", rhs.clone(), lhs.clone(), true).estimate();
    let s = sums.diff_sum([n - 1, n, n + 1].into_iter()).abs();
    let low = sums.diff_sum(1..=n.saturating_sub(2)).abs();
    let high = (n + 2..=sums.big_n).fold(p.zero(), |acc, nu| acc + sums.diff(nu).abs());
    let ledger = SubCheck::at_most("ledger", s - low - high, value.clone(), false);
    let margin = main.margin.clone();
    sums.result(PropId::Main, lhs, rhs, margin, vec![main, ledger])
}

/// Result of checking that every point of the shrunk interval `𝒥` returns
/// to it within `2q_{ν+1}` steps.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FirstReturnReport {
    pub a: u64,
    pub nu: usize,
    pub n: usize,
    #[serde(with = "crate::serde_bigint")]
    pub bound: BigInt,
    /// Smallest `K ≤ bound` such that returns within `K` steps cover `𝒥`.
    pub max_return: Option<u64>,
    pub holds: bool,
}

/// `𝒥` is `I_ν ∪ I_{ν+1}` with `|q_n·α|/2`-neighbourhoods of both ends
/// removed. The set of points of `𝒥` that come back after exactly `k`
/// steps is `𝒥 ∩ (𝒥 − kα)`; the check is that these sets for
/// `k ≤ 2q_{ν+1}` cover `𝒥`.
pub fn first_return_check(
    params: &RotationParams,
    nu: usize,
    n: usize,
    cap: u64,
) -> Result<FirstReturnReport> {
    if nu == 0 || n < nu + 2 {
        return Err(Error::InvalidParameter(format!(
            "first-return check needs 1 ≤ ν and n ≥ ν + 2 (got ν = {nu}, n = {n})"
        )));
    }
    let conv = convergents(params, n.max(nu + 1));
    let bound = &conv[nu + 1].q * 2;
    guard("2q_{ν+1}", &bound, cap)?;
    let steps: u64 = (&bound).try_into().expect("guarded");
    let dv = conv[nu].offset(params);
    let dv1 = conv[nu + 1].offset(params);
    let h = conv[n]
        .offset(params)
        .abs()
        .scale(&BigRational::new(1.into(), 2.into()));
    let u = dv.clone().min_of(dv1.clone()) + &h;
    let v = dv.max_of(dv1) - &h;
    let len = &v - &u;
    let len_f = len.to_f64();
    let alpha = params.alpha();
    let af = alpha_f64(params.a());
    let mut pieces: Vec<(u64, QuadElem, QuadElem)> = Vec::new();
    for k in 1..=steps {
        let t = (k as f64 * af).fract();
        for m in [-1.0, 0.0, 1.0] {
            // |k·α − m'| must be below |𝒥|; the float filter is generous.
            let shift = t + m;
            if shift.abs() > len_f + 1e-6 {
                continue;
            }
            let whole = (k as f64 * af).floor() as i64 - m as i64;
            let s = alpha
                .scale_int(&BigInt::from(k))
                .add_rational(&BigRational::from_integer((-whole).into()));
            let lo = u.clone().max_of(&u - &s);
            let hi = v.clone().min_of(&v - &s);
            if lo <= hi {
                pieces.push((k, lo, hi));
            }
        }
    }
    let covers = |limit: u64| -> bool {
        let mut sel: Vec<&(u64, QuadElem, QuadElem)> =
            pieces.iter().filter(|p| p.0 <= limit).collect();
        sel.sort_by(|x, y| x.1.cmp_exact(&y.1));
        let mut reach = u.clone();
        for (_, lo, hi) in sel {
            if *lo > reach {
                return false;
            }
            if *hi > reach {
                reach = hi.clone();
            }
            if reach >= v {
                return true;
            }
        }
        reach >= v
    };
    let holds = covers(steps);
    let max_return = if holds {
        let mut ks: Vec<u64> = pieces.iter().map(|p| p.0).collect();
        ks.sort_unstable();
        ks.dedup();
        let (mut lo, mut hi) = (0usize, ks.len() - 1);
        while lo < hi {
            let mid = (lo + hi) / 2;
            if covers(ks[mid]) {
                hi = mid;
            } else {
                lo = mid + 1;
            }
        }
        Some(ks[lo])
    } else {
        None
    };
    Ok(FirstReturnReport {
        a: params.a(),
        nu,
        n,
        bound,
        max_return,
        holds,
    })
}
