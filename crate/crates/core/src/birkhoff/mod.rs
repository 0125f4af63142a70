//! Birkhoff sums `T^{(i)}(x) = Σ_{k<i} T(R^k x)` and certified checks of
//! the separation estimates behind expansiveness.

mod checks;
mod context;
mod frontier;
mod separation;

pub use checks::{
    budget_closes, check_c5, check_p2, check_p3, check_p4, check_p6, check_p7, evaluate_context,
    first_return_check, main_separation, ContextSums, FirstReturnReport, PropCheckResult, PropId,
    SubCheck, Verdict,
};
pub use context::{make_context, AssumptionContext, Sample};
pub use frontier::{all_checks, regime_frontier, FrontierRow};
pub use separation::{
    lemma1_scan, separation_certificate, window_level, GridSpec, Lemma1Result, PairOutcome,
    SeparationCertificate,
};

use num_bigint::BigInt;
use num_traits::Signed;
use serde::{Deserialize, Serialize};

use crate::error::{guard, Error, Result};
use crate::field::{CirclePoint, QuadElem, RotationParams};
use crate::return_time::{CircleFunction, LayeredReturnTime};

/// Default cap on the number of terms summed one by one.
pub const NAIVE_CAP: u64 = 10_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Evaluator {
    Naive,
    Fast,
}

/// Direct summation along the orbit. Refuses `i` above `cap`; use
/// [`birkhoff_fast`] for long orbits.
pub fn birkhoff_naive<F: CircleFunction + ?Sized>(
    f: &F,
    params: &RotationParams,
    x: &CirclePoint,
    i: &BigInt,
    cap: u64,
) -> Result<QuadElem> {
    if f.a() != params.a() || x.a() != params.a() {
        return Err(Error::ParameterMismatch {
            left: params.a(),
            right: if f.a() != params.a() { f.a() } else { x.a() },
        });
    }
    if i.is_negative() {
        return Err(Error::InvalidParameter("naive sums need i ≥ 0".into()));
    }
    guard("naive iterate count (use the fast evaluator)", i, cap)?;
    let steps: u64 = i.try_into().expect("guarded");
    let sum = f.orbit_sum(params.alpha(), x, steps);
    Ok(sum)
}

/// Tower-based sum: `O(levels)` exact operations for any `i`.
pub fn birkhoff_fast(f: &LayeredReturnTime, x: &CirclePoint, i: &BigInt) -> QuadElem {
    f.birkhoff_fast(x, i)
}

/// A Birkhoff sum of the truncated return time with the certified bound
/// on what the omitted layers could add.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BirkhoffReport {
    pub value: QuadElem,
    /// `i·tail_bound`.
    pub tail: QuadElem,
    #[serde(with = "crate::serde_bigint")]
    pub i: BigInt,
    pub evaluator: Evaluator,
}

/// Sums with the naive evaluator when `i ≤ cap`, otherwise the fast one.
pub fn birkhoff_report(
    f: &LayeredReturnTime,
    x: &CirclePoint,
    i: &BigInt,
    cap: u64,
) -> Result<BirkhoffReport> {
    let small = !i.is_negative() && *i <= BigInt::from(cap);
    let (value, evaluator) = if small {
        (birkhoff_naive(f, f.params(), x, i, cap)?, Evaluator::Naive)
    } else {
        (f.birkhoff_fast(x, i), Evaluator::Fast)
    };
    Ok(BirkhoffReport {
        value,
        tail: f.tail_bound().scale_int(&i.abs()),
        i: i.clone(),
        evaluator,
    })
}

#[cfg(test)]
mod tests;
