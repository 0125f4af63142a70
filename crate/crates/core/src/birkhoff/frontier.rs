use serde::{Deserialize, Serialize};

use super::checks::budget_closes;
use super::{
    check_c5, check_p2, check_p3, check_p4, check_p6, check_p7, evaluate_context, main_separation,
    make_context, PropCheckResult, PropId, Sample, Verdict,
};
use crate::error::Result;
use crate::field::{QuadElem, RotationParams};

/// One cell of the pass/fail table over `a`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrontierRow {
    pub a: u64,
    pub n: usize,
    pub sample: String,
    pub prop: PropId,
    pub budget_closes: bool,
    pub margin: QuadElem,
    pub verdict: Verdict,
}

/// All checks at every `(a, n, sample)`, with `N = n + 4`.
pub fn all_checks(
    params: &RotationParams,
    n: usize,
    sample: Sample,
    cap: u64,
) -> Result<Vec<PropCheckResult>> {
    let ctx = make_context(params, n, sample)?;
    let sums = evaluate_context(params, &ctx, n + 4, cap)?;
    Ok(vec![
        check_p2(&sums),
        check_p3(&sums),
        check_p4(&sums),
        check_c5(&sums),
        check_p6(&sums),
        check_p7(&sums),
        main_separation(&sums),
    ])
}

/// Sweeps `a` and reports exact margins and verdicts, so the place where
/// the estimates start to hold can be read off.
pub fn regime_frontier(
    a_values: &[u64],
    levels: &[usize],
    samples: &[Sample],
    cap: u64,
) -> Result<Vec<FrontierRow>> {
    let mut rows = Vec::new();
    for &a in a_values {
        let params = RotationParams::new(a)?;
        let closes = budget_closes(&params);
        for &n in levels {
            for &sample in samples {
                for r in all_checks(&params, n, sample, cap)? {
                    rows.push(FrontierRow {
                        a,
                        n,
                        sample: sample.label(),
                        prop: r.id,
                        budget_closes: closes,
                        margin: r.margin,
                        verdict: r.verdict,
                    });
                }
            }
        }
    }
    Ok(rows)
}
