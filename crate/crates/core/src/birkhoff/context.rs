use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{CirclePoint, RotationParams};
use crate::tower::{convergents, interval_jn, CircleInterval};

/// Where in `J_n` the test point is taken.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind", content = "seed")]
pub enum Sample {
    Midpoint,
    /// The end `q_n·α/2`, farthest from `0`.
    OuterEnd,
    /// The end `−q_{n+1}·α/2`, nearest to `0`.
    InnerEnd,
    /// A seeded uniform point with denominator `2^30`.
    Random(u64),
}

impl Sample {
    pub fn label(&self) -> String {
        match self {
            Sample::Midpoint => "midpoint".into(),
            Sample::OuterEnd => "outer-end".into(),
            Sample::InnerEnd => "inner-end".into(),
            Sample::Random(seed) => format!("random-{seed}"),
        }
    }
}

/// A level `n`, a point `x ∈ J_n` and `i = ⌊q_{n+1}/2⌋`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AssumptionContext {
    pub params_a: u64,
    pub n: usize,
    pub sample: Sample,
    pub x: CirclePoint,
    #[serde(with = "crate::serde_bigint")]
    pub i: BigInt,
    #[serde(skip)]
    jn: CircleInterval,
}

impl AssumptionContext {
    pub fn jn(&self) -> &CircleInterval {
        &self.jn
    }

    /// Signed representative of `x`, on the side of `q_n·α`.
    pub fn signed_x(&self) -> crate::field::QuadElem {
        self.x.signed()
    }
}

pub fn make_context(
    params: &RotationParams,
    n: usize,
    sample: Sample,
) -> Result<AssumptionContext> {
    if n == 0 {
        return Err(Error::InvalidParameter("contexts need n ≥ 1".into()));
    }
    let jn = interval_jn(params, n)?;
    let conv = convergents(params, n + 1);
    let half = BigRational::new(1.into(), 2.into());
    let outer = CirclePoint::reduce(&conv[n].offset(params).scale(&half));
    let inner = CirclePoint::reduce(&(-conv[n + 1].offset(params)).scale(&half));
    let x = match sample {
        Sample::Midpoint => jn.midpoint(),
        Sample::OuterEnd => outer,
        Sample::InnerEnd => inner,
        Sample::Random(seed) => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ ((n as u64) << 32));
            let k: u64 = rng.gen_range(0..=1u64 << 30);
            jn.point_at(&BigRational::new(k.into(), (1u64 << 30).into()))
        }
    };
    assert!(jn.contains(&x), "sample must lie in J_n");
    let i = conv[n + 1].q.div_floor(&BigInt::from(2));
    Ok(AssumptionContext {
        params_a: params.a(),
        n,
        sample,
        x,
        i,
        jn,
    })
}
