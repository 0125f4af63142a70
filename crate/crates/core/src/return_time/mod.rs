//! The return time `T = Σ_{n≥1} T_n` as exact piecewise-linear data.
//!
//! `T_n` is a signed combination of trapezoidal bumps `χ` on the long
//! floors `R^k(I_n)` of the level-`n` tower. Explicit [`PLFunction`]s are
//! built for small towers; [`LayeredReturnTime`] evaluates any number of
//! layers pointwise through tower localization, with no size limit.

mod layered;
mod pl;

pub use layered::LayeredReturnTime;
pub use pl::{CircleFunction, PLFunction, PLJson, PLPiece};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::One;
use serde::{Deserialize, Serialize};

use crate::error::{guard, Error, Result};
use crate::field::{QuadElem, RotationParams};
use crate::tower::{convergents, interval_in, CircleInterval, ENUMERATION_GUARD};

/// Bump counts and sign of the layer `T_n`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TnSpec {
    pub n: usize,
    /// `j = ⌊(q_{n+1} − 1)/3⌋`, the number of full positive bumps.
    #[serde(with = "crate::serde_bigint")]
    pub j: BigInt,
    /// `j' = q_{n+1} − 2j`, the first floor carrying a negative half bump.
    #[serde(with = "crate::serde_bigint")]
    pub j_prime: BigInt,
    /// `+1` for even `n`, `−1` for odd `n`.
    pub leading_sign: i8,
}

impl TnSpec {
    pub fn new(params: &RotationParams, n: usize) -> Self {
        let q = convergents(params, n + 1)[n + 1].q.clone();
        Self::from_height(n, &q)
    }

    pub(crate) fn from_height(n: usize, q_next: &BigInt) -> Self {
        let j = (q_next - BigInt::from(1)).div_floor(&BigInt::from(3));
        let j_prime = q_next - &j * 2;
        Self {
            n,
            j,
            j_prime,
            leading_sign: if n % 2 == 0 { 1 } else { -1 },
        }
    }

    /// Height of the long column, `q_{n+1} = j' + 2j`.
    pub fn height(&self) -> BigInt {
        &self.j_prime + &self.j * 2
    }

    /// Coefficient of `χ` on floor `k` of the long column.
    pub fn coefficient(&self, k: &BigInt) -> BigRational {
        let s = BigRational::from_integer(self.leading_sign.into());
        if *k < self.j {
            s
        } else if *k >= self.j_prime {
            -s / BigRational::from_integer(2.into())
        } else {
            BigRational::from_integer(0.into())
        }
    }

    /// `C(k) = Σ_{l<k} coefficient(l)`, so that `T_n = Φ∘R − Φ` for
    /// `Φ = C(floor)·χ(base)`.
    pub fn potential(&self, k: &BigInt) -> BigRational {
        let full = k.min(&self.j).clone();
        let half = if *k > self.j_prime {
            k - &self.j_prime
        } else {
            BigInt::from(0)
        };
        let v = BigRational::from_integer(full) - BigRational::new(half, 2.into());
        v * BigRational::from_integer(self.leading_sign.into())
    }
}

/// The trapezoid `χ_I`: slope `1` on the first third, plateau `|I|/3`,
/// slope `−1` on the last third, zero off `I`.
pub fn chi(interval: &CircleInterval) -> Result<PLFunction> {
    if !interval.length().is_positive() {
        return Err(Error::InvalidInterval(
            "χ needs a nondegenerate interval".into(),
        ));
    }
    Ok(PLFunction::from_bumps(
        interval.length().a(),
        &[(interval.clone(), BigRational::one())],
    ))
}

fn layer_bumps(
    params: &RotationParams,
    n: usize,
) -> Result<(TnSpec, Vec<(CircleInterval, BigRational)>)> {
    let spec = TnSpec::new(params, n);
    let height = spec.height();
    guard("q_{n+1}", &height, ENUMERATION_GUARD)?;
    let h: u64 = (&height).try_into().expect("guarded");
    let (mut floor, _) = interval_in(params, n);
    let mut bumps = Vec::new();
    for k in 0..h {
        let w = spec.coefficient(&BigInt::from(k));
        if w != BigRational::from_integer(0.into()) {
            bumps.push((floor.clone(), w));
        }
        floor = floor.translate(params.alpha());
    }
    Ok((spec, bumps))
}

/// The layer `T_n` as an explicit PL function. Refuses towers taller than
/// the enumeration guard.
#[allow(non_snake_case)]
pub fn build_Tn(params: &RotationParams, n: usize) -> Result<(TnSpec, PLFunction)> {
    let (spec, bumps) = layer_bumps(params, n)?;
    Ok((spec, PLFunction::from_bumps(params.a(), &bumps)))
}

/// `T_{≤N} = Σ_{n=1}^{N} T_n` with the certified bound on the omitted
/// layers.
#[allow(non_snake_case)]
pub fn build_T(params: &RotationParams, big_n: usize) -> Result<(PLFunction, QuadElem)> {
    if big_n == 0 {
        return Err(Error::InvalidParameter(
            "truncation level N must be ≥ 1".into(),
        ));
    }
    let mut all = Vec::new();
    for n in 1..=big_n {
        let (_, bumps) = layer_bumps(params, n)?;
        all.extend(bumps);
    }
    Ok((
        PLFunction::from_bumps(params.a(), &all),
        tail_bound(params, big_n),
    ))
}

/// Certified `Σ_{ν>N} sup|T_ν| ≤ 2/q_{N+2}`.
///
/// `sup|T_ν| ≤ |I_ν|/3 < 1/(3q_{ν+1})`, and `q_{m+2} ≥ 2q_m` makes the
/// reciprocals sum to less than `4/q_{N+2}`.
pub fn tail_bound(params: &RotationParams, big_n: usize) -> QuadElem {
    let q = convergents(params, big_n + 2)[big_n + 2].q.clone();
    params.rational(BigRational::new(2.into(), q))
}

/// `f + offset` with `offset = 1 − min f`, so the minimum is exactly `1`.
pub fn positivize(f: &PLFunction) -> (PLFunction, QuadElem) {
    let offset = (-f.min_value()).add_rational(&BigRational::one());
    (f.add_constant(&offset), offset)
}
