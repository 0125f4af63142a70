//! Convergents of `α = [0; a, a, …]`, the closest-return intervals `I_n`
//! and `J_n`, the level-`n` Rokhlin tower and Ostrowski numeration.

mod geometry;
mod interval;
mod ostrowski;
mod partition;

pub use geometry::{Column, TowerCoord, TowerGeometry};
pub use interval::CircleInterval;
pub use ostrowski::{ostrowski, OstrowskiRep};
pub use partition::{tower_partition, Floor, FloorJson, TowerJson, TowerPartition};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{guard, Result};
use crate::field::{circle_norm, CirclePoint, QuadElem, RotationParams};

/// Default cap on brute-force enumerations (orbit lengths, floor counts).
pub const ENUMERATION_GUARD: u64 = 1_000_000;

/// The `n`-th convergent `p_n / q_n` of `α`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Convergent {
    pub n: usize,
    #[serde(with = "crate::serde_bigint")]
    pub p: BigInt,
    #[serde(with = "crate::serde_bigint")]
    pub q: BigInt,
}

impl Convergent {
    /// Signed offset `q_n·α − p_n` of the `q_n`-th iterate of `0`.
    pub fn offset(&self, params: &RotationParams) -> QuadElem {
        QuadElem::new(
            params.a(),
            BigRational::from_integer(-self.p.clone()),
            BigRational::from_integer(self.q.clone()),
        )
    }
}

/// Convergents `0..=count` from `q_{n+2} = a·q_{n+1} + q_n`, `q_0 = 1`,
/// `q_1 = a`, `p_0 = 0`, `p_1 = 1`.
pub fn convergents(params: &RotationParams, count: usize) -> Vec<Convergent> {
    let a = BigInt::from(params.a());
    let mut out = Vec::with_capacity(count + 1);
    out.push(Convergent {
        n: 0,
        p: BigInt::zero(),
        q: BigInt::one(),
    });
    if count == 0 {
        return out;
    }
    out.push(Convergent {
        n: 1,
        p: BigInt::one(),
        q: a.clone(),
    });
    for n in 2..=count {
        let p = &a * &out[n - 1].p + &out[n - 2].p;
        let q = &a * &out[n - 1].q + &out[n - 2].q;
        out.push(Convergent { n, p, q });
    }
    out
}

/// Which side of `0` the point `q_n·α` falls on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Right,
    Left,
}

impl Side {
    pub fn of(offset: &QuadElem) -> Side {
        if offset.is_negative() {
            Side::Left
        } else {
            Side::Right
        }
    }

    pub fn sign(self) -> i8 {
        match self {
            Side::Right => 1,
            Side::Left => -1,
        }
    }
}

/// `R_α^k(x)`.
pub fn rotate(params: &RotationParams, x: &CirclePoint, k: &BigInt) -> CirclePoint {
    x.translate(&params.multiple_of_alpha(k))
}

/// The closed arc between `0` and `q_n·α` of length `|q_n·α|`, with the side
/// read off the exact sign of `q_n·α − p_n`.
pub fn interval_in(params: &RotationParams, n: usize) -> (CircleInterval, Side) {
    let conv = convergents(params, n);
    let d = conv[n].offset(params);
    let side = Side::of(&d);
    (CircleInterval::from_signed(&params.zero(), &d), side)
}

/// The sub-arc of `I_n` between `q_n·α/2` and `−q_{n+1}·α/2`.
pub fn interval_jn(params: &RotationParams, n: usize) -> Result<CircleInterval> {
    if n == 0 {
        return Err(crate::Error::InvalidParameter("J_n needs n ≥ 1".into()));
    }
    let conv = convergents(params, n + 1);
    let half = BigRational::new(1.into(), 2.into());
    let outer = conv[n].offset(params).scale(&half);
    let inner = (-conv[n + 1].offset(params)).scale(&half);
    Ok(CircleInterval::from_signed(&inner, &outer))
}

/// Brute-force check that `|q_n·α| < |i·α|` for every `1 ≤ i < q_n`.
pub fn closest_return_verify(params: &RotationParams, n: usize) -> Result<bool> {
    let conv = convergents(params, n);
    let qn = &conv[n].q;
    guard("q_n", qn, ENUMERATION_GUARD)?;
    let target = circle_norm(&CirclePoint::reduce(&conv[n].offset(params)));
    let steps: u64 = qn.try_into().expect("guarded");
    let mut x = CirclePoint::zero(params.a());
    for _ in 1..steps {
        x = x.translate(params.alpha());
        if circle_norm(&x) <= target {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(a: u64) -> RotationParams {
        RotationParams::new(a).unwrap()
    }

    fn qs(a: u64, n: usize) -> Vec<u64> {
        convergents(&params(a), n)
            .iter()
            .map(|c| u64::try_from(&c.q).unwrap())
            .collect()
    }

    #[test]
    fn denominators() {
        assert_eq!(qs(2, 4), vec![1, 2, 5, 12, 29]);
        assert_eq!(qs(3, 4), vec![1, 3, 10, 33, 109]);
        assert_eq!(qs(1, 4), vec![1, 1, 2, 3, 5]);
    }

    #[test]
    fn determinant_is_unit() {
        for a in [1, 2, 3, 10, 1000] {
            let c = convergents(&params(a), 12);
            for w in c.windows(2) {
                let det = &w[0].q * &w[1].p - &w[1].q * &w[0].p;
                assert!(det == BigInt::one() || det == -BigInt::one());
            }
        }
    }

    #[test]
    fn offsets_shrink_and_alternate() {
        for a in [1, 2, 3, 10] {
            let p = params(a);
            let c = convergents(&p, 12);
            let mut prev: Option<QuadElem> = None;
            for (n, conv) in c.iter().enumerate() {
                let d = conv.offset(&p);
                let norm = d.abs();
                if a > 1 || n > 0 {
                    // for a = 1, d_0 = α lies beyond 1/2
                    assert_eq!(circle_norm(&CirclePoint::reduce(&d)), norm, "a={a} n={n}");
                }
                let expected = if n % 2 == 0 { 1 } else { -1 };
                assert_eq!(d.signum(), expected, "a={a} n={n}");
                if let Some(pr) = prev {
                    assert!(norm < pr);
                }
                prev = Some(norm);
            }
        }
    }

    #[test]
    fn closest_returns() {
        for a in [1, 2, 3] {
            for n in 1..=4 {
                assert!(closest_return_verify(&params(a), n).unwrap(), "a={a} n={n}");
            }
        }
        assert!(closest_return_verify(&params(1000), 3).is_err());
    }

    #[test]
    fn intervals_small_cases() {
        let p = params(2);
        let (i0, side) = interval_in(&p, 0);
        assert_eq!(side, Side::Right);
        assert_eq!(i0.left(), &CirclePoint::zero(2));
        assert_eq!(i0.length(), p.alpha());
        let (i1, side) = interval_in(&p, 1);
        assert_eq!(side, Side::Left);
        assert_eq!(i1.length(), &(p.int(1) - p.alpha().scale_int(&2.into())));
        let j1 = interval_jn(&p, 1).unwrap();
        let expected = (p.int(3) - p.alpha().scale_int(&7.into()))
            .scale(&BigRational::new(1.into(), 2.into()));
        assert_eq!(j1.length(), &expected);
        assert!(i1.contains(&j1.midpoint()));
        assert!(j1.contains(&j1.midpoint()));
    }

    #[test]
    fn jn_points_are_far_from_zero() {
        for a in [1, 2, 5] {
            let p = params(a);
            for n in 1..6 {
                let j = interval_jn(&p, n).unwrap();
                let (i, _) = interval_in(&p, n);
                let bound = interval_in(&p, n + 1)
                    .0
                    .length()
                    .scale(&BigRational::new(1.into(), 2.into()));
                for x in [j.left().clone(), j.right().clone(), j.midpoint()] {
                    assert!(i.contains(&x));
                    assert!(circle_norm(&x) >= bound);
                }
            }
        }
    }

    #[test]
    fn rotation_group_action() {
        let p = params(2);
        let z = CirclePoint::zero(2);
        assert_eq!(rotate(&p, &z, &BigInt::zero()), z);
        assert_eq!(
            rotate(&p, &z, &5.into()).value(),
            &(p.alpha().scale_int(&5.into()) - p.int(2))
        );
        let three = rotate(&p, &z, &3.into());
        assert_eq!(rotate(&p, &three, &(-3).into()), z);
        let x = CirclePoint::reduce(&p.frac(2, 7));
        assert_eq!(
            rotate(&p, &rotate(&p, &x, &11.into()), &(-4).into()),
            rotate(&p, &x, &7.into())
        );
    }
}
