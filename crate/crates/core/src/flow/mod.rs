//! The suspension flow over the rotation with roof `T′ = T_{≤N} + offset`.
//!
//! Points of the mapping torus are pairs `(y, s)` modulo the deck map
//! `F(y, s) = (R(y), s − T′(y))`; the flow moves `s` only. Everything is
//! exact: return times are Birkhoff sums of `T′`, evaluated through the
//! tower potentials.

mod probe;

pub use probe::{expansiveness_probe, ProbePair, ProbeResult, ProbeSpec};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::FromPrimitive;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{circle_dist, CirclePoint, QuadElem, RotationParams};
use crate::return_time::{CircleFunction, LayeredReturnTime};
use crate::tower::rotate;

/// Normal form `(y, s)` with `0 ≤ s < T′(y)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MappingTorusPoint {
    pub y: CirclePoint,
    pub s: QuadElem,
}

/// Default deck-shift window of [`SuspensionFlow::quotient_dist`].
pub const DECK_WINDOW: u32 = 3;

#[derive(Clone, Debug)]
pub struct SuspensionFlow {
    roof: LayeredReturnTime,
}

impl SuspensionFlow {
    /// Roof `T_{≤N}` shifted by `1 + Σ|I_n|/3`, so `T′ ≥ 1`.
    pub fn new(params: &RotationParams, big_n: usize) -> Result<Self> {
        let (roof, _) = LayeredReturnTime::truncated(params, big_n)?.positivize();
        Ok(Self { roof })
    }

    /// Uses `roof` as given; its offset must make it positive, which is
    /// guaranteed when the offset is at least `1 + Σ|I_n|/3`.
    pub fn from_roof(roof: LayeredReturnTime) -> Result<Self> {
        let floor = roof
            .sup_bound()
            .add_rational(&BigRational::from_integer(1.into()));
        if *roof.offset() < floor {
            return Err(Error::InvalidParameter(
                "roof offset must be at least 1 + Σ|I_n|/3".into(),
            ));
        }
        Ok(Self { roof })
    }

    pub fn params(&self) -> &RotationParams {
        self.roof.params()
    }

    pub fn roof(&self) -> &LayeredReturnTime {
        &self.roof
    }

    /// `T′(y)`.
    pub fn roof_at(&self, y: &CirclePoint) -> QuadElem {
        self.roof.eval(y)
    }

    /// `T′^{(k)}(y)` for any integer `k`.
    pub fn roof_sum(&self, y: &CirclePoint, k: &BigInt) -> QuadElem {
        self.roof.birkhoff_fast(y, k)
    }

    /// `F^k(y, s) = (R^k y, s − T′^{(k)}(y))`, a different lift of the same
    /// point of the quotient.
    pub fn deck(&self, y: &CirclePoint, s: &QuadElem, k: &BigInt) -> (CirclePoint, QuadElem) {
        (rotate(self.params(), y, k), s - self.roof_sum(y, k))
    }

    /// The `k` with `T′^{(k)}(y) ≤ s < T′^{(k+1)}(y)`. `T′ ≥ 1` makes the
    /// sums strictly increasing, so a galloping search finds it.
    fn section_index(&self, y: &CirclePoint, s: &QuadElem) -> BigInt {
        let g = |k: &BigInt| self.roof_sum(y, k);
        let guess = s.to_f64() / self.roof.offset().to_f64();
        let mut k = BigInt::from_f64(guess.floor()).unwrap_or_default();
        let one = BigInt::from(1);
        let mut step = one.clone();
        if g(&k) <= *s {
            while g(&(&k + &step)) <= *s {
                k += &step;
                step *= 2;
            }
            // g(k) ≤ s < g(k + step)
            let mut hi = &k + &step;
            while &hi - &k > one {
                let mid = (&k + &hi) / 2;
                if g(&mid) <= *s {
                    k = mid;
                } else {
                    hi = mid;
                }
            }
            k
        } else {
            let mut hi = k.clone();
            let mut lo = &k - &step;
            while g(&lo) > *s {
                hi = lo.clone();
                step *= 2;
                lo = &hi - &step;
            }
            while &hi - &lo > one {
                let mid = (&lo + &hi) / 2;
                if g(&mid) <= *s {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            lo
        }
    }

    /// Applies `F` or `F⁻¹` until `0 ≤ s < T′(y)`.
    pub fn normalize(&self, y: &CirclePoint, s: &QuadElem) -> MappingTorusPoint {
        let k = self.section_index(y, s);
        let (y, s) = self.deck(y, s, &k);
        MappingTorusPoint { y, s }
    }

    /// `φ^t(y, s) = (y, s + t)`, normalized.
    pub fn flow(&self, p: &MappingTorusPoint, t: &BigRational) -> MappingTorusPoint {
        self.normalize(&p.y, &p.s.add_rational(t))
    }

    /// Flow by an element of the field, e.g. an exact return time.
    pub fn flow_by(&self, p: &MappingTorusPoint, t: &QuadElem) -> MappingTorusPoint {
        self.normalize(&p.y, &(&p.s + t))
    }

    /// Time until `p` next reaches the section `s = 0`.
    pub fn first_return_time(&self, p: &MappingTorusPoint) -> QuadElem {
        self.roof_at(&p.y) - &p.s
    }

    /// Deck-minimized product distance `max(circle_dist, |Δs|)` over
    /// shifts `|k| ≤ window`, applied to either point.
    pub fn quotient_dist(
        &self,
        p: &MappingTorusPoint,
        q: &MappingTorusPoint,
        window: u32,
    ) -> QuadElem {
        let base = |a: (&CirclePoint, &QuadElem), b: (&CirclePoint, &QuadElem)| {
            circle_dist(a.0, b.0).max_of((a.1 - b.1).abs())
        };
        let mut best = base((&p.y, &p.s), (&q.y, &q.s));
        let w = window as i64;
        for k in (-w..=w).filter(|&k| k != 0) {
            let k = BigInt::from(k);
            let (py, ps) = self.deck(&p.y, &p.s, &k);
            best = best.min_of(base((&py, &ps), (&q.y, &q.s)));
            let (qy, qs) = self.deck(&q.y, &q.s, &k);
            best = best.min_of(base((&p.y, &p.s), (&qy, &qs)));
        }
        best
    }
}
