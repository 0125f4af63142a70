use std::ops::RangeInclusive;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::{layer_bumps, tail_bound, CircleFunction, PLFunction, TnSpec};
use crate::error::{guard, Error, Result};
use crate::field::{CirclePoint, QuadElem, RotationParams};
use crate::tower::{rotate, Column, TowerCoord, TowerGeometry};

/// `offset + Σ_{n∈levels} T_n`, evaluated pointwise by locating points in
/// the towers instead of materializing breakpoints.
///
/// Each layer is a coboundary over the rotation: `T_n = Φ_n∘R − Φ_n` with
/// `Φ_n = C(floor)·χ(base)` on the long column and `0` on the short one.
/// Hence `T_n^{(i)}(x) = Φ_n(R^i x) − Φ_n(x)` for every `i`.
#[derive(Clone, Debug)]
pub struct LayeredReturnTime {
    geometry: TowerGeometry,
    lo: usize,
    hi: usize,
    specs: Vec<TnSpec>,
    thirds: Vec<QuadElem>,
    offset: QuadElem,
}

impl LayeredReturnTime {
    pub fn new(params: &RotationParams, levels: RangeInclusive<usize>) -> Result<Self> {
        let (lo, hi) = (*levels.start(), *levels.end());
        if lo > hi {
            return Err(Error::InvalidParameter(format!(
                "empty level range {lo}..={hi}"
            )));
        }
        let geometry = TowerGeometry::new(params, hi);
        let third = BigRational::new(1.into(), 3.into());
        let specs = (lo..=hi)
            .map(|n| TnSpec::from_height(n, geometry.q(n + 1)))
            .collect();
        let thirds = (lo..=hi)
            .map(|n| geometry.length(n).scale(&third))
            .collect();
        Ok(Self {
            geometry,
            lo,
            hi,
            specs,
            thirds,
            offset: params.zero(),
        })
    }

    /// The single layer `T_n`.
    pub fn layer(params: &RotationParams, n: usize) -> Self {
        Self::new(params, n..=n).expect("nonempty range")
    }

    /// `T_{≤N} = Σ_{n=1}^{N} T_n`.
    pub fn truncated(params: &RotationParams, big_n: usize) -> Result<Self> {
        if big_n == 0 {
            return Err(Error::InvalidParameter(
                "truncation level N must be ≥ 1".into(),
            ));
        }
        Self::new(params, 1..=big_n)
    }

    pub fn params(&self) -> &RotationParams {
        self.geometry.params()
    }

    pub fn geometry(&self) -> &TowerGeometry {
        &self.geometry
    }

    pub fn levels(&self) -> RangeInclusive<usize> {
        self.lo..=self.hi
    }

    pub fn spec(&self, n: usize) -> &TnSpec {
        &self.specs[n - self.lo]
    }

    pub fn offset(&self) -> &QuadElem {
        &self.offset
    }

    pub fn with_offset(mut self, offset: QuadElem) -> Self {
        self.offset = offset;
        self
    }

    /// Shifts the layers by `1 + Σ|I_n|/3`. Since `|T_n| ≤ |I_n|/3`, the
    /// result is at least `1` everywhere.
    pub fn positivize(&self) -> (Self, QuadElem) {
        let offset = self.sup_bound().add_rational(&BigRational::one());
        (self.clone().with_offset(offset.clone()), offset)
    }

    /// `Σ_{n∈levels} |I_n|/3 ≥ sup|Σ T_n|`.
    pub fn sup_bound(&self) -> QuadElem {
        self.thirds
            .iter()
            .fold(self.params().zero(), |acc, t| acc + t)
    }

    /// Certified bound on the layers beyond the top level.
    pub fn tail_bound(&self) -> QuadElem {
        tail_bound(self.params(), self.hi)
    }

    fn chi_at(&self, n: usize, base: &QuadElem) -> QuadElem {
        let t = self.geometry.offset_in(n, base);
        let third = &self.thirds[n - self.lo];
        if t <= *third {
            return t;
        }
        let rest = self.geometry.length(n) - &t;
        if rest <= *third {
            rest
        } else {
            third.clone()
        }
    }

    fn coords(&self, x: &CirclePoint) -> Vec<TowerCoord> {
        self.geometry.locate(x, self.hi)
    }

    /// `T_n(x)` for each level, in order.
    pub fn layer_values(&self, x: &CirclePoint) -> Vec<QuadElem> {
        let path = self.coords(x);
        (self.lo..=self.hi)
            .map(|n| {
                let c = &path[n];
                if c.column == Column::Short {
                    return self.params().zero();
                }
                let w = self.spec(n).coefficient(&c.floor);
                if w.is_zero() {
                    return self.params().zero();
                }
                self.chi_at(n, &c.base).scale(&w)
            })
            .collect()
    }

    /// `Φ_n(x)` for each level, in order.
    pub fn potentials(&self, x: &CirclePoint) -> Vec<QuadElem> {
        let path = self.coords(x);
        (self.lo..=self.hi)
            .map(|n| {
                let c = &path[n];
                if c.column == Column::Short || c.floor.is_zero() {
                    return self.params().zero();
                }
                self.chi_at(n, &c.base)
                    .scale(&self.spec(n).potential(&c.floor))
            })
            .collect()
    }

    /// `Σ_n Φ_n(x)`.
    pub fn potential(&self, x: &CirclePoint) -> QuadElem {
        self.potentials(x)
            .into_iter()
            .fold(self.params().zero(), |acc, v| acc + v)
    }

    /// `T^{(i)}(x) = Σ_{k<i} T(R^k x)` in `O(levels)` operations, for any
    /// integer `i` (negative `i` gives `−T^{(|i|)}(R^i x)`).
    pub fn birkhoff_fast(&self, x: &CirclePoint, i: &BigInt) -> QuadElem {
        let end = rotate(self.params(), x, i);
        self.potential(&end) - self.potential(x) + self.offset.scale_int(i)
    }

    /// Per-layer Birkhoff sums `T_n^{(i)}(x)` via the potentials.
    pub fn layer_sums_fast(&self, x: &CirclePoint, i: &BigInt) -> Vec<QuadElem> {
        let end = rotate(self.params(), x, i);
        self.potentials(&end)
            .into_iter()
            .zip(self.potentials(x))
            .map(|(e, s)| e - s)
            .collect()
    }

    /// Per-layer Birkhoff sums by direct summation along the orbit.
    ///
    /// Between two column changes a point keeps its base and climbs one
    /// floor per step, so `χ(base)` is shared by the terms of such a run:
    /// the run's coefficients are added one term at a time and multiplied
    /// by `χ` once. Tower coordinates are recomputed by descent after each
    /// run.
    pub fn layer_sums_naive(&self, x: &CirclePoint, i: &BigInt, cap: u64) -> Result<Vec<QuadElem>> {
        if i.is_negative() {
            return Err(Error::InvalidParameter("naive sums need i ≥ 0".into()));
        }
        guard("naive iterate count", i, cap)?;
        let steps: u64 = i.try_into().expect("guarded");
        let mut sums = vec![self.params().zero(); self.hi - self.lo + 1];
        let mut y = x.clone();
        let mut done = 0u64;
        while done < steps {
            let path = self.coords(&y);
            let levels = &path[self.lo..=self.hi];
            let room = levels
                .iter()
                .enumerate()
                .map(|(k, c)| {
                    let (long, short) = self.geometry.heights(self.lo + k);
                    let h = if c.column == Column::Long {
                        long
                    } else {
                        short
                    };
                    h - &c.floor
                })
                .min()
                .expect("nonempty");
            let run = u64::try_from(&room).map_or(steps - done, |r| r.min(steps - done));
            for (k, c) in levels.iter().enumerate() {
                if c.column == Column::Short {
                    continue;
                }
                let spec = &self.specs[k];
                // twice the coefficient sum, in units of the leading sign
                let mut halves: i64 = 0;
                let mut floor = c.floor.clone();
                for _ in 0..run {
                    if floor < spec.j {
                        halves += 2;
                    } else if floor >= spec.j_prime {
                        halves -= 1;
                    }
                    floor += 1u32;
                }
                if halves != 0 {
                    let w = BigRational::new((halves * spec.leading_sign as i64).into(), 2.into());
                    sums[k] = &sums[k] + self.chi_at(self.lo + k, &c.base).scale(&w);
                }
            }
            y = rotate(self.params(), &y, &BigInt::from(run));
            done += run;
        }
        Ok(sums)
    }

    /// Materializes `offset + Σ T_n` as one PL function; refuses when any
    /// tower exceeds the enumeration guard.
    pub fn to_pl(&self) -> Result<PLFunction> {
        let mut all = Vec::new();
        for n in self.lo..=self.hi {
            let (_, bumps) = layer_bumps(self.params(), n)?;
            all.extend(bumps);
        }
        let f = PLFunction::from_bumps(self.params().a(), &all);
        Ok(if self.offset.is_zero() {
            f
        } else {
            f.add_constant(&self.offset)
        })
    }
}

impl CircleFunction for LayeredReturnTime {
    fn a(&self) -> u64 {
        self.params().a()
    }

    fn eval(&self, x: &CirclePoint) -> QuadElem {
        self.layer_values(x)
            .into_iter()
            .fold(self.offset.clone(), |acc, v| acc + v)
    }
}
