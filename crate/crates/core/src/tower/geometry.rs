//! Cached tower data and exact localization of circle points.
//!
//! At level `n` the circle is tiled by the long column `R^k(I_n)`,
//! `k < q_{n+1}`, and the short column `R^k(I_{n+1})`, `k < q_n`. Points are
//! located by descending from level 0: a point on a short floor keeps its
//! floor and becomes a long-column point one level down; a point on a long
//! floor whose base lies in `I_{n+2}` stays put in the new short column,
//! otherwise its base sits in one of the `a` translates
//! `R^{q_n + m·q_{n+1}}(I_{n+1})` that tile the rest of `I_n`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use super::{convergents, CircleInterval, Convergent, Side};
use crate::field::{CirclePoint, QuadElem, RotationParams};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Column {
    /// Floors `R^k(I_n)`, `k < q_{n+1}`.
    Long,
    /// Floors `R^k(I_{n+1})`, `k < q_n`.
    Short,
}

/// Position of a point in the level-`n` tower.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TowerCoord {
    pub column: Column,
    pub floor: BigInt,
    /// Signed offset of the base point: between `0` and `q_n·α − p_n` for
    /// the long column, between `0` and `q_{n+1}·α − p_{n+1}` for the short.
    pub base: QuadElem,
}

/// Convergents and signed offsets `d_n = q_n·α − p_n` up to a fixed depth.
#[derive(Clone, Debug)]
pub struct TowerGeometry {
    params: RotationParams,
    depth: usize,
    convergents: Vec<Convergent>,
    offsets: Vec<QuadElem>,
    inverse_offsets: Vec<QuadElem>,
    lengths: Vec<QuadElem>,
}

impl TowerGeometry {
    /// Geometry able to locate points down to level `depth`.
    pub fn new(params: &RotationParams, depth: usize) -> Self {
        let convergents = convergents(params, depth + 3);
        let offsets: Vec<QuadElem> = convergents.iter().map(|c| c.offset(params)).collect();
        // d_n is a unit of Z[α]; its inverse has integer coefficients.
        let inverse_offsets = offsets
            .iter()
            .map(|d| d.inverse().expect("d_n ≠ 0"))
            .collect();
        let lengths = offsets.iter().map(QuadElem::abs).collect();
        Self {
            params: params.clone(),
            depth,
            convergents,
            offsets,
            inverse_offsets,
            lengths,
        }
    }

    pub fn params(&self) -> &RotationParams {
        &self.params
    }

    pub fn a(&self) -> u64 {
        self.params.a()
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn convergent(&self, n: usize) -> &Convergent {
        &self.convergents[n]
    }

    pub fn q(&self, n: usize) -> &BigInt {
        &self.convergents[n].q
    }

    /// `d_n = q_n·α − p_n`.
    pub fn offset(&self, n: usize) -> &QuadElem {
        &self.offsets[n]
    }

    /// `|I_n| = |q_n·α − p_n|`.
    pub fn length(&self, n: usize) -> &QuadElem {
        &self.lengths[n]
    }

    pub fn side(&self, n: usize) -> Side {
        Side::of(&self.offsets[n])
    }

    pub fn interval_in(&self, n: usize) -> CircleInterval {
        CircleInterval::from_signed(&self.params.zero(), &self.offsets[n])
    }

    /// Positive offset of a signed base point `z ∈ I_n` from the left end of
    /// `I_n`.
    pub fn offset_in(&self, n: usize, z: &QuadElem) -> QuadElem {
        if self.offsets[n].is_negative() {
            z - &self.offsets[n]
        } else {
            z.clone()
        }
    }

    /// Tower coordinates of `y` at every level `0..=level`.
    pub fn locate(&self, y: &CirclePoint, level: usize) -> Vec<TowerCoord> {
        assert!(level <= self.depth, "level {level} beyond geometry depth");
        let mut path = Vec::with_capacity(level + 1);
        let mut coord = self.locate_level0(y);
        path.push(coord.clone());
        for n in 0..level {
            coord = self.refine(n, coord);
            path.push(coord.clone());
        }
        path
    }

    /// Tower coordinate of `y` at `level` only.
    pub fn locate_at(&self, y: &CirclePoint, level: usize) -> TowerCoord {
        assert!(level <= self.depth, "level {level} beyond geometry depth");
        let mut coord = self.locate_level0(y);
        for n in 0..level {
            coord = self.refine(n, coord);
        }
        coord
    }

    fn locate_level0(&self, y: &CirclePoint) -> TowerCoord {
        let a = self.params.a();
        let alpha = self.params.alpha();
        let y = y.value();
        let top = alpha.scale_int(&BigInt::from(a));
        if *y <= top {
            // y/α = y·c
            let mut k = (y * self.params.c()).floor();
            let cap = BigInt::from(a - 1);
            if k > cap {
                k = cap;
            }
            let base = y - &alpha.scale_int(&k);
            TowerCoord {
                column: Column::Long,
                floor: k,
                base,
            }
        } else {
            TowerCoord {
                column: Column::Short,
                floor: BigInt::zero(),
                base: y.add_rational(&-BigRational::one()),
            }
        }
    }

    fn refine(&self, n: usize, coord: TowerCoord) -> TowerCoord {
        match coord.column {
            Column::Short => TowerCoord {
                column: Column::Long,
                ..coord
            },
            Column::Long => {
                let z = coord.base;
                let dn = &self.offsets[n];
                let dn2 = &self.offsets[n + 2];
                let inside_next = if dn.is_positive() {
                    z <= *dn2
                } else {
                    z >= *dn2
                };
                if inside_next {
                    return TowerCoord {
                        column: Column::Short,
                        floor: coord.floor,
                        base: z,
                    };
                }
                let dn1 = &self.offsets[n + 1];
                let from_edge = &z - dn;
                let ratio = &from_edge * &self.inverse_offsets[n + 1];
                let mut m = ratio.floor();
                let cap = BigInt::from(self.params.a() - 1);
                if m > cap {
                    m = cap;
                }
                if m < BigInt::zero() {
                    m = BigInt::zero();
                }
                let base = from_edge - dn1.scale_int(&m);
                let floor = coord.floor + self.q(n) + &m * self.q(n + 1);
                TowerCoord {
                    column: Column::Long,
                    floor,
                    base,
                }
            }
        }
    }

    /// Rebuilds the circle point from a coordinate; used to check
    /// localization.
    pub fn point_of(&self, coord: &TowerCoord) -> CirclePoint {
        CirclePoint::reduce(&(&coord.base + &self.params.multiple_of_alpha(&coord.floor)))
    }

    /// Column heights at level `n`: `(q_{n+1}, q_n)`.
    pub fn heights(&self, n: usize) -> (&BigInt, &BigInt) {
        (self.q(n + 1), self.q(n))
    }
}
