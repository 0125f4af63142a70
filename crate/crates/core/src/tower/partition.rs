use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

use super::{CircleInterval, Column, TowerGeometry, ENUMERATION_GUARD};
use crate::error::{guard, Error, Result};
use crate::field::{QuadElem, RotationParams};

/// One floor `R^iterate(base)` of the level-`n` tower.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Floor {
    pub column: Column,
    pub iterate: u64,
    pub interval: CircleInterval,
}

/// The Rokhlin tower over `I_n ∪ I_{n+1}`: `q_{n+1}` translates of `I_n`
/// and `q_n` translates of `I_{n+1}`.
#[derive(Clone, Debug)]
pub struct TowerPartition {
    pub level: usize,
    pub base_long: CircleInterval,
    pub base_short: CircleInterval,
    pub long_floors: Vec<CircleInterval>,
    pub short_floors: Vec<CircleInterval>,
    identity: QuadElem,
}

impl TowerPartition {
    /// `q_{n+1}·|I_n| + q_n·|I_{n+1}|`, equal to `1`.
    pub fn identity(&self) -> &QuadElem {
        &self.identity
    }

    pub fn floors(&self) -> impl Iterator<Item = Floor> + '_ {
        let long = self.long_floors.iter().enumerate().map(|(i, f)| Floor {
            column: Column::Long,
            iterate: i as u64,
            interval: f.clone(),
        });
        let short = self.short_floors.iter().enumerate().map(|(i, f)| Floor {
            column: Column::Short,
            iterate: i as u64,
            interval: f.clone(),
        });
        long.chain(short)
    }

    pub fn floor_count(&self) -> usize {
        self.long_floors.len() + self.short_floors.len()
    }

    /// Sorts floors by left endpoint and checks that each right endpoint is
    /// the next left endpoint, all the way round. Together with total
    /// length 1 this says the floors tile the circle with disjoint
    /// interiors.
    pub fn verify(&self) -> bool {
        let a = self.identity.a();
        if self.identity != QuadElem::one(a) {
            return false;
        }
        let mut floors: Vec<&CircleInterval> =
            self.long_floors.iter().chain(&self.short_floors).collect();
        floors.sort_by(|x, y| x.left().value().cmp_exact(y.left().value()));
        let total = floors
            .iter()
            .fold(QuadElem::zero(a), |acc, f| acc + f.length());
        if total != QuadElem::one(a) {
            return false;
        }
        for i in 0..floors.len() {
            let next = floors[(i + 1) % floors.len()];
            if floors[i].right() != next.left() {
                return false;
            }
        }
        true
    }

    pub fn to_json(&self) -> TowerJson {
        TowerJson {
            a: self.identity.a(),
            level: self.level,
            identity: self.identity.clone(),
            floor_count: self.floor_count(),
            floors: self
                .floors()
                .map(|f| FloorJson {
                    column: f.column,
                    iterate: f.iterate,
                    left: f.interval.left().value().clone(),
                    right: f.interval.right().value().clone(),
                    length: f.interval.length().clone(),
                })
                .collect(),
        }
    }
}

/// JSON export of a tower partition.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TowerJson {
    pub a: u64,
    pub level: usize,
    pub identity: QuadElem,
    pub floor_count: usize,
    pub floors: Vec<FloorJson>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FloorJson {
    pub column: Column,
    pub iterate: u64,
    pub left: QuadElem,
    pub right: QuadElem,
    pub length: QuadElem,
}

/// Builds and verifies the level-`n` tower. Refuses when the floor count
/// `q_{n+1} + q_n` exceeds the enumeration guard.
pub fn tower_partition(params: &RotationParams, n: usize) -> Result<TowerPartition> {
    let g = TowerGeometry::new(params, n);
    let (long_h, short_h) = g.heights(n);
    let count: BigInt = long_h + short_h;
    guard("floor count q_{n+1} + q_n", &count, ENUMERATION_GUARD)?;
    let base_long = g.interval_in(n);
    let base_short = g.interval_in(n + 1);
    let columns = |base: &CircleInterval, height: &BigInt| {
        let h: u64 = height.try_into().expect("guarded");
        let mut out = Vec::with_capacity(h as usize);
        let mut f = base.clone();
        for _ in 0..h {
            let next = f.translate(params.alpha());
            out.push(f);
            f = next;
        }
        out
    };
    let long_floors = columns(&base_long, long_h);
    let short_floors = columns(&base_short, short_h);
    let identity = base_long.length().scale_int(long_h) + base_short.length().scale_int(short_h);
    let tower = TowerPartition {
        level: n,
        base_long,
        base_short,
        long_floors,
        short_floors,
        identity,
    };
    if !tower.verify() {
        return Err(Error::InvalidInterval(format!(
            "level-{n} floors do not tile the circle"
        )));
    }
    Ok(tower)
}
