//! Exact construction of a kinematic-expansive suspension of the rotation
//! by `α = [0; a, a, a, …]`.
//!
//! The crate builds the rotation parameters and Rokhlin towers in the
//! quadratic field Q(α), the piecewise-linear return time
//! `T = Σ_n T_n`, its Birkhoff sums (naive and tower-based), certified
//! checks of the separation estimates, and the suspension flow over the
//! circle with a positivized roof.

pub mod birkhoff;
pub mod error;
pub mod field;
pub mod flow;
pub mod return_time;
pub mod tower;

pub use error::{Error, Result};
pub use field::{circle_dist, circle_norm, CirclePoint, QuadElem, RotationParams};

pub(crate) mod serde_bigint {
    use num_bigint::BigInt;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &BigInt, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&v.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigInt, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

pub(crate) mod serde_option_bigint {
    use num_bigint::BigInt;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &Option<BigInt>, s: S) -> Result<S::Ok, S::Error> {
        match v {
            Some(v) => s.serialize_some(&v.to_string()),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<BigInt>, D::Error> {
        Option::<String>::deserialize(d)?
            .map(|s| s.parse().map_err(serde::de::Error::custom))
            .transpose()
    }
}
