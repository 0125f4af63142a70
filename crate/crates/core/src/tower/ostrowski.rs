use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use super::convergents;
use crate::field::RotationParams;

/// Greedy Ostrowski digits: `value = Σ digits[k]·q_k`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OstrowskiRep {
    #[serde(with = "crate::serde_bigint")]
    pub value: BigInt,
    pub digits: Vec<u64>,
}

impl OstrowskiRep {
    pub fn evaluate(&self, params: &RotationParams) -> BigInt {
        let conv = convergents(params, self.digits.len());
        self.digits
            .iter()
            .zip(&conv)
            .map(|(b, c)| BigInt::from(*b) * &c.q)
            .sum()
    }
}

/// Greedy numeration of `i ≥ 0` over the denominators `q_k`.
pub fn ostrowski(params: &RotationParams, i: &BigInt) -> OstrowskiRep {
    assert!(*i >= BigInt::zero(), "Ostrowski numeration needs i ≥ 0");
    let mut count = 1;
    let mut conv = convergents(params, count);
    while conv[count].q <= *i {
        count += 1;
        conv = convergents(params, count);
    }
    let mut digits = vec![0u64; count];
    let mut rest = i.clone();
    for k in (0..count).rev() {
        let (b, r) = rest.div_rem(&conv[k].q);
        digits[k] = u64::try_from(&b).expect("digit ≤ a");
        rest = r;
    }
    while digits.len() > 1 && digits.last() == Some(&0) {
        digits.pop();
    }
    OstrowskiRep {
        value: i.clone(),
        digits,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn examples() {
        let p = RotationParams::new(2).unwrap();
        assert!(ostrowski(&p, &BigInt::zero())
            .digits
            .iter()
            .all(|&d| d == 0));
        assert_eq!(ostrowski(&p, &7.into()).digits, vec![0, 1, 1]);
        let q3 = convergents(&p, 3)[3].q.clone();
        assert_eq!(ostrowski(&p, &q3).digits, vec![0, 0, 0, 1]);
    }

    proptest! {
        #[test]
        fn round_trip_and_greedy(a in 1u64..12, raw in 0u64..u64::MAX) {
            let p = RotationParams::new(a).unwrap();
            let conv = convergents(&p, 8);
            let i = BigInt::from(raw) % &conv[8].q;
            let rep = ostrowski(&p, &i);
            prop_assert_eq!(rep.evaluate(&p), i);
            let conv = convergents(&p, rep.digits.len());
            let mut prefix = BigInt::zero();
            for (k, b) in rep.digits.iter().enumerate() {
                prop_assert!(*b <= a);
                prefix += BigInt::from(*b) * &conv[k].q;
                prop_assert!(prefix < conv[k + 1].q);
            }
        }
    }
}
