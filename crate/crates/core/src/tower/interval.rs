use num_rational::BigRational;
use num_traits::One;

use crate::error::{Error, Result};
use crate::field::{CirclePoint, QuadElem};

/// A closed arc of the circle, running from `left` to `right` in the
/// positive direction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CircleInterval {
    left: CirclePoint,
    right: CirclePoint,
    length: QuadElem,
}

impl CircleInterval {
    pub fn new(left: CirclePoint, length: QuadElem) -> Result<Self> {
        let one = QuadElem::one(length.a());
        if !length.is_positive() || length >= one {
            return Err(Error::InvalidInterval(format!(
                "arc length must lie in (0, 1), got {length:?}"
            )));
        }
        let right = left.translate(&length);
        Ok(Self {
            left,
            right,
            length,
        })
    }

    /// Arc between two signed reals `lo` and `hi` (in either order), both
    /// within `1` of each other.
    pub(crate) fn from_signed(x: &QuadElem, y: &QuadElem) -> Self {
        let (lo, hi) = if x <= y { (x, y) } else { (y, x) };
        Self::new(CirclePoint::reduce(lo), hi - lo).expect("nondegenerate arc")
    }

    pub fn left(&self) -> &CirclePoint {
        &self.left
    }

    pub fn right(&self) -> &CirclePoint {
        &self.right
    }

    pub fn length(&self) -> &QuadElem {
        &self.length
    }

    /// Positive offset of `x` from the left endpoint, in `[0, 1)`.
    pub fn offset(&self, x: &CirclePoint) -> QuadElem {
        CirclePoint::reduce(&(x.value() - self.left.value())).into_value()
    }

    pub fn contains(&self, x: &CirclePoint) -> bool {
        self.offset(x) <= self.length
    }

    pub fn midpoint(&self) -> CirclePoint {
        self.point_at(&BigRational::new(1.into(), 2.into()))
    }

    /// The point a fraction `t ∈ [0, 1]` of the way from left to right.
    pub fn point_at(&self, t: &BigRational) -> CirclePoint {
        self.left.translate(&self.length.scale(t))
    }

    pub fn translate(&self, t: &QuadElem) -> Self {
        Self {
            left: self.left.translate(t),
            right: self.right.translate(t),
            length: self.length.clone(),
        }
    }

    /// The complementary fraction `1 − length`.
    pub fn complement_length(&self) -> QuadElem {
        (-&self.length).add_rational(&BigRational::one())
    }
}
