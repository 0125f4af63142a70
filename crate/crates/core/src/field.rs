//! Exact arithmetic in the quadratic field Q(α), α = (−a + √(a²+4))/2.
//!
//! Every real quantity of the construction (rotation number, interval
//! endpoints, bump heights, Birkhoff sums) is a [`QuadElem`] `p + q·α` with
//! rational `p`, `q`. Products are reduced with `α² = 1 − a·α`; signs are
//! decided exactly by comparing squares of integers.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Rotation parameters for the continued fraction `[0; a, a, a, …]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RotationParams {
    a: u64,
    discriminant: BigInt,
    alpha: QuadElem,
    growth: QuadElem,
    coeff_a: QuadElem,
    coeff_b: QuadElem,
}

impl RotationParams {
    /// Builds `α = (−a + √(a²+4))/2`, `c = a + α` and the coefficients of
    /// `q_n = A·cⁿ + B·(−c)⁻ⁿ`.
    pub fn new(a: u64) -> Result<Self> {
        if a == 0 {
            return Err(Error::InvalidParameter(
                "the partial quotient a must be a positive integer".into(),
            ));
        }
        let alpha = QuadElem::alpha(a);
        let growth = QuadElem::from_int(a, a) + &alpha;
        // √(a²+4) = a + 2α
        let sqrt_disc = QuadElem::from_int(a, a) + alpha.scale_int(&BigInt::from(2));
        let inv_sqrt = sqrt_disc.inverse().expect("√(a²+4) is nonzero");
        let coeff_a = &growth * &inv_sqrt;
        let coeff_b = &alpha * &inv_sqrt;
        Ok(Self {
            a,
            discriminant: BigInt::from(a) * BigInt::from(a) + 4,
            alpha,
            growth,
            coeff_a,
            coeff_b,
        })
    }

    pub fn a(&self) -> u64 {
        self.a
    }

    /// `D = a² + 4`.
    pub fn discriminant(&self) -> &BigInt {
        &self.discriminant
    }

    pub fn alpha(&self) -> &QuadElem {
        &self.alpha
    }

    /// The growth rate `c = a + α`, positive root of `x² = a·x + 1`.
    pub fn c(&self) -> &QuadElem {
        &self.growth
    }

    /// Coefficient `A` of `q_n = A·cⁿ + B·(−c)⁻ⁿ`.
    pub fn coeff_a(&self) -> &QuadElem {
        &self.coeff_a
    }

    /// Coefficient `B` of `q_n = A·cⁿ + B·(−c)⁻ⁿ`.
    pub fn coeff_b(&self) -> &QuadElem {
        &self.coeff_b
    }

    pub fn zero(&self) -> QuadElem {
        QuadElem::zero(self.a)
    }

    pub fn int(&self, v: impl Into<BigInt>) -> QuadElem {
        QuadElem::from_int(self.a, v)
    }

    pub fn rational(&self, r: BigRational) -> QuadElem {
        QuadElem::from_rational(self.a, r)
    }

    /// `num/den` as a field element.
    pub fn frac(&self, num: i64, den: i64) -> QuadElem {
        self.rational(BigRational::new(num.into(), den.into()))
    }

    /// `k·α`.
    pub fn multiple_of_alpha(&self, k: &BigInt) -> QuadElem {
        QuadElem::new(
            self.a,
            BigRational::zero(),
            BigRational::from_integer(k.clone()),
        )
    }
}

/// An element `p + q·α` of Q(α). Both rationals are kept reduced, so the
/// representation of a value is unique and `==` is numeric equality.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct QuadElem {
    a: u64,
    p: BigRational,
    q: BigRational,
}

impl QuadElem {
    pub fn new(a: u64, p: BigRational, q: BigRational) -> Self {
        Self { a, p, q }
    }

    pub fn zero(a: u64) -> Self {
        Self::new(a, BigRational::zero(), BigRational::zero())
    }

    pub fn one(a: u64) -> Self {
        Self::from_int(a, 1)
    }

    pub fn alpha(a: u64) -> Self {
        Self::new(a, BigRational::zero(), BigRational::one())
    }

    pub fn from_int(a: u64, v: impl Into<BigInt>) -> Self {
        Self::new(a, BigRational::from_integer(v.into()), BigRational::zero())
    }

    pub fn from_rational(a: u64, r: BigRational) -> Self {
        Self::new(a, r, BigRational::zero())
    }

    /// Partial quotient of the field this element lives in.
    pub fn a(&self) -> u64 {
        self.a
    }

    /// Rational part.
    pub fn p(&self) -> &BigRational {
        &self.p
    }

    /// Coefficient of α.
    pub fn q(&self) -> &BigRational {
        &self.q
    }

    pub fn is_zero(&self) -> bool {
        self.p.is_zero() && self.q.is_zero()
    }

    /// True when the α-coefficient vanishes.
    pub fn is_rational(&self) -> bool {
        self.q.is_zero()
    }

    fn check(&self, other: &Self) -> Result<()> {
        if self.a != other.a {
            return Err(Error::ParameterMismatch {
                left: self.a,
                right: other.a,
            });
        }
        Ok(())
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        Ok(Self::new(self.a, &self.p + &other.p, &self.q + &other.q))
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        Ok(Self::new(self.a, &self.p - &other.p, &self.q - &other.q))
    }

    pub fn checked_mul(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let a = BigRational::from_integer(BigInt::from(self.a));
        let qq = &self.q * &other.q;
        let p = &self.p * &other.p + &qq;
        let q = &self.p * &other.q + &self.q * &other.p - a * qq;
        Ok(Self::new(self.a, p, q))
    }

    pub fn checked_div(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let inv = other.inverse()?;
        self.checked_mul(&inv)
    }

    pub fn scale(&self, r: &BigRational) -> Self {
        Self::new(self.a, &self.p * r, &self.q * r)
    }

    pub fn scale_int(&self, k: &BigInt) -> Self {
        if k.is_zero() {
            return Self::zero(self.a);
        }
        Self::new(
            self.a,
            &self.p * BigRational::from_integer(k.clone()),
            &self.q * BigRational::from_integer(k.clone()),
        )
    }

    pub fn add_rational(&self, r: &BigRational) -> Self {
        Self::new(self.a, &self.p + r, self.q.clone())
    }

    /// Galois conjugate `p + q·α'` with `α' = −a − α`.
    pub fn conj(&self) -> Self {
        let a = BigRational::from_integer(BigInt::from(self.a));
        Self::new(self.a, &self.p - a * &self.q, -&self.q)
    }

    /// Field norm `p² − a·p·q − q²`.
    pub fn norm(&self) -> BigRational {
        let a = BigRational::from_integer(BigInt::from(self.a));
        &self.p * &self.p - a * &self.p * &self.q - &self.q * &self.q
    }

    pub fn inverse(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let n = self.norm();
        let c = self.conj();
        Ok(Self::new(self.a, c.p / &n, c.q / n))
    }

    /// Exact sign, −1, 0 or +1.
    pub fn signum(&self) -> i8 {
        let (u, v) = self.integer_surd_parts();
        surd_sign(&u, &v, self.a)
    }

    pub fn is_positive(&self) -> bool {
        self.signum() > 0
    }

    pub fn is_negative(&self) -> bool {
        self.signum() < 0
    }

    pub fn abs(&self) -> Self {
        if self.is_negative() {
            -self
        } else {
            self.clone()
        }
    }

    /// Writes `2·w·x = u + v·√D` with integers `u`, `v` and `w > 0`; returns
    /// `(u, v, w)` where `w` is the product of the two denominators.
    fn surd_form(&self) -> (BigInt, BigInt, BigInt) {
        let (pn, pd) = (self.p.numer(), self.p.denom());
        let (qn, qd) = (self.q.numer(), self.q.denom());
        let big_p = pn * qd;
        let big_q = qn * pd;
        let u = (big_p << 1usize) - BigInt::from(self.a) * &big_q;
        (u, big_q, pd * qd)
    }

    fn integer_surd_parts(&self) -> (BigInt, BigInt) {
        let (u, v, _) = self.surd_form();
        (u, v)
    }

    /// The unique integer `m` with `m ≤ x < m + 1`.
    pub fn floor(&self) -> BigInt {
        if self.q.is_zero() {
            return self.p.floor().to_integer();
        }
        let guess = self.to_f64();
        if guess.is_finite() && guess.abs() < 1e15 {
            let m = BigInt::from(guess.floor() as i64);
            // to_f64 is accurate to a few ulps, so a guess well inside
            // (m, m + 1) settles the floor without sign tests.
            let frac = guess - guess.floor();
            if guess.abs() < 1e6 && frac > 1e-7 && frac < 1.0 - 1e-7 {
                return m;
            }
            for cand in [m.clone(), &m - 1, &m + 1] {
                if self.floor_is(&cand) {
                    return cand;
                }
            }
        }
        self.floor_by_isqrt()
    }

    fn floor_is(&self, m: &BigInt) -> bool {
        let lo = self.add_rational(&BigRational::from_integer(-m));
        if lo.is_negative() {
            return false;
        }
        let hi = lo.add_rational(&-BigRational::one());
        hi.is_negative()
    }

    fn floor_by_isqrt(&self) -> BigInt {
        // x = (u + v√D) / (2w)
        let (u, v, w) = self.surd_form();
        let denom = w << 1usize;
        let disc = BigInt::from(self.a) * BigInt::from(self.a) + 4;
        let s: BigInt = num_integer::Roots::sqrt(&(&v * &v * disc));
        let (lo, hi) = if v.is_negative() {
            (&u - &s - 1, &u - &s)
        } else {
            (&u + &s, &u + &s + 1)
        };
        let lo = lo.div_floor(&denom);
        let hi = hi.div_floor(&denom);
        let mut m = lo;
        while m <= hi {
            if self.floor_is(&m) {
                return m;
            }
            m += 1;
        }
        unreachable!("isqrt bracket always contains the floor")
    }

    /// Double-precision estimate with small relative error. Elements with
    /// cancellation between `p` and `q·α` go through the conjugate:
    /// `x = N(x) / (p + q·α')`, whose denominator does not cancel.
    pub fn to_f64(&self) -> f64 {
        let pf = self.p.to_f64().unwrap_or(f64::NAN);
        let qf = self.q.to_f64().unwrap_or(f64::NAN);
        let alpha = alpha_f64(self.a);
        if self.p.is_zero() || self.q.is_zero() || self.p.is_positive() == self.q.is_positive() {
            pf + qf * alpha
        } else {
            // N(x) over the common denominator (d1·d2)², with no gcd work
            let (pn, d1) = (self.p.numer(), self.p.denom());
            let (qn, d2) = (self.q.numer(), self.q.denom());
            let pd = pn * d2;
            let qd = qn * d1;
            let a = BigInt::from(self.a);
            let norm = &pd * &pd - &a * &pd * &qd - &qd * &qd;
            let f = |v: &BigInt| v.to_f64().unwrap_or(f64::NAN);
            let conj = f(&pd) - f(&qd) * (self.a as f64 + alpha);
            let v = f(&norm) / (f(&(d1 * d2)) * conj);
            if v.is_finite() {
                v
            } else {
                let n = self.norm().to_f64().unwrap_or(f64::NAN);
                n / (pf - qf * (self.a as f64 + alpha))
            }
        }
    }

    /// Exact comparison. A floating filter settles well-separated values;
    /// near-ties fall through to the exact sign test.
    pub fn cmp_exact(&self, other: &Self) -> Ordering {
        assert_eq!(self.a, other.a, "comparison across different fields");
        let x = self.to_f64();
        let y = other.to_f64();
        let scale = x.abs().max(y.abs());
        if x.is_finite() && y.is_finite() && scale > 1e-290 && (x - y).abs() > 1e-9 * scale {
            return x.partial_cmp(&y).expect("finite");
        }
        match (self - other).signum() {
            -1 => Ordering::Less,
            0 => Ordering::Equal,
            _ => Ordering::Greater,
        }
    }

    pub fn min_of(self, other: Self) -> Self {
        if other < self {
            other
        } else {
            self
        }
    }

    pub fn max_of(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }

    /// `p/q` rendered as `num/den` strings.
    pub fn exact_parts(&self) -> (String, String) {
        (rational_string(&self.p), rational_string(&self.q))
    }
}

pub(crate) fn rational_string(r: &BigRational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

pub(crate) fn parse_rational(s: &str) -> Result<BigRational> {
    BigRational::from_str(s.trim()).map_err(|_| Error::Parse(s.to_string()))
}

/// `α` in double precision, via the cancellation-free `2/(a + √(a²+4))`.
pub fn alpha_f64(a: u64) -> f64 {
    let af = a as f64;
    2.0 / (af + (af * af + 4.0).sqrt())
}

/// Sign of `u + v·√(a²+4)`. `a²+4` is never a perfect square for `a ≥ 1`,
/// so the value vanishes only when `u = v = 0`.
fn surd_sign(u: &BigInt, v: &BigInt, a: u64) -> i8 {
    let su = sign_of(u);
    let sv = sign_of(v);
    if sv == 0 {
        return su;
    }
    if su == 0 || su == sv {
        return sv;
    }
    if let Some(s) = surd_sign_small(u, v, a) {
        return s;
    }
    let disc = BigInt::from(a) * BigInt::from(a) + 4;
    let lhs = u * u;
    let rhs = v * v * disc;
    match lhs.cmp(&rhs) {
        Ordering::Greater => su,
        Ordering::Less => sv,
        Ordering::Equal => unreachable!("√(a²+4) is irrational"),
    }
}

fn surd_sign_small(u: &BigInt, v: &BigInt, a: u64) -> Option<i8> {
    let u = u.to_i128()?;
    let v = v.to_i128()?;
    let disc = (a as i128).checked_mul(a as i128)?.checked_add(4)?;
    let lhs = u.checked_mul(u)?;
    let rhs = v.checked_mul(v)?.checked_mul(disc)?;
    Some(match lhs.cmp(&rhs) {
        Ordering::Greater => u.signum() as i8,
        _ => v.signum() as i8,
    })
}

fn sign_of(x: &BigInt) -> i8 {
    if x.is_zero() {
        0
    } else if x.is_positive() {
        1
    } else {
        -1
    }
}

impl PartialOrd for QuadElem {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        if self.a != other.a {
            return None;
        }
        Some(self.cmp_exact(other))
    }
}

impl fmt::Debug for QuadElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({} + {}·α ≈ {:.12e})", self.p, self.q, self.to_f64())
    }
}

impl fmt::Display for QuadElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.p.is_zero(), self.q.is_zero()) {
            (_, true) => write!(f, "{}", self.p),
            (true, false) => write!(f, "{}α", self.q),
            (false, false) if self.q.is_negative() => write!(f, "{} - {}α", self.p, -&self.q),
            (false, false) => write!(f, "{} + {}α", self.p, self.q),
        }
    }
}

impl Neg for QuadElem {
    type Output = QuadElem;
    fn neg(self) -> QuadElem {
        QuadElem::new(self.a, -self.p, -self.q)
    }
}

impl Neg for &QuadElem {
    type Output = QuadElem;
    fn neg(self) -> QuadElem {
        QuadElem::new(self.a, -&self.p, -&self.q)
    }
}

macro_rules! forward_binop {
    ($trait:ident, $method:ident, $checked:ident) => {
        impl $trait<&QuadElem> for &QuadElem {
            type Output = QuadElem;
            /// Panics when the operands come from different fields; use the
            /// `checked_*` variant to get an error instead.
            fn $method(self, rhs: &QuadElem) -> QuadElem {
                self.$checked(rhs).unwrap_or_else(|e| panic!("{e}"))
            }
        }
        impl $trait<QuadElem> for QuadElem {
            type Output = QuadElem;
            fn $method(self, rhs: QuadElem) -> QuadElem {
                (&self).$method(&rhs)
            }
        }
        impl $trait<&QuadElem> for QuadElem {
            type Output = QuadElem;
            fn $method(self, rhs: &QuadElem) -> QuadElem {
                (&self).$method(rhs)
            }
        }
        impl $trait<QuadElem> for &QuadElem {
            type Output = QuadElem;
            fn $method(self, rhs: QuadElem) -> QuadElem {
                self.$method(&rhs)
            }
        }
    };
}

forward_binop!(Add, add, checked_add);
forward_binop!(Sub, sub, checked_sub);
forward_binop!(Mul, mul, checked_mul);

/// JSON form: exact rationals as `num/den` strings plus a decimal for
/// humans. The decimal is ignored when reading.
#[derive(Serialize, Deserialize)]
struct QuadJson {
    a: u64,
    p: String,
    q: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    approx: Option<String>,
}

impl Serialize for QuadElem {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let (p, q) = self.exact_parts();
        QuadJson {
            a: self.a,
            p,
            q,
            approx: Some(format!("{:.15e}", self.to_f64())),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for QuadElem {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = QuadJson::deserialize(d)?;
        let p = parse_rational(&raw.p).map_err(serde::de::Error::custom)?;
        let q = parse_rational(&raw.q).map_err(serde::de::Error::custom)?;
        if raw.a == 0 {
            return Err(serde::de::Error::custom("a must be positive"));
        }
        Ok(QuadElem::new(raw.a, p, q))
    }
}

/// A point of `S¹ = ℝ/ℤ`, represented by its value in `[0, 1)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "QuadElem", into = "QuadElem")]
pub struct CirclePoint(QuadElem);

impl CirclePoint {
    /// Projects `x` to the circle: `x − ⌊x⌋`.
    pub fn reduce(x: &QuadElem) -> Self {
        let m = x.floor();
        if m.is_zero() {
            return Self(x.clone());
        }
        Self(x.add_rational(&BigRational::from_integer(-m)))
    }

    pub fn zero(a: u64) -> Self {
        Self(QuadElem::zero(a))
    }

    pub fn value(&self) -> &QuadElem {
        &self.0
    }

    pub fn into_value(self) -> QuadElem {
        self.0
    }

    pub fn a(&self) -> u64 {
        self.0.a
    }

    /// `self + t` projected to the circle.
    pub fn translate(&self, t: &QuadElem) -> Self {
        Self::reduce(&(&self.0 + t))
    }

    /// Signed representative in `[−1/2, 1/2)`.
    pub fn signed(&self) -> QuadElem {
        let half = BigRational::new(1.into(), 2.into());
        if self.0.add_rational(&-half).is_negative() {
            self.0.clone()
        } else {
            self.0.add_rational(&-BigRational::one())
        }
    }
}

impl TryFrom<QuadElem> for CirclePoint {
    type Error = String;
    fn try_from(x: QuadElem) -> std::result::Result<Self, String> {
        let r = CirclePoint::reduce(&x);
        if r.0 != x {
            return Err("circle point must lie in [0, 1)".into());
        }
        Ok(r)
    }
}

impl From<CirclePoint> for QuadElem {
    fn from(p: CirclePoint) -> QuadElem {
        p.0
    }
}

impl PartialOrd for CirclePoint {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        self.0.partial_cmp(&other.0)
    }
}

/// Circle distance `min(|x − y|, 1 − |x − y|)`, always in `[0, 1/2]`.
pub fn circle_dist(x: &CirclePoint, y: &CirclePoint) -> QuadElem {
    let t = CirclePoint::reduce(&(x.value() - y.value())).into_value();
    let other = (-&t).add_rational(&BigRational::one());
    t.min_of(other)
}

/// Distance to `0`, written `|x|` for circle points.
pub fn circle_norm(x: &CirclePoint) -> QuadElem {
    circle_dist(x, &CirclePoint::zero(x.a()))
}
