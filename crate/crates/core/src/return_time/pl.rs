use std::cmp::Ordering;
use std::sync::OnceLock;

use num_bigint::BigInt;
use num_integer::Integer;

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{CirclePoint, QuadElem};
use crate::tower::CircleInterval;

/// Anything that can be evaluated pointwise on the circle.
pub trait CircleFunction {
    /// Partial quotient of the field the function is defined over.
    fn a(&self) -> u64;
    fn eval(&self, x: &CirclePoint) -> QuadElem;

    /// `Σ_{k<steps} f(x + kα)`, one term at a time.
    fn orbit_sum(&self, alpha: &QuadElem, x: &CirclePoint, steps: u64) -> QuadElem {
        let mut sum = QuadElem::zero(self.a());
        let mut y = x.clone();
        for _ in 0..steps {
            sum = sum + self.eval(&y);
            y = y.translate(alpha);
        }
        sum
    }
}

/// A continuous piecewise-linear function on the circle.
///
/// `slopes[k]` is the slope on the arc from `breakpoints[k]` to
/// `breakpoints[k + 1]`; the last arc wraps through `0`.
#[derive(Clone, Debug)]
pub struct PLFunction {
    a: u64,
    breakpoints: Vec<CirclePoint>,
    values: Vec<QuadElem>,
    slopes: Vec<BigRational>,
    approx: Vec<f64>,
    tables: OnceLock<OrbitTables>,
}

impl PartialEq for PLFunction {
    fn eq(&self, other: &Self) -> bool {
        self.a == other.a
            && self.breakpoints == other.breakpoints
            && self.values == other.values
            && self.slopes == other.slopes
    }
}

/// Integer data for [`CircleFunction::orbit_sum`]: the intercepts
/// `v_k − s_k·b_k` over a common denominator, and slopes by class.
#[derive(Clone, Debug)]
struct OrbitTables {
    den: BigInt,
    intercepts: Vec<(BigInt, BigInt)>,
    slope_class: Vec<usize>,
    slope_values: Vec<BigRational>,
}

/// Exact comparison of circle points, sorting by a cached `f64` first.
fn cmp_points(x: (&CirclePoint, f64), y: (&CirclePoint, f64)) -> Ordering {
    let scale = x.1.abs().max(y.1.abs());
    if scale > 1e-290 && (x.1 - y.1).abs() > 1e-9 * scale {
        return x.1.partial_cmp(&y.1).expect("finite");
    }
    x.0.value().cmp_exact(y.0.value())
}

impl PLFunction {
    /// The constant function `v`, stored with a single breakpoint at `0`.
    pub fn constant(v: QuadElem) -> Self {
        let a = v.a();
        Self {
            a,
            breakpoints: vec![CirclePoint::zero(a)],
            values: vec![v],
            slopes: vec![BigRational::zero()],
            approx: vec![0.0],
            tables: OnceLock::new(),
        }
    }

    /// Builds from explicit parts, checking order and continuity.
    pub fn from_parts(
        breakpoints: Vec<CirclePoint>,
        values: Vec<QuadElem>,
        slopes: Vec<BigRational>,
    ) -> Result<Self> {
        if breakpoints.is_empty()
            || breakpoints.len() != values.len()
            || breakpoints.len() != slopes.len()
        {
            return Err(Error::InvalidParameter(
                "breakpoints, values and slopes must be nonempty and of equal length".into(),
            ));
        }
        let a = breakpoints[0].a();
        if breakpoints.iter().any(|b| b.a() != a) || values.iter().any(|v| v.a() != a) {
            return Err(Error::InvalidParameter(
                "mixed fields in PL function".into(),
            ));
        }
        let approx: Vec<f64> = breakpoints.iter().map(|b| b.value().to_f64()).collect();
        for k in 1..breakpoints.len() {
            if cmp_points(
                (&breakpoints[k - 1], approx[k - 1]),
                (&breakpoints[k], approx[k]),
            ) != Ordering::Less
            {
                return Err(Error::InvalidParameter(
                    "breakpoints must be strictly increasing".into(),
                ));
            }
        }
        let f = Self {
            a,
            breakpoints,
            values,
            slopes,
            approx,
            tables: OnceLock::new(),
        };
        if !f.is_continuous() {
            return Err(Error::InvalidParameter("PL data is not continuous".into()));
        }
        Ok(f)
    }

    /// Sweep construction from slope jumps. `local(p)` must return the
    /// function value at `p` and the slope just to the right of `p`; it is
    /// called once, at the first breakpoint.
    fn from_events(
        a: u64,
        mut events: Vec<(CirclePoint, f64, BigRational)>,
        local: impl Fn(&CirclePoint) -> (QuadElem, BigRational),
    ) -> Self {
        events.sort_by(|x, y| cmp_points((&x.0, x.1), (&y.0, y.1)));
        let mut merged: Vec<(CirclePoint, f64, BigRational)> = Vec::with_capacity(events.len());
        for (p, f, d) in events {
            match merged.last_mut() {
                Some(last) if last.0 == p => last.2 += d,
                _ => merged.push((p, f, d)),
            }
        }
        merged.retain(|e| !e.2.is_zero());
        if merged.is_empty() {
            let zero = CirclePoint::zero(a);
            return Self::constant(local(&zero).0);
        }
        let (v0, s0) = local(&merged[0].0);
        let m = merged.len();
        let mut breakpoints = Vec::with_capacity(m);
        let mut approx = Vec::with_capacity(m);
        let mut values = Vec::with_capacity(m);
        let mut slopes = Vec::with_capacity(m);
        let mut value = v0;
        let mut slope = s0;
        for (k, (p, f, d)) in merged.into_iter().enumerate() {
            if k > 0 {
                let prev: &CirclePoint = &breakpoints[k - 1];
                let step = p.value() - prev.value();
                value = value + step.scale(&slope);
                slope += d;
            }
            breakpoints.push(p);
            approx.push(f);
            values.push(value.clone());
            slopes.push(slope.clone());
        }
        Self {
            a,
            breakpoints,
            values,
            slopes,
            approx,
            tables: OnceLock::new(),
        }
    }

    /// `Σ w·χ_I` over the given bumps.
    pub fn from_bumps(a: u64, bumps: &[(CircleInterval, BigRational)]) -> Self {
        let third = BigRational::new(1.into(), 3.into());
        let mut events = Vec::with_capacity(4 * bumps.len());
        for (iv, w) in bumps {
            let l3 = iv.length().scale(&third);
            let p1 = iv.left().translate(&l3);
            let p2 = p1.translate(&l3);
            for (p, d) in [
                (iv.left().clone(), w.clone()),
                (p1, -w.clone()),
                (p2, -w.clone()),
                (iv.right().clone(), w.clone()),
            ] {
                let f = p.value().to_f64();
                events.push((p, f, d));
            }
        }
        Self::from_events(a, events, |p| {
            let mut v = QuadElem::zero(a);
            let mut s = BigRational::zero();
            for (iv, w) in bumps {
                let (cv, cs) = bump_local(iv, p);
                v = v + cv.scale(w);
                s += cs * w;
            }
            (v, s)
        })
    }

    /// Pointwise sum with merged breakpoints.
    pub fn sum(fs: &[&PLFunction]) -> Result<Self> {
        let Some(first) = fs.first() else {
            return Err(Error::InvalidParameter("empty sum".into()));
        };
        let a = first.a;
        if fs.iter().any(|f| f.a != a) {
            return Err(Error::ParameterMismatch {
                left: a,
                right: fs.iter().find(|f| f.a != a).expect("exists").a,
            });
        }
        let mut events = Vec::new();
        for f in fs {
            let m = f.breakpoints.len();
            for k in 0..m {
                let prev = &f.slopes[(k + m - 1) % m];
                events.push((f.breakpoints[k].clone(), f.approx[k], &f.slopes[k] - prev));
            }
        }
        Ok(Self::from_events(a, events, |p| {
            let mut v = QuadElem::zero(a);
            let mut s = BigRational::zero();
            for f in fs {
                let k = f.arc_index(p);
                v = v + f.value_on_arc(k, p);
                s += &f.slopes[k];
            }
            (v, s)
        }))
    }

    pub fn breakpoints(&self) -> &[CirclePoint] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[QuadElem] {
        &self.values
    }

    pub fn slopes(&self) -> &[BigRational] {
        &self.slopes
    }

    pub fn len(&self) -> usize {
        self.breakpoints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.breakpoints.is_empty()
    }

    /// Index of the arc containing `x`: the last breakpoint `≤ x`, or the
    /// wrapping arc when `x` precedes every breakpoint.
    fn arc_index(&self, x: &CirclePoint) -> usize {
        let xf = x.value().to_f64();
        let mut k = self.approx.partition_point(|&b| b <= xf);
        while k < self.len()
            && cmp_points((&self.breakpoints[k], self.approx[k]), (x, xf)) != Ordering::Greater
        {
            k += 1;
        }
        while k > 0
            && cmp_points((&self.breakpoints[k - 1], self.approx[k - 1]), (x, xf))
                == Ordering::Greater
        {
            k -= 1;
        }
        if k == 0 {
            self.len() - 1
        } else {
            k - 1
        }
    }

    fn orbit_tables(&self) -> &OrbitTables {
        self.tables.get_or_init(|| {
            let cs: Vec<QuadElem> = (0..self.len())
                .map(|k| &self.values[k] - self.breakpoints[k].value().scale(&self.slopes[k]))
                .collect();
            let den = cs.iter().fold(BigInt::one(), |d, c| {
                d.lcm(c.p().denom()).lcm(c.q().denom())
            });
            let num = |r: &BigRational| (r * &den).to_integer();
            let intercepts = cs.iter().map(|c| (num(c.p()), num(c.q()))).collect();
            let mut slope_values: Vec<BigRational> = Vec::new();
            let slope_class = self
                .slopes
                .iter()
                .map(|s| match slope_values.iter().position(|v| v == s) {
                    Some(i) => i,
                    None => {
                        slope_values.push(s.clone());
                        slope_values.len() - 1
                    }
                })
                .collect();
            OrbitTables {
                den,
                intercepts,
                slope_class,
                slope_values,
            }
        })
    }

    fn value_on_arc(&self, k: usize, x: &CirclePoint) -> QuadElem {
        let mut dx = x.value() - self.breakpoints[k].value();
        if dx.is_negative() {
            dx = dx.add_rational(&BigRational::one());
        }
        &self.values[k] + dx.scale(&self.slopes[k])
    }

    /// Checks that each arc's linear extension lands on the next value.
    pub fn is_continuous(&self) -> bool {
        let m = self.len();
        (0..m).all(|k| {
            let next = (k + 1) % m;
            self.value_on_arc(k, &self.breakpoints[next]) == self.values[next]
        })
    }

    /// Sum of arc lengths, `1` for any valid function.
    pub fn total_length(&self) -> QuadElem {
        let m = self.len();
        if m == 1 {
            return QuadElem::one(self.a);
        }
        (0..m).fold(QuadElem::zero(self.a), |acc, k| {
            let next = &self.breakpoints[(k + 1) % m];
            acc + CirclePoint::reduce(&(next.value() - self.breakpoints[k].value())).into_value()
        })
    }

    pub fn min_value(&self) -> QuadElem {
        self.values
            .iter()
            .cloned()
            .reduce(QuadElem::min_of)
            .expect("nonempty")
    }

    pub fn max_value(&self) -> QuadElem {
        self.values
            .iter()
            .cloned()
            .reduce(QuadElem::max_of)
            .expect("nonempty")
    }

    pub fn sup_norm(&self) -> QuadElem {
        self.min_value().abs().max_of(self.max_value().abs())
    }

    /// Largest `|slope|`.
    pub fn lipschitz(&self) -> BigRational {
        self.slopes
            .iter()
            .map(|s| s.abs())
            .max()
            .unwrap_or_else(BigRational::zero)
    }

    pub fn add_constant(&self, c: &QuadElem) -> Self {
        Self {
            values: self.values.iter().map(|v| v + c).collect(),
            tables: OnceLock::new(),
            ..self.clone()
        }
    }

    /// Values at `resolution` equally spaced rational points `k/resolution`.
    pub fn sample(&self, resolution: u32) -> Vec<(CirclePoint, QuadElem)> {
        (0..resolution)
            .map(|k| {
                let x = CirclePoint::reduce(&QuadElem::from_rational(
                    self.a,
                    BigRational::new(k.into(), resolution.into()),
                ));
                let v = self.eval(&x);
                (x, v)
            })
            .collect()
    }

    pub fn to_json(&self) -> PLJson {
        PLJson {
            a: self.a,
            pieces: (0..self.len())
                .map(|k| PLPiece {
                    x: self.breakpoints[k].value().clone(),
                    value: self.values[k].clone(),
                    slope: crate::field::rational_string(&self.slopes[k]),
                })
                .collect(),
        }
    }

    pub fn from_json(json: &PLJson) -> Result<Self> {
        let mut bps = Vec::with_capacity(json.pieces.len());
        let mut values = Vec::with_capacity(json.pieces.len());
        let mut slopes = Vec::with_capacity(json.pieces.len());
        for piece in &json.pieces {
            bps.push(CirclePoint::try_from(piece.x.clone()).map_err(Error::InvalidParameter)?);
            values.push(piece.value.clone());
            slopes.push(crate::field::parse_rational(&piece.slope)?);
        }
        Self::from_parts(bps, values, slopes)
    }
}

impl CircleFunction for PLFunction {
    fn a(&self) -> u64 {
        self.a
    }

    fn eval(&self, x: &CirclePoint) -> QuadElem {
        let k = self.arc_index(x);
        self.value_on_arc(k, x)
    }

    /// Each orbit point `y_t = x + tα − m_t` is assigned to its arc `k`;
    /// then `f(y_t) = v_k + s_k·(y_t − b_k + w_t)` with `w_t = 1` on the
    /// wrapped part of the last arc. The per-arc tallies of `1`, `t`, `m_t`
    /// and `w_t` give the sum exactly. Arcs are found in floating point and
    /// re-derived exactly whenever a point lies near a breakpoint or near
    /// `0`.
    fn orbit_sum(&self, alpha: &QuadElem, x: &CirclePoint, steps: u64) -> QuadElem {
        let len = self.len();
        let mut count = vec![0u64; len];
        let mut sum_t = vec![0u128; len];
        let mut sum_m = vec![0i128; len];
        let mut wraps = vec![0u64; len];
        let xf = x.value().to_f64();
        let af = alpha.to_f64();
        for t in 0..steps {
            let raw = xf + t as f64 * af;
            let m = raw.floor();
            let yf = raw - m;
            let tol = 1e-12 + 1e-15 * t as f64;
            let kf = self.approx.partition_point(|&b| b <= yf);
            let near = yf < tol
                || yf > 1.0 - tol
                || (kf < len && self.approx[kf] - yf < tol)
                || (kf > 0 && yf - self.approx[kf - 1] < tol);
            let (k, m, wrapped) = if near {
                let full = x.value() + &alpha.scale_int(&t.into());
                let m = full.floor();
                let y = CirclePoint::reduce(&full);
                let k = self.arc_index(&y);
                let wrapped = (y.value() - self.breakpoints[k].value()).is_negative();
                (
                    k,
                    i128::try_from(&m).expect("orbit stays near the circle"),
                    wrapped,
                )
            } else if kf == 0 {
                (len - 1, m as i128, true)
            } else {
                (kf - 1, m as i128, false)
            };
            count[k] += 1;
            sum_t[k] += t as u128;
            sum_m[k] += m;
            if wrapped {
                wraps[k] += 1;
            }
        }
        let tables = self.orbit_tables();
        let classes = tables.slope_values.len();
        let (mut n_c, mut t_c, mut w_c) = (
            vec![0u128; classes],
            vec![0u128; classes],
            vec![0i128; classes],
        );
        let (mut acc_p, mut acc_q) = (BigInt::zero(), BigInt::zero());
        for k in 0..len {
            if count[k] == 0 {
                continue;
            }
            let n = BigInt::from(count[k]);
            acc_p += &n * &tables.intercepts[k].0;
            acc_q += &n * &tables.intercepts[k].1;
            let c = tables.slope_class[k];
            n_c[c] += u128::from(count[k]);
            t_c[c] += sum_t[k];
            w_c[c] += i128::from(wraps[k]) - sum_m[k];
        }
        let mut total = QuadElem::new(
            self.a,
            BigRational::new(acc_p, tables.den.clone()),
            BigRational::new(acc_q, tables.den.clone()),
        );
        for c in 0..classes {
            if n_c[c] == 0 || tables.slope_values[c].is_zero() {
                continue;
            }
            let along = x.value().scale_int(&n_c[c].into()) + alpha.scale_int(&t_c[c].into());
            let along = along.add_rational(&BigRational::from_integer(w_c[c].into()));
            total = total + along.scale(&tables.slope_values[c]);
        }
        total
    }
}

/// Value of `χ_I` at `p` and its slope just right of `p`.
fn bump_local(iv: &CircleInterval, p: &CirclePoint) -> (QuadElem, BigRational) {
    let t = iv.offset(p);
    let l = iv.length();
    if t >= *l {
        return (QuadElem::zero(l.a()), BigRational::zero());
    }
    let third = BigRational::new(1.into(), 3.into());
    let l3 = l.scale(&third);
    let rest = l - &t;
    if t < l3 {
        (t, BigRational::one())
    } else if rest > l3 {
        (l3, BigRational::zero())
    } else {
        (rest, -BigRational::one())
    }
}

/// JSON export: one `(breakpoint, value, slope)` triple per arc.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PLJson {
    pub a: u64,
    pub pieces: Vec<PLPiece>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PLPiece {
    pub x: QuadElem,
    pub value: QuadElem,
    pub slope: String,
}
