//! Compensated (double-double) bookkeeping of fast phases `s/ε`.
//!
//! Phases such as `t/ε` reach `1e6` and beyond for small `ε`; reducing them
//! modulo `2π` in plain `f64` loses several digits. Here every phase is
//! carried as an unevaluated sum `hi + lo` and reduced against a
//! double-double representation of the period.

use std::f64::consts::PI;

const TWO_PI_HI: f64 = 2.0 * PI;
const TWO_PI_LO: f64 = 2.449_293_598_294_706_4e-16;

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let err = (a - (s - bb)) + (b - bb);
    (s, err)
}

#[inline]
fn fast_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

/// `a / b` as `q + r` with `r` the first-order correction.
#[inline]
fn two_div(a: f64, b: f64) -> (f64, f64) {
    let q = a / b;
    let rem = (-q).mul_add(b, a);
    (q, rem / b)
}

/// Subtract `k · period` from `(hi, lo)` where `period = mult · 2π` in double-double.
fn subtract_periods(hi: f64, lo: f64, k: f64, mult: f64) -> (f64, f64) {
    let (p_hi, p_err) = two_prod(k * mult, TWO_PI_HI);
    let p_lo = k * mult * TWO_PI_LO;
    let (s, e) = two_sum(hi, -p_hi);
    fast_two_sum(s, e + lo - p_err - p_lo)
}

/// A fast phase reduced modulo `2π`, kept in two parts.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Phase {
    hi: f64,
    lo: f64,
}

impl Phase {
    pub fn zero() -> Self {
        Self::default()
    }

    /// The phase `s/ε mod 2π`.
    pub fn from_ratio(s: f64, eps: f64) -> Self {
        let mut p = Self::zero();
        p.advance(s, eps);
        p
    }

    /// Advance by `s/ε` (any sign) and reduce back into `[0, 2π)`.
    pub fn advance(&mut self, s: f64, eps: f64) {
        let (q, r) = two_div(s, eps);
        let (hi, e) = two_sum(self.hi, q);
        let (hi, lo) = fast_two_sum(hi, e + self.lo + r);
        let (hi, lo) = reduce(hi, lo, 1.0, false);
        self.hi = hi;
        self.lo = lo;
    }

    /// The phase as a single `f64` in `[0, 2π)`.
    pub fn value(&self) -> f64 {
        let v = self.hi + self.lo;
        if v >= TWO_PI_HI {
            0.0
        } else {
            v
        }
    }
}

/// Reduce `hi + lo` modulo `mult · 2π`, into `[0, P)` or, when `symmetric`, `(-P/2, P/2]`.
fn reduce(hi: f64, lo: f64, mult: f64, symmetric: bool) -> (f64, f64) {
    let period = mult * TWO_PI_HI;
    let v = hi + lo;
    let k = if symmetric {
        (v / period).round()
    } else {
        (v / period).floor()
    };
    let (mut hi, mut lo) = if k != 0.0 {
        subtract_periods(hi, lo, k, mult)
    } else {
        (hi, lo)
    };
    // one correction pass for values landing just outside the target range
    if !symmetric {
        if hi + lo < 0.0 {
            (hi, lo) = subtract_periods(hi, lo, -1.0, mult);
        } else if hi + lo >= period {
            (hi, lo) = subtract_periods(hi, lo, 1.0, mult);
        }
    }
    (hi, lo)
}

/// A real angle `x` together with a representative of `x mod 4π`.
///
/// Integer multiples `ℓ·x` keep the same congruence, so `e^{iℓx/2}` and
/// `sin(ℓx/2)` can be evaluated on the small representative while the
/// magnitude `ℓ·x` (used in denominators) stays exact.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Angle {
    pub full: f64,
    pub wrapped: f64,
}

impl Angle {
    pub fn new(x: f64) -> Self {
        if x.abs() <= TWO_PI_HI {
            return Self { full: x, wrapped: x };
        }
        let (hi, lo) = reduce(x, 0.0, 2.0, true);
        Self {
            full: x,
            wrapped: hi + lo,
        }
    }

    /// The angle `s/ε`, reduced with a compensated quotient.
    pub fn from_ratio(s: f64, eps: f64) -> Self {
        let (q, r) = two_div(s, eps);
        let full = q + r;
        if full.abs() <= TWO_PI_HI {
            return Self {
                full,
                wrapped: full,
            };
        }
        let (hi, lo) = reduce(q, r, 2.0, true);
        Self {
            full,
            wrapped: hi + lo,
        }
    }

    /// `m · x` for an integer `m`.
    pub fn scaled(self, m: i64) -> Self {
        let m = m as f64;
        Self {
            full: m * self.full,
            wrapped: m * self.wrapped,
        }
    }

    pub fn neg(self) -> Self {
        Self {
            full: -self.full,
            wrapped: -self.wrapped,
        }
    }
}
