use serde::Serialize;

use crate::error::{Error, Result};

/// Absolute tolerance for equality of reals across the crate.
pub const TOL: f64 = 1e-12;

/// Infimum and supremum of a kernel value over a cylinder.
///
/// Endpoints are plain `f64`; there is no directed rounding.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProbabilityInterval {
    lo: f64,
    hi: f64,
}

impl ProbabilityInterval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite()) {
            return Err(Error::input(format!("non-finite interval [{lo}, {hi}]")));
        }
        if lo > hi + TOL {
            return Err(Error::input(format!("interval lower bound {lo} exceeds upper {hi}")));
        }
        if lo < -TOL || hi > 1.0 + TOL {
            return Err(Error::input(format!("interval [{lo}, {hi}] leaves [0, 1]")));
        }
        let lo = lo.clamp(0.0, 1.0);
        let hi = hi.clamp(lo, 1.0);
        Ok(Self { lo, hi })
    }

    /// Builds an interval from endpoints known to be valid up to rounding.
    pub(crate) fn clamped(lo: f64, hi: f64) -> Self {
        let lo = lo.clamp(0.0, 1.0);
        let hi = hi.clamp(0.0, 1.0).max(lo);
        Self { lo, hi }
    }

    pub fn point(v: f64) -> Self {
        Self::clamped(v, v)
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn is_degenerate(&self) -> bool {
        self.width() <= TOL
    }

    pub fn contains(&self, v: f64) -> bool {
        v >= self.lo - TOL && v <= self.hi + TOL
    }

    /// `self ⊆ other` up to [`TOL`].
    pub fn within(&self, other: &Self) -> bool {
        self.lo >= other.lo - TOL && self.hi <= other.hi + TOL
    }

    pub fn hull(&self, other: &Self) -> Self {
        Self { lo: self.lo.min(other.lo), hi: self.hi.max(other.hi) }
    }

    pub fn intersect(&self, other: &Self) -> Option<Self> {
        let lo = self.lo.max(other.lo);
        let hi = self.hi.min(other.hi);
        (lo <= hi + TOL).then(|| Self::clamped(lo, hi.max(lo)))
    }

    /// Product of two intervals of nonnegative reals.
    pub fn product(&self, other: &Self) -> Self {
        Self::clamped(self.lo * other.lo, self.hi * other.hi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn rejects_inverted_and_out_of_range() {
        assert!(ProbabilityInterval::new(0.6, 0.4).is_err());
        assert!(ProbabilityInterval::new(-0.1, 0.4).is_err());
        assert!(ProbabilityInterval::new(0.1, 1.2).is_err());
        assert!(ProbabilityInterval::new(f64::NAN, 0.2).is_err());
        let p = ProbabilityInterval::new(0.2, 0.8).unwrap();
        assert!((p.midpoint() - 0.5).abs() < TOL);
        assert!(!p.is_degenerate());
        assert!(ProbabilityInterval::point(0.3).is_degenerate());
    }

    #[test]
    fn disjoint_intersection_is_none() {
        let a = ProbabilityInterval::new(0.1, 0.2).unwrap();
        let b = ProbabilityInterval::new(0.5, 0.6).unwrap();
        assert!(a.intersect(&b).is_none());
        assert_eq!(a.hull(&b), ProbabilityInterval::new(0.1, 0.6).unwrap());
    }

    fn interval() -> impl Strategy<Value = ProbabilityInterval> {
        (0.0f64..=1.0, 0.0f64..=1.0).prop_map(|(a, b)| ProbabilityInterval::new(a.min(b), a.max(b)).unwrap())
    }

    proptest! {
        #[test]
        fn products_and_intersections_stay_in_unit_interval(a in interval(), b in interval()) {
            let p = a.product(&b);
            prop_assert!(0.0 <= p.lo() && p.lo() <= p.hi() && p.hi() <= 1.0);
            if let Some(i) = a.intersect(&b) {
                prop_assert!(0.0 <= i.lo() && i.lo() <= i.hi() && i.hi() <= 1.0);
                prop_assert!(i.within(&a) && i.within(&b));
            }
        }
    }
}
