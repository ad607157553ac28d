//! Flat torus `(R/RZ)^n`: coordinate reduction, the induced metric and
//! lifting torus points back into Euclidean space.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Absolute tolerance used wherever two distances are compared for equality.
pub const TAU: f64 = 1e-9;

/// Default lower bound on the period.
pub const MIN_PERIOD: f64 = 2.0;

/// Smallest period for which copies of one cell of diameter 2/3 can never
/// be at distance one from each other.
pub const MIN_PERIOD_RELAXED: f64 = 5.0 / 3.0;

/// Dimension and period of a cubical flat torus.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TorusSpec {
    n: usize,
    period: f64,
}

impl TorusSpec {
    /// Torus with `n >= 1` and `period > 2`.
    pub fn new(n: usize, period: f64) -> Result<Self> {
        Self::with_min_period(n, period, MIN_PERIOD)
    }

    /// Torus with `period > 5/3`, the weakest period that keeps the
    /// red-pair argument valid.
    pub fn relaxed(n: usize, period: f64) -> Result<Self> {
        Self::with_min_period(n, period, MIN_PERIOD_RELAXED)
    }

    /// Torus with any positive period. Intended for adversarial inputs whose
    /// period is too short for the coloring to be sound.
    pub fn unrestricted(n: usize, period: f64) -> Result<Self> {
        Self::with_min_period(n, period, 0.0)
    }

    fn with_min_period(n: usize, period: f64, min_period: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidSpec("dimension must be at least 1".into()));
        }
        if !period.is_finite() || period <= min_period {
            return Err(Error::InvalidSpec(format!(
                "period {period} must exceed {min_period}"
            )));
        }
        Ok(Self { n, period })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn period(&self) -> f64 {
        self.period
    }

    /// Largest possible torus distance, `sqrt(n) * R / 2`.
    pub fn diameter(&self) -> f64 {
        (self.n as f64).sqrt() * self.period / 2.0
    }

    pub fn volume(&self) -> f64 {
        self.period.powi(self.n as i32)
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: len,
            });
        }
        Ok(())
    }

    /// Reduce raw Euclidean coordinates into the fundamental domain `[0, R)^n`.
    pub fn wrap(&self, raw: &[f64]) -> Result<TorusPoint> {
        self.check_len(raw.len())?;
        Ok(TorusPoint {
            coords: raw.iter().map(|&c| reduce(c, self.period)).collect(),
        })
    }

    /// Torus distance between two points of this torus.
    pub fn distance(&self, a: &TorusPoint, b: &TorusPoint) -> Result<f64> {
        self.check_len(a.coords.len())?;
        self.check_len(b.coords.len())?;
        Ok(torus_distance(&a.coords, &b.coords, self.period))
    }

    /// Representative of `other` in `E^n` closest to `center` (with `center`
    /// taken in the fundamental domain).
    pub fn nearest_lift(&self, center: &TorusPoint, other: &TorusPoint) -> Result<Vec<f64>> {
        self.check_len(center.coords.len())?;
        self.check_len(other.coords.len())?;
        let mut out = Vec::with_capacity(self.n);
        for (axis, (&c, &o)) in center.coords.iter().zip(&other.coords).enumerate() {
            let d = o - c;
            if (d.abs() - self.period / 2.0).abs() <= TAU {
                return Err(Error::AmbiguousLift { axis });
            }
            out.push(c + wrap_delta(d, self.period));
        }
        Ok(out)
    }
}

/// A point of the fundamental domain `[0, R)^n`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TorusPoint {
    coords: Vec<f64>,
}

impl TorusPoint {
    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn into_coords(self) -> Vec<f64> {
        self.coords
    }
}

/// Reduce a single coordinate into `[0, period)`.
#[inline]
pub fn reduce(c: f64, period: f64) -> f64 {
    let r = c.rem_euclid(period);
    // rem_euclid can round up to exactly `period` for tiny negative inputs
    if r >= period {
        0.0
    } else {
        r
    }
}

/// Signed minimum-image displacement in `(-R/2, R/2]`.
#[inline]
pub fn wrap_delta(d: f64, period: f64) -> f64 {
    let half = period / 2.0;
    let mut w = d - period * (d / period).round();
    if w > half {
        w -= period;
    } else if w <= -half {
        w += period;
    }
    w
}

/// Per-axis minimum-image displacement magnitude between reduced coordinates.
#[inline]
pub fn axis_gap(a: f64, b: f64, period: f64) -> f64 {
    let d = (a - b).abs();
    d.min(period - d)
}

#[inline]
pub fn torus_distance_sq(a: &[f64], b: &[f64], period: f64) -> f64 {
    a.iter()
        .zip(b)
        .map(|(&x, &y)| {
            let d = axis_gap(x, y, period);
            d * d
        })
        .sum()
}

/// Torus distance between reduced coordinate slices.
#[inline]
pub fn torus_distance(a: &[f64], b: &[f64], period: f64) -> f64 {
    torus_distance_sq(a, b, period).sqrt()
}

/// Minimum-image displacement vector `b - a`.
pub fn displacement(a: &[f64], b: &[f64], period: f64) -> Vec<f64> {
    a.iter()
        .zip(b)
        .map(|(&x, &y)| wrap_delta(y - x, period))
        .collect()
}

pub fn euclidean_norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn euclidean_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn spec(n: usize, r: f64) -> TorusSpec {
        TorusSpec::new(n, r).unwrap()
    }

    /// Minimum of the Euclidean distance over all integer shifts in {-1,0,1}^n.
    fn brute_force_distance(a: &[f64], b: &[f64], period: f64) -> f64 {
        let n = a.len();
        let mut best = f64::INFINITY;
        for code in 0..3usize.pow(n as u32) {
            let mut c = code;
            let mut sq = 0.0;
            for i in 0..n {
                let shift = (c % 3) as f64 - 1.0;
                c /= 3;
                let d = b[i] + shift * period - a[i];
                sq += d * d;
            }
            best = best.min(sq.sqrt());
        }
        best
    }

    #[test]
    fn spec_validation() {
        assert!(TorusSpec::new(0, 10.0).is_err());
        assert!(TorusSpec::new(1, 2.0).is_err());
        assert!(TorusSpec::new(1, 1.8).is_err());
        assert!(TorusSpec::relaxed(1, 1.8).is_ok());
        assert!(TorusSpec::relaxed(1, 1.6).is_err());
        assert!(TorusSpec::new(3, f64::NAN).is_err());
    }

    #[test]
    fn wrap_examples() {
        assert_eq!(spec(1, 10.0).wrap(&[10.5]).unwrap().coords(), &[0.5]);
        assert_eq!(spec(2, 4.0).wrap(&[-0.25, 0.0]).unwrap().coords(), &[3.75, 0.0]);
        assert_eq!(spec(3, 4.0).wrap(&[0.0; 3]).unwrap().coords(), &[0.0; 3]);
        assert!(matches!(
            spec(2, 4.0).wrap(&[1.0]),
            Err(Error::DimensionMismatch { expected: 2, got: 1 })
        ));
    }

    #[test]
    fn reduce_never_returns_period() {
        assert_eq!(reduce(-1e-20, 4.0), 0.0);
        assert!(reduce(-1e-17, 3.0) < 3.0);
    }

    #[test]
    fn distance_examples() {
        let s = spec(1, 10.0);
        let a = s.wrap(&[1.0]).unwrap();
        let b = s.wrap(&[9.0]).unwrap();
        assert_eq!(s.distance(&a, &b).unwrap(), 2.0);

        let s = spec(2, 10.0);
        let a = s.wrap(&[0.0, 0.0]).unwrap();
        let b = s.wrap(&[9.0, 9.0]).unwrap();
        assert!((s.distance(&a, &b).unwrap() - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(s.distance(&a, &a).unwrap(), 0.0);
    }

    #[test]
    fn lift_examples() {
        let s = spec(1, 10.0);
        let c = s.wrap(&[1.0]).unwrap();
        assert_eq!(s.nearest_lift(&c, &s.wrap(&[9.0]).unwrap()).unwrap(), vec![-1.0]);
        assert_eq!(s.nearest_lift(&c, &s.wrap(&[2.0]).unwrap()).unwrap(), vec![2.0]);

        let s = spec(2, 4.0);
        let c = s.wrap(&[0.0, 0.0]).unwrap();
        let lift = s.nearest_lift(&c, &s.wrap(&[3.9, 0.1]).unwrap()).unwrap();
        assert!((lift[0] + 0.1).abs() < 1e-12 && (lift[1] - 0.1).abs() < 1e-12);

        let c = s.wrap(&[0.0, 0.0]).unwrap();
        let o = s.wrap(&[2.0, 0.5]).unwrap();
        assert!(matches!(s.nearest_lift(&c, &o), Err(Error::AmbiguousLift { axis: 0 })));
    }

    fn pair_strategy() -> impl Strategy<Value = (usize, f64, Vec<f64>, Vec<f64>)> {
        (1usize..=4, 2.1f64..20.0).prop_flat_map(|(n, r)| {
            (
                Just(n),
                Just(r),
                prop::collection::vec(-3.0 * r..3.0 * r, n),
                prop::collection::vec(-3.0 * r..3.0 * r, n),
            )
        })
    }

    proptest! {
        #[test]
        fn distance_matches_shift_enumeration((n, r, a, b) in pair_strategy()) {
            let s = spec(n, r);
            let a = s.wrap(&a).unwrap();
            let b = s.wrap(&b).unwrap();
            let d = s.distance(&a, &b).unwrap();
            let brute = brute_force_distance(a.coords(), b.coords(), r);
            prop_assert!((d - brute).abs() < 1e-9);
            prop_assert!(d <= s.diameter() + 1e-12);
            prop_assert!((d - s.distance(&b, &a).unwrap()).abs() == 0.0);
        }

        #[test]
        fn triangle_inequality((n, r, a, b) in pair_strategy(), c in prop::collection::vec(0.0f64..1.0, 4)) {
            let s = spec(n, r);
            let a = s.wrap(&a).unwrap();
            let b = s.wrap(&b).unwrap();
            let c: Vec<f64> = c[..n].iter().map(|u| u * r).collect();
            let c = s.wrap(&c).unwrap();
            let ab = s.distance(&a, &b).unwrap();
            let bc = s.distance(&b, &c).unwrap();
            let ac = s.distance(&a, &c).unwrap();
            prop_assert!(ac <= ab + bc + 1e-9);
        }

        #[test]
        fn wrap_is_idempotent_and_inverts_lift((n, r, a, b) in pair_strategy()) {
            let s = spec(n, r);
            let a = s.wrap(&a).unwrap();
            prop_assert_eq!(&s.wrap(a.coords()).unwrap(), &a);
            let b = s.wrap(&b).unwrap();
            if let Ok(lift) = s.nearest_lift(&a, &b) {
                let back = s.wrap(&lift).unwrap();
                for (x, y) in back.coords().iter().zip(b.coords()) {
                    prop_assert!(axis_gap(*x, *y, r) < 1e-9);
                }
                let euclid = euclidean_distance(a.coords(), &lift);
                prop_assert!((euclid - s.distance(&a, &b).unwrap()).abs() < 1e-9);
            }
        }
    }
}
