//! Causal geometry of flat 1+1 dimensional spacetime with `c = 1`.
//!
//! Everything is expressed in a single global frame. The only region the
//! conditioning machinery needs is the part of the final hypersurface
//! `t = T` that lies strictly outside the future light cone of an event.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Width of the band around the light cone inside which separations are
/// treated as lightlike.
pub const DEFAULT_TOL_CAUSAL: f64 = 1e-9;

/// A point `(t, x)` of 1+1 Minkowski spacetime.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub t: f64,
    pub x: f64,
}

impl Event {
    pub const fn new(t: f64, x: f64) -> Self {
        Event { t, x }
    }

    pub fn is_finite(&self) -> bool {
        self.t.is_finite() && self.x.is_finite()
    }

    /// Squared interval `dt^2 - dx^2` to `other` (positive when timelike).
    pub fn interval_sq(&self, other: &Event) -> f64 {
        let dt = other.t - self.t;
        let dx = other.x - self.x;
        dt * dt - dx * dx
    }
}

impl fmt::Display for Event {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(t={}, x={})", self.t, self.x)
    }
}

/// Where the second event of an ordered pair sits relative to the first.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CausalRelation {
    TimelikeFuture,
    LightlikeFuture,
    Spacelike,
    LightlikePast,
    TimelikePast,
    Coincident,
}

impl CausalRelation {
    /// The relation seen from the other event.
    pub fn reversed(self) -> Self {
        use CausalRelation::*;
        match self {
            TimelikeFuture => TimelikePast,
            LightlikeFuture => LightlikePast,
            LightlikePast => LightlikeFuture,
            TimelikePast => TimelikeFuture,
            Spacelike => Spacelike,
            Coincident => Coincident,
        }
    }
}

/// Classifies `b` relative to `a` using [`DEFAULT_TOL_CAUSAL`].
pub fn causal_relation(a: Event, b: Event) -> Result<CausalRelation> {
    causal_relation_with_tol(a, b, DEFAULT_TOL_CAUSAL)
}

/// Classifies `b` relative to `a`. Separations within `tol` of the light
/// cone count as lightlike, and events within `tol` of each other in both
/// coordinates count as coincident.
pub fn causal_relation_with_tol(a: Event, b: Event, tol: f64) -> Result<CausalRelation> {
    if !a.is_finite() || !b.is_finite() {
        return Err(Error::invalid(format!("non-finite event in pair {a}, {b}")));
    }
    if !(tol >= 0.0) {
        return Err(Error::invalid(format!(
            "causal tolerance must be >= 0, got {tol}"
        )));
    }
    let dt = b.t - a.t;
    let adx = (b.x - a.x).abs();
    let adt = dt.abs();
    if adt <= tol && adx <= tol {
        return Ok(CausalRelation::Coincident);
    }
    let rel = if (adx - adt).abs() <= tol {
        if dt > 0.0 {
            CausalRelation::LightlikeFuture
        } else {
            CausalRelation::LightlikePast
        }
    } else if adx > adt {
        CausalRelation::Spacelike
    } else if dt > 0.0 {
        CausalRelation::TimelikeFuture
    } else {
        CausalRelation::TimelikePast
    };
    Ok(rel)
}

/// The open set `{x' : |x' - center| > radius}` on the hypersurface `t = T`:
/// the points of the final surface spacelike to the event that produced it.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OutsideFlcRegion {
    pub center: f64,
    pub radius: f64,
    /// Lightlike band; points with `| |x' - center| - radius | <= tol` are excluded.
    pub tol: f64,
}

impl OutsideFlcRegion {
    /// Strict membership. The lightlike boundary is never inside.
    pub fn contains(&self, x: f64) -> bool {
        (x - self.center).abs() > self.radius + self.tol
    }

    /// True when every point of `self` is also in `other`.
    pub fn is_subset_of(&self, other: &OutsideFlcRegion) -> bool {
        // Both are complements of closed intervals, so compare the intervals.
        let lo = self.center - self.radius - self.tol;
        let hi = self.center + self.radius + self.tol;
        let olo = other.center - other.radius - other.tol;
        let ohi = other.center + other.radius + other.tol;
        olo >= lo && ohi <= hi
    }
}

/// The part of `t = final_time` outside the future light cone of `y`,
/// using [`DEFAULT_TOL_CAUSAL`] as the lightlike band.
pub fn outside_flc_region(y: Event, final_time: f64) -> Result<OutsideFlcRegion> {
    outside_flc_region_with_tol(y, final_time, DEFAULT_TOL_CAUSAL)
}

pub fn outside_flc_region_with_tol(
    y: Event,
    final_time: f64,
    tol: f64,
) -> Result<OutsideFlcRegion> {
    if !y.is_finite() || !final_time.is_finite() {
        return Err(Error::invalid(format!(
            "non-finite event {y} or final time {final_time}"
        )));
    }
    if y.t > final_time {
        return Err(Error::invalid(format!(
            "event {y} lies after the final hypersurface t={final_time}"
        )));
    }
    Ok(OutsideFlcRegion {
        center: y.x,
        radius: final_time - y.t,
        tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ev(t: f64, x: f64) -> Event {
        Event::new(t, x)
    }

    #[test]
    fn basic_relations() {
        use CausalRelation::*;
        assert_eq!(
            causal_relation(ev(0., 0.), ev(1., 0.)).unwrap(),
            TimelikeFuture
        );
        assert_eq!(
            causal_relation(ev(0., 0.), ev(1., 1.)).unwrap(),
            LightlikeFuture
        );
        assert_eq!(causal_relation(ev(0., 0.), ev(0., 1.)).unwrap(), Spacelike);
        assert_eq!(
            causal_relation(ev(1., 1.), ev(0., 0.)).unwrap(),
            LightlikePast
        );
        assert_eq!(
            causal_relation(ev(2., 0.), ev(0., 0.5)).unwrap(),
            TimelikePast
        );
        assert_eq!(causal_relation(ev(2., 3.), ev(2., 3.)).unwrap(), Coincident);
    }

    #[test]
    fn rejects_non_finite() {
        assert!(causal_relation(ev(f64::NAN, 0.), ev(0., 0.)).is_err());
        assert!(causal_relation(ev(0., 0.), ev(0., f64::INFINITY)).is_err());
    }

    #[test]
    fn region_definition() {
        let r = outside_flc_region(ev(3., 0.), 30.).unwrap();
        assert_eq!((r.center, r.radius), (0., 27.));
        let r = outside_flc_region(ev(30., 5.), 30.).unwrap();
        assert_eq!(r.radius, 0.);
        assert!(!r.contains(5.));
        assert!(r.contains(5.001));
        let r = outside_flc_region(ev(0., 0.), 30.).unwrap();
        assert_eq!(r.radius, 30.);
        assert!(outside_flc_region(ev(31., 0.), 30.).is_err());
    }

    #[test]
    fn containment_is_strict() {
        let r = OutsideFlcRegion {
            center: 0.,
            radius: 27.,
            tol: DEFAULT_TOL_CAUSAL,
        };
        assert!(!r.contains(-25.));
        let r = OutsideFlcRegion {
            center: 4.,
            radius: 27.,
            tol: DEFAULT_TOL_CAUSAL,
        };
        assert!(r.contains(-25.));
        let r = OutsideFlcRegion {
            center: 0.,
            radius: 25.,
            tol: DEFAULT_TOL_CAUSAL,
        };
        assert!(!r.contains(-25.));
        assert!(!r.contains(-25. - 1e-12));
    }

    fn coord() -> impl Strategy<Value = f64> {
        prop_oneof![-50.0..50.0f64, (-20i32..20).prop_map(|i| i as f64)]
    }

    proptest! {
        #[test]
        fn swapping_mirrors_future_and_past(t1 in coord(), x1 in coord(), t2 in coord(), x2 in coord()) {
            let a = ev(t1, x1);
            let b = ev(t2, x2);
            let ab = causal_relation(a, b).unwrap();
            let ba = causal_relation(b, a).unwrap();
            prop_assert_eq!(ab.reversed(), ba);
        }

        #[test]
        fn lightlike_point_never_inside(t in 0.0..30.0f64, x in -40.0..40.0f64, side in prop::bool::ANY) {
            let r = outside_flc_region(ev(t, x), 30.).unwrap();
            let edge = if side { x + (30. - t) } else { x - (30. - t) };
            prop_assert!(!r.contains(edge));
        }

        #[test]
        fn region_grows_with_time(t in 0.0..30.0f64, dt in 0.0..30.0f64, x in -40.0..40.0f64, probe in -80.0..80.0f64) {
            let later = (t + dt).min(30.);
            let early = outside_flc_region(ev(t, x), 30.).unwrap();
            let late = outside_flc_region(ev(later, x), 30.).unwrap();
            prop_assert!(early.is_subset_of(&late));
            if early.contains(probe) {
                prop_assert!(late.contains(probe));
            }
        }
    }
}
