//! Photon worldlines for a fixed branch: lightlike segments that reverse
//! direction on reaching a system component present in that branch.
//!
//! Arrival times are computed in closed form from the distance to the next
//! occupied position, so there is no integrator and no drift.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::scenario::{Branch, Direction, Scenario};
use crate::spacetime::Event;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Segment {
    pub t_start: f64,
    pub x_start: f64,
    pub dir: Direction,
}

impl Segment {
    fn position_at(&self, t: f64) -> f64 {
        self.x_start + self.dir.sign() * (t - self.t_start)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Trajectory {
    pub photon: usize,
    pub branch: String,
    /// The last segment extends to the end of time.
    pub segments: Vec<Segment>,
    pub bounces: Vec<Event>,
    /// Final time of the scenario the trajectory was traced in.
    pub final_time: f64,
}

impl Trajectory {
    /// Position at time `t` in `[0, T]`. At a bounce instant this is the
    /// bounce position.
    pub fn position_at(&self, t: f64) -> Result<f64> {
        if !(0.0..=self.final_time).contains(&t) {
            return Err(Error::invalid(format!(
                "time {t} outside [0, {}] for photon {}",
                self.final_time, self.photon
            )));
        }
        Ok(self.position_unchecked(t))
    }

    pub(crate) fn position_unchecked(&self, t: f64) -> f64 {
        let idx = self.segments.partition_point(|s| s.t_start <= t);
        let seg = &self.segments[idx.saturating_sub(1)];
        seg.position_at(t)
    }

    pub fn last_bounce_time(&self) -> Option<f64> {
        self.bounces.last().map(|e| e.t)
    }
}

/// Traces photon `photon` of `s` through the component positions occupied
/// in `branch`. Photons ignore each other and pass freely through
/// positions this branch leaves empty.
pub fn trace(s: &Scenario, branch: &Branch, photon: usize) -> Result<Trajectory> {
    let p = s
        .photons
        .get(photon)
        .ok_or_else(|| Error::invalid(format!("no photon with id {photon}")))?;
    let tol = s.tolerances.tol_pos;
    let mut walls: Vec<f64> = s.occupants(branch).iter().map(|o| o.x).collect();
    walls.sort_by(f64::total_cmp);

    let mut t = 0.0;
    let mut x = p.x0;
    let mut dir = p.dir;
    let mut segments = Vec::new();
    let mut bounces = Vec::new();

    // starting on an occupied position counts as an immediate bounce
    if let Some(&w) = walls.iter().find(|&&w| (w - x).abs() <= tol) {
        x = w;
        bounces.push(Event::new(0.0, w));
        dir = dir.reversed();
    }
    segments.push(Segment {
        t_start: t,
        x_start: x,
        dir,
    });

    loop {
        let next = match dir {
            Direction::Right => walls.iter().copied().find(|&w| w > x + tol),
            Direction::Left => walls.iter().rev().copied().find(|&w| w < x - tol),
        };
        let Some(w) = next else { break };
        if bounces.len() >= s.max_bounces {
            return Err(Error::TrappedPhoton {
                photon,
                branch: branch.label.clone(),
                max_bounces: s.max_bounces,
            });
        }
        t += (w - x).abs();
        x = w;
        dir = dir.reversed();
        bounces.push(Event::new(t, x));
        segments.push(Segment {
            t_start: t,
            x_start: x,
            dir,
        });
    }

    Ok(Trajectory {
        photon,
        branch: branch.label.clone(),
        segments,
        bounces,
        final_time: s.final_time,
    })
}

/// Every photon's trajectory in `branch`, in photon order.
pub fn trace_all(s: &Scenario, branch: &Branch) -> Result<Vec<Trajectory>> {
    (0..s.photons.len())
        .map(|id| trace(s, branch, id))
        .collect()
}
