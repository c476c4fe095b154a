//! Closed-form beables for the two canonical toy models.
//!
//! Both models have one system in a superposition of components at
//! `x1 < x2` with weights `a_sq`, `b_sq`. In model one a photon from the
//! left reaches `x1` at `t1` (and `x2` at `t2 = t1 + (x2 - x1)` if the
//! system is not at `x1`). Model two adds a photon from the right that
//! reaches `x2` at `t1`. Every value below is piecewise constant in `t`;
//! on a breakpoint the earlier value is returned.

use serde::Serialize;

use crate::beables::{Engine, Execution};
use crate::boundary::SourceId;
use crate::error::{Error, Result};
use crate::profile::top_hat_share;
use crate::scenario::{Direction, Scenario};
use crate::spacetime::Event;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Model {
    One,
    Two,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ModelParams {
    pub x1: f64,
    pub x2: f64,
    pub t1: f64,
    pub a_sq: f64,
    pub b_sq: f64,
    pub mass: f64,
    pub energy: f64,
    /// 1 if the final data shows the system at `x1`, 2 if at `x2`.
    pub outcome: u8,
    pub final_time: f64,
}

impl ModelParams {
    /// `x1 = 0`, `x2 = 4`, `t1 = 5`, `|a|^2 = 0.3`, `m = eps = 1`, `T = 30`.
    pub fn canonical(outcome: u8) -> Self {
        ModelParams {
            x1: 0.0,
            x2: 4.0,
            t1: 5.0,
            a_sq: 0.3,
            b_sq: 0.7,
            mass: 1.0,
            energy: 1.0,
            outcome,
            final_time: 30.0,
        }
    }

    pub fn t2(&self) -> f64 {
        self.t1 + (self.x2 - self.x1)
    }

    /// Model one: end of the interval where the far component still shows
    /// its Born share.
    pub fn model1_far_collapse(&self) -> f64 {
        2.0 * self.t1 - self.t2()
    }

    /// Model two: both sites collapse here.
    pub fn model2_collapse(&self) -> f64 {
        self.t1 - (self.x2 - self.x1)
    }

    /// Latest time up to which the formulas hold for this final time.
    /// In model one the first outgoing ray keeps its `a_sq` share only
    /// until the system deposit of the other branch turns spacelike to it.
    pub fn horizon(&self, model: Model) -> f64 {
        match model {
            Model::One => 0.5 * (self.final_time + self.model1_far_collapse()),
            Model::Two => self.final_time,
        }
    }

    fn pick(&self, if_one: f64, if_two: f64) -> f64 {
        if self.outcome == 1 {
            if_one
        } else {
            if_two
        }
    }

    /// Recognizes a scenario laid out as model one or model two and reads
    /// its parameters. `outcome` selects the branch the final data shows.
    pub fn from_scenario(s: &Scenario, outcome: u8) -> Result<(Model, ModelParams)> {
        let shape = |m: &str| {
            Error::invalid(format!(
                "scenario is not shaped like a canonical model: {m}"
            ))
        };
        if outcome != 1 && outcome != 2 {
            return Err(Error::invalid(format!(
                "outcome must be 1 or 2, got {outcome}"
            )));
        }
        let [sys] = s.systems.as_slice() else {
            return Err(shape("expected exactly one system"));
        };
        let [c1, c2] = sys.components.as_slice() else {
            return Err(shape("expected exactly two components"));
        };
        if !(c1.x < c2.x) {
            return Err(shape("components must be ordered x1 < x2"));
        }
        let mut p = ModelParams {
            x1: c1.x,
            x2: c2.x,
            t1: 0.0,
            a_sq: c1.probability(),
            b_sq: c2.probability(),
            mass: sys.mass,
            energy: 0.0,
            outcome,
            final_time: s.final_time,
        };
        let left = s
            .photons
            .first()
            .filter(|ph| ph.dir == Direction::Right && ph.x0 < p.x1)
            .ok_or_else(|| shape("photon 0 must start left of x1 moving right"))?;
        p.t1 = p.x1 - left.x0;
        p.energy = left.energy;
        match s.photons.len() {
            1 => Ok((Model::One, p)),
            2 => {
                let right = &s.photons[1];
                let tol = s.tolerances.tol_pos;
                if right.dir != Direction::Left
                    || ((right.x0 - p.x2) - p.t1).abs() > tol
                    || (right.energy - p.energy).abs() > s.tolerances.tol_norm
                {
                    return Err(shape(
                        "photon 1 must arrive at x2 from the right at t1 with equal energy",
                    ));
                }
                Ok((Model::Two, p))
            }
            _ => Err(shape("expected one or two photons")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Site {
    X1,
    X2,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Model1Ray {
    /// Towards `x1`, continuing to `x2` in the branch without `x1`.
    Incoming,
    /// Reflected at `x1` at `t1`.
    Out1,
    /// Reflected at `x2` at `t2`.
    Out2,
}

impl Model1Ray {
    pub const ALL: [Model1Ray; 3] = [Model1Ray::Incoming, Model1Ray::Out1, Model1Ray::Out2];
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Model2Ray {
    LeftIncoming,
    RightIncoming,
    LeftOutX1,
    RightOutX1,
    LeftOutX2,
    RightOutX2,
}

impl Model2Ray {
    pub const ALL: [Model2Ray; 6] = [
        Model2Ray::LeftIncoming,
        Model2Ray::RightIncoming,
        Model2Ray::LeftOutX1,
        Model2Ray::RightOutX1,
        Model2Ray::LeftOutX2,
        Model2Ray::RightOutX2,
    ];
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Model2Probe {
    Site(Site),
    Ray(Model2Ray),
}

pub fn site_position(p: &ModelParams, site: Site) -> f64 {
    match site {
        Site::X1 => p.x1,
        Site::X2 => p.x2,
    }
}

pub fn model1_system_beable(p: &ModelParams, t: f64, site: Site) -> f64 {
    match site {
        Site::X1 if t <= p.t1 => p.a_sq * p.mass,
        Site::X1 => p.pick(p.mass, 0.0),
        Site::X2 if t <= p.model1_far_collapse() => p.b_sq * p.mass,
        Site::X2 => p.pick(0.0, p.mass),
    }
}

/// Where `ray` is at time `t`, or `None` if it does not exist then.
pub fn model1_ray_position(p: &ModelParams, ray: Model1Ray, t: f64) -> Option<f64> {
    match ray {
        Model1Ray::Incoming => (t >= 0.0 && t <= p.t2()).then_some(p.x1 - p.t1 + t),
        Model1Ray::Out1 => (t > p.t1).then_some(p.x1 + p.t1 - t),
        Model1Ray::Out2 => (t > p.t2()).then(|| p.x2 + p.t2() - t),
    }
}

pub fn model1_photon_beable(p: &ModelParams, t: f64, ray: Model1Ray) -> f64 {
    match ray {
        Model1Ray::Incoming if t <= p.t1 => p.energy,
        Model1Ray::Incoming => p.pick(0.0, p.energy),
        // both outcomes: the data that would decide this ray is lightlike to it
        Model1Ray::Out1 => p.a_sq * p.energy,
        Model1Ray::Out2 => p.pick(0.0, p.energy),
    }
}

pub fn model2_ray_position(p: &ModelParams, ray: Model2Ray, t: f64) -> Option<f64> {
    use Model2Ray::*;
    match ray {
        LeftIncoming => (t >= 0.0 && t <= p.t2()).then_some(p.x1 - p.t1 + t),
        RightIncoming => (t >= 0.0 && t <= p.t2()).then_some(p.x2 + p.t1 - t),
        LeftOutX1 => (t > p.t1).then_some(p.x1 + p.t1 - t),
        RightOutX1 => (t > p.t2()).then(|| p.x1 + t - p.t2()),
        LeftOutX2 => (t > p.t2()).then(|| p.x2 + p.t2() - t),
        RightOutX2 => (t > p.t1).then_some(p.x2 - p.t1 + t),
    }
}

pub fn model2_beable(p: &ModelParams, t: f64, probe: Model2Probe) -> f64 {
    use Model2Ray::*;
    let full = p.energy;
    match probe {
        Model2Probe::Site(Site::X1) if t <= p.model2_collapse() => p.a_sq * p.mass,
        Model2Probe::Site(Site::X1) => p.pick(p.mass, 0.0),
        Model2Probe::Site(Site::X2) if t <= p.model2_collapse() => p.b_sq * p.mass,
        Model2Probe::Site(Site::X2) => p.pick(0.0, p.mass),
        Model2Probe::Ray(LeftIncoming | RightIncoming) if t <= p.t1 => full,
        // past t1 each incoming ray only exists in the branch that lacks
        // the component it would have hit
        Model2Probe::Ray(LeftIncoming) => p.pick(0.0, full),
        Model2Probe::Ray(RightIncoming) => p.pick(full, 0.0),
        Model2Probe::Ray(LeftOutX1 | RightOutX1) => p.pick(full, 0.0),
        Model2Probe::Ray(LeftOutX2 | RightOutX2) => p.pick(0.0, full),
    }
}

/// Oracle system density at a site probe.
pub fn system_at_site(model: Model, p: &ModelParams, t: f64, site: Site) -> f64 {
    match model {
        Model::One => model1_system_beable(p, t, site),
        Model::Two => model2_beable(p, t, Model2Probe::Site(site)),
    }
}

/// Oracle photon density at `(t, x)` summed over every ray that reaches
/// that grid cell, each ray carrying its own piecewise value.
pub fn photon_density(model: Model, p: &ModelParams, t: f64, x: f64, dx: f64) -> f64 {
    match model {
        Model::One => Model1Ray::ALL
            .iter()
            .filter_map(|&r| {
                model1_ray_position(p, r, t)
                    .map(|pos| model1_photon_beable(p, t, r) * top_hat_share(pos - x, dx))
            })
            .sum(),
        Model::Two => Model2Ray::ALL
            .iter()
            .filter_map(|&r| {
                model2_ray_position(p, r, t).map(|pos| {
                    model2_beable(p, t, Model2Probe::Ray(r)) * top_hat_share(pos - x, dx)
                })
            })
            .sum(),
    }
}

/// Positions of every ray alive at `t`.
pub fn ray_positions(model: Model, p: &ModelParams, t: f64) -> Vec<f64> {
    match model {
        Model::One => Model1Ray::ALL
            .iter()
            .filter_map(|&r| model1_ray_position(p, r, t))
            .collect(),
        Model::Two => Model2Ray::ALL
            .iter()
            .filter_map(|&r| model2_ray_position(p, r, t))
            .collect(),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum ProbeKind {
    Site,
    Ray,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ProbeResult {
    pub kind: ProbeKind,
    pub y: Event,
    pub engine: f64,
    pub oracle: f64,
}

impl ProbeResult {
    pub fn deviation(&self) -> f64 {
        (self.engine - self.oracle).abs()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OracleDiff {
    pub model: Model,
    pub params: ModelParams,
    pub probes: usize,
    pub max_deviation: f64,
    pub worst: Option<ProbeResult>,
}

/// Compares the engine with the oracle on every probe of the scenario grid:
/// the system density at both sites on every time row, and the photon
/// density on every ray point of every time row. Site probes read the
/// computed field when the site falls on a grid column.
pub fn compare(s: &Scenario, outcome: u8, exec: Execution) -> Result<OracleDiff> {
    let (model, p) = ModelParams::from_scenario(s, outcome)?;
    let label = outcome.to_string();
    let engine = Engine::for_branch(s, &label)?;
    let grid = s.grid;
    let field = engine.field(&grid, exec)?;
    let dx = grid.dx();
    let horizon = p.horizon(model);

    let mut results = Vec::new();
    for k in 0..grid.nt {
        let t = grid.t(k);
        if t > horizon {
            continue;
        }
        for site in [Site::X1, Site::X2] {
            let x = site_position(&p, site);
            let engine_value = match grid.column_of(x, s.tolerances.tol_pos) {
                Some(j) => field.at(k, j).contribution(SourceId::system(0)),
                None => engine
                    .beable_at(Event::new(t, x))?
                    .contribution(SourceId::system(0)),
            };
            results.push(ProbeResult {
                kind: ProbeKind::Site,
                y: Event::new(t, x),
                engine: engine_value,
                oracle: system_at_site(model, &p, t, site),
            });
        }
        for x in ray_positions(model, &p, t) {
            if x < grid.x_min || x > grid.x_max {
                continue;
            }
            let y = Event::new(t, x);
            results.push(ProbeResult {
                kind: ProbeKind::Ray,
                y,
                engine: engine.beable_at(y)?.photon_total(),
                oracle: photon_density(model, &p, t, x, dx),
            });
        }
    }

    let worst = results
        .iter()
        .copied()
        .max_by(|a, b| a.deviation().total_cmp(&b.deviation()));
    Ok(OracleDiff {
        model,
        params: p,
        probes: results.len(),
        max_deviation: worst.map_or(0.0, |w| w.deviation()),
        worst,
    })
}
