//! Beables as conditional expectations.
//!
//! At an event `y` the final data is restricted to the part of `t = T`
//! strictly outside the future light cone of `y`. The branches that agree
//! with the actual outcome there form the consistent set; their Born
//! weights, renormalized, give the posterior, and the energy density of
//! each source at `y` is its posterior-weighted branch-local density.

use rayon::prelude::*;
use serde::Serialize;

use crate::boundary::{BranchTable, FinalOutcome, SourceId, SourceKind};
use crate::error::{Error, Result};
use crate::profile;
use crate::scenario::{ensure_valid, GridSpec, Scenario};
use crate::spacetime::Event;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Contribution {
    pub source: SourceId,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PosteriorEntry {
    pub label: String,
    pub weight: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BeableSample {
    pub y: Event,
    pub total: f64,
    /// One entry per source, systems first, in scenario order.
    pub contributions: Vec<Contribution>,
    /// Posterior over the consistent set, in canonical branch order.
    pub posterior: Vec<PosteriorEntry>,
    /// Some photon is shown with only part of its energy because the
    /// consistent branches disagree on where it is.
    pub partial_photon: bool,
}

impl BeableSample {
    pub fn contribution(&self, source: SourceId) -> f64 {
        self.contributions
            .iter()
            .find(|c| c.source == source)
            .map_or(0.0, |c| c.value)
    }

    pub fn consistent_labels(&self) -> impl Iterator<Item = &str> {
        self.posterior.iter().map(|p| p.label.as_str())
    }

    pub fn n_consistent(&self) -> usize {
        self.posterior.len()
    }

    pub fn photon_total(&self) -> f64 {
        self.contributions
            .iter()
            .filter(|c| c.source.kind == SourceKind::Photon)
            .map(|c| c.value)
            .sum()
    }

    pub fn system_total(&self) -> f64 {
        self.contributions
            .iter()
            .filter(|c| c.source.kind == SourceKind::System)
            .map(|c| c.value)
            .sum()
    }
}

/// Row-major (t outer, x inner) grid of samples.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BeableField {
    pub grid: GridSpec,
    pub sources: Vec<SourceId>,
    pub samples: Vec<BeableSample>,
}

impl BeableField {
    pub fn at(&self, k: usize, j: usize) -> &BeableSample {
        &self.samples[k * self.grid.nx + j]
    }

    pub fn partial_photon_points(&self) -> usize {
        self.samples.iter().filter(|s| s.partial_photon).count()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    Parallel,
}

/// Precomputed branch data for evaluating beables against one outcome.
#[derive(Clone, Debug)]
pub struct Engine<'a> {
    scenario: &'a Scenario,
    table: BranchTable,
    outcome: FinalOutcome,
    sources: Vec<SourceId>,
}

impl<'a> Engine<'a> {
    pub fn new(scenario: &'a Scenario, outcome: FinalOutcome) -> Result<Self> {
        let table = BranchTable::build(scenario)?;
        if table.index_of(&outcome.branch.label).is_none() {
            return Err(Error::invalid(format!(
                "outcome branch {} does not belong to this scenario",
                outcome.branch.label
            )));
        }
        let sources = (0..scenario.systems.len())
            .map(SourceId::system)
            .chain((0..scenario.photons.len()).map(SourceId::photon))
            .collect();
        Ok(Engine {
            scenario,
            table,
            outcome,
            sources,
        })
    }

    /// Engine for a fixed branch taken as the outcome.
    pub fn for_branch(scenario: &'a Scenario, label: &str) -> Result<Self> {
        let table = BranchTable::build(scenario)?;
        let idx = table
            .index_of(label)
            .ok_or_else(|| Error::invalid(format!("no branch labelled {label:?}")))?;
        let e = &table.entries[idx];
        let outcome = FinalOutcome {
            branch: e.branch.clone(),
            deposits: e.deposits.clone(),
            weight: e.branch.weight,
        };
        Self::new(scenario, outcome)
    }

    pub fn scenario(&self) -> &Scenario {
        self.scenario
    }

    pub fn outcome(&self) -> &FinalOutcome {
        &self.outcome
    }

    pub fn table(&self) -> &BranchTable {
        &self.table
    }

    pub fn sources(&self) -> &[SourceId] {
        &self.sources
    }

    fn check_time(&self, y: Event) -> Result<()> {
        if !y.is_finite() || !(0.0..=self.scenario.final_time).contains(&y.t) {
            return Err(Error::invalid(format!(
                "event {y} outside the time range [0, {}]",
                self.scenario.final_time
            )));
        }
        Ok(())
    }

    /// Density of `source` at `y` in branch `branch` (index into the table).
    pub fn local_density(&self, branch: usize, source: SourceId, y: Event) -> f64 {
        let dx = self.scenario.grid.dx();
        let entry = &self.table.entries[branch];
        match source.kind {
            SourceKind::System => {
                let sys = &self.scenario.systems[source.id];
                let x = sys.components[entry.branch.choice[source.id]].x;
                sys.mass * profile::share(x - y.x, sys.sigma, dx)
            }
            SourceKind::Photon => {
                let x = entry.trajectories[source.id].position_unchecked(y.t);
                self.scenario.photons[source.id].energy * profile::top_hat_share(x - y.x, dx)
            }
        }
    }

    /// Branch-local densities of `source` at `y` for every branch.
    pub fn local_values(&self, source: SourceId, y: Event) -> Vec<f64> {
        (0..self.table.entries.len())
            .map(|b| self.local_density(b, source, y))
            .collect()
    }

    pub fn consistent_indices(&self, y: Event) -> Result<Vec<usize>> {
        self.check_time(y)?;
        self.table
            .consistent_indices(&self.outcome, y, self.scenario)
    }

    pub fn beable_at(&self, y: Event) -> Result<BeableSample> {
        let consistent = self.consistent_indices(y)?;
        let norm: f64 = consistent
            .iter()
            .map(|&b| self.table.entries[b].branch.weight)
            .sum();
        if !(norm > 0.0) {
            return Err(Error::invalid(format!(
                "consistent branches at {y} carry zero Born weight"
            )));
        }
        let posterior: Vec<PosteriorEntry> = consistent
            .iter()
            .map(|&b| PosteriorEntry {
                label: self.table.entries[b].branch.label.clone(),
                weight: self.table.entries[b].branch.weight / norm,
            })
            .collect();

        let mut partial_photon = false;
        let contributions: Vec<Contribution> = self
            .sources
            .iter()
            .map(|&source| {
                let mut value = 0.0;
                let mut lo = f64::INFINITY;
                let mut hi = f64::NEG_INFINITY;
                for (&b, p) in consistent.iter().zip(&posterior) {
                    let local = self.local_density(b, source, y);
                    lo = lo.min(local);
                    hi = hi.max(local);
                    value += p.weight * local;
                }
                if source.kind == SourceKind::Photon && hi > lo && value > 0.0 {
                    partial_photon = true;
                }
                Contribution { source, value }
            })
            .collect();
        let total = contributions.iter().map(|c| c.value).sum();
        Ok(BeableSample {
            y,
            total,
            contributions,
            posterior,
            partial_photon,
        })
    }

    pub fn field(&self, grid: &GridSpec, exec: Execution) -> Result<BeableField> {
        let eval = |i: usize| self.beable_at(grid.event(i));
        let samples = match exec {
            Execution::Sequential => (0..grid.len()).map(eval).collect::<Result<Vec<_>>>()?,
            Execution::Parallel => (0..grid.len())
                .into_par_iter()
                .map(eval)
                .collect::<Result<Vec<_>>>()?,
        };
        Ok(BeableField {
            grid: *grid,
            sources: self.sources.clone(),
            samples,
        })
    }
}

/// Beable at a single event.
pub fn beable_at(y: Event, outcome: &FinalOutcome, s: &Scenario) -> Result<BeableSample> {
    Engine::new(s, outcome.clone())?.beable_at(y)
}

/// Energy of photon `photon` displayed at each of `points`.
pub fn ray_beable(
    photon: usize,
    points: &[Event],
    outcome: &FinalOutcome,
    s: &Scenario,
) -> Result<Vec<f64>> {
    if photon >= s.photons.len() {
        return Err(Error::invalid(format!("no photon with id {photon}")));
    }
    let engine = Engine::new(s, outcome.clone())?;
    let source = SourceId::photon(photon);
    points
        .iter()
        .map(|&y| engine.beable_at(y).map(|b| b.contribution(source)))
        .collect()
}

/// The beable field on the scenario's grid, evaluated in parallel.
pub fn compute_field(s: &Scenario, outcome: &FinalOutcome) -> Result<BeableField> {
    compute_field_with(s, outcome, Execution::Parallel)
}

pub fn compute_field_with(
    s: &Scenario,
    outcome: &FinalOutcome,
    exec: Execution,
) -> Result<BeableField> {
    ensure_valid(s)?;
    Engine::new(s, outcome.clone())?.field(&s.grid, exec)
}

/// Largest pointwise differences between fields computed for different
/// final times.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AsymptoticReport {
    pub final_times: Vec<f64>,
    /// Over totals and every per-source contribution.
    pub max_deviation: f64,
    pub max_system_deviation: f64,
    pub max_photon_deviation: f64,
    /// Event, and the two final times, where `max_deviation` occurs.
    pub worst: Option<(Event, f64, f64)>,
}

/// Recomputes the field on `subgrid` for each final time in `final_times`,
/// always taking branch `branch` as the outcome, and reports how far the
/// fields move.
pub fn asymptotic_check(
    s: &Scenario,
    branch: &str,
    final_times: &[f64],
    subgrid: &GridSpec,
) -> Result<AsymptoticReport> {
    if final_times.is_empty() {
        return Err(Error::invalid("empty list of final times"));
    }
    let horizon = s.interaction_horizon()?.unwrap_or(0.0);
    for &t in final_times {
        if !(t.is_finite() && t > horizon) {
            return Err(Error::invalid(format!(
                "final time {t} is not after the last interaction at t={horizon}"
            )));
        }
    }
    let t_min = final_times.iter().copied().fold(f64::INFINITY, f64::min);
    if subgrid.t_max > t_min || subgrid.t_min < 0.0 {
        return Err(Error::invalid(format!(
            "subgrid times [{}, {}] must lie within [0, {t_min}]",
            subgrid.t_min, subgrid.t_max
        )));
    }

    let mut fields = Vec::with_capacity(final_times.len());
    for &t in final_times {
        let mut sc = s.with_final_time(t);
        sc.grid = *subgrid;
        ensure_valid(&sc)?;
        let engine = Engine::for_branch(&sc, branch)?;
        fields.push(engine.field(subgrid, Execution::Parallel)?);
    }

    let mut report = AsymptoticReport {
        final_times: final_times.to_vec(),
        max_deviation: 0.0,
        max_system_deviation: 0.0,
        max_photon_deviation: 0.0,
        worst: None,
    };
    for a in 0..fields.len() {
        for b in a + 1..fields.len() {
            for (sa, sb) in fields[a].samples.iter().zip(&fields[b].samples) {
                let mut dev = (sa.total - sb.total).abs();
                for (ca, cb) in sa.contributions.iter().zip(&sb.contributions) {
                    let d = (ca.value - cb.value).abs();
                    dev = dev.max(d);
                    match ca.source.kind {
                        SourceKind::System => {
                            report.max_system_deviation = report.max_system_deviation.max(d)
                        }
                        SourceKind::Photon => {
                            report.max_photon_deviation = report.max_photon_deviation.max(d)
                        }
                    }
                }
                if dev > report.max_deviation {
                    report.max_deviation = dev;
                    report.worst = Some((sa.y, final_times[a], final_times[b]));
                }
            }
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boundary::outcome_for_branch;

    fn engine<'a>(s: &'a Scenario, label: &str) -> Engine<'a> {
        Engine::for_branch(s, label).unwrap()
    }

    fn sys(e: &Engine, t: f64, x: f64) -> f64 {
        e.beable_at(Event::new(t, x))
            .unwrap()
            .contribution(SourceId::system(0))
    }

    #[test]
    fn model1_partial_presence_and_collapse() {
        let s = Scenario::model1();
        let e = engine(&s, "1");
        assert!((sys(&e, 0.5, 4.0) - 0.7).abs() < 1e-12);
        assert_eq!(sys(&e, 3.0, 4.0), 0.0);
        assert!((sys(&e, 3.0, 0.0) - 0.3).abs() < 1e-12);
        assert!((sys(&e, 6.0, 0.0) - 1.0).abs() < 1e-12);
        // on the collapse instants themselves the earlier value holds
        assert!((sys(&e, 1.0, 4.0) - 0.7).abs() < 1e-12);
        assert!((sys(&e, 5.0, 0.0) - 0.3).abs() < 1e-12);
    }

    #[test]
    fn model2_simultaneous_collapse() {
        let s = Scenario::model2();
        let e = engine(&s, "1");
        assert_eq!(sys(&e, 2.0, 4.0), 0.0);
        assert!((sys(&e, 2.0, 0.0) - 1.0).abs() < 1e-12);
        assert!((sys(&e, 0.5, 0.0) - 0.3).abs() < 1e-12);
        assert!((sys(&e, 0.5, 4.0) - 0.7).abs() < 1e-12);
    }

    #[test]
    fn model1_photon_rays() {
        let s = Scenario::model1();
        let o = outcome_for_branch(&s, &s.branch_by_label("1").unwrap()).unwrap();
        let out1: Vec<Event> = (1..=20)
            .map(|k| 5.0 + 0.5 * k as f64)
            .map(|t| Event::new(t, 5.0 - t))
            .collect();
        for v in ray_beable(0, &out1, &o, &s).unwrap() {
            assert!((v - 0.3).abs() < 1e-12, "{v}");
        }
        let out2: Vec<Event> = (1..=20)
            .map(|k| 9.0 + 0.5 * k as f64)
            .map(|t| Event::new(t, 13.0 - t))
            .collect();
        assert!(ray_beable(0, &out2, &o, &s)
            .unwrap()
            .iter()
            .all(|&v| v == 0.0));
        let incoming: Vec<Event> = (0..=10)
            .map(|k| 0.5 * k as f64)
            .map(|t| Event::new(t, t - 5.0))
            .collect();
        for v in ray_beable(0, &incoming, &o, &s).unwrap() {
            assert!((v - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn model2_photon_rays_are_definite() {
        let s = Scenario::model2();
        let o = outcome_for_branch(&s, &s.branch_by_label("1").unwrap()).unwrap();
        let pts: Vec<Event> = (1..=40)
            .map(|k| 5.0 + 0.5 * k as f64)
            .map(|t| Event::new(t, 5.0 - t))
            .collect();
        for v in ray_beable(0, &pts, &o, &s).unwrap() {
            assert!((v - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn out_of_range_time_is_rejected() {
        let s = Scenario::model1();
        let e = engine(&s, "1");
        assert!(matches!(
            e.beable_at(Event::new(30.5, 0.0)),
            Err(Error::InvalidArgument(_))
        ));
        assert!(matches!(
            e.beable_at(Event::new(-1.0, 0.0)),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn empty_scenario_gives_zero_field() {
        let mut s = Scenario::model1();
        s.systems.clear();
        s.photons.clear();
        s.grid = s.grid.with_resolution(11, 11);
        let o = outcome_for_branch(&s, &s.branch_by_label("root").unwrap()).unwrap();
        let f = compute_field(&s, &o).unwrap();
        assert_eq!(f.samples.len(), 121);
        assert!(f
            .samples
            .iter()
            .all(|p| p.total == 0.0 && p.contributions.is_empty()));
    }

    #[test]
    fn single_branch_field_is_the_local_density() {
        let mut s = Scenario::model1();
        s.systems[0].components.truncate(1);
        s.systems[0].components[0].re = 1.0;
        s.grid = s.grid.with_resolution(25, 49);
        let e = engine(&s, "1");
        let f = e.field(&s.grid, Execution::Sequential).unwrap();
        for p in &f.samples {
            for c in &p.contributions {
                assert_eq!(c.value, e.local_density(0, c.source, p.y));
            }
        }
    }

    #[test]
    fn sweep_of_identical_times_is_exactly_zero() {
        let s = Scenario::model1();
        let g = s.grid.with_resolution(49, 49);
        let r = asymptotic_check(&s, "1", &[30.0, 30.0], &g).unwrap();
        assert_eq!(r.max_deviation, 0.0);
    }

    #[test]
    fn sweep_rejects_early_final_time() {
        let s = Scenario::model1();
        let mut g = s.grid.with_resolution(9, 9);
        g.t_max = 8.0;
        assert!(asymptotic_check(&s, "1", &[8.5, 30.0], &g).is_err());
        assert!(asymptotic_check(&s, "1", &[], &g).is_err());
    }
}
