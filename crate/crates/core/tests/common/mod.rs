//! Scenario generators shared by the property and acceptance suites.
#![allow(dead_code)]

use lorentz_beables::scenario::{
    Component, Direction, GridSpec, MassiveSystem, Photon, Scenario, Tolerances,
    DEFAULT_MAX_BOUNCES,
};
use proptest::prelude::*;

fn normalized(weights: Vec<f64>, phases: Vec<f64>) -> Vec<(f64, f64)> {
    let total: f64 = weights.iter().sum();
    weights
        .iter()
        .zip(phases)
        .map(|(w, ph)| {
            let r = (w / total).sqrt();
            (r * ph.cos(), r * ph.sin())
        })
        .collect()
}

/// Systems on distinct lattice sites in [-10, 10]; photons start outside the
/// hull of every site, so no photon can be trapped and each bounces at most
/// once.
pub fn arb_scenario() -> impl Strategy<Value = Scenario> {
    let sites =
        proptest::sample::subsequence((-20i32..=20).collect::<Vec<_>>(), 1..=6).prop_shuffle();
    (sites, 1usize..=3)
        .prop_flat_map(|(sites, n_sys)| {
            let n_sys = n_sys.min(sites.len());
            // split the sites into n_sys non-empty groups, at most 3 per system
            let per = (sites.len() / n_sys).clamp(1, 3);
            let groups: Vec<Vec<f64>> = (0..n_sys)
                .map(|i| {
                    sites
                        .iter()
                        .skip(i * per)
                        .take(per)
                        .map(|&s| s as f64 * 0.5)
                        .collect()
                })
                .collect();
            let systems = groups
                .into_iter()
                .map(|xs| {
                    let n = xs.len();
                    (
                        Just(xs),
                        proptest::collection::vec(0.05..1.0f64, n),
                        proptest::collection::vec(0.0..std::f64::consts::TAU, n),
                        0.5..2.0f64,
                    )
                        .prop_map(|(xs, w, ph, mass)| MassiveSystem {
                            mass,
                            sigma: 0.0,
                            components: xs
                                .into_iter()
                                .zip(normalized(w, ph))
                                .map(|(x, (re, im))| Component { x, re, im })
                                .collect(),
                        })
                })
                .collect::<Vec<_>>();
            let photons = proptest::collection::vec(
                (prop::bool::ANY, 0.1..10.0f64, prop::bool::ANY, 0.5..2.0f64),
                0..=3,
            );
            (systems, photons, 35.0..60.0f64)
        })
        .prop_map(|(systems, photons, final_time)| {
            let xs: Vec<f64> = systems
                .iter()
                .flat_map(|s| s.components.iter().map(|c| c.x))
                .collect();
            let lo = xs.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let photons = photons
                .into_iter()
                .map(|(left, gap, right_moving, energy)| Photon {
                    x0: if left { lo - gap } else { hi + gap },
                    dir: if right_moving {
                        Direction::Right
                    } else {
                        Direction::Left
                    },
                    energy,
                })
                .collect();
            Scenario {
                final_time,
                seed: 0,
                systems,
                photons,
                grid: GridSpec {
                    t_min: 0.0,
                    t_max: 12.0,
                    nt: 241,
                    x_min: -10.0,
                    x_max: 14.0,
                    nx: 241,
                },
                tolerances: Tolerances::default(),
                max_bounces: DEFAULT_MAX_BOUNCES,
            }
        })
}

/// Randomized two-photon model with a grid symmetric about the midpoint of
/// the two components.
pub fn arb_model2() -> impl Strategy<Value = Scenario> {
    (
        -3.0..3.0f64,
        1.0..6.0f64,
        1.0..8.0f64,
        0.05..0.95f64,
        10.0..40.0f64,
        6.0..15.0f64,
    )
        .prop_map(|(x1, gap, t1, a_sq, extra_t, half_width)| {
            let x2 = x1 + gap;
            let c = 0.5 * (x1 + x2);
            let t2 = t1 + gap;
            let final_time = t2 + extra_t;
            Scenario {
                final_time,
                seed: 0,
                systems: vec![MassiveSystem {
                    mass: 1.0,
                    sigma: 0.0,
                    components: vec![
                        Component {
                            x: x1,
                            re: a_sq.sqrt(),
                            im: 0.0,
                        },
                        Component {
                            x: x2,
                            re: (1.0 - a_sq).sqrt(),
                            im: 0.0,
                        },
                    ],
                }],
                photons: vec![
                    Photon {
                        x0: x1 - t1,
                        dir: Direction::Right,
                        energy: 1.0,
                    },
                    Photon {
                        x0: x2 + t1,
                        dir: Direction::Left,
                        energy: 1.0,
                    },
                ],
                grid: GridSpec {
                    t_min: 0.0,
                    t_max: (t2 + 4.0).min(final_time),
                    nt: 31,
                    x_min: c - half_width,
                    x_max: c + half_width,
                    nx: 41,
                },
                tolerances: Tolerances::default(),
                max_bounces: DEFAULT_MAX_BOUNCES,
            }
        })
}

use lorentz_beables::beables::{Engine, Execution};
use lorentz_beables::boundary::SourceKind;
use lorentz_beables::spacetime::Event;
use lorentz_beables::{enumerate_branches, sample_outcome};

/// Scenario, seed for the outcome draw, and unit-square coordinates for the
/// events to probe.
pub fn arb_probe_case() -> impl Strategy<Value = (Scenario, u64, Vec<(f64, f64)>)> {
    (
        arb_scenario(),
        any::<u64>(),
        proptest::collection::vec((0.0..=1.0f64, 0.0..=1.0f64), 24),
    )
}

fn events_for(s: &Scenario, engine: &Engine, unit: &[(f64, f64)]) -> Vec<Event> {
    let mut out: Vec<Event> = unit
        .iter()
        .map(|&(u, v)| Event::new(u * s.final_time, -25.0 + 50.0 * v))
        .collect();
    // also sit exactly on each photon in each branch, where photon beables live
    for (i, &(u, _)) in unit.iter().enumerate().take(8) {
        let t = u * s.final_time;
        for e in &engine.table().entries {
            if let Some(tr) = e.trajectories.get(i % s.photons.len().max(1)) {
                out.push(Event::new(t, tr.position_at(t).unwrap()));
            }
        }
    }
    out
}

/// Posterior normalization, convex-hull bound, total bound and outcome
/// self-consistency at every probed event.
pub fn check_pointwise(case: &(Scenario, u64, Vec<(f64, f64)>)) -> Result<(), TestCaseError> {
    let (s, seed, unit) = case;
    let outcome = sample_outcome(s, *seed).unwrap();
    let engine = Engine::new(s, outcome.clone()).unwrap();
    let bound: f64 = s.systems.iter().map(|x| x.mass).sum::<f64>()
        + s.photons.iter().map(|p| p.energy).sum::<f64>();
    for y in events_for(s, &engine, unit) {
        let b = engine.beable_at(y).unwrap();
        let norm: f64 = b.posterior.iter().map(|p| p.weight).sum();
        prop_assert!(
            (norm - 1.0).abs() <= 1e-12,
            "posterior sums to {norm} at {y}"
        );
        prop_assert!(
            b.consistent_labels().any(|l| l == outcome.branch.label),
            "outcome missing at {y}"
        );
        for c in &b.contributions {
            let locals = engine.local_values(c.source, y);
            let lo = locals.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = locals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            prop_assert!(
                c.value >= lo - 1e-12 && c.value <= hi + 1e-12,
                "{:?} = {} outside [{lo}, {hi}] at {y}",
                c.source,
                c.value
            );
        }
        let sum: f64 = b.contributions.iter().map(|c| c.value).sum();
        prop_assert!((sum - b.total).abs() <= 1e-12);
        prop_assert!(
            b.total >= -1e-12 && b.total <= bound + 1e-12,
            "total {} at {y}",
            b.total
        );
    }
    Ok(())
}

/// Consistent sets only shrink as time advances at a fixed position.
pub fn check_refinement(case: &(Scenario, u64, Vec<(f64, f64)>)) -> Result<(), TestCaseError> {
    let (s, seed, unit) = case;
    let outcome = sample_outcome(s, *seed).unwrap();
    let engine = Engine::new(s, outcome).unwrap();
    for pair in unit.chunks(2) {
        let [(u1, v), (u2, _)] = pair else { continue };
        let x = -25.0 + 50.0 * v;
        let (ta, tb) = (u1.min(*u2) * s.final_time, u1.max(*u2) * s.final_time);
        let early = engine.consistent_indices(Event::new(ta, x)).unwrap();
        let late = engine.consistent_indices(Event::new(tb, x)).unwrap();
        prop_assert!(
            late.iter().all(|b| early.contains(b)),
            "at x={x}: {late:?} not within {early:?} ({ta} -> {tb})"
        );
    }
    Ok(())
}

/// Reflecting a two-photon model about the midpoint of its components and
/// swapping the outcome branch reflects the field.
pub fn check_mirror(s: &Scenario) -> Result<f64, TestCaseError> {
    let c = 0.5 * (s.systems[0].components[0].x + s.systems[0].components[1].x);
    let m = s.mirrored(c);
    let mut worst: f64 = 0.0;
    for (label, mirrored_label) in [("1", "2"), ("2", "1")] {
        let a = Engine::for_branch(s, label)
            .unwrap()
            .field(&s.grid, Execution::Parallel)
            .unwrap();
        let b = Engine::for_branch(&m, mirrored_label)
            .unwrap()
            .field(&m.grid, Execution::Parallel)
            .unwrap();
        let (nt, nx) = (s.grid.nt, s.grid.nx);
        for k in 0..nt {
            for j in 0..nx {
                let pa = a.at(k, j);
                let pb = b.at(k, nx - 1 - j);
                worst = worst.max((pa.total - pb.total).abs());
                for (ca, cb) in pa.contributions.iter().zip(&pb.contributions) {
                    prop_assert_eq!(ca.source, cb.source);
                    worst = worst.max((ca.value - cb.value).abs());
                }
            }
        }
    }
    prop_assert!(worst < 1e-9, "mirror deviation {worst}");
    Ok(worst)
}

pub fn total_branch_weight(s: &Scenario) -> f64 {
    enumerate_branches(s).iter().map(|b| b.weight).sum()
}

pub fn photon_contribution_total(s: &lorentz_beables::BeableSample) -> f64 {
    s.contributions
        .iter()
        .filter(|c| c.source.kind == SourceKind::Photon)
        .map(|c| c.value)
        .sum()
}
