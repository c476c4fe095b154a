//! Declarative toy-model scenarios: massive systems in superpositions of
//! localized components, photons, the final time and the evaluation grid.
//!
//! Systems never move. Only `|a_i|^2` of each amplitude enters the
//! dynamics; phases are kept so files round-trip but are otherwise unused.

use std::fmt;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::boundary::final_deposits;
use crate::error::{Error, Result};
use crate::raytrace::trace;
use crate::spacetime::{Event, DEFAULT_TOL_CAUSAL};

/// Reversals allowed per photon before it is declared trapped.
pub const DEFAULT_MAX_BOUNCES: usize = 1_000_000;

const MODEL1_TOML: &str = include_str!("../scenarios/model1.toml");
const MODEL2_TOML: &str = include_str!("../scenarios/model2.toml");

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Component {
    pub x: f64,
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

impl Component {
    pub fn amplitude(&self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }

    /// Born weight `|a|^2` of this component.
    pub fn probability(&self) -> f64 {
        self.amplitude().norm_sqr()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MassiveSystem {
    pub mass: f64,
    /// Gaussian display width; zero renders the system as a one-cell top-hat.
    #[serde(default)]
    pub sigma: f64,
    pub components: Vec<Component>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "i8", into = "i8")]
pub enum Direction {
    Left,
    Right,
}

impl Direction {
    pub fn sign(self) -> f64 {
        match self {
            Direction::Left => -1.0,
            Direction::Right => 1.0,
        }
    }

    pub fn reversed(self) -> Self {
        match self {
            Direction::Left => Direction::Right,
            Direction::Right => Direction::Left,
        }
    }
}

impl TryFrom<i8> for Direction {
    type Error = String;

    fn try_from(v: i8) -> Result<Self, String> {
        match v {
            1 => Ok(Direction::Right),
            -1 => Ok(Direction::Left),
            other => Err(format!("photon dir must be +1 or -1, got {other}")),
        }
    }
}

impl From<Direction> for i8 {
    fn from(d: Direction) -> i8 {
        match d {
            Direction::Left => -1,
            Direction::Right => 1,
        }
    }
}

fn default_photon_energy() -> f64 {
    1.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Photon {
    pub x0: f64,
    pub dir: Direction,
    #[serde(default = "default_photon_energy")]
    pub energy: f64,
}

/// Rectangular evaluation grid, inclusive of both ends on each axis.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "camelCase")]
pub struct GridSpec {
    pub t_min: f64,
    pub t_max: f64,
    pub nt: usize,
    pub x_min: f64,
    pub x_max: f64,
    pub nx: usize,
}

impl GridSpec {
    pub fn len(&self) -> usize {
        self.nt * self.nx
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dt(&self) -> f64 {
        if self.nt > 1 {
            (self.t_max - self.t_min) / (self.nt - 1) as f64
        } else {
            0.0
        }
    }

    pub fn dx(&self) -> f64 {
        if self.nx > 1 {
            (self.x_max - self.x_min) / (self.nx - 1) as f64
        } else {
            0.0
        }
    }

    pub fn t(&self, k: usize) -> f64 {
        if k + 1 == self.nt {
            self.t_max
        } else {
            self.t_min + k as f64 * self.dt()
        }
    }

    pub fn x(&self, j: usize) -> f64 {
        if j + 1 == self.nx {
            self.x_max
        } else {
            self.x_min + j as f64 * self.dx()
        }
    }

    /// Row-major (t outer, x inner) event of flat index `i`.
    pub fn event(&self, i: usize) -> Event {
        Event::new(self.t(i / self.nx), self.x(i % self.nx))
    }

    pub fn with_resolution(&self, nt: usize, nx: usize) -> Self {
        GridSpec { nt, nx, ..*self }
    }

    /// Column index whose coordinate equals `x` to within `tol`, if any.
    pub fn column_of(&self, x: f64, tol: f64) -> Option<usize> {
        let dx = self.dx();
        if dx <= 0.0 {
            return None;
        }
        let j = ((x - self.x_min) / dx).round();
        if j < 0.0 || j >= self.nx as f64 {
            return None;
        }
        let j = j as usize;
        ((self.x(j) - x).abs() <= tol).then_some(j)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    pub tol_pos: f64,
    pub tol_norm: f64,
    pub tol_causal: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            tol_pos: 1e-9,
            tol_norm: 1e-9,
            tol_causal: DEFAULT_TOL_CAUSAL,
        }
    }
}

fn default_max_bounces() -> usize {
    DEFAULT_MAX_BOUNCES
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(rename = "T")]
    pub final_time: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub systems: Vec<MassiveSystem>,
    #[serde(default)]
    pub photons: Vec<Photon>,
    pub grid: GridSpec,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(skip, default = "default_max_bounces")]
    pub max_bounces: usize,
}

/// One term of the global superposition: a component choice per system.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Branch {
    /// Zero-based component index for each system, in system order.
    pub choice: Vec<usize>,
    pub weight: f64,
    pub label: String,
}

impl Branch {
    fn new(choice: Vec<usize>, weight: f64) -> Self {
        let label = branch_label(&choice);
        Branch {
            choice,
            weight,
            label,
        }
    }
}

/// Canonical label: one-based component indices joined by `.`.
pub fn branch_label(choice: &[usize]) -> String {
    if choice.is_empty() {
        return "root".to_string();
    }
    choice
        .iter()
        .map(|c| (c + 1).to_string())
        .collect::<Vec<_>>()
        .join(".")
}

/// A system component that is present in a given branch.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Occupant {
    pub system: usize,
    pub component: usize,
    pub x: f64,
    pub mass: f64,
    pub sigma: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum ViolationKind {
    Norm,
    Components,
    Mass,
    Sigma,
    Overlap,
    Collision,
    PhotonEnergy,
    Grid,
    FinalTime,
    TooSmallT,
    Trapped,
    Tolerances,
    NearDegenerate,
}

impl ViolationKind {
    pub fn as_str(self) -> &'static str {
        use ViolationKind::*;
        match self {
            Norm => "norm",
            Components => "components",
            Mass => "mass",
            Sigma => "sigma",
            Overlap => "overlap",
            Collision => "collision",
            PhotonEnergy => "photon energy",
            Grid => "grid",
            FinalTime => "T",
            TooSmallT => "T too small",
            Trapped => "trapped",
            Tolerances => "tolerances",
            NearDegenerate => "near-degenerate deposits",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Violation {
    pub kind: ViolationKind,
    pub severity: Severity,
    pub message: String,
}

impl Violation {
    fn error(kind: ViolationKind, message: impl Into<String>) -> Self {
        Violation {
            kind,
            severity: Severity::Error,
            message: message.into(),
        }
    }

    fn warning(kind: ViolationKind, message: impl Into<String>) -> Self {
        Violation {
            kind,
            severity: Severity::Warning,
            message: message.into(),
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(f, "{sev}[{}]: {}", self.kind.as_str(), self.message)
    }
}

impl Scenario {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Parse {
            path: None,
            message: e.to_string(),
        })
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        toml::from_str(&text).map_err(|e| Error::Parse {
            path: Some(path.to_path_buf()),
            message: e.to_string(),
        })
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("scenario serializes to TOML")
    }

    /// Single photon from the left, system at `x=0` or `x=4`.
    pub fn model1() -> Self {
        Self::from_toml_str(MODEL1_TOML).expect("bundled model1 scenario parses")
    }

    /// Symmetric two-photon variant of [`Scenario::model1`].
    pub fn model2() -> Self {
        Self::from_toml_str(MODEL2_TOML).expect("bundled model2 scenario parses")
    }

    /// Bundled scenario by name (`model1` or `model2`).
    pub fn builtin(name: &str) -> Option<Self> {
        match name {
            "model1" => Some(Self::model1()),
            "model2" => Some(Self::model2()),
            _ => None,
        }
    }

    pub fn with_final_time(&self, final_time: f64) -> Self {
        Scenario {
            final_time,
            ..self.clone()
        }
    }

    /// Reflection `x -> 2c - x`. Component lists are reversed so they keep
    /// their original ordering sense, which swaps branch indices.
    pub fn mirrored(&self, c: f64) -> Self {
        let mut out = self.clone();
        for sys in &mut out.systems {
            for comp in &mut sys.components {
                comp.x = 2.0 * c - comp.x;
            }
            sys.components.reverse();
        }
        for p in &mut out.photons {
            p.x0 = 2.0 * c - p.x0;
            p.dir = p.dir.reversed();
        }
        out.grid.x_min = 2.0 * c - self.grid.x_max;
        out.grid.x_max = 2.0 * c - self.grid.x_min;
        out
    }

    /// Systems present in `branch`, in system order.
    pub fn occupants(&self, branch: &Branch) -> Vec<Occupant> {
        self.systems
            .iter()
            .zip(&branch.choice)
            .enumerate()
            .map(|(system, (sys, &component))| Occupant {
                system,
                component,
                x: sys.components[component].x,
                mass: sys.mass,
                sigma: sys.sigma,
            })
            .collect()
    }

    pub fn branch_by_label(&self, label: &str) -> Result<Branch> {
        enumerate_branches(self)
            .into_iter()
            .find(|b| b.label == label)
            .ok_or_else(|| Error::invalid(format!("no branch labelled {label:?}")))
    }

    /// Largest photon-system interaction time over all branches, or `None`
    /// if nothing ever bounces.
    pub fn interaction_horizon(&self) -> Result<Option<f64>> {
        let mut last: Option<f64> = None;
        for branch in enumerate_branches(self) {
            for id in 0..self.photons.len() {
                let traj = trace(self, &branch, id)?;
                if let Some(t) = traj.last_bounce_time() {
                    last = Some(last.map_or(t, |l| l.max(t)));
                }
            }
        }
        Ok(last)
    }
}

/// Cartesian product of component choices, first system most significant.
pub fn enumerate_branches(s: &Scenario) -> Vec<Branch> {
    let mut out = vec![Branch::new(Vec::new(), 1.0)];
    for sys in &s.systems {
        let mut next = Vec::with_capacity(out.len() * sys.components.len());
        for b in &out {
            for (i, comp) in sys.components.iter().enumerate() {
                let mut choice = b.choice.clone();
                choice.push(i);
                next.push(Branch::new(choice, b.weight * comp.probability()));
            }
        }
        out = next;
    }
    out
}

/// Every problem found in `s`. An empty list (or one holding only
/// warnings) means the scenario can be simulated.
pub fn validate(s: &Scenario) -> Vec<Violation> {
    use ViolationKind::*;
    let mut v = Vec::new();
    let tol = s.tolerances;

    if !(tol.tol_pos > 0.0 && tol.tol_norm > 0.0 && tol.tol_causal >= 0.0) {
        v.push(Violation::error(
            Tolerances,
            format!("tolerances must be positive, got {tol:?}"),
        ));
    }
    if !(s.final_time.is_finite() && s.final_time > 0.0) {
        v.push(Violation::error(
            FinalTime,
            format!("T must be finite and positive, got {}", s.final_time),
        ));
    }

    for (i, sys) in s.systems.iter().enumerate() {
        if sys.components.is_empty() {
            v.push(Violation::error(
                Components,
                format!("system {i} has no components"),
            ));
            continue;
        }
        if !(sys.mass.is_finite() && sys.mass > 0.0) {
            v.push(Violation::error(
                Mass,
                format!("system {i} mass must be positive, got {}", sys.mass),
            ));
        }
        if !(sys.sigma.is_finite() && sys.sigma >= 0.0) {
            v.push(Violation::error(
                Sigma,
                format!("system {i} sigma must be >= 0, got {}", sys.sigma),
            ));
        }
        let norm: f64 = sys.components.iter().map(Component::probability).sum();
        if !((norm - 1.0).abs() <= tol.tol_norm) {
            v.push(Violation::error(
                Norm,
                format!("system {i} amplitudes have total probability {norm}"),
            ));
        }
        let min_sep = (4.0 * sys.sigma).max(tol.tol_pos);
        for (a, ca) in sys.components.iter().enumerate() {
            if !ca.x.is_finite() {
                v.push(Violation::error(
                    Components,
                    format!("system {i} component {a} position is not finite"),
                ));
            }
            for (b, cb) in sys.components.iter().enumerate().skip(a + 1) {
                if !((ca.x - cb.x).abs() > min_sep) {
                    v.push(Violation::error(
                        Overlap,
                        format!("system {i} components {a} and {b} are closer than {min_sep}"),
                    ));
                }
            }
        }
    }
    for (i, si) in s.systems.iter().enumerate() {
        for (j, sj) in s.systems.iter().enumerate().skip(i + 1) {
            for ci in &si.components {
                for cj in &sj.components {
                    if (ci.x - cj.x).abs() <= tol.tol_pos {
                        v.push(Violation::error(
                            Collision,
                            format!("systems {i} and {j} both have a component at x={}", ci.x),
                        ));
                    }
                }
            }
        }
    }

    for (i, p) in s.photons.iter().enumerate() {
        if !(p.energy.is_finite() && p.energy > 0.0) {
            v.push(Violation::error(
                PhotonEnergy,
                format!("photon {i} energy must be positive, got {}", p.energy),
            ));
        }
        if !p.x0.is_finite() {
            v.push(Violation::error(
                PhotonEnergy,
                format!("photon {i} start position is not finite"),
            ));
        }
    }

    let g = &s.grid;
    let finite = [g.t_min, g.t_max, g.x_min, g.x_max]
        .iter()
        .all(|c| c.is_finite());
    if !finite || g.nt == 0 || g.nx < 2 || g.t_min > g.t_max || g.x_min >= g.x_max {
        v.push(Violation::error(
            Grid,
            format!("malformed grid {g:?} (need nt >= 1, nx >= 2, ordered bounds)"),
        ));
    } else if g.t_min < 0.0 || g.t_max > s.final_time {
        v.push(Violation::error(
            Grid,
            format!(
                "grid times [{}, {}] must lie within [0, T={}]",
                g.t_min, g.t_max, s.final_time
            ),
        ));
    }

    // Dynamics checks need structurally sound input.
    if v.iter().any(|x| x.severity == Severity::Error) {
        return v;
    }

    match s.interaction_horizon() {
        Err(Error::TrappedPhoton { photon, branch, .. }) => {
            v.push(Violation::error(
                Trapped,
                format!("photon {photon} is trapped in branch {branch}"),
            ));
            return v;
        }
        Err(e) => {
            v.push(Violation::error(Trapped, e.to_string()));
            return v;
        }
        Ok(Some(horizon)) if horizon >= s.final_time => {
            v.push(Violation::error(
                TooSmallT,
                format!(
                    "last interaction at t={horizon} is not before T={}",
                    s.final_time
                ),
            ));
            return v;
        }
        Ok(_) => {}
    }

    let branches = enumerate_branches(s);
    let mut deposits = Vec::with_capacity(branches.len());
    for b in &branches {
        match final_deposits(s, b) {
            Ok(d) => deposits.push(d),
            Err(e) => {
                v.push(Violation::error(Trapped, e.to_string()));
                return v;
            }
        }
    }
    'outer: for (i, di) in deposits.iter().enumerate() {
        for dj in deposits.iter().skip(i + 1) {
            for a in di {
                for b in dj {
                    let d = (a.x - b.x).abs();
                    if d > tol.tol_pos && d <= 10.0 * tol.tol_pos {
                        v.push(Violation::warning(
                            NearDegenerate,
                            format!("deposits at x={} and x={} in different branches are distinct but nearly equal", a.x, b.x),
                        ));
                        break 'outer;
                    }
                }
            }
        }
    }
    v
}

/// True when `validate` reports no errors (warnings allowed).
pub fn is_valid(violations: &[Violation]) -> bool {
    violations.iter().all(|v| v.severity != Severity::Error)
}

/// Validates and converts any error-level violation into [`Error::Invalid`].
pub fn ensure_valid(s: &Scenario) -> Result<()> {
    let violations = validate(s);
    if is_valid(&violations) {
        Ok(())
    } else {
        Err(Error::Invalid(
            violations
                .into_iter()
                .filter(|v| v.severity == Severity::Error)
                .collect(),
        ))
    }
}
