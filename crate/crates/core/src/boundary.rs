//! The fictitious final measurement on `t = T`.
//!
//! In these toy models the evolved state is diagonal in the branch basis
//! and every branch leaves a distinct pattern of deposits on the final
//! surface, so the outcome distribution reduces to the branch weights.
//! Conditioning an event `y` on the final data means comparing the
//! deposits that fall strictly outside the future light cone of `y`.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::raytrace::{trace_all, Trajectory};
use crate::scenario::{enumerate_branches, Branch, Scenario, Tolerances};
use crate::spacetime::{outside_flc_region_with_tol, Event, OutsideFlcRegion};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum SourceKind {
    System,
    Photon,
}

/// A source of stress-energy: a massive system or a photon, by index.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct SourceId {
    pub kind: SourceKind,
    pub id: usize,
}

impl SourceId {
    pub const fn system(id: usize) -> Self {
        SourceId {
            kind: SourceKind::System,
            id,
        }
    }

    pub const fn photon(id: usize) -> Self {
        SourceId {
            kind: SourceKind::Photon,
            id,
        }
    }
}

impl fmt::Display for SourceId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            SourceKind::System => write!(f, "system{}", self.id),
            SourceKind::Photon => write!(f, "photon{}", self.id),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Deposit {
    pub x: f64,
    pub energy: f64,
    pub source: SourceId,
    /// Occupied component index for systems.
    pub component: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FinalOutcome {
    pub branch: Branch,
    pub deposits: Vec<Deposit>,
    pub weight: f64,
}

/// Quantized, sorted `(x, energy)` pairs of the deposits inside a region.
/// Missing entries matter: equal keys agree on presence and on absence.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RestrictedDataKey(Vec<(i64, i64)>);

impl RestrictedDataKey {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn entries(&self) -> &[(i64, i64)] {
        &self.0
    }
}

fn quantize(v: f64, tol: f64) -> i64 {
    (v / tol).round() as i64
}

/// Photon deposits at their `t = T` positions followed by the system
/// deposits at their occupied components.
pub fn final_deposits(s: &Scenario, branch: &Branch) -> Result<Vec<Deposit>> {
    let trajectories = trace_all(s, branch)?;
    deposits_from(s, branch, &trajectories)
}

fn deposits_from(
    s: &Scenario,
    branch: &Branch,
    trajectories: &[Trajectory],
) -> Result<Vec<Deposit>> {
    let mut out = Vec::with_capacity(trajectories.len() + s.systems.len());
    for tr in trajectories {
        out.push(Deposit {
            x: tr.position_at(s.final_time)?,
            energy: s.photons[tr.photon].energy,
            source: SourceId::photon(tr.photon),
            component: None,
        });
    }
    for occ in s.occupants(branch) {
        out.push(Deposit {
            x: occ.x,
            energy: occ.mass,
            source: SourceId::system(occ.system),
            component: Some(occ.component),
        });
    }
    Ok(out)
}

pub fn outcome_for_branch(s: &Scenario, branch: &Branch) -> Result<FinalOutcome> {
    Ok(FinalOutcome {
        deposits: final_deposits(s, branch)?,
        weight: branch.weight,
        branch: branch.clone(),
    })
}

/// Index of the branch selected by a uniform draw from a generator seeded
/// with `seed`.
pub fn sample_branch_index(branches: &[Branch], seed: u64) -> usize {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (i, b) in branches.iter().enumerate() {
        acc += b.weight;
        if u < acc {
            return i;
        }
    }
    // rounding left u above the accumulated total; take the last branch
    // that can actually occur
    branches
        .iter()
        .rposition(|b| b.weight > 0.0)
        .unwrap_or(branches.len() - 1)
}

/// Draws one final outcome from the Born distribution over branches.
pub fn sample_outcome(s: &Scenario, seed: u64) -> Result<FinalOutcome> {
    let branches = enumerate_branches(s);
    let idx = sample_branch_index(&branches, seed);
    outcome_for_branch(s, &branches[idx])
}

/// Key of the deposits lying strictly inside `region`.
pub fn restricted_key(
    deposits: &[Deposit],
    region: &OutsideFlcRegion,
    tol: &Tolerances,
) -> RestrictedDataKey {
    let mut entries: Vec<(i64, i64)> = deposits
        .iter()
        .filter(|d| region.contains(d.x))
        .map(|d| (quantize(d.x, tol.tol_pos), quantize(d.energy, tol.tol_norm)))
        .collect();
    entries.sort_unstable();
    RestrictedDataKey(entries)
}

/// Branches, their photon trajectories and their final deposits, computed
/// once per scenario.
#[derive(Clone, Debug)]
pub struct BranchTable {
    pub entries: Vec<BranchEntry>,
}

#[derive(Clone, Debug)]
pub struct BranchEntry {
    pub branch: Branch,
    pub trajectories: Vec<Trajectory>,
    pub deposits: Vec<Deposit>,
}

impl BranchTable {
    pub fn build(s: &Scenario) -> Result<Self> {
        let entries = enumerate_branches(s)
            .into_iter()
            .map(|branch| {
                let trajectories = trace_all(s, &branch)?;
                let deposits = deposits_from(s, &branch, &trajectories)?;
                Ok(BranchEntry {
                    branch,
                    trajectories,
                    deposits,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(BranchTable { entries })
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.entries.iter().position(|e| e.branch.label == label)
    }

    /// Indices of the branches whose final data outside the future light
    /// cone of `y` match `outcome`. Never empty for an outcome drawn from
    /// this table.
    pub fn consistent_indices(
        &self,
        outcome: &FinalOutcome,
        y: Event,
        s: &Scenario,
    ) -> Result<Vec<usize>> {
        let region = outside_flc_region_with_tol(y, s.final_time, s.tolerances.tol_causal)?;
        let target = restricted_key(&outcome.deposits, &region, &s.tolerances);
        let found: Vec<usize> = self
            .entries
            .iter()
            .enumerate()
            .filter(|(_, e)| restricted_key(&e.deposits, &region, &s.tolerances) == target)
            .map(|(i, _)| i)
            .collect();
        if found.is_empty() {
            return Err(Error::Internal(format!(
                "no branch matches the final data outside the future light cone of {y}"
            )));
        }
        Ok(found)
    }
}

/// Branches that cannot be told apart from `outcome` using only final data
/// spacelike to `y`.
pub fn consistent_branches(outcome: &FinalOutcome, y: Event, s: &Scenario) -> Result<Vec<Branch>> {
    let table = BranchTable::build(s)?;
    Ok(table
        .consistent_indices(outcome, y, s)?
        .into_iter()
        .map(|i| table.entries[i].branch.clone())
        .collect())
}
