//! Beable fields for toy quantum models in 1+1 dimensional Minkowski space.
//!
//! A world is fixed by a fictitious mass-energy measurement on a late
//! hypersurface `t = T`, drawn once with Born probabilities. The beable at
//! an event is the expected local energy density conditioned only on the
//! part of that final data lying strictly outside the event's future light
//! cone.
//!
//! Modules, bottom-up: [`spacetime`] (causal geometry), [`scenario`]
//! (model description and branches), [`raytrace`] (photon worldlines per
//! branch), [`boundary`] (final deposits, sampling and conditioning),
//! [`beables`] (the conditional expectations), [`oracle`] (closed-form
//! predictions for the two canonical models) and [`output`] (CSV, PGM and
//! metadata files).

// Negated float comparisons are deliberate: NaN must fail the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod beables;
pub mod boundary;
pub mod cli;
pub mod error;
pub mod oracle;
pub mod output;
pub mod profile;
pub mod raytrace;
pub mod scenario;
pub mod spacetime;

pub use beables::{
    asymptotic_check, beable_at, compute_field, compute_field_with, ray_beable, BeableField,
    BeableSample, Engine, Execution,
};
pub use boundary::{
    consistent_branches, final_deposits, restricted_key, sample_outcome, FinalOutcome, SourceId,
};
pub use error::{Error, Result};
pub use scenario::{enumerate_branches, validate, Branch, GridSpec, Scenario};
pub use spacetime::{causal_relation, outside_flc_region, CausalRelation, Event, OutsideFlcRegion};
