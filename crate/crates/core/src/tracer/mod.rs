//! Event-driven two-pass tracer.
//!
//! Pass 1 ([`engine`]) evolves plane-wave trains against the element
//! worldlines, producing trains, episodes and the scattering event log.
//! Pass 2 ([`crests`]) threads individual phase maxima through that
//! diagram, which is what makes the kinematics visible: whether an element
//! meets crests head-on, catches them from behind, or slices through an
//! envelope while crests stream across it.

mod crests;
mod engine;
mod types;

pub use types::{
    classify_regime, Actor, Boundary, BoundaryPiece, Crest, CrestFate, CrestId, Episode,
    EpisodeId, Event, EventId, EventKind, Regime, Side, SimulationResult, StripProduct, Train,
    TrainId, TrainRole,
};

use crate::error::Result;
use crate::scenarios::Scenario;

/// Run the full two-pass simulation for a validated scenario.
pub fn run(scenario: &Scenario) -> Result<SimulationResult> {
    scenario.validate()?;
    let mut result = engine::run_pass1(scenario)?;
    crests::run_pass2(scenario, &mut result)?;
    Ok(result)
}
