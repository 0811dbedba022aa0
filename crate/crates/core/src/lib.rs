//! Event-driven kinematics of one-dimensional plane-wave trains scattering
//! off moving optical elements.
//!
//! The crate simulates a single spatial axis on which a source emits a
//! harmonic wavetrain toward partially reflecting elements that follow
//! piecewise constant-acceleration worldlines and may switch between
//! transparent and active.  The run is resolved exactly into events
//! (edge/element contacts, scattering, detector arrivals) rather than on a
//! grid: wavetrains carry piecewise-straight support boundaries, every
//! constant-velocity stretch of an element produces one scattering episode
//! per incident train, and individual phase lines ("crests") are traced
//! through the finished episode table to give a worldline diagram.
//!
//! A directional detector collects the trains routed toward it, superposes
//! them into a time trace, and reports the interference structure: the
//! windows where trains overlap, beat frequencies, and stationary phase
//! differences.
//!
//! Top-level layout:
//!
//! * [`wavemodel`] — dispersion families (non-relativistic and relativistic
//!   matter waves, light, sound) and plane-wave bookkeeping;
//! * [`trajectory`] — piecewise constant-acceleration worldlines and exact
//!   crossing solvers;
//! * [`scattering`] — frame changes and one-event scattering rules;
//! * [`scenarios`] — scenario assembly, validation, and canned setups;
//! * [`tracer`] — the two-pass simulation engine (episodes, then crests);
//! * [`detector`] — trace superposition, interference analysis, and
//!   retarded-time queries;
//! * [`scenario_file`] — the plain-text scenario format and run manifests;
//! * [`cli`] — the `simulate` / `check` / `sweep` command line.

pub mod cli;
pub mod csvio;
pub mod detector;
pub mod error;
pub mod scattering;
pub mod scenario_file;
pub mod scenarios;
pub mod tracer;
pub mod trajectory;
pub mod wavemodel;

pub use error::{Error, Result};
pub use scattering::{
    galilean_boost, lorentz_boost, reflect_at_event, reflect_at_moving_splitter,
    reflection_kinematics, transmit, ScatterProducts, SplitterOptics,
};
pub use scenarios::{
    build_excursion_scenario, build_shutter_scenario, Element, RunSettings, Scenario, SourceSpec,
};
pub use tracer::{run, SimulationResult};
pub use trajectory::{CrestLine, Trajectory, TrajectorySegment};
pub use wavemodel::{PlaneWave, Units, WaveFamily, WaveModel};
