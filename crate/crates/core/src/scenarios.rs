//! Scenario assembly and validation, plus small closed-form results used by
//! gated and layered setups, and the canned scenarios shipped with the crate.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::scattering::SplitterOptics;
use crate::trajectory::{Trajectory, TrajectorySegment};
use crate::wavemodel::{PlaneWave, WaveFamily, WaveModel};

/// The emitting end of the axis.
///
/// The source sits at a fixed position and radiates a single harmonic train
/// toward the elements between `t_on` and `t_off`.  For the dispersive
/// families the wavevector follows from `group_speed`; for light and sound it
/// follows from `omega0` with `group_speed` fixing the direction and speed.
#[derive(Debug, Clone, PartialEq)]
pub struct SourceSpec {
    pub position: f64,
    pub t_on: f64,
    pub t_off: f64,
    /// Signed group speed of the emitted train.
    pub group_speed: f64,
    /// Angular frequency; required for the non-dispersive families, optional
    /// (and cross-checked) for the dispersive ones.
    pub omega0: Option<f64>,
    /// Real emission amplitude.
    pub amplitude: f64,
    /// Time spacing between consecutive traced phase lines.  This controls
    /// diagram density only; it is independent of the wave period.
    pub crest_spacing: f64,
}

/// What an optics switch changes the element into.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SwitchKind {
    /// Element becomes fully transparent (no interaction at all).
    Open,
    /// Element resumes its configured optics.
    Activate,
}

impl SwitchKind {
    pub fn name(self) -> &'static str {
        match self {
            SwitchKind::Open => "open",
            SwitchKind::Activate => "activate",
        }
    }
}

/// A scheduled optics change.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OpticsSwitch {
    pub time: f64,
    pub kind: SwitchKind,
}

/// Initial optics state of an element.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitialState {
    Active,
    Open,
}

/// One optical element: a splitter on a worldline with an optional on/off
/// schedule.
#[derive(Debug, Clone, PartialEq)]
pub struct Element {
    pub label: String,
    pub trajectory: Trajectory,
    pub optics: SplitterOptics,
    pub initial: InitialState,
    /// Chronological list of optics changes.
    pub switches: Vec<OpticsSwitch>,
}

impl Element {
    pub fn new(label: impl Into<String>, trajectory: Trajectory, optics: SplitterOptics) -> Self {
        Element {
            label: label.into(),
            trajectory,
            optics,
            initial: InitialState::Active,
            switches: Vec::new(),
        }
    }

    /// The optics in force at time `t`, or `None` while the element is open
    /// (transparent).  A switch takes effect exactly at its own time.
    pub fn optics_at(&self, t: f64) -> Option<&SplitterOptics> {
        let mut active = self.initial == InitialState::Active;
        for sw in &self.switches {
            if sw.time <= t {
                active = sw.kind == SwitchKind::Activate;
            } else {
                break;
            }
        }
        if active {
            Some(&self.optics)
        } else {
            None
        }
    }
}

/// Which propagation direction the detector accepts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AcceptDirection {
    Leftward,
    Rightward,
}

impl AcceptDirection {
    pub fn name(self) -> &'static str {
        match self {
            AcceptDirection::Leftward => "leftward",
            AcceptDirection::Rightward => "rightward",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "leftward" => Ok(AcceptDirection::Leftward),
            "rightward" => Ok(AcceptDirection::Rightward),
            other => Err(Error::invalid(format!(
                "unknown accept direction \"{other}\" (expected leftward or rightward)"
            ))),
        }
    }

    /// True when a wave with wavevector `k` propagates in the accepted
    /// direction.
    pub fn accepts_wavevector(self, k: f64) -> bool {
        match self {
            AcceptDirection::Leftward => k < 0.0,
            AcceptDirection::Rightward => k > 0.0,
        }
    }
}

/// A directional probe at a fixed position: it records waves travelling in
/// one direction and ignores the counter-propagating field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectorSpec {
    pub position: f64,
    pub accept: AcceptDirection,
}

/// Run extent and resolution knobs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunSettings {
    /// Simulated time span is `[0, t_max]`.
    pub t_max: f64,
    /// Spatial domain; crests leaving it are dropped from the diagram.
    pub x_min: f64,
    pub x_max: f64,
    /// Number of constant-velocity subintervals used per accelerating
    /// trajectory segment.
    pub substeps: u32,
    /// Detector trace samples per unit time; `None` picks 64 samples per
    /// shortest wave period seen at the detector.
    pub sample_rate: Option<f64>,
    /// Product trains with `|amplitude|` below this fraction of the source
    /// amplitude are dropped (their squared weight is accounted).
    pub amp_floor: f64,
    /// Product generations beyond this depth are dropped like sub-floor
    /// amplitudes.
    pub max_depth: u32,
    /// Hard cap on the number of recorded events.
    pub max_events: usize,
}

impl Default for RunSettings {
    fn default() -> Self {
        RunSettings {
            t_max: 100.0,
            x_min: -100.0,
            x_max: 100.0,
            substeps: 20,
            sample_rate: None,
            amp_floor: 1e-4,
            max_depth: 32,
            max_events: 200_000,
        }
    }
}

/// A complete simulation input.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub model: WaveModel,
    pub source: SourceSpec,
    pub elements: Vec<Element>,
    pub detector: DetectorSpec,
    pub run: RunSettings,
}

impl Scenario {
    /// The emitted plane wave implied by the source spec.  Its constant
    /// phase is chosen so that the field at the source position oscillates as
    /// `exp(-i omega t)`.
    pub fn source_wave(&self) -> Result<PlaneWave> {
        let k = match self.model.family {
            WaveFamily::Schrodinger | WaveFamily::KleinGordon => {
                let k = self.model.wavevector_from_group_speed(self.source.group_speed)?;
                if let Some(w0) = self.source.omega0 {
                    let w = self.model.dispersion_omega(k);
                    if (w - w0).abs() > 1e-9 * w.abs().max(w0.abs()).max(1.0) {
                        return Err(Error::invalid(format!(
                            "source omega0 = {w0} disagrees with the dispersion frequency {w} \
                             implied by group_speed"
                        )));
                    }
                }
                k
            }
            WaveFamily::EmVacuum | WaveFamily::Acoustic => {
                let w0 = self.source.omega0.ok_or_else(|| {
                    Error::invalid(
                        "source omega0 is required for the non-dispersive families",
                    )
                })?;
                self.model
                    .wavevector_from_frequency(w0, self.source.group_speed)?
            }
        };
        let omega = self.model.dispersion_omega(k);
        Ok(PlaneWave {
            wavevector: k,
            omega,
            amplitude: Complex64::new(self.source.amplitude, 0.0),
            phase0: -k * self.source.position,
        })
    }

    /// Check the whole scenario; returns `Error::Validation` carrying every
    /// violation found.
    pub fn validate(&self) -> Result<()> {
        let mut v: Vec<String> = Vec::new();
        v.extend(self.model.constant_violations());

        // Source.
        let s = &self.source;
        if !(s.t_off > s.t_on) {
            v.push(format!(
                "source t_off ({}) must exceed t_on ({})",
                s.t_off, s.t_on
            ));
        }
        if !(s.t_on >= 0.0 && s.t_on < self.run.t_max) {
            v.push(format!(
                "source t_on ({}) must lie within the run span [0, {})",
                s.t_on, self.run.t_max
            ));
        }
        if !(s.crest_spacing > 0.0) {
            v.push(format!(
                "source crest_spacing must be positive (got {})",
                s.crest_spacing
            ));
        }
        if s.group_speed == 0.0 {
            v.push("source group_speed must be non-zero".into());
        }
        if !(s.amplitude > 0.0) {
            v.push(format!(
                "source amplitude must be positive (got {})",
                s.amplitude
            ));
        }
        match self.model.family {
            WaveFamily::EmVacuum => {
                if (s.group_speed.abs() - self.model.units.light_speed).abs()
                    > 1e-9 * self.model.units.light_speed
                {
                    v.push(format!(
                        "light travels at +/-{}; source group_speed {} is not that",
                        self.model.units.light_speed, s.group_speed
                    ));
                }
            }
            WaveFamily::Acoustic => {
                if let Some(cs) = self.model.units.sound_speed {
                    if (s.group_speed.abs() - cs).abs() > 1e-9 * cs {
                        v.push(format!(
                            "sound travels at +/-{cs}; source group_speed {} is not that",
                            s.group_speed
                        ));
                    }
                }
            }
            WaveFamily::KleinGordon => {
                if s.group_speed.abs() >= self.model.units.light_speed {
                    v.push(format!(
                        "source group_speed {} is not below the light speed {}",
                        s.group_speed, self.model.units.light_speed
                    ));
                }
            }
            WaveFamily::Schrodinger => {}
        }
        if let Err(e) = self.source_wave() {
            v.push(format!("source wave: {e}"));
        }

        // Elements.
        let mut labels: Vec<&str> = Vec::new();
        for (i, el) in self.elements.iter().enumerate() {
            if el.label.is_empty() {
                v.push(format!("element {i} has an empty label"));
            }
            if labels.contains(&el.label.as_str()) {
                v.push(format!("duplicate element label \"{}\"", el.label));
            }
            labels.push(&el.label);
            for msg in el.optics.violations() {
                v.push(format!("element \"{}\": {msg}", el.label));
            }
            for w in el.switches.windows(2) {
                if !(w[1].time > w[0].time) {
                    v.push(format!(
                        "element \"{}\": switch times must be strictly increasing \
                         ({} then {})",
                        el.label, w[0].time, w[1].time
                    ));
                }
            }
            if let Some(bound) = self.model.speed_bound() {
                let vmax = el.trajectory.max_abs_velocity(0.0, self.run.t_max);
                if vmax >= bound {
                    v.push(format!(
                        "element \"{}\" reaches speed {vmax}, not below the propagation \
                         bound {bound}",
                        el.label
                    ));
                }
            }
        }
        // Elements must keep their spatial order (worldlines must not cross).
        for i in 0..self.elements.len() {
            for j in (i + 1)..self.elements.len() {
                let a = &self.elements[i];
                let b = &self.elements[j];
                if worldlines_cross(&a.trajectory, &b.trajectory, 0.0, self.run.t_max) {
                    v.push(format!(
                        "elements \"{}\" and \"{}\" cross each other during the run",
                        a.label, b.label
                    ));
                }
            }
        }

        // Run extents.
        let r = &self.run;
        if !(r.t_max > 0.0) {
            v.push(format!("run t_max must be positive (got {})", r.t_max));
        }
        if !(r.x_min < r.x_max) {
            v.push(format!(
                "run domain is empty: x_min {} is not below x_max {}",
                r.x_min, r.x_max
            ));
        }
        for (name, x) in [("source", s.position), ("detector", self.detector.position)] {
            if x < r.x_min || x > r.x_max {
                v.push(format!("{name} position {x} lies outside the domain"));
            }
        }
        for el in &self.elements {
            let x = el.trajectory.position(0.0);
            if x < r.x_min || x > r.x_max {
                v.push(format!(
                    "element \"{}\" starts at {x}, outside the domain",
                    el.label
                ));
            }
        }
        if r.substeps == 0 {
            v.push("run substeps must be at least 1".into());
        }
        if !(r.amp_floor > 0.0 && r.amp_floor < 1.0) {
            v.push(format!(
                "run amp_floor must lie in (0, 1) (got {})",
                r.amp_floor
            ));
        }
        if let Some(rate) = r.sample_rate {
            if !(rate > 0.0) {
                v.push(format!("run sample_rate must be positive (got {rate})"));
            }
        }
        if r.max_depth == 0 {
            v.push("run max_depth must be at least 1".into());
        }

        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::Validation(v))
        }
    }
}

/// Whether two piecewise-quadratic worldlines meet anywhere in `[from, to]`.
fn worldlines_cross(a: &Trajectory, b: &Trajectory, from: f64, to: f64) -> bool {
    // Between consecutive breakpoints of either worldline the difference is a
    // single quadratic; check each piece for a sign change or root.
    let mut cuts = vec![from, to];
    cuts.extend(a.breakpoints(from, to));
    cuts.extend(b.breakpoints(from, to));
    cuts.sort_by(|x, y| x.partial_cmp(y).unwrap());
    cuts.dedup();
    for w in cuts.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        let mid = 0.5 * (lo + hi);
        let d_lo = a.position(lo) - b.position(lo);
        let d_mid = a.position(mid) - b.position(mid);
        let d_hi = a.position(hi) - b.position(hi);
        if d_lo == 0.0 || d_mid == 0.0 || d_hi == 0.0 {
            return true;
        }
        if d_lo.signum() != d_hi.signum() || d_lo.signum() != d_mid.signum() {
            return true;
        }
        // A quadratic can dip through zero and come back between samples:
        // check its extremum inside the piece.
        let (_, va, aa) = a.state_at(mid);
        let (_, vb, ab) = b.state_at(mid);
        let rel_a = 0.5 * (aa - ab);
        let rel_v = va - vb;
        if rel_a != 0.0 {
            let t_ext = mid - rel_v / (2.0 * rel_a);
            if t_ext > lo && t_ext < hi {
                let d_ext = a.position(t_ext) - b.position(t_ext);
                if d_ext == 0.0 || d_ext.signum() != d_lo.signum() {
                    return true;
                }
            }
        }
    }
    false
}

/// Passage window of a pair of sequential gates: each gate stays open for
/// `tau`, and the second gate's opening lags the arrival of the leading edge
/// by the fraction `alpha` of `tau`.  The admitted train lasts
/// `tau * (1 - alpha)`, independent of the dispersion family.
pub fn shutter_overlap_window(tau: f64, alpha: f64) -> Result<f64> {
    if !(tau > 0.0) {
        return Err(Error::invalid(format!("tau must be positive (got {tau})")));
    }
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::invalid(format!(
            "alpha must lie in [0, 1] (got {alpha})"
        )));
    }
    Ok(tau * (1.0 - alpha))
}

/// Race condition for light between two gates a distance `separation` apart:
/// the first gate closes at `t_close`, the second opens at `t_open`.  Light
/// admitted before the first gate closed still escapes through the second
/// if and only if the second opens strictly before the last admitted front
/// arrives: `t_open - t_close < separation / c`.
pub fn em_shutter_overlap(t_close: f64, t_open: f64, separation: f64, light_speed: f64) -> bool {
    t_open - t_close < separation / light_speed
}

/// Frequency offset acquired by a matter wave crossing a uniform slab of
/// refractive index `n` and thickness `length` while the whole apparatus
/// accelerates at `g` along the axis: `m g L (1 - n) / (n hbar)`.
pub fn slab_transmission_shift(
    mass: f64,
    g: f64,
    length: f64,
    refractive_index: f64,
    hbar: f64,
) -> Result<f64> {
    if !(refractive_index > 0.0) {
        return Err(Error::invalid(format!(
            "refractive index must be positive (got {refractive_index})"
        )));
    }
    if !(hbar > 0.0) {
        return Err(Error::invalid(format!("hbar must be positive (got {hbar})")));
    }
    Ok(mass * g * length * (1.0 - refractive_index) / (refractive_index * hbar))
}

/// Stationary phase offset between the branch scattered before an element's
/// excursion and the branch scattered after it: twice the wavevector times
/// the net displacement.
pub fn grating_phase_difference(wavevector: f64, displacement: f64) -> f64 {
    2.0 * wavevector * displacement
}

/// Parameters of the canned excursion scenario, exposed so tests and sweeps
/// can reason about the geometry.
pub mod excursion {
    /// Source position.
    pub const SOURCE_X: f64 = 0.0;
    /// Splitter rest position.
    pub const SPLITTER_X: f64 = 30.0;
    /// Detector position.
    pub const DETECTOR_X: f64 = 2.0;
    /// Signed group speed of the emitted train.
    pub const GROUP_SPEED: f64 = 0.2;
    /// Time the splitter holds still before moving.
    pub const DWELL: f64 = 246.0;
    /// Duration of each velocity ramp.
    pub const RAMP: f64 = 0.2;
    /// Cruise velocity of the excursion.
    pub const CRUISE_V: f64 = -1.0;
    /// Cruise duration.
    pub const CRUISE: f64 = 23.8;
    /// Net displacement of the excursion (cruise plus both ramps).
    pub const DISPLACEMENT: f64 = 24.0;
    /// End of the run.
    pub const T_MAX: f64 = 520.0;
}

/// The canned scenario: a long harmonic train meets a 50/50 splitter that
/// holds still, makes a fast constant-velocity excursion toward the source,
/// and parks at the displaced position, while a directional detector between
/// source and splitter listens to everything scattered back.
///
/// The same geometry can be run under any family; pass the family of
/// interest.  Light needs an explicit frequency, so the light variant uses
/// `omega0 = 2` (giving the same wavevector magnitude 0.2 as the matter
/// variants) and swaps the group speed for the light speed.
pub fn build_excursion_scenario(family: WaveFamily) -> Scenario {
    use excursion::*;
    let model = match family {
        WaveFamily::Schrodinger => WaveModel::schrodinger(1.0, 1.0),
        WaveFamily::KleinGordon => WaveModel::klein_gordon(1.0, 1.0, 10.0),
        WaveFamily::EmVacuum => WaveModel::em_vacuum(10.0),
        WaveFamily::Acoustic => WaveModel::acoustic(10.0),
    };
    let (group_speed, omega0) = match family {
        WaveFamily::Schrodinger | WaveFamily::KleinGordon => (GROUP_SPEED, None),
        WaveFamily::EmVacuum | WaveFamily::Acoustic => (10.0, Some(2.0)),
    };
    let trajectory = Trajectory::new(
        SPLITTER_X,
        0.0,
        vec![
            TrajectorySegment::rest(Some(DWELL)),
            TrajectorySegment::const_accel(Some(RAMP), 0.0, CRUISE_V / RAMP),
            TrajectorySegment::const_velocity(Some(CRUISE), CRUISE_V),
            TrajectorySegment::const_accel(Some(RAMP), CRUISE_V, -CRUISE_V / RAMP),
            TrajectorySegment::rest(None),
        ],
    )
    .expect("canned excursion trajectory is valid");
    Scenario {
        model,
        source: SourceSpec {
            position: SOURCE_X,
            t_on: 0.0,
            t_off: T_MAX,
            group_speed,
            omega0,
            amplitude: 1.0,
            crest_spacing: 4.0,
        },
        elements: vec![Element::new(
            "beamsplitter",
            trajectory,
            SplitterOptics::balanced(),
        )],
        detector: DetectorSpec {
            position: DETECTOR_X,
            accept: AcceptDirection::Leftward,
        },
        run: RunSettings {
            t_max: T_MAX,
            x_min: -60.0,
            x_max: 150.0,
            substeps: 20,
            sample_rate: Some(4.0),
            ..RunSettings::default()
        },
    }
}

/// Two sequential gates carved out of mirrors.
///
/// Gate A at `x = 10` opens for `tau` starting at `t1 = 60`, by which time
/// the wave has been waiting against the closed gate for every family, so
/// gate A is the limiting aperture and admits a train exactly `tau` long.
/// Gate B at `x = 20` opens for `tau` starting when the admitted leading
/// edge reaches it plus `alpha * tau`.  The detector beyond gate B times
/// the admitted train.  Matter families use `group_speed`; light and sound
/// run the same geometry at their propagation speed with `omega0 = 2`.
pub fn build_shutter_scenario(family: WaveFamily, tau: f64, alpha: f64) -> Scenario {
    let model = match family {
        WaveFamily::Schrodinger => WaveModel::schrodinger(1.0, 1.0),
        WaveFamily::KleinGordon => WaveModel::klein_gordon(1.0, 1.0, 10.0),
        WaveFamily::EmVacuum => WaveModel::em_vacuum(10.0),
        WaveFamily::Acoustic => WaveModel::acoustic(10.0),
    };
    let (group_speed, omega0) = match family {
        WaveFamily::Schrodinger | WaveFamily::KleinGordon => (0.2, None),
        WaveFamily::EmVacuum | WaveFamily::Acoustic => (10.0, Some(2.0)),
    };
    let x_a = 10.0;
    let x_b = 20.0;
    let t1 = 60.0;
    let travel = (x_b - x_a) / group_speed;
    let t2 = t1 + travel + alpha * tau;
    let gate = |x: f64, open: f64, close: f64| {
        let mut el = Element::new(
            if x == x_a { "gate_a" } else { "gate_b" },
            Trajectory::at_rest(x),
            SplitterOptics::mirror(),
        );
        el.switches = vec![
            OpticsSwitch {
                time: open,
                kind: SwitchKind::Open,
            },
            OpticsSwitch {
                time: close,
                kind: SwitchKind::Activate,
            },
        ];
        el
    };
    let t_max = (t2 + tau + (30.0 - x_b) / group_speed + 40.0).max(120.0);
    Scenario {
        model,
        source: SourceSpec {
            position: 0.0,
            t_on: 0.0,
            t_off: t_max,
            group_speed,
            omega0,
            amplitude: 1.0,
            crest_spacing: 5.0,
        },
        elements: vec![gate(x_a, t1, t1 + tau), gate(x_b, t2, t2 + tau)],
        detector: DetectorSpec {
            position: 30.0,
            accept: AcceptDirection::Rightward,
        },
        run: RunSettings {
            t_max,
            x_min: -50.0,
            x_max: 80.0,
            substeps: 8,
            sample_rate: Some(4.0),
            ..RunSettings::default()
        },
    }
}
