//! Data model for the event-driven wave-train tracer.
//!
//! A simulation produces a set of [`Train`]s (plane-wave segments with
//! time-dependent support boundaries), [`Episode`]s (intervals during which
//! an optical element consumes one train and feeds its products), point
//! [`Event`]s (the log of scatterings, shutter switches and detector
//! arrivals) and [`Crest`]s (worldlines of individual phase maxima).

use crate::scattering::SplitterOptics;
use crate::scenarios::Scenario;
use crate::trajectory::CrestLine;
use crate::wavemodel::PlaneWave;

pub type TrainId = usize;
pub type EpisodeId = usize;
pub type EventId = usize;
pub type CrestId = usize;

/// Kind tag for a logged event.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EventKind {
    /// Reflection where the element and the incident phase fronts approach
    /// head-on (element slower than the incident phase speed, or moving
    /// against it).
    ReflectHeadOn,
    /// Reflection where the element outruns the incident phase fronts and
    /// scatters them from behind.
    ReflectOvertake,
    /// Transmission partner of [`EventKind::ReflectHeadOn`].
    TransmitHeadOn,
    /// Transmission partner of [`EventKind::ReflectOvertake`].
    TransmitOvertake,
    /// An element switched to transparent (its optics turned off).
    ShutterOpen,
    /// An element switched back to active optics.
    ShutterActivate,
    /// A traced crest reached the detector.
    DetectorArrival,
}

impl EventKind {
    /// Stable snake_case name used in CSV output.
    pub fn name(self) -> &'static str {
        match self {
            EventKind::ReflectHeadOn => "reflect_head_on",
            EventKind::ReflectOvertake => "reflect_overtake",
            EventKind::TransmitHeadOn => "transmit_head_on",
            EventKind::TransmitOvertake => "transmit_overtake",
            EventKind::ShutterOpen => "shutter_open",
            EventKind::ShutterActivate => "shutter_activate",
            EventKind::DetectorArrival => "detector_arrival",
        }
    }

    /// True for the two kinds produced when an element overtakes phase
    /// fronts from behind.
    pub fn is_overtake(self) -> bool {
        matches!(self, EventKind::ReflectOvertake | EventKind::TransmitOvertake)
    }
}

/// A participant referenced by an event row: a train, a crest or an element.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Actor {
    Train(TrainId),
    Crest(CrestId),
    Element(usize),
}

impl Actor {
    /// Stable short id used in CSV output: `T3`, `C17`, `E0`.
    pub fn tag(self) -> String {
        match self {
            Actor::Train(id) => format!("T{id}"),
            Actor::Crest(id) => format!("C{id}"),
            Actor::Element(id) => format!("E{id}"),
        }
    }
}

/// One logged point event.
#[derive(Debug, Clone)]
pub struct Event {
    pub id: EventId,
    pub time: f64,
    pub position: f64,
    pub kind: EventKind,
    /// The object that triggered the event, if any.
    pub incident: Option<Actor>,
    /// Objects created by the event, in creation order.
    pub products: Vec<Actor>,
    /// |amplitude| of the created wave (0 for shutter events).
    pub amplitude_abs: f64,
}

/// One piece of a support boundary, valid from `from_t` until the next
/// piece takes over.  A boundary is free (a straight characteristic ray)
/// or attached to an element worldline.
#[derive(Debug, Clone, Copy)]
pub enum BoundaryPiece {
    Ray { from_t: f64, x0: f64, t0: f64, speed: f64 },
    Attached { from_t: f64, element: usize },
}

impl BoundaryPiece {
    pub fn from_t(&self) -> f64 {
        match *self {
            BoundaryPiece::Ray { from_t, .. } => from_t,
            BoundaryPiece::Attached { from_t, .. } => from_t,
        }
    }
}

/// A piecewise support boundary.  Pieces are kept in push order with
/// non-decreasing `from_t`; the last piece whose `from_t` is `<= t` is the
/// active one (so a later push at the same `from_t` supersedes).
#[derive(Debug, Clone, Default)]
pub struct Boundary {
    pub pieces: Vec<BoundaryPiece>,
}

impl Boundary {
    pub fn ray(from_t: f64, x0: f64, t0: f64, speed: f64) -> Self {
        Boundary { pieces: vec![BoundaryPiece::Ray { from_t, x0, t0, speed }] }
    }

    pub fn attached(from_t: f64, element: usize) -> Self {
        Boundary { pieces: vec![BoundaryPiece::Attached { from_t, element }] }
    }

    pub fn push(&mut self, piece: BoundaryPiece) {
        if let Some(last) = self.pieces.last() {
            debug_assert!(
                piece.from_t() >= last.from_t(),
                "boundary pieces must be pushed in time order"
            );
        }
        self.pieces.push(piece);
    }

    /// Index of the piece active at time `t` (last piece with `from_t <= t`;
    /// clamps to the first piece before its start).
    pub fn active_index(&self, t: f64) -> usize {
        let mut idx = 0;
        for (i, p) in self.pieces.iter().enumerate() {
            if p.from_t() <= t {
                idx = i;
            } else {
                break;
            }
        }
        idx
    }

    pub fn active_piece(&self, t: f64) -> &BoundaryPiece {
        &self.pieces[self.active_index(t)]
    }

    /// Position of the boundary at time `t`.
    pub fn position(&self, t: f64, scenario: &Scenario) -> f64 {
        match *self.active_piece(t) {
            BoundaryPiece::Ray { x0, t0, speed, .. } => x0 + speed * (t - t0),
            BoundaryPiece::Attached { element, .. } => {
                scenario.elements[element].trajectory.position(t)
            }
        }
    }

    /// Element index if the boundary is attached at time `t`.
    pub fn attached_element(&self, t: f64) -> Option<usize> {
        match *self.active_piece(t) {
            BoundaryPiece::Attached { element, .. } => Some(element),
            BoundaryPiece::Ray { .. } => None,
        }
    }

    /// The boundary pieces restricted to `[t_lo, t_hi]`, as
    /// `(start, end, piece_index)` sub-intervals in time order, skipping
    /// pieces that were superseded before taking effect.
    pub fn spans(&self, t_lo: f64, t_hi: f64) -> Vec<(f64, f64, usize)> {
        let mut out = Vec::new();
        for i in 0..self.pieces.len() {
            let start = self.pieces[i].from_t();
            // A piece ends when any later piece takes over.
            let end = self
                .pieces
                .get(i + 1..)
                .unwrap_or(&[])
                .iter()
                .map(|p| p.from_t())
                .fold(f64::INFINITY, f64::min);
            let s = start.max(t_lo);
            let e = end.min(t_hi);
            if s < e {
                out.push((s, e, i));
            }
        }
        out
    }
}

/// How a train came to exist.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrainRole {
    /// Emitted directly by the source.
    Source,
    /// Reflected product of an episode.
    Reflected,
    /// Transmitted product of an episode.
    Transmitted,
    /// Far-side remainder of a train split by an element activating inside
    /// its support.
    Remnant,
}

impl TrainRole {
    pub fn name(self) -> &'static str {
        match self {
            TrainRole::Source => "source",
            TrainRole::Reflected => "reflected",
            TrainRole::Transmitted => "transmitted",
            TrainRole::Remnant => "remnant",
        }
    }
}

/// A plane-wave segment: one wave filling the region between two moving
/// boundaries.
#[derive(Debug, Clone)]
pub struct Train {
    pub id: TrainId,
    pub wave: PlaneWave,
    pub role: TrainRole,
    /// Number of scatterings in this train's ancestry.
    pub depth: u32,
    pub born: f64,
    /// Time at which the support collapsed to zero width (fully consumed),
    /// if that happened before the end of the run.
    pub died: Option<f64>,
    pub left: Boundary,
    pub right: Boundary,
    /// Event ids along this train's ancestry, oldest first.
    pub provenance: Vec<EventId>,
    /// Signed group speed of `wave` (cached).
    pub group_speed: f64,
    /// Signed phase speed of `wave` (cached).
    pub phase_speed: f64,
}

impl Train {
    /// Support interval `[left, right]` at time `t`.
    pub fn support(&self, t: f64, scenario: &Scenario) -> (f64, f64) {
        (self.left.position(t, scenario), self.right.position(t, scenario))
    }

    /// Whether the train still has content at time `t`.
    pub fn alive_at(&self, t: f64) -> bool {
        t >= self.born && self.died.map_or(true, |d| t < d)
    }
}

/// Which side of the element the incident content occupies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

impl Side {
    pub fn opposite(self) -> Side {
        match self {
            Side::Left => Side::Right,
            Side::Right => Side::Left,
        }
    }
}

/// Kinematic relationship between an element and the wave it is consuming.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    /// Element and phase fronts approach each other (or the element is
    /// slower than the phase fronts it chases): fronts arrive at the
    /// element in the ordinary order.
    HeadOn,
    /// Element outruns both the phase fronts and the envelope: it catches
    /// crests from behind and emits coherent product trains.
    Overtake,
    /// Element outruns the envelope but not the phase fronts: it cuts
    /// through the envelope while crests stream across it; products are
    /// inert swept strips rather than coherent trains.
    CrestTransit,
}

impl Regime {
    pub fn name(self) -> &'static str {
        match self {
            Regime::HeadOn => "head_on",
            Regime::Overtake => "overtake",
            Regime::CrestTransit => "crest_transit",
        }
    }

    /// Event kinds (reflect, transmit) for episodes in this regime.
    pub fn event_kinds(self) -> (EventKind, EventKind) {
        match self {
            Regime::Overtake => (EventKind::ReflectOvertake, EventKind::TransmitOvertake),
            _ => (EventKind::ReflectHeadOn, EventKind::TransmitHeadOn),
        }
    }
}

/// Classify the relationship of element velocity `v_elem` to an incident
/// wave's signed phase and group speeds.
pub fn classify_regime(phase_speed: f64, group_speed: f64, v_elem: f64) -> Regime {
    let same_dir = |a: f64, b: f64| a != 0.0 && b != 0.0 && a.signum() == b.signum();
    let catches_phase = same_dir(v_elem, phase_speed) && v_elem.abs() > phase_speed.abs();
    let outruns_envelope = same_dir(v_elem, group_speed) && v_elem.abs() > group_speed.abs();
    if catches_phase {
        Regime::Overtake
    } else if outruns_envelope {
        Regime::CrestTransit
    } else {
        Regime::HeadOn
    }
}

/// An inert product of a crest-transit episode: the wave content swept
/// while the element cut through the envelope, delivered along its phase
/// characteristics without forming a bounded train.
#[derive(Debug, Clone)]
pub struct StripProduct {
    pub wave: PlaneWave,
    /// True for the forward component (same wavevector as the incident
    /// wave), false for the rechirped backward component.
    pub pass_through: bool,
    /// Element position and time at the start of the feeding interval.
    pub t_start: f64,
    pub x_start: f64,
    /// Filled in when the episode closes.
    pub t_end: f64,
    pub x_end: f64,
}

/// An interval during which one element consumes one incident train.
#[derive(Debug, Clone)]
pub struct Episode {
    pub id: EpisodeId,
    pub incident: TrainId,
    pub element: usize,
    pub t_open: f64,
    pub t_close: Option<f64>,
    pub regime: Regime,
    /// Effective element velocity for this episode (exact for coasting
    /// segments, the midpoint velocity for accelerating sub-steps).
    pub v_eff: f64,
    /// Side of the element occupied by the incident content.
    pub side: Side,
    pub optics: SplitterOptics,
    /// Reflected product train (None if pruned or crest-transit).
    pub reflected: Option<TrainId>,
    /// Transmitted product train (None if pruned or crest-transit); may be
    /// shared with earlier episodes of the same incident train when the
    /// transmitted wave continues bitwise-identically.
    pub transmitted: Option<TrainId>,
    /// Crest-transit products.
    pub strips: Vec<StripProduct>,
    /// Events emitted when the episode opened (reflect, transmit).
    pub open_events: Vec<EventId>,
}

impl Episode {
    pub fn open_at(&self, t: f64) -> bool {
        t >= self.t_open && self.t_close.map_or(true, |c| t < c)
    }
}

/// Why a traced crest stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CrestFate {
    /// Scattered at an element (the terminating event id).
    Scattered(EventId),
    /// Reached the detector (the arrival event id).
    DetectorHit(EventId),
    /// Left the spatial domain.
    LeftDomain,
    /// Still travelling when the run ended.
    RanOut,
}

/// Worldline of a single phase maximum.
#[derive(Debug, Clone)]
pub struct Crest {
    pub id: CrestId,
    /// Train whose support the crest was born into; `None` for crests
    /// carried by swept strips, which have no bounded train.
    pub train: Option<TrainId>,
    /// The wave the crest rides; fixes its slope, its routing direction and
    /// its reported amplitude.
    pub wave: PlaneWave,
    /// Phase value carried along the line (invariant along the worldline;
    /// reflection adds the interface phase).
    pub phase: f64,
    /// `(t, x)` polyline vertices, birth first.
    pub vertices: Vec<(f64, f64)>,
    /// Time from which the crest no longer lies inside its train's support
    /// (it crossed a free boundary or was left behind by the interaction).
    pub orphaned_at: Option<f64>,
    pub fate: CrestFate,
}

impl Crest {
    pub fn amp_abs(&self) -> f64 {
        self.wave.amplitude.norm()
    }

    /// Signed speed of the crest line (the wave's phase speed).
    pub fn speed(&self) -> f64 {
        self.wave.omega / self.wave.wavevector
    }

    /// Straight-line worldline continuation from the last vertex.
    pub fn heading(&self) -> CrestLine {
        let &(t, x) = self.vertices.last().expect("crest has a birth vertex");
        CrestLine { x_start: x, t_start: t, speed: self.speed() }
    }
}

/// Everything produced by a simulation run.
#[derive(Debug, Clone)]
pub struct SimulationResult {
    pub trains: Vec<Train>,
    pub episodes: Vec<Episode>,
    pub events: Vec<Event>,
    pub crests: Vec<Crest>,
    /// Id of the source train.
    pub source_train: TrainId,
    /// Total |amplitude|^2 dropped by the pruning rules.
    pub discarded_weight: f64,
}

impl SimulationResult {
    pub fn count_events(&self, kind: EventKind) -> usize {
        self.events.iter().filter(|e| e.kind == kind).count()
    }

    /// Number of overtake-kind scattering events.
    pub fn overtake_events(&self) -> usize {
        self.events.iter().filter(|e| e.kind.is_overtake()).count()
    }
}
