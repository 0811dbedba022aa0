//! Pass 1: evolve wave trains against the element worldlines.
//!
//! Time is cut into epochs at every trajectory breakpoint (accelerating
//! segments are further cut into constant-velocity sub-steps), every optics
//! switch, and the source on/off times.  Within an epoch every element has a
//! fixed effective velocity and fixed optics, so all boundary/worldline
//! crossings reduce to quadratics and the evolution is exactly solvable.
//!
//! At each epoch boundary the engine *reconciles*: episodes whose element
//! changed state are closed (their product edges detach as free
//! characteristics) and re-opened where content still flows into the
//! element.  A re-opened episode continues the transmitted wave
//! bitwise-identically, so the transmitted product train is shared rather
//! than restarted; the reflected product gets a fresh train per effective
//! velocity, which is what builds the chirped fan of micro-trains while an
//! element accelerates.
//!
//! Inside an epoch only two things can happen, each found as the earliest
//! crossing: a *contact* (a train edge reaches an element, possibly opening
//! an episode) and an *exhaustion* (the far edge of a consumed train
//! reaches the element and the train dies).

use std::collections::{BTreeMap, HashSet};

use crate::error::{Error, Result};
use crate::scattering::{reflect_at_event, SplitterOptics};
use crate::scenarios::Scenario;
use crate::trajectory::CrestLine;
use crate::wavemodel::PlaneWave;

use super::types::{
    classify_regime, Actor, Boundary, BoundaryPiece, Episode, EpisodeId, Event, EventId,
    EventKind, Regime, Side, SimulationResult, StripProduct, Train, TrainId, TrainRole,
};

/// Effective state of one element during one epoch.
#[derive(Debug, Clone, Copy)]
struct ElemState {
    v_eff: f64,
    accelerating: bool,
    t_mid: f64,
    optics: Option<SplitterOptics>,
}

/// An occurrence found inside an epoch.
#[derive(Debug, Clone, Copy)]
enum Occurrence {
    Exhaust { t: f64, element: usize, train: TrainId },
    Contact { t: f64, element: usize, train: TrainId, content_side: Side },
}

impl Occurrence {
    fn time(&self) -> f64 {
        match *self {
            Occurrence::Exhaust { t, .. } | Occurrence::Contact { t, .. } => t,
        }
    }

    /// Deterministic processing order: time, then element, then train, with
    /// exhaustions before contacts on exact ties.
    fn sort_key(&self) -> (f64, usize, TrainId, u8) {
        match *self {
            Occurrence::Exhaust { t, element, train } => (t, element, train, 0),
            Occurrence::Contact { t, element, train, .. } => (t, element, train, 1),
        }
    }
}

pub(super) struct Engine<'a> {
    sc: &'a Scenario,
    trains: Vec<Train>,
    episodes: Vec<Episode>,
    events: Vec<Event>,
    /// Open episode per (element, incident train).
    open: BTreeMap<(usize, TrainId), EpisodeId>,
    states: Vec<ElemState>,
    emitted_switches: HashSet<(usize, usize)>,
    discarded: f64,
    amp_floor_abs: f64,
    x_tol: f64,
}

pub(super) fn run_pass1(sc: &Scenario) -> Result<SimulationResult> {
    Engine::new(sc)?.run()
}

impl<'a> Engine<'a> {
    fn new(sc: &'a Scenario) -> Result<Self> {
        let span = (sc.run.x_max - sc.run.x_min).abs().max(1.0);
        Ok(Engine {
            sc,
            trains: Vec::new(),
            episodes: Vec::new(),
            events: Vec::new(),
            open: BTreeMap::new(),
            states: Vec::new(),
            emitted_switches: HashSet::new(),
            discarded: 0.0,
            amp_floor_abs: sc.run.amp_floor * sc.source.amplitude.abs(),
            x_tol: 1e-9 * span,
        })
    }

    fn run(mut self) -> Result<SimulationResult> {
        self.seed_source()?;
        let grid = self.grid();
        for pair in grid.windows(2) {
            let (ta, tb) = (pair[0], pair[1]);
            if !(tb > ta) {
                continue;
            }
            self.states = self.elem_states(ta, tb);
            self.reconcile(ta)?;
            self.sweep(ta, tb)?;
        }
        // The run ends: freeze open episodes at t_max (their attached edges
        // stay attached; downstream evaluation never looks past t_max).
        let t_end = self.sc.run.t_max;
        let still_open: Vec<EpisodeId> = self.open.values().copied().collect();
        for ep_id in still_open {
            let element = self.episodes[ep_id].element;
            let x_e = self.sc.elements[element].trajectory.position(t_end);
            self.episodes[ep_id].t_close = Some(t_end);
            for strip in &mut self.episodes[ep_id].strips {
                strip.t_end = t_end;
                strip.x_end = x_e;
            }
        }
        self.open.clear();
        Ok(SimulationResult {
            trains: self.trains,
            episodes: self.episodes,
            events: self.events,
            crests: Vec::new(),
            source_train: 0,
            discarded_weight: self.discarded,
        })
    }

    /// Emit the source as train 0.
    fn seed_source(&mut self) -> Result<()> {
        let wave = self.sc.source_wave()?;
        let vg = self.sc.model.group_velocity(wave.wavevector)?;
        let vp = wave.phase_velocity()?;
        let s = &self.sc.source;
        let trailing = {
            let mut b = Boundary::ray(s.t_on, s.position, s.t_on, 0.0);
            b.push(BoundaryPiece::Ray {
                from_t: s.t_off,
                x0: s.position,
                t0: s.t_off,
                speed: vg,
            });
            b
        };
        let leading = Boundary::ray(s.t_on, s.position, s.t_on, vg);
        let (left, right) = if vg > 0.0 { (trailing, leading) } else { (leading, trailing) };
        self.trains.push(Train {
            id: 0,
            wave,
            role: TrainRole::Source,
            depth: 0,
            born: s.t_on,
            died: None,
            left,
            right,
            provenance: Vec::new(),
            group_speed: vg,
            phase_speed: vp,
        });
        Ok(())
    }

    /// Epoch boundaries covering `[0, t_max]`.
    fn grid(&self) -> Vec<f64> {
        let t_max = self.sc.run.t_max;
        let mut g = vec![0.0, t_max, self.sc.source.t_on];
        if self.sc.source.t_off < t_max {
            g.push(self.sc.source.t_off);
        }
        for el in &self.sc.elements {
            g.extend(el.trajectory.refined_breakpoints(0.0, t_max, self.sc.run.substeps));
            for sw in &el.switches {
                if sw.time > 0.0 && sw.time < t_max {
                    g.push(sw.time);
                }
            }
        }
        g.retain(|t| (0.0..=t_max).contains(t));
        g.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let tol = 1e-12 * t_max.max(1.0);
        g.dedup_by(|b, a| (*b - *a).abs() <= tol);
        if g.first() != Some(&0.0) {
            g.insert(0, 0.0);
        }
        if g.last() != Some(&t_max) {
            g.push(t_max);
        }
        g
    }

    fn elem_states(&self, ta: f64, tb: f64) -> Vec<ElemState> {
        let t_mid = 0.5 * (ta + tb);
        self.sc
            .elements
            .iter()
            .map(|el| {
                let (_, v, a) = el.trajectory.state_at(t_mid);
                ElemState {
                    v_eff: v,
                    accelerating: a != 0.0,
                    t_mid,
                    optics: el.optics_at(ta).copied(),
                }
            })
            .collect()
    }

    /// Epoch-boundary bookkeeping: shutter events, closing episodes whose
    /// element changed state, and opening episodes wherever an active
    /// element sits on (or inside) a train whose content flows into it.
    fn reconcile(&mut self, ta: f64) -> Result<()> {
        // Shutter switches taking effect at this boundary.
        for e in 0..self.sc.elements.len() {
            for (i, sw) in self.sc.elements[e].switches.clone().iter().enumerate() {
                if sw.time <= ta && self.emitted_switches.insert((e, i)) {
                    let kind = match sw.kind {
                        crate::scenarios::SwitchKind::Open => EventKind::ShutterOpen,
                        crate::scenarios::SwitchKind::Activate => EventKind::ShutterActivate,
                    };
                    let x = self.sc.elements[e].trajectory.position(sw.time);
                    self.push_event(sw.time, x, kind, Some(Actor::Element(e)), Vec::new(), 0.0)?;
                }
            }
        }

        // Close episodes whose element changed effective velocity or optics.
        let mut closed_here: BTreeMap<(usize, TrainId), Option<TrainId>> = BTreeMap::new();
        let to_close: Vec<EpisodeId> = self
            .open
            .values()
            .copied()
            .filter(|&ep_id| {
                let ep = &self.episodes[ep_id];
                let st = &self.states[ep.element];
                st.optics != Some(ep.optics) || st.v_eff != ep.v_eff
            })
            .collect();
        for ep_id in to_close {
            let key = (self.episodes[ep_id].element, self.episodes[ep_id].incident);
            closed_here.insert(key, self.episodes[ep_id].transmitted);
            self.close_episode(ep_id, ta, false);
        }

        // Open scan over the trains that existed when the epoch began.
        let n_trains = self.trains.len();
        for e in 0..self.sc.elements.len() {
            if self.states[e].optics.is_none() {
                continue;
            }
            let v = self.states[e].v_eff;
            let x_e = self.sc.elements[e].trajectory.position(ta);
            for m in 0..n_trains {
                if self.open.contains_key(&(e, m)) || !self.trains[m].alive_at(ta) {
                    continue;
                }
                let (le, re) = self.trains[m].support(ta, self.sc);
                if x_e < le - self.x_tol || x_e > re + self.x_tol {
                    continue; // outside; mid-epoch contact discovery handles it
                }
                let at_left = (x_e - le).abs() <= self.x_tol;
                let at_right = (x_e - re).abs() <= self.x_tol;
                let v_rel = self.trains[m].group_speed - v;
                if v_rel == 0.0 {
                    continue; // co-moving content never feeds the element
                }
                let inflow_side = if v_rel > 0.0 { Side::Left } else { Side::Right };
                let side = if at_left && at_right {
                    continue; // zero-width train: nothing to consume yet
                } else if at_left {
                    Side::Right
                } else if at_right {
                    Side::Left
                } else {
                    // Element strictly inside the support: only the inflow
                    // side feeds it; the far side becomes a detached remnant.
                    self.split_remnant(m, e, ta, x_e, inflow_side);
                    inflow_side
                };
                if side != inflow_side {
                    continue;
                }
                let coalesce = closed_here.get(&(e, m)).copied().flatten();
                self.open_episode(e, m, ta, x_e, side, coalesce)?;
            }
        }
        Ok(())
    }

    /// Cut train `m` at element `e`: `m` keeps the side feeding the
    /// element, and a new remnant train inherits the far side verbatim.
    fn split_remnant(&mut self, m: TrainId, e: usize, ta: f64, x_e: f64, inflow_side: Side) {
        let vg = self.trains[m].group_speed;
        let id = self.trains.len();
        let (rem_left, rem_right) = match inflow_side {
            Side::Left => {
                let far = self.trains[m].right.clone();
                self.trains[m].right = {
                    let mut b = self.trains[m].right.clone();
                    b.push(BoundaryPiece::Attached { from_t: ta, element: e });
                    b
                };
                (Boundary::ray(ta, x_e, ta, vg), far)
            }
            Side::Right => {
                let far = self.trains[m].left.clone();
                self.trains[m].left = {
                    let mut b = self.trains[m].left.clone();
                    b.push(BoundaryPiece::Attached { from_t: ta, element: e });
                    b
                };
                (far, Boundary::ray(ta, x_e, ta, vg))
            }
        };
        let src = &self.trains[m];
        self.trains.push(Train {
            id,
            wave: src.wave,
            role: TrainRole::Remnant,
            depth: src.depth,
            born: ta,
            died: None,
            left: rem_left,
            right: rem_right,
            provenance: src.provenance.clone(),
            group_speed: src.group_speed,
            phase_speed: src.phase_speed,
        });
    }

    /// Earliest-occurrence loop inside one epoch.
    fn sweep(&mut self, ta: f64, tb: f64) -> Result<()> {
        let mut processed: HashSet<(u8, usize, TrainId, u64)> = HashSet::new();
        let mut cursor = ta;
        loop {
            let mut best: Option<Occurrence> = None;
            for e in 0..self.sc.elements.len() {
                if self.states[e].optics.is_none() {
                    continue;
                }
                for m in 0..self.trains.len() {
                    let t_from = cursor.max(self.trains[m].born);
                    if t_from >= tb || !self.trains[m].alive_at(t_from) {
                        continue;
                    }
                    let occ = if let Some(&ep_id) = self.open.get(&(e, m)) {
                        let far = match self.episodes[ep_id].side {
                            Side::Left => &self.trains[m].left,
                            Side::Right => &self.trains[m].right,
                        };
                        self.boundary_element_crossing(far, e, t_from, tb)
                            .map(|t| Occurrence::Exhaust { t, element: e, train: m })
                    } else {
                        let x_e = self.sc.elements[e].trajectory.position(t_from);
                        let (le, re) = self.trains[m].support(t_from, self.sc);
                        let (edge, content_side) = if x_e < le - self.x_tol {
                            (&self.trains[m].left, Side::Right)
                        } else if x_e > re + self.x_tol {
                            (&self.trains[m].right, Side::Left)
                        } else {
                            continue; // on/inside support: reconcile handled it
                        };
                        self.boundary_element_crossing(edge, e, t_from, tb).map(|t| {
                            Occurrence::Contact { t, element: e, train: m, content_side }
                        })
                    };
                    let Some(occ) = occ else { continue };
                    if occ.time() >= tb {
                        continue; // belongs to the next epoch
                    }
                    let key = (occ.sort_key().3, e, m, occ.time().to_bits());
                    if processed.contains(&key) {
                        continue;
                    }
                    if best.as_ref().map_or(true, |b| occ.sort_key() < b.sort_key()) {
                        best = Some(occ);
                    }
                }
            }
            let Some(occ) = best else { break };
            let key = (occ.sort_key().3, occ.sort_key().1, occ.sort_key().2, occ.time().to_bits());
            processed.insert(key);
            cursor = occ.time();
            match occ {
                Occurrence::Exhaust { t, element, train } => {
                    let ep_id = self.open[&(element, train)];
                    self.close_episode(ep_id, t, true);
                }
                Occurrence::Contact { t, element, train, content_side } => {
                    let v = self.states[element].v_eff;
                    let v_rel = self.trains[train].group_speed - v;
                    let inflow = match content_side {
                        Side::Left => v_rel > 0.0,
                        Side::Right => v_rel < 0.0,
                    };
                    if inflow {
                        let x = self.sc.elements[element].trajectory.position(t);
                        self.open_episode(element, train, t, x, content_side, None)?;
                    }
                }
            }
        }
        Ok(())
    }

    /// Earliest time in `[t_from, t_to)` at which a support boundary meets
    /// the element worldline.  Attached pieces never produce a crossing
    /// (element worldlines are validated not to cross each other).
    fn boundary_element_crossing(
        &self,
        boundary: &Boundary,
        element: usize,
        t_from: f64,
        t_to: f64,
    ) -> Option<f64> {
        let traj = &self.sc.elements[element].trajectory;
        for (s, e, idx) in boundary.spans(t_from, t_to) {
            if let BoundaryPiece::Ray { x0, t0, speed, .. } = boundary.pieces[idx] {
                let line = CrestLine { x_start: x0, t_start: t0, speed };
                if let Some(t) = traj.first_crossing(&line, s, e) {
                    return Some(t);
                }
            }
        }
        None
    }

    /// Open an episode of element `e` consuming train `m` from `side`.
    ///
    /// `coalesce` carries the transmitted train of an episode for the same
    /// pair that closed at this very instant: the transmitted wave continues
    /// bit-for-bit, so that train is re-attached instead of restarted.
    fn open_episode(
        &mut self,
        e: usize,
        m: TrainId,
        t_open: f64,
        x_open: f64,
        side: Side,
        coalesce: Option<TrainId>,
    ) -> Result<()> {
        let st = self.states[e];
        let optics = st.optics.expect("episodes only open on active elements");
        let v = st.v_eff;
        let (wave, vg, vp, depth) = {
            let tr = &self.trains[m];
            (tr.wave, tr.group_speed, tr.phase_speed, tr.depth)
        };
        let regime = classify_regime(vp, vg, v);
        // Amplitude conventions are anchored at a single worldline event.
        // For accelerating sub-steps that anchor sits at the sub-step
        // midpoint, where the effective velocity is exact.
        let (t_anchor, x_anchor) = if st.accelerating {
            (st.t_mid, self.sc.elements[e].trajectory.position(st.t_mid))
        } else {
            (t_open, x_open)
        };
        let products = reflect_at_event(&self.sc.model, &wave, &optics, v, x_anchor, t_anchor)?;
        debug_assert!(
            {
                let w_in = wave.amplitude.norm_sqr();
                let w_out = products.reflected.amplitude.norm_sqr()
                    + products.transmitted.amplitude.norm_sqr();
                (w_in - w_out).abs() <= 1e-9 * w_in.max(1e-300)
            },
            "scattering must conserve |amplitude|^2"
        );
        let (reflect_kind, transmit_kind) = regime.event_kinds();
        let ep_id = self.episodes.len();
        let prune = |w: &PlaneWave| {
            w.amplitude.norm() < self.amp_floor_abs || depth + 1 > self.sc.run.max_depth
        };

        let mut reflected_train = None;
        let mut transmitted_train = None;
        let mut strips = Vec::new();
        let mut reflect_products = Vec::new();
        let mut transmit_products = Vec::new();

        if regime == Regime::CrestTransit {
            // Swept content leaves as two inert strips, not as trains.
            for (w, pass_through) in [(products.reflected, false), (products.transmitted, true)] {
                if prune(&w) {
                    self.discarded += w.amplitude.norm_sqr();
                    continue;
                }
                strips.push(StripProduct {
                    wave: w,
                    pass_through,
                    t_start: t_open,
                    x_start: x_open,
                    t_end: t_open,
                    x_end: x_open,
                });
            }
        } else {
            // Reflected product: a fresh train on the incident side.
            let w_r = products.reflected;
            if prune(&w_r) || w_r.wavevector.abs() < 1e-12 {
                self.discarded += w_r.amplitude.norm_sqr();
            } else {
                let vg_r = self.sc.model.group_velocity(w_r.wavevector)?;
                let vp_r = w_r.omega / w_r.wavevector;
                let id = self.trains.len();
                let (left, right) = match side {
                    Side::Left => (Boundary::ray(t_open, x_open, t_open, vg_r),
                                   Boundary::attached(t_open, e)),
                    Side::Right => (Boundary::attached(t_open, e),
                                    Boundary::ray(t_open, x_open, t_open, vg_r)),
                };
                let mut provenance = self.trains[m].provenance.clone();
                provenance.push(self.events.len());
                self.trains.push(Train {
                    id,
                    wave: w_r,
                    role: TrainRole::Reflected,
                    depth: depth + 1,
                    born: t_open,
                    died: None,
                    left,
                    right,
                    provenance,
                    group_speed: vg_r,
                    phase_speed: vp_r,
                });
                reflected_train = Some(id);
                reflect_products.push(Actor::Train(id));
            }

            // Transmitted product: continue the shared train or start one.
            let w_t = products.transmitted;
            if let Some(tid) = coalesce {
                debug_assert!(
                    self.trains[tid].wave.wavevector.to_bits() == w_t.wavevector.to_bits()
                        && self.trains[tid].wave.omega.to_bits() == w_t.omega.to_bits()
                        && self.trains[tid].wave.phase0.to_bits() == w_t.phase0.to_bits(),
                    "a continued transmitted train must carry the identical wave"
                );
                match side {
                    Side::Left => self.ensure_attached_left(tid, t_open, e),
                    Side::Right => self.ensure_attached_right(tid, t_open, e),
                }
                transmitted_train = Some(tid);
                transmit_products.push(Actor::Train(tid));
            } else if prune(&w_t) {
                self.discarded += w_t.amplitude.norm_sqr();
            } else {
                let id = self.trains.len();
                let (left, right) = match side {
                    // Content arrives from the left: the transmitted train
                    // grows on the right of the element.
                    Side::Left => (Boundary::attached(t_open, e),
                                   Boundary::ray(t_open, x_open, t_open, vg)),
                    Side::Right => (Boundary::ray(t_open, x_open, t_open, vg),
                                    Boundary::attached(t_open, e)),
                };
                let mut provenance = self.trains[m].provenance.clone();
                provenance.push(self.events.len() + 1);
                self.trains.push(Train {
                    id,
                    wave: w_t,
                    role: TrainRole::Transmitted,
                    depth: depth + 1,
                    born: t_open,
                    died: None,
                    left,
                    right,
                    provenance,
                    group_speed: vg,
                    phase_speed: vp,
                });
                transmitted_train = Some(id);
                transmit_products.push(Actor::Train(id));
            }
        }

        // The incident consumption edge rides the element while the episode
        // is open.
        match side {
            Side::Left => self.ensure_attached_right(m, t_open, e),
            Side::Right => self.ensure_attached_left(m, t_open, e),
        }

        let r_eid = self.push_event(
            t_open,
            x_open,
            reflect_kind,
            Some(Actor::Train(m)),
            reflect_products,
            products.reflected.amplitude.norm(),
        )?;
        let t_eid = self.push_event(
            t_open,
            x_open,
            transmit_kind,
            Some(Actor::Train(m)),
            transmit_products,
            products.transmitted.amplitude.norm(),
        )?;

        self.episodes.push(Episode {
            id: ep_id,
            incident: m,
            element: e,
            t_open,
            t_close: None,
            regime,
            v_eff: v,
            side,
            optics,
            reflected: reflected_train,
            transmitted: transmitted_train,
            strips,
            open_events: vec![r_eid, t_eid],
        });
        self.open.insert((e, m), ep_id);
        Ok(())
    }

    fn ensure_attached_left(&mut self, id: TrainId, t: f64, e: usize) {
        if self.trains[id].left.attached_element(t) != Some(e) {
            self.trains[id].left.push(BoundaryPiece::Attached { from_t: t, element: e });
        }
    }

    fn ensure_attached_right(&mut self, id: TrainId, t: f64, e: usize) {
        if self.trains[id].right.attached_element(t) != Some(e) {
            self.trains[id].right.push(BoundaryPiece::Attached { from_t: t, element: e });
        }
    }

    /// Close an episode at time `t`, detaching every edge that was riding
    /// the element.  `exhausted` marks the incident train as fully consumed.
    fn close_episode(&mut self, ep_id: EpisodeId, t: f64, exhausted: bool) {
        let (element, incident, side, reflected, transmitted) = {
            let ep = &self.episodes[ep_id];
            (ep.element, ep.incident, ep.side, ep.reflected, ep.transmitted)
        };
        let x_e = self.sc.elements[element].trajectory.position(t);
        self.episodes[ep_id].t_close = Some(t);
        for strip in &mut self.episodes[ep_id].strips {
            strip.t_end = t;
            strip.x_end = x_e;
        }
        let detach = |tr: &mut Train, left_edge: bool| {
            let speed = tr.group_speed;
            let b = if left_edge { &mut tr.left } else { &mut tr.right };
            if b.attached_element(t) == Some(element) {
                b.push(BoundaryPiece::Ray { from_t: t, x0: x_e, t0: t, speed });
            }
        };
        if let Some(rid) = reflected {
            // The reflected train sits on the incident side; its near edge
            // faces the element.
            detach(&mut self.trains[rid], side == Side::Right);
        }
        if let Some(tid) = transmitted {
            detach(&mut self.trains[tid], side == Side::Left);
        }
        // Incident consumption edge.
        detach(&mut self.trains[incident], side == Side::Right);
        if exhausted {
            self.trains[incident].died = Some(t);
        }
        self.open.remove(&(element, incident));
    }

    fn push_event(
        &mut self,
        time: f64,
        position: f64,
        kind: EventKind,
        incident: Option<Actor>,
        products: Vec<Actor>,
        amplitude_abs: f64,
    ) -> Result<EventId> {
        let id = self.events.len();
        if id >= self.sc.run.max_events {
            return Err(Error::EventExplosion {
                depth: self.trains.iter().map(|t| t.depth).max().unwrap_or(0),
                events: id,
            });
        }
        self.events.push(Event { id, time, position, kind, incident, products, amplitude_abs });
        Ok(id)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenarios::{build_excursion_scenario, build_shutter_scenario};
    use crate::wavemodel::WaveFamily;

    fn spot(trains: &[Train], role: TrainRole) -> Vec<&Train> {
        trains.iter().filter(|t| t.role == role).collect()
    }

    #[test]
    fn static_splitter_produces_one_pair() {
        let mut sc = build_excursion_scenario(WaveFamily::Schrodinger);
        // Freeze the element at its initial position for the whole run.
        sc.elements[0].trajectory = crate::trajectory::Trajectory::at_rest(30.0);
        let r = run_pass1(&sc).unwrap();
        assert_eq!(r.trains[0].role, TrainRole::Source);
        let refl = spot(&r.trains, TrainRole::Reflected);
        let trans = spot(&r.trains, TrainRole::Transmitted);
        assert_eq!(refl.len(), 1);
        assert_eq!(trans.len(), 1);
        // Opens when the leading edge reaches x = 30: t = 30 / 0.2 = 150.
        assert_eq!(r.episodes.len(), 1);
        assert!((r.episodes[0].t_open - 150.0).abs() < 1e-9);
        assert_eq!(r.episodes[0].regime, Regime::HeadOn);
        assert!(r.episodes[0].t_close == Some(520.0));
        // Reflected wave: k flips sign, constant phase picks up 2 k x_e.
        let w = refl[0].wave;
        assert!((w.wavevector + 0.2).abs() < 1e-12);
        assert!((w.phase0 - 12.0).abs() < 1e-9);
        // Transmitted wave continues bitwise.
        let s = r.trains[0].wave;
        let t = trans[0].wave;
        assert_eq!(t.wavevector.to_bits(), s.wavevector.to_bits());
        assert_eq!(t.omega.to_bits(), s.omega.to_bits());
        assert_eq!(t.phase0.to_bits(), s.phase0.to_bits());
        // Exactly one reflect/transmit pair, no overtakes.
        assert_eq!(r.overtake_events(), 0);
        assert_eq!(r.events.len(), 2);
    }

    #[test]
    fn excursion_opens_sweep_episode_when_element_catches_reflection() {
        let sc = build_excursion_scenario(WaveFamily::Schrodinger);
        let r = run_pass1(&sc).unwrap();
        // The first reflected train detaches when the element starts moving.
        let r1 = &r.trains[1];
        assert_eq!(r1.role, TrainRole::Reflected);
        assert!((r1.born - 150.0).abs() < 1e-9);
        assert!((r1.wave.wavevector + 0.2).abs() < 1e-12);
        // Some episode consumes that train in the overtake regime, opening
        // near (x, t) = (29.984, 246.08) where the accelerating element
        // catches the detached edge.
        let sweep: Vec<_> = r
            .episodes
            .iter()
            .filter(|ep| ep.incident == r1.id && ep.regime == Regime::Overtake)
            .collect();
        assert!(!sweep.is_empty(), "element must catch the detached reflection");
        let first = sweep.iter().map(|ep| ep.t_open).fold(f64::INFINITY, f64::min);
        assert!((first - 246.08).abs() < 1e-6, "sweep opens at t = {first}");
        assert!(r.overtake_events() > 0);
        // The fast re-reflected waves from the cruise exist: k = -2.2 from
        // the source, k = -1.8 from the caught reflection.
        let has_k = |k: f64| {
            r.trains
                .iter()
                .any(|t| (t.wave.wavevector - k).abs() < 1e-9 && t.role == TrainRole::Reflected)
        };
        assert!(has_k(-2.2), "source reflection off the cruising element");
        assert!(has_k(-1.8), "re-reflection of the caught train");
    }

    #[test]
    fn excursion_final_pair_carries_displacement_phase() {
        let sc = build_excursion_scenario(WaveFamily::Schrodinger);
        let r = run_pass1(&sc).unwrap();
        // After the element comes to rest at x = 6, the source reflection
        // restarts there: phase0 = 2 k x = 2.4.
        let r5 = r
            .trains
            .iter()
            .filter(|t| {
                t.role == TrainRole::Reflected
                    && (t.wave.wavevector + 0.2).abs() < 1e-12
                    && t.born >= 270.0
            })
            .min_by(|a, b| a.born.partial_cmp(&b.born).unwrap())
            .expect("reflection off the resettled element");
        assert!((r5.wave.phase0 - 2.4).abs() < 1e-9);
        // The left-behind transmitted copy of the first reflection keeps
        // phase0 = 12 through two transmissions (amplitude r t^2).
        let t6 = r
            .trains
            .iter()
            .filter(|t| {
                t.role == TrainRole::Transmitted
                    && (t.wave.wavevector + 0.2).abs() < 1e-12
                    && (t.wave.phase0 - 12.0).abs() < 1e-9
                    && t.depth == 3
            })
            .max_by(|a, b| a.born.partial_cmp(&b.born).unwrap())
            .expect("twice-transmitted first reflection");
        let rt2 = std::f64::consts::FRAC_1_SQRT_2 * 0.5;
        assert!((t6.wave.amplitude.norm() - rt2).abs() < 1e-12);
        assert!((t6.born - 270.16).abs() < 1e-6);
        // Same omega bit-for-bit: a stationary pair.
        assert_eq!(t6.wave.omega.to_bits(), r5.wave.omega.to_bits());
        let dphi = t6.wave.phase0 - r5.wave.phase0;
        assert!((dphi - 9.6).abs() < 1e-9, "displacement phase, got {dphi}");
    }

    #[test]
    fn klein_gordon_excursion_has_no_overtake_events_and_no_left_behind_train() {
        let sc = build_excursion_scenario(WaveFamily::KleinGordon);
        let r = run_pass1(&sc).unwrap();
        assert_eq!(r.overtake_events(), 0);
        // The catch-up interaction happens, but as crest transit: strips,
        // no coherent product trains.
        let transit: Vec<_> =
            r.episodes.iter().filter(|ep| ep.regime == Regime::CrestTransit).collect();
        assert!(!transit.is_empty(), "the sweep must be crest transit");
        assert!(transit.iter().all(|ep| ep.reflected.is_none() && ep.transmitted.is_none()));
        assert!(transit.iter().all(|ep| !ep.strips.is_empty()));
    }

    #[test]
    fn em_excursion_stays_head_on() {
        let sc = build_excursion_scenario(WaveFamily::EmVacuum);
        let r = run_pass1(&sc).unwrap();
        assert_eq!(r.overtake_events(), 0);
        assert!(r.episodes.iter().all(|ep| ep.regime == Regime::HeadOn));
    }

    #[test]
    fn shutter_split_leaves_remnant_and_admits_tau() {
        let tau = 25.0;
        let sc = build_shutter_scenario(WaveFamily::Schrodinger, tau, 0.25);
        let r = run_pass1(&sc).unwrap();
        // Gate A activates inside the source support: a remnant must exist,
        // starting when gate A closes at t = 60 + tau = 85.
        let rems = spot(&r.trains, TrainRole::Remnant);
        assert_eq!(rems.len(), 1);
        let p = rems[0];
        assert!((p.born - 85.0).abs() < 1e-9);
        // The remnant spans tau / group-speed worth of content.
        let (le, re) = p.support(100.0, &sc);
        assert!((re - le - 0.2 * tau).abs() < 1e-9);
        // Shutter events logged: two per gate.
        assert_eq!(r.count_events(EventKind::ShutterOpen), 2);
        assert_eq!(r.count_events(EventKind::ShutterActivate), 2);
    }
}
