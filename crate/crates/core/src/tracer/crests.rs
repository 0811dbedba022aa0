//! Pass 2: trace individual phase maxima through the finished train
//! diagram.
//!
//! A crest is the worldline of one constant-phase point.  It is seeded on
//! the source lattice, travels at the phase speed of the wave it rides,
//! and is re-aimed whenever it leaves its train through an edge that is
//! riding an element with an open episode: the crest terminates there and
//! child crests continue into the episode's product trains, with the total
//! phase carried across the event (plus the interface phase on the
//! reflected branch).
//!
//! A crest that leaves its train through a free boundary — or that was
//! left standing behind an element outrunning it — becomes an *orphan*: a
//! phase line with no wave content under it.  Orphans fly straight and
//! interact with nothing; they can still be seen crossing the detector.

use crate::error::{Error, Result};
use crate::scenarios::Scenario;
use crate::trajectory::CrestLine;

use super::types::{
    Actor, Boundary, BoundaryPiece, Crest, CrestFate, CrestId, Episode, Event, EventId,
    EventKind, Regime, SimulationResult, Train,
};

pub(super) fn run_pass2(sc: &Scenario, result: &mut SimulationResult) -> Result<()> {
    let mut tracer = CrestTracer {
        sc,
        trains: &result.trains,
        episodes: &result.episodes,
        events: &mut result.events,
        crests: Vec::new(),
        t_grace: 1e-9 * (1.0 + sc.run.t_max.abs()),
    };
    tracer.seed_and_trace()?;
    result.crests = std::mem::take(&mut tracer.crests);
    Ok(())
}

/// What ends a tracing step.
#[derive(Debug, Clone, Copy)]
enum Stop {
    /// Crossed a support boundary (left edge if `left` is true).
    Edge { t: f64, left: bool },
    Detector { t: f64 },
    Domain { t: f64 },
    RunOut,
}

struct CrestTracer<'a> {
    sc: &'a Scenario,
    trains: &'a [Train],
    episodes: &'a [Episode],
    events: &'a mut Vec<Event>,
    crests: Vec<Crest>,
    t_grace: f64,
}

impl<'a> CrestTracer<'a> {
    fn seed_and_trace(&mut self) -> Result<()> {
        let mut stack: Vec<CrestId> = Vec::new();
        for (t_b, x_b, phase) in self.source_seeds() {
            let id = self.new_crest(Some(0), self.trains[0].wave, phase, (t_b, x_b), None);
            stack.push(id);
            while let Some(id) = stack.pop() {
                self.trace(id, &mut stack)?;
            }
        }
        Ok(())
    }

    /// Birth points of the source crests: the departure lattice at the
    /// source while it is on, plus births on the leading edge when the
    /// envelope outruns the phase fronts (each crest emerges from the front
    /// and falls back through the packet), plus births on the trailing edge
    /// when the phase fronts outrun the envelope.
    fn source_seeds(&self) -> Vec<(f64, f64, f64)> {
        let s = &self.sc.source;
        let w = &self.trains[0].wave;
        let u = self.trains[0].phase_speed;
        let vg = self.trains[0].group_speed;
        let t_max = self.sc.run.t_max;
        let in_domain = |x: f64| (self.sc.run.x_min..=self.sc.run.x_max).contains(&x);
        let mut seeds = Vec::new();
        let mut j = 0.0;
        loop {
            let t_dep = s.t_on + j * s.crest_spacing;
            if t_dep > s.t_off.min(t_max) {
                break;
            }
            seeds.push((t_dep, s.position, w.phase_at(s.position, t_dep)));
            j += 1.0;
        }
        if vg.abs() > u.abs() {
            let mut j = 1.0;
            loop {
                let t_dep = s.t_on - j * s.crest_spacing;
                let t_b = (vg * s.t_on - u * t_dep) / (vg - u);
                let x_b = s.position + vg * (t_b - s.t_on);
                if t_b > t_max || t_b < s.t_on || !in_domain(x_b) {
                    break;
                }
                seeds.push((t_b, x_b, w.phase_at(s.position, t_dep)));
                j += 1.0;
            }
        }
        if u.abs() > vg.abs() && s.t_off < t_max {
            let first = ((s.t_off - s.t_on) / s.crest_spacing).floor() + 1.0;
            let mut j = first;
            loop {
                let t_dep = s.t_on + j * s.crest_spacing;
                let t_b = (u * t_dep - vg * s.t_off) / (u - vg);
                let x_b = s.position + vg * (t_b - s.t_off);
                if t_b > t_max || !in_domain(x_b) {
                    break;
                }
                seeds.push((t_b, x_b, w.phase_at(s.position, t_dep)));
                j += 1.0;
            }
        }
        seeds.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        seeds
    }

    fn new_crest(
        &mut self,
        train: Option<usize>,
        wave: crate::wavemodel::PlaneWave,
        phase: f64,
        birth: (f64, f64),
        orphaned_at: Option<f64>,
    ) -> CrestId {
        let id = self.crests.len();
        self.crests.push(Crest {
            id,
            train,
            wave,
            phase,
            vertices: vec![birth],
            orphaned_at,
            fate: CrestFate::RanOut,
        });
        id
    }

    /// Trace one crest to its end, pushing scattered children on `stack`.
    fn trace(&mut self, id: CrestId, stack: &mut Vec<CrestId>) -> Result<()> {
        let t_max = self.sc.run.t_max;
        let birth_t = self.crests[id].vertices[0].0;
        // A crest born at an element does not re-scatter there at birth.
        let birth_element = self.birth_element(id);
        loop {
            let crest = &self.crests[id];
            let &(t_c, x_c) = crest.vertices.last().unwrap();
            let u = crest.speed();
            let line = CrestLine { x_start: x_c, t_start: t_c, speed: u };
            let orphan = crest.orphaned_at.is_some() || crest.train.is_none();

            let mut stop = Stop::RunOut;
            let mut stop_t = t_max;
            let mut consider = |cand: Stop, t: f64| {
                if t < stop_t {
                    stop_t = t;
                    stop = cand;
                }
            };
            if !orphan {
                let m = &self.trains[crest.train.unwrap()];
                for (b, left) in [(&m.left, true), (&m.right, false)] {
                    if let Some(t) = self.boundary_line_crossing(b, &line, t_c, t_max) {
                        if self.exits_through(b, &line, t, left) {
                            consider(Stop::Edge { t, left }, t);
                        }
                    }
                }
            }
            if self.sc.detector.accept.accepts_wavevector(crest.wave.wavevector) {
                let dx = self.sc.detector.position - x_c;
                if dx == 0.0 || dx.signum() == u.signum() {
                    let t = t_c + dx / u;
                    if t >= t_c && t <= t_max {
                        consider(Stop::Detector { t }, t);
                    }
                }
            }
            {
                let target = if u > 0.0 { self.sc.run.x_max } else { self.sc.run.x_min };
                let t = t_c + (target - x_c) / u;
                if t >= t_c && t <= t_max {
                    consider(Stop::Domain { t }, t);
                }
            }

            match stop {
                Stop::RunOut => {
                    let x = line.position(t_max);
                    self.crests[id].vertices.push((t_max, x));
                    self.crests[id].fate = CrestFate::RanOut;
                    return Ok(());
                }
                Stop::Domain { t } => {
                    self.crests[id].vertices.push((t, line.position(t)));
                    self.crests[id].fate = CrestFate::LeftDomain;
                    return Ok(());
                }
                Stop::Detector { t } => {
                    let x = self.sc.detector.position;
                    let eid = self.push_event(
                        t,
                        x,
                        EventKind::DetectorArrival,
                        Some(Actor::Crest(id)),
                        Vec::new(),
                        self.crests[id].amp_abs(),
                    )?;
                    self.crests[id].vertices.push((t, x));
                    self.crests[id].fate = CrestFate::DetectorHit(eid);
                    return Ok(());
                }
                Stop::Edge { t, left } => {
                    let m_id = self.crests[id].train.unwrap();
                    let b = if left { &self.trains[m_id].left } else { &self.trains[m_id].right };
                    let elem = b.attached_element(t);
                    let episode = elem.and_then(|e| {
                        self.episodes
                            .iter()
                            .find(|ep| ep.element == e && ep.incident == m_id && ep.open_at(t))
                    });
                    let immune = elem.is_some()
                        && elem == birth_element
                        && t <= birth_t + self.t_grace;
                    match (episode, immune) {
                        (Some(ep), false) => {
                            let ep_id = ep.id;
                            return self.scatter(id, ep_id, t, line.position(t), stack);
                        }
                        _ => {
                            // Free boundary (or the birth edge): the crest
                            // keeps flying with no content under it.
                            if self.crests[id].orphaned_at.is_none() {
                                self.crests[id].orphaned_at = Some(t);
                            }
                        }
                    }
                }
            }
        }
    }

    /// Terminate crest `id` at the element of episode `ep_id` and spawn its
    /// children.
    fn scatter(
        &mut self,
        id: CrestId,
        ep_id: usize,
        t: f64,
        x: f64,
        stack: &mut Vec<CrestId>,
    ) -> Result<()> {
        let ep = &self.episodes[ep_id];
        let u = self.crests[id].speed();
        let caught = u != 0.0
            && ep.v_eff != 0.0
            && u.signum() == ep.v_eff.signum()
            && ep.v_eff.abs() > u.abs();
        let (reflect_kind, transmit_kind) = if caught {
            (EventKind::ReflectOvertake, EventKind::TransmitOvertake)
        } else {
            (EventKind::ReflectHeadOn, EventKind::TransmitHeadOn)
        };
        let phase = self.crests[id].phase;
        let chi = ep.optics.interface_phase;
        let amp_in = self.crests[id].amp_abs();

        // (wave, train, phase) for each child branch, if the branch exists.
        let mut reflected_child = None;
        let mut transmitted_child = None;
        match ep.regime {
            Regime::CrestTransit => {
                for strip in &ep.strips {
                    if strip.pass_through {
                        transmitted_child = Some((strip.wave, None, phase));
                    } else {
                        reflected_child = Some((strip.wave, None, phase + chi));
                    }
                }
            }
            _ => {
                if let Some(rid) = ep.reflected {
                    reflected_child = Some((self.trains[rid].wave, Some(rid), phase + chi));
                }
                if let Some(tid) = ep.transmitted {
                    transmitted_child = Some((self.trains[tid].wave, Some(tid), phase));
                }
            }
        }
        let (r_amp, t_amp) = (amp_in * ep.optics.reflection, amp_in * ep.optics.transmission);

        let mut r_products = Vec::new();
        if let Some((wave, train, ph)) = reflected_child {
            let orphan = train.is_none().then_some(t);
            let cid = self.new_crest(train, wave, ph, (t, x), orphan);
            r_products.push(Actor::Crest(cid));
            stack.push(cid);
        }
        let r_eid = self.push_event(
            t,
            x,
            reflect_kind,
            Some(Actor::Crest(id)),
            r_products,
            r_amp,
        )?;
        let mut t_products = Vec::new();
        if let Some((wave, train, ph)) = transmitted_child {
            let orphan = train.is_none().then_some(t);
            let cid = self.new_crest(train, wave, ph, (t, x), orphan);
            t_products.push(Actor::Crest(cid));
            stack.push(cid);
        }
        self.push_event(t, x, transmit_kind, Some(Actor::Crest(id)), t_products, t_amp)?;

        self.crests[id].vertices.push((t, x));
        self.crests[id].fate = CrestFate::Scattered(r_eid);
        Ok(())
    }

    /// Element at which the crest was born, if it was born on an attached
    /// edge (i.e. it is a scattering product).
    fn birth_element(&self, id: CrestId) -> Option<usize> {
        let m = self.crests[id].train?;
        let t_b = self.crests[id].vertices[0].0;
        let x_b = self.crests[id].vertices[0].1;
        for b in [&self.trains[m].left, &self.trains[m].right] {
            if let Some(e) = b.attached_element(t_b) {
                let x_e = self.sc.elements[e].trajectory.position(t_b);
                if (x_e - x_b).abs() <= 1e-6 * (1.0 + x_b.abs()) {
                    return Some(e);
                }
            }
        }
        None
    }

    /// Earliest crossing of the crest line with a piecewise boundary in
    /// `[t_from, t_to]`.
    fn boundary_line_crossing(
        &self,
        b: &Boundary,
        line: &CrestLine,
        t_from: f64,
        t_to: f64,
    ) -> Option<f64> {
        for (s, e, idx) in b.spans(t_from, t_to) {
            match b.pieces[idx] {
                BoundaryPiece::Ray { x0, t0, speed, .. } => {
                    let rel_v = line.speed - speed;
                    if rel_v == 0.0 {
                        continue; // parallel: never crosses (or rides along)
                    }
                    let gap = line.position(s) - (x0 + speed * (s - t0));
                    let t = s - gap / rel_v;
                    if t >= s - self.t_grace && t <= e {
                        return Some(t.max(s));
                    }
                }
                BoundaryPiece::Attached { element, .. } => {
                    let traj = &self.sc.elements[element].trajectory;
                    if let Some(t) = traj.first_crossing(line, s, e) {
                        return Some(t);
                    }
                }
            }
        }
        None
    }

    /// Whether crossing boundary `b` at time `t` takes the crest out of the
    /// support (rather than deeper in): compare the crest speed to the
    /// boundary speed on the exit side.
    fn exits_through(&self, b: &Boundary, line: &CrestLine, t: f64, left_edge: bool) -> bool {
        let edge_v = match *b.active_piece(t) {
            BoundaryPiece::Ray { speed, .. } => speed,
            BoundaryPiece::Attached { element, .. } => {
                self.sc.elements[element].trajectory.velocity(t)
            }
        };
        if left_edge {
            line.speed < edge_v
        } else {
            line.speed > edge_v
        }
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
    use super::super::run;
    use super::*;
    use crate::scenarios::build_excursion_scenario;
    use crate::wavemodel::WaveFamily;

    #[test]
    fn source_crests_scatter_at_the_static_splitter() {
        let mut sc = build_excursion_scenario(WaveFamily::Schrodinger);
        sc.elements[0].trajectory = crate::trajectory::Trajectory::at_rest(30.0);
        let r = run(&sc).unwrap();
        // Phase fronts at u = 0.1 from x = 0 reach x = 30 at t = 300 + the
        // departure time; departures up to t = 220 arrive within the run.
        let scattered: Vec<_> = r
            .crests
            .iter()
            .filter(|c| matches!(c.fate, CrestFate::Scattered(_)))
            .collect();
        assert!(!scattered.is_empty());
        for c in &scattered {
            let (t_end, x_end) = *c.vertices.last().unwrap();
            assert!((x_end - 30.0).abs() < 1e-6, "scatter at the element");
            assert!(t_end >= 150.0);
        }
        // Children exist and the reflected ones travel leftward.
        let leftward = r
            .crests
            .iter()
            .filter(|c| c.wave.wavevector < 0.0 && c.train.is_some())
            .count();
        assert!(leftward > 0);
    }

    #[test]
    fn crest_phase_is_conserved_across_transmission() {
        let mut sc = build_excursion_scenario(WaveFamily::Schrodinger);
        sc.elements[0].trajectory = crate::trajectory::Trajectory::at_rest(30.0);
        let r = run(&sc).unwrap();
        // Pick any scattered crest and check its children's labels.
        let parent = r
            .crests
            .iter()
            .find(|c| matches!(c.fate, CrestFate::Scattered(_)))
            .unwrap();
        let CrestFate::Scattered(eid) = parent.fate else { unreachable!() };
        let reflect_event = &r.events[eid];
        for prod in &reflect_event.products {
            let Actor::Crest(cid) = prod else { panic!("crest products expected") };
            // Balanced splitter has no interface phase: labels match.
            assert_eq!(r.crests[*cid].phase, parent.phase);
        }
    }

    #[test]
    fn fast_phase_crests_outrun_a_slow_envelope() {
        // Klein-Gordon: phase speed far above group speed, so crests must
        // exit through the leading edge and orphan.
        let sc = build_excursion_scenario(WaveFamily::KleinGordon);
        let r = run(&sc).unwrap();
        let orphans = r.crests.iter().filter(|c| c.orphaned_at.is_some()).count();
        assert!(orphans > 0, "fast crests must leave the envelope");
        // And no crest-level overtake events exist anywhere.
        assert_eq!(r.overtake_events(), 0);
    }
}
