//! Detector-side reduction: which waves cover the detector when, the
//! superposed complex trace, and the interference analysis.
//!
//! Every routed train contributes *segments*: maximal time intervals during
//! which its support covers the detector position.  Crest-transit strips
//! contribute segments too, delivered along their phase characteristics.
//! The segment list induces a partition of time into atomic windows with a
//! fixed participant set; the analysis then picks, by co-presence weight,
//! one equal-frequency pair (the stationary fringe) and one
//! distinct-frequency pair (the beat) and summarizes each on the union of
//! windows where both members are present.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::scenarios::Scenario;
use crate::tracer::{EpisodeId, EventId, SimulationResult, TrainId};
use crate::trajectory::Trajectory;
use crate::wavemodel::PlaneWave;

/// Who produced a detector segment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum OwnerId {
    Train(TrainId),
    /// `(episode, strip index)` of a crest-transit product.
    Strip(EpisodeId, usize),
}

impl OwnerId {
    /// Stable short id used in CSV output: `T3` or `S5.1`.
    pub fn tag(&self) -> String {
        match *self {
            OwnerId::Train(id) => format!("T{id}"),
            OwnerId::Strip(ep, idx) => format!("S{ep}.{idx}"),
        }
    }
}

/// One interval during which one wave covers the detector.
#[derive(Debug, Clone)]
pub struct DetectorSegment {
    pub id: usize,
    pub owner: OwnerId,
    pub wave: PlaneWave,
    pub t_in: f64,
    pub t_out: f64,
    /// Scattering events along the owner's ancestry.
    pub provenance: Vec<EventId>,
}

/// Complex field sampled at the detector.
#[derive(Debug, Clone)]
pub struct DetectorTrace {
    pub position: f64,
    pub times: Vec<f64>,
    pub field: Vec<Complex64>,
}

impl DetectorTrace {
    pub fn intensity(&self) -> Vec<f64> {
        self.field.iter().map(|f| f.norm_sqr()).collect()
    }
}

/// One atomic window of the coverage partition.
#[derive(Debug, Clone)]
pub struct WindowRow {
    pub t_start: f64,
    pub t_end: f64,
    pub owners: Vec<OwnerId>,
    /// `(I_max - I_min) / (I_max + I_min)` of the full superposed
    /// intensity sampled inside the window.
    pub visibility: f64,
    pub mean_intensity: f64,
}

/// A selected pair of waves and the maximal co-presence window used to
/// summarize it.
#[derive(Debug, Clone)]
pub struct PairSummary {
    pub stronger: OwnerId,
    pub weaker: OwnerId,
    pub window: (f64, f64),
    /// Two-wave fringe contrast `2|a||b| / (|a|^2 + |b|^2)`: the swing the
    /// pair produces as its relative phase varies.  For a beat pair this
    /// equals the time-domain contrast over a full beat period; for an
    /// equal-frequency pair it is the contrast seen when a path length in
    /// the arrangement is scanned.
    pub visibility: f64,
}

/// Beat between two co-present waves of different frequency.
#[derive(Debug, Clone)]
pub struct BeatSummary {
    pub pair: PairSummary,
    /// |omega_1 - omega_2| of the pair.
    pub seed_frequency: f64,
    /// Frequency minimizing the least-squares residual of a constant plus
    /// one harmonic, scanned around the seed.
    pub fitted_frequency: f64,
    /// Set when the window is shorter than one beat period.
    pub low_confidence: bool,
}

/// Stationary fringe between two co-present waves of equal frequency.
#[derive(Debug, Clone)]
pub struct StationarySummary {
    pub pair: PairSummary,
    /// Phase of the weaker wave minus the phase of the stronger one at the
    /// detector, mid-window, reduced to `[0, 2 pi)`.
    pub phase_diff: f64,
}

/// Everything the analysis step reports.
#[derive(Debug, Clone)]
pub struct InterferenceReport {
    pub windows: Vec<WindowRow>,
    pub beat: Option<BeatSummary>,
    pub stationary: Option<StationarySummary>,
}

impl InterferenceReport {
    /// Visibility of the stationary fringe; zero when no equal-frequency
    /// pair is ever co-present.
    pub fn stationary_visibility(&self) -> f64 {
        self.stationary.as_ref().map_or(0.0, |s| s.pair.visibility)
    }

    pub fn stationary_phase_diff(&self) -> Option<f64> {
        self.stationary.as_ref().map(|s| s.phase_diff)
    }

    pub fn beat_frequency(&self) -> Option<f64> {
        self.beat.as_ref().map(|b| b.fitted_frequency)
    }
}

/// Build the routed coverage segments for a finished run.
pub fn detector_segments(sc: &Scenario, result: &SimulationResult) -> Vec<DetectorSegment> {
    let x_d = sc.detector.position;
    let t_max = sc.run.t_max;
    let mut out = Vec::new();
    for tr in &result.trains {
        if !sc.detector.accept.accepts_wavevector(tr.wave.wavevector) {
            continue;
        }
        for (t_in, t_out) in train_cover_intervals(sc, tr, x_d, t_max) {
            out.push(DetectorSegment {
                id: 0,
                owner: OwnerId::Train(tr.id),
                wave: tr.wave,
                t_in,
                t_out,
                provenance: tr.provenance.clone(),
            });
        }
    }
    for ep in &result.episodes {
        for (idx, strip) in ep.strips.iter().enumerate() {
            if !sc.detector.accept.accepts_wavevector(strip.wave.wavevector) {
                continue;
            }
            let u = strip.wave.omega / strip.wave.wavevector;
            if let Some((a, b)) = strip_window(
                (strip.t_start, strip.x_start),
                (strip.t_end, strip.x_end),
                x_d,
                u,
                t_max,
            ) {
                out.push(DetectorSegment {
                    id: 0,
                    owner: OwnerId::Strip(ep.id, idx),
                    wave: strip.wave,
                    t_in: a,
                    t_out: b,
                    provenance: ep.open_events.clone(),
                });
            }
        }
    }
    out.sort_by(|a, b| {
        a.t_in
            .partial_cmp(&b.t_in)
            .unwrap()
            .then(a.owner.cmp(&b.owner))
    });
    for (i, seg) in out.iter_mut().enumerate() {
        seg.id = i;
    }
    out
}

/// Maximal intervals in `[born, death]` during which the train's support
/// contains `x_d`, with endpoints solved exactly from boundary crossings.
fn train_cover_intervals(
    sc: &Scenario,
    tr: &crate::tracer::Train,
    x_d: f64,
    t_max: f64,
) -> Vec<(f64, f64)> {
    let t_lo = tr.born.max(0.0);
    let t_hi = tr.died.unwrap_or(t_max).min(t_max);
    if !(t_hi > t_lo) {
        return Vec::new();
    }
    let mut bps = vec![t_lo, t_hi];
    for b in [&tr.left, &tr.right] {
        for (s, e, idx) in b.spans(t_lo, t_hi) {
            bps.push(s);
            bps.push(e);
            match b.pieces[idx] {
                crate::tracer::BoundaryPiece::Ray { x0, t0, speed, .. } => {
                    if speed != 0.0 {
                        let t = t0 + (x_d - x0) / speed;
                        if t >= s && t <= e {
                            bps.push(t);
                        }
                    }
                }
                crate::tracer::BoundaryPiece::Attached { element, .. } => {
                    let traj = &sc.elements[element].trajectory;
                    bps.extend(traj.crossings_of_level(x_d, s, e));
                }
            }
        }
    }
    bps.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let tol = 1e-12 * t_max.max(1.0);
    bps.dedup_by(|b, a| (*b - *a).abs() <= tol);
    let mut intervals: Vec<(f64, f64)> = Vec::new();
    for w in bps.windows(2) {
        let (a, b) = (w[0], w[1]);
        if !(b > a) {
            continue;
        }
        let mid = 0.5 * (a + b);
        let (le, re) = tr.support(mid, sc);
        if le <= x_d && x_d <= re {
            match intervals.last_mut() {
                Some(last) if (last.1 - a).abs() <= tol => last.1 = b,
                _ => intervals.push((a, b)),
            }
        }
    }
    intervals
}

/// Arrival window at the detector of a strip fed along the element path
/// from `(t_start, x_start)` to `(t_end, x_end)`, travelling at the signed
/// phase speed `u`.
fn strip_window(
    start: (f64, f64),
    end: (f64, f64),
    x_d: f64,
    u: f64,
    t_max: f64,
) -> Option<(f64, f64)> {
    let (t0, x0) = start;
    let (t1, x1) = end;
    if !(t1 > t0) || u == 0.0 {
        return None;
    }
    // Feed point and travel time are linear in tau; keep the part of the
    // feed with non-negative travel toward the detector.
    let x_at = |tau: f64| x0 + (tau - t0) * (x1 - x0) / (t1 - t0);
    let travel = |tau: f64| (x_d - x_at(tau)) / u;
    let (mut a, mut b) = (t0, t1);
    let (ta, tb) = (travel(a), travel(b));
    if ta < 0.0 && tb < 0.0 {
        return None;
    }
    if ta < 0.0 || tb < 0.0 {
        // One endpoint faces away: cut the feed where the element crossed
        // the detector level.
        let cut = a + (b - a) * ta / (ta - tb);
        if ta < 0.0 {
            a = cut;
        } else {
            b = cut;
        }
    }
    let (mut w0, mut w1) = (a + travel(a), b + travel(b));
    if w0 > w1 {
        std::mem::swap(&mut w0, &mut w1);
    }
    let (w0, w1) = (w0.max(0.0), w1.min(t_max));
    (w1 > w0).then_some((w0, w1))
}

/// Superpose all segments into a sampled complex trace over `[0, t_max]`.
///
/// The sampling rate is, in order of preference: the `rate` argument, the
/// scenario's `sample_rate`, or 64 samples per shortest wave period present.
pub fn superpose(sc: &Scenario, segments: &[DetectorSegment], rate: Option<f64>) -> DetectorTrace {
    let t_max = sc.run.t_max;
    let rate = rate.or(sc.run.sample_rate).unwrap_or_else(|| {
        let max_omega = segments
            .iter()
            .map(|s| s.wave.omega.abs())
            .fold(0.0f64, f64::max);
        (64.0 * max_omega / std::f64::consts::TAU).max(1.0)
    });
    let n = ((t_max * rate).ceil() as usize).max(1) + 1;
    let dt = t_max / (n - 1) as f64;
    let x_d = sc.detector.position;
    let mut times = Vec::with_capacity(n);
    let mut field = Vec::with_capacity(n);
    for i in 0..n {
        let t = i as f64 * dt;
        let mut psi = Complex64::new(0.0, 0.0);
        for seg in segments {
            if t >= seg.t_in && t <= seg.t_out {
                psi += seg.wave.field_at(x_d, t);
            }
        }
        times.push(t);
        field.push(psi);
    }
    DetectorTrace { position: x_d, times, field }
}

/// Sort key making the owner choice deterministic.
fn owner_key(o: OwnerId) -> (u8, usize, usize) {
    match o {
        OwnerId::Train(id) => (0, id, 0),
        OwnerId::Strip(ep, idx) => (1, ep, idx),
    }
}

/// Analyze a segment list: atomic windows, then the stationary and beat
/// pair summaries.
pub fn analyze(sc: &Scenario, segments: &[DetectorSegment]) -> InterferenceReport {
    let t_max = sc.run.t_max;
    let x_d = sc.detector.position;
    let tol = 1e-12 * t_max.max(1.0);

    // Atomic partition from all segment endpoints.
    let mut cuts: Vec<f64> = segments
        .iter()
        .flat_map(|s| [s.t_in, s.t_out])
        .filter(|t| (0.0..=t_max).contains(t))
        .collect();
    cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    cuts.dedup_by(|b, a| (*b - *a).abs() <= tol);

    let mut windows: Vec<WindowRow> = Vec::new();
    for w in cuts.windows(2) {
        let (a, b) = (w[0], w[1]);
        if !(b > a) {
            continue;
        }
        let mid = 0.5 * (a + b);
        let mut owners: Vec<OwnerId> = segments
            .iter()
            .filter(|s| s.t_in <= mid && mid <= s.t_out)
            .map(|s| s.owner)
            .collect();
        owners.sort_by_key(|&o| owner_key(o));
        owners.dedup();
        if owners.is_empty() {
            continue;
        }
        let covering: Vec<&DetectorSegment> = segments
            .iter()
            .filter(|s| s.t_in <= mid && mid <= s.t_out)
            .collect();
        let mut i_min = f64::INFINITY;
        let mut i_max = 0.0f64;
        let mut i_sum = 0.0;
        const N: usize = 96;
        for i in 0..N {
            let t = a + (i as f64 + 0.5) * (b - a) / N as f64;
            let psi: Complex64 = covering.iter().map(|s| s.wave.field_at(x_d, t)).sum();
            let inten = psi.norm_sqr();
            i_min = i_min.min(inten);
            i_max = i_max.max(inten);
            i_sum += inten;
        }
        let visibility = if i_max + i_min > 0.0 {
            (i_max - i_min) / (i_max + i_min)
        } else {
            0.0
        };
        windows.push(WindowRow {
            t_start: a,
            t_end: b,
            owners,
            visibility,
            mean_intensity: i_sum / N as f64,
        });
    }

    // Wave per owner (all segments of one owner share it bitwise).
    let wave_of = |o: OwnerId| -> PlaneWave {
        segments.iter().find(|s| s.owner == o).unwrap().wave
    };

    // Co-presence weight per owner pair.
    let mut weights: std::collections::BTreeMap<(OwnerId, OwnerId), f64> =
        std::collections::BTreeMap::new();
    for w in &windows {
        let dur = w.t_end - w.t_start;
        for i in 0..w.owners.len() {
            for j in (i + 1)..w.owners.len() {
                let (a, b) = (w.owners[i], w.owners[j]);
                let amp = wave_of(a).amplitude.norm() * wave_of(b).amplitude.norm();
                *weights.entry((a, b)).or_insert(0.0) += amp * dur;
            }
        }
    }

    let omega_scale = segments
        .iter()
        .map(|s| s.wave.omega.abs())
        .fold(1.0f64, f64::max);
    let omega_tol = 1e-9 * omega_scale;
    let pick = |want_equal: bool| -> Option<(OwnerId, OwnerId)> {
        weights
            .iter()
            .filter(|((a, b), wgt)| {
                let d = (wave_of(*a).omega - wave_of(*b).omega).abs();
                **wgt > 0.0 && (d <= omega_tol) == want_equal
            })
            .max_by(|(ka, wa), (kb, wb)| {
                wa.partial_cmp(wb)
                    .unwrap()
                    .then_with(|| kb.cmp(ka)) // on ties prefer the smaller key
            })
            .map(|(k, _)| *k)
    };

    let summarize = |pair: (OwnerId, OwnerId)| -> Option<PairSummary> {
        // Maximal union of consecutive atomic windows containing both.
        let mut best: Option<(f64, f64, f64)> = None; // (weight, start, end)
        let mut cur: Option<(f64, f64, f64)> = None;
        for w in &windows {
            let has = w.owners.contains(&pair.0) && w.owners.contains(&pair.1);
            if has {
                let wgt = (w.t_end - w.t_start)
                    * wave_of(pair.0).amplitude.norm()
                    * wave_of(pair.1).amplitude.norm();
                cur = match cur {
                    Some((g, s, e)) if (w.t_start - e).abs() <= tol => Some((g + wgt, s, w.t_end)),
                    _ => {
                        if let Some(c) = cur.take() {
                            if best.as_ref().map_or(true, |b| c.0 > b.0) {
                                best = Some(c);
                            }
                        }
                        Some((wgt, w.t_start, w.t_end))
                    }
                };
            } else if let Some(c) = cur.take() {
                if best.as_ref().map_or(true, |b| c.0 > b.0) {
                    best = Some(c);
                }
            }
        }
        if let Some(c) = cur.take() {
            if best.as_ref().map_or(true, |b| c.0 > b.0) {
                best = Some(c);
            }
        }
        let (_, start, end) = best?;
        let (wa, wb) = (wave_of(pair.0), wave_of(pair.1));
        let (stronger, weaker) = if wb.amplitude.norm() > wa.amplitude.norm() {
            (pair.1, pair.0)
        } else {
            (pair.0, pair.1)
        };
        let (na, nb) = (wa.amplitude.norm(), wb.amplitude.norm());
        let visibility = if na * na + nb * nb > 0.0 {
            2.0 * na * nb / (na * na + nb * nb)
        } else {
            0.0
        };
        Some(PairSummary { stronger, weaker, window: (start, end), visibility })
    };

    let stationary = pick(true).and_then(summarize).map(|pair| {
        let (ws, ww) = (wave_of(pair.stronger), wave_of(pair.weaker));
        let t_mid = 0.5 * (pair.window.0 + pair.window.1);
        let diff = ww.phase_at(x_d, t_mid) - ws.phase_at(x_d, t_mid);
        StationarySummary {
            pair,
            phase_diff: diff.rem_euclid(std::f64::consts::TAU),
        }
    });

    let beat = pick(false).and_then(summarize).map(|pair| {
        let (ws, ww) = (wave_of(pair.stronger), wave_of(pair.weaker));
        let seed = (ws.omega - ww.omega).abs();
        let (start, end) = pair.window;
        let n = 512usize;
        let ts: Vec<f64> = (0..n)
            .map(|i| start + (i as f64 + 0.5) * (end - start) / n as f64)
            .collect();
        let intensity: Vec<f64> = ts
            .iter()
            .map(|&t| (ws.field_at(x_d, t) + ww.field_at(x_d, t)).norm_sqr())
            .collect();
        let fitted = fit_beat_frequency(&ts, &intensity, seed);
        let low_confidence = (end - start) < std::f64::consts::TAU / seed;
        BeatSummary { pair, seed_frequency: seed, fitted_frequency: fitted, low_confidence }
    });

    InterferenceReport { windows, beat, stationary }
}

/// Least-squares residual of `c0 + c1 cos(w t) + c2 sin(w t)` against the
/// samples.
fn harmonic_residual(ts: &[f64], ys: &[f64], w: f64) -> f64 {
    // Normal equations for the 3-parameter linear model.
    let mut a = [[0.0f64; 3]; 3];
    let mut b = [0.0f64; 3];
    for (&t, &y) in ts.iter().zip(ys) {
        let basis = [1.0, (w * t).cos(), (w * t).sin()];
        for i in 0..3 {
            for j in 0..3 {
                a[i][j] += basis[i] * basis[j];
            }
            b[i] += basis[i] * y;
        }
    }
    // Gaussian elimination with partial pivoting.
    let mut m = a;
    let mut rhs = b;
    for col in 0..3 {
        let piv = (col..3)
            .max_by(|&i, &j| m[i][col].abs().partial_cmp(&m[j][col].abs()).unwrap())
            .unwrap();
        m.swap(col, piv);
        rhs.swap(col, piv);
        if m[col][col].abs() < 1e-300 {
            return f64::INFINITY;
        }
        for row in (col + 1)..3 {
            let f = m[row][col] / m[col][col];
            for k in col..3 {
                m[row][k] -= f * m[col][k];
            }
            rhs[row] -= f * rhs[col];
        }
    }
    let mut c = [0.0f64; 3];
    for i in (0..3).rev() {
        let mut v = rhs[i];
        for k in (i + 1)..3 {
            v -= m[i][k] * c[k];
        }
        c[i] = v / m[i][i];
    }
    ts.iter()
        .zip(ys)
        .map(|(&t, &y)| {
            let f = c[0] + c[1] * (w * t).cos() + c[2] * (w * t).sin();
            (y - f) * (y - f)
        })
        .sum()
}

/// Golden-section refinement of the harmonic fit around the seed frequency.
fn fit_beat_frequency(ts: &[f64], ys: &[f64], seed: f64) -> f64 {
    let (mut lo, mut hi) = (0.8 * seed, 1.2 * seed);
    let phi = 0.5 * (3.0 - 5.0f64.sqrt());
    let mut x1 = lo + phi * (hi - lo);
    let mut x2 = hi - phi * (hi - lo);
    let mut f1 = harmonic_residual(ts, ys, x1);
    let mut f2 = harmonic_residual(ts, ys, x2);
    for _ in 0..120 {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = lo + phi * (hi - lo);
            f1 = harmonic_residual(ts, ys, x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = hi - phi * (hi - lo);
            f2 = harmonic_residual(ts, ys, x2);
        }
    }
    0.5 * (lo + hi)
}

/// Where one leg of a signal path ends.
#[derive(Debug, Clone, Copy)]
pub enum Terminus<'a> {
    Fixed(f64),
    Moving(&'a Trajectory),
}

/// One leg of a signal path: propagation at speed `speed > 0` to the
/// terminus (evaluated at the moment of arrival for moving termini).
#[derive(Debug, Clone, Copy)]
pub struct PathLeg<'a> {
    pub speed: f64,
    pub terminus: Terminus<'a>,
}

/// Departure time of a signal that leaves `start_x`, follows `legs` in
/// order (bouncing instantaneously at each terminus), and arrives at the
/// final terminus at `t_arrival`.
pub fn retarded_time(start_x: f64, legs: &[PathLeg], t_arrival: f64) -> Result<f64> {
    if legs.is_empty() {
        return Err(Error::invalid("a signal path needs at least one leg"));
    }
    if legs.iter().any(|l| !(l.speed > 0.0)) {
        return Err(Error::invalid("signal path legs need positive speeds"));
    }
    if legs.iter().all(|l| matches!(l.terminus, Terminus::Fixed(_))) {
        // Closed form: total flight time is independent of departure time.
        let mut x = start_x;
        let mut flight = 0.0;
        for leg in legs {
            let Terminus::Fixed(xt) = leg.terminus else { unreachable!() };
            flight += (xt - x).abs() / leg.speed;
            x = xt;
        }
        return Ok(t_arrival - flight);
    }
    let tol = 1e-12 * (1.0 + t_arrival.abs());
    let arrive = |t_dep: f64| -> Option<f64> {
        let mut t = t_dep;
        let mut x = start_x;
        for leg in legs {
            match leg.terminus {
                Terminus::Fixed(xt) => {
                    t += (xt - x).abs() / leg.speed;
                    x = xt;
                }
                Terminus::Moving(traj) => {
                    // First T >= t with |traj(T) - x| = speed (T - t).
                    let g = |bt: f64| leg.speed * (bt - t) - (traj.position(bt) - x).abs();
                    let mut step = 1.0 + (traj.position(t) - x).abs() / leg.speed;
                    let mut hi = t + step;
                    let mut tries = 0;
                    while g(hi) <= 0.0 {
                        step *= 2.0;
                        hi = t + step;
                        tries += 1;
                        if tries > 200 {
                            return None;
                        }
                    }
                    let mut lo = t;
                    for _ in 0..200 {
                        let mid = 0.5 * (lo + hi);
                        if g(mid) <= 0.0 {
                            lo = mid;
                        } else {
                            hi = mid;
                        }
                    }
                    t = 0.5 * (lo + hi);
                    x = traj.position(t);
                }
            }
        }
        Some(t)
    };
    // Outer bisection on the departure time (arrival is monotone in it).
    let mut hi = t_arrival;
    let mut lo = t_arrival - 1.0;
    let mut span = 1.0;
    let mut tries = 0;
    while arrive(lo).ok_or(Error::UnreachablePath)? > t_arrival {
        span *= 2.0;
        lo = t_arrival - span;
        tries += 1;
        if tries > 200 {
            return Err(Error::UnreachablePath);
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        match arrive(mid) {
            Some(a) if a <= t_arrival => lo = mid,
            Some(_) => hi = mid,
            None => return Err(Error::UnreachablePath),
        }
        if hi - lo < tol {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Accumulated phase `-omega0 * t_dep` of the path signal.
pub fn retarded_phase(omega0: f64, start_x: f64, legs: &[PathLeg], t_arrival: f64) -> Result<f64> {
    Ok(-omega0 * retarded_time(start_x, legs, t_arrival)?)
}
