//! Piecewise constant-acceleration worldlines for optical elements, plus the
//! root-finding used to intersect them with straight characteristic lines.

use crate::error::{Error, Result};

/// Relative tolerance used when clamping a slightly negative quadratic
/// discriminant that should be an exact tangency.
const DISC_EPS: f64 = 1e-12;

/// One constant-acceleration piece of a worldline.
///
/// `duration` is `None` only for the final piece, which then extends to
/// `t = +inf`.  `velocity0` is the velocity at the start of the piece; the
/// velocity at its end must match the next piece's `velocity0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectorySegment {
    pub duration: Option<f64>,
    pub velocity0: f64,
    pub accel: f64,
}

impl TrajectorySegment {
    pub fn rest(duration: Option<f64>) -> Self {
        TrajectorySegment {
            duration,
            velocity0: 0.0,
            accel: 0.0,
        }
    }

    pub fn const_velocity(duration: Option<f64>, velocity: f64) -> Self {
        TrajectorySegment {
            duration,
            velocity0: velocity,
            accel: 0.0,
        }
    }

    pub fn const_accel(duration: Option<f64>, velocity0: f64, accel: f64) -> Self {
        TrajectorySegment {
            duration,
            velocity0,
            accel,
        }
    }
}

/// Cached entry state of one segment.
#[derive(Debug, Clone, Copy, PartialEq)]
struct SegmentStart {
    t: f64,
    x: f64,
    v: f64,
}

/// A worldline made of constant-acceleration segments.
///
/// The worldline starts at `(x0, t0)`; before `t0` the first segment is
/// extrapolated backwards, and the final segment (which must be unbounded)
/// extends forward forever, so positions and velocities are defined for every
/// time.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    x0: f64,
    t0: f64,
    segments: Vec<TrajectorySegment>,
    starts: Vec<SegmentStart>,
}

/// A straight worldline `x(t) = x_start + speed * (t - t_start)`, used for
/// wave characteristics (crest lines and train edges).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrestLine {
    pub x_start: f64,
    pub t_start: f64,
    pub speed: f64,
}

impl CrestLine {
    pub fn new(x_start: f64, t_start: f64, speed: f64) -> Self {
        CrestLine {
            x_start,
            t_start,
            speed,
        }
    }

    pub fn position(&self, t: f64) -> f64 {
        self.x_start + self.speed * (t - self.t_start)
    }
}

/// Real roots of `a x^2 + b x + c = 0`, computed with the numerically stable
/// split (the larger-magnitude root from `-(b + sign(b) sqrt(disc)) / 2`, the
/// other from the product of roots).  A relative tolerance snaps a slightly
/// negative discriminant to a tangency.
pub fn stable_quadratic_roots(a: f64, b: f64, c: f64) -> Vec<f64> {
    if a == 0.0 {
        if b == 0.0 {
            return Vec::new();
        }
        return vec![-c / b];
    }
    let disc = b * b - 4.0 * a * c;
    let scale = (b * b).max((4.0 * a * c).abs());
    if disc < -DISC_EPS * scale {
        return Vec::new();
    }
    let disc = disc.max(0.0);
    let sq = disc.sqrt();
    let q = -0.5 * (b + b.signum() * sq);
    if q == 0.0 {
        // b == 0 and disc == 0: double root at the vertex.
        return vec![0.0];
    }
    let r1 = q / a;
    let r2 = c / q;
    if r1 <= r2 {
        vec![r1, r2]
    } else {
        vec![r2, r1]
    }
}

impl Trajectory {
    /// Build and validate a worldline.
    ///
    /// Requirements: at least one segment; every segment except the last has
    /// a finite positive duration; the last segment's duration is `None`;
    /// velocity is continuous across each junction to within `1e-9`
    /// (relative to the larger speed).
    pub fn new(x0: f64, t0: f64, segments: Vec<TrajectorySegment>) -> Result<Self> {
        if !x0.is_finite() || !t0.is_finite() {
            return Err(Error::invalid("trajectory origin must be finite"));
        }
        if segments.is_empty() {
            return Err(Error::invalid("trajectory needs at least one segment"));
        }
        let last = segments.len() - 1;
        for (i, seg) in segments.iter().enumerate() {
            if !seg.velocity0.is_finite() || !seg.accel.is_finite() {
                return Err(Error::invalid(format!(
                    "segment {i}: velocity and acceleration must be finite"
                )));
            }
            match seg.duration {
                Some(d) if i == last => {
                    return Err(Error::invalid(format!(
                        "segment {i} is the last segment and must be unbounded \
                         (got duration {d}); append an unbounded tail segment if needed"
                    )));
                }
                None if i != last => {
                    return Err(Error::invalid(format!(
                        "segment {i} must have a finite duration; only the last segment \
                         may be unbounded"
                    )));
                }
                Some(d) if !(d > 0.0) || !d.is_finite() => {
                    return Err(Error::invalid(format!(
                        "segment {i}: duration must be a finite positive number (got {d})"
                    )));
                }
                _ => {}
            }
        }
        // Velocity continuity across junctions.
        let mut starts = Vec::with_capacity(segments.len());
        let mut t = t0;
        let mut x = x0;
        for (i, seg) in segments.iter().enumerate() {
            if i > 0 {
                let prev = &segments[i - 1];
                let v_end = prev.velocity0 + prev.accel * prev.duration.unwrap();
                let tol = 1e-9 * v_end.abs().max(seg.velocity0.abs()).max(1.0);
                if (v_end - seg.velocity0).abs() > tol {
                    return Err(Error::invalid(format!(
                        "velocity discontinuity between segments {} and {}: {} vs {}",
                        i - 1,
                        i,
                        v_end,
                        seg.velocity0
                    )));
                }
            }
            starts.push(SegmentStart {
                t,
                x,
                v: seg.velocity0,
            });
            if let Some(d) = seg.duration {
                x += seg.velocity0 * d + 0.5 * seg.accel * d * d;
                t += d;
            }
        }
        Ok(Trajectory {
            x0,
            t0,
            segments,
            starts,
        })
    }

    /// A worldline that sits at `x0` forever.
    pub fn at_rest(x0: f64) -> Self {
        Trajectory::new(x0, 0.0, vec![TrajectorySegment::rest(None)])
            .expect("a resting trajectory is always valid")
    }

    pub fn x0(&self) -> f64 {
        self.x0
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn segments(&self) -> &[TrajectorySegment] {
        &self.segments
    }

    /// Index of the segment governing time `t` (times before `t0` use the
    /// first segment, extrapolated backwards).
    fn segment_index(&self, t: f64) -> usize {
        // starts[i].t is the entry time of segment i; pick the last entry <= t.
        match self
            .starts
            .binary_search_by(|s| s.t.partial_cmp(&t).unwrap())
        {
            Ok(i) => i,
            Err(0) => 0,
            Err(i) => i - 1,
        }
    }

    /// Position, velocity, and acceleration at time `t`.
    pub fn state_at(&self, t: f64) -> (f64, f64, f64) {
        let i = self.segment_index(t);
        let s = &self.starts[i];
        let seg = &self.segments[i];
        let dt = t - s.t;
        (
            s.x + s.v * dt + 0.5 * seg.accel * dt * dt,
            s.v + seg.accel * dt,
            seg.accel,
        )
    }

    pub fn position(&self, t: f64) -> f64 {
        self.state_at(t).0
    }

    pub fn velocity(&self, t: f64) -> f64 {
        self.state_at(t).1
    }

    /// Segment junction times strictly inside `(after, before)`.
    pub fn breakpoints(&self, after: f64, before: f64) -> Vec<f64> {
        self.starts
            .iter()
            .skip(1)
            .map(|s| s.t)
            .filter(|&t| t > after && t < before)
            .collect()
    }

    /// Junction times plus `substeps` equal subdivisions of every
    /// accelerating segment, strictly inside `(after, before)`.
    ///
    /// Subdividing lets a caller treat an accelerating element as a sequence
    /// of short constant-velocity intervals while keeping its position exact.
    pub fn refined_breakpoints(&self, after: f64, before: f64, substeps: u32) -> Vec<f64> {
        let mut out = self.breakpoints(after, before);
        let n = substeps.max(1) as usize;
        for (i, seg) in self.segments.iter().enumerate() {
            if seg.accel == 0.0 {
                continue;
            }
            let t_start = self.starts[i].t;
            let t_end = match seg.duration {
                Some(d) => t_start + d,
                None => before,
            };
            for j in 1..n {
                let t = t_start + (t_end - t_start) * (j as f64) / (n as f64);
                if t > after && t < before {
                    out.push(t);
                }
            }
        }
        out.sort_by(|a, b| a.partial_cmp(b).unwrap());
        out.dedup();
        out
    }

    /// Largest `|velocity|` attained anywhere in `[from, to]`.
    pub fn max_abs_velocity(&self, from: f64, to: f64) -> f64 {
        let mut best = self.velocity(from).abs().max(self.velocity(to).abs());
        for s in self.starts.iter() {
            if s.t > from && s.t < to {
                best = best.max(s.v.abs());
            }
        }
        best
    }

    /// Earliest crossing of this worldline with a straight line, restricted
    /// to `[t_from, t_to]`.  Returns `None` when they do not meet there.
    ///
    /// A segment that exactly coincides with the line (same speed, zero
    /// offset, no acceleration) reports a crossing at the start of the
    /// overlap window.
    pub fn first_crossing(&self, line: &CrestLine, t_from: f64, t_to: f64) -> Option<f64> {
        if !(t_from <= t_to) {
            return None;
        }
        let n = self.segments.len();
        for i in 0..n {
            let s = &self.starts[i];
            let seg = &self.segments[i];
            // Window covered by this segment (segment 0 reaches back forever).
            let win_lo = if i == 0 { f64::NEG_INFINITY } else { s.t };
            let win_hi = match seg.duration {
                Some(d) => s.t + d,
                None => f64::INFINITY,
            };
            let lo = win_lo.max(t_from);
            let hi = win_hi.min(t_to);
            if !(lo <= hi) {
                continue;
            }
            // Relative offset f(tau) with tau = t - s.t:
            //   f = 0.5 a tau^2 + (v - u) tau + (x_s - line(s.t))
            let a = 0.5 * seg.accel;
            let b = s.v - line.speed;
            let c = s.x - line.position(s.t);
            if a == 0.0 && b == 0.0 {
                if c == 0.0 {
                    return Some(lo);
                }
                continue;
            }
            let mut roots = stable_quadratic_roots(a, b, c);
            roots.retain(|r| r.is_finite());
            let mut best: Option<f64> = None;
            for tau in roots {
                let t = s.t + tau;
                if t >= lo && t <= hi {
                    best = Some(match best {
                        Some(prev) => prev.min(t),
                        None => t,
                    });
                }
            }
            if let Some(t) = best {
                return Some(t);
            }
        }
        None
    }

    /// All crossings of the worldline with the fixed position `x_level`
    /// inside `[t_from, t_to]`, in increasing time order.
    pub fn crossings_of_level(&self, x_level: f64, t_from: f64, t_to: f64) -> Vec<f64> {
        let mut out = Vec::new();
        let line = CrestLine::new(x_level, 0.0, 0.0);
        let n = self.segments.len();
        for i in 0..n {
            let s = &self.starts[i];
            let seg = &self.segments[i];
            let win_lo = if i == 0 { f64::NEG_INFINITY } else { s.t };
            let win_hi = match seg.duration {
                Some(d) => s.t + d,
                None => f64::INFINITY,
            };
            let lo = win_lo.max(t_from);
            let hi = win_hi.min(t_to);
            if !(lo <= hi) {
                continue;
            }
            let a = 0.5 * seg.accel;
            let b = s.v - line.speed;
            let c = s.x - line.position(s.t);
            if a == 0.0 && b == 0.0 {
                continue;
            }
            for tau in stable_quadratic_roots(a, b, c) {
                let t = s.t + tau;
                if t >= lo && t <= hi {
                    out.push(t);
                }
            }
        }
        out.sort_by(|a, b| a.partial_cmp(b).unwrap());
        out.dedup();
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn excursion() -> Trajectory {
        Trajectory::new(
            30.0,
            0.0,
            vec![
                TrajectorySegment::rest(Some(246.0)),
                TrajectorySegment::const_accel(Some(0.2), 0.0, -5.0),
                TrajectorySegment::const_velocity(Some(23.8), -1.0),
                TrajectorySegment::const_accel(Some(0.2), -1.0, 5.0),
                TrajectorySegment::rest(None),
            ],
        )
        .unwrap()
    }

    #[test]
    fn excursion_positions_and_velocities() {
        let tr = excursion();
        assert_eq!(tr.position(0.0), 30.0);
        assert_eq!(tr.position(246.0), 30.0);
        let (x, v, _) = tr.state_at(246.2);
        assert!((x - 29.9).abs() < 1e-12);
        assert!((v + 1.0).abs() < 1e-12);
        let (x, v, _) = tr.state_at(270.0);
        assert!((x - 6.1).abs() < 1e-12);
        assert!((v + 1.0).abs() < 1e-12);
        let (x, v, _) = tr.state_at(270.2);
        assert!((x - 6.0).abs() < 1e-12);
        assert!(v.abs() < 1e-12);
        assert!((tr.position(500.0) - 6.0).abs() < 1e-12);
    }

    #[test]
    fn velocity_discontinuity_is_rejected_with_segment_index() {
        let err = Trajectory::new(
            0.0,
            0.0,
            vec![
                TrajectorySegment::const_velocity(Some(1.0), 1.0),
                TrajectorySegment::const_velocity(None, 0.5),
            ],
        )
        .unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("segments 0 and 1"), "{msg}");
    }

    #[test]
    fn bounded_last_segment_is_rejected() {
        let err = Trajectory::new(
            0.0,
            0.0,
            vec![TrajectorySegment::rest(Some(5.0))],
        )
        .unwrap_err();
        assert!(err.to_string().contains("unbounded"), "{err}");
    }

    #[test]
    fn first_crossing_on_the_accelerating_piece() {
        // An edge released from (30, 246) at speed -0.2 is caught by the
        // accelerating element at t = 246.08.
        let tr = excursion();
        let line = CrestLine::new(30.0, 246.0, -0.2);
        let t = tr.first_crossing(&line, 246.0 + 1e-9, 400.0).unwrap();
        assert!((t - 246.08).abs() < 1e-9, "t = {t}");
    }

    #[test]
    fn first_crossing_static_case() {
        let tr = Trajectory::at_rest(30.0);
        let line = CrestLine::new(0.0, 0.0, 0.2);
        let t = tr.first_crossing(&line, 0.0, 1000.0).unwrap();
        assert_eq!(t, 150.0);
        assert!(tr.first_crossing(&line, 0.0, 100.0).is_none());
    }

    #[test]
    fn crossings_of_level_counts_both_passes() {
        // Out along +x and back: the level 4.0 is crossed twice.
        let tr = Trajectory::new(
            0.0,
            0.0,
            vec![
                TrajectorySegment::const_accel(Some(2.0), 0.0, 1.0),
                TrajectorySegment::const_accel(Some(4.0), 2.0, -1.0),
                TrajectorySegment::const_accel(Some(2.0), -2.0, 1.0),
                TrajectorySegment::rest(None),
            ],
        )
        .unwrap();
        // x(t): 0 -> 2 -> 4 (t=4) -> 2 -> 0 (t=8), then rest.
        let crossings = tr.crossings_of_level(2.0, 0.0, 10.0);
        assert_eq!(crossings.len(), 2, "{crossings:?}");
        assert!((crossings[0] - 2.0).abs() < 1e-12);
        assert!((crossings[1] - 6.0).abs() < 1e-12);
    }

    #[test]
    fn quadratic_root_splitting_stays_stable() {
        // Roots 1e-9 and 1e9: naive formula loses the small root.
        let roots = stable_quadratic_roots(1.0, -(1e9 + 1e-9), 1.0);
        assert_eq!(roots.len(), 2);
        assert!((roots[0] - 1e-9).abs() < 1e-18);
        assert!((roots[1] - 1e9).abs() < 1e-3);
    }

    #[test]
    fn backward_extrapolation_before_origin() {
        let tr = Trajectory::new(
            5.0,
            10.0,
            vec![TrajectorySegment::const_velocity(None, 2.0)],
        )
        .unwrap();
        assert_eq!(tr.position(9.0), 3.0);
        assert_eq!(tr.velocity(0.0), 2.0);
    }
}
