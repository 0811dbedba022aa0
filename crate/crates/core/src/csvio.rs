//! Tabular exports.  Every writer emits a fixed column order, formats
//! doubles with the shortest representation that parses back to the same
//! bits, and iterates in a deterministic order, so identical runs produce
//! byte-identical files.

use std::fmt::Write as _;
use std::path::Path;

use crate::detector::{DetectorSegment, DetectorTrace, InterferenceReport};
use crate::error::{Error, Result};
use crate::scenarios::Scenario;
use crate::tracer::{Actor, BoundaryPiece, SimulationResult, Train};

fn fmt_f(x: f64) -> String {
    x.to_string()
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_f).unwrap_or_default()
}

/// `events.csv`: every scattering and arrival, one row per event, in id
/// order.
pub fn events_csv(result: &SimulationResult) -> String {
    let mut out = String::from("id,time,position,kind,incident_id,product_ids,amplitude_abs\n");
    for ev in &result.events {
        let incident = ev.incident.map(Actor::tag).unwrap_or_default();
        let products: Vec<String> = ev.products.iter().map(|a| a.tag()).collect();
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            ev.id,
            fmt_f(ev.time),
            fmt_f(ev.position),
            ev.kind.name(),
            incident,
            products.join(";"),
            fmt_f(ev.amplitude_abs),
        );
    }
    out
}

fn polyline(out: &mut String, id: &str, kind: &str, points: &[(f64, f64)]) {
    let mut last: Option<(f64, f64)> = None;
    for &(t, x) in points {
        if last == Some((t, x)) {
            continue;
        }
        let _ = writeln!(out, "{id},{kind},{},{}", fmt_f(t), fmt_f(x));
        last = Some((t, x));
    }
}

fn train_edge_points(
    sc: &Scenario,
    tr: &Train,
    boundary: &crate::tracer::Boundary,
) -> Vec<(f64, f64)> {
    let t_hi = tr.died.unwrap_or(sc.run.t_max).min(sc.run.t_max);
    let mut pts = Vec::new();
    for (s, e, idx) in boundary.spans(tr.born, t_hi) {
        let mut times = vec![s, e];
        if let BoundaryPiece::Attached { element, .. } = boundary.pieces[idx] {
            times.extend(
                sc.elements[element]
                    .trajectory
                    .refined_breakpoints(s, e, sc.run.substeps),
            );
        }
        times.sort_by(|a, b| a.partial_cmp(b).unwrap());
        times.dedup();
        for t in times {
            pts.push((t, boundary.position(t, sc)));
        }
    }
    pts
}

/// `worldlines.csv`: the diagram as polylines — elements, source and
/// detector verticals, train envelope edges, and traced phase lines.
pub fn worldlines_csv(sc: &Scenario, result: &SimulationResult) -> String {
    let mut out = String::from("object_id,object_kind,t,x\n");
    let t_max = sc.run.t_max;
    for el in &sc.elements {
        let mut times = vec![0.0, t_max];
        times.extend(el.trajectory.refined_breakpoints(0.0, t_max, sc.run.substeps));
        times.sort_by(|a, b| a.partial_cmp(b).unwrap());
        times.dedup();
        let pts: Vec<(f64, f64)> = times
            .into_iter()
            .map(|t| (t, el.trajectory.position(t)))
            .collect();
        polyline(&mut out, &el.label, "element", &pts);
    }
    polyline(
        &mut out,
        "source",
        "source",
        &[(sc.source.t_on, sc.source.position), (t_max, sc.source.position)],
    );
    polyline(
        &mut out,
        "detector",
        "detector",
        &[(0.0, sc.detector.position), (t_max, sc.detector.position)],
    );
    for tr in &result.trains {
        let pts = train_edge_points(sc, tr, &tr.left);
        polyline(&mut out, &format!("T{}.left", tr.id), "train_edge", &pts);
        let pts = train_edge_points(sc, tr, &tr.right);
        polyline(&mut out, &format!("T{}.right", tr.id), "train_edge", &pts);
    }
    for crest in &result.crests {
        polyline(&mut out, &format!("C{}", crest.id), "crest", &crest.vertices);
    }
    out
}

/// `segments.csv`: the detector coverage intervals.
pub fn segments_csv(segments: &[DetectorSegment]) -> String {
    let mut out =
        String::from("segment_id,omega,k,amp_re,amp_im,phase0,t_in,t_out,provenance\n");
    for seg in segments {
        let provenance: Vec<String> = seg.provenance.iter().map(usize::to_string).collect();
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            seg.id,
            fmt_f(seg.wave.omega),
            fmt_f(seg.wave.wavevector),
            fmt_f(seg.wave.amplitude.re),
            fmt_f(seg.wave.amplitude.im),
            fmt_f(seg.wave.phase0),
            fmt_f(seg.t_in),
            fmt_f(seg.t_out),
            provenance.join(";"),
        );
    }
    out
}

/// `trace.csv`: the sampled complex field and its squared modulus.
pub fn trace_csv(trace: &DetectorTrace) -> String {
    let mut out = String::from("t,amp_re,amp_im,pdf\n");
    for (t, f) in trace.times.iter().zip(&trace.field) {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            fmt_f(*t),
            fmt_f(f.re),
            fmt_f(f.im),
            fmt_f(f.norm_sqr()),
        );
    }
    out
}

/// `report.csv`: one row per atomic coverage window.  Beat and stationary
/// columns are filled on the rows inside the respective summary windows;
/// elsewhere they stay empty.
pub fn report_csv(report: &InterferenceReport, t_max: f64) -> String {
    let mut out = String::from(
        "window_start,window_end,beat_frequency,visibility,stationary_phase_diff,flags\n",
    );
    let inside = |win: (f64, f64), a: f64, b: f64| a >= win.0 && b <= win.1;
    for w in &report.windows {
        let mut flags: Vec<&str> = Vec::new();
        let mut beat_col = None;
        let mut st_col = None;
        if let Some(beat) = &report.beat {
            if inside(beat.pair.window, w.t_start, w.t_end) {
                flags.push("beat");
                if beat.low_confidence {
                    flags.push("low_confidence");
                }
                beat_col = Some(beat.fitted_frequency);
            }
        }
        if let Some(st) = &report.stationary {
            if inside(st.pair.window, w.t_start, w.t_end) {
                flags.push("stationary");
                st_col = Some(st.phase_diff);
            }
        }
        if w.t_end == t_max {
            flags.push("clipped");
        }
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            fmt_f(w.t_start),
            fmt_f(w.t_end),
            fmt_opt(beat_col),
            fmt_f(w.visibility),
            fmt_opt(st_col),
            flags.join(";"),
        );
    }
    out
}

/// One row of `sweep.csv`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub value: f64,
    pub beat_frequency: Option<f64>,
    pub visibility: f64,
    pub stationary_phase_diff: Option<f64>,
}

/// `sweep.csv`: the per-value summary of a parameter sweep.
pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from("value,beat_frequency,visibility,stationary_phase_diff\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            fmt_f(r.value),
            fmt_opt(r.beat_frequency),
            fmt_f(r.visibility),
            fmt_opt(r.stationary_phase_diff),
        );
    }
    out
}

/// Write a file atomically: the full content lands under a temporary name
/// in the same directory, then a rename moves it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let io_err = |source: std::io::Error| Error::Io {
        path: path.display().to_string(),
        source,
    };
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = std::path::PathBuf::from(tmp);
    std::fs::write(&tmp, bytes).map_err(io_err)?;
    std::fs::rename(&tmp, path).map_err(io_err)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::detector::{analyze, detector_segments, superpose};
    use crate::scenarios::build_excursion_scenario;
    use crate::wavemodel::WaveFamily;

    fn run_once() -> (Scenario, SimulationResult) {
        let sc = build_excursion_scenario(WaveFamily::Schrodinger);
        let result = crate::tracer::run(&sc).unwrap();
        (sc, result)
    }

    #[test]
    fn exports_have_fixed_headers_and_parse_back() {
        let (sc, result) = run_once();
        let segs = detector_segments(&sc, &result);
        let trace = superpose(&sc, &segs, Some(1.0));
        let report = analyze(&sc, &segs);

        let events = events_csv(&result);
        assert!(events.starts_with("id,time,position,kind,incident_id,product_ids,amplitude_abs\n"));
        assert!(events.lines().count() > 10);
        // Every data row re-parses: numeric id, f64 time.
        for line in events.lines().skip(1) {
            let cols: Vec<&str> = line.split(',').collect();
            assert_eq!(cols.len(), 7, "{line}");
            cols[0].parse::<usize>().unwrap();
            cols[1].parse::<f64>().unwrap();
        }

        let worldlines = worldlines_csv(&sc, &result);
        assert!(worldlines.starts_with("object_id,object_kind,t,x\n"));
        assert!(worldlines.contains("beamsplitter,element,"));
        assert!(worldlines.contains(".left,train_edge,"));
        assert!(worldlines.contains(",crest,"));

        let segments = segments_csv(&segs);
        assert!(segments
            .starts_with("segment_id,omega,k,amp_re,amp_im,phase0,t_in,t_out,provenance\n"));

        let trace_text = trace_csv(&trace);
        assert!(trace_text.starts_with("t,amp_re,amp_im,pdf\n"));
        assert_eq!(trace_text.lines().count(), trace.times.len() + 1);

        let report_text = report_csv(&report, sc.run.t_max);
        assert!(report_text.starts_with(
            "window_start,window_end,beat_frequency,visibility,stationary_phase_diff,flags\n"
        ));
        assert!(report_text.contains("beat"));
        assert!(report_text.contains("stationary"));
    }

    #[test]
    fn repeated_runs_export_identical_bytes() {
        let (sc_a, res_a) = run_once();
        let (sc_b, res_b) = run_once();
        assert_eq!(events_csv(&res_a), events_csv(&res_b));
        assert_eq!(worldlines_csv(&sc_a, &res_a), worldlines_csv(&sc_b, &res_b));
        let segs_a = detector_segments(&sc_a, &res_a);
        let segs_b = detector_segments(&sc_b, &res_b);
        assert_eq!(segments_csv(&segs_a), segments_csv(&segs_b));
        assert_eq!(
            report_csv(&analyze(&sc_a, &segs_a), sc_a.run.t_max),
            report_csv(&analyze(&sc_b, &segs_b), sc_b.run.t_max),
        );
    }

    #[test]
    fn atomic_write_replaces_content() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("out.csv");
        write_atomic(&path, b"first\n").unwrap();
        write_atomic(&path, b"second\n").unwrap();
        assert_eq!(std::fs::read_to_string(&path).unwrap(), "second\n");
        assert!(!path.with_extension("csv.tmp").exists());
    }
}
