//! Command-line front end: `simulate`, `check`, and `sweep`.
//!
//! Exit codes: 0 success, 1 failed checks, 2 input/validation problems,
//! 3 runtime/filesystem problems.

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::csvio;
use crate::detector::{analyze, detector_segments, superpose};
use crate::error::{Error, Result};
use crate::scattering::reflection_kinematics;
use crate::scenario_file::{load_scenario, set_scenario_value, RunManifest};
use crate::scenarios::{
    build_excursion_scenario, em_shutter_overlap, grating_phase_difference, shutter_overlap_window,
    slab_transmission_shift, Scenario,
};
use crate::tracer;
use crate::wavemodel::{WaveFamily, WaveModel};

#[derive(Parser)]
#[command(
    name = "wavecrest",
    version,
    about = "Event-driven one-dimensional wave-crest kinematics"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario file and write all exports into a directory.
    Simulate {
        /// Scenario file to run.
        scenario: PathBuf,
        /// Output directory (created if missing).
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Override the detector trace sampling rate (samples per unit time).
        #[arg(long)]
        sample_rate: Option<f64>,
    },
    /// Evaluate the built-in closed-form cross-checks and print a table.
    Check,
    /// Re-run a scenario over a range of one numeric parameter.
    Sweep {
        /// Scenario file to use as the base.
        scenario: PathBuf,
        /// Dotted key to vary, e.g. `beamsplitter.segment.2.duration`.
        #[arg(long)]
        param: String,
        /// Range `start:stop:count` (inclusive, evenly spaced).
        #[arg(long)]
        range: String,
        /// Output directory (created if missing).
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
}

/// Entry point for the binary: parses `std::env::args`.
pub fn main_entry() -> i32 {
    let args: Vec<String> = std::env::args().collect();
    run_with_args(args)
}

/// Testable entry point.
pub fn run_with_args<I, S>(args: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let outcome = match cli.command {
        Command::Simulate { scenario, out, sample_rate } => {
            cmd_simulate(&scenario, &out, sample_rate)
        }
        Command::Check => return cmd_check(),
        Command::Sweep { scenario, param, range, out } => {
            cmd_sweep(&scenario, &param, &range, &out)
        }
    };
    match outcome {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code_for(&e)
        }
    }
}

fn exit_code_for(e: &Error) -> i32 {
    match e {
        Error::InvalidInput(_) | Error::Validation(_) | Error::Parse { .. } => 2,
        Error::EventExplosion { .. } | Error::UnreachablePath | Error::Io { .. } => 3,
    }
}

/// Run one scenario and write the six artifacts into `dir`.
fn write_run_artifacts(
    sc: &Scenario,
    scenario_text: &str,
    dir: &Path,
    sample_rate: Option<f64>,
) -> Result<()> {
    let result = tracer::run(sc)?;
    let segments = detector_segments(sc, &result);
    let trace = superpose(sc, &segments, sample_rate);
    let report = analyze(sc, &segments);

    std::fs::create_dir_all(dir).map_err(|source| Error::Io {
        path: dir.display().to_string(),
        source,
    })?;
    let mut manifest = RunManifest::new(scenario_text);
    let files = [
        ("events.csv", csvio::events_csv(&result)),
        ("worldlines.csv", csvio::worldlines_csv(sc, &result)),
        ("segments.csv", csvio::segments_csv(&segments)),
        ("trace.csv", csvio::trace_csv(&trace)),
        ("report.csv", csvio::report_csv(&report, sc.run.t_max)),
    ];
    for (name, content) in &files {
        csvio::write_atomic(&dir.join(name), content.as_bytes())?;
        manifest.outputs.push((*name).to_string());
    }
    csvio::write_atomic(&dir.join("manifest.txt"), manifest.render().as_bytes())?;
    Ok(())
}

fn cmd_simulate(scenario: &Path, out: &Path, sample_rate: Option<f64>) -> Result<()> {
    let (sc, text) = load_scenario(scenario)?;
    sc.validate()?;
    write_run_artifacts(&sc, &text, out, sample_rate)?;
    println!("wrote {} and 5 csv files", out.join("manifest.txt").display());
    Ok(())
}

fn parse_range(range: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = range.split(':').collect();
    let [start, stop, count] = parts.as_slice() else {
        return Err(Error::invalid(format!(
            "range \"{range}\" is not start:stop:count"
        )));
    };
    let start: f64 = start
        .parse()
        .map_err(|_| Error::invalid(format!("range start \"{start}\" is not a number")))?;
    let stop: f64 = stop
        .parse()
        .map_err(|_| Error::invalid(format!("range stop \"{stop}\" is not a number")))?;
    let count: usize = count
        .parse()
        .map_err(|_| Error::invalid(format!("range count \"{count}\" is not a positive integer")))?;
    if count == 0 {
        return Err(Error::invalid("range count must be at least 1"));
    }
    if count == 1 {
        return Ok(vec![start]);
    }
    Ok((0..count)
        .map(|i| start + (stop - start) * i as f64 / (count - 1) as f64)
        .collect())
}

fn cmd_sweep(scenario: &Path, param: &str, range: &str, out: &Path) -> Result<()> {
    let (base, text) = load_scenario(scenario)?;
    let values = parse_range(range)?;
    // Fail fast if the key is unknown, before any sub-run writes.
    {
        let mut probe = base.clone();
        set_scenario_value(&mut probe, param, values[0])?;
    }
    let mut rows = Vec::with_capacity(values.len());
    for (i, &value) in values.iter().enumerate() {
        let mut sc = base.clone();
        set_scenario_value(&mut sc, param, value)?;
        sc.validate()?;
        let sub = out.join(format!("run_{i:03}"));
        write_run_artifacts(&sc, &text, &sub, None)?;
        let result = tracer::run(&sc)?;
        let segments = detector_segments(&sc, &result);
        let report = analyze(&sc, &segments);
        rows.push(csvio::SweepRow {
            value,
            beat_frequency: report.beat_frequency(),
            visibility: report.stationary_visibility(),
            stationary_phase_diff: report.stationary_phase_diff(),
        });
    }
    csvio::write_atomic(&out.join("sweep.csv"), csvio::sweep_csv(&rows).as_bytes())?;
    println!("wrote {} ({} rows)", out.join("sweep.csv").display(), rows.len());
    Ok(())
}

/// One row of the check table.
struct CheckRow {
    name: &'static str,
    passed: bool,
    detail: String,
}

fn approx(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

fn check_rows() -> Vec<CheckRow> {
    let mut rows = Vec::new();
    let mut push = |name: &'static str, passed: bool, detail: String| {
        rows.push(CheckRow { name, passed, detail });
    };
    let schr = WaveModel::schrodinger(1.0, 1.0);

    // Static mirror: reversed wavevector, unchanged frequency.
    {
        let (k_r, w_r) = reflection_kinematics(&schr, 0.2, 0.0).unwrap();
        push(
            "static reflection k -> -k at frequency m v_g^2/(2 hbar)",
            k_r == -0.2 && approx(w_r, 0.02, 1e-12),
            format!("k_r = {k_r}, omega_r = {w_r}"),
        );
    }
    // Splitter overtaking the incident train: frequency m(2V+v_g)^2/(2 hbar)
    // in magnitudes (V = 1, v_g = 0.2 gives 2.42).
    {
        let (k_r, w_r) = reflection_kinematics(&schr, 0.2, -1.0).unwrap();
        push(
            "overtaking reflection frequency m(2V+v_g)^2/(2 hbar)",
            approx(w_r, (2.0 + 0.2_f64).powi(2) / 2.0, 1e-12),
            format!("k_r = {k_r}, omega_r = {w_r}"),
        );
    }
    // Splitter re-catching its own reflection: m(2V-v_g)^2/(2 hbar).
    {
        let (k_r, w_r) = reflection_kinematics(&schr, -0.2, -1.0).unwrap();
        push(
            "re-swept reflection frequency m(2V-v_g)^2/(2 hbar)",
            approx(w_r, (2.0 - 0.2_f64).powi(2) / 2.0, 1e-12),
            format!("k_r = {k_r}, omega_r = {w_r}"),
        );
    }
    // Displaced-splitter phase difference 2 k L.
    {
        let got = grating_phase_difference(0.2, 24.0);
        push(
            "displacement phase difference 2 k L",
            approx(got, 9.6, 1e-12),
            format!("2kL = {got}"),
        );
    }
    // Shutter pair passes a train of duration tau(1-alpha).
    {
        let ok = [0.0, 0.25, 0.5, 0.75, 1.0].iter().all(|&alpha| {
            approx(
                shutter_overlap_window(8.0, alpha).unwrap(),
                8.0 * (1.0 - alpha),
                1e-12,
            )
        });
        push("shutter duration tau(1-alpha)", ok, "tau = 8, alpha in {0..1}".into());
    }
    // Accelerated slab frequency shift m g L (1-n)/(n hbar); zero at n = 1.
    {
        let shift = slab_transmission_shift(2.0, 9.8, 0.5, 1.3, 1.0).unwrap();
        let expect = 2.0 * 9.8 * 0.5 * (1.0 - 1.3) / (1.3 * 1.0);
        let zero = slab_transmission_shift(2.0, 9.8, 0.5, 1.0, 1.0).unwrap();
        push(
            "slab frequency shift m g L (1-n)/(n hbar)",
            approx(shift, expect, 1e-12) && zero == 0.0,
            format!("shift = {shift}, vacuum limit = {zero}"),
        );
    }
    // Light escapes a closing gate pair only while t2 - t1 < L/c.
    {
        let ok = em_shutter_overlap(0.0, 0.9, 10.0, 10.0)
            && !em_shutter_overlap(0.0, 1.0, 10.0, 10.0)
            && !em_shutter_overlap(0.0, 1.1, 10.0, 10.0);
        push("light gate race t2-t1 < L/c", ok, "L/c = 1".into());
    }
    // The canned excursion: matter waves interfere, light and relativistic
    // matter do not.
    {
        let sc = build_excursion_scenario(WaveFamily::Schrodinger);
        let result = tracer::run(&sc).unwrap();
        let overtakes = result.overtake_events();
        let segs = detector_segments(&sc, &result);
        let report = analyze(&sc, &segs);
        let phase = report.stationary_phase_diff();
        let expect = 9.6_f64.rem_euclid(std::f64::consts::TAU);
        push(
            "matter-wave excursion: stationary fringe at phase 2 k L",
            overtakes > 0
                && phase.is_some_and(|p| (p - expect).abs() < 1e-6)
                && report.stationary_visibility() > 0.5,
            format!("overtake events = {overtakes}, phase = {phase:?}"),
        );
    }
    {
        let mut ok = true;
        let mut detail = String::new();
        for family in [WaveFamily::KleinGordon, WaveFamily::EmVacuum] {
            let sc = build_excursion_scenario(family);
            let result = tracer::run(&sc).unwrap();
            let overtakes = result.overtake_events();
            let segs = detector_segments(&sc, &result);
            let vis = analyze(&sc, &segs).stationary_visibility();
            ok &= overtakes == 0 && vis < 1e-12;
            let _ = std::fmt::Write::write_fmt(
                &mut detail,
                format_args!("{}: overtakes = {overtakes}, visibility = {vis}; ", family.name()),
            );
        }
        push(
            "no crest overtake for bounded-phase-speed families",
            ok,
            detail,
        );
    }
    rows
}

fn cmd_check() -> i32 {
    let rows = check_rows();
    let width = rows.iter().map(|r| r.name.len()).max().unwrap_or(0);
    let mut failures = 0;
    for row in &rows {
        let status = if row.passed { "pass" } else { "FAIL" };
        println!("{status}  {:width$}  {}", row.name, row.detail);
        if !row.passed {
            failures += 1;
        }
    }
    if failures == 0 {
        println!("all {} checks passed", rows.len());
        0
    } else {
        eprintln!("{failures} of {} checks failed", rows.len());
        1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn range_parsing_is_inclusive_and_even() {
        assert_eq!(parse_range("0:1:3").unwrap(), vec![0.0, 0.5, 1.0]);
        assert_eq!(parse_range("5:9:1").unwrap(), vec![5.0]);
        assert!(parse_range("0:1:0").is_err());
        assert!(parse_range("0:1").is_err());
        assert!(parse_range("a:1:3").is_err());
    }

    #[test]
    fn all_built_in_checks_pass() {
        let rows = check_rows();
        assert!(rows.len() >= 8);
        for row in &rows {
            assert!(row.passed, "{}: {}", row.name, row.detail);
        }
    }

    #[test]
    fn error_exit_codes_follow_their_class() {
        assert_eq!(exit_code_for(&Error::invalid("x")), 2);
        assert_eq!(exit_code_for(&Error::Validation(vec!["x".into()])), 2);
        assert_eq!(
            exit_code_for(&Error::Parse { line: 1, message: "x".into() }),
            2
        );
        assert_eq!(exit_code_for(&Error::UnreachablePath), 3);
    }
}
