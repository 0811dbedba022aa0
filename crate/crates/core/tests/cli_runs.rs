//! End-to-end command dispatch: artifact layout, exit codes, and
//! repeat-run determinism through the real entry point.

use std::path::{Path, PathBuf};

use wavecrest::cli::run_with_args;
use wavecrest::scenario_file::sha256_hex;

fn scenario(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../scenarios").join(name)
}

fn cli(args: &[&str]) -> i32 {
    run_with_args(std::iter::once("wavecrest").chain(args.iter().copied()))
}

const ARTIFACTS: [&str; 6] = [
    "events.csv",
    "worldlines.csv",
    "segments.csv",
    "trace.csv",
    "report.csv",
    "manifest.txt",
];

fn read_all(dir: &Path) -> Vec<(String, Vec<u8>)> {
    ARTIFACTS
        .iter()
        .map(|name| (name.to_string(), std::fs::read(dir.join(name)).expect(name)))
        .collect()
}

#[test]
fn simulate_writes_all_artifacts_and_is_deterministic() {
    let tmp = tempfile::tempdir().unwrap();
    let scn = scenario("excursion.scn");
    let out_a = tmp.path().join("a");
    let out_b = tmp.path().join("b");
    assert_eq!(cli(&["simulate", scn.to_str().unwrap(), "--out", out_a.to_str().unwrap()]), 0);
    assert_eq!(cli(&["simulate", scn.to_str().unwrap(), "--out", out_b.to_str().unwrap()]), 0);

    let a = read_all(&out_a);
    let b = read_all(&out_b);
    for ((name, bytes_a), (_, bytes_b)) in a.iter().zip(&b) {
        assert_eq!(bytes_a, bytes_b, "{name} differs between identical runs");
        assert!(!bytes_a.is_empty(), "{name} is empty");
    }

    // The manifest ties the run to the scenario bytes and lists the csvs.
    let manifest = String::from_utf8(a[5].1.clone()).unwrap();
    let digest = sha256_hex(&std::fs::read(&scn).unwrap());
    assert!(manifest.contains(&format!("digest = {digest}")), "{manifest}");
    for name in &ARTIFACTS[..5] {
        assert!(manifest.contains(name), "{manifest}");
    }
}

#[test]
fn validation_failures_exit_2_and_name_the_culprit() {
    let tmp = tempfile::tempdir().unwrap();
    // A light-speed bound below the element's cruise speed must be caught
    // before any simulation work.
    let text = std::fs::read_to_string(scenario("excursion_kg.scn")).unwrap();
    let slow = text.replace("light_speed = 10", "light_speed = 0.9");
    let path = tmp.path().join("slow_light.scn");
    std::fs::write(&path, slow).unwrap();
    let out = tmp.path().join("out");
    assert_eq!(cli(&["simulate", path.to_str().unwrap(), "--out", out.to_str().unwrap()]), 2);
    assert!(!out.join("events.csv").exists(), "no artifacts on validation failure");

    // Parse-level problems share the exit code.
    let mangled = tmp.path().join("mangled.scn");
    std::fs::write(&mangled, "model = schrodinger\nwhat now\n").unwrap();
    assert_eq!(cli(&["simulate", mangled.to_str().unwrap(), "--out", out.to_str().unwrap()]), 2);
}

#[test]
fn missing_scenario_file_exits_3() {
    let tmp = tempfile::tempdir().unwrap();
    let missing = tmp.path().join("nope.scn");
    let out = tmp.path().join("out");
    assert_eq!(
        cli(&["simulate", missing.to_str().unwrap(), "--out", out.to_str().unwrap()]),
        3
    );
}

#[test]
fn check_command_reports_success() {
    assert_eq!(cli(&["check"]), 0);
}

#[test]
fn sweep_writes_sub_runs_and_summary() {
    let tmp = tempfile::tempdir().unwrap();
    let scn = scenario("excursion.scn");
    let out = tmp.path().join("sweep");
    assert_eq!(
        cli(&[
            "sweep",
            scn.to_str().unwrap(),
            "--param",
            "beamsplitter.segment.2.duration",
            "--range",
            "20:24:3",
            "--out",
            out.to_str().unwrap(),
        ]),
        0
    );
    let sweep = std::fs::read_to_string(out.join("sweep.csv")).unwrap();
    let lines: Vec<&str> = sweep.lines().collect();
    assert_eq!(lines[0], "value,beat_frequency,visibility,stationary_phase_diff");
    assert_eq!(lines.len(), 4);
    assert!(lines[1].starts_with("20,"));
    assert!(lines[3].starts_with("24,"));
    for i in 0..3 {
        let sub = out.join(format!("run_{i:03}"));
        for name in &ARTIFACTS {
            assert!(sub.join(name).exists(), "{} missing {name}", sub.display());
        }
    }

    // Unknown sweep keys are rejected before any sub-run writes.
    let out_bad = tmp.path().join("bad");
    assert_eq!(
        cli(&[
            "sweep",
            scn.to_str().unwrap(),
            "--param",
            "beamsplitter.wobble",
            "--range",
            "0:1:2",
            "--out",
            out_bad.to_str().unwrap(),
        ]),
        2
    );
    assert!(!out_bad.exists());
}

#[test]
fn single_value_sweep_matches_a_plain_simulate() {
    let tmp = tempfile::tempdir().unwrap();
    let scn = scenario("shutter.scn");
    let out_sim = tmp.path().join("sim");
    let out_sweep = tmp.path().join("sweep");
    assert_eq!(cli(&["simulate", scn.to_str().unwrap(), "--out", out_sim.to_str().unwrap()]), 0);
    assert_eq!(
        cli(&[
            "sweep",
            scn.to_str().unwrap(),
            "--param",
            "source.crest_spacing",
            "--range",
            "5:5:1",
            "--out",
            out_sweep.to_str().unwrap(),
        ]),
        0
    );
    // The sub-run reproduces the plain run byte for byte (the swept key is
    // set to its existing value).
    let a = read_all(&out_sim);
    let b = read_all(&out_sweep.join("run_000"));
    for ((name, bytes_a), (_, bytes_b)) in a.iter().zip(&b) {
        assert_eq!(bytes_a, bytes_b, "{name} differs from the plain run");
    }
    let sweep = std::fs::read_to_string(out_sweep.join("sweep.csv")).unwrap();
    assert_eq!(sweep.lines().count(), 2);
}
