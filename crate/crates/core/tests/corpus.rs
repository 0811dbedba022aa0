//! The shipped scenario corpus parses, validates, and round-trips; every
//! corrupted variant in the negative corpus is rejected with a located
//! error.

use std::path::PathBuf;

use wavecrest::error::Error;
use wavecrest::scenario_file::{parse_scenario, render_scenario};
use wavecrest::scenarios::{build_excursion_scenario, build_shutter_scenario};
use wavecrest::wavemodel::WaveFamily;

fn repo_scenarios() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../scenarios")
}

fn negative_corpus() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data")
}

#[test]
fn every_shipped_scenario_parses_validates_and_round_trips() {
    let dir = repo_scenarios();
    let mut seen = 0;
    for entry in std::fs::read_dir(&dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().and_then(|e| e.to_str()) != Some("scn") {
            continue;
        }
        seen += 1;
        let text = std::fs::read_to_string(&path).unwrap();
        let sc = parse_scenario(&text)
            .unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        sc.validate()
            .unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        // The shipped files are canonical: parse then re-emit reproduces
        // the bytes exactly.
        assert_eq!(render_scenario(&sc), text, "{} is not canonical", path.display());
    }
    assert!(seen >= 4, "expected the shipped corpus in {}", dir.display());
}

#[test]
fn shipped_files_match_the_built_in_builders() {
    let dir = repo_scenarios();
    let cases = [
        ("excursion.scn", build_excursion_scenario(WaveFamily::Schrodinger)),
        ("excursion_kg.scn", build_excursion_scenario(WaveFamily::KleinGordon)),
        ("excursion_em.scn", build_excursion_scenario(WaveFamily::EmVacuum)),
        ("shutter.scn", build_shutter_scenario(WaveFamily::Schrodinger, 25.0, 0.25)),
    ];
    for (name, built) in cases {
        let text = std::fs::read_to_string(dir.join(name)).unwrap();
        let parsed = parse_scenario(&text).unwrap();
        assert_eq!(parsed, built, "{name} drifted from its builder");
    }
}

#[test]
fn every_negative_file_is_rejected_with_a_location() {
    let dir = negative_corpus();
    let mut seen = 0;
    for entry in std::fs::read_dir(&dir).unwrap() {
        let path = entry.unwrap().path();
        let name = path.file_name().unwrap().to_string_lossy().into_owned();
        if !name.starts_with("bad_") || !name.ends_with(".scn") {
            continue;
        }
        seen += 1;
        let text = std::fs::read_to_string(&path).unwrap();
        let err = parse_scenario(&text).expect_err(&name);
        match err {
            Error::Parse { line, .. } => assert!(line > 0, "{name}: line missing"),
            other => panic!("{name}: expected a parse error, got {other}"),
        }
    }
    assert!(seen >= 8, "expected the negative corpus in {}", dir.display());
}

#[test]
fn segment_kind_error_names_line_and_token() {
    let text =
        std::fs::read_to_string(negative_corpus().join("bad_segment_kind.scn")).unwrap();
    let offending_line = text
        .lines()
        .position(|l| l.contains("coast"))
        .map(|i| i + 1)
        .unwrap();
    match parse_scenario(&text).unwrap_err() {
        Error::Parse { line, message } => {
            assert_eq!(line, offending_line);
            assert!(message.contains("segment"), "{message}");
        }
        other => panic!("expected a parse error, got {other}"),
    }
}
