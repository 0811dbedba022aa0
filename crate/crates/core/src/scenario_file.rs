//! Text format for scenarios, and the run manifest written next to outputs.
//!
//! A scenario file is line-oriented: a preamble of `key = value` lines for
//! the wave model, followed by `[source]`, one or more `[element <label>]`
//! sections, `[detector]`, and `[run]`.  Blank lines and lines starting
//! with `#` are ignored.  `segment` and `switch` keys repeat (in order);
//! every other key appears at most once per section.  Durations accept the
//! word `unbounded` for the final trajectory segment.
//!
//! [`render_scenario`] emits a canonical form: parsing its output
//! reproduces the scenario exactly, field for field.

use std::fmt::Write as _;
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::scattering::SplitterOptics;
use crate::scenarios::{
    AcceptDirection, DetectorSpec, Element, InitialState, OpticsSwitch, RunSettings, Scenario,
    SourceSpec, SwitchKind,
};
use crate::trajectory::{Trajectory, TrajectorySegment};
use crate::wavemodel::{Units, WaveFamily, WaveModel};

fn perr(line: usize, message: impl Into<String>) -> Error {
    Error::Parse { line, message: message.into() }
}

/// One `key = value` occurrence with its 1-based line number.
#[derive(Debug)]
struct Entry {
    line: usize,
    key: String,
    value: String,
    used: bool,
}

/// One section of the file (the preamble is a section with no header).
#[derive(Debug)]
struct Section {
    /// `""` for the preamble, otherwise the header word (`source`, ...).
    name: String,
    /// Element label, for `[element <label>]` headers.
    label: String,
    line: usize,
    entries: Vec<Entry>,
}

impl Section {
    /// The single value for `key`, or an error if it repeats.
    fn take_unique(&mut self, key: &str) -> Result<Option<(usize, String)>> {
        let mut found: Option<(usize, String)> = None;
        for e in self.entries.iter_mut().filter(|e| e.key == key) {
            if found.is_some() {
                return Err(perr(e.line, format!("duplicate key \"{key}\"")));
            }
            e.used = true;
            found = Some((e.line, e.value.clone()));
        }
        Ok(found)
    }

    fn require(&mut self, key: &str) -> Result<(usize, String)> {
        self.take_unique(key)?.ok_or_else(|| {
            perr(
                self.line,
                format!("section [{}] is missing required key \"{key}\"", self.heading()),
            )
        })
    }

    /// All values for a repeatable key, in file order.
    fn take_all(&mut self, key: &str) -> Vec<(usize, String)> {
        self.entries
            .iter_mut()
            .filter(|e| e.key == key)
            .map(|e| {
                e.used = true;
                (e.line, e.value.clone())
            })
            .collect()
    }

    fn heading(&self) -> String {
        if self.label.is_empty() {
            self.name.clone()
        } else {
            format!("{} {}", self.name, self.label)
        }
    }

    /// Error on the first key nothing consumed.
    fn finish(&self) -> Result<()> {
        if let Some(e) = self.entries.iter().find(|e| !e.used) {
            return Err(perr(e.line, format!("unknown key \"{}\"", e.key)));
        }
        Ok(())
    }
}

fn split_sections(text: &str) -> Result<Vec<Section>> {
    let mut sections = vec![Section {
        name: String::new(),
        label: String::new(),
        line: 0,
        entries: Vec::new(),
    }];
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        if let Some(stripped) = trimmed.strip_prefix('[') {
            let inner = stripped
                .strip_suffix(']')
                .ok_or_else(|| perr(line, "section header is missing its closing bracket"))?
                .trim();
            let (name, label) = match inner.split_once(char::is_whitespace) {
                Some((n, l)) => (n.trim().to_string(), l.trim().to_string()),
                None => (inner.to_string(), String::new()),
            };
            match name.as_str() {
                "source" | "detector" | "run" => {
                    if !label.is_empty() {
                        return Err(perr(line, format!("section [{name}] takes no label")));
                    }
                }
                "element" => {
                    if label.is_empty() {
                        return Err(perr(line, "element sections need a label: [element <label>]"));
                    }
                }
                other => return Err(perr(line, format!("unknown section [{other}]"))),
            }
            sections.push(Section { name, label, line, entries: Vec::new() });
            continue;
        }
        let (key, value) = trimmed
            .split_once('=')
            .ok_or_else(|| perr(line, "expected \"key = value\""))?;
        sections.last_mut().unwrap().entries.push(Entry {
            line,
            key: key.trim().to_string(),
            value: value.trim().to_string(),
            used: false,
        });
    }
    Ok(sections)
}

fn parse_f64(line: usize, key: &str, value: &str) -> Result<f64> {
    value
        .parse::<f64>()
        .map_err(|_| perr(line, format!("{key}: \"{value}\" is not a number")))
}

fn parse_u32(line: usize, key: &str, value: &str) -> Result<u32> {
    value
        .parse::<u32>()
        .map_err(|_| perr(line, format!("{key}: \"{value}\" is not a non-negative integer")))
}

fn parse_usize(line: usize, key: &str, value: &str) -> Result<usize> {
    value
        .parse::<usize>()
        .map_err(|_| perr(line, format!("{key}: \"{value}\" is not a non-negative integer")))
}

fn parse_duration(line: usize, value: &str) -> Result<Option<f64>> {
    if value == "unbounded" {
        Ok(None)
    } else {
        parse_f64(line, "duration", value).map(Some)
    }
}

fn build_model(pre: &mut Section) -> Result<WaveModel> {
    let (mline, mval) = pre.require("model")?;
    let family = WaveFamily::parse(&mval).map_err(|e| perr(mline, e.to_string()))?;
    let mut units = Units::default();
    if let Some((l, v)) = pre.take_unique("hbar")? {
        units.hbar = parse_f64(l, "hbar", &v)?;
    }
    if let Some((l, v)) = pre.take_unique("mass")? {
        units.mass = parse_f64(l, "mass", &v)?;
    }
    if let Some((l, v)) = pre.take_unique("light_speed")? {
        units.light_speed = parse_f64(l, "light_speed", &v)?;
    }
    if let Some((l, v)) = pre.take_unique("sound_speed")? {
        units.sound_speed = Some(parse_f64(l, "sound_speed", &v)?);
    }
    Ok(WaveModel::new(family, units))
}

fn build_source(sec: &mut Section) -> Result<SourceSpec> {
    let (l, v) = sec.require("position")?;
    let position = parse_f64(l, "position", &v)?;
    let (l, v) = sec.require("t_on")?;
    let t_on = parse_f64(l, "t_on", &v)?;
    let (l, v) = sec.require("t_off")?;
    let t_off = parse_f64(l, "t_off", &v)?;
    let (l, v) = sec.require("group_speed")?;
    let group_speed = parse_f64(l, "group_speed", &v)?;
    let omega0 = match sec.take_unique("omega0")? {
        Some((l, v)) => Some(parse_f64(l, "omega0", &v)?),
        None => None,
    };
    let (l, v) = sec.require("amplitude")?;
    let amplitude = parse_f64(l, "amplitude", &v)?;
    let (l, v) = sec.require("crest_spacing")?;
    let crest_spacing = parse_f64(l, "crest_spacing", &v)?;
    Ok(SourceSpec { position, t_on, t_off, group_speed, omega0, amplitude, crest_spacing })
}

fn build_element(sec: &mut Section) -> Result<Element> {
    let (l, v) = sec.require("reflectivity")?;
    let reflection = parse_f64(l, "reflectivity", &v)?;
    let transmission = match sec.take_unique("transmission")? {
        Some((l, v)) => Some(parse_f64(l, "transmission", &v)?),
        None => None,
    };
    let interface_phase = match sec.take_unique("interface_phase")? {
        Some((l, v)) => parse_f64(l, "interface_phase", &v)?,
        None => 0.0,
    };
    let optics = match transmission {
        // An explicit transmission is taken verbatim (validation checks the
        // lossless constraint); otherwise it follows from reflectivity.
        Some(t) => SplitterOptics { reflection, transmission: t, interface_phase },
        None => SplitterOptics::from_reflectivity(reflection)
            .map_err(|e| perr(l, e.to_string()))?
            .with_interface_phase(interface_phase),
    };

    let (xl, xv) = sec.require("x0")?;
    let x0 = parse_f64(xl, "x0", &xv)?;
    let t0 = match sec.take_unique("t0")? {
        Some((l, v)) => parse_f64(l, "t0", &v)?,
        None => 0.0,
    };
    let mut segments = Vec::new();
    let seg_entries = sec.take_all("segment");
    if seg_entries.is_empty() {
        return Err(perr(
            sec.line,
            format!("element \"{}\" needs at least one segment", sec.label),
        ));
    }
    for (l, v) in seg_entries {
        let parts: Vec<&str> = v.split(',').map(str::trim).collect();
        let seg = match parts.as_slice() {
            ["rest", d] => TrajectorySegment::rest(parse_duration(l, d)?),
            ["const_velocity", d, vel] => TrajectorySegment::const_velocity(
                parse_duration(l, d)?,
                parse_f64(l, "velocity", vel)?,
            ),
            ["const_accel", d, vel, acc] => TrajectorySegment::const_accel(
                parse_duration(l, d)?,
                parse_f64(l, "velocity0", vel)?,
                parse_f64(l, "accel", acc)?,
            ),
            _ => {
                return Err(perr(
                    l,
                    "segment takes \"rest, <duration>\", \
                     \"const_velocity, <duration>, <velocity>\", or \
                     \"const_accel, <duration>, <velocity0>, <accel>\"",
                ))
            }
        };
        segments.push(seg);
    }
    let trajectory =
        Trajectory::new(x0, t0, segments).map_err(|e| perr(sec.line, e.to_string()))?;

    let initial = match sec.take_unique("initial")? {
        Some((_, v)) if v == "active" => InitialState::Active,
        Some((_, v)) if v == "open" => InitialState::Open,
        Some((l, v)) => {
            return Err(perr(l, format!("initial: \"{v}\" is not \"active\" or \"open\"")))
        }
        None => InitialState::Active,
    };
    let mut switches = Vec::new();
    for (l, v) in sec.take_all("switch") {
        let (kind, time) = v
            .split_once(',')
            .ok_or_else(|| perr(l, "switch takes \"<open|activate>, <time>\""))?;
        let kind = match kind.trim() {
            "open" => SwitchKind::Open,
            "activate" => SwitchKind::Activate,
            other => {
                return Err(perr(l, format!("switch kind \"{other}\" is not open or activate")))
            }
        };
        switches.push(OpticsSwitch { time: parse_f64(l, "switch time", time.trim())?, kind });
    }

    Ok(Element {
        label: sec.label.clone(),
        trajectory,
        optics,
        initial,
        switches,
    })
}

fn build_detector(sec: &mut Section) -> Result<DetectorSpec> {
    let (l, v) = sec.require("position")?;
    let position = parse_f64(l, "position", &v)?;
    let (l, v) = sec.require("accept")?;
    let accept = AcceptDirection::parse(&v).map_err(|e| perr(l, e.to_string()))?;
    Ok(DetectorSpec { position, accept })
}

fn build_run(sec: &mut Section) -> Result<RunSettings> {
    let mut run = RunSettings::default();
    let (l, v) = sec.require("t_max")?;
    run.t_max = parse_f64(l, "t_max", &v)?;
    let (l, v) = sec.require("x_min")?;
    run.x_min = parse_f64(l, "x_min", &v)?;
    let (l, v) = sec.require("x_max")?;
    run.x_max = parse_f64(l, "x_max", &v)?;
    if let Some((l, v)) = sec.take_unique("substeps")? {
        run.substeps = parse_u32(l, "substeps", &v)?;
    }
    if let Some((l, v)) = sec.take_unique("sample_rate")? {
        run.sample_rate = Some(parse_f64(l, "sample_rate", &v)?);
    }
    if let Some((l, v)) = sec.take_unique("amp_floor")? {
        run.amp_floor = parse_f64(l, "amp_floor", &v)?;
    }
    if let Some((l, v)) = sec.take_unique("max_depth")? {
        run.max_depth = parse_u32(l, "max_depth", &v)?;
    }
    if let Some((l, v)) = sec.take_unique("max_events")? {
        run.max_events = parse_usize(l, "max_events", &v)?;
    }
    Ok(run)
}

/// Parse a scenario from text.  The result is structurally complete but not
/// yet validated; run [`Scenario::validate`] before simulating.
pub fn parse_scenario(text: &str) -> Result<Scenario> {
    let mut sections = split_sections(text)?;

    let mut model = None;
    let mut source = None;
    let mut elements = Vec::new();
    let mut detector = None;
    let mut run = None;
    for sec in &mut sections {
        match sec.name.as_str() {
            "" => model = Some(build_model(sec)?),
            "source" => {
                if source.is_some() {
                    return Err(perr(sec.line, "more than one [source] section"));
                }
                source = Some(build_source(sec)?);
            }
            "element" => elements.push(build_element(sec)?),
            "detector" => {
                if detector.is_some() {
                    return Err(perr(sec.line, "more than one [detector] section"));
                }
                detector = Some(build_detector(sec)?);
            }
            "run" => {
                if run.is_some() {
                    return Err(perr(sec.line, "more than one [run] section"));
                }
                run = Some(build_run(sec)?);
            }
            _ => unreachable!("split_sections rejects unknown names"),
        }
        sec.finish()?;
    }

    let model = model.ok_or_else(|| perr(1, "missing model preamble (key \"model\")"))?;
    Ok(Scenario {
        model,
        source: source.ok_or_else(|| perr(1, "missing [source] section"))?,
        elements,
        detector: detector.ok_or_else(|| perr(1, "missing [detector] section"))?,
        run: run.ok_or_else(|| perr(1, "missing [run] section"))?,
    })
}

fn push_kv(out: &mut String, key: &str, value: impl std::fmt::Display) {
    let _ = writeln!(out, "{key} = {value}");
}

/// Emit the canonical text form.  All floats use the shortest
/// representation that re-parses to the identical bits, so
/// `parse_scenario(render_scenario(sc)) == sc` exactly.
pub fn render_scenario(sc: &Scenario) -> String {
    let mut out = String::new();
    push_kv(&mut out, "model", sc.model.family.name());
    push_kv(&mut out, "hbar", sc.model.units.hbar);
    push_kv(&mut out, "mass", sc.model.units.mass);
    push_kv(&mut out, "light_speed", sc.model.units.light_speed);
    if let Some(cs) = sc.model.units.sound_speed {
        push_kv(&mut out, "sound_speed", cs);
    }

    out.push_str("\n[source]\n");
    push_kv(&mut out, "position", sc.source.position);
    push_kv(&mut out, "t_on", sc.source.t_on);
    push_kv(&mut out, "t_off", sc.source.t_off);
    push_kv(&mut out, "group_speed", sc.source.group_speed);
    if let Some(w0) = sc.source.omega0 {
        push_kv(&mut out, "omega0", w0);
    }
    push_kv(&mut out, "amplitude", sc.source.amplitude);
    push_kv(&mut out, "crest_spacing", sc.source.crest_spacing);

    for el in &sc.elements {
        let _ = writeln!(out, "\n[element {}]", el.label);
        push_kv(&mut out, "reflectivity", el.optics.reflection);
        push_kv(&mut out, "transmission", el.optics.transmission);
        push_kv(&mut out, "interface_phase", el.optics.interface_phase);
        push_kv(&mut out, "x0", el.trajectory.x0());
        push_kv(&mut out, "t0", el.trajectory.t0());
        for seg in el.trajectory.segments() {
            let dur = match seg.duration {
                Some(d) => d.to_string(),
                None => "unbounded".to_string(),
            };
            if seg.accel != 0.0 {
                let _ = writeln!(
                    out,
                    "segment = const_accel, {dur}, {}, {}",
                    seg.velocity0, seg.accel
                );
            } else if seg.velocity0 != 0.0 {
                let _ = writeln!(out, "segment = const_velocity, {dur}, {}", seg.velocity0);
            } else {
                let _ = writeln!(out, "segment = rest, {dur}");
            }
        }
        let initial = match el.initial {
            InitialState::Active => "active",
            InitialState::Open => "open",
        };
        push_kv(&mut out, "initial", initial);
        for sw in &el.switches {
            let _ = writeln!(out, "switch = {}, {}", sw.kind.name(), sw.time);
        }
    }

    out.push_str("\n[detector]\n");
    push_kv(&mut out, "position", sc.detector.position);
    push_kv(&mut out, "accept", sc.detector.accept.name());

    out.push_str("\n[run]\n");
    push_kv(&mut out, "t_max", sc.run.t_max);
    push_kv(&mut out, "x_min", sc.run.x_min);
    push_kv(&mut out, "x_max", sc.run.x_max);
    push_kv(&mut out, "substeps", sc.run.substeps);
    if let Some(rate) = sc.run.sample_rate {
        push_kv(&mut out, "sample_rate", rate);
    }
    push_kv(&mut out, "amp_floor", sc.run.amp_floor);
    push_kv(&mut out, "max_depth", sc.run.max_depth);
    push_kv(&mut out, "max_events", sc.run.max_events);
    out
}

/// Overwrite one numeric field addressed by a dotted key, as used by
/// parameter sweeps.
///
/// Supported keys: `source.<field>`, `detector.position`, `run.<field>`,
/// and per element `<label>.reflectivity`, `<label>.interface_phase`,
/// `<label>.x0`, `<label>.t0`, `<label>.segment.<i>.<field>` (field one of
/// `duration`, `velocity0`, `accel`), and `<label>.switch.<i>.time`.
/// Trajectory edits are re-validated (continuity, final segment unbounded).
pub fn set_scenario_value(sc: &mut Scenario, dotted_key: &str, value: f64) -> Result<()> {
    let parts: Vec<&str> = dotted_key.split('.').collect();
    let bad = || Error::invalid(format!("\"{dotted_key}\" is not a sweepable numeric key"));
    match parts.as_slice() {
        ["source", field] => {
            let s = &mut sc.source;
            match *field {
                "position" => s.position = value,
                "t_on" => s.t_on = value,
                "t_off" => s.t_off = value,
                "group_speed" => s.group_speed = value,
                "omega0" => s.omega0 = Some(value),
                "amplitude" => s.amplitude = value,
                "crest_spacing" => s.crest_spacing = value,
                _ => return Err(bad()),
            }
        }
        ["detector", "position"] => sc.detector.position = value,
        ["run", field] => {
            let r = &mut sc.run;
            match *field {
                "t_max" => r.t_max = value,
                "x_min" => r.x_min = value,
                "x_max" => r.x_max = value,
                "amp_floor" => r.amp_floor = value,
                "sample_rate" => r.sample_rate = Some(value),
                _ => return Err(bad()),
            }
        }
        [label, rest @ ..] => {
            let el = sc
                .elements
                .iter_mut()
                .find(|e| e.label == *label)
                .ok_or_else(|| {
                    Error::invalid(format!("no element labelled \"{label}\" to sweep"))
                })?;
            match rest {
                ["reflectivity"] => {
                    let chi = el.optics.interface_phase;
                    el.optics = SplitterOptics::from_reflectivity(value)?
                        .with_interface_phase(chi);
                }
                ["interface_phase"] => el.optics.interface_phase = value,
                ["x0"] | ["t0"] | ["segment", _, _] => {
                    let mut x0 = el.trajectory.x0();
                    let mut t0 = el.trajectory.t0();
                    let mut segments = el.trajectory.segments().to_vec();
                    match rest {
                        ["x0"] => x0 = value,
                        ["t0"] => t0 = value,
                        ["segment", idx, field] => {
                            let idx: usize = idx.parse().map_err(|_| bad())?;
                            let seg = segments.get_mut(idx).ok_or_else(|| {
                                Error::invalid(format!(
                                    "element \"{label}\" has no segment {idx}"
                                ))
                            })?;
                            match *field {
                                "duration" => seg.duration = Some(value),
                                "velocity0" => seg.velocity0 = value,
                                "accel" => seg.accel = value,
                                _ => return Err(bad()),
                            }
                        }
                        _ => unreachable!(),
                    }
                    el.trajectory = Trajectory::new(x0, t0, segments)?;
                }
                ["switch", idx, "time"] => {
                    let idx: usize = idx.parse().map_err(|_| bad())?;
                    let sw = el.switches.get_mut(idx).ok_or_else(|| {
                        Error::invalid(format!("element \"{label}\" has no switch {idx}"))
                    })?;
                    sw.time = value;
                }
                _ => return Err(bad()),
            }
        }
        _ => return Err(bad()),
    }
    Ok(())
}

/// Read and parse a scenario file, returning the scenario together with the
/// raw text (which the manifest digests).
pub fn load_scenario(path: &Path) -> Result<(Scenario, String)> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    let sc = parse_scenario(&text)?;
    Ok((sc, text))
}

/// Lowercase hex SHA-256 of arbitrary bytes.
pub fn sha256_hex(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    let digest = hasher.finalize();
    let mut out = String::with_capacity(64);
    for b in digest {
        let _ = write!(out, "{b:02x}");
    }
    out
}

/// Identity of one run: the digest of the scenario text that produced it,
/// the crate version, and the artifact files written.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunManifest {
    pub digest: String,
    pub version: String,
    pub outputs: Vec<String>,
}

impl RunManifest {
    pub fn new(scenario_text: &str) -> Self {
        RunManifest {
            digest: sha256_hex(scenario_text.as_bytes()),
            version: env!("CARGO_PKG_VERSION").to_string(),
            outputs: Vec::new(),
        }
    }

    pub fn render(&self) -> String {
        format!(
            "digest = {}\nversion = {}\noutputs = {}\n",
            self.digest,
            self.version,
            self.outputs.join(";")
        )
    }
}
