//! Python bindings for the wave-crest simulator: scenario construction,
//! event-driven runs, interference summaries, and the closed-form helpers,
//! all backed by the native engine.

use std::path::PathBuf;

use num_complex::Complex64;
use pyo3::exceptions::{PyIOError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use wavecrest::csvio;
use wavecrest::detector::{
    analyze, detector_segments, superpose, DetectorSegment, InterferenceReport, PairSummary,
};
use wavecrest::error::Error;
use wavecrest::scattering;
use wavecrest::scenario_file;
use wavecrest::scenarios::{self, Scenario};
use wavecrest::tracer::{self, SimulationResult};
use wavecrest::wavemodel::{PlaneWave, Units, WaveFamily, WaveModel};

fn pyerr(e: Error) -> PyErr {
    match &e {
        Error::InvalidInput(_) | Error::Validation(_) | Error::Parse { .. } => {
            PyValueError::new_err(e.to_string())
        }
        Error::Io { .. } => PyIOError::new_err(e.to_string()),
        Error::EventExplosion { .. } | Error::UnreachablePath => {
            PyRuntimeError::new_err(e.to_string())
        }
    }
}

fn model_for(
    family: &str,
    hbar: f64,
    mass: f64,
    light_speed: f64,
    sound_speed: Option<f64>,
) -> PyResult<WaveModel> {
    let fam = WaveFamily::parse(family).map_err(pyerr)?;
    Ok(WaveModel::new(fam, Units { hbar, mass, light_speed, sound_speed }))
}

fn pair_tuple(p: &PairSummary) -> (String, String, f64, f64, f64) {
    (p.stronger.tag(), p.weaker.tag(), p.window.0, p.window.1, p.visibility)
}

/// A fully specified run: wave family and units, one source, moving
/// splitter elements, a detector, and run bounds.
#[pyclass(name = "Scenario", module = "wavecrest")]
#[derive(Clone)]
struct PyScenario {
    inner: Scenario,
}

#[pymethods]
impl PyScenario {
    /// The canned splitter-excursion arrangement for the given family
    /// ("schrodinger", "klein_gordon", or "em_vacuum").
    #[staticmethod]
    fn excursion(family: &str) -> PyResult<Self> {
        let fam = WaveFamily::parse(family).map_err(pyerr)?;
        Ok(PyScenario { inner: scenarios::build_excursion_scenario(fam) })
    }

    /// The canned two-gate shutter arrangement: each gate stays open for
    /// `tau`, the second opening delayed by `alpha * tau`.
    #[staticmethod]
    fn shutter(family: &str, tau: f64, alpha: f64) -> PyResult<Self> {
        let fam = WaveFamily::parse(family).map_err(pyerr)?;
        Ok(PyScenario { inner: scenarios::build_shutter_scenario(fam, tau, alpha) })
    }

    /// Parse scenario text in the `.scn` format.
    #[staticmethod]
    fn parse(text: &str) -> PyResult<Self> {
        Ok(PyScenario { inner: scenario_file::parse_scenario(text).map_err(pyerr)? })
    }

    /// Load and parse a `.scn` file.
    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        let (inner, _text) = scenario_file::load_scenario(&path).map_err(pyerr)?;
        Ok(PyScenario { inner })
    }

    /// Canonical `.scn` text for this scenario.
    fn render(&self) -> String {
        scenario_file::render_scenario(&self.inner)
    }

    /// Raise ValueError listing every violated constraint, if any.
    fn validate(&self) -> PyResult<()> {
        self.inner.validate().map_err(pyerr)
    }

    /// Overwrite one numeric field addressed by a dotted key, e.g.
    /// `source.group_speed` or `beamsplitter.segment.2.duration`.
    fn set_value(&mut self, key: &str, value: f64) -> PyResult<()> {
        scenario_file::set_scenario_value(&mut self.inner, key, value).map_err(pyerr)
    }

    /// Run the event-driven tracer and analyze the detector record.
    #[pyo3(signature = (sample_rate=None))]
    fn simulate(&self, sample_rate: Option<f64>) -> PyResult<PyRunOutcome> {
        self.inner.validate().map_err(pyerr)?;
        let result = tracer::run(&self.inner).map_err(pyerr)?;
        let segments = detector_segments(&self.inner, &result);
        let report = analyze(&self.inner, &segments);
        Ok(PyRunOutcome { sc: self.inner.clone(), sample_rate, result, segments, report })
    }

    #[getter]
    fn family(&self) -> &'static str {
        self.inner.model.family.name()
    }

    #[getter]
    fn element_labels(&self) -> Vec<String> {
        self.inner.elements.iter().map(|e| e.label.clone()).collect()
    }

    #[getter]
    fn detector_position(&self) -> f64 {
        self.inner.detector.position
    }

    #[getter]
    fn t_max(&self) -> f64 {
        self.inner.run.t_max
    }

    /// `(wavevector, omega)` of the emitted plane wave.
    fn source_wave(&self) -> PyResult<(f64, f64)> {
        let w = self.inner.source_wave().map_err(pyerr)?;
        Ok((w.wavevector, w.omega))
    }

    fn __repr__(&self) -> String {
        format!(
            "Scenario(family='{}', elements={}, t_max={})",
            self.inner.model.family.name(),
            self.inner.elements.len(),
            self.inner.run.t_max
        )
    }
}

/// The finished product of one run: the event record plus the detector
/// interference report.
#[pyclass(name = "RunOutcome", module = "wavecrest")]
struct PyRunOutcome {
    sc: Scenario,
    sample_rate: Option<f64>,
    result: SimulationResult,
    segments: Vec<DetectorSegment>,
    report: InterferenceReport,
}

#[pymethods]
impl PyRunOutcome {
    #[getter]
    fn train_count(&self) -> usize {
        self.result.trains.len()
    }

    #[getter]
    fn event_count(&self) -> usize {
        self.result.events.len()
    }

    /// Number of events where an element swept past crests from behind.
    #[getter]
    fn overtake_events(&self) -> usize {
        self.result.overtake_events()
    }

    /// Fitted beat frequency of the strongest transient pair, if any.
    #[getter]
    fn beat_frequency(&self) -> Option<f64> {
        self.report.beat_frequency()
    }

    /// Phase difference of the strongest equal-frequency pair, in [0, 2pi).
    #[getter]
    fn stationary_phase(&self) -> Option<f64> {
        self.report.stationary_phase_diff()
    }

    /// Fringe contrast of the stationary pair; 0.0 when no pair exists.
    #[getter]
    fn visibility(&self) -> f64 {
        self.report.stationary_visibility()
    }

    /// `(stronger, weaker, t_start, t_end, visibility)` of the stationary
    /// pair, or None.
    fn stationary_pair(&self) -> Option<(String, String, f64, f64, f64)> {
        self.report.stationary.as_ref().map(|s| pair_tuple(&s.pair))
    }

    /// `(seed_frequency, fitted_frequency, low_confidence)` of the beat
    /// pair, or None.
    fn beat(&self) -> Option<(f64, f64, bool)> {
        self.report
            .beat
            .as_ref()
            .map(|b| (b.seed_frequency, b.fitted_frequency, b.low_confidence))
    }

    /// Coverage partition rows: `(t_start, t_end, visibility, mean_intensity)`.
    fn windows(&self) -> Vec<(f64, f64, f64, f64)> {
        self.report
            .windows
            .iter()
            .map(|w| (w.t_start, w.t_end, w.visibility, w.mean_intensity))
            .collect()
    }

    /// Detector coverage: `(owner, omega, wavevector, t_in, t_out)` rows.
    fn coverage(&self) -> Vec<(String, f64, f64, f64, f64)> {
        self.segments
            .iter()
            .map(|s| (s.owner.tag(), s.wave.omega, s.wave.wavevector, s.t_in, s.t_out))
            .collect()
    }

    /// Sampled detector field: `(t, re, im, pdf)` rows.
    fn trace(&self) -> Vec<(f64, f64, f64, f64)> {
        let trace = superpose(&self.sc, &self.segments, self.sample_rate);
        trace
            .times
            .iter()
            .zip(&trace.field)
            .map(|(&t, f)| (t, f.re, f.im, f.norm_sqr()))
            .collect()
    }

    fn events_csv(&self) -> String {
        csvio::events_csv(&self.result)
    }

    fn worldlines_csv(&self) -> String {
        csvio::worldlines_csv(&self.sc, &self.result)
    }

    fn segments_csv(&self) -> String {
        csvio::segments_csv(&self.segments)
    }

    fn report_csv(&self) -> String {
        csvio::report_csv(&self.report, self.sc.run.t_max)
    }

    fn __repr__(&self) -> String {
        format!(
            "RunOutcome(trains={}, events={}, overtakes={}, visibility={:.6})",
            self.result.trains.len(),
            self.result.events.len(),
            self.result.overtake_events(),
            self.report.stationary_visibility()
        )
    }
}

/// `(omega, phase_velocity, group_velocity)` for a wavevector under the
/// named family's dispersion relation.
#[pyfunction]
#[pyo3(signature = (family, wavevector, hbar=1.0, mass=1.0, light_speed=10.0, sound_speed=None))]
fn dispersion(
    family: &str,
    wavevector: f64,
    hbar: f64,
    mass: f64,
    light_speed: f64,
    sound_speed: Option<f64>,
) -> PyResult<(f64, f64, f64)> {
    let model = model_for(family, hbar, mass, light_speed, sound_speed)?;
    let omega = model.dispersion_omega(wavevector);
    let vp = model.phase_velocity(wavevector).map_err(pyerr)?;
    let vg = model.group_velocity(wavevector).map_err(pyerr)?;
    Ok((omega, vp, vg))
}

/// `(k_r, omega_r)` of the wave reflected off an element moving at
/// `element_velocity`, by the family's own velocity-composition rule.
#[pyfunction]
#[pyo3(signature = (family, wavevector, element_velocity, hbar=1.0, mass=1.0, light_speed=10.0, sound_speed=None))]
fn reflection_kinematics(
    family: &str,
    wavevector: f64,
    element_velocity: f64,
    hbar: f64,
    mass: f64,
    light_speed: f64,
    sound_speed: Option<f64>,
) -> PyResult<(f64, f64)> {
    let model = model_for(family, hbar, mass, light_speed, sound_speed)?;
    scattering::reflection_kinematics(&model, wavevector, element_velocity).map_err(pyerr)
}

/// `(k', omega', phase0')` of a plane wave seen from a frame moving at
/// `velocity` (Galilean for matter waves).
#[pyfunction]
#[pyo3(signature = (family, wavevector, velocity, phase0=0.0, hbar=1.0, mass=1.0, light_speed=10.0, sound_speed=None))]
fn boost(
    family: &str,
    wavevector: f64,
    velocity: f64,
    phase0: f64,
    hbar: f64,
    mass: f64,
    light_speed: f64,
    sound_speed: Option<f64>,
) -> PyResult<(f64, f64, f64)> {
    let model = model_for(family, hbar, mass, light_speed, sound_speed)?;
    let wave = PlaneWave::from_wavevector(&model, wavevector, Complex64::new(1.0, 0.0), phase0);
    let b = scattering::galilean_boost(&model, &wave, velocity).map_err(pyerr)?;
    Ok((b.wavevector, b.omega, b.phase0))
}

/// Phase accumulated between the two arms of a displaced-reflector
/// arrangement: `2 k L`.
#[pyfunction]
fn grating_phase_difference(wavevector: f64, displacement: f64) -> f64 {
    scenarios::grating_phase_difference(wavevector, displacement)
}

/// Duration of the two-gate group-delay overlap: `tau * (1 - alpha)`.
#[pyfunction]
fn shutter_overlap_window(tau: f64, alpha: f64) -> PyResult<f64> {
    scenarios::shutter_overlap_window(tau, alpha).map_err(pyerr)
}

/// Whether light admitted before `t_close` still reaches the far gate in
/// time: `t_open - t_close < separation / light_speed`.
#[pyfunction]
fn em_shutter_overlap(t_close: f64, t_open: f64, separation: f64, light_speed: f64) -> bool {
    scenarios::em_shutter_overlap(t_close, t_open, separation, light_speed)
}

/// Frequency shift of a matter wave crossing a thin slab of index `n` in
/// a uniform field: `m g L (1 - n) / (n hbar)`.
#[pyfunction]
fn slab_transmission_shift(
    mass: f64,
    field_strength: f64,
    length: f64,
    index: f64,
    hbar: f64,
) -> PyResult<f64> {
    scenarios::slab_transmission_shift(mass, field_strength, length, index, hbar).map_err(pyerr)
}

#[pymodule]
#[pyo3(name = "wavecrest")]
fn bindings(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyScenario>()?;
    m.add_class::<PyRunOutcome>()?;
    m.add_function(wrap_pyfunction!(dispersion, m)?)?;
    m.add_function(wrap_pyfunction!(reflection_kinematics, m)?)?;
    m.add_function(wrap_pyfunction!(boost, m)?)?;
    m.add_function(wrap_pyfunction!(grating_phase_difference, m)?)?;
    m.add_function(wrap_pyfunction!(shutter_overlap_window, m)?)?;
    m.add_function(wrap_pyfunction!(em_shutter_overlap, m)?)?;
    m.add_function(wrap_pyfunction!(slab_transmission_shift, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
