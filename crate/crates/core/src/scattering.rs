//! Frame changes and scattering of plane waves at a moving partial mirror.
//!
//! The element is an idealized zero-thickness splitter with amplitude
//! reflectivity `r`, transmissivity `t`, and an extra phase picked up on the
//! reflected branch only.  Scattering happens at one spacetime event; the
//! reflected wave's constant phase is chosen so that the total phase is
//! continuous across that event, and the transmitted wave copies the incident
//! `(k, omega, phase0)` bit-for-bit with only its amplitude rescaled.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::wavemodel::{PlaneWave, WaveFamily, WaveModel};

/// Amplitude response of a splitter interface.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitterOptics {
    /// Amplitude reflectivity, in `[0, 1]`.
    pub reflection: f64,
    /// Amplitude transmissivity, in `[0, 1]`.
    pub transmission: f64,
    /// Phase added to the reflected branch at the interface.
    pub interface_phase: f64,
}

impl SplitterOptics {
    /// 50/50 splitter (`r = t = 1/sqrt(2)`), no interface phase.
    pub fn balanced() -> Self {
        SplitterOptics {
            reflection: std::f64::consts::FRAC_1_SQRT_2,
            transmission: std::f64::consts::FRAC_1_SQRT_2,
            interface_phase: 0.0,
        }
    }

    /// Perfect mirror.
    pub fn mirror() -> Self {
        SplitterOptics {
            reflection: 1.0,
            transmission: 0.0,
            interface_phase: 0.0,
        }
    }

    /// No interaction at all.
    pub fn transparent() -> Self {
        SplitterOptics {
            reflection: 0.0,
            transmission: 1.0,
            interface_phase: 0.0,
        }
    }

    /// Lossless splitter with the given amplitude reflectivity;
    /// `t = sqrt(1 - r^2)`.
    pub fn from_reflectivity(r: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&r) {
            return Err(Error::invalid(format!(
                "reflectivity must lie in [0, 1] (got {r})"
            )));
        }
        Ok(SplitterOptics {
            reflection: r,
            transmission: (1.0 - r * r).sqrt(),
            interface_phase: 0.0,
        })
    }

    pub fn with_interface_phase(mut self, phase: f64) -> Self {
        self.interface_phase = phase;
        self
    }

    /// Constraint violations (empty when the optics are usable).  The
    /// interface must be lossless: `r^2 + t^2 = 1` to within `1e-9`.
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        if !(0.0..=1.0).contains(&self.reflection) {
            out.push(format!(
                "reflectivity must lie in [0, 1] (got {})",
                self.reflection
            ));
        }
        if !(0.0..=1.0).contains(&self.transmission) {
            out.push(format!(
                "transmissivity must lie in [0, 1] (got {})",
                self.transmission
            ));
        }
        let closure = self.reflection * self.reflection + self.transmission * self.transmission;
        if (closure - 1.0).abs() > 1e-9 {
            out.push(format!(
                "interface is not lossless: r^2 + t^2 = {closure} (must equal 1)"
            ));
        }
        if !self.interface_phase.is_finite() {
            out.push("interface phase must be finite".into());
        }
        out
    }
}

/// Reflected and transmitted components produced by one scattering event.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScatterProducts {
    pub reflected: PlaneWave,
    pub transmitted: PlaneWave,
}

/// Map a non-relativistic matter wave into coordinates moving at velocity
/// `velocity`.
///
/// The wavevector and frequency transform as `k' = k - mV/hbar` and
/// `omega' = omega - kV + mV^2/(2 hbar)`, which keeps the transformed pair on
/// the dispersion branch exactly.  The constant phase and amplitude are kept
/// unchanged, so boosting by `V` and then by `-V` is the identity.
pub fn galilean_boost(model: &WaveModel, wave: &PlaneWave, velocity: f64) -> Result<PlaneWave> {
    if model.family != WaveFamily::Schrodinger {
        return Err(Error::invalid(
            "galilean_boost applies to the non-relativistic matter-wave family only",
        ));
    }
    let u = &model.units;
    let k2 = wave.wavevector - u.mass * velocity / u.hbar;
    let w2 = wave.omega - wave.wavevector * velocity
        + u.mass * velocity * velocity / (2.0 * u.hbar);
    Ok(PlaneWave {
        wavevector: k2,
        omega: w2,
        amplitude: wave.amplitude,
        phase0: wave.phase0,
    })
}

/// Map a wave into coordinates moving at `velocity` with the relativistic
/// rules `omega' = gamma (omega - V k)` and `k' = gamma (k - V omega / c^2)`.
/// The constant phase and amplitude are kept unchanged.
pub fn lorentz_boost(wave: &PlaneWave, velocity: f64, light_speed: f64) -> Result<PlaneWave> {
    let c = light_speed;
    if !(c > 0.0) {
        return Err(Error::invalid("light speed must be positive"));
    }
    if velocity.abs() >= c {
        return Err(Error::invalid(format!(
            "boost speed {} is not below the light speed {}",
            velocity, c
        )));
    }
    let gamma = 1.0 / (1.0 - (velocity / c) * (velocity / c)).sqrt();
    Ok(PlaneWave {
        wavevector: gamma * (wave.wavevector - velocity * wave.omega / (c * c)),
        omega: gamma * (wave.omega - velocity * wave.wavevector),
        amplitude: wave.amplitude,
        phase0: wave.phase0,
    })
}

/// Reflected wavevector for an incident wavevector `k` bouncing off an
/// element moving at constant velocity `v_elem`, per family:
///
/// * matter (non-relativistic): momentum reversal in the element frame,
///   `k_r = 2 m V / hbar - k`;
/// * matter (relativistic) and light: boost to the element frame, flip the
///   wavevector, boost back;
/// * sound: frequency matching on the moving boundary in the medium frame,
///   `|k_r| = |k| (c_s - sV) / (c_s + sV)` with `s = sign(k)`.
///
/// The returned frequency is re-evaluated on the model's dispersion branch so
/// that equal wavevectors always carry bitwise-equal frequencies.
pub fn reflection_kinematics(model: &WaveModel, k: f64, v_elem: f64) -> Result<(f64, f64)> {
    if k == 0.0 {
        return Err(Error::invalid("cannot reflect a zero wavevector"));
    }
    let u = &model.units;
    let k_r = match model.family {
        WaveFamily::Schrodinger => 2.0 * u.mass * v_elem / u.hbar - k,
        WaveFamily::KleinGordon | WaveFamily::EmVacuum => {
            let c = u.light_speed;
            if v_elem.abs() >= c {
                return Err(Error::invalid(format!(
                    "element speed {} is not below the light speed {}",
                    v_elem, c
                )));
            }
            let incident = PlaneWave {
                wavevector: k,
                omega: model.dispersion_omega(k),
                amplitude: Complex64::new(1.0, 0.0),
                phase0: 0.0,
            };
            let in_frame = lorentz_boost(&incident, v_elem, c)?;
            let flipped = PlaneWave {
                wavevector: -in_frame.wavevector,
                ..in_frame
            };
            lorentz_boost(&flipped, -v_elem, c)?.wavevector
        }
        WaveFamily::Acoustic => {
            let cs = u
                .sound_speed
                .ok_or_else(|| Error::invalid("acoustic model requires sound_speed"))?;
            if v_elem.abs() >= cs {
                return Err(Error::invalid(format!(
                    "element speed {} is not below the sound speed {}",
                    v_elem, cs
                )));
            }
            let s = k.signum();
            -s * k.abs() * (cs - s * v_elem) / (cs + s * v_elem)
        }
    };
    Ok((k_r, model.dispersion_omega(k_r)))
}

/// Transmitted component: the incident `(k, omega, phase0)` copied
/// bit-for-bit, amplitude scaled by the interface transmissivity.
pub fn transmit(incident: &PlaneWave, optics: &SplitterOptics) -> PlaneWave {
    PlaneWave {
        wavevector: incident.wavevector,
        omega: incident.omega,
        amplitude: incident.amplitude * optics.transmission,
        phase0: incident.phase0,
    }
}

/// Scatter `incident` off an element moving at `v_elem` whose worldline
/// passes through the event `(x_event, t_event)`.
///
/// The reflected wave's constant phase makes the total phase continuous at
/// the event and adds the interface phase; the transmitted wave is a verbatim
/// copy with a rescaled amplitude.
pub fn reflect_at_event(
    model: &WaveModel,
    incident: &PlaneWave,
    optics: &SplitterOptics,
    v_elem: f64,
    x_event: f64,
    t_event: f64,
) -> Result<ScatterProducts> {
    let (k_r, w_r) = reflection_kinematics(model, incident.wavevector, v_elem)?;
    let incident_phase = incident.phase_at(x_event, t_event);
    let phase0_r = incident_phase - (k_r * x_event - w_r * t_event) + optics.interface_phase;
    Ok(ScatterProducts {
        reflected: PlaneWave {
            wavevector: k_r,
            omega: w_r,
            amplitude: incident.amplitude * optics.reflection,
            phase0: phase0_r,
        },
        transmitted: transmit(incident, optics),
    })
}

/// Scatter off an element whose worldline passes through the origin event
/// `(x, t) = (0, 0)`; a convenient anchor for single-interaction studies.
pub fn reflect_at_moving_splitter(
    model: &WaveModel,
    incident: &PlaneWave,
    v_elem: f64,
    optics: &SplitterOptics,
) -> Result<ScatterProducts> {
    reflect_at_event(model, incident, optics, v_elem, 0.0, 0.0)
}

/// One entry of a reflection survey over an accelerating interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReflectionStep {
    /// Midpoint time of the subinterval (measured from the interval start).
    pub t_mid: f64,
    /// Element velocity at that midpoint.
    pub v_mid: f64,
    /// Reflected component for a scatter at that velocity.
    pub reflected: PlaneWave,
}

/// Survey the reflected wave across an accelerating pass by splitting
/// `[0, duration]` into `substeps` equal subintervals and scattering at each
/// subinterval's midpoint velocity `v0 + accel * t_mid`.
///
/// This is a kinematic survey: every entry is anchored at the origin event
/// and carries amplitude `|incident| * r`, so the list describes the
/// frequency chirp, not an amplitude budget.
pub fn comoving_reflection_sequence(
    model: &WaveModel,
    incident: &PlaneWave,
    v0: f64,
    accel: f64,
    duration: f64,
    substeps: u32,
    optics: &SplitterOptics,
) -> Result<Vec<ReflectionStep>> {
    if !(duration > 0.0) {
        return Err(Error::invalid(format!(
            "duration must be positive (got {duration})"
        )));
    }
    if substeps == 0 {
        return Err(Error::invalid("substeps must be at least 1"));
    }
    let n = substeps as usize;
    let mut out = Vec::with_capacity(n);
    for j in 0..n {
        let t_mid = duration * (j as f64 + 0.5) / (n as f64);
        let v_mid = v0 + accel * t_mid;
        let products = reflect_at_moving_splitter(model, incident, v_mid, optics)?;
        out.push(ReflectionStep {
            t_mid,
            v_mid,
            reflected: products.reflected,
        });
    }
    Ok(out)
}
