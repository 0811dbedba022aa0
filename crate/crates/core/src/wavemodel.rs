//! Wave families, dispersion relations, and plane-wave bookkeeping.
//!
//! Every simulation runs under one [`WaveModel`]: a dispersion family plus
//! the physical constants it needs.  A [`PlaneWave`] is a single harmonic
//! component `amplitude * exp(i*(k*x - omega*t + phase0))`; trains and crests
//! elsewhere in the crate carry one of these around and rely on the model for
//! phase and group speeds.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Dispersion family selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WaveFamily {
    /// Non-relativistic matter wave: `omega = hbar k^2 / (2 m)`.
    Schrodinger,
    /// Relativistic matter wave, positive-frequency branch:
    /// `omega = sqrt((c k)^2 + (m c^2 / hbar)^2)`.
    KleinGordon,
    /// Light in vacuum: `omega = c |k|`.
    EmVacuum,
    /// Sound in a still medium: `omega = c_s |k|`.
    Acoustic,
}

impl WaveFamily {
    /// Stable lower-case name used in files and CLI output.
    pub fn name(self) -> &'static str {
        match self {
            WaveFamily::Schrodinger => "schrodinger",
            WaveFamily::KleinGordon => "klein_gordon",
            WaveFamily::EmVacuum => "em_vacuum",
            WaveFamily::Acoustic => "acoustic",
        }
    }

    /// Parse the name produced by [`WaveFamily::name`].
    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "schrodinger" => Ok(WaveFamily::Schrodinger),
            "klein_gordon" => Ok(WaveFamily::KleinGordon),
            "em_vacuum" => Ok(WaveFamily::EmVacuum),
            "acoustic" => Ok(WaveFamily::Acoustic),
            other => Err(Error::invalid(format!(
                "unknown wave family \"{other}\" (expected schrodinger, klein_gordon, em_vacuum, or acoustic)"
            ))),
        }
    }
}

/// Physical constants shared by a run.
///
/// `sound_speed` is only consulted by the acoustic family; the other fields
/// are ignored by families that do not use them.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Units {
    pub hbar: f64,
    pub mass: f64,
    pub light_speed: f64,
    pub sound_speed: Option<f64>,
}

impl Default for Units {
    fn default() -> Self {
        Units {
            hbar: 1.0,
            mass: 1.0,
            light_speed: 10.0,
            sound_speed: None,
        }
    }
}

/// A dispersion family together with its constants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaveModel {
    pub family: WaveFamily,
    pub units: Units,
}

impl WaveModel {
    pub fn new(family: WaveFamily, units: Units) -> Self {
        WaveModel { family, units }
    }

    /// Non-relativistic matter-wave model with the given constants.
    pub fn schrodinger(hbar: f64, mass: f64) -> Self {
        WaveModel::new(
            WaveFamily::Schrodinger,
            Units {
                hbar,
                mass,
                ..Units::default()
            },
        )
    }

    /// Relativistic matter-wave model with the given constants.
    pub fn klein_gordon(hbar: f64, mass: f64, light_speed: f64) -> Self {
        WaveModel::new(
            WaveFamily::KleinGordon,
            Units {
                hbar,
                mass,
                light_speed,
                sound_speed: None,
            },
        )
    }

    /// Vacuum light model.
    pub fn em_vacuum(light_speed: f64) -> Self {
        WaveModel::new(
            WaveFamily::EmVacuum,
            Units {
                light_speed,
                ..Units::default()
            },
        )
    }

    /// Sound model for a still medium.
    pub fn acoustic(sound_speed: f64) -> Self {
        WaveModel::new(
            WaveFamily::Acoustic,
            Units {
                sound_speed: Some(sound_speed),
                ..Units::default()
            },
        )
    }

    /// Check that the constants required by the family are present and
    /// positive.  Returns a list of violations (empty when valid).
    pub fn constant_violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        let u = &self.units;
        match self.family {
            WaveFamily::Schrodinger | WaveFamily::KleinGordon => {
                if !(u.hbar > 0.0) {
                    out.push(format!("hbar must be positive (got {})", u.hbar));
                }
                if !(u.mass > 0.0) {
                    out.push(format!("mass must be positive (got {})", u.mass));
                }
            }
            _ => {}
        }
        match self.family {
            WaveFamily::KleinGordon | WaveFamily::EmVacuum => {
                if !(u.light_speed > 0.0) {
                    out.push(format!("light_speed must be positive (got {})", u.light_speed));
                }
            }
            _ => {}
        }
        if self.family == WaveFamily::Acoustic {
            match u.sound_speed {
                Some(cs) if cs > 0.0 => {}
                Some(cs) => out.push(format!("sound_speed must be positive (got {cs})")),
                None => out.push("sound_speed is required for the acoustic family".into()),
            }
        }
        out
    }

    /// The speed that no element or (for the bounded families) wave group may
    /// exceed: `c` for light and relativistic matter, `c_s` for sound, and
    /// unbounded for non-relativistic matter.
    pub fn speed_bound(&self) -> Option<f64> {
        match self.family {
            WaveFamily::Schrodinger => None,
            WaveFamily::KleinGordon | WaveFamily::EmVacuum => Some(self.units.light_speed),
            WaveFamily::Acoustic => self.units.sound_speed,
        }
    }

    /// Angular frequency of the wavevector `k` on this family's
    /// positive-frequency branch.
    pub fn dispersion_omega(&self, k: f64) -> f64 {
        let u = &self.units;
        match self.family {
            WaveFamily::Schrodinger => u.hbar * k * k / (2.0 * u.mass),
            WaveFamily::KleinGordon => {
                let ck = u.light_speed * k;
                let rest = u.mass * u.light_speed * u.light_speed / u.hbar;
                (ck * ck + rest * rest).sqrt()
            }
            WaveFamily::EmVacuum => u.light_speed * k.abs(),
            WaveFamily::Acoustic => self.units.sound_speed.unwrap_or(f64::NAN) * k.abs(),
        }
    }

    /// Signed phase speed `omega(k) / k`.  Errors on `k == 0`, where the
    /// ratio is not defined.
    pub fn phase_velocity(&self, k: f64) -> Result<f64> {
        if k == 0.0 {
            return Err(Error::invalid(
                "phase velocity is undefined for a zero wavevector",
            ));
        }
        Ok(self.dispersion_omega(k) / k)
    }

    /// Signed group speed `d omega / d k`.
    ///
    /// For the non-dispersive families this is `±c` (or `±c_s`) and is
    /// undefined at `k == 0`, which is reported as an error.
    pub fn group_velocity(&self, k: f64) -> Result<f64> {
        let u = &self.units;
        match self.family {
            WaveFamily::Schrodinger => Ok(u.hbar * k / u.mass),
            WaveFamily::KleinGordon => {
                let omega = self.dispersion_omega(k);
                Ok(u.light_speed * u.light_speed * k / omega)
            }
            WaveFamily::EmVacuum => {
                if k == 0.0 {
                    Err(Error::invalid(
                        "group velocity is undefined for a zero wavevector",
                    ))
                } else {
                    Ok(u.light_speed * k.signum())
                }
            }
            WaveFamily::Acoustic => {
                let cs = u
                    .sound_speed
                    .ok_or_else(|| Error::invalid("acoustic model requires sound_speed"))?;
                if k == 0.0 {
                    Err(Error::invalid(
                        "group velocity is undefined for a zero wavevector",
                    ))
                } else {
                    Ok(cs * k.signum())
                }
            }
        }
    }

    /// Invert the group-speed map: find the signed wavevector whose group
    /// speed equals `v_g`.
    ///
    /// Only the dispersive families admit a unique answer.  For light and
    /// sound every wavevector shares the same group speed, so the request is
    /// rejected; pick the wavevector through a frequency instead.
    pub fn wavevector_from_group_speed(&self, v_g: f64) -> Result<f64> {
        let u = &self.units;
        match self.family {
            WaveFamily::Schrodinger => Ok(u.mass * v_g / u.hbar),
            WaveFamily::KleinGordon => {
                let c = u.light_speed;
                if v_g.abs() >= c {
                    return Err(Error::invalid(format!(
                        "group speed {} is not below the light speed {}",
                        v_g, c
                    )));
                }
                let gamma = 1.0 / (1.0 - (v_g / c) * (v_g / c)).sqrt();
                Ok(gamma * u.mass * v_g / u.hbar)
            }
            WaveFamily::EmVacuum | WaveFamily::Acoustic => Err(Error::invalid(
                "group speed does not determine a wavevector for a non-dispersive family; \
                 specify a frequency instead",
            )),
        }
    }

    /// Signed wavevector of a wave with angular frequency `omega0` travelling
    /// in the direction of `direction` (only its sign is used).
    pub fn wavevector_from_frequency(&self, omega0: f64, direction: f64) -> Result<f64> {
        if !(omega0 > 0.0) {
            return Err(Error::invalid(format!(
                "frequency must be positive (got {omega0})"
            )));
        }
        if direction == 0.0 {
            return Err(Error::invalid("direction sign must be non-zero"));
        }
        let sign = direction.signum();
        let u = &self.units;
        match self.family {
            WaveFamily::Schrodinger => {
                Ok(sign * (2.0 * u.mass * omega0 / u.hbar).sqrt())
            }
            WaveFamily::KleinGordon => {
                let c = u.light_speed;
                let rest = u.mass * c * c / u.hbar;
                if omega0 <= rest {
                    return Err(Error::invalid(format!(
                        "frequency {omega0} does not exceed the rest frequency {rest}"
                    )));
                }
                Ok(sign * (omega0 * omega0 - rest * rest).sqrt() / c)
            }
            WaveFamily::EmVacuum => Ok(sign * omega0 / u.light_speed),
            WaveFamily::Acoustic => {
                let cs = u
                    .sound_speed
                    .ok_or_else(|| Error::invalid("acoustic model requires sound_speed"))?;
                Ok(sign * omega0 / cs)
            }
        }
    }
}

/// One harmonic component `amplitude * exp(i*(k*x - omega*t + phase0))`.
///
/// `omega` is stored rather than recomputed so that transmission can copy a
/// wave bit-for-bit; use [`WaveModel::dispersion_omega`] when constructing a
/// wave from scratch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlaneWave {
    pub wavevector: f64,
    pub omega: f64,
    pub amplitude: Complex64,
    pub phase0: f64,
}

impl PlaneWave {
    /// Build a wave on the model's dispersion branch from a signed
    /// wavevector.
    pub fn from_wavevector(model: &WaveModel, k: f64, amplitude: Complex64, phase0: f64) -> Self {
        PlaneWave {
            wavevector: k,
            omega: model.dispersion_omega(k),
            amplitude,
            phase0,
        }
    }

    /// Total phase `k x - omega t + phase0` at a spacetime point.
    pub fn phase_at(&self, x: f64, t: f64) -> f64 {
        self.wavevector * x - self.omega * t + self.phase0
    }

    /// Complex field value at a spacetime point.
    pub fn field_at(&self, x: f64, t: f64) -> Complex64 {
        self.amplitude * Complex64::from_polar(1.0, self.phase_at(x, t))
    }

    /// Signed phase speed of this component.
    pub fn phase_velocity(&self) -> Result<f64> {
        if self.wavevector == 0.0 {
            return Err(Error::invalid(
                "phase velocity is undefined for a zero wavevector",
            ));
        }
        Ok(self.omega / self.wavevector)
    }

    /// True when the stored `(k, omega)` pair matches `model`'s dispersion
    /// branch to within `tol` relative error.
    pub fn on_branch(&self, model: &WaveModel, tol: f64) -> bool {
        let expect = model.dispersion_omega(self.wavevector);
        let scale = expect.abs().max(self.omega.abs()).max(1e-300);
        (self.omega - expect).abs() <= tol * scale
    }
}
