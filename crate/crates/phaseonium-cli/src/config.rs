//! Declarative scenario configuration (TOML) and its translation into the
//! library types, with eager validation.

use phaseonium::analytic::PulseSpec;
use phaseonium::blochsim::SimGrid;
use phaseonium::medium::{
    InhomogeneousProfile, MediumSpec, PhaseoniumPreparation, ProfileShape,
};
use phaseonium::protocols::PolarizationQubit;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Protocol {
    Filter,
    Sieve,
    Splitter,
    Memory,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Engine {
    Analytic,
    Numeric,
    Both,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PreparationConfig {
    pub pop1: f64,
    #[serde(default)]
    pub phi12: f64,
    #[serde(default)]
    pub theta: f64,
    #[serde(default)]
    pub incoherent: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileConfig {
    /// "flat-top", "gaussian" or "lorentzian".
    pub shape: String,
    pub width: Option<f64>,
    pub span: Option<f64>,
}

impl Default for ProfileConfig {
    fn default() -> Self {
        Self {
            shape: "flat-top".into(),
            width: None,
            span: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PulseConfig {
    pub intensity_l: f64,
    pub intensity_r: f64,
    #[serde(default)]
    pub relative_phase: f64,
    #[serde(default = "default_duration")]
    pub duration: f64,
    #[serde(default = "default_center")]
    pub center: f64,
    #[serde(default = "default_peak_rabi")]
    pub peak_rabi: f64,
}

fn default_duration() -> f64 {
    1.0
}
fn default_center() -> f64 {
    -8.0
}
fn default_peak_rabi() -> f64 {
    1e-4
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MediumConfig {
    pub optical_depth: f64,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub n_z: Option<usize>,
    pub n_t: Option<usize>,
    pub n_delta: Option<usize>,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            n_z: None,
            n_t: None,
            n_delta: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub protocol: Protocol,
    pub engine: Engine,
    pub preparation: PreparationConfig,
    #[serde(default)]
    pub profile: ProfileConfig,
    pub pulse: PulseConfig,
    pub medium: MediumConfig,
    #[serde(default)]
    pub grid: GridConfig,
}

/// Fully validated scenario, ready to run.
pub struct Scenario {
    pub config: ScenarioConfig,
    pub medium: MediumSpec,
    pub pulse: PulseSpec,
    pub sim_grid: SimGrid,
}

impl ScenarioConfig {
    pub fn from_toml(text: &str) -> Result<Self, String> {
        toml::from_str(text).map_err(|e| format!("configuration parse error: {e}"))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("scenario configs always serialize")
    }

    /// Validate every field against the library constraints.
    pub fn build(&self) -> Result<Scenario, String> {
        let prep = if self.preparation.incoherent {
            if self.preparation.phi12 != 0.0 || self.preparation.theta != 0.0 {
                return Err(
                    "preparation: phi12 and theta must be 0 for an incoherent preparation"
                        .into(),
                );
            }
            PhaseoniumPreparation::incoherent(self.preparation.pop1)
        } else {
            PhaseoniumPreparation::new(
                self.preparation.pop1,
                self.preparation.phi12,
                self.preparation.theta,
            )
        }
        .map_err(|e| format!("preparation: {e}"))?;

        let shape = match self.profile.shape.as_str() {
            "flat-top" => ProfileShape::FlatTop,
            "gaussian" => ProfileShape::Gaussian,
            "lorentzian" => ProfileShape::LorentzianTruncated,
            other => {
                return Err(format!(
                    "profile.shape: unknown shape {other:?} (expected flat-top, gaussian or lorentzian)"
                ))
            }
        };
        let profile = match (self.profile.width, self.profile.span) {
            (None, None) if shape == ProfileShape::FlatTop => {
                InhomogeneousProfile::default_flat_top()
            }
            (Some(w), span) => {
                InhomogeneousProfile::new(shape, w, span.unwrap_or(5.0 * w))
                    .map_err(|e| format!("profile: {e}"))?
            }
            _ => return Err("profile.width is required for non-default profiles".into()),
        };

        if self.pulse.intensity_l < 0.0 || self.pulse.intensity_r < 0.0 {
            return Err("pulse: intensities must be non-negative".into());
        }
        let total = self.pulse.intensity_l + self.pulse.intensity_r;
        if !(total > 0.0) {
            return Err("pulse: total intensity must be positive".into());
        }
        if !(self.pulse.duration > 0.0) {
            return Err("pulse.duration must be positive".into());
        }
        if !(self.pulse.peak_rabi > 0.0) {
            return Err("pulse.peak_rabi must be positive".into());
        }
        let qubit = PolarizationQubit::from_intensities(
            self.pulse.intensity_l / total,
            self.pulse.intensity_r / total,
            self.pulse.relative_phase,
        );
        let pulse = PulseSpec::new(
            self.pulse.duration,
            self.pulse.center,
            qubit,
            self.pulse.peak_rabi,
        );

        let medium = MediumSpec::new(prep, profile, self.medium.optical_depth)
            .map_err(|e| format!("medium: {e}"))?;

        let mut sim_grid = SimGrid::default_for(&pulse);
        if let Some(n_z) = self.grid.n_z {
            sim_grid.n_z = n_z;
        }
        if let Some(n_t) = self.grid.n_t {
            sim_grid.n_t = n_t;
        }
        if let Some(n_delta) = self.grid.n_delta {
            sim_grid.n_delta = n_delta;
        }
        if sim_grid.n_z == 0 || sim_grid.n_t == 0 || sim_grid.n_delta < 2 {
            return Err("grid: n_z, n_t must be positive and n_delta >= 2".into());
        }

        Ok(Scenario {
            config: self.clone(),
            medium,
            pulse,
            sim_grid,
        })
    }
}

impl Scenario {
    /// Whether the analytic closed forms cover this preparation (a phase
    /// gradient requires balanced populations).
    pub fn analytic_supported(&self) -> bool {
        let p = &self.medium.preparation;
        p.theta == 0.0 || (p.pop1 - 0.5).abs() < 1e-12
    }

    pub fn qubit(&self) -> PolarizationQubit {
        self.pulse.qubit
    }
}

/// Built-in scenario presets.
pub fn preset(name: &str) -> Option<ScenarioConfig> {
    let pi = std::f64::consts::PI;
    match name {
        // Uniform coherent preparation acting as a tunable splitter.
        "fig2" => Some(ScenarioConfig {
            protocol: Protocol::Splitter,
            engine: Engine::Analytic,
            preparation: PreparationConfig {
                pop1: 0.6,
                phi12: pi / 3.0,
                theta: 0.0,
                incoherent: false,
            },
            profile: ProfileConfig::default(),
            pulse: PulseConfig {
                intensity_l: 0.9,
                intensity_r: 0.1,
                relative_phase: 0.0,
                duration: 1.0,
                center: -8.0,
                peak_rabi: 1e-4,
            },
            medium: MediumConfig {
                optical_depth: 10.0,
            },
            grid: GridConfig::default(),
        }),
        // Balanced preparation with a 3 pi phase gradient: quantum memory.
        "fig3" => Some(ScenarioConfig {
            protocol: Protocol::Memory,
            engine: Engine::Analytic,
            preparation: PreparationConfig {
                pop1: 0.5,
                phi12: 0.0,
                theta: 3.0 * pi,
                incoherent: false,
            },
            profile: ProfileConfig::default(),
            pulse: PulseConfig {
                intensity_l: 0.9,
                intensity_r: 0.1,
                relative_phase: 0.0,
                duration: 1.0,
                center: -8.0,
                peak_rabi: 1e-4,
            },
            medium: MediumConfig {
                optical_depth: 10.0,
            },
            grid: GridConfig::default(),
        }),
        // Same memory scenario, run through the finite-difference engine.
        "fig4" => preset("fig3").map(|mut c| {
            c.engine = Engine::Numeric;
            c
        }),
        _ => None,
    }
}

pub const PRESET_NAMES: &[&str] = &["fig2", "fig3", "fig4"];
