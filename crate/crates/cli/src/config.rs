use std::f64::consts::PI;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use timeless_core::clock::{make_cyclic_clock, make_two_level_clock, ClockModel};
use timeless_core::interactions::InteractionSpec;
use timeless_core::linalg::{self, CMat};
use timeless_core::models::{TwoLevelParams, CODATA_2018};

use crate::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    FreeQubit,
    QubitClock,
    InteractingQubit,
    MassiveQubit,
    MixedDecoherence,
    CoherenceRatio,
}

impl Scenario {
    pub const ALL: [Scenario; 6] = [
        Scenario::FreeQubit,
        Scenario::QubitClock,
        Scenario::InteractingQubit,
        Scenario::MassiveQubit,
        Scenario::MixedDecoherence,
        Scenario::CoherenceRatio,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scenario::FreeQubit => "free-qubit",
            Scenario::QubitClock => "qubit-clock",
            Scenario::InteractingQubit => "interacting-qubit",
            Scenario::MassiveQubit => "massive-qubit",
            Scenario::MixedDecoherence => "mixed-decoherence",
            Scenario::CoherenceRatio => "coherence-ratio",
        }
    }
}

impl FromStr for Scenario {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        Scenario::ALL.into_iter().find(|sc| sc.name() == s).ok_or_else(|| {
            let names: Vec<_> = Scenario::ALL.iter().map(|sc| sc.name()).collect();
            CliError::invalid("scenario", format!("unknown scenario `{s}` (expected one of {})", names.join(", ")))
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(CliError::invalid("format", format!("expected csv or json, got `{other}`"))),
        }
    }
}

/// Reading grid. A two-level clock uses `t0` and `t0 + delta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClockConfig {
    pub dim: usize,
    pub t0: f64,
    pub delta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SystemConfig {
    /// `c0 I + cx σx + cy σy + cz σz`
    Pauli { coefficients: [f64; 4] },
    /// `mc² + E_I σx/2`
    Massive { mass_energy: f64, e_internal: f64 },
}

impl SystemConfig {
    pub fn hamiltonian(&self) -> CMat {
        match *self {
            SystemConfig::Pauli { coefficients: [c0, cx, cy, cz] } => {
                linalg::identity(2).scale(c0)
                    + linalg::pauli_x().scale(cx)
                    + linalg::pauli_y().scale(cy)
                    + linalg::pauli_z().scale(cz)
            }
            SystemConfig::Massive { mass_energy, e_internal } => {
                TwoLevelParams::massive(1.0, 0.0, mass_energy, e_internal).hamiltonian()
            }
        }
    }
}

/// Tags understood by the custom interaction `f(Ĥ) ⊗ ĥ`.
pub const CUSTOM_TAGS: [&str; 2] = ["zero", "quadratic"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum InteractionConfig {
    None,
    Gravitational { lambda: f64 },
    Custom { tag: String },
}

impl InteractionConfig {
    pub fn build(&self) -> Result<Option<InteractionSpec>> {
        match self {
            InteractionConfig::None => Ok(None),
            InteractionConfig::Gravitational { lambda } => InteractionSpec::gravitational(*lambda)
                .map(Some)
                .map_err(|e| CliError::invalid("lambda", e.to_string())),
            InteractionConfig::Custom { tag } => match tag.as_str() {
                "zero" => Ok(Some(InteractionSpec::custom("zero", |_| 0.0))),
                "quadratic" => Ok(Some(InteractionSpec::custom("quadratic", |e| e * e))),
                other => Err(CliError::invalid(
                    "interaction",
                    format!("unknown custom tag `{other}` (expected one of {})", CUSTOM_TAGS.join(", ")),
                )),
            },
        }
    }

    pub fn lambda(&self) -> Option<f64> {
        match self {
            InteractionConfig::Gravitational { lambda } => Some(*lambda),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SectorConfig {
    pub weight: f64,
    pub energy: f64,
}

impl FromStr for SectorConfig {
    type Err = CliError;

    /// `p:E`, with the energy optionally suffixed by `eV` or `J`.
    fn from_str(s: &str) -> Result<Self> {
        let (p, e) =
            s.split_once(':').ok_or_else(|| CliError::invalid("sector", format!("expected p:E, got `{s}`")))?;
        let weight = p
            .trim()
            .parse::<f64>()
            .map_err(|_| CliError::invalid("sector", format!("weight `{p}` is not a number")))?;
        Ok(SectorConfig { weight, energy: parse_energy("sector", e)? })
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct OutputConfig {
    pub path: Option<PathBuf>,
    pub format: Format,
}

/// Everything a run depends on. Serialized verbatim into every output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub scenario: Scenario,
    pub clock: ClockConfig,
    pub system: SystemConfig,
    pub interaction: InteractionConfig,
    /// Sector energy `ℰ` of the constraint. Joules for `coherence-ratio`.
    pub energy: f64,
    pub sectors: Vec<SectorConfig>,
    /// Source-clock distance in meters (`coherence-ratio` only).
    pub distance: Option<f64>,
    pub output: OutputConfig,
}

impl ScenarioConfig {
    /// Defaults for each scenario.
    pub fn preset(scenario: Scenario) -> Self {
        let cyclic = |d: usize, period: f64| ClockConfig { dim: d, t0: 0.0, delta: period / d as f64 };
        let qubit = SystemConfig::Pauli { coefficients: [0.0, 0.5, 0.0, 0.0] };
        let grav = InteractionConfig::Gravitational { lambda: 1.0 };
        let base = ScenarioConfig {
            scenario,
            clock: cyclic(64, 4.0 * PI),
            system: qubit,
            interaction: InteractionConfig::None,
            energy: 0.0,
            sectors: Vec::new(),
            distance: None,
            output: OutputConfig::default(),
        };
        match scenario {
            Scenario::FreeQubit => base,
            Scenario::QubitClock => ScenarioConfig { clock: ClockConfig { dim: 2, t0: 0.0, delta: PI / 2.0 }, ..base },
            Scenario::InteractingQubit => ScenarioConfig { clock: cyclic(64, 6.0 * PI), interaction: grav, ..base },
            Scenario::MassiveQubit => ScenarioConfig {
                clock: cyclic(64, 4.0 * PI),
                system: SystemConfig::Massive { mass_energy: 2.0, e_internal: 1.0 },
                interaction: grav,
                ..base
            },
            Scenario::MixedDecoherence => ScenarioConfig {
                clock: cyclic(64, 6.0 * PI),
                interaction: grav,
                sectors: vec![SectorConfig { weight: 0.5, energy: 0.0 }, SectorConfig { weight: 0.5, energy: 0.5 }],
                ..base
            },
            Scenario::CoherenceRatio => {
                ScenarioConfig { energy: 10.0 * CODATA_2018.electron_volt, distance: Some(1e-10), ..base }
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ck = &self.clock;
        if self.scenario == Scenario::QubitClock {
            if ck.dim != 2 {
                return Err(CliError::invalid("clock-dim", "the qubit-clock scenario uses a two-level clock (dim 2)"));
            }
        } else if ck.dim < 2 {
            return Err(CliError::invalid("clock-dim", format!("need at least 2 readings, got {}", ck.dim)));
        }
        if !(ck.delta > 0.0 && ck.delta.is_finite()) {
            return Err(CliError::invalid("dt", format!("must be positive and finite, got {}", ck.delta)));
        }
        if !ck.t0.is_finite() {
            return Err(CliError::invalid("t0", "must be finite"));
        }
        if !self.energy.is_finite() {
            return Err(CliError::invalid("energy", "must be finite"));
        }
        match self.system {
            SystemConfig::Pauli { coefficients } => {
                if coefficients.iter().any(|c| !c.is_finite()) {
                    return Err(CliError::invalid("pauli", "coefficients must be finite"));
                }
            }
            SystemConfig::Massive { mass_energy, e_internal } => {
                if !(mass_energy >= 0.0 && mass_energy.is_finite()) {
                    return Err(CliError::invalid("mass-energy", format!("must be non-negative, got {mass_energy}")));
                }
                if !(e_internal > 0.0 && e_internal.is_finite()) {
                    return Err(CliError::invalid("e-internal", format!("must be positive, got {e_internal}")));
                }
            }
        }
        self.interaction.build()?;
        if self.scenario == Scenario::MixedDecoherence {
            if self.sectors.is_empty() {
                return Err(CliError::invalid("sector", "mixed-decoherence needs at least one --sector p:E"));
            }
            let total: f64 = self.sectors.iter().map(|s| s.weight).sum();
            if self.sectors.iter().any(|s| !(s.weight > 0.0) || !s.energy.is_finite()) || (total - 1.0).abs() > 1e-9 {
                return Err(CliError::invalid(
                    "sector",
                    format!("weights must be positive and sum to 1, got sum {total}"),
                ));
            }
        }
        if self.scenario == Scenario::CoherenceRatio {
            match self.distance {
                Some(d) if d > 0.0 && d.is_finite() => {}
                other => {
                    return Err(CliError::invalid(
                        "distance",
                        format!("must be a positive length in meters, got {other:?}"),
                    ))
                }
            }
            if self.energy == 0.0 {
                return Err(CliError::invalid("energy", "the coherence ratio diverges for zero sector energy"));
            }
        }
        Ok(())
    }

    pub fn clock_model(&self) -> Result<ClockModel> {
        let ck = &self.clock;
        let clock = if self.scenario == Scenario::QubitClock {
            make_two_level_clock(ck.t0, ck.t0 + ck.delta)
        } else {
            make_cyclic_clock(ck.dim, ck.t0, ck.delta)
        };
        clock.map_err(|e| CliError::invalid("clock", e.to_string()))
    }

    /// The config as a JSON value; object keys come out sorted.
    pub fn to_value(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("config is always serializable")
    }

    /// Compact JSON of [`Self::to_value`] with shortest round-trip floats:
    /// the string that is hashed and echoed into outputs.
    pub fn canonical_json(&self) -> String {
        self.to_value().to_string()
    }

    pub fn hash(&self) -> String {
        hash_str(&self.canonical_json())
    }
}

pub fn hash_str(s: &str) -> String {
    hex::encode(Sha256::digest(s.as_bytes()))
}

/// Number with optional `eV` or `J` suffix. Suffixed values are converted to
/// joules; bare numbers are taken as given.
pub fn parse_energy(field: &str, s: &str) -> Result<f64> {
    let t = s.trim();
    let (num, scale) = if let Some(n) = t.strip_suffix("eV") {
        (n, CODATA_2018.electron_volt)
    } else if let Some(n) = t.strip_suffix('J') {
        (n, 1.0)
    } else {
        (t, 1.0)
    };
    let value: f64 = num.trim().parse().map_err(|_| {
        CliError::invalid(field, format!("`{s}` is not an energy (number with optional eV or J suffix)"))
    })?;
    if !value.is_finite() {
        return Err(CliError::invalid(field, format!("`{s}` is not finite")));
    }
    Ok(value * scale)
}

/// Number with optional `m` suffix.
pub fn parse_distance(s: &str) -> Result<f64> {
    let t = s.trim();
    let num = t.strip_suffix('m').unwrap_or(t);
    num.trim().parse().map_err(|_| CliError::invalid("distance", format!("`{s}` is not a length in meters")))
}
