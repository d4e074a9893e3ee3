//! Scenario execution: conditioned system states at every clock reading, or
//! the single-row coherence ratio.

use serde::Serialize;

use timeless_core::linalg::{self, CMat};
use timeless_core::models::{critical_distances, gravitational_lambda, gravitational_ratio, CODATA_2018};
use timeless_core::universe::{history_state_mixed, history_state_pure, UniverseSpec};

use crate::config::{Format, Scenario, ScenarioConfig, SystemConfig};
use crate::output::{self, Cell, Meta};
use crate::Result;

/// Conditioned system state at one clock reading.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Reading {
    pub t: f64,
    pub rho: Vec<Vec<[f64; 2]>>,
    pub bloch: [f64; 3],
    pub purity: f64,
    /// `⟨H_sys⟩`
    pub energy: f64,
}

impl Reading {
    fn new(t: f64, rho: &CMat, h_sys: &CMat) -> Self {
        Self {
            t,
            rho: output::complex_pairs(rho),
            bloch: linalg::bloch_vector(rho),
            purity: linalg::purity(rho),
            energy: linalg::expectation(h_sys, rho),
        }
    }

    fn cells(&self) -> Vec<Cell> {
        let mut row = vec![Cell::Num(self.t)];
        row.extend(self.rho.iter().flatten().flat_map(|[re, im]| [Cell::Num(*re), Cell::Num(*im)]));
        row.extend(self.bloch.iter().map(|&x| Cell::Num(x)));
        row.push(Cell::Num(self.purity));
        row.push(Cell::Num(self.energy));
        row
    }
}

pub const READING_HEADER: [&str; 14] = [
    "t", "rho00_re", "rho00_im", "rho01_re", "rho01_im", "rho10_re", "rho10_im", "rho11_re", "rho11_im", "bloch_x",
    "bloch_y", "bloch_z", "purity", "energy",
];

/// Coherence time against rotation period at a source-clock distance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RatioRow {
    pub distance: f64,
    pub lambda: f64,
    pub energy: f64,
    pub ratio: f64,
    pub d_minus: Option<f64>,
    pub d_plus: Option<f64>,
    pub schwarzschild_radius: Option<f64>,
}

pub const RATIO_HEADER: [&str; 7] =
    ["distance", "lambda", "energy", "ratio", "d_minus", "d_plus", "schwarzschild_radius"];

#[derive(Debug, Clone, PartialEq)]
pub enum RunOutput {
    Readings(Vec<Reading>),
    Ratio(RatioRow),
}

impl RunOutput {
    pub fn render(&self, cfg: &ScenarioConfig) -> Result<String> {
        let meta = Meta::new("run", cfg.to_value());
        match (self, cfg.output.format) {
            (RunOutput::Readings(rows), Format::Csv) => {
                output::render_csv(&meta, &READING_HEADER, &rows.iter().map(Reading::cells).collect::<Vec<_>>())
            }
            (RunOutput::Readings(rows), Format::Json) => output::render_json(&meta, rows),
            (RunOutput::Ratio(r), Format::Csv) => {
                let row = vec![
                    Cell::Num(r.distance),
                    Cell::Num(r.lambda),
                    Cell::Num(r.energy),
                    Cell::Num(r.ratio),
                    r.d_minus.into(),
                    r.d_plus.into(),
                    r.schwarzschild_radius.into(),
                ];
                output::render_csv(&meta, &RATIO_HEADER, &[row])
            }
            (RunOutput::Ratio(r), Format::Json) => output::render_json(&meta, [r]),
        }
    }
}

/// Validates `cfg` and runs it. Every scenario starts the system in `|0⟩`.
pub fn run(cfg: &ScenarioConfig) -> Result<RunOutput> {
    cfg.validate()?;
    if cfg.scenario == Scenario::CoherenceRatio {
        return coherence_ratio(cfg).map(RunOutput::Ratio);
    }
    let clock = cfg.clock_model()?;
    let h_sys = cfg.system.hamiltonian();
    let spec = UniverseSpec::new(h_sys.clone(), clock, cfg.interaction.build()?, cfg.energy)?;
    let grid = spec.clock().grid().to_vec();
    let psi0 = linalg::basis(2, 0);
    let rows = if cfg.scenario == Scenario::MixedDecoherence {
        let rho0 = linalg::projector(&psi0);
        let sectors: Vec<_> = cfg.sectors.iter().map(|s| (s.weight, s.energy, rho0.clone())).collect();
        let mixed = history_state_mixed(&spec, &sectors)?;
        grid.iter()
            .enumerate()
            .map(|(k, &t)| Ok(Reading::new(t, &mixed.condition(k)?, &h_sys)))
            .collect::<Result<Vec<_>>>()?
    } else {
        let hist = history_state_pure(&spec, &psi0)?;
        grid.iter()
            .enumerate()
            .map(|(k, &t)| Ok(Reading::new(t, &linalg::projector(&hist.condition(k)?), &h_sys)))
            .collect::<Result<Vec<_>>>()?
    };
    Ok(RunOutput::Readings(rows))
}

fn coherence_ratio(cfg: &ScenarioConfig) -> Result<RatioRow> {
    let distance = cfg.distance.expect("validated");
    let k = &CODATA_2018;
    let critical = match cfg.system {
        SystemConfig::Massive { mass_energy, e_internal } if mass_energy > 0.0 => {
            Some(critical_distances(mass_energy, e_internal, k)?)
        }
        _ => None,
    };
    Ok(RatioRow {
        distance,
        lambda: gravitational_lambda(distance, k),
        energy: cfg.energy,
        ratio: gravitational_ratio(distance, cfg.energy, k)?,
        d_minus: critical.map(|c| c.d_minus),
        d_plus: critical.map(|c| c.d_plus),
        schwarzschild_radius: critical.map(|c| c.schwarzschild_radius),
    })
}
