//! Coupling-scale sweeps of the two-level model. A massive template reports
//! `ω_m` and `φ_m` in the same columns.

use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use timeless_core::models::{self, SweepBackend, SweepRow, TwoLevelParams};

use crate::config::Format;
use crate::output::{self, Cell, Meta};
use crate::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    Oracle,
    Pipeline,
}

impl Backend {
    fn core(self) -> SweepBackend {
        match self {
            Backend::Oracle => SweepBackend::Oracle,
            Backend::Pipeline => SweepBackend::Pipeline,
        }
    }
}

impl FromStr for Backend {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "oracle" => Ok(Backend::Oracle),
            "pipeline" => Ok(Backend::Pipeline),
            other => Err(CliError::invalid("backend", format!("expected oracle or pipeline, got `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub points: usize,
    pub energy: f64,
    /// Both set for the massive model, both absent for the plain qubit.
    pub mass_energy: Option<f64>,
    pub e_internal: Option<f64>,
    pub backend: Backend,
    /// Also run the other backend and fail unless the two agree.
    pub compare: bool,
    pub tol: f64,
    pub path: Option<PathBuf>,
    pub format: Format,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            lambda_min: -3.0,
            lambda_max: 3.0,
            points: 601,
            energy: 0.0,
            mass_energy: None,
            e_internal: None,
            backend: Backend::Oracle,
            compare: false,
            tol: 1e-9,
            path: None,
            format: Format::Csv,
        }
    }
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        if !self.lambda_min.is_finite() || !self.lambda_max.is_finite() || self.lambda_min >= self.lambda_max {
            return Err(CliError::invalid("lambda-min", "need finite lambda-min < lambda-max"));
        }
        if self.points < 2 {
            return Err(CliError::invalid("points", format!("need at least 2, got {}", self.points)));
        }
        if !self.energy.is_finite() {
            return Err(CliError::invalid("energy", "must be finite"));
        }
        match (self.mass_energy, self.e_internal) {
            (None, None) => {}
            (Some(m), Some(e)) => {
                if !(m >= 0.0 && m.is_finite()) {
                    return Err(CliError::invalid("mass-energy", format!("must be non-negative, got {m}")));
                }
                if !(e > 0.0 && e.is_finite()) {
                    return Err(CliError::invalid("e-internal", format!("must be positive, got {e}")));
                }
            }
            (Some(_), None) => return Err(CliError::invalid("e-internal", "required with --mass-energy")),
            (None, Some(_)) => return Err(CliError::invalid("mass-energy", "required with --e-internal")),
        }
        if !(self.tol > 0.0) {
            return Err(CliError::invalid("tol", format!("must be positive, got {}", self.tol)));
        }
        Ok(())
    }

    pub fn template(&self) -> TwoLevelParams {
        match (self.mass_energy, self.e_internal) {
            (Some(m), Some(e)) => TwoLevelParams::massive(1.0, self.energy, m, e),
            _ => TwoLevelParams::qubit(1.0, self.energy),
        }
    }
}

pub const HEADER: [&str; 4] = ["lambda", "omega", "phi", "singular"];

/// Largest disagreement between two sweeps over the same grid, relative to
/// `max(1, |value|)`. A singular point on one side only counts as infinite.
pub fn max_disagreement(a: &[SweepRow], b: &[SweepRow]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| match (x.omega.zip(x.phi), y.omega.zip(y.phi)) {
            (Some((wx, px)), Some((wy, py))) => {
                ((wx - wy).abs() / wx.abs().max(1.0)).max((px - py).abs() / px.abs().max(1.0))
            }
            (None, None) => 0.0,
            _ => f64::INFINITY,
        })
        .fold(0.0, f64::max)
}

/// Runs the sweep. With `compare`, a disagreement beyond `tol` is a
/// verification failure.
pub fn run(cfg: &SweepConfig) -> Result<Vec<SweepRow>> {
    cfg.validate()?;
    let lambdas = models::lambda_grid(cfg.lambda_min, cfg.lambda_max, cfg.points)?;
    let template = cfg.template();
    let rows = models::sweep(&template, &lambdas, cfg.backend.core());
    if cfg.compare {
        let other = match cfg.backend {
            Backend::Oracle => Backend::Pipeline,
            Backend::Pipeline => Backend::Oracle,
        };
        let check = models::sweep(&template, &lambdas, other.core());
        let worst = max_disagreement(&rows, &check);
        if !(worst <= cfg.tol) {
            return Err(CliError::Verification(format!(
                "oracle and pipeline disagree by {worst:.3e} (tolerance {:.1e})",
                cfg.tol
            )));
        }
    }
    Ok(rows)
}

pub fn render(cfg: &SweepConfig, rows: &[SweepRow]) -> Result<String> {
    let config = serde_json::to_value(cfg)?;
    let meta = Meta::new("sweep", config).with_tolerance("backend_agreement", cfg.tol);
    match cfg.format {
        Format::Csv => {
            let cells: Vec<Vec<Cell>> = rows
                .iter()
                .map(|r| vec![Cell::Num(r.lambda), r.omega.into(), r.phi.into(), Cell::Flag(r.singular())])
                .collect();
            output::render_csv(&meta, &HEADER, &cells)
        }
        Format::Json => {
            #[derive(Serialize)]
            struct Row {
                lambda: f64,
                omega: Option<f64>,
                phi: Option<f64>,
                singular: bool,
            }
            let rows: Vec<Row> = rows
                .iter()
                .map(|r| Row { lambda: r.lambda, omega: r.omega, phi: r.phi, singular: r.singular() })
                .collect();
            output::render_json(&meta, rows)
        }
    }
}
