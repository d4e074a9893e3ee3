use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use timeless::config::{
    parse_distance, parse_energy, Format, InteractionConfig, Scenario, ScenarioConfig, SectorConfig, SystemConfig,
    CUSTOM_TAGS,
};
use timeless::sweep::{self, Backend, SweepConfig};
use timeless::verify::{verify, VerifyOptions};
use timeless::{output, run, CliError, Result};

/// Relational quantum dynamics on a finite clock.
#[derive(Debug, Parser)]
#[command(name = "timeless", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a scenario and print the conditioned state at every clock reading.
    Run(RunArgs),
    /// Sweep the coupling scale of the two-level model.
    Sweep(SweepArgs),
    /// Run the verification battery.
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
struct RunArgs {
    /// free-qubit, qubit-clock, interacting-qubit, massive-qubit,
    /// mixed-decoherence or coherence-ratio.
    #[arg(long)]
    scenario: Option<String>,
    /// JSON config to start from; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    clock_dim: Option<usize>,
    /// Clock spacing, or the reading gap of the two-level clock.
    #[arg(long, allow_hyphen_values = true)]
    dt: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    t0: Option<f64>,
    /// Gravitational coupling scale.
    #[arg(long, allow_hyphen_values = true)]
    lambda: Option<f64>,
    /// Constraint eigenvalue; accepts an eV or J suffix.
    #[arg(long, allow_hyphen_values = true)]
    energy: Option<String>,
    /// Rest energy of the massive model; accepts an eV or J suffix.
    #[arg(long, allow_hyphen_values = true)]
    mass_energy: Option<String>,
    /// Internal level splitting of the massive model; accepts an eV or J suffix.
    #[arg(long, allow_hyphen_values = true)]
    e_internal: Option<String>,
    /// System Hamiltonian c0 I + cx σx + cy σy + cz σz as "c0,cx,cy,cz".
    #[arg(long, allow_hyphen_values = true)]
    pauli: Option<String>,
    /// none, gravitational, or a custom tag (zero, quadratic).
    #[arg(long)]
    interaction: Option<String>,
    /// Mixture sector "p:E"; repeat for several.
    #[arg(long = "sector", allow_hyphen_values = true)]
    sectors: Vec<String>,
    /// Source-clock distance in meters.
    #[arg(long)]
    distance: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// csv or json.
    #[arg(long)]
    format: Option<String>,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[arg(long, default_value_t = -3.0, allow_hyphen_values = true)]
    lambda_min: f64,
    #[arg(long, default_value_t = 3.0, allow_hyphen_values = true)]
    lambda_max: f64,
    #[arg(long, default_value_t = 601)]
    points: usize,
    #[arg(long, default_value = "0", allow_hyphen_values = true)]
    energy: String,
    #[arg(long, allow_hyphen_values = true)]
    mass_energy: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    e_internal: Option<String>,
    /// oracle or pipeline.
    #[arg(long, default_value = "oracle")]
    backend: String,
    /// Also run the other backend; exit 2 if they disagree beyond --tol.
    #[arg(long)]
    compare: bool,
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value = "csv")]
    format: String,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    /// Replace every numerical tolerance.
    #[arg(long)]
    tol: Option<f64>,
    /// Flip the sign of the clock generator; the battery must then fail.
    #[arg(long)]
    inject_fault: bool,
}

fn scenario_config(a: &RunArgs) -> Result<ScenarioConfig> {
    let scenario = a.scenario.as_deref().map(str::parse::<Scenario>).transpose()?;
    let mut cfg = match (&a.config, scenario) {
        (Some(path), sc) => {
            let mut cfg: ScenarioConfig = serde_json::from_str(&std::fs::read_to_string(path)?)?;
            if let Some(sc) = sc {
                cfg.scenario = sc;
            }
            cfg
        }
        (None, Some(sc)) => ScenarioConfig::preset(sc),
        (None, None) => return Err(CliError::invalid("scenario", "give --scenario or --config")),
    };
    if let Some(d) = a.clock_dim {
        cfg.clock.dim = d;
    }
    if let Some(dt) = a.dt {
        cfg.clock.delta = dt;
    }
    if let Some(t0) = a.t0 {
        cfg.clock.t0 = t0;
    }
    if let Some(e) = &a.energy {
        cfg.energy = parse_energy("energy", e)?;
    }
    if let Some(p) = &a.pauli {
        let cs = p
            .split(',')
            .map(|x| x.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|_| CliError::invalid("pauli", format!("`{p}` is not a list of numbers")))?;
        let coefficients: [f64; 4] =
            cs.try_into().map_err(|_| CliError::invalid("pauli", "expected four coefficients c0,cx,cy,cz"))?;
        cfg.system = SystemConfig::Pauli { coefficients };
    }
    if a.mass_energy.is_some() || a.e_internal.is_some() {
        let (m0, e0) = match cfg.system {
            SystemConfig::Massive { mass_energy, e_internal } => (Some(mass_energy), Some(e_internal)),
            SystemConfig::Pauli { .. } => (None, None),
        };
        let mass_energy = a.mass_energy.as_deref().map(|s| parse_energy("mass-energy", s)).transpose()?.or(m0);
        let e_internal = a.e_internal.as_deref().map(|s| parse_energy("e-internal", s)).transpose()?.or(e0);
        cfg.system = SystemConfig::Massive {
            mass_energy: mass_energy.ok_or_else(|| CliError::invalid("mass-energy", "required with --e-internal"))?,
            e_internal: e_internal.ok_or_else(|| CliError::invalid("e-internal", "required with --mass-energy"))?,
        };
    }
    if let Some(tag) = &a.interaction {
        cfg.interaction = match tag.as_str() {
            "none" => InteractionConfig::None,
            "gravitational" => InteractionConfig::Gravitational { lambda: cfg.interaction.lambda().unwrap_or(1.0) },
            t if CUSTOM_TAGS.contains(&t) => InteractionConfig::Custom { tag: t.into() },
            other => {
                return Err(CliError::invalid(
                    "interaction",
                    format!("unknown interaction `{other}` (expected none, gravitational, {})", CUSTOM_TAGS.join(", ")),
                ))
            }
        };
    }
    if let Some(l) = a.lambda {
        cfg.interaction = InteractionConfig::Gravitational { lambda: l };
    }
    if !a.sectors.is_empty() {
        cfg.sectors = a.sectors.iter().map(|s| s.parse::<SectorConfig>()).collect::<Result<_>>()?;
    }
    if let Some(d) = &a.distance {
        cfg.distance = Some(parse_distance(d)?);
    }
    if let Some(p) = &a.out {
        cfg.output.path = Some(p.clone());
    }
    if let Some(f) = &a.format {
        cfg.output.format = f.parse()?;
    }
    Ok(cfg)
}

fn sweep_config(a: &SweepArgs) -> Result<SweepConfig> {
    Ok(SweepConfig {
        lambda_min: a.lambda_min,
        lambda_max: a.lambda_max,
        points: a.points,
        energy: parse_energy("energy", &a.energy)?,
        mass_energy: a.mass_energy.as_deref().map(|s| parse_energy("mass-energy", s)).transpose()?,
        e_internal: a.e_internal.as_deref().map(|s| parse_energy("e-internal", s)).transpose()?,
        backend: a.backend.parse::<Backend>()?,
        compare: a.compare,
        tol: a.tol,
        path: a.out.clone(),
        format: a.format.parse::<Format>()?,
    })
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run(a) => {
            let cfg = scenario_config(&a)?;
            let text = run::run(&cfg)?.render(&cfg)?;
            output::emit(cfg.output.path.as_deref(), &text)
        }
        Command::Sweep(a) => {
            let cfg = sweep_config(&a)?;
            let rows = sweep::run(&cfg)?;
            output::emit(cfg.path.as_deref(), &sweep::render(&cfg, &rows)?)
        }
        Command::Verify(a) => {
            if let Some(t) = a.tol {
                if !(t > 0.0 && t.is_finite()) {
                    return Err(CliError::invalid("tol", format!("must be positive, got {t}")));
                }
            }
            let report = verify(VerifyOptions { tol: a.tol, inject_fault: a.inject_fault });
            print!("{}", report.render());
            if report.passed() {
                Ok(())
            } else {
                Err(CliError::Verification(format!("{} checks failed", report.failed_checks())))
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
