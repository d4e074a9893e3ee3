//! Verification battery. Every check reduces to one residual compared with a
//! bound; suites report their worst residual.

use std::f64::consts::PI;
use std::fmt::Write;

use timeless_core::clock::{make_cyclic_clock, ClockModel};
use timeless_core::interactions::{
    self, build_interaction, kraus_evolution, validate_interaction, InteractionSpec, KrausSet,
};
use timeless_core::linalg::{self, basis, c, identity, max_norm, pauli_x, pauli_z, tensor, CMat, CVec};
use timeless_core::models::{self, SweepBackend, TwoLevelParams, CODATA_2018};
use timeless_core::pictures::{self, Difference};
use timeless_core::universe::{self, history_state_pure, history_state_with, ConstructionMode, UniverseSpec};

use crate::sweep::max_disagreement;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Bound {
    /// Numerical residual; `--tol` replaces the bound.
    AtMost(f64),
    /// Comparison with a published figure; never overridden.
    Published(f64),
    /// Residual that must stay large, as when a fault has to be detected.
    AtLeast(f64),
}

impl Bound {
    fn admits(self, r: f64) -> bool {
        match self {
            Bound::AtMost(t) | Bound::Published(t) => r <= t,
            Bound::AtLeast(t) => r >= t,
        }
    }

    fn describe(self) -> String {
        match self {
            Bound::AtMost(t) | Bound::Published(t) => format!("<= {t:.0e}"),
            Bound::AtLeast(t) => format!(">= {t:.0e}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    /// `None` when the computation itself failed.
    pub residual: Option<f64>,
    pub bound: Bound,
    pub error: Option<String>,
}

impl CheckResult {
    pub fn passed(&self) -> bool {
        self.residual.is_some_and(|r| self.bound.admits(r))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteResult {
    pub name: &'static str,
    pub checks: Vec<CheckResult>,
}

impl SuiteResult {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(CheckResult::passed)
    }

    /// Largest residual among the checks bounded from above.
    pub fn worst(&self) -> f64 {
        self.checks
            .iter()
            .filter(|c| !matches!(c.bound, Bound::AtLeast(_)))
            .map(|c| c.residual.unwrap_or(f64::INFINITY))
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct VerifyOptions {
    /// Replaces every numerical tolerance.
    pub tol: Option<f64>,
    /// Flips the sign of the clock generator so that the battery must fail.
    pub inject_fault: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub suites: Vec<SuiteResult>,
    pub notes: Vec<String>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.suites.iter().all(SuiteResult::passed)
    }

    pub fn failed_checks(&self) -> usize {
        self.suites.iter().flat_map(|s| &s.checks).filter(|c| !c.passed()).count()
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        let mark = |ok: bool| if ok { "PASS" } else { "FAIL" };
        for s in &self.suites {
            let _ = writeln!(out, "{}  {} (worst residual {:.2e})", mark(s.passed()), s.name, s.worst());
            for ck in &s.checks {
                let detail = match (&ck.residual, &ck.error) {
                    (Some(r), _) => format!("{r:.3e} {}", ck.bound.describe()),
                    (None, Some(e)) => format!("error: {e}"),
                    (None, None) => "no result".into(),
                };
                let _ = writeln!(out, "  {}  {}: {detail}", mark(ck.passed()), ck.name);
            }
        }
        for n in &self.notes {
            let _ = writeln!(out, "INFO  {n}");
        }
        let total: usize = self.suites.iter().map(|s| s.checks.len()).sum();
        let _ = writeln!(out, "{} of {total} checks passed", total - self.failed_checks());
        out
    }
}

type Computed = std::result::Result<f64, String>;

struct Suite {
    name: &'static str,
    opts: VerifyOptions,
    checks: Vec<CheckResult>,
}

impl Suite {
    fn new(name: &'static str, opts: VerifyOptions) -> Self {
        Self { name, opts, checks: Vec::new() }
    }

    fn check(&mut self, name: &'static str, bound: Bound, f: impl FnOnce() -> Computed) {
        let bound = match (bound, self.opts.tol) {
            (Bound::AtMost(_), Some(t)) => Bound::AtMost(t),
            (b, _) => b,
        };
        let (residual, error) = match f() {
            Ok(r) if r.is_nan() => (None, Some("NaN residual".into())),
            Ok(r) => (Some(r), None),
            Err(e) => (None, Some(e)),
        };
        self.checks.push(CheckResult { name, residual, bound, error });
    }

    fn finish(self) -> SuiteResult {
        SuiteResult { name: self.name, checks: self.checks }
    }
}

fn err<E: ToString>(e: E) -> String {
    e.to_string()
}

fn h_qubit() -> CMat {
    pauli_x().scale(0.5)
}

/// Cyclic clock of period `4π`, the sign of its generator flipped under fault injection.
fn clock(d: usize, opts: VerifyOptions) -> ClockModel {
    let ck = make_cyclic_clock(d, 0.0, 4.0 * PI / d as f64).expect("valid clock");
    if opts.inject_fault {
        ck.with_negated_generator()
    } else {
        ck
    }
}

fn free_spec(d: usize, opts: VerifyOptions) -> std::result::Result<UniverseSpec, String> {
    UniverseSpec::free(h_qubit(), clock(d, opts), 0.0).map_err(err)
}

/// A start state with weight on both `σx` eigenvectors.
fn start() -> CVec {
    CVec::from_vec(vec![c(0.8, 0.0), c(0.36, 0.48)])
}

fn linalg_suite(opts: VerifyOptions) -> SuiteResult {
    let mut s = Suite::new("linalg", opts);
    let h = h_qubit() + pauli_z().scale(0.3);
    s.check("exponential is unitary", Bound::AtMost(1e-12), || {
        Ok(linalg::unitarity_defect(&linalg::expm_hermitian(&h, 1.7).map_err(err)?))
    });
    let big = CMat::from_fn(4, 4, |i, j| c((i + 2 * j) as f64 * 0.1, i as f64 - j as f64));
    let big = linalg::hermitian_part(&big);
    s.check("eigendecomposition reconstructs", Bound::AtMost(1e-12), || {
        Ok(max_norm(&(linalg::eigh(&big).map_err(err)?.reconstruct() - &big)))
    });
    let (a, b) = (linalg::projector(&start()), identity(3).scale(1.0 / 3.0));
    s.check("partial trace of a product", Bound::AtMost(1e-12), || {
        Ok(max_norm(&(linalg::partial_trace_clock(&tensor(&a, &b), 2, 3).map_err(err)? - &a)))
    });
    s.finish()
}

fn clock_suite(opts: VerifyOptions) -> SuiteResult {
    let mut s = Suite::new("clock", opts);
    let ck = clock(64, opts);
    s.check("shift is unitary", Bound::AtMost(1e-12), || {
        Ok(linalg::unitarity_defect(ck.shift().ok_or("no shift operator")?))
    });
    s.check("generator produces the shift", Bound::AtMost(1e-10), || {
        let u = linalg::expm_hermitian(ck.h_op(), ck.delta()).map_err(err)?;
        Ok(max_norm(&(u - ck.shift().ok_or("no shift operator")?)))
    });
    s.finish()
}

fn universe_suite(opts: VerifyOptions) -> SuiteResult {
    let mut s = Suite::new("universe", opts);
    let spec = free_spec(64, opts);
    let hist = spec.as_ref().map_err(Clone::clone).and_then(|sp| history_state_pure(sp, &start()).map_err(err));
    s.check("conditioned states match unitary evolution", Bound::AtMost(1e-12), || {
        let (sp, h) = (spec.as_ref().map_err(Clone::clone)?, hist.as_ref().map_err(Clone::clone)?);
        let mut worst: f64 = 1.0;
        for (k, &t) in sp.clock().grid().iter().enumerate() {
            let want = linalg::expm_hermitian(&h_qubit(), t).map_err(err)? * start();
            worst = worst.min(linalg::pure_fidelity(&h.condition(k).map_err(err)?, &want));
        }
        Ok(1.0 - worst)
    });
    s.check("history state is stationary", Bound::AtMost(1e-10), || {
        hist.as_ref().map_err(Clone::clone)?.stationarity_residual().map_err(err)
    });
    s.check("solver agrees with direct construction", Bound::AtMost(1e-10), || {
        let sp = spec.as_ref().map_err(Clone::clone)?;
        let solved = history_state_with(sp, &start(), ConstructionMode::Solver).map_err(err)?;
        let direct = hist.as_ref().map_err(Clone::clone)?;
        Ok(1.0 - linalg::pure_fidelity(solved.vec(), direct.vec()))
    });
    s.check("physical inner product is normalized", Bound::AtMost(1e-12), || {
        let h = hist.as_ref().map_err(Clone::clone)?;
        Ok((universe::physical_inner(h, h, 0).map_err(err)? - c(1.0, 0.0)).norm())
    });
    s.finish()
}

fn pictures_suite(opts: VerifyOptions) -> SuiteResult {
    let mut s = Suite::new("pictures", opts);
    let setup = || -> std::result::Result<_, String> {
        let spec = free_spec(32, opts)?;
        let hist = history_state_pure(&spec, &start()).map_err(err)?;
        let map = pictures::sp_hp_map(&spec).map_err(err)?;
        let hstate = pictures::heisenberg_state(&hist, &map).map_err(err)?;
        Ok((spec, hist, map, hstate))
    };
    let ctx = setup();
    let ctx = ctx.as_ref().map_err(Clone::clone);
    s.check("relative observables follow Heisenberg evolution", Bound::AtMost(1e-12), || {
        let (spec, _, map, hstate) = ctx.clone()?;
        let mut worst = 0.0f64;
        for o in linalg::paulis().iter() {
            let o_hp = pictures::to_hp_observable(o, map).map_err(err)?;
            for (k, &t) in spec.clock().grid().iter().enumerate() {
                let u = linalg::expm_hermitian(&h_qubit(), t).map_err(err)?;
                let got = pictures::reduced_relative_observable(&o_hp, map, k, hstate).map_err(err)?;
                worst = worst.max(max_norm(&(got - u.adjoint() * o * &u)));
            }
        }
        Ok(worst)
    });
    s.check("expectations agree across pictures", Bound::AtMost(1e-12), || {
        let (_, hist, map, hstate) = ctx.clone()?;
        let mut worst = 0.0f64;
        for o in linalg::paulis().iter() {
            let o_hp = pictures::to_hp_observable(o, map).map_err(err)?;
            for k in 0..hist.spec().dim_clock() {
                let sp = linalg::vec_expectation(o, &hist.condition(k).map_err(err)?);
                let hp = pictures::relative_expectation(&o_hp, map, k, hstate).map_err(err)?;
                worst = worst.max((sp - hp).abs());
            }
        }
        Ok(worst)
    });
    s.check("group average commutes with the clock generator", Bound::AtMost(1e-12), || {
        let (spec, _, map, _) = ctx.clone()?;
        let hc = tensor(&identity(2), spec.clock().h_op());
        let mut worst = 0.0f64;
        for o in linalg::paulis().iter() {
            let o_hp = pictures::to_hp_observable(o, map).map_err(err)?;
            let avg = pictures::group_average(&o_hp, 2, spec.clock()).map_err(err)?;
            worst = worst.max(max_norm(&linalg::commutator(&avg, &hc)));
        }
        Ok(worst)
    });
    s.check("map shifts the clock generator by the system energy", Bound::AtMost(1e-10), || {
        pictures::hp_generator_deviation(&ctx.clone()?.2).map_err(err)
    });
    s.check("Heisenberg-picture state is frozen", Bound::AtMost(1e-10), || {
        let (spec, _, _, hstate) = ctx.clone()?;
        let d = pictures::time_op_derivative_op(&hstate.density(), spec.clock(), Difference::Symmetric).map_err(err)?;
        Ok(max_norm(&d))
    });
    s.finish()
}

fn interactions_suite(opts: VerifyOptions) -> SuiteResult {
    let mut s = Suite::new("interactions", opts);
    let ck = make_cyclic_clock(16, 0.0, PI / 4.0).expect("valid clock");
    let h = h_qubit();
    s.check("gravitational coupling is admissible", Bound::AtMost(1e-10), || {
        let grav = InteractionSpec::gravitational(1.0).map_err(err)?;
        let r = validate_interaction(&build_interaction(&grav, &h, &ck).map_err(err)?, &h, &ck).map_err(err)?;
        Ok(r.energy_conservation.residual.max(r.time_independence.residual).max(r.linearity.residual))
    });
    s.check("inadmissible couplings are rejected", Bound::AtLeast(1e-6), || {
        let faults = [tensor(&pauli_z(), ck.h_op()), tensor(&h, ck.t_op()), tensor(&h, &(ck.h_op() * ck.h_op()))];
        let mut weakest = f64::INFINITY;
        for v in &faults {
            let r = validate_interaction(v, &h, &ck).map_err(err)?;
            let worst = r.energy_conservation.residual.max(r.time_independence.residual).max(r.linearity.residual);
            weakest = weakest.min(worst);
        }
        Ok(weakest)
    });
    let sectors = || -> std::result::Result<Vec<(f64, CMat)>, String> {
        let grav = InteractionSpec::gravitational(1.0).map_err(err)?;
        [0.0, 0.5]
            .iter()
            .map(|&e| Ok((0.5, interactions::effective_hamiltonian(&h, Some(&grav), e).map_err(err)?.op)))
            .collect()
    };
    let rho0 = linalg::projector(&basis(2, 0));
    s.check("two sectors reach the maximally mixed state", Bound::AtMost(1e-9), || {
        let rho = kraus_evolution(&rho0, &sectors()?, 1.5 * PI).map_err(err)?;
        Ok((linalg::purity(&rho) - 0.5).abs())
    });
    s.check("Kraus set is complete", Bound::AtMost(1e-12), || {
        Ok(KrausSet::at_time(&sectors()?, 1.1).map_err(err)?.completeness_defect())
    });
    s.check("a single sector stays pure", Bound::AtMost(1e-12), || {
        let single = [(1.0, sectors()?[0].1.clone())];
        let mut worst = 0.0f64;
        for i in 0..=30 {
            let rho = kraus_evolution(&rho0, &single, 1.5 * PI * i as f64 / 30.0).map_err(err)?;
            worst = worst.max((linalg::purity(&rho) - 1.0).abs());
        }
        Ok(worst)
    });
    s.finish()
}

fn models_suite(opts: VerifyOptions) -> (SuiteResult, Vec<String>) {
    let mut s = Suite::new("models", opts);
    let mut notes = Vec::new();
    s.check("omega at unit coupling is 4/3", Bound::AtMost(1e-12), || {
        Ok((models::phi_omega(1.0, 0.0).map_err(err)?.1 - 4.0 / 3.0).abs())
    });
    s.check("pipeline sweep matches closed form", Bound::AtMost(1e-9), || {
        let lambdas = models::lambda_grid(-3.0, 3.0, 601).map_err(err)?;
        for template in [TwoLevelParams::qubit(1.0, 0.0), TwoLevelParams::massive(1.0, 0.0, 2.0, 1.0)] {
            let a = models::sweep(&template, &lambdas, SweepBackend::Oracle);
            let b = models::sweep(&template, &lambdas, SweepBackend::Pipeline);
            let worst = max_disagreement(&a, &b);
            if worst > 0.0 {
                return Ok(worst);
            }
        }
        Ok(0.0)
    });
    let massive = TwoLevelParams::massive(1.0, 0.0, 2.0, 1.0);
    s.check("massive omega matches its eigenvalues", Bound::AtMost(1e-12), || {
        let heff = |e: f64| e / (1.0 + e);
        Ok((models::phi_omega_massive(&massive).map_err(err)?.1 - (heff(2.5) - heff(1.5))).abs())
    });
    s.check("massive singularities at -2.5 and -1.5", Bound::AtMost(1e-9), || {
        let roots = models::locate_singularities(&massive, -3.0, 3.0, 6001).map_err(err)?;
        match roots.as_slice() {
            [a, b] => Ok((a + 2.5).abs().max((b + 1.5).abs())),
            other => Err(format!("found roots {other:?}")),
        }
    });
    let p = TwoLevelParams::qubit(1.0, 0.5);
    s.check("searched decoherence time matches closed form", Bound::AtMost(1e-6), || {
        let tau_d = models::coherence_time(&p).map_err(err)?.tau_d;
        Ok((models::decoherence_time_search(&p, 10.0, 400).map_err(err)? / tau_d - 1.0).abs())
    });
    let k = CODATA_2018;
    s.check("ratio for 10 eV at 1e-10 m is 3.8e51", Bound::Published(0.01), || {
        Ok((models::gravitational_ratio(1e-10, 10.0 * k.electron_volt, &k).map_err(err)? / 3.8e51 - 1.0).abs())
    });
    s.check("ratio for a proton at 1e-10 m is 4.0e43", Bound::Published(0.01), || {
        Ok((models::gravitational_ratio(1e-10, k.proton_mass * k.c * k.c, &k).map_err(err)? / 4.0e43 - 1.0).abs())
    });
    if let Ok(rp) = models::gravitational_ratio(1e-10, k.proton_mass * k.c * k.c, &k) {
        notes.push(format!(
            "proton rest energy at 1e-10 m gives {rp:.3e}; the published estimate of 1e41 is two orders lower"
        ));
    }
    (s.finish(), notes)
}

pub fn verify(opts: VerifyOptions) -> Report {
    let (models, notes) = models_suite(opts);
    Report {
        suites: vec![
            linalg_suite(opts),
            clock_suite(opts),
            universe_suite(opts),
            pictures_suite(opts),
            interactions_suite(opts),
            models,
        ],
        notes,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn battery_passes() {
        let report = verify(VerifyOptions::default());
        assert!(report.passed(), "{}", report.render());
    }

    #[test]
    fn flipped_generator_is_caught() {
        let report = verify(VerifyOptions { inject_fault: true, ..Default::default() });
        assert!(!report.passed());
        let failed: Vec<_> = report.suites.iter().filter(|s| !s.passed()).map(|s| s.name).collect();
        assert!(failed.contains(&"clock") && failed.contains(&"universe"), "{failed:?}");
    }
}
