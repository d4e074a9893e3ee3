//! Closed forms for a (possibly massive) two-level system coupled to an
//! ideal clock through `V = Ĥ ⊗ ĥ / Λ`, and sweeps that compare them with
//! the numerical pipeline.
//!
//! With `Ĥ = mc² + E_I σx/2` the effective Hamiltonian is `φ + ω σx/2`.
//! `ω` is signed: it is negative when the conditioned evolution runs
//! backwards.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interactions::{self, InteractionSpec};
use crate::linalg::{self, c, CMat};

/// Physical constants in SI units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Constants {
    pub g: f64,
    pub c: f64,
    pub hbar: f64,
    pub electron_volt: f64,
    pub proton_mass: f64,
}

/// CODATA 2018.
pub const CODATA_2018: Constants = Constants {
    g: 6.674_30e-11,
    c: 299_792_458.0,
    hbar: 1.054_571_817e-34,
    electron_volt: 1.602_176_634e-19,
    proton_mass: 1.672_621_923_69e-27,
};

/// Below this `|Δ|` a coupling scale counts as singular.
pub const SINGULAR_DELTA: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoLevelParams {
    pub lambda: f64,
    pub energy: f64,
    pub mass_energy: f64,
    pub e_internal: f64,
    pub hbar: f64,
}

impl TwoLevelParams {
    /// Massless qubit with `E_I = 1`, `ħ = 1`.
    pub fn qubit(lambda: f64, energy: f64) -> Self {
        Self { lambda, energy, mass_energy: 0.0, e_internal: 1.0, hbar: 1.0 }
    }

    pub fn massive(lambda: f64, energy: f64, mass_energy: f64, e_internal: f64) -> Self {
        Self { lambda, energy, mass_energy, e_internal, hbar: 1.0 }
    }

    pub fn with_lambda(self, lambda: f64) -> Self {
        Self { lambda, ..self }
    }

    /// `mc² + E_I σx/2`
    pub fn hamiltonian(&self) -> CMat {
        linalg::identity(2).scale(self.mass_energy) + linalg::pauli_x().scale(0.5 * self.e_internal)
    }

    /// `Δ = (1 + mc²/Λ)² − E_I²/(4Λ²)`
    pub fn delta(&self) -> f64 {
        let l = self.lambda;
        (1.0 + self.mass_energy / l).powi(2) - self.e_internal.powi(2) / (4.0 * l * l)
    }

    fn check(&self) -> Result<f64> {
        if self.mass_energy < 0.0 || !(self.e_internal > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "need mc² ≥ 0 and E_I > 0, got {} and {}",
                self.mass_energy, self.e_internal
            )));
        }
        if self.lambda == 0.0 || !self.lambda.is_finite() {
            return Err(Error::Singular(format!("coupling scale {}", self.lambda)));
        }
        let delta = self.delta();
        if delta.abs() <= SINGULAR_DELTA {
            return Err(Error::Singular(format!("Δ vanishes at coupling scale {}", self.lambda)));
        }
        Ok(delta)
    }
}

/// `(φ, ω)` of the massless qubit with `E_I = 1`:
/// `φ = −(ℰ + 1/(4Λ))/Δ`, `ω = (1 + ℰ/Λ)/Δ`, `Δ = 1 − 1/(4Λ²)`.
pub fn phi_omega(lambda: f64, energy: f64) -> Result<(f64, f64)> {
    let p = TwoLevelParams::qubit(lambda, energy);
    let delta = p.check()?;
    Ok((-(energy + 1.0 / (4.0 * lambda)) / delta, (1.0 + energy / lambda) / delta))
}

/// `(φ_m, ω_m)` of the massive two-level system.
pub fn phi_omega_massive(p: &TwoLevelParams) -> Result<(f64, f64)> {
    let delta = p.check()?;
    let (m, e, l, ei) = (p.mass_energy, p.energy, p.lambda, p.e_internal);
    let phi = (m + m * m / l - ei * ei / (4.0 * l) - e - e * m / l) / delta;
    let omega = ei * (1.0 + e / l) / delta;
    Ok((phi, omega))
}

/// Distances at which the gravitational coupling `Λ = −d c⁴/G` is singular.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CriticalDistances {
    pub d_minus: f64,
    pub d_plus: f64,
    pub schwarzschild_radius: f64,
}

/// `d = R_S/2 ∓ E_I G/(2c⁴)`, energies in joules.
pub fn critical_distances(mass_energy: f64, e_internal: f64, k: &Constants) -> Result<CriticalDistances> {
    if !(mass_energy > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "critical distances need a positive mass, got mc² = {mass_energy}"
        )));
    }
    let mass = mass_energy / (k.c * k.c);
    let r_s = 2.0 * k.g * mass / (k.c * k.c);
    let shift = e_internal * k.g / (2.0 * k.c.powi(4));
    Ok(CriticalDistances { d_minus: r_s / 2.0 - shift, d_plus: r_s / 2.0 + shift, schwarzschild_radius: r_s })
}

/// `2Gm/c²`
pub fn schwarzschild_radius(mass: f64, k: &Constants) -> f64 {
    2.0 * k.g * mass / (k.c * k.c)
}

/// Coupling scale `Λ = d c⁴/G` of the gravitational interaction at distance `d`.
pub fn gravitational_lambda(distance: f64, k: &Constants) -> f64 {
    distance * k.c.powi(4) / k.g
}

/// `d c⁴/(2Gℰ)`: coherence time in units of the rotation period.
pub fn gravitational_ratio(distance: f64, energy: f64, k: &Constants) -> Result<f64> {
    if energy == 0.0 {
        return Err(Error::InvalidParameter("the ratio diverges for ℰ = 0".into()));
    }
    Ok(gravitational_lambda(distance, k) / (2.0 * energy))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CoherenceTime {
    /// `|πħΔΛ/(E_I ℰ)|`: first time a two-sector mixture is maximally mixed.
    pub tau_d: f64,
    /// `|2πħΔ/E_I|`: period of the conditioned rotation.
    pub tau: f64,
    /// `Λ/(2ℰ)`
    pub ratio: f64,
}

pub fn coherence_time(p: &TwoLevelParams) -> Result<CoherenceTime> {
    let delta = p.check()?;
    if p.energy == 0.0 {
        return Err(Error::InvalidParameter("coherence is never lost for ℰ = 0".into()));
    }
    Ok(CoherenceTime {
        tau_d: (PI * p.hbar * delta * p.lambda / (p.e_internal * p.energy)).abs(),
        tau: (2.0 * PI * p.hbar * delta / p.e_internal).abs(),
        ratio: p.lambda / (2.0 * p.energy),
    })
}

/// `ρ(t₁)` of a qubit that starts in `|0⟩` and evolves under `σx/2` for `Δt`.
pub fn qubit_clock_reference(delta_t: f64) -> CMat {
    let (cs, sn) = (delta_t.cos(), delta_t.sin());
    CMat::from_row_slice(2, 2, &[c(1.0 + cs, 0.0), c(0.0, sn), c(0.0, -sn), c(1.0 - cs, 0.0)]) * c(0.5, 0.0)
}

/// Heisenberg-evolved qubit generators `(σx, σz cos t + σy sin t)` under `σx/2`.
pub fn free_generators_reference(t: f64) -> (CMat, CMat) {
    (linalg::pauli_x(), linalg::pauli_z().scale(t.cos()) + linalg::pauli_y().scale(t.sin()))
}

/// One point of a coupling-scale sweep; singular points carry no values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepRow {
    pub lambda: f64,
    pub omega: Option<f64>,
    pub phi: Option<f64>,
}

impl SweepRow {
    pub fn singular(&self) -> bool {
        self.omega.is_none()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepBackend {
    /// Closed forms.
    Oracle,
    /// Effective Hamiltonian built numerically, `ω = ⟨+|H_eff|+⟩ − ⟨−|H_eff|−⟩`.
    Pipeline,
}

/// `(φ, ω)` read off a numerically built effective Hamiltonian.
pub fn pipeline_phi_omega(p: &TwoLevelParams) -> Result<(f64, f64)> {
    let spec = InteractionSpec::gravitational(p.lambda)
        .map_err(|_| Error::Singular(format!("coupling scale {}", p.lambda)))?;
    let heff = interactions::effective_hamiltonian(&p.hamiltonian(), Some(&spec), p.energy)?;
    if let Some(&e) = heff.excluded_eigenvalues.first() {
        return Err(Error::SingularSector(e));
    }
    let s = c(0.5f64.sqrt(), 0.0);
    let plus = linalg::CVec::from_vec(vec![s, s]);
    let minus = linalg::CVec::from_vec(vec![s, -s]);
    let omega = linalg::vec_expectation(&heff.op, &plus) - linalg::vec_expectation(&heff.op, &minus);
    let phi = heff.op.trace().re / 2.0;
    Ok((phi, omega))
}

fn row(p: &TwoLevelParams, backend: SweepBackend) -> SweepRow {
    let values = match backend {
        SweepBackend::Oracle => phi_omega_massive(p),
        SweepBackend::Pipeline => pipeline_phi_omega(p),
    };
    match values {
        Ok((phi, omega)) if phi.is_finite() && omega.is_finite() => {
            SweepRow { lambda: p.lambda, omega: Some(omega), phi: Some(phi) }
        }
        _ => SweepRow { lambda: p.lambda, omega: None, phi: None },
    }
}

/// Evaluates every coupling scale in `lambdas`, in parallel, keeping order.
pub fn sweep(template: &TwoLevelParams, lambdas: &[f64], backend: SweepBackend) -> Vec<SweepRow> {
    lambdas.par_iter().map(|&l| row(&template.with_lambda(l), backend)).collect()
}

/// `n` evenly spaced points from `start` to `stop`, both included.
pub fn lambda_grid(start: f64, stop: f64, n: usize) -> Result<Vec<f64>> {
    if n < 2 || !(stop > start) {
        return Err(Error::InvalidParameter(format!(
            "need at least 2 points on an increasing range, got {n} on [{start}, {stop}]"
        )));
    }
    // Weighted endpoints rather than repeated steps, so grid points that are
    // exactly representable (0, ±½ on [−3, 3]) come out exact.
    let m = (n - 1) as f64;
    Ok((0..n).map(|i| (start * (m - i as f64) + stop * i as f64) / m).collect())
}

/// Coupling scales in `[lo, hi]` where `Δ` vanishes, found by sign changes of
/// `Λ²Δ` on an `n`-point grid and refined by bisection.
pub fn locate_singularities(template: &TwoLevelParams, lo: f64, hi: f64, n: usize) -> Result<Vec<f64>> {
    let scaled = |l: f64| (l + template.mass_energy).powi(2) - template.e_internal.powi(2) / 4.0;
    let grid = lambda_grid(lo, hi, n)?;
    let mut roots = Vec::new();
    for w in grid.windows(2) {
        let (mut a, mut b) = (w[0], w[1]);
        let (fa, fb) = (scaled(a), scaled(b));
        if fa == 0.0 {
            roots.push(a);
            continue;
        }
        if fa * fb > 0.0 {
            continue;
        }
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if scaled(a) * scaled(m) <= 0.0 {
                b = m;
            } else {
                a = m;
            }
            if b - a <= f64::EPSILON * a.abs().max(1.0) {
                break;
            }
        }
        roots.push(0.5 * (a + b));
    }
    if let Some(&last) = grid.last() {
        if scaled(last) == 0.0 {
            roots.push(last);
        }
    }
    roots.dedup_by(|x, y| (*x - *y).abs() <= 1e-12);
    Ok(roots)
}

/// Trace distance to `I/2` of the equal-weight mixture of sectors `0` and `ℰ`
/// started from `|0⟩`, evolved with the numerical Kraus map.
pub fn decoherence_distance(p: &TwoLevelParams, t: f64) -> Result<f64> {
    let spec = InteractionSpec::gravitational(p.lambda)?;
    let h = p.hamiltonian();
    let sectors = [0.0, p.energy]
        .iter()
        .map(|&e| Ok((0.5, interactions::effective_hamiltonian(&h, Some(&spec), e)?.op)))
        .collect::<Result<Vec<_>>>()?;
    let rho0 = linalg::projector(&linalg::basis(2, 0));
    let rho = interactions::kraus_evolution(&rho0, &sectors, t / p.hbar)?;
    Ok(linalg::state_distance(&rho, &linalg::identity(2).scale(0.5))?.trace_distance)
}

/// First time in `(0, t_max]` at which the two-sector mixture becomes
/// maximally mixed, by a grid scan followed by golden-section refinement.
pub fn decoherence_time_search(p: &TwoLevelParams, t_max: f64, samples: usize) -> Result<f64> {
    if samples < 3 || !(t_max > 0.0) {
        return Err(Error::InvalidParameter("search needs t_max > 0 and at least 3 samples".into()));
    }
    let dist = |t: f64| decoherence_distance(p, t);
    let step = t_max / samples as f64;
    let values = (0..=samples).map(|i| dist(i as f64 * step)).collect::<Result<Vec<_>>>()?;
    let i = (1..samples)
        .find(|&i| values[i] <= values[i - 1] && values[i] <= values[i + 1] && values[i] < 0.25)
        .ok_or_else(|| Error::Singular(format!("no loss of coherence found before t = {t_max}")))?;
    let (mut a, mut b) = ((i - 1) as f64 * step, (i + 1) as f64 * step);
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = b - inv_phi * (b - a);
    let mut x2 = a + inv_phi * (b - a);
    let (mut f1, mut f2) = (dist(x1)?, dist(x2)?);
    while b - a > 1e-13 * b.abs().max(1.0) {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = dist(x1)?;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = dist(x2)?;
        }
    }
    Ok(0.5 * (a + b))
}
