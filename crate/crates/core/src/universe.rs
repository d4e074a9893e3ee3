//! Universe Hamiltonians, history states and conditioning.
//!
//! The universe is `system ⊗ clock` with composite index `i·d + k` for
//! system level `i` and clock reading `k`. A history state stores the whole
//! conditioned trajectory: its slice at reading `k` is `ψ(t_k)/√d`.

use crate::clock::ClockModel;
use crate::error::{Error, Result};
use crate::interactions::{self, EffectiveHamiltonian, InteractionSpec};
use crate::linalg::{self, c, CMat, CVec, C64};

/// Below this `Tr[R Π_k]` a reading carries no weight and cannot be conditioned on.
pub const MIN_READING_WEIGHT: f64 = 1e-14;
const NORM_TOL: f64 = 1e-10;

/// System Hamiltonian, clock, optional interaction and constraint eigenvalue.
#[derive(Debug, Clone)]
pub struct UniverseSpec {
    h_system: CMat,
    clock: ClockModel,
    interaction: Option<InteractionSpec>,
    energy: f64,
}

impl PartialEq for UniverseSpec {
    fn eq(&self, other: &Self) -> bool {
        self.energy == other.energy
            && self.interaction == other.interaction
            && self.clock.kind() == other.clock.kind()
            && self.clock.grid() == other.clock.grid()
            && self.clock.h_op() == other.clock.h_op()
            && self.h_system == other.h_system
    }
}

impl UniverseSpec {
    pub fn new(h_system: CMat, clock: ClockModel, interaction: Option<InteractionSpec>, energy: f64) -> Result<Self> {
        if !h_system.is_square() || h_system.nrows() == 0 {
            return Err(Error::DimensionMismatch(format!(
                "system Hamiltonian is {}x{}",
                h_system.nrows(),
                h_system.ncols()
            )));
        }
        let defect = linalg::hermiticity_defect(&h_system);
        if defect > linalg::STRUCTURAL_TOL {
            return Err(Error::NotHermitian(defect));
        }
        if !energy.is_finite() {
            return Err(Error::InvalidParameter(format!("constraint eigenvalue must be finite, got {energy}")));
        }
        if let Some(spec) = &interaction {
            let v = interactions::build_interaction(spec, &h_system, &clock)?;
            let report = interactions::validate_interaction(&v, &h_system, &clock)?;
            if !report.passed() {
                return Err(Error::InvalidParameter(format!(
                    "interaction {} is not admissible: {report:?}",
                    spec.tag()
                )));
            }
        }
        Ok(Self { h_system, clock, interaction, energy })
    }

    /// Free universe, no interaction.
    pub fn free(h_system: CMat, clock: ClockModel, energy: f64) -> Result<Self> {
        Self::new(h_system, clock, None, energy)
    }

    pub fn h_system(&self) -> &CMat {
        &self.h_system
    }

    pub fn clock(&self) -> &ClockModel {
        &self.clock
    }

    pub fn interaction(&self) -> Option<&InteractionSpec> {
        self.interaction.as_ref()
    }

    pub fn energy(&self) -> f64 {
        self.energy
    }

    pub fn dim_system(&self) -> usize {
        self.h_system.nrows()
    }

    pub fn dim_clock(&self) -> usize {
        self.clock.dim()
    }

    pub fn dim(&self) -> usize {
        self.dim_system() * self.dim_clock()
    }

    /// Same universe, different constraint eigenvalue.
    pub fn with_energy(&self, energy: f64) -> Self {
        Self { energy, ..self.clone() }
    }

    pub fn effective_hamiltonian(&self) -> Result<EffectiveHamiltonian> {
        interactions::effective_hamiltonian(&self.h_system, self.interaction.as_ref(), self.energy)
    }
}

/// `𝓗 = Ĥ⊗I + I⊗ĥ + V`.
pub fn assemble_hamiltonian(spec: &UniverseSpec) -> Result<CMat> {
    let (ns, d) = (spec.dim_system(), spec.dim_clock());
    let mut h =
        linalg::tensor(&spec.h_system, &linalg::identity(d)) + linalg::tensor(&linalg::identity(ns), spec.clock.h_op());
    if let Some(v) = &spec.interaction {
        h += interactions::build_interaction(v, &spec.h_system, &spec.clock)?;
    }
    Ok(linalg::hermitian_part(&h))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ConstructionMode {
    /// Slices written down from the effective evolution. Conditioning is
    /// exact; stationarity is exact only when every `g_ℰ(E)` sits on the
    /// clock's frequency grid.
    #[default]
    Direct,
    /// Vector taken from the `ℰ`-eigenspace of `𝓗`, matched to `ψ₀` at the
    /// first reading. Stationary by construction.
    Solver,
}

/// A pure stationary state of the universe and the data it was built from.
#[derive(Debug, Clone)]
pub struct HistoryState {
    vec: CVec,
    spec: UniverseSpec,
    psi0: CVec,
    effective: EffectiveHamiltonian,
    mode: ConstructionMode,
}

fn check_state(psi0: &CVec, spec: &UniverseSpec, heff: &EffectiveHamiltonian) -> Result<()> {
    if psi0.len() != spec.dim_system() {
        return Err(Error::DimensionMismatch(format!(
            "initial state has dimension {}, system has {}",
            psi0.len(),
            spec.dim_system()
        )));
    }
    let norm = psi0.norm();
    if (norm - 1.0).abs() > NORM_TOL {
        return Err(Error::NotNormalized(norm));
    }
    if heff.excluded_population(psi0) > 1e-12 {
        return Err(Error::SingularSector(heff.excluded_eigenvalues[0]));
    }
    Ok(())
}

/// `Σ_k e^{−iH_eff(ℰ) t_k}|ψ₀⟩ ⊗ |t_k⟩ / √d`.
pub fn history_state_pure(spec: &UniverseSpec, psi0: &CVec) -> Result<HistoryState> {
    history_state_with(spec, psi0, ConstructionMode::Direct)
}

pub fn history_state_with(spec: &UniverseSpec, psi0: &CVec, mode: ConstructionMode) -> Result<HistoryState> {
    let effective = spec.effective_hamiltonian()?;
    check_state(psi0, spec, &effective)?;
    let vec = match mode {
        ConstructionMode::Direct => direct_vector(spec, &effective, psi0)?,
        ConstructionMode::Solver => solver_vector(spec, psi0)?,
    };
    Ok(HistoryState { vec, spec: spec.clone(), psi0: psi0.clone(), effective, mode })
}

fn direct_vector(spec: &UniverseSpec, heff: &EffectiveHamiltonian, psi0: &CVec) -> Result<CVec> {
    let (ns, d) = (spec.dim_system(), spec.dim_clock());
    let norm = 1.0 / (d as f64).sqrt();
    let mut out = CVec::zeros(ns * d);
    for (k, &t) in spec.clock.grid().iter().enumerate() {
        let slice = heff.evolution(t)? * psi0;
        for i in 0..ns {
            out[i * d + k] = slice[i] * norm;
        }
    }
    Ok(out)
}

fn solver_vector(spec: &UniverseSpec, psi0: &CVec) -> Result<CVec> {
    let (ns, d) = (spec.dim_system(), spec.dim_clock());
    let h = assemble_hamiltonian(spec)?;
    let tol = 1e-9 * (1.0 + linalg::max_norm(&h));
    let (_, basis) = linalg::eigensector(&h, spec.energy, tol)?;
    if basis.ncols() == 0 {
        return Err(Error::Singular(format!("{} is not an eigenvalue of the universe Hamiltonian", spec.energy)));
    }
    // Rows of the eigenbasis at the first reading: slice_0 = first · coeffs.
    let first = CMat::from_fn(ns, basis.ncols(), |i, j| basis[(i * d, j)]);
    let target = psi0 / c((d as f64).sqrt(), 0.0);
    let coeffs = first.clone().svd(true, true).solve(&target, 1e-12).map_err(|e| Error::Singular(e.to_string()))?;
    let miss = (&first * &coeffs - &target).norm();
    if miss > 1e-8 {
        return Err(Error::Singular(format!(
            "initial state is not reachable inside the constraint eigenspace (miss {miss:.3e})"
        )));
    }
    let vec = basis * coeffs;
    let norm = vec.norm();
    Ok(vec / c(norm, 0.0))
}

impl HistoryState {
    pub fn vec(&self) -> &CVec {
        &self.vec
    }

    pub fn spec(&self) -> &UniverseSpec {
        &self.spec
    }

    pub fn psi0(&self) -> &CVec {
        &self.psi0
    }

    pub fn effective(&self) -> &EffectiveHamiltonian {
        &self.effective
    }

    pub fn mode(&self) -> ConstructionMode {
        self.mode
    }

    /// `⟨t_k|Ψ⟩`, unnormalized.
    pub fn slice(&self, k: usize) -> Result<CVec> {
        linalg::partial_inner_clock(k, &self.vec, self.spec.dim_system(), self.spec.dim_clock())
    }

    /// Normalized system state relative to reading `k`.
    pub fn condition(&self, k: usize) -> Result<CVec> {
        condition_vector(&self.vec, self.spec.dim_system(), self.spec.dim_clock(), k)
    }

    /// `‖(𝓗 − ℰ)|Ψ⟩‖`
    pub fn stationarity_residual(&self) -> Result<f64> {
        stationarity_residual_pure(&self.vec, &self.spec)
    }

    /// `|Ψ⟩⟨Ψ|`
    pub fn density(&self) -> CMat {
        linalg::projector(&self.vec)
    }
}

/// Normalized `⟨t_k|ψ⟩` for a raw universe vector.
pub fn condition_vector(psi: &CVec, dim_s: usize, dim_c: usize, k: usize) -> Result<CVec> {
    let slice = linalg::partial_inner_clock(k, psi, dim_s, dim_c)?;
    let weight = slice.norm_squared();
    if weight < MIN_READING_WEIGHT {
        return Err(Error::UnphysicalReading(k));
    }
    Ok(slice / c(weight.sqrt(), 0.0))
}

/// `Tr_C[R Π_k] / Tr[R Π_k]` for a raw universe density.
pub fn condition_density(r: &CMat, dim_s: usize, dim_c: usize, k: usize) -> Result<CMat> {
    let block = clock_block(r, dim_s, dim_c, k)?;
    let weight = block.trace().re;
    if weight < MIN_READING_WEIGHT {
        return Err(Error::UnphysicalReading(k));
    }
    Ok(linalg::hermitian_part(&(block / c(weight, 0.0))))
}

/// `⟨t_k| R |t_k⟩` as a system operator.
pub fn clock_block(r: &CMat, dim_s: usize, dim_c: usize, k: usize) -> Result<CMat> {
    if r.nrows() != dim_s * dim_c || r.ncols() != dim_s * dim_c {
        return Err(Error::DimensionMismatch(format!(
            "operator is {}x{}, expected {}",
            r.nrows(),
            r.ncols(),
            dim_s * dim_c
        )));
    }
    if k >= dim_c {
        return Err(Error::IndexOutOfRange { index: k, dim: dim_c });
    }
    Ok(CMat::from_fn(dim_s, dim_s, |i, j| r[(i * dim_c + k, j * dim_c + k)]))
}

/// `‖(𝓗 − ℰ)|ψ⟩‖` for a raw universe vector.
pub fn stationarity_residual_pure(psi: &CVec, spec: &UniverseSpec) -> Result<f64> {
    let h = assemble_hamiltonian(spec)?;
    if psi.len() != h.nrows() {
        return Err(Error::DimensionMismatch(format!("state has dimension {}, universe has {}", psi.len(), h.nrows())));
    }
    Ok((h * psi - psi * c(spec.energy, 0.0)).norm())
}

/// `max |[R, 𝓗]|` for a raw universe density.
pub fn stationarity_residual_mixed(r: &CMat, spec: &UniverseSpec) -> Result<f64> {
    let h = assemble_hamiltonian(spec)?;
    if r.shape() != h.shape() {
        return Err(Error::DimensionMismatch(format!(
            "state is {}x{}, universe has {}",
            r.nrows(),
            r.ncols(),
            h.nrows()
        )));
    }
    Ok(linalg::max_norm(&linalg::commutator(r, &h)))
}

/// `max |e^{−i𝓗δ} R e^{i𝓗δ} − R|`: invariance under one clock step of the
/// universe's own evolution. On a finite clock this is the exact form of
/// stationarity for states without clock coherences, whose generator
/// commutator never vanishes entrywise.
pub fn translation_residual(r: &CMat, spec: &UniverseSpec) -> Result<f64> {
    spec.clock.require_cyclic()?;
    let h = assemble_hamiltonian(spec)?;
    if r.shape() != h.shape() {
        return Err(Error::DimensionMismatch(format!(
            "state is {}x{}, universe has {}",
            r.nrows(),
            r.ncols(),
            h.nrows()
        )));
    }
    let u = linalg::expm_hermitian(&h, spec.clock.delta())?;
    Ok(linalg::max_norm(&(&u * r * u.adjoint() - r)))
}

/// `d · ⟨a_k|b_k⟩`: the scalar product on the physical space, evaluated at
/// one reading. Equal to 1 for `a = b`.
pub fn physical_inner(a: &HistoryState, b: &HistoryState, k: usize) -> Result<C64> {
    if a.spec != b.spec {
        return Err(Error::SpecMismatch("history states belong to different universes".into()));
    }
    let d = a.spec.dim_clock() as f64;
    Ok(a.slice(k)?.dotc(&b.slice(k)?) * d)
}

/// One admissible (system energy, clock frequency) pair of the constraint
/// `E + ε + f(E)ε = ℰ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstraintPair {
    pub system_energy: f64,
    pub clock_frequency: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ConstraintSectors {
    pub pairs: Vec<ConstraintPair>,
    /// System eigenvalues with `f(E) = −1`, for which no frequency solves the constraint.
    pub excluded: Vec<f64>,
}

/// Enumerates the pairs of `Ĥ` and `ĥ` eigenvalues that satisfy the constraint within `tol`.
pub fn constraint_sectors(spec: &UniverseSpec, tol: f64) -> Result<ConstraintSectors> {
    let heff = spec.effective_hamiltonian();
    let mut out = ConstraintSectors::default();
    let levels: Vec<f64> = match &heff {
        Ok(h) => {
            out.excluded = h.excluded_eigenvalues.clone();
            h.levels.iter().map(|&(e, _)| e).collect()
        }
        Err(Error::AllExcluded) => {
            let fac = linalg::eigh(&spec.h_system)?;
            let mut all = fac.eigenvalues;
            all.dedup_by(|a, b| (*a - *b).abs() <= 1e-9);
            out.excluded = all;
            return Ok(out);
        }
        Err(e) => return Err(e.clone()),
    };
    let mut freqs = spec.clock.frequencies().to_vec();
    freqs.sort_by(f64::total_cmp);
    for &e in &levels {
        let f = spec.interaction.as_ref().map_or(0.0, |s| s.f(e));
        for &w in &freqs {
            if (e + w + f * w - spec.energy).abs() <= tol {
                out.pairs.push(ConstraintPair { system_energy: e, clock_frequency: w });
            }
        }
    }
    Ok(out)
}

/// One eigensector of a mixed universe: weight, constraint eigenvalue and
/// initial system density.
#[derive(Debug, Clone)]
pub struct MixedComponent {
    pub weight: f64,
    pub energy: f64,
    pub rho0: CMat,
    pub effective: EffectiveHamiltonian,
}

/// `R = Σ_k p_k U_k (ρ0_k ⊗ |u⟩⟨u|) U_k†`, with `|u⟩` the uniform clock
/// state and `U_k = Σ_j e^{−iH_eff(ℰ_k) t_j} ⊗ |t_j⟩⟨t_j|`.
#[derive(Debug, Clone)]
pub struct MixedUniverse {
    base: UniverseSpec,
    components: Vec<MixedComponent>,
    assembled: CMat,
}

/// Builds a mixture over eigensectors `(p_k, ℰ_k, ρ0_k)` of the universe `base`
/// (whose own constraint eigenvalue is ignored).
pub fn history_state_mixed(base: &UniverseSpec, sectors: &[(f64, f64, CMat)]) -> Result<MixedUniverse> {
    let weights: Vec<f64> = sectors.iter().map(|s| s.0).collect();
    interactions::check_weights(&weights)?;
    let (ns, d) = (base.dim_system(), base.dim_clock());
    let mut assembled = CMat::zeros(ns * d, ns * d);
    let mut components = Vec::with_capacity(sectors.len());
    for (p, energy, rho0) in sectors {
        if rho0.shape() != (ns, ns) {
            return Err(Error::DimensionMismatch(format!(
                "sector density is {}x{}, system has {ns}",
                rho0.nrows(),
                rho0.ncols()
            )));
        }
        linalg::check_density(rho0, linalg::DENSITY_TOL)?;
        let effective = base.with_energy(*energy).effective_hamiltonian()?;
        if (&effective.excluded_projector * rho0).trace().re > 1e-12 {
            return Err(Error::SingularSector(effective.excluded_eigenvalues[0]));
        }
        let slices = base.clock.grid().iter().map(|&t| effective.evolution(t)).collect::<Result<Vec<_>>>()?;
        // Block (j, l) of U (ρ0 ⊗ |u⟩⟨u|) U† is U_j ρ0 U_l† / d.
        for (j, uj) in slices.iter().enumerate() {
            let left = uj * rho0;
            for (l, ul) in slices.iter().enumerate() {
                let block = &left * ul.adjoint() * c(p / d as f64, 0.0);
                for a in 0..ns {
                    for b in 0..ns {
                        assembled[(a * d + j, b * d + l)] += block[(a, b)];
                    }
                }
            }
        }
        components.push(MixedComponent { weight: *p, energy: *energy, rho0: rho0.clone(), effective });
    }
    Ok(MixedUniverse { base: base.clone(), components, assembled: linalg::hermitian_part(&assembled) })
}

impl MixedUniverse {
    pub fn base(&self) -> &UniverseSpec {
        &self.base
    }

    pub fn components(&self) -> &[MixedComponent] {
        &self.components
    }

    pub fn assembled(&self) -> &CMat {
        &self.assembled
    }

    pub fn condition(&self, k: usize) -> Result<CMat> {
        condition_density(&self.assembled, self.base.dim_system(), self.base.dim_clock(), k)
    }

    /// `max |[R, 𝓗]|`
    pub fn stationarity_residual(&self) -> Result<f64> {
        stationarity_residual_mixed(&self.assembled, &self.base)
    }

    pub fn translation_residual(&self) -> Result<f64> {
        translation_residual(&self.assembled, &self.base)
    }
}

/// `(1/d) Σ_k ρ(t_k) ⊗ |t_k⟩⟨t_k|` with `ρ(t) = e^{−iH_eff t} ρ0 e^{iH_eff t}`:
/// a separable state whose conditioned dynamics is the usual evolution.
pub fn separable_history(spec: &UniverseSpec, rho0: &CMat) -> Result<CMat> {
    let (ns, d) = (spec.dim_system(), spec.dim_clock());
    if rho0.shape() != (ns, ns) {
        return Err(Error::DimensionMismatch(format!("density is {}x{}, system has {ns}", rho0.nrows(), rho0.ncols())));
    }
    linalg::check_density(rho0, linalg::DENSITY_TOL)?;
    let heff = spec.effective_hamiltonian()?;
    let mut out = CMat::zeros(ns * d, ns * d);
    for (k, &t) in spec.clock.grid().iter().enumerate() {
        let u = heff.evolution(t)?;
        let rho = &u * rho0 * u.adjoint() / c(d as f64, 0.0);
        for a in 0..ns {
            for b in 0..ns {
                out[(a * d + k, b * d + k)] = rho[(a, b)];
            }
        }
    }
    Ok(linalg::hermitian_part(&out))
}

/// `Σ_k ⟨t_k|R|t_k⟩ ⊗ |t_k⟩⟨t_k|`: removes every coherence between clock readings.
pub fn dephase_clock(r: &CMat, dim_s: usize, dim_c: usize) -> Result<CMat> {
    let mut out = CMat::zeros(r.nrows(), r.ncols());
    for k in 0..dim_c {
        let block = clock_block(r, dim_s, dim_c, k)?;
        for a in 0..dim_s {
            for b in 0..dim_s {
                out[(a * dim_c + k, b * dim_c + k)] = block[(a, b)];
            }
        }
    }
    Ok(out)
}
