//! Schrödinger and Heisenberg pictures of the universe.
//!
//! The picture map `U = Σ_k e^{−iH_eff (t_k − t_ref)} ⊗ |t_k⟩⟨t_k|` moves the
//! encoded evolution out of the history state and into the observables. A
//! mixture over several eigensectors with a common initial state has no such
//! unitary; it is handled by the Kraus set `{√p_s U_s}` instead.

use crate::clock::{self, ClockModel};
use crate::error::{Error, Result};
use crate::interactions::EffectiveHamiltonian;
use crate::linalg::{self, c, CMat, CVec};
use crate::universe::{self, HistoryState, MixedUniverse, UniverseSpec};

/// Tolerance of the no-encoded-evolution predicate.
pub const NO_EVOLUTION_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PictureKind {
    Unitary,
    Kraus,
}

#[derive(Debug, Clone)]
pub struct PictureMap {
    kind: PictureKind,
    dim_s: usize,
    clock: ClockModel,
    reference_time: f64,
    weights: Vec<f64>,
    sectors: Vec<EffectiveHamiltonian>,
    /// Per sector, `e^{−iH_eff (t_k − t_ref)}` for every reading `k`.
    blocks: Vec<Vec<CMat>>,
    /// Optional local unitary `W` applied after the block map: `U → U·W`.
    local: Option<CMat>,
}

fn sector_blocks(heff: &EffectiveHamiltonian, clock: &ClockModel, t_ref: f64) -> Result<Vec<CMat>> {
    clock.grid().iter().map(|&t| heff.evolution(t - t_ref)).collect()
}

/// Unitary map of a single-sector universe, referenced to `t = 0`.
pub fn sp_hp_map(spec: &UniverseSpec) -> Result<PictureMap> {
    sp_hp_map_at(spec, 0.0)
}

/// Unitary map referenced to `t_ref`: the Heisenberg state then carries the
/// system state at `t_ref`.
pub fn sp_hp_map_at(spec: &UniverseSpec, t_ref: f64) -> Result<PictureMap> {
    let heff = spec.effective_hamiltonian()?;
    let blocks = sector_blocks(&heff, spec.clock(), t_ref)?;
    Ok(PictureMap {
        kind: PictureKind::Unitary,
        dim_s: spec.dim_system(),
        clock: spec.clock().clone(),
        reference_time: t_ref,
        weights: vec![1.0],
        sectors: vec![heff],
        blocks: vec![blocks],
        local: None,
    })
}

/// Map for a mixed universe: unitary for one sector, Kraus for several
/// sectors sharing one initial density. Unequal initial densities admit no map.
pub fn sp_hp_map_mixed(mixed: &MixedUniverse) -> Result<PictureMap> {
    let comps = mixed.components();
    let rho_ref = &comps[0].rho0;
    if let Some(other) = comps.iter().find(|s| linalg::max_norm(&(&s.rho0 - rho_ref)) > 1e-12) {
        return Err(Error::NoPictureMap(format!(
            "sectors at {} and {} start from different system states",
            comps[0].energy, other.energy
        )));
    }
    let base = mixed.base();
    let blocks = comps.iter().map(|s| sector_blocks(&s.effective, base.clock(), 0.0)).collect::<Result<Vec<_>>>()?;
    Ok(PictureMap {
        kind: if comps.len() == 1 { PictureKind::Unitary } else { PictureKind::Kraus },
        dim_s: base.dim_system(),
        clock: base.clock().clone(),
        reference_time: 0.0,
        weights: comps.iter().map(|s| s.weight).collect(),
        sectors: comps.iter().map(|s| s.effective.clone()).collect(),
        blocks,
        local: None,
    })
}

impl PictureMap {
    pub fn kind(&self) -> PictureKind {
        self.kind
    }

    pub fn dim_system(&self) -> usize {
        self.dim_s
    }

    pub fn clock(&self) -> &ClockModel {
        &self.clock
    }

    pub fn reference_time(&self) -> f64 {
        self.reference_time
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn sectors(&self) -> &[EffectiveHamiltonian] {
        &self.sectors
    }

    fn dim(&self) -> usize {
        self.dim_s * self.clock.dim()
    }

    /// Same map followed by the local unitary `W_S ⊗ W_C`.
    pub fn compose_local(&self, w_s: &CMat, w_c: &CMat) -> Result<Self> {
        if w_s.shape() != (self.dim_s, self.dim_s) || w_c.shape() != (self.clock.dim(), self.clock.dim()) {
            return Err(Error::DimensionMismatch("local unitary does not match the universe".into()));
        }
        let w = linalg::tensor(w_s, w_c);
        let defect = linalg::unitarity_defect(&w);
        if defect > linalg::STRUCTURAL_TOL {
            return Err(Error::InvalidParameter(format!("local operator is not unitary (defect {defect:.3e})")));
        }
        let local = match &self.local {
            Some(prev) => prev * w,
            None => w,
        };
        Ok(Self { local: Some(local), ..self.clone() })
    }

    /// The full operators: `U` (unitary kind) or every `B_s = √p_s U_s`.
    pub fn operators(&self) -> Vec<CMat> {
        let (ns, d) = (self.dim_s, self.clock.dim());
        self.blocks
            .iter()
            .zip(&self.weights)
            .map(|(blocks, p)| {
                let mut u = CMat::zeros(ns * d, ns * d);
                for (k, b) in blocks.iter().enumerate() {
                    for i in 0..ns {
                        for j in 0..ns {
                            u[(i * d + k, j * d + k)] = b[(i, j)] * p.sqrt();
                        }
                    }
                }
                match &self.local {
                    Some(w) => u * w,
                    None => u,
                }
            })
            .collect()
    }

    /// The unitary, when the map is one.
    pub fn unitary(&self) -> Option<CMat> {
        (self.kind == PictureKind::Unitary).then(|| self.operators().remove(0))
    }

    /// `max |Σ B†B − I|`; the unitarity defect for the unitary kind.
    pub fn completeness_defect(&self) -> f64 {
        let n = self.dim();
        let sum = self.operators().iter().fold(CMat::zeros(n, n), |acc, b| acc + b.adjoint() * b);
        linalg::max_norm(&(sum - linalg::identity(n)))
    }

    /// `Σ_s B_s† A B_s` for an arbitrary universe operator.
    pub fn transform_universe_operator(&self, a: &CMat) -> Result<CMat> {
        let n = self.dim();
        if a.shape() != (n, n) {
            return Err(Error::DimensionMismatch(format!("operator is {}x{}, universe has {n}", a.nrows(), a.ncols())));
        }
        Ok(self.operators().iter().fold(CMat::zeros(n, n), |acc, b| acc + b.adjoint() * a * b))
    }

    /// `U† |Ψ⟩`; only defined for the unitary kind.
    pub fn to_heisenberg_vector(&self, psi: &CVec) -> Result<CVec> {
        let u = self.unitary().ok_or_else(|| Error::NoPictureMap("a Kraus map has no inverse on vectors".into()))?;
        Ok(u.adjoint() * psi)
    }

    /// `U |Ψ^(ℍ)⟩`
    pub fn to_schrodinger_vector(&self, psi: &CVec) -> Result<CVec> {
        let u = self.unitary().ok_or_else(|| Error::NoPictureMap("a Kraus map has no inverse on vectors".into()))?;
        Ok(u * psi)
    }

    /// `U† (I ⊗ Π_k) U`; equal to `I ⊗ Π_k` unless a clock unitary was composed in.
    pub fn projector(&self, k: usize) -> Result<CMat> {
        let ns = self.dim_s;
        let pi = linalg::tensor(&linalg::identity(ns), &self.clock.projector(k)?);
        if self.local.is_none() {
            return Ok(pi);
        }
        self.transform_universe_operator(&pi)
    }
}

/// `Σ_s B_s† (o ⊗ I) B_s`.
pub fn to_hp_observable(o_sys: &CMat, map: &PictureMap) -> Result<CMat> {
    let (ns, d) = (map.dim_s, map.clock.dim());
    if o_sys.shape() != (ns, ns) {
        return Err(Error::DimensionMismatch(format!(
            "observable is {}x{}, system has {ns}",
            o_sys.nrows(),
            o_sys.ncols()
        )));
    }
    if map.local.is_some() {
        return map.transform_universe_operator(&linalg::tensor(o_sys, &linalg::identity(d)));
    }
    // Block-diagonal in the clock readings: block k is Σ_s p_s U_sk† o U_sk.
    let mut out = CMat::zeros(ns * d, ns * d);
    for k in 0..d {
        let block = map
            .blocks
            .iter()
            .zip(&map.weights)
            .fold(CMat::zeros(ns, ns), |acc, (b, p)| acc + b[k].adjoint() * o_sys * &b[k] * c(*p, 0.0));
        for i in 0..ns {
            for j in 0..ns {
                out[(i * d + k, j * d + k)] = block[(i, j)];
            }
        }
    }
    Ok(linalg::hermitian_part(&out))
}

/// A state of the universe in the Heisenberg picture.
#[derive(Debug, Clone)]
pub enum HeisenbergState {
    Pure(CVec),
    Mixed(CMat),
}

impl HeisenbergState {
    /// `ψ₀ ⊗ |u⟩`, `|u⟩` the uniform clock state.
    pub fn product(psi0: &CVec, clock: &ClockModel) -> Self {
        Self::Pure(linalg::tensor_vec(psi0, &clock.uniform_state()))
    }

    /// `ρ₀ ⊗ |u⟩⟨u|`
    pub fn mixed_product(rho0: &CMat, clock: &ClockModel) -> Self {
        Self::Mixed(linalg::tensor(rho0, &linalg::projector(&clock.uniform_state())))
    }

    pub fn density(&self) -> CMat {
        match self {
            Self::Pure(v) => linalg::projector(v),
            Self::Mixed(r) => r.clone(),
        }
    }

    /// Schmidt rank 1 for pure states; for mixed states, whether every
    /// conditioned state coincides (equivalent for the constructions here).
    pub fn is_separable(&self, dim_s: usize, dim_c: usize) -> Result<bool> {
        match self {
            Self::Pure(v) => Ok(linalg::schmidt_rank(v, dim_s, dim_c, NO_EVOLUTION_TOL)? == 1),
            Self::Mixed(r) => Ok(no_evolution_mixed(r, dim_s, dim_c)?.passed),
        }
    }

    pub fn no_evolution(&self, dim_s: usize, dim_c: usize) -> Result<NoEvolution> {
        match self {
            Self::Pure(v) => no_evolution_pure(v, dim_s, dim_c),
            Self::Mixed(r) => no_evolution_mixed(r, dim_s, dim_c),
        }
    }
}

/// `U†|Ψ⟩` for a pure history, which must carry no encoded evolution.
pub fn heisenberg_state(hist: &HistoryState, map: &PictureMap) -> Result<HeisenbergState> {
    let state = HeisenbergState::Pure(map.to_heisenberg_vector(hist.vec())?);
    check_heisenberg(state, map)
}

/// Heisenberg state of a mixed universe: `W†(ρ₀ ⊗ |u⟩⟨u|)W`, checked against
/// the map so that `Σ B_s (·) B_s†` reproduces the universe state.
pub fn heisenberg_state_mixed(mixed: &MixedUniverse, map: &PictureMap) -> Result<HeisenbergState> {
    let rho0 = &mixed.components()[0].rho0;
    let mut r = linalg::tensor(rho0, &linalg::projector(&map.clock.uniform_state()));
    if let Some(w) = &map.local {
        r = w.adjoint() * r * w;
    }
    let back = map.operators().iter().fold(CMat::zeros(r.nrows(), r.ncols()), |acc, b| acc + b * &r * b.adjoint());
    let miss = linalg::max_norm(&(back - mixed.assembled()));
    if miss > 1e-10 {
        return Err(Error::NoPictureMap(format!("map does not reproduce this universe state (miss {miss:.3e})")));
    }
    check_heisenberg(HeisenbergState::Mixed(r), map)
}

fn check_heisenberg(state: HeisenbergState, map: &PictureMap) -> Result<HeisenbergState> {
    // Local clock unitaries may legitimately move weight between readings, so
    // the check applies to the bare map only.
    if map.local.is_none() {
        let report = state.no_evolution(map.dim_s, map.clock.dim())?;
        if !report.passed {
            return Err(Error::NoPictureMap(format!(
                "transformed state still encodes evolution (deviation {:.3e})",
                report.worst_deviation
            )));
        }
    }
    Ok(state)
}

/// `o_hp · Π_k^(ℍ)`
pub fn relative_observable(o_hp: &CMat, map: &PictureMap, k: usize) -> Result<CMat> {
    let pi = map.projector(k)?;
    if o_hp.shape() != pi.shape() {
        return Err(Error::DimensionMismatch("observable does not act on the universe".into()));
    }
    Ok(o_hp * pi)
}

fn reading_weight(hstate: &HeisenbergState, pi: &CMat, k: usize) -> Result<f64> {
    let w = linalg::expectation(pi, &hstate.density());
    if w < universe::MIN_READING_WEIGHT {
        return Err(Error::UnphysicalReading(k));
    }
    Ok(w)
}

/// `⟨o_hp Π_k⟩ / ⟨Π_k⟩` in the Heisenberg state.
pub fn relative_expectation(o_hp: &CMat, map: &PictureMap, k: usize, hstate: &HeisenbergState) -> Result<f64> {
    let pi = map.projector(k)?;
    let w = reading_weight(hstate, &pi, k)?;
    let num = (hstate.density() * o_hp * pi).trace().re;
    Ok(num / w)
}

/// `Tr_C[o_hp Π_k (I ⊗ σ_C)] / ⟨Π_k⟩`, with `σ_C` the clock's reduced state.
/// For the bare map this is the system observable evolved to `t_k`.
pub fn reduced_relative_observable(o_hp: &CMat, map: &PictureMap, k: usize, hstate: &HeisenbergState) -> Result<CMat> {
    let (ns, d) = (map.dim_s, map.clock.dim());
    let pi = map.projector(k)?;
    let w = reading_weight(hstate, &pi, k)?;
    let sigma = linalg::partial_trace_system(&hstate.density(), ns, d)?;
    let rel = o_hp * pi;
    Ok(linalg::contract_clock(&rel, &sigma, ns, d)? / c(w, 0.0))
}

/// Outcome of the no-encoded-evolution predicate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoEvolution {
    pub passed: bool,
    pub worst_deviation: f64,
}

/// Pure case: every non-empty slice `⟨t_k|Ψ⟩` is the same system state up to phase.
pub fn no_evolution_pure(psi: &CVec, dim_s: usize, dim_c: usize) -> Result<NoEvolution> {
    let slices = (0..dim_c).map(|k| linalg::partial_inner_clock(k, psi, dim_s, dim_c)).collect::<Result<Vec<_>>>()?;
    let live: Vec<CVec> = slices
        .iter()
        .filter(|s| s.norm_squared() >= universe::MIN_READING_WEIGHT)
        .map(|s| s / c(s.norm(), 0.0))
        .collect();
    let Some(reference) = live.first() else {
        return Err(Error::UnphysicalReading(0));
    };
    let worst = live
        .iter()
        .map(|s| {
            let overlap = reference.dotc(s);
            let phase = if overlap.norm() > 0.0 { overlap / overlap.norm() } else { c(1.0, 0.0) };
            (s - reference * phase).norm()
        })
        .fold(0.0, f64::max);
    Ok(NoEvolution { passed: worst <= NO_EVOLUTION_TOL, worst_deviation: worst })
}

/// Mixed case: every conditioned `Tr_C[R Π_k]/Tr[R Π_k]` coincides.
pub fn no_evolution_mixed(r: &CMat, dim_s: usize, dim_c: usize) -> Result<NoEvolution> {
    let live = (0..dim_c)
        .filter_map(|k| match universe::condition_density(r, dim_s, dim_c, k) {
            Err(Error::UnphysicalReading(_)) => None,
            other => Some(other),
        })
        .collect::<Result<Vec<_>>>()?;
    let Some(reference) = live.first() else {
        return Err(Error::UnphysicalReading(0));
    };
    let worst = live.iter().map(|s| linalg::max_norm(&(s - reference))).fold(0.0, f64::max);
    Ok(NoEvolution { passed: worst <= NO_EVOLUTION_TOL, worst_deviation: worst })
}

/// `I ⊗ e^{−iĥ·steps·δ} = I ⊗ shift^steps`.
pub fn gauge_shift(steps: i64, dim_s: usize, clock: &ClockModel) -> Result<CMat> {
    clock::composite_shift(dim_s, clock, steps)
}

/// Average of `G_n† o G_n` over all clock shifts `G_n`. The result commutes
/// with `I ⊗ ĥ` exactly.
pub fn group_average(o_hp: &CMat, dim_s: usize, clock: &ClockModel) -> Result<CMat> {
    clock.require_cyclic()?;
    let d = clock.dim();
    if o_hp.shape() != (dim_s * d, dim_s * d) {
        return Err(Error::DimensionMismatch("observable does not act on the universe".into()));
    }
    let sum = (0..d as i64)
        .fold(CMat::zeros(o_hp.nrows(), o_hp.ncols()), |acc, n| acc + clock::conjugate_by_shift(o_hp, clock, n));
    Ok(sum / c(d as f64, 0.0))
}

/// `d|ψ⟩/dt̂` by symmetric differences of slices, cyclic in the readings.
pub fn time_op_derivative_state(psi: &CVec, dim_s: usize, clock: &ClockModel) -> Result<CVec> {
    clock.require_cyclic()?;
    let d = clock.dim();
    if psi.len() != dim_s * d {
        return Err(Error::DimensionMismatch(format!("state has dimension {}, universe has {}", psi.len(), dim_s * d)));
    }
    let scale = c(1.0 / (2.0 * clock.delta()), 0.0);
    Ok(CVec::from_fn(dim_s * d, |r, _| {
        let (i, k) = (r / d, r % d);
        let next = psi[i * d + clock.shifted_index(k, 1)];
        let prev = psi[i * d + clock.shifted_index(k, -1)];
        (next - prev) * scale
    }))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Difference {
    /// `(S†AS − SAS†)/(2δ)`, second order.
    #[default]
    Symmetric,
    /// `(S†AS − A)/δ`, the literal forward limit, first order.
    Forward,
}

/// `dA/dt̂` by conjugation with the clock shift `S = I ⊗ shift`.
pub fn time_op_derivative_op(a: &CMat, clock: &ClockModel, variant: Difference) -> Result<CMat> {
    clock.require_cyclic()?;
    if !a.nrows().is_multiple_of(clock.dim()) || !a.is_square() {
        return Err(Error::DimensionMismatch("operator does not act on system ⊗ clock".into()));
    }
    let delta = clock.delta();
    let forward = clock::conjugate_by_shift(a, clock, 1);
    Ok(match variant {
        Difference::Symmetric => (forward - clock::conjugate_by_shift(a, clock, -1)) / c(2.0 * delta, 0.0),
        Difference::Forward => (forward - a) / c(delta, 0.0),
    })
}

/// `|Ψ^(𝕀)⟩ = U_0†|Ψ⟩` with `U_0 = e^{−iĤ⊗t̂}` the free map, and the residual
/// `‖i d|Ψ^(𝕀)⟩/dt̂ − (V^(𝕀) − ℰ)|Ψ^(𝕀)⟩‖` of its equation of motion.
#[derive(Debug, Clone)]
pub struct InteractionPicture {
    pub state: CVec,
    pub residual: f64,
}

pub fn interaction_picture_state(hist: &HistoryState) -> Result<InteractionPicture> {
    let spec = hist.spec();
    let interaction = spec.interaction().ok_or(Error::NoInteraction)?;
    let ns = spec.dim_system();
    let free = UniverseSpec::free(spec.h_system().clone(), spec.clock().clone(), 0.0)?;
    let u0 = sp_hp_map(&free)?.unitary().expect("single-sector map is unitary");
    let state = u0.adjoint() * hist.vec();
    let v = crate::interactions::build_interaction(interaction, spec.h_system(), spec.clock())?;
    let v_int = u0.adjoint() * v * &u0;
    let lhs = time_op_derivative_state(&state, ns, spec.clock())? * linalg::I;
    let rhs = v_int * &state - &state * c(spec.energy(), 0.0);
    Ok(InteractionPicture { residual: (lhs - rhs).norm(), state })
}

/// `max |P (U†(I⊗ĥ)U − (I⊗ĥ − H_eff⊗I)) P|` with `P` projecting the clock onto
/// the central half of its frequency band. Outside that band the finite
/// spectrum wraps around and the identity cannot hold.
pub fn hp_generator_deviation(map: &PictureMap) -> Result<f64> {
    if map.kind != PictureKind::Unitary || map.local.is_some() {
        return Err(Error::NoPictureMap("deviation is defined for the bare unitary map".into()));
    }
    map.clock.require_cyclic()?;
    let (ns, d) = (map.dim_s, map.clock.dim());
    let h_c = linalg::tensor(&linalg::identity(ns), map.clock.h_op());
    let transformed = map.transform_universe_operator(&h_c)?;
    let expected = &h_c - linalg::tensor(&map.sectors[0].op, &linalg::identity(d));
    let max_freq = map.clock.frequencies().iter().fold(0.0_f64, |m, w| m.max(w.abs()));
    let fb = map.clock.frequency_basis();
    let mut band = CMat::zeros(d, d);
    for (j, w) in map.clock.frequencies().iter().enumerate() {
        if w.abs() <= 0.5 * max_freq {
            band += linalg::projector(&fb.column(j).into_owned());
        }
    }
    let p = linalg::tensor(&linalg::identity(ns), &band);
    Ok(linalg::max_norm(&(&p * (transformed - expected) * &p)))
}
