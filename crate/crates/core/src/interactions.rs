//! System-clock interactions `V = f(Ĥ) ⊗ ĥ`, their effective Hamiltonians,
//! and the Kraus-channel evolution of mixtures over several eigensectors.
//!
//! For a universe eigenvalue `ℰ` the clock frequency paired with a system
//! eigenvalue `E` is `g_ℰ(E) = −(E − ℰ)/(1 + f(E))`, and the system evolves
//! under `H_eff(ℰ) = −g_ℰ(Ĥ)`. Eigenvalues with `f(E) = −1` admit no
//! solution; they are excluded per eigenvalue and reported.

use std::fmt;
use std::sync::Arc;

use crate::clock::ClockModel;
use crate::error::{Error, Result};
use crate::linalg::{self, c, CMat, CVec, C64};

/// Below this `|1 + f(E)|` an eigenvalue counts as singular.
pub const SINGULAR_TOL: f64 = 1e-12;
/// Eigenvalues closer than this are treated as one degenerate level.
const LEVEL_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InteractionKind {
    /// `f(E) = E/Λ`
    Gravitational {
        lambda: f64,
    },
    Custom,
}

/// The scalar coupling function `f` of `V = f(Ĥ) ⊗ ĥ`.
#[derive(Clone)]
pub struct InteractionSpec {
    kind: InteractionKind,
    tag: String,
    f: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl fmt::Debug for InteractionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("InteractionSpec").field("kind", &self.kind).field("tag", &self.tag).finish()
    }
}

impl PartialEq for InteractionSpec {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind && self.tag == other.tag
    }
}

impl InteractionSpec {
    /// `V^G = Ĥ ⊗ ĥ / Λ`.
    pub fn gravitational(lambda: f64) -> Result<Self> {
        if lambda == 0.0 || !lambda.is_finite() {
            return Err(Error::InvalidParameter(format!("coupling scale must be finite and non-zero, got {lambda}")));
        }
        Ok(Self {
            kind: InteractionKind::Gravitational { lambda },
            tag: format!("gravitational(lambda={lambda})"),
            f: Arc::new(move |e| e / lambda),
        })
    }

    /// Arbitrary `f`, identified by `tag` in reports and equality checks.
    pub fn custom<F>(tag: impl Into<String>, f: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self { kind: InteractionKind::Custom, tag: tag.into(), f: Arc::new(f) }
    }

    pub fn kind(&self) -> InteractionKind {
        self.kind
    }

    pub fn tag(&self) -> &str {
        &self.tag
    }

    pub fn lambda(&self) -> Option<f64> {
        match self.kind {
            InteractionKind::Gravitational { lambda } => Some(lambda),
            InteractionKind::Custom => None,
        }
    }

    pub fn f(&self, energy: f64) -> f64 {
        (self.f)(energy)
    }
}

fn coupling(spec: Option<&InteractionSpec>, e: f64) -> f64 {
    spec.map_or(0.0, |s| s.f(e))
}

/// `g_ℰ(E) = −(E − ℰ)/(1 + f(E))`; the free case is `spec = None`.
pub fn g_function(e: f64, spec: Option<&InteractionSpec>, sector_energy: f64) -> Result<f64> {
    let denom = 1.0 + coupling(spec, e);
    if !denom.is_finite() || denom.abs() <= SINGULAR_TOL {
        return Err(Error::SingularSector(e));
    }
    Ok(-(e - sector_energy) / denom)
}

/// `−g_ℰ(Ĥ)` for one sector, together with the eigenvalues it had to drop.
#[derive(Debug, Clone)]
pub struct EffectiveHamiltonian {
    pub op: CMat,
    pub sector_energy: f64,
    pub interaction: Option<String>,
    /// Distinct eigenvalues of `Ĥ` with `f(E) = −1`.
    pub excluded_eigenvalues: Vec<f64>,
    /// Projector onto the excluded eigenspaces (zero when none).
    pub excluded_projector: CMat,
    /// `(E, −g_ℰ(E))` for every admitted eigenvalue of `Ĥ`, ascending in `E`.
    pub levels: Vec<(f64, f64)>,
}

impl EffectiveHamiltonian {
    /// Weight a state places on excluded eigenspaces.
    pub fn excluded_population(&self, psi: &CVec) -> f64 {
        (&self.excluded_projector * psi).norm_squared()
    }

    pub fn evolution(&self, t: f64) -> Result<CMat> {
        linalg::expm_hermitian(&self.op, t)
    }
}

/// Builds `H_eff(ℰ) = −g_ℰ(Ĥ)` by functional calculus. Singular eigenvalues
/// are excluded (their eigenspaces map to zero) and listed; the call fails
/// only when every eigenvalue is excluded.
pub fn effective_hamiltonian(
    h_sys: &CMat,
    spec: Option<&InteractionSpec>,
    sector_energy: f64,
) -> Result<EffectiveHamiltonian> {
    let fac = linalg::eigh(h_sys)?;
    let n = h_sys.nrows();
    let mut op = CMat::zeros(n, n);
    let mut excluded_projector = CMat::zeros(n, n);
    let mut excluded: Vec<f64> = Vec::new();
    let mut levels: Vec<(f64, f64)> = Vec::new();
    for (j, &e) in fac.eigenvalues.iter().enumerate() {
        let v = fac.eigenvectors.column(j).into_owned();
        let proj = linalg::projector(&v);
        match g_function(e, spec, sector_energy) {
            Ok(g) => {
                op += proj * c(-g, 0.0);
                if levels.last().is_none_or(|&(prev, _)| (e - prev).abs() > LEVEL_TOL) {
                    levels.push((e, -g));
                }
            }
            Err(_) => {
                excluded_projector += proj;
                if excluded.last().is_none_or(|&prev| (e - prev).abs() > LEVEL_TOL) {
                    excluded.push(e);
                }
            }
        }
    }
    if levels.is_empty() {
        return Err(Error::AllExcluded);
    }
    Ok(EffectiveHamiltonian {
        op: linalg::hermitian_part(&op),
        sector_energy,
        interaction: spec.map(|s| s.tag().to_owned()),
        excluded_eigenvalues: excluded,
        excluded_projector,
        levels,
    })
}

/// `f(Ĥ) ⊗ ĥ`.
pub fn build_interaction(spec: &InteractionSpec, h_sys: &CMat, clock: &ClockModel) -> Result<CMat> {
    let fac = linalg::eigh(h_sys)?;
    if let Some(&bad) = fac.eigenvalues.iter().find(|&&e| !spec.f(e).is_finite()) {
        return Err(Error::InvalidParameter(format!("f is undefined at eigenvalue {bad}")));
    }
    let f_h = fac.apply(|e| c(spec.f(e), 0.0));
    Ok(linalg::tensor(&f_h, clock.h_op()))
}

/// One diagnostic: a residual norm and whether it is within tolerance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Check {
    pub residual: f64,
    pub passed: bool,
}

impl Check {
    fn new(residual: f64, tol: f64) -> Self {
        Self { residual, passed: residual <= tol }
    }
}

/// The three admissibility conditions on a system-clock interaction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InteractionReport {
    /// `‖[Ĥ⊗I + I⊗ĥ, V]‖`
    pub energy_conservation: Check,
    /// `‖[I⊗ĥ, V]‖`: `t̂` does not appear in `V`.
    pub time_independence: Check,
    /// Curvature of `ε ↦ V(ε)` over the `ĥ` spectrum: `V` is at most linear in `ĥ`.
    pub linearity: Check,
}

impl InteractionReport {
    pub fn passed(&self) -> bool {
        self.energy_conservation.passed && self.time_independence.passed && self.linearity.passed
    }
}

/// Checks an interaction operator against the admissibility conditions,
/// each at tolerance `1e-10`.
pub fn validate_interaction(v: &CMat, h_sys: &CMat, clock: &ClockModel) -> Result<InteractionReport> {
    let ns = h_sys.nrows();
    let d = clock.dim();
    if v.nrows() != ns * d || v.ncols() != ns * d {
        return Err(Error::DimensionMismatch(format!(
            "interaction is {}x{}, universe dimension is {}",
            v.nrows(),
            v.ncols(),
            ns * d
        )));
    }
    let tol = linalg::STRUCTURAL_TOL;
    let clock_part = linalg::tensor(&linalg::identity(ns), clock.h_op());
    let free = linalg::tensor(h_sys, &linalg::identity(d)) + &clock_part;
    let energy_conservation = Check::new(linalg::max_norm(&linalg::commutator(&free, v)), tol);
    let time_independence = Check::new(linalg::max_norm(&linalg::commutator(&clock_part, v)), tol);

    // V in the ĥ eigenbasis; block(j) is the system operator at frequency j.
    let basis = linalg::tensor(&linalg::identity(ns), clock.frequency_basis());
    let vb = basis.adjoint() * v * &basis;
    let block = |j: usize| CMat::from_fn(ns, ns, |a, b| vb[(a * d + j, b * d + j)]);
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| clock.frequencies()[a].total_cmp(&clock.frequencies()[b]));
    let mut curvature: f64 = 0.0;
    for w in order.windows(3) {
        let [x0, x1, x2] = [w[0], w[1], w[2]].map(|j| clock.frequencies()[j]);
        let (b0, b1, b2) = (block(w[0]), block(w[1]), block(w[2]));
        let second = ((b2 - &b1) / c(x2 - x1, 0.0) - (b1 - b0) / c(x1 - x0, 0.0)) * c(2.0 / (x2 - x0), 0.0);
        curvature = curvature.max(linalg::max_norm(&second));
    }
    Ok(InteractionReport { energy_conservation, time_independence, linearity: Check::new(curvature, tol) })
}

/// Weighted Kraus operators `B_k = √p_k · U_k`.
#[derive(Debug, Clone)]
pub struct KrausSet {
    pub weights: Vec<f64>,
    pub ops: Vec<CMat>,
}

pub(crate) fn check_weights(weights: &[f64]) -> Result<()> {
    if weights.is_empty() {
        return Err(Error::InvalidWeights("no sectors given".into()));
    }
    if let Some(p) = weights.iter().find(|&&p| !(p > 0.0) || !p.is_finite()) {
        return Err(Error::InvalidWeights(format!("weights must be positive, got {p}")));
    }
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidWeights(format!("weights sum to {total}, expected 1")));
    }
    Ok(())
}

impl KrausSet {
    /// `{√p_k e^{−iH_k t}}` for the given sector Hamiltonians.
    pub fn at_time(sectors: &[(f64, CMat)], t: f64) -> Result<Self> {
        let weights: Vec<f64> = sectors.iter().map(|(p, _)| *p).collect();
        check_weights(&weights)?;
        let ops = sectors
            .iter()
            .map(|(p, h)| Ok(linalg::expm_hermitian(h, t)? * c(p.sqrt(), 0.0)))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { weights, ops })
    }

    /// `max |Σ B_k† B_k − I|`
    pub fn completeness_defect(&self) -> f64 {
        let n = self.ops[0].nrows();
        let sum = self.ops.iter().fold(CMat::zeros(n, n), |acc, b| acc + b.adjoint() * b);
        linalg::max_norm(&(sum - linalg::identity(n)))
    }

    pub fn apply(&self, rho: &CMat) -> CMat {
        let n = rho.nrows();
        self.ops.iter().fold(CMat::zeros(n, n), |acc, b| acc + b * rho * b.adjoint())
    }
}

/// `Σ_k p_k e^{−iH_k t} ρ₀ e^{iH_k t}`.
pub fn kraus_evolution(rho0: &CMat, sectors: &[(f64, CMat)], t: f64) -> Result<CMat> {
    let kraus = KrausSet::at_time(sectors, t)?;
    if sectors.iter().any(|(_, h)| h.shape() != rho0.shape()) {
        return Err(Error::DimensionMismatch("sector Hamiltonian and state differ in dimension".into()));
    }
    Ok(linalg::hermitian_part(&kraus.apply(rho0)))
}

/// Distinguishability of the conditioned dynamics in two sectors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SectorOverlap {
    /// `|⟨ψ^ℰ′(t)|ψ^ℰ(t)⟩|` from the exact effective evolutions.
    pub exact: f64,
    /// `|⟨ψ₀|e^{i(ℰ′−ℰ)Ĥt/Λ}|ψ₀⟩|`, valid for `Λ` large against the system energies.
    pub approximation: f64,
    pub gap: f64,
}

pub fn sector_overlap(
    psi0: &CVec,
    h_sys: &CMat,
    lambda: f64,
    energy: f64,
    energy_prime: f64,
    t: f64,
) -> Result<SectorOverlap> {
    let spec = InteractionSpec::gravitational(lambda)?;
    let sectors = [energy, energy_prime]
        .into_iter()
        .map(|e| {
            let heff = effective_hamiltonian(h_sys, Some(&spec), e)?;
            if let Some(&bad) = heff.excluded_eigenvalues.first() {
                return Err(Error::SingularSector(bad));
            }
            Ok(heff.evolution(t)? * psi0)
        })
        .collect::<Result<Vec<_>>>()?;
    let exact = sectors[1].dotc(&sectors[0]).norm();
    let approx_op =
        linalg::func_of_hermitian(h_sys, |e| C64::from_polar(1.0, (energy_prime - energy) * e * t / lambda))?;
    let approximation = psi0.dotc(&(approx_op * psi0)).norm();
    Ok(SectorOverlap { exact, approximation, gap: (exact - approximation).abs() })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NonunitarityRow {
    pub t: f64,
    pub purity: f64,
    /// Trace distance to the maximally mixed state `I/n`.
    pub distance_to_mixed: f64,
    pub min_eigenvalue: f64,
}

/// Per-sample purity, distance to `I/n` and smallest eigenvalue.
pub fn nonunitarity_report(samples: &[(f64, CMat)]) -> Result<Vec<NonunitarityRow>> {
    if samples.len() < 2 {
        return Err(Error::InvalidParameter("need at least two time samples".into()));
    }
    samples
        .iter()
        .map(|(t, rho)| {
            let n = rho.nrows();
            let fac = linalg::eigh(&linalg::hermitian_part(rho))?;
            let distance_to_mixed = 0.5 * fac.eigenvalues.iter().map(|l| (l - 1.0 / n as f64).abs()).sum::<f64>();
            Ok(NonunitarityRow {
                t: *t,
                purity: linalg::purity(rho),
                distance_to_mixed,
                min_eigenvalue: fac.eigenvalues[0],
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clock::{make_cyclic_clock, make_two_level_clock};
    use crate::linalg::{basis, identity, max_norm, pauli_x, pauli_z, tensor, ONE};
    use std::f64::consts::PI;

    fn qubit_h() -> CMat {
        pauli_x().scale(0.5)
    }

    #[test]
    fn g_function_examples() {
        assert_eq!(g_function(0.7, None, 0.0).unwrap(), -0.7);
        let grav = InteractionSpec::gravitational(1.0).unwrap();
        assert!((g_function(0.5, Some(&grav), 0.0).unwrap() + 1.0 / 3.0).abs() < 1e-15);
        let strong = InteractionSpec::gravitational(-0.5).unwrap();
        assert_eq!(g_function(0.5, Some(&strong), 0.0), Err(Error::SingularSector(0.5)));
    }

    #[test]
    fn effective_hamiltonian_examples() {
        let free = effective_hamiltonian(&qubit_h(), None, 0.3).unwrap();
        assert!(max_norm(&(free.op - (qubit_h() - identity(2).scale(0.3)))) < 1e-14);

        let grav = InteractionSpec::gravitational(1.0).unwrap();
        let heff = effective_hamiltonian(&qubit_h(), Some(&grav), 0.0).unwrap();
        let fac = linalg::eigh(&heff.op).unwrap();
        assert!((fac.eigenvalues[0] + 1.0).abs() < 1e-14);
        assert!((fac.eigenvalues[1] - 1.0 / 3.0).abs() < 1e-14);

        let massive = identity(2).scale(2.0) + qubit_h();
        let heff = effective_hamiltonian(&massive, Some(&grav), 0.0).unwrap();
        let fac = linalg::eigh(&heff.op).unwrap();
        assert!((fac.eigenvalues[0] - 0.6).abs() < 1e-14);
        assert!((fac.eigenvalues[1] - 2.5 / 3.5).abs() < 1e-14);
    }

    #[test]
    fn gravitational_form_matches_resolvent() {
        let grav = InteractionSpec::gravitational(1.7).unwrap();
        let h = CMat::from_row_slice(2, 2, &[c(0.3, 0.0), c(0.2, -0.1), c(0.2, 0.1), c(-0.4, 0.0)]);
        let heff = effective_hamiltonian(&h, Some(&grav), 0.25).unwrap();
        let resolvent = (identity(2) + h.scale(1.0 / 1.7)).try_inverse().unwrap();
        let closed = (h.clone() - identity(2).scale(0.25)) * resolvent;
        assert!(max_norm(&(heff.op.clone() - closed)) < 1e-12);
        assert!(max_norm(&linalg::commutator(&heff.op, &h)) < 1e-12);
    }

    #[test]
    fn singular_eigenvalues_are_excluded_not_fatal() {
        let strong = InteractionSpec::gravitational(-0.5).unwrap();
        let heff = effective_hamiltonian(&qubit_h(), Some(&strong), 0.0).unwrap();
        assert_eq!(heff.excluded_eigenvalues.len(), 1);
        assert!((heff.excluded_eigenvalues[0] - 0.5).abs() < 1e-12);
        let plus = CVec::from_vec(vec![ONE, ONE]).scale(1.0 / 2f64.sqrt());
        assert!((heff.excluded_population(&plus) - 1.0).abs() < 1e-12);

        let all_bad = InteractionSpec::custom("minus-one", |_| -1.0);
        assert_eq!(effective_hamiltonian(&qubit_h(), Some(&all_bad), 0.0).unwrap_err(), Error::AllExcluded);
    }

    #[test]
    fn build_interaction_examples() {
        let clock = make_cyclic_clock(8, 0.0, PI / 2.0).unwrap();
        let zero = InteractionSpec::custom("zero", |_| 0.0);
        assert_eq!(max_norm(&build_interaction(&zero, &qubit_h(), &clock).unwrap()), 0.0);

        let grav = InteractionSpec::gravitational(1.0).unwrap();
        let v = build_interaction(&grav, &qubit_h(), &clock).unwrap();
        assert!(max_norm(&(v.clone() - tensor(&qubit_h(), clock.h_op()))) < 1e-14);
        assert!(validate_interaction(&v, &qubit_h(), &clock).unwrap().passed());

        let square = InteractionSpec::custom("E^2", |e| e * e);
        let v = build_interaction(&square, &qubit_h(), &clock).unwrap();
        assert!(validate_interaction(&v, &qubit_h(), &clock).unwrap().passed());

        let pole = InteractionSpec::custom("1/E", |e| 1.0 / e);
        let h0 = CMat::from_diagonal(&CVec::from_vec(vec![c(0.0, 0.0), c(1.0, 0.0)]));
        assert!(build_interaction(&pole, &h0, &clock).is_err());
    }

    #[test]
    fn validation_rejects_faults() {
        let clock = make_cyclic_clock(16, 0.0, PI / 4.0).unwrap();
        let h = qubit_h();
        let v = tensor(&pauli_z(), clock.h_op());
        let r = validate_interaction(&v, &h, &clock).unwrap();
        assert!(!r.energy_conservation.passed);
        assert!(r.time_independence.passed && r.linearity.passed);

        let v = tensor(&h, &(clock.h_op() * clock.h_op()));
        let r = validate_interaction(&v, &h, &clock).unwrap();
        assert!(!r.linearity.passed);
        assert!(r.energy_conservation.passed && r.time_independence.passed);
        assert!((r.linearity.residual - 1.0).abs() < 1e-9);

        let v = tensor(&h, clock.t_op());
        let r = validate_interaction(&v, &h, &clock).unwrap();
        assert!(!r.time_independence.passed);

        let two = make_two_level_clock(0.0, 1.0).unwrap();
        let v = tensor(&h, two.h_op()).scale(0.3);
        assert!(validate_interaction(&v, &h, &two).unwrap().passed());
        assert!(validate_interaction(&identity(3), &h, &two).is_err());
    }

    #[test]
    fn kraus_single_sector_is_unitary() {
        let rho0 = linalg::projector(&basis(2, 0));
        for t in [0.0, 0.4, 2.0, 7.5] {
            let rho = kraus_evolution(&rho0, &[(1.0, qubit_h())], t).unwrap();
            assert!((linalg::purity(&rho) - 1.0).abs() < 1e-12);
        }
        let k = KrausSet::at_time(&[(0.25, qubit_h()), (0.75, pauli_z())], 1.3).unwrap();
        assert!(k.completeness_defect() < 1e-12);
        assert!(KrausSet::at_time(&[(0.5, qubit_h())], 1.0).is_err());
    }

    #[test]
    fn two_sector_decoherence_reaches_maximally_mixed() {
        let grav = InteractionSpec::gravitational(1.0).unwrap();
        let sectors: Vec<(f64, CMat)> =
            [0.0, 0.5].iter().map(|&e| (0.5, effective_hamiltonian(&qubit_h(), Some(&grav), e).unwrap().op)).collect();
        let rho0 = linalg::projector(&basis(2, 0));
        let rho = kraus_evolution(&rho0, &sectors, 1.5 * PI).unwrap();
        assert!(max_norm(&(rho.clone() - identity(2).scale(0.5))) < 1e-12);

        let samples: Vec<(f64, CMat)> =
            [0.0, 0.75 * PI, 1.5 * PI].iter().map(|&t| (t, kraus_evolution(&rho0, &sectors, t).unwrap())).collect();
        let rows = nonunitarity_report(&samples).unwrap();
        assert!((rows[0].purity - 1.0).abs() < 1e-12);
        assert!((rows[2].purity - 0.5).abs() < 1e-12);
        assert!(rows[2].distance_to_mixed < 1e-12);
        assert!(rows.iter().all(|r| r.min_eigenvalue > -1e-12));
        assert!(nonunitarity_report(&samples[..1]).is_err());
    }

    #[test]
    fn sector_overlap_examples() {
        let psi0 = basis(2, 0);
        let same = sector_overlap(&psi0, &qubit_h(), 3.0, 0.2, 0.2, 5.0).unwrap();
        assert!((same.exact - 1.0).abs() < 1e-12);

        let (lam, e, ep, t) = (4.0, 0.1, 0.9, 2.5);
        let ov = sector_overlap(&psi0, &qubit_h(), lam, e, ep, t).unwrap();
        assert!((ov.approximation - ((ep - e) * t / (2.0 * lam)).cos().abs()).abs() < 1e-12);

        let gaps: Vec<f64> = [10.0, 100.0, 1000.0]
            .iter()
            .map(|&l| sector_overlap(&psi0, &qubit_h(), l, 0.0, 1.0, 3.0).unwrap().gap)
            .collect();
        assert!(gaps[1] < gaps[0] && gaps[2] < gaps[1], "{gaps:?}");

        assert!(sector_overlap(&psi0, &qubit_h(), -0.5, 0.0, 1.0, 1.0).is_err());
    }
}
