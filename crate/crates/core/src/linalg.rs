//! Dense complex linear algebra used by every other module.
//!
//! All composite spaces are ordered system-major: in `a ⊗ b` the system
//! factor `a` carries the slow index, so the composite basis index of
//! `|i⟩_S |k⟩_C` is `i * dim_c + k`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CVec = DVector<C64>;
pub type CMat = DMatrix<C64>;

/// Tolerance for structural checks (hermiticity, unitarity, completeness).
pub const STRUCTURAL_TOL: f64 = 1e-10;
/// Tolerance for accepting an operator as a density matrix.
pub const DENSITY_TOL: f64 = 1e-8;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn identity(n: usize) -> CMat {
    CMat::identity(n, n)
}

pub fn pauli_x() -> CMat {
    CMat::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO])
}

pub fn pauli_y() -> CMat {
    CMat::from_row_slice(2, 2, &[ZERO, -I, I, ZERO])
}

pub fn pauli_z() -> CMat {
    CMat::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE])
}

/// `[σx, σy, σz]`
pub fn paulis() -> [CMat; 3] {
    [pauli_x(), pauli_y(), pauli_z()]
}

/// Computational basis vector `|i⟩` in dimension `n`.
pub fn basis(n: usize, i: usize) -> CVec {
    let mut v = CVec::zeros(n);
    v[i] = ONE;
    v
}

/// Largest entry modulus.
pub fn max_norm(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn vec_max_norm(v: &CVec) -> f64 {
    v.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn commutator(a: &CMat, b: &CMat) -> CMat {
    a * b - b * a
}

pub fn hermiticity_defect(m: &CMat) -> f64 {
    if !m.is_square() {
        return f64::INFINITY;
    }
    max_norm(&(m - m.adjoint()))
}

pub fn is_hermitian(m: &CMat, tol: f64) -> bool {
    hermiticity_defect(m) <= tol
}

/// `max |U†U − I|`
pub fn unitarity_defect(u: &CMat) -> f64 {
    if !u.is_square() {
        return f64::INFINITY;
    }
    max_norm(&(u.adjoint() * u - identity(u.nrows())))
}

/// `|a⟩⟨b|`
pub fn outer(a: &CVec, b: &CVec) -> CMat {
    a * b.adjoint()
}

pub fn projector(psi: &CVec) -> CMat {
    outer(psi, psi)
}

/// Kronecker product with `a` as the slow (system) factor.
pub fn tensor(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

pub fn tensor_vec(a: &CVec, b: &CVec) -> CVec {
    a.kronecker(b)
}

fn check_square_composite(m: &CMat, dim_s: usize, dim_c: usize) -> Result<()> {
    let n = dim_s * dim_c;
    if m.nrows() != n || m.ncols() != n {
        return Err(Error::DimensionMismatch(format!(
            "expected {n}x{n} operator for {dim_s}x{dim_c} composite, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    Ok(())
}

/// `Tr_C m`, result on the system factor.
pub fn partial_trace_clock(m: &CMat, dim_s: usize, dim_c: usize) -> Result<CMat> {
    check_square_composite(m, dim_s, dim_c)?;
    Ok(CMat::from_fn(dim_s, dim_s, |i, j| (0..dim_c).map(|k| m[(i * dim_c + k, j * dim_c + k)]).sum()))
}

/// `Tr_S m`, result on the clock factor.
pub fn partial_trace_system(m: &CMat, dim_s: usize, dim_c: usize) -> Result<CMat> {
    check_square_composite(m, dim_s, dim_c)?;
    Ok(CMat::from_fn(dim_c, dim_c, |k, l| (0..dim_s).map(|i| m[(i * dim_c + k, i * dim_c + l)]).sum()))
}

/// `Tr_C[m (I ⊗ σ)]` for a clock operator `σ`.
pub fn contract_clock(m: &CMat, clock_op: &CMat, dim_s: usize, dim_c: usize) -> Result<CMat> {
    check_square_composite(m, dim_s, dim_c)?;
    if clock_op.nrows() != dim_c || clock_op.ncols() != dim_c {
        return Err(Error::DimensionMismatch(format!("clock operator must be {dim_c}x{dim_c}")));
    }
    Ok(CMat::from_fn(dim_s, dim_s, |i, j| {
        let mut acc = ZERO;
        for k in 0..dim_c {
            for l in 0..dim_c {
                acc += m[(i * dim_c + k, j * dim_c + l)] * clock_op[(l, k)];
            }
        }
        acc
    }))
}

/// `⟨t_k|_C ψ`, not renormalized.
pub fn partial_inner_clock(bra_index: usize, psi: &CVec, dim_s: usize, dim_c: usize) -> Result<CVec> {
    if psi.len() != dim_s * dim_c {
        return Err(Error::DimensionMismatch(format!(
            "state of length {} is not on a {dim_s}x{dim_c} composite",
            psi.len()
        )));
    }
    if bra_index >= dim_c {
        return Err(Error::IndexOutOfRange { index: bra_index, dim: dim_c });
    }
    Ok(CVec::from_fn(dim_s, |i, _| psi[i * dim_c + bra_index]))
}

/// Spectral decomposition of a Hermitian matrix, eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct Factorization {
    pub eigenvalues: Vec<f64>,
    /// Orthonormal eigenvectors as columns, in the order of `eigenvalues`.
    pub eigenvectors: CMat,
}

impl Factorization {
    /// `V diag(f(λ)) V†`
    pub fn apply<F: Fn(f64) -> C64>(&self, f: F) -> CMat {
        let v = &self.eigenvectors;
        let mut scaled = v.clone();
        for (j, &lam) in self.eigenvalues.iter().enumerate() {
            let fj = f(lam);
            for i in 0..scaled.nrows() {
                scaled[(i, j)] *= fj;
            }
        }
        scaled * v.adjoint()
    }

    pub fn reconstruct(&self) -> CMat {
        self.apply(|l| c(l, 0.0))
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }
}

/// Hermitian eigendecomposition. Fails when `h` is not Hermitian within
/// [`STRUCTURAL_TOL`].
pub fn eigh(h: &CMat) -> Result<Factorization> {
    let defect = hermiticity_defect(h);
    if defect > STRUCTURAL_TOL {
        return Err(Error::NotHermitian(defect));
    }
    let sym = (h + h.adjoint()).scale(0.5);
    let eig = sym.symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let n = h.nrows();
    let mut vecs = CMat::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vecs.set_column(dst, &eig.eigenvectors.column(src));
    }
    Ok(Factorization { eigenvalues: order.iter().map(|&i| eig.eigenvalues[i]).collect(), eigenvectors: vecs })
}

/// `f(h)` through the full eigendecomposition of `h`.
pub fn func_of_hermitian<F: Fn(f64) -> C64>(h: &CMat, f: F) -> Result<CMat> {
    Ok(eigh(h)?.apply(f))
}

/// `e^{-i h t}`
pub fn expm_hermitian(h: &CMat, t: f64) -> Result<CMat> {
    func_of_hermitian(h, |l| C64::from_polar(1.0, -l * t))
}

/// All eigenpairs with `|λ − target| ≤ tol`. The basis of a degenerate
/// subspace is whatever the solver returns.
pub fn eigensector(h: &CMat, target: f64, tol: f64) -> Result<(Vec<f64>, CMat)> {
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!("eigensector tolerance must be positive, got {tol}")));
    }
    let fac = eigh(h)?;
    let picked: Vec<usize> = (0..fac.dim()).filter(|&j| (fac.eigenvalues[j] - target).abs() <= tol).collect();
    let mut basis = CMat::zeros(h.nrows(), picked.len());
    for (dst, &src) in picked.iter().enumerate() {
        basis.set_column(dst, &fac.eigenvectors.column(src));
    }
    Ok((picked.iter().map(|&j| fac.eigenvalues[j]).collect(), basis))
}

/// Hermitian, unit trace and positive semidefinite, each within `tol`.
pub fn check_density(m: &CMat, tol: f64) -> Result<()> {
    if !m.is_square() {
        return Err(Error::NotDensity("not square".into()));
    }
    let herm = hermiticity_defect(m);
    if herm > tol {
        return Err(Error::NotDensity(format!("hermiticity defect {herm:.3e}")));
    }
    let tr = m.trace();
    if (tr - ONE).norm() > tol {
        return Err(Error::NotDensity(format!("trace {tr}")));
    }
    let fac = eigh(&(m + m.adjoint()).scale(0.5))?;
    let min = fac.eigenvalues.first().copied().unwrap_or(0.0);
    if min < -tol {
        return Err(Error::NotDensity(format!("negative eigenvalue {min:.3e}")));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Distance {
    pub trace_distance: f64,
    pub fidelity: f64,
}

/// Trace distance `½‖a − b‖₁` and Uhlmann fidelity `(Tr√(√a b √a))²`.
pub fn state_distance(a: &CMat, b: &CMat) -> Result<Distance> {
    check_density(a, DENSITY_TOL)?;
    check_density(b, DENSITY_TOL)?;
    if a.shape() != b.shape() {
        return Err(Error::DimensionMismatch("density operators differ in dimension".into()));
    }
    let diff = eigh(&hermitian_part(&(a - b)))?;
    let trace_distance = 0.5 * diff.eigenvalues.iter().map(|l| l.abs()).sum::<f64>();
    let sqrt_a = eigh(&hermitian_part(a))?.apply(|l| c(l.max(0.0).sqrt(), 0.0));
    let inner = eigh(&hermitian_part(&(&sqrt_a * b * &sqrt_a)))?;
    let root_trace: f64 = inner.eigenvalues.iter().map(|l| l.max(0.0).sqrt()).sum();
    Ok(Distance { trace_distance, fidelity: (root_trace * root_trace).min(1.0) })
}

pub fn hermitian_part(m: &CMat) -> CMat {
    (m + m.adjoint()).scale(0.5)
}

/// `Tr ρ²`
pub fn purity(rho: &CMat) -> f64 {
    (rho * rho).trace().re
}

/// `Re Tr(o ρ)`
pub fn expectation(o: &CMat, rho: &CMat) -> f64 {
    (o * rho).trace().re
}

/// `Re ⟨ψ|o|ψ⟩`
pub fn vec_expectation(o: &CMat, psi: &CVec) -> f64 {
    psi.dotc(&(o * psi)).re
}

/// Schmidt coefficients of a bipartite pure state, descending.
pub fn schmidt_coefficients(psi: &CVec, dim_s: usize, dim_c: usize) -> Result<Vec<f64>> {
    if psi.len() != dim_s * dim_c {
        return Err(Error::DimensionMismatch(format!(
            "state of length {} is not on a {dim_s}x{dim_c} composite",
            psi.len()
        )));
    }
    let m = CMat::from_fn(dim_s, dim_c, |i, k| psi[i * dim_c + k]);
    let mut sv: Vec<f64> = m.singular_values().iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    Ok(sv)
}

/// Number of Schmidt coefficients above `tol`.
pub fn schmidt_rank(psi: &CVec, dim_s: usize, dim_c: usize, tol: f64) -> Result<usize> {
    Ok(schmidt_coefficients(psi, dim_s, dim_c)?.into_iter().filter(|&s| s > tol).count())
}

/// Rotates the global phase so the largest-magnitude entry is real positive.
pub fn strip_global_phase(v: &CVec) -> CVec {
    let pivot = v.iter().copied().max_by(|a, b| a.norm().total_cmp(&b.norm())).unwrap_or(ZERO);
    if pivot.norm() == 0.0 {
        return v.clone();
    }
    let phase = pivot.conj() / pivot.norm();
    v.map(|z| z * phase)
}

/// `|⟨a|b⟩|² / (‖a‖² ‖b‖²)`
pub fn pure_fidelity(a: &CVec, b: &CVec) -> f64 {
    let ov = a.dotc(b).norm_sqr();
    ov / (a.norm_squared() * b.norm_squared())
}

/// Bloch vector `(Tr ρσx, Tr ρσy, Tr ρσz)` of a qubit density.
pub fn bloch_vector(rho: &CMat) -> [f64; 3] {
    let [x, y, z] = paulis();
    [expectation(&x, rho), expectation(&y, rho), expectation(&z, rho)]
}

/// `½(I + r·σ)`
pub fn density_from_bloch(r: [f64; 3]) -> CMat {
    let [x, y, z] = paulis();
    (identity(2) + x.scale(r[0]) + y.scale(r[1]) + z.scale(r[2])).scale(0.5)
}
