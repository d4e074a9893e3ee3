//! Finite clock models.
//!
//! A finite clock cannot realize `[t̂, ĥ] = i`. The cyclic clock instead
//! realizes the translation property exactly: `e^{-iĥδ}|t_k⟩ = |t_{k+1 mod d}⟩`,
//! with `ĥ` diagonal in the discrete Fourier basis on the centered frequency
//! grid `2πm/(dδ)`, `m = -⌊d/2⌋ .. d-1-⌊d/2⌋`. Evolution encoded on such a
//! clock is periodic with period `dδ`.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::linalg::{self, c, CMat, CVec, C64, ONE};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClockKind {
    /// `d`-dimensional Weyl-pair clock on a uniform cyclic grid.
    Cyclic,
    /// A single qubit with `t̂ = diag(t0, t1)` and `ĥ = -σx/2`.
    TwoLevel,
}

#[derive(Debug, Clone)]
pub struct ClockModel {
    kind: ClockKind,
    grid: Vec<f64>,
    delta: f64,
    t_op: CMat,
    h_op: CMat,
    shift: Option<CMat>,
    frequencies: Vec<f64>,
    frequency_basis: CMat,
}

/// Cyclic clock with `d` readings `t_k = t0 + k·delta`.
pub fn make_cyclic_clock(d: usize, t0: f64, delta: f64) -> Result<ClockModel> {
    if d < 2 {
        return Err(Error::InvalidClock(format!("clock dimension must be at least 2, got {d}")));
    }
    if !(delta > 0.0) || !delta.is_finite() || !t0.is_finite() {
        return Err(Error::InvalidClock(format!("grid spacing must be positive and finite, got {delta}")));
    }
    let grid: Vec<f64> = (0..d).map(|k| t0 + k as f64 * delta).collect();
    let half = (d / 2) as i64;
    let frequencies: Vec<f64> = (0..d as i64).map(|j| 2.0 * PI * (j - half) as f64 / (d as f64 * delta)).collect();
    let norm = 1.0 / (d as f64).sqrt();
    let frequency_basis = CMat::from_fn(d, d, |k, j| C64::from_polar(norm, frequencies[j] * grid[k]));
    let diag = CMat::from_diagonal(&CVec::from_iterator(d, frequencies.iter().map(|&w| c(w, 0.0))));
    let h_op = linalg::hermitian_part(&(&frequency_basis * diag * frequency_basis.adjoint()));
    let mut shift = CMat::zeros(d, d);
    for k in 0..d {
        shift[((k + 1) % d, k)] = ONE;
    }
    Ok(ClockModel {
        kind: ClockKind::Cyclic,
        t_op: diag_op(&grid),
        grid,
        delta,
        h_op,
        shift: Some(shift),
        frequencies,
        frequency_basis,
    })
}

/// Qubit clock with time operator `diag(t0, t1)` and generator `-σx/2`.
pub fn make_two_level_clock(t0: f64, t1: f64) -> Result<ClockModel> {
    if t1 == t0 || !t0.is_finite() || !t1.is_finite() {
        return Err(Error::InvalidClock(format!("two-level clock needs distinct finite readings, got {t0} and {t1}")));
    }
    let h_op = linalg::pauli_x().scale(-0.5);
    let fac = linalg::eigh(&h_op)?;
    let grid = vec![t0, t1];
    Ok(ClockModel {
        kind: ClockKind::TwoLevel,
        t_op: diag_op(&grid),
        grid,
        delta: t1 - t0,
        h_op,
        shift: None,
        frequencies: fac.eigenvalues,
        frequency_basis: fac.eigenvectors,
    })
}

fn diag_op(values: &[f64]) -> CMat {
    CMat::from_diagonal(&CVec::from_iterator(values.len(), values.iter().map(|&t| c(t, 0.0))))
}

impl ClockModel {
    pub fn kind(&self) -> ClockKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.grid.len()
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    /// Grid spacing; `t1 - t0` for the two-level clock.
    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn t_op(&self) -> &CMat {
        &self.t_op
    }

    pub fn h_op(&self) -> &CMat {
        &self.h_op
    }

    /// The one-step translation `|t_k⟩ → |t_{k+1}⟩`; absent on the two-level clock.
    pub fn shift(&self) -> Option<&CMat> {
        self.shift.as_ref()
    }

    /// Eigenvalues of `ĥ`, in the column order of [`Self::frequency_basis`].
    pub fn frequencies(&self) -> &[f64] {
        &self.frequencies
    }

    pub fn frequency_basis(&self) -> &CMat {
        &self.frequency_basis
    }

    pub fn is_cyclic(&self) -> bool {
        self.kind == ClockKind::Cyclic
    }

    pub(crate) fn require_cyclic(&self) -> Result<()> {
        if self.is_cyclic() {
            Ok(())
        } else {
            Err(Error::RequiresCyclicClock)
        }
    }

    /// Length of the time window after which encoded evolution repeats.
    pub fn period(&self) -> Option<f64> {
        self.is_cyclic().then(|| self.dim() as f64 * self.delta)
    }

    /// Warning text when a requested time horizon exceeds the clock period.
    pub fn aliasing_warning(&self, horizon: f64) -> Option<String> {
        let period = self.period()?;
        (horizon > period + 1e-12 * period.abs())
            .then(|| format!("requested horizon {horizon} exceeds clock period {period}; evolution wraps around"))
    }

    /// `|t_k⟩⟨t_k|` on the clock.
    pub fn projector(&self, k: usize) -> Result<CMat> {
        if k >= self.dim() {
            return Err(Error::IndexOutOfRange { index: k, dim: self.dim() });
        }
        let mut p = CMat::zeros(self.dim(), self.dim());
        p[(k, k)] = ONE;
        Ok(p)
    }

    /// Equal superposition of all readings.
    pub fn uniform_state(&self) -> CVec {
        let d = self.dim();
        CVec::from_element(d, c(1.0 / (d as f64).sqrt(), 0.0))
    }

    /// `Σ_k e^{iℰ t_k}|t_k⟩/√d`.
    pub fn timeline_state(&self, energy: f64) -> Result<CVec> {
        self.require_cyclic()?;
        let norm = 1.0 / (self.dim() as f64).sqrt();
        Ok(CVec::from_iterator(self.dim(), self.grid.iter().map(|&t| C64::from_polar(norm, energy * t))))
    }

    /// `‖ĥ|TL_ℰ⟩ − ℰ|TL_ℰ⟩‖`; zero exactly when `ℰ` sits on the frequency grid.
    pub fn timeline_residual(&self, energy: f64) -> Result<f64> {
        let tl = self.timeline_state(energy)?;
        Ok((&self.h_op * &tl - tl.scale(energy)).norm())
    }

    /// Whether `energy` is an eigenvalue of `ĥ` (cyclic clock), up to `tol`.
    pub fn on_frequency_grid(&self, energy: f64, tol: f64) -> bool {
        if !self.is_cyclic() {
            return self.frequencies.iter().any(|w| (w - energy).abs() <= tol);
        }
        let step = 2.0 * PI / (self.dim() as f64 * self.delta);
        let m = (energy / step).round();
        let lo = -((self.dim() / 2) as f64);
        let hi = lo + self.dim() as f64 - 1.0;
        (energy - m * step).abs() <= tol && m >= lo && m <= hi
    }

    /// `[t̂, ĥ]`
    pub fn commutator(&self) -> CMat {
        linalg::commutator(&self.t_op, &self.h_op)
    }

    /// `‖([t̂,ĥ] − i)φ‖` for a Gaussian wave packet `φ` centered in the middle
    /// of both the time window and the frequency band, with widths balanced
    /// so each covers the same fraction of its range. Shrinks as `d` grows.
    pub fn canonical_defect(&self) -> Result<f64> {
        self.require_cyclic()?;
        let d = self.dim() as f64;
        let mid = self.grid[0] + 0.5 * (d - 1.0) * self.delta;
        let width = self.delta * (d / (4.0 * PI)).sqrt();
        let mut phi = CVec::from_iterator(
            self.dim(),
            self.grid.iter().map(|&t| c((-(t - mid).powi(2) / (4.0 * width * width)).exp(), 0.0)),
        );
        phi.normalize_mut();
        let lhs = self.commutator() * &phi - phi.clone() * linalg::I;
        Ok(lhs.norm())
    }

    /// Applies `shift^n` to a clock index: `n` steps forward, cyclically.
    pub(crate) fn shifted_index(&self, k: usize, n: i64) -> usize {
        let d = self.dim() as i64;
        ((k as i64 + n).rem_euclid(d)) as usize
    }

    /// Copy of the clock with the sign of `ĥ` flipped and everything else
    /// untouched. Only useful for fault injection in verification runs.
    #[doc(hidden)]
    pub fn with_negated_generator(&self) -> Self {
        let mut out = self.clone();
        out.h_op = -out.h_op.clone();
        out.frequencies.iter_mut().for_each(|w| *w = -*w);
        out
    }
}

/// Shift-power acting on `system ⊗ clock`: `I ⊗ shift^n`, built as a
/// permutation.
pub fn composite_shift(dim_s: usize, clock: &ClockModel, n: i64) -> Result<CMat> {
    clock.require_cyclic()?;
    let d = clock.dim();
    let mut g = CMat::zeros(dim_s * d, dim_s * d);
    for i in 0..dim_s {
        for k in 0..d {
            g[(i * d + clock.shifted_index(k, n), i * d + k)] = ONE;
        }
    }
    Ok(g)
}

/// `P† a P` where `P = I ⊗ shift^n`, evaluated by index permutation.
pub(crate) fn conjugate_by_shift(a: &CMat, clock: &ClockModel, n: i64) -> CMat {
    let d = clock.dim();
    let idx = |r: usize| -> usize {
        let (i, k) = (r / d, r % d);
        i * d + clock.shifted_index(k, n)
    };
    CMat::from_fn(a.nrows(), a.ncols(), |r, s| a[(idx(r), idx(s))])
}
