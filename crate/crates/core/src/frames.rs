//! Gabor and metaplectic Gabor systems on truncated separable lattices.
//!
//! Systems are realized by their atoms sampled on a [`Grid1D`]. The frame
//! operator becomes the matrix `M = h * sum_l a_l a_l^*`, so that
//! `(S f)(x_m) = (M f)_m` and `<S f, f> = h f^* M f`. Frame bounds are the
//! extreme eigenvalues of `M` restricted to signals supported in
//! `[-L/4, L/4]`, which keeps the estimate away from the truncation edge.

use nalgebra::{Cholesky, DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{inner_product, Grid1D, Signal};
use crate::symplectic::WignerFactorization;
use crate::tfr::AtomMaps;
use crate::window::Window;

/// Lower bound below which a system is not declared a frame.
pub const FRAME_THRESHOLD: f64 = 1e-8;
/// Relative residual accepted for the dual-window solve.
pub const SOLVE_RESIDUAL_TOL: f64 = 1e-10;

/// `a Z x b Z` truncated to `max(|x|, |xi|) <= radius`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Lattice {
    pub a: f64,
    pub b: f64,
    pub radius: f64,
}

impl Lattice {
    pub fn new(a: f64, b: f64, radius: f64) -> Result<Self> {
        let lattice = Self { a, b, radius };
        lattice.validate()?;
        Ok(lattice)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.a.is_finite() && self.a > 0.0 && self.b.is_finite() && self.b > 0.0) {
            return Err(Error::InvalidLattice(format!(
                "steps must be positive, got a={}, b={}",
                self.a, self.b
            )));
        }
        if !(self.radius.is_finite() && self.radius >= 0.0) {
            return Err(Error::InvalidLattice(format!("radius must be >= 0, got {}", self.radius)));
        }
        Ok(())
    }

    fn half_count(step: f64, radius: f64) -> i64 {
        (radius / step + 1e-9).floor() as i64
    }

    /// Points in lexicographic order (time index outer, frequency inner).
    pub fn points(&self) -> Vec<(f64, f64)> {
        let nx = Self::half_count(self.a, self.radius);
        let nxi = Self::half_count(self.b, self.radius);
        (-nx..=nx)
            .flat_map(|i| (-nxi..=nxi).map(move |j| (i as f64 * self.a, j as f64 * self.b)))
            .collect()
    }

    pub fn len(&self) -> usize {
        let nx = Self::half_count(self.a, self.radius) as usize;
        let nxi = Self::half_count(self.b, self.radius) as usize;
        (2 * nx + 1) * (2 * nxi + 1)
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum AtomKind {
    /// `M_xi T_x g`.
    Classical,
    /// `pi_A(x, xi) g`.
    Metaplectic(WignerFactorization),
}

#[derive(Clone, Debug)]
pub struct GaborSystem {
    window: Window,
    points: Vec<(f64, f64)>,
    kind: AtomKind,
    grid: Grid1D,
    atoms: Vec<Signal>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum BoundsMethod {
    #[serde(rename = "eigen")]
    Eigen,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrameBounds {
    #[serde(rename = "A")]
    pub lower: f64,
    #[serde(rename = "B")]
    pub upper: f64,
    pub method: BoundsMethod,
}

impl FrameBounds {
    pub fn is_frame(&self) -> bool {
        self.lower > FRAME_THRESHOLD
    }
}

pub fn build_system(window: &Window, lattice: &Lattice, kind: AtomKind, grid: &Grid1D) -> Result<GaborSystem> {
    lattice.validate()?;
    build_system_at(window, lattice.points(), kind, grid)
}

/// System over an explicit point list, e.g. a mapped lattice `calE Lambda`.
pub fn build_system_at(
    window: &Window,
    points: Vec<(f64, f64)>,
    kind: AtomKind,
    grid: &Grid1D,
) -> Result<GaborSystem> {
    if window.is_zero() {
        return Err(Error::ZeroWindow);
    }
    let maps = match &kind {
        AtomKind::Classical => None,
        AtomKind::Metaplectic(fac) => Some(AtomMaps::new(fac)?),
    };
    let atoms = points
        .par_iter()
        .map(|&(x, xi)| -> Result<Signal> {
            let atom = match &maps {
                None => window.tf_shift(x, xi),
                Some(m) => m.apply(x, xi, window)?,
            };
            Ok(atom.sample(grid))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(GaborSystem { window: window.clone(), points, kind, grid: *grid, atoms })
}

impl GaborSystem {
    pub fn window(&self) -> &Window {
        &self.window
    }
    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }
    pub fn kind(&self) -> &AtomKind {
        &self.kind
    }
    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }
    pub fn atoms(&self) -> &[Signal] {
        &self.atoms
    }
    pub fn len(&self) -> usize {
        self.atoms.len()
    }
    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    /// Disjoint union of the two atom families (the kind of `self` is kept).
    pub fn union(&self, other: &GaborSystem) -> Result<GaborSystem> {
        if !self.grid.same_as(&other.grid) {
            return Err(Error::GridMismatch);
        }
        let mut out = self.clone();
        out.points.extend_from_slice(&other.points);
        out.atoms.extend(other.atoms.iter().cloned());
        Ok(out)
    }
}

fn atom_matrix(sys: &GaborSystem) -> DMatrix<Complex64> {
    let n = sys.grid.n();
    DMatrix::from_fn(n, sys.atoms.len(), |m, l| sys.atoms[l].values()[m])
}

/// `M[m, k] = h sum_l atom_l(x_m) conj(atom_l(x_k))`, symmetrized.
pub fn frame_matrix(sys: &GaborSystem) -> DMatrix<Complex64> {
    let a = atom_matrix(sys);
    let h = Complex64::new(sys.grid.spacing(), 0.0);
    let m = (&a * a.adjoint()) * h;
    (&m + m.adjoint()) * Complex64::new(0.5, 0.0)
}

fn interior_indices(grid: &Grid1D) -> Vec<usize> {
    let half = grid.length() / 4.0;
    (0..grid.n()).filter(|&k| grid.node(k).abs() <= half + 1e-12).collect()
}

/// Relative size below which entries are zeroed before the eigensolve.
/// The solver returns NaN when entries span hundreds of orders of
/// magnitude (Gaussian tails); the flush moves eigenvalues by at most
/// `n * 1e-30 * max|M|`.
const EIGEN_FLUSH: f64 = 1e-30;

/// Extreme eigenvalues of a Hermitian matrix.
fn extreme_eigenvalues(mut m: DMatrix<Complex64>) -> Result<(f64, f64)> {
    let floor = m.iter().map(|z| z.norm()).fold(0.0, f64::max) * EIGEN_FLUSH;
    m.iter_mut().filter(|z| z.norm() < floor).for_each(|z| *z = Complex64::new(0.0, 0.0));
    let eig = SymmetricEigen::try_new(m, f64::EPSILON, 100_000)
        .ok_or_else(|| Error::EigenFailure("Hermitian eigensolver did not converge".into()))?;
    let vals = eig.eigenvalues;
    if vals.iter().any(|v| !v.is_finite()) {
        return Err(Error::EigenFailure("non-finite eigenvalue".into()));
    }
    Ok((vals.min(), vals.max()))
}

pub fn frame_bounds(sys: &GaborSystem) -> Result<FrameBounds> {
    let m = frame_matrix(sys);
    let idx = interior_indices(&sys.grid);
    let sub = m.select_rows(&idx).select_columns(&idx);
    let (lo, hi) = extreme_eigenvalues(sub)?;
    Ok(FrameBounds { lower: lo.max(0.0), upper: hi, method: BoundsMethod::Eigen })
}

/// Smallest and largest eigenvalue of the full (unrestricted) frame matrix.
pub fn frame_matrix_spectrum(sys: &GaborSystem) -> Result<(f64, f64)> {
    extreme_eigenvalues(frame_matrix(sys))
}

/// `c_l = <f, atom_l>`.
pub fn coefficients(sys: &GaborSystem, f: &Signal) -> Result<Vec<Complex64>> {
    if !f.grid().same_as(&sys.grid) {
        return Err(Error::GridMismatch);
    }
    sys.atoms.iter().map(|a| inner_product(f, a)).collect()
}

/// `sum_l c_l atom_l`.
pub fn synthesis(sys: &GaborSystem, c: &[Complex64]) -> Result<Signal> {
    if c.len() != sys.atoms.len() {
        return Err(Error::LengthMismatch { expected: sys.atoms.len(), got: c.len() });
    }
    let mut out = Signal::zeros(sys.grid);
    for (coef, atom) in c.iter().zip(&sys.atoms) {
        out.add_scaled(atom, *coef)?;
    }
    Ok(out)
}

/// Solve `M y = v` for the Hermitian positive definite frame matrix.
fn solve_frame(sys: &GaborSystem, v: &Signal) -> Result<Signal> {
    let bounds = frame_bounds(sys)?;
    if !bounds.is_frame() {
        return Err(Error::NotAFrame(bounds.lower));
    }
    let m = frame_matrix(sys);
    let rhs = DVector::from_column_slice(v.values());
    let chol = Cholesky::new(m.clone())
        .ok_or_else(|| Error::SolveFailure("frame matrix is not positive definite".into()))?;
    let y = chol.solve(&rhs);
    let residual = (&m * &y - &rhs).norm();
    if residual > SOLVE_RESIDUAL_TOL * rhs.norm() {
        return Err(Error::SolveFailure(format!("residual {residual:.3e}")));
    }
    Signal::new(sys.grid, y.iter().copied().collect())
}

/// Canonical dual `S^{-1} g`.
pub fn dual_window(sys: &GaborSystem) -> Result<Window> {
    let g = sys.window.sample(&sys.grid);
    Ok(Window::sampled(solve_frame(sys, &g)?))
}

/// `gamma_A = T_{E12/E22} S_A^{-1} T_{E22/E12} g`; the canonical dual for
/// classical systems.
pub fn metaplectic_dual(sys: &GaborSystem) -> Result<Window> {
    match &sys.kind {
        AtomKind::Classical => dual_window(sys),
        AtomKind::Metaplectic(fac) => {
            let r = AtomMaps::new(fac)?.rescale;
            let pre = sys.window.rescale(r)?.sample(&sys.grid);
            let solved = Window::sampled(solve_frame(sys, &pre)?);
            Ok(Window::sampled(solved.rescale(1.0 / r)?.sample(&sys.grid)))
        }
    }
}

/// Warns when the lattice-mapped points `calE l` leave the grid's
/// time-frequency box `[-L/2, L/2] x [-1/(2h), 1/(2h)]`. Atoms there are cut
/// off or aliased, the sampled frame operator stops commuting with the
/// lattice shifts, and the single-window dual is no longer exact.
pub fn coverage_warning(sys: &GaborSystem) -> Result<Option<String>> {
    let (tx, mx) = match &sys.kind {
        AtomKind::Classical => (1.0, 1.0),
        AtomKind::Metaplectic(fac) => {
            let maps = AtomMaps::new(fac)?;
            (maps.translation, maps.modulation)
        }
    };
    let (x_max, xi_max) = sys
        .points
        .iter()
        .fold((0.0_f64, 0.0_f64), |(a, b), &(x, xi)| (a.max((tx * x).abs()), b.max((mx * xi).abs())));
    let half_len = -sys.grid.start();
    let nyquist = 0.5 / sys.grid.spacing();
    let slack = 1e-9;
    if x_max > half_len * (1.0 + slack) || xi_max > nyquist * (1.0 + slack) {
        return Ok(Some(format!(
            "mapped lattice reaches |x| = {x_max:.3}, |xi| = {xi_max:.3} beyond the grid box \
             |x| <= {half_len:.3}, |xi| <= {nyquist:.3}; the dual-window reconstruction may be inexact"
        )));
    }
    Ok(None)
}

/// `sum_l <f, atom_l> pi(l) gamma` with the system's own dual, and the
/// relative `L^2` error against `f`.
pub fn frame_reconstruct(sys: &GaborSystem, f: &Signal) -> Result<(Signal, f64)> {
    let gamma = metaplectic_dual(sys)?;
    reconstruct_with(sys, f, &gamma)
}

/// Reconstruction with a caller-supplied synthesis window.
pub fn reconstruct_with(sys: &GaborSystem, f: &Signal, gamma: &Window) -> Result<(Signal, f64)> {
    let c = coefficients(sys, f)?;
    let synth = build_system_at(gamma, sys.points.clone(), sys.kind.clone(), &sys.grid)?;
    let rec = synthesis(&synth, &c)?;
    let norm = f.norm();
    let err = rec.sub(f)?.norm();
    Ok((rec, if norm > 0.0 { err / norm } else { err }))
}

/// Outcome of comparing a metaplectic system with its classical
/// counterpart `G(T_{E22/E12} g, calE Lambda)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TheoremMainReport {
    #[serde(rename = "A")]
    pub lower: f64,
    #[serde(rename = "B")]
    pub upper: f64,
    pub classical_lower: f64,
    pub classical_upper: f64,
    /// Observed `B_classical / B_metaplectic`; absent when skipped.
    pub ratio: Option<f64>,
    /// Observed `A_classical / A_metaplectic` when both systems are frames.
    pub lower_ratio: Option<f64>,
    pub expected_ratio: f64,
    pub frame: bool,
    pub atoms: usize,
    pub modulus_residual: f64,
    pub phase_residual: f64,
    pub bounds_ok: Option<bool>,
    pub warning: Option<String>,
}

impl TheoremMainReport {
    pub fn per_atom_ok(&self) -> bool {
        self.modulus_residual <= 1e-8 && self.phase_residual <= 1e-8
    }

    pub fn passed(&self) -> bool {
        self.per_atom_ok() && self.bounds_ok != Some(false)
    }
}

pub const RATIO_REL_TOL: f64 = 0.02;

fn mapped_points(maps: &AtomMaps, points: &[(f64, f64)]) -> Vec<(f64, f64)> {
    points
        .iter()
        .map(|&(x, xi)| (maps.translation * x, maps.modulation * xi))
        .collect()
}

fn require_decomposable(fac: &WignerFactorization) -> Result<AtomMaps> {
    if !fac.is_totally_decomposable() {
        return Err(Error::NotTotallyDecomposable);
    }
    AtomMaps::new(fac)
}

pub fn theorem_main_check(
    fac: &WignerFactorization,
    window: &Window,
    lattice: &Lattice,
    grid: &Grid1D,
) -> Result<TheoremMainReport> {
    let maps = require_decomposable(fac)?;
    let meta = build_system(window, lattice, AtomKind::Metaplectic(fac.clone()), grid)?;
    let classical_window = window.rescale(maps.rescale)?;
    let classical = build_system_at(
        &classical_window,
        mapped_points(&maps, meta.points()),
        AtomKind::Classical,
        grid,
    )?;

    let mut modulus_residual = 0.0_f64;
    let mut phase_residual = 0.0_f64;
    for ((&(x, xi), a), c) in meta.points().iter().zip(meta.atoms()).zip(classical.atoms()) {
        let undo = maps.explicit_phase(x, xi).conj();
        for (u, v) in a.values().iter().zip(c.values()) {
            let target = v * maps.alpha;
            modulus_residual = modulus_residual.max((u.norm() - target.norm()).abs());
            phase_residual = phase_residual.max((u * undo - target).norm());
        }
    }

    let mb = frame_bounds(&meta)?;
    let cb = frame_bounds(&classical)?;
    let expected = fac.bound_ratio();
    let (ratio, lower_ratio, bounds_ok, warning) = if meta.len() < 2 {
        (None, None, None, Some("single-point lattice: bound comparison skipped".to_string()))
    } else {
        let ratio = cb.upper / mb.upper;
        let lower_ratio = (mb.is_frame() && cb.is_frame()).then(|| cb.lower / mb.lower);
        let close = |r: f64| ((r / expected) - 1.0).abs() <= RATIO_REL_TOL;
        let ok = close(ratio) && lower_ratio.is_none_or(close);
        (Some(ratio), lower_ratio, Some(ok), None)
    };
    Ok(TheoremMainReport {
        lower: mb.lower,
        upper: mb.upper,
        classical_lower: cb.lower,
        classical_upper: cb.upper,
        ratio,
        lower_ratio,
        expected_ratio: expected,
        frame: mb.is_frame(),
        atoms: meta.len(),
        modulus_residual,
        phase_residual,
        bounds_ok,
        warning,
    })
}

/// `sum_l |<f, pi_A(l) g>|^2` and `sum_mu |<f, pi(mu) T_{E22/E12} g>|^2` over
/// `mu in calE Lambda`. Their quotient should be `|det E| / |det(E12 E22)|`.
pub fn coefficient_energies(
    fac: &WignerFactorization,
    window: &Window,
    lattice: &Lattice,
    grid: &Grid1D,
    f: &Signal,
) -> Result<(f64, f64)> {
    let maps = require_decomposable(fac)?;
    let meta = build_system(window, lattice, AtomKind::Metaplectic(fac.clone()), grid)?;
    let classical = build_system_at(
        &window.rescale(maps.rescale)?,
        mapped_points(&maps, meta.points()),
        AtomKind::Classical,
        grid,
    )?;
    let energy = |sys: &GaborSystem| -> Result<f64> {
        Ok(coefficients(sys, f)?.iter().map(|c| c.norm_sqr()).sum())
    };
    Ok((energy(&meta)?, energy(&classical)?))
}
