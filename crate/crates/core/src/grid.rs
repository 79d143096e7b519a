//! Uniform centered grids, sampled signals and continuum-normalized
//! Fourier transforms.
//!
//! A grid with `n` samples over extent `L` has nodes `x_k = (k - n/2) h`,
//! `h = L / n`. Its dual grid has nodes `xi_k = (k - n/2) / L`, i.e. `n`
//! samples over extent `n / L`. Transforms carry the `h` factors so that
//! sampled values approximate the continuous integrals directly.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

const GRID_EQ_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid1D {
    n: usize,
    length: f64,
}

impl Grid1D {
    pub fn new(n: usize, length: f64) -> Result<Self> {
        if n < 16 || !n.is_power_of_two() {
            return Err(Error::InvalidGrid(format!(
                "n = {n} must be a power of two >= 16"
            )));
        }
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::InvalidGrid(format!("length {length} must be > 0")));
        }
        Ok(Self { n, length })
    }

    /// The desk-scale grid: 256 samples over `[-8, 8)`.
    pub fn default_desk() -> Self {
        Self { n: 256, length: 16.0 }
    }

    pub fn n(&self) -> usize {
        self.n
    }
    pub fn length(&self) -> f64 {
        self.length
    }
    pub fn spacing(&self) -> f64 {
        self.length / self.n as f64
    }
    pub fn node(&self, k: usize) -> f64 {
        (k as f64 - (self.n / 2) as f64) * self.spacing()
    }
    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n).map(|k| self.node(k)).collect()
    }
    /// Smallest node, `-L/2`.
    pub fn start(&self) -> f64 {
        -0.5 * self.length
    }

    pub fn dual(&self) -> Grid1D {
        Grid1D {
            n: self.n,
            length: self.n as f64 / self.length,
        }
    }

    pub fn same_as(&self, other: &Grid1D) -> bool {
        self.n == other.n && (self.length - other.length).abs() <= GRID_EQ_TOL * self.length
    }

    /// Index of the node nearest to `t` if `t` is within `tol * h` of it.
    pub fn index_of(&self, t: f64, tol: f64) -> Option<usize> {
        let u = t / self.spacing() + (self.n / 2) as f64;
        let k = u.round();
        if (u - k).abs() <= tol && k >= 0.0 && (k as usize) < self.n {
            Some(k as usize)
        } else {
            None
        }
    }
}

/// A complex signal sampled on a [`Grid1D`].
#[derive(Clone, Debug, PartialEq)]
pub struct Signal {
    grid: Grid1D,
    values: Vec<Complex64>,
}

impl Signal {
    pub fn new(grid: Grid1D, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.n() {
            return Err(Error::LengthMismatch {
                expected: grid.n(),
                got: values.len(),
            });
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: Grid1D) -> Self {
        Self {
            grid,
            values: vec![Complex64::new(0.0, 0.0); grid.n()],
        }
    }

    pub fn from_fn(grid: Grid1D, f: impl Fn(f64) -> Complex64) -> Self {
        let values = grid.nodes().into_iter().map(f).collect();
        Self { grid, values }
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }
    pub fn values(&self) -> &[Complex64] {
        &self.values
    }
    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }
    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    /// `(h sum |f_k|^2)^{1/2}`.
    pub fn norm(&self) -> f64 {
        (self.grid.spacing() * self.values.iter().map(|v| v.norm_sqr()).sum::<f64>()).sqrt()
    }

    pub fn scaled(&self, s: Complex64) -> Signal {
        Signal {
            grid: self.grid,
            values: self.values.iter().map(|v| v * s).collect(),
        }
    }

    pub fn sub(&self, other: &Signal) -> Result<Signal> {
        check_same(&self.grid, &other.grid)?;
        Ok(Signal {
            grid: self.grid,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a - b)
                .collect(),
        })
    }

    pub fn add_scaled(&mut self, other: &Signal, s: Complex64) -> Result<()> {
        check_same(&self.grid, &other.grid)?;
        for (a, b) in self.values.iter_mut().zip(&other.values) {
            *a += b * s;
        }
        Ok(())
    }

    /// `(T_a f)(t) = f(t - a)` by an FFT phase ramp (circular, unitary).
    pub fn translate(&self, a: f64) -> Signal {
        if a == 0.0 {
            return self.clone();
        }
        let n = self.grid.n();
        let l = self.grid.length();
        let plan = Plans::new(n);
        let mut buf = self.values.clone();
        plan.forward.process(&mut buf);
        for (m, v) in buf.iter_mut().enumerate() {
            let freq = signed_bin(m, n) as f64 / l;
            *v *= Complex64::from_polar(1.0 / n as f64, -2.0 * PI * freq * a);
        }
        plan.inverse.process(&mut buf);
        Signal {
            grid: self.grid,
            values: buf,
        }
    }

    /// `(M_b f)(t) = e^{2 pi i b t} f(t)`.
    pub fn modulate(&self, b: f64) -> Signal {
        self.pointwise(|t| Complex64::from_polar(1.0, 2.0 * PI * b * t))
    }

    /// Multiplication by the chirp `e^{i pi c t^2}`.
    pub fn chirp_mul(&self, c: f64) -> Signal {
        self.pointwise(|t| Complex64::from_polar(1.0, PI * c * t * t))
    }

    /// `|a|^{1/2} f(a t)` by band-limited interpolation, zero outside the
    /// grid extent.
    pub fn rescale(&self, a: f64) -> Result<Signal> {
        if a == 0.0 {
            return Err(Error::ZeroScale);
        }
        if a == 1.0 {
            return Ok(self.clone());
        }
        let interp = Interpolant::new(self);
        let amp = a.abs().sqrt();
        Ok(Signal::from_fn(self.grid, |t| interp.eval(a * t) * amp))
    }

    fn pointwise(&self, phase: impl Fn(f64) -> Complex64) -> Signal {
        Signal {
            grid: self.grid,
            values: self
                .values
                .iter()
                .enumerate()
                .map(|(k, v)| v * phase(self.grid.node(k)))
                .collect(),
        }
    }
}

fn check_same(a: &Grid1D, b: &Grid1D) -> Result<()> {
    if a.same_as(b) {
        Ok(())
    } else {
        Err(Error::GridMismatch)
    }
}

/// Bin index in `[-n/2, n/2)` for FFT slot `m`.
fn signed_bin(m: usize, n: usize) -> i64 {
    if m < n / 2 {
        m as i64
    } else {
        m as i64 - n as i64
    }
}

struct Plans {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl Plans {
    fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        }
    }
}

/// Centered continuum DFT in place: `out_j = h sum_k in_k e^{-+2 pi i xi_j x_k}`.
/// On centered grids with `4 | n` the phase `xi_j x_k` splits into the plain
/// DFT kernel times `(-1)^{j+k}`.
fn centered_transform(buf: &mut [Complex64], fft: &dyn Fft<f64>, h: f64) {
    for (k, v) in buf.iter_mut().enumerate() {
        if k % 2 == 1 {
            *v = -*v;
        }
    }
    fft.process(buf);
    for (j, v) in buf.iter_mut().enumerate() {
        *v *= if j % 2 == 1 { -h } else { h };
    }
}

/// Continuum-normalized Fourier transform; the result lives on the dual grid.
pub fn fourier(f: &Signal) -> Signal {
    let plan = Plans::new(f.grid.n());
    let mut buf = f.values.clone();
    centered_transform(&mut buf, plan.forward.as_ref(), f.grid.spacing());
    Signal {
        grid: f.grid.dual(),
        values: buf,
    }
}

/// Inverse of [`fourier`]: maps a dual-grid signal back to its primal grid.
pub fn inverse_fourier(f: &Signal) -> Signal {
    let plan = Plans::new(f.grid.n());
    let mut buf = f.values.clone();
    centered_transform(&mut buf, plan.inverse.as_ref(), f.grid.spacing());
    Signal {
        grid: f.grid.dual(),
        values: buf,
    }
}

/// `<f, g> = h sum f_k conj(g_k)`.
pub fn inner_product(f: &Signal, g: &Signal) -> Result<Complex64> {
    check_same(&f.grid, &g.grid)?;
    Ok(raw_inner(&f.values, &g.values) * f.grid.spacing())
}

pub(crate) fn raw_inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x * y.conj()).sum()
}

/// Trigonometric (band-limited) interpolation of a sampled signal, zero
/// outside `[-L/2, L/2)`. The Nyquist bin is split evenly between `+-n/2`.
#[derive(Clone, Debug)]
pub struct Interpolant {
    grid: Grid1D,
    coeffs: Vec<Complex64>,
}

impl Interpolant {
    pub fn new(f: &Signal) -> Self {
        let n = f.grid.n();
        let plan = Plans::new(n);
        let mut buf = f.values.clone();
        plan.forward.process(&mut buf);
        // coeffs[i] is the coefficient of bin (i - n/2); one extra slot for +n/2.
        let mut coeffs = vec![Complex64::new(0.0, 0.0); n + 1];
        for (m, v) in buf.iter().enumerate() {
            let bin = signed_bin(m, n);
            coeffs[(bin + (n / 2) as i64) as usize] = v / n as f64;
        }
        let nyq = coeffs[0] * 0.5;
        coeffs[0] = nyq;
        coeffs[n] = nyq;
        Self {
            grid: f.grid,
            coeffs,
        }
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn eval(&self, t: f64) -> Complex64 {
        let start = self.grid.start();
        if t < start || t >= -start {
            return Complex64::new(0.0, 0.0);
        }
        let n = self.grid.n();
        let u = (t - start) / self.grid.spacing();
        let step = Complex64::from_polar(1.0, 2.0 * PI * u / n as f64);
        let mut w = Complex64::from_polar(1.0, -PI * u);
        let mut acc = Complex64::new(0.0, 0.0);
        for c in &self.coeffs {
            acc += c * w;
            w *= step;
        }
        acc
    }
}

/// A time-frequency grid. For distributions the axes are `(x, xi)`; for
/// the intermediate tensor arrays the second axis holds the `y` variable
/// that is Fourier transformed into `xi`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TfGrid {
    pub x: Grid1D,
    pub xi: Grid1D,
}

impl TfGrid {
    pub fn new(x: Grid1D, xi: Grid1D) -> Self {
        Self { x, xi }
    }

    /// Signal grid times its dual grid.
    pub fn for_signal_grid(grid: &Grid1D) -> Self {
        Self {
            x: *grid,
            xi: grid.dual(),
        }
    }

    pub fn cell_area(&self) -> f64 {
        self.x.spacing() * self.xi.spacing()
    }
}

/// Complex samples over a [`TfGrid`], row-major with `x` as the slow index.
#[derive(Clone, Debug, PartialEq)]
pub struct TfArray {
    grid: TfGrid,
    data: Vec<Complex64>,
}

impl TfArray {
    pub fn new(grid: TfGrid, data: Vec<Complex64>) -> Result<Self> {
        let expected = grid.x.n() * grid.xi.n();
        if data.len() != expected {
            return Err(Error::LengthMismatch {
                expected,
                got: data.len(),
            });
        }
        Ok(Self { grid, data })
    }

    pub fn zeros(grid: TfGrid) -> Self {
        Self {
            grid,
            data: vec![Complex64::new(0.0, 0.0); grid.x.n() * grid.xi.n()],
        }
    }

    /// Fills the array from `f(ix, jxi)` with rows computed in parallel.
    pub fn from_fn_par(grid: TfGrid, f: impl Fn(usize, usize) -> Complex64 + Sync) -> Self {
        let nxi = grid.xi.n();
        let mut data = vec![Complex64::new(0.0, 0.0); grid.x.n() * nxi];
        data.par_chunks_mut(nxi).enumerate().for_each(|(i, row)| {
            for (j, v) in row.iter_mut().enumerate() {
                *v = f(i, j);
            }
        });
        Self { grid, data }
    }

    pub fn grid(&self) -> &TfGrid {
        &self.grid
    }
    pub fn data(&self) -> &[Complex64] {
        &self.data
    }
    pub fn data_mut(&mut self) -> &mut [Complex64] {
        &mut self.data
    }
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.grid.xi.n() + j]
    }
    pub fn row(&self, i: usize) -> &[Complex64] {
        let n = self.grid.xi.n();
        &self.data[i * n..(i + 1) * n]
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |m, v| m.max(v.norm()))
    }

    /// Riemann `L^2` inner product over the plane.
    pub fn inner(&self, other: &TfArray) -> Result<Complex64> {
        if !(self.grid.x.same_as(&other.grid.x) && self.grid.xi.same_as(&other.grid.xi)) {
            return Err(Error::GridMismatch);
        }
        Ok(raw_inner(&self.data, &other.data) * self.grid.cell_area())
    }

    pub fn l2_norm(&self) -> f64 {
        (self.grid.cell_area() * self.data.iter().map(|v| v.norm_sqr()).sum::<f64>()).sqrt()
    }

    /// Index and value of the entry with the largest modulus.
    pub fn argmax_abs(&self) -> (usize, usize, Complex64) {
        let (idx, v) = self
            .data
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.norm().total_cmp(&b.1.norm()))
            .expect("non-empty array");
        let n = self.grid.xi.n();
        (idx / n, idx % n, *v)
    }
}

fn partial_transform(f: &TfArray, inverse: bool) -> TfArray {
    let grid = f.grid;
    let plan = Plans::new(grid.xi.n());
    let fft = if inverse { &plan.inverse } else { &plan.forward };
    let h = grid.xi.spacing();
    let mut data = f.data.clone();
    data.par_chunks_mut(grid.xi.n())
        .for_each(|row| centered_transform(row, fft.as_ref(), h));
    TfArray {
        grid: TfGrid::new(grid.x, grid.xi.dual()),
        data,
    }
}

/// Fourier transform along the second axis, row by row.
pub fn partial_fft2(f: &TfArray) -> TfArray {
    partial_transform(f, false)
}

pub fn inverse_partial_fft2(f: &TfArray) -> TfArray {
    partial_transform(f, true)
}
