//! Metaplectic Wigner distributions of Wigner-decomposable type and their
//! metaplectic atoms.
//!
//! `W_A(f, g) = Phi_C * F_2 T_E (f (x) conj g)` is computed by sampling the
//! rescaled tensor product, Fourier transforming the second variable and
//! multiplying by the chirp. The atom `pi_A(x, xi)` is the operator with
//! `W_A(f, g)(x, xi) = <f, pi_A(x, xi) g>`; for `d = 1` it is
//!
//! ```text
//! pi_A(x, xi) = Phi_{-C}(x, xi) alpha_E e^{-2 pi i (E11/E12) xi x}
//!               M_{xi / E12} T_{schur x} T_{E22/E12}
//! ```
//!
//! with `schur = E11 - E12 E21 / E22` and `T_r` the normalized rescaling.
//! [`AtomMaps::printed`] keeps the variant that modulates by `xi / E22` and
//! translates by `(E12/E22) schur x`; it only satisfies the duality above
//! when `E12 = E22`, and exists so the discrepancy can be measured.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::{inner_product, partial_fft2, Grid1D, Signal, TfArray, TfGrid};
use crate::symplectic::WignerFactorization;
use crate::window::{tensor_eval, Window};

/// Scalar parameters of the `d = 1` metaplectic atom.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AtomMaps {
    pub alpha: f64,
    pub alpha_tilde: f64,
    /// `E11 / E12`: the atom carries the phase `e^{-2 pi i rate xi x}`.
    pub phase_rate: f64,
    /// `x -> translation * x`.
    pub translation: f64,
    /// `xi -> modulation * xi`.
    pub modulation: f64,
    /// Rescaling factor `E22 / E12` applied to the window.
    pub rescale: f64,
    /// `C` entries `(c11, c12, c22)`.
    pub chirp: (f64, f64, f64),
}

impl AtomMaps {
    pub fn new(fac: &WignerFactorization) -> Result<Self> {
        if fac.d() != 1 {
            return Err(Error::UnsupportedDimension(fac.d()));
        }
        let e = fac.e().full();
        let (e11, e12, e22) = (e[(0, 0)], e[(0, 1)], e[(1, 1)]);
        let c = fac.c();
        Ok(Self {
            alpha: fac.alpha(),
            alpha_tilde: fac.alpha_tilde(),
            phase_rate: e11 / e12,
            translation: fac.schur()[(0, 0)],
            modulation: 1.0 / e12,
            rescale: e22 / e12,
            chirp: (c[(0, 0)], c[(0, 1)], c[(1, 1)]),
        })
    }

    /// Translation `E12 E22^{-1} schur x` and modulation `E22^{-T} xi`, as in
    /// the closed form sometimes quoted for these atoms.
    pub fn printed(fac: &WignerFactorization) -> Result<Self> {
        let mut maps = Self::new(fac)?;
        let e = fac.e().full();
        let (e12, e22) = (e[(0, 1)], e[(1, 1)]);
        maps.translation *= e12 / e22;
        maps.modulation = 1.0 / e22;
        Ok(maps)
    }

    /// `Phi_C(x, xi) = e^{i pi (x, xi) C (x, xi)^T}`.
    pub fn chirp_phase(&self, x: f64, xi: f64) -> Complex64 {
        let (c11, c12, c22) = self.chirp;
        Complex64::from_polar(1.0, PI * (c11 * x * x + 2.0 * c12 * x * xi + c22 * xi * xi))
    }

    /// The scalar in front of `M T T_r`: `Phi_{-C} alpha e^{-2 pi i rate xi x}`.
    fn atom_scalar(&self, x: f64, xi: f64) -> Complex64 {
        self.chirp_phase(x, xi).conj()
            * Complex64::from_polar(self.alpha, -2.0 * PI * self.phase_rate * xi * x)
    }

    pub fn apply(&self, x: f64, xi: f64, g: &Window) -> Result<Window> {
        Ok(g
            .rescale(self.rescale)?
            .translate(self.translation * x)
            .modulate(self.modulation * xi)
            .scale(self.atom_scalar(x, xi)))
    }

    pub fn apply_inverse(&self, x: f64, xi: f64, h: &Window) -> Result<Window> {
        let scalar = self.chirp_phase(x, xi)
            * Complex64::from_polar(self.alpha_tilde, 2.0 * PI * self.phase_rate * xi * x);
        Ok(h.modulate(-self.modulation * xi)
            .translate(-self.translation * x)
            .rescale(1.0 / self.rescale)?
            .scale(scalar))
    }

    /// `pi(x, xi) = M_xi T_x` of the atom's lattice-mapped classical
    /// counterpart: `pi(calE (x, xi)) T_r g`.
    pub fn classical_counterpart(&self, x: f64, xi: f64, g: &Window) -> Result<Window> {
        Ok(g.rescale(self.rescale)?
            .tf_shift(self.translation * x, self.modulation * xi))
    }

    /// The unimodular phase `e^{-2 pi i rate xi x}` relating an atom to its
    /// classical counterpart (up to `alpha` and the chirp).
    pub fn explicit_phase(&self, x: f64, xi: f64) -> Complex64 {
        Complex64::from_polar(1.0, -2.0 * PI * self.phase_rate * xi * x)
    }
}

/// `pi_A(x, xi) g`.
pub fn atom_apply(fac: &WignerFactorization, x: f64, xi: f64, g: &Window) -> Result<Window> {
    AtomMaps::new(fac)?.apply(x, xi, g)
}

/// `pi_A(x, xi)^{-1} h`.
pub fn atom_inverse_apply(fac: &WignerFactorization, x: f64, xi: f64, h: &Window) -> Result<Window> {
    AtomMaps::new(fac)?.apply_inverse(x, xi, h)
}

/// Grid over which `t`-integrals run: the sampled window's own grid, else
/// the `x` axis of `tf`.
pub fn integration_grid(f: &Window, tf: &TfGrid) -> Grid1D {
    match f {
        Window::Sampled(s) => *s.grid(),
        Window::Analytic(_) => tf.x,
    }
}

/// `W_A(f, g)` sampled on `tf`.
pub fn wigner_metaplectic(
    f: &Window,
    g: &Window,
    fac: &WignerFactorization,
    tf: &TfGrid,
) -> Result<TfArray> {
    let maps = AtomMaps::new(fac)?;
    let tensor_grid = TfGrid::new(tf.x, tf.xi.dual());
    let tensor = tensor_eval(f, g, fac.e(), &tensor_grid, true)?;
    let mut out = partial_fft2(&tensor);
    if !fac.is_totally_decomposable() {
        let xs = tf.x.nodes();
        let xis = tf.xi.nodes();
        let nxi = tf.xi.n();
        out.data_mut()
            .par_chunks_mut(nxi)
            .enumerate()
            .for_each(|(i, row)| {
                for (j, v) in row.iter_mut().enumerate() {
                    *v *= maps.chirp_phase(xs[i], xis[j]);
                }
            });
    }
    TfArray::new(*tf, out.data().to_vec())
}

/// `e^{-2 pi i xi_j t_k}` for all frequency nodes `j` and time nodes `k`.
fn phase_table(xis: &[f64], ts: &[f64]) -> Vec<Vec<Complex64>> {
    xis.iter()
        .map(|xi| ts.iter().map(|t| Complex64::from_polar(1.0, -2.0 * PI * xi * t)).collect())
        .collect()
}

/// `V_g f(x, xi) = <f, M_xi T_x g>` by direct inner products on the
/// integration grid. Shares no code with [`wigner_metaplectic`].
pub fn stft_direct(f: &Window, g: &Window, tf: &TfGrid) -> TfArray {
    let grid = integration_grid(f, tf);
    let fs = f.sample(&grid);
    let ts = grid.nodes();
    let xs = tf.x.nodes();
    let phases = phase_table(&tf.xi.nodes(), &ts);
    let h = grid.spacing();
    let rows: Vec<Vec<Complex64>> = xs
        .par_iter()
        .map(|&x| {
            let shifted = g.translate(x).sample(&grid);
            // f_k conj(g(t_k - x)) e^{-2 pi i xi t_k} = f_k conj(M_xi T_x g (t_k))
            let prod: Vec<Complex64> = fs
                .values()
                .iter()
                .zip(shifted.values())
                .map(|(a, b)| a * b.conj())
                .collect();
            phases
                .iter()
                .map(|row| prod.iter().zip(row).map(|(p, e)| p * e).sum::<Complex64>() * h)
                .collect()
        })
        .collect();
    TfArray::new(*tf, rows.concat()).expect("rows sized from tf")
}

/// `W_tau(f, g)(x, xi) = int f(x + tau t) conj(g(x - (1 - tau) t)) e^{-2 pi i xi t} dt`
/// by a Riemann sum over the integration grid. Any real `tau`.
pub fn tau_wigner_direct(f: &Window, g: &Window, tau: f64, tf: &TfGrid) -> TfArray {
    let grid = integration_grid(f, tf);
    let ts = grid.nodes();
    let phases = phase_table(&tf.xi.nodes(), &ts);
    let h = grid.spacing();
    let fe = f.evaluator();
    let ge = g.evaluator();
    let rows: Vec<Vec<Complex64>> = tf
        .x
        .nodes()
        .par_iter()
        .map(|&x| {
            let prod: Vec<Complex64> = ts
                .iter()
                .map(|&t| fe.eval(x + tau * t) * ge.eval(x - (1.0 - tau) * t).conj())
                .collect();
            phases
                .iter()
                .map(|row| prod.iter().zip(row).map(|(p, e)| p * e).sum::<Complex64>() * h)
                .collect()
        })
        .collect();
    TfArray::new(*tf, rows.concat()).expect("rows sized from tf")
}

/// `|<W_A(f,g), W_A(phi,psi)>_{L^2(tf)} - <f,phi> conj(<g,psi>)|`.
pub fn moyal_residual(
    f: &Window,
    g: &Window,
    phi: &Window,
    psi: &Window,
    fac: &WignerFactorization,
    tf: &TfGrid,
) -> Result<f64> {
    let lhs = wigner_metaplectic(f, g, fac, tf)?.inner(&wigner_metaplectic(phi, psi, fac, tf)?)?;
    Ok((lhs - moyal_rhs(f, g, phi, psi, tf)?).norm())
}

pub(crate) fn moyal_rhs(f: &Window, g: &Window, phi: &Window, psi: &Window, tf: &TfGrid) -> Result<Complex64> {
    let grid = integration_grid(f, tf);
    let fp = inner_product(&f.sample(&grid), &phi.sample(&grid))?;
    let gp = inner_product(&g.sample(&grid), &psi.sample(&grid))?;
    Ok(fp * gp.conj())
}

/// Max-abs difference between `|W_A(pi(w) f, g)|` and `|W_A(f, g)|`
/// shifted by `E_A w`, over the overlap of the two arrays. `E_A w` must
/// land on grid offsets.
pub fn covariance_residual(
    fac: &WignerFactorization,
    f: &Window,
    g: &Window,
    w: (f64, f64),
    tf: &TfGrid,
) -> Result<f64> {
    if fac.d() != 1 {
        return Err(Error::UnsupportedDimension(fac.d()));
    }
    let ea = fac.ea();
    let sx = ea[(0, 0)] * w.0 + ea[(0, 1)] * w.1;
    let sxi = ea[(1, 0)] * w.0 + ea[(1, 1)] * w.1;
    let to_offset = |s: f64, h: f64| -> Option<i64> {
        let u = s / h;
        ((u - u.round()).abs() <= 1e-9).then_some(u.round() as i64)
    };
    let (di, dj) = match (to_offset(sx, tf.x.spacing()), to_offset(sxi, tf.xi.spacing())) {
        (Some(a), Some(b)) => (a, b),
        _ => return Err(Error::OffGridShift((sx, sxi))),
    };
    let shifted = wigner_metaplectic(&f.tf_shift(w.0, w.1), g, fac, tf)?;
    let base = wigner_metaplectic(f, g, fac, tf)?;
    let (nx, nxi) = (tf.x.n() as i64, tf.xi.n() as i64);
    let mut worst = 0.0_f64;
    for i in 0..nx {
        let si = i - di;
        if si < 0 || si >= nx {
            continue;
        }
        for j in 0..nxi {
            let sj = j - dj;
            if sj < 0 || sj >= nxi {
                continue;
            }
            let a = shifted.get(i as usize, j as usize).norm();
            let b = base.get(si as usize, sj as usize).norm();
            worst = worst.max((a - b).abs());
        }
    }
    Ok(worst)
}

/// Riemann realization of `f = <gamma, g>^{-1} int W_A(f,g)(z) pi_A(z) gamma dz`
/// over `tf`, sampled on `out`.
pub fn inversion_reconstruct(
    f: &Window,
    g: &Window,
    gamma: &Window,
    fac: &WignerFactorization,
    tf: &TfGrid,
    out: &Grid1D,
) -> Result<Signal> {
    let pair = inner_product(&gamma.sample(out), &g.sample(out))?;
    if pair.norm() < 1e-10 {
        return Err(Error::DegeneratePair(pair.norm()));
    }
    let maps = AtomMaps::new(fac)?;
    let w = wigner_metaplectic(f, g, fac, tf)?;
    let peak = w.max_abs();
    if peak == 0.0 {
        return Ok(Signal::zeros(*out));
    }
    let cutoff = peak * 1e-17;
    let xs = tf.x.nodes();
    let xis = tf.xi.nodes();
    let weight = tf.cell_area() / pair;
    let partials: Vec<Vec<Complex64>> = (0..xs.len())
        .into_par_iter()
        .map(|i| -> Result<Vec<Complex64>> {
            let mut acc = vec![Complex64::new(0.0, 0.0); out.n()];
            for (j, &xi) in xis.iter().enumerate() {
                let c = w.get(i, j);
                if c.norm() <= cutoff {
                    continue;
                }
                let atom = maps.apply(xs[i], xi, gamma)?.sample(out);
                for (a, v) in acc.iter_mut().zip(atom.values()) {
                    *a += c * v;
                }
            }
            Ok(acc)
        })
        .collect::<Result<_>>()?;
    let mut total = vec![Complex64::new(0.0, 0.0); out.n()];
    for part in partials {
        for (t, p) in total.iter_mut().zip(part) {
            *t += p;
        }
    }
    Signal::new(*out, total.into_iter().map(|v| v * weight).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symplectic::{make_factorization, stft_factorization, tau_factorization, BlockMatrix2d, Mat};

    fn desk_tf() -> TfGrid {
        TfGrid::for_signal_grid(&Grid1D::default_desk())
    }

    fn max_diff(a: &TfArray, b: &TfArray) -> f64 {
        a.data()
            .iter()
            .zip(b.data())
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max)
    }

    #[test]
    fn stft_path_matches_direct_oracle() {
        let tf = desk_tf();
        let g = Window::gaussian(1.0);
        let f = Window::hermite(1, 1.3).tf_shift(0.5, -0.25);
        let w = wigner_metaplectic(&f, &g, &stft_factorization(), &tf).unwrap();
        let d = stft_direct(&f, &g, &tf);
        assert!(max_diff(&w, &d) < 1e-8);
        let gg = stft_direct(&g, &g, &tf);
        assert!((gg.get(128, 128).norm() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn stft_symmetry_and_energy() {
        let tf = desk_tf();
        let g = Window::gaussian(1.0);
        let f = Window::hermite(2, 1.0);
        let v = stft_direct(&f, &g, &tf);
        for (i, j) in [(130usize, 120usize), (140, 141), (100, 90)] {
            let a = v.get(i, j).norm();
            let b = v.get(256 - i, 256 - j).norm();
            assert!((a - b).abs() < 1e-12);
        }
        assert!((v.l2_norm() - 1.0).abs() < 1e-4);
    }

    #[test]
    fn tau_half_of_gaussian() {
        let tf = desk_tf();
        let g = Window::gaussian(1.0);
        let fac = tau_factorization(0.5).unwrap();
        let w = wigner_metaplectic(&g, &g, &fac, &tf).unwrap();
        assert!((w.get(128, 128) - 2.0).norm() < 1e-12);
        let xs = tf.x.nodes();
        let exact = TfArray::from_fn_par(tf, |i, j| {
            Complex64::new(2.0 * (-2.0 * PI * (xs[i] * xs[i] + xs[j] * xs[j])).exp(), 0.0)
        });
        assert!(max_diff(&w, &exact) < 1e-6);
        let direct = tau_wigner_direct(&g, &g, 0.5, &tf);
        assert!(max_diff(&direct, &exact) < 1e-6);
    }

    #[test]
    fn rihaczek_collapse() {
        let tf = desk_tf();
        let f = Window::gaussian(1.0).translate(0.4);
        let g = Window::gaussian(1.0);
        let r = tau_wigner_direct(&f, &g, 0.0, &tf);
        let xs = tf.x.nodes();
        let xis = tf.xi.nodes();
        // unit Gaussian is its own Fourier transform
        let exact = TfArray::from_fn_par(tf, |i, j| {
            f.eval(xs[i]) * g.eval(xis[j]).conj() * Complex64::from_polar(1.0, -2.0 * PI * xs[i] * xis[j])
        });
        assert!(max_diff(&r, &exact) < 1e-7);
        assert_eq!(tau_wigner_direct(&Window::zero(), &g, 0.3, &tf).max_abs(), 0.0);
    }

    #[test]
    fn chirp_leaves_modulus_unchanged() {
        let tf = desk_tf();
        let e = BlockMatrix2d::scalar(0.6, 0.8, -0.5, 1.1).unwrap();
        let plain = make_factorization(&Mat::zeros(2, 2), &e).unwrap();
        let c = Mat::from_row_slice(2, 2, &[0.7, -0.3, -0.3, 0.4]);
        let chirped = make_factorization(&c, &e).unwrap();
        let f = Window::gaussian(0.9).tf_shift(0.3, 0.2);
        let g = Window::gaussian(1.0);
        let a = wigner_metaplectic(&f, &g, &plain, &tf).unwrap();
        let b = wigner_metaplectic(&f, &g, &chirped, &tf).unwrap();
        for (x, y) in a.data().iter().zip(b.data()) {
            assert!((x.norm() - y.norm()).abs() <= 1e-12);
        }
    }

    #[test]
    fn stft_atoms_are_time_frequency_shifts() {
        let fac = stft_factorization();
        let g = Window::hermite(1, 1.0);
        let grid = Grid1D::default_desk();
        for (x, xi) in [(0.0, 0.0), (1.5, -0.75), (-2.25, 3.0)] {
            let a = atom_apply(&fac, x, xi, &g).unwrap().sample(&grid);
            let b = g.tf_shift(x, xi).sample(&grid);
            assert!(a.sub(&b).unwrap().norm() < 1e-12);
            let inv = atom_inverse_apply(&fac, x, xi, &g).unwrap().sample(&grid);
            let expect = g.modulate(-xi).translate(-x).sample(&grid);
            assert!(inv.sub(&expect).unwrap().norm() < 1e-12);
        }
    }

    #[test]
    fn tau_half_atom_at_origin() {
        let fac = tau_factorization(0.5).unwrap();
        let g = Window::gaussian(1.0).translate(0.3);
        let grid = Grid1D::default_desk();
        let a = atom_apply(&fac, 0.0, 0.0, &g).unwrap().sample(&grid);
        let b = g.rescale(-1.0).unwrap().scale(Complex64::new(2.0, 0.0)).sample(&grid);
        assert!(a.sub(&b).unwrap().norm() < 1e-12);
        let maps = AtomMaps::new(&fac).unwrap();
        assert!((maps.modulation - 2.0).abs() < 1e-14);
        assert!((maps.translation - 2.0).abs() < 1e-14);
    }

    #[test]
    fn atom_duality_and_printed_discrepancy() {
        let tf = desk_tf();
        let grid = tf.x;
        let f = Window::gaussian(1.0).tf_shift(0.7, 0.4);
        let g = Window::gaussian(1.0);
        let fac = tau_factorization(1.0 / 3.0).unwrap();
        let w = wigner_metaplectic(&f, &g, &fac, &tf).unwrap();
        let fs = f.sample(&grid);
        let derived = AtomMaps::new(&fac).unwrap();
        let printed = AtomMaps::printed(&fac).unwrap();
        let mut worst_printed = 0.0_f64;
        for (i, j) in [(133usize, 120usize), (140, 136), (125, 131)] {
            let (x, xi) = (tf.x.node(i), tf.xi.node(j));
            let atom = derived.apply(x, xi, &g).unwrap().sample(&grid);
            let ip = inner_product(&fs, &atom).unwrap();
            assert!((ip - w.get(i, j)).norm() < 1e-10);
            let atom_p = printed.apply(x, xi, &g).unwrap().sample(&grid);
            worst_printed = worst_printed.max((inner_product(&fs, &atom_p).unwrap() - w.get(i, j)).norm());
        }
        assert!(worst_printed > 1e-3);
    }

    #[test]
    fn inverse_undoes_atom() {
        let e = BlockMatrix2d::scalar(0.3, 1.1, -0.8, 0.7).unwrap();
        let fac = make_factorization(&Mat::from_row_slice(2, 2, &[0.5, 0.2, 0.2, -0.4]), &e).unwrap();
        let g = Window::hermite(2, 0.9).add(&Window::gaussian(1.0).translate(0.5)).unwrap();
        let grid = Grid1D::default_desk();
        let back = atom_inverse_apply(&fac, 0.8, -0.6, &atom_apply(&fac, 0.8, -0.6, &g).unwrap()).unwrap();
        assert!(back.sample(&grid).sub(&g.sample(&grid)).unwrap().norm() < 1e-9);
    }

    #[test]
    fn moyal_examples() {
        let tf = desk_tf();
        let g = Window::gaussian(1.0);
        let h1 = Window::hermite(1, 1.0);
        let stft = stft_factorization();
        assert!(moyal_residual(&g, &g, &g, &g, &stft, &tf).unwrap() < 1e-4);
        let cross = wigner_metaplectic(&g, &g, &stft, &tf)
            .unwrap()
            .inner(&wigner_metaplectic(&h1, &g, &stft, &tf).unwrap())
            .unwrap();
        assert!(cross.norm() < 1e-4);
        let tau = tau_factorization(0.5).unwrap();
        assert!(moyal_residual(&g, &g, &g, &g, &tau, &tf).unwrap() < 1e-4);
    }

    #[test]
    fn covariance_examples() {
        let tf = desk_tf();
        let g = Window::gaussian(1.0);
        let f = Window::gaussian(1.0).translate(0.2);
        let stft = stft_factorization();
        assert!(covariance_residual(&stft, &f, &g, (0.0, 0.0), &tf).unwrap() < 1e-12);
        let h = tf.x.spacing();
        assert!(covariance_residual(&stft, &f, &g, (8.0 * h, 8.0 / 16.0), &tf).unwrap() < 1e-8);
        let tau = tau_factorization(0.5).unwrap();
        assert!(covariance_residual(&tau, &f, &g, (16.0 * h, 1.0), &tf).unwrap() < 1e-6);
        assert!(matches!(
            covariance_residual(&tau, &f, &g, (0.01, 0.0), &tf),
            Err(Error::OffGridShift(_))
        ));
    }

    #[test]
    fn inversion_examples() {
        let coarse = Grid1D::new(128, 16.0).unwrap();
        let tf = TfGrid::new(coarse, coarse);
        let out = Grid1D::default_desk();
        let g = Window::gaussian(1.0);
        let f = Window::gaussian(1.0).tf_shift(0.5, -0.5);
        let rec = inversion_reconstruct(&f, &g, &g, &stft_factorization(), &tf, &out).unwrap();
        let fs = f.sample(&out);
        assert!(rec.sub(&fs).unwrap().norm() / fs.norm() < 1e-3);
        let zero = inversion_reconstruct(&Window::zero(), &g, &g, &stft_factorization(), &tf, &out).unwrap();
        assert!(zero.values().iter().all(|v| *v == Complex64::new(0.0, 0.0)));
        let orth = Window::hermite(1, 1.0);
        assert!(matches!(
            inversion_reconstruct(&f, &g, &orth, &stft_factorization(), &tf, &out),
            Err(Error::DegeneratePair(_))
        ));
    }
}
