//! Invariant suites run by `metagabor verify`. Each check reports the
//! measured value against its tolerance; informational checks are recorded
//! but never fail.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::baselines::norm_baselines;
use crate::error::{Error, Result};
use crate::family::family_v1;
use crate::frames::{
    build_system, coefficient_energies, frame_bounds, frame_reconstruct, theorem_main_check, AtomKind, Lattice,
};
use crate::grid::{fourier, inner_product, Grid1D, Signal, TfGrid};
use crate::spaces::{modulation_norm, wa_modulation_equivalence, NormSpec, Weight};
use crate::symplectic::{
    is_right_regular, make_aft2, make_de, make_factorization, make_vc, random_right_regular, random_symmetric,
    stft_factorization, symplectic_residual, tau_factorization, try_factor, BlockMatrix2d, Mat, SymplecticMatrix,
    WignerFactorization,
};
use crate::tfr::{covariance_residual, moyal_residual, wigner_metaplectic, AtomMaps};
use crate::window::Window;

pub const SUITES: [&str; 7] = ["symplectic", "grid", "moyal", "atoms", "covariance", "frames", "norms"];

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckResult {
    pub suite: &'static str,
    pub check: String,
    pub value: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub informational: bool,
}

struct Collector {
    suite: &'static str,
    out: Vec<CheckResult>,
}

impl Collector {
    fn new(suite: &'static str) -> Self {
        Self { suite, out: Vec::new() }
    }

    /// Passes when `value <= tolerance` (NaN fails).
    fn at_most(&mut self, check: &str, value: f64, tolerance: f64) {
        self.push(check, value, tolerance, value <= tolerance, false);
    }

    /// Passes when `value > threshold`.
    fn above(&mut self, check: &str, value: f64, threshold: f64) {
        self.push(check, value, threshold, value > threshold, false);
    }

    fn info(&mut self, check: &str, value: f64) {
        self.push(check, value, f64::NAN, true, true);
    }

    fn push(&mut self, check: &str, value: f64, tolerance: f64, passed: bool, informational: bool) {
        self.out.push(CheckResult { suite: self.suite, check: check.into(), value, tolerance, passed, informational });
    }
}

const SEED: u64 = 20_240_601;

/// Right-regular `E` (and optionally a chirp) whose atoms stay well inside
/// the desk grid: `|E12|, |E22| >= 0.5`, rescale and Schur factors in
/// `[1/3, 3]`.
pub fn moderate_factorization<R: Rng + ?Sized>(rng: &mut R, chirp: bool) -> WignerFactorization {
    loop {
        let e = random_right_regular(rng, 1);
        let full = e.full();
        let (e12, e22) = (full[(0, 1)], full[(1, 1)]);
        if e12.abs() < 0.5 || e22.abs() < 0.5 {
            continue;
        }
        let c = if chirp { random_symmetric(rng, 2) } else { Mat::zeros(2, 2) };
        let fac = make_factorization(&c, &e).expect("right-regular by construction");
        let schur = fac.schur()[(0, 0)].abs();
        let r = (e22 / e12).abs();
        if (1.0 / 3.0..=3.0).contains(&schur) && (1.0 / 3.0..=3.0).contains(&r) {
            return fac;
        }
    }
}

fn max_diff(a: &Signal, b: &Signal) -> f64 {
    a.values().iter().zip(b.values()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

fn symplectic_suite() -> Result<Vec<CheckResult>> {
    let mut c = Collector::new("symplectic");
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut worst = 0.0_f64;
    for _ in 0..50 {
        let e = random_right_regular(&mut rng, 1);
        let gens = [
            make_de(&e)?,
            make_vc(&random_symmetric(&mut rng, 2))?,
            make_aft2(1),
            SymplecticMatrix::j(1),
        ];
        let mut prod = SymplecticMatrix::identity(4);
        for k in 0..6 {
            prod = prod.compose(&gens[(k * 7 + rng.gen_range(0..4)) % 4])?;
            let scale = 1.0 + prod.matrix().amax().powi(2);
            worst = worst.max(symplectic_residual(prod.matrix())? / scale);
        }
    }
    c.at_most("generator-products-scaled", worst, 1e-10);

    let mut worst_rt = 0.0_f64;
    for _ in 0..100 {
        let e = random_right_regular(&mut rng, 1);
        let fac = make_factorization(&random_symmetric(&mut rng, 2), &e)?;
        let a = fac.assembled()?;
        let scale = a.matrix().abs().max().max(1.0);
        let residual = match try_factor(&a) {
            Some((c2, e2)) => (make_factorization(&c2, &e2)?.assembled()?.matrix() - a.matrix()).abs().max() / scale,
            None => f64::INFINITY,
        };
        worst_rt = worst_rt.max(residual);
    }
    c.at_most("try-factor-round-trip", worst_rt, 1e-9);

    let mut worst_alpha = 0.0_f64;
    for _ in 0..50 {
        let fac = make_factorization(&Mat::zeros(2, 2), &random_right_regular(&mut rng, 1))?;
        worst_alpha = worst_alpha.max((fac.alpha() * fac.alpha_tilde() - 1.0).abs());
    }
    c.at_most("alpha-times-alpha-tilde", worst_alpha, 1e-12);

    let singular = BlockMatrix2d::scalar(1.0, 0.0, 0.0, 1.0)?;
    c.at_most("identity-not-right-regular", f64::from(u8::from(is_right_regular(&singular))), 0.0);
    Ok(c.out)
}

fn grid_suite(grid: &Grid1D) -> Result<Vec<CheckResult>> {
    let mut c = Collector::new("grid");
    let g = Window::gaussian(1.0).sample(grid);
    let fg = fourier(&g);
    let expect = Window::gaussian(1.0).sample(fg.grid());
    c.at_most("gaussian-self-dual", max_diff(&fg, &expect), 1e-8);

    let f = Window::hermite(2, 0.8).tf_shift(0.5, 1.25).sample(grid);
    let f4 = fourier(&fourier(&fourier(&fourier(&f))));
    c.at_most("fourier-fourth-power", max_diff(&f4, &f), 1e-7);
    c.at_most("parseval", (fourier(&f).norm() - f.norm()).abs(), 1e-9);

    let a = 0.75;
    let lhs = fourier(&f.translate(a));
    let rhs = fourier(&f).modulate(-a);
    c.at_most("fourier-translation-commutation", max_diff(&lhs, &rhs), 1e-8);

    let mut worst = 0.0_f64;
    for s in [
        g.translate(1.3),
        g.modulate(2.2),
        g.chirp_mul(0.7),
        g.rescale(1.5)?,
        g.rescale(-0.8)?,
    ] {
        worst = worst.max((s.norm() - 1.0).abs());
    }
    c.at_most("operators-preserve-norm", worst, 1e-6);
    let ip = inner_product(&g, &g.scaled(Complex64::i()))?;
    c.at_most("inner-product-antilinear", (ip + Complex64::i() * inner_product(&g, &g)?).norm(), 1e-15);
    Ok(c.out)
}

fn moyal_suite(tf: &TfGrid) -> Result<Vec<CheckResult>> {
    let mut c = Collector::new("moyal");
    let fam = family_v1();
    let g = Window::gaussian(1.0);
    for (label, fac) in [("stft", stft_factorization()), ("tau-0.5", tau_factorization(0.5)?)] {
        let mut worst = 0.0_f64;
        let mut energy = 0.0_f64;
        for (i, (_, f)) in fam.iter().enumerate() {
            let phi = &fam[(i + 3) % fam.len()].1;
            worst = worst.max(moyal_residual(f, &g, phi, &g, &fac, tf)?);
            let w = wigner_metaplectic(f, &g, &fac, tf)?;
            energy = energy.max((w.l2_norm() - 1.0).abs());
        }
        c.at_most(&format!("moyal-{label}"), worst, 1e-4);
        c.at_most(&format!("energy-{label}"), energy, 1e-3);
    }
    Ok(c.out)
}

fn atoms_suite(tf: &TfGrid) -> Result<Vec<CheckResult>> {
    let mut c = Collector::new("atoms");
    let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 0xa70);
    let grid = tf.x;
    let f = Window::gaussian(1.0).tf_shift(0.4, -0.3);
    let g = Window::gaussian(1.2);
    let fs = f.sample(&grid);
    let facs = [
        ("stft", stft_factorization()),
        ("tau-0.5", tau_factorization(0.5)?),
        ("tau-0.333", tau_factorization(1.0 / 3.0)?),
        ("random-chirped", moderate_factorization(&mut rng, true)),
    ];
    for (label, fac) in &facs {
        let w = wigner_metaplectic(&f, &g, fac, tf)?;
        let maps = AtomMaps::new(fac)?;
        let scale = w.max_abs();
        let mut worst = 0.0_f64;
        for _ in 0..25 {
            let i = rng.gen_range(tf.x.n() / 2 - 48..tf.x.n() / 2 + 48);
            let j = rng.gen_range(tf.xi.n() / 2 - 48..tf.xi.n() / 2 + 48);
            let atom = maps.apply(tf.x.node(i), tf.xi.node(j), &g)?.sample(&grid);
            worst = worst.max((inner_product(&fs, &atom)? - w.get(i, j)).norm() / scale);
        }
        c.at_most(&format!("duality-{label}"), worst, 1e-7);
    }

    let windows = [Window::gaussian(1.0), Window::hermite(2, 0.9), Window::chirped_gaussian(1.1, -0.6)];
    let mut worst_rt = 0.0_f64;
    for k in 0..50 {
        let fac = if k % 2 == 0 { moderate_factorization(&mut rng, k % 4 == 0) } else { facs[k % 4].1.clone() };
        let (x, xi) = (rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0));
        let h = &windows[k % windows.len()];
        let maps = AtomMaps::new(&fac)?;
        let back = maps.apply_inverse(x, xi, &maps.apply(x, xi, h)?)?;
        worst_rt = worst_rt.max(max_diff(&back.sample(&grid), &h.sample(&grid)));
    }
    c.at_most("inverse-round-trip", worst_rt, 1e-9);

    let chirped = &facs[3].1;
    let plain = chirped.without_chirp();
    let (pa, pb) = (AtomMaps::new(&plain)?, AtomMaps::new(chirped)?);
    let mut worst_chirp = 0.0_f64;
    for _ in 0..10 {
        let (x, xi) = (rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0));
        let a = pa.apply(x, xi, &g)?.sample(&grid).scaled(pb.chirp_phase(x, xi).conj());
        worst_chirp = worst_chirp.max(max_diff(&a, &pb.apply(x, xi, &g)?.sample(&grid)));
    }
    c.at_most("chirped-atom-factor", worst_chirp, 1e-12);
    let wa = wigner_metaplectic(&f, &g, &plain, tf)?;
    let wb = wigner_metaplectic(&f, &g, chirped, tf)?;
    let modulus = wa.data().iter().zip(wb.data()).map(|(a, b)| (a.norm() - b.norm()).abs()).fold(0.0, f64::max);
    c.at_most("chirp-modulus-neutral", modulus, 1e-12);

    let tau = &facs[2].1;
    let w = wigner_metaplectic(&f, &g, tau, tf)?;
    let printed = AtomMaps::printed(tau)?;
    let mut worst_printed = 0.0_f64;
    for _ in 0..25 {
        let i = rng.gen_range(tf.x.n() / 2 - 32..tf.x.n() / 2 + 32);
        let j = rng.gen_range(tf.xi.n() / 2 - 32..tf.xi.n() / 2 + 32);
        let atom = printed.apply(tf.x.node(i), tf.xi.node(j), &g)?.sample(&grid);
        worst_printed = worst_printed.max((inner_product(&fs, &atom)? - w.get(i, j)).norm() / w.max_abs());
    }
    c.info("printed-form-duality-residual-tau-0.333", worst_printed);
    Ok(c.out)
}

fn covariance_suite(tf: &TfGrid) -> Result<Vec<CheckResult>> {
    let mut c = Collector::new("covariance");
    let f = Window::gaussian(1.0).translate(0.2);
    let g = Window::gaussian(1.0);
    let (h, k) = (tf.x.spacing(), tf.xi.spacing());
    let stft = stft_factorization();
    c.at_most("zero-shift", covariance_residual(&stft, &f, &g, (0.0, 0.0), tf)?, 1e-12);
    c.at_most("stft", covariance_residual(&stft, &f, &g, (8.0 * h, 8.0 * k), tf)?, 1e-6);
    let tau = tau_factorization(0.5)?;
    let mut worst = 0.0_f64;
    for (a, b) in [(16.0, 16.0), (-32.0, 8.0), (6.0, -20.0)] {
        worst = worst.max(covariance_residual(&tau, &f, &g, (a * h, b * k), tf)?);
    }
    c.at_most("tau-0.5", worst, 1e-6);
    Ok(c.out)
}

fn frames_suite(grid: &Grid1D) -> Result<Vec<CheckResult>> {
    let mut c = Collector::new("frames");
    let g = Window::gaussian(1.0);
    let lattice = Lattice::new(1.0, 0.5, 8.0)?;
    let classical = build_system(&g, &lattice, AtomKind::Classical, grid)?;
    c.above("classical-lower-bound", frame_bounds(&classical)?.lower, 1e-8);
    let sparse = build_system(&g, &Lattice::new(2.0, 2.0, 8.0)?, AtomKind::Classical, grid)?;
    c.at_most("undersampled-lower-bound", frame_bounds(&sparse)?.lower, 1e-6);

    let f = Window::gaussian(0.8).tf_shift(0.7, -0.4).sample(grid);
    c.at_most("classical-reconstruction", frame_reconstruct(&classical, &f)?.1, 1e-6);

    for (label, fac) in [("stft", stft_factorization()), ("tau-0.5", tau_factorization(0.5)?)] {
        let report = theorem_main_check(&fac, &g, &lattice, grid)?;
        c.at_most(&format!("per-atom-modulus-{label}"), report.modulus_residual, 1e-8);
        c.at_most(&format!("per-atom-phase-{label}"), report.phase_residual, 1e-8);
        let ratio = report.ratio.unwrap_or(f64::NAN);
        c.at_most(&format!("bound-ratio-{label}"), (ratio / report.expected_ratio - 1.0).abs(), 0.02);
        let (meta, cls) = coefficient_energies(&fac, &g, &lattice, grid, &f)?;
        let expected = 1.0 / fac.bound_ratio();
        c.at_most(&format!("energy-transfer-{label}"), (meta / cls / expected - 1.0).abs(), 1e-6);
    }

    let tau = tau_factorization(0.5)?;
    let matched = build_system(&g, &Lattice::new(0.5, 0.25, 4.0)?, AtomKind::Metaplectic(tau), grid)?;
    c.at_most("metaplectic-reconstruction-tau-0.5", frame_reconstruct(&matched, &f)?.1, 1e-5);
    Ok(c.out)
}

fn norms_suite(tf: &TfGrid) -> Result<Vec<CheckResult>> {
    let mut c = Collector::new("norms");
    let g = Window::gaussian(1.0);
    let fam: Vec<Window> = family_v1().into_iter().map(|(_, w)| w).collect();
    let flat = NormSpec::new(2.0, 2.0, Weight::Constant)?;
    c.at_most("gaussian-modulation-norm", (modulation_norm(&g, &g, &flat, tf)? - 1.0).abs(), 1e-3);
    for (label, spec) in [
        ("p2-q2-const", flat.clone()),
        ("p1-q2-vs1", NormSpec::new(1.0, 2.0, Weight::vs(1.0))?),
    ] {
        let r = wa_modulation_equivalence(&stft_factorization(), &fam, &g, &spec, tf)?;
        c.at_most(&format!("stft-spread-{label}"), (r.spread - 1.0).abs(), 1e-9);
    }
    let baselines = norm_baselines();
    for case in &baselines.cases {
        let observed = case.observed_spread(tf)?;
        c.at_most(&format!("baseline-{}", case.id), (observed / case.spread - 1.0).abs(), baselines.tolerance);
    }
    Ok(c.out)
}

/// Runs one suite (or `"all"`) on the given signal grid.
pub fn run_suite(name: &str, grid: &Grid1D) -> Result<Vec<CheckResult>> {
    let tf = TfGrid::for_signal_grid(grid);
    match name {
        "symplectic" => symplectic_suite(),
        "grid" => grid_suite(grid),
        "moyal" => moyal_suite(&tf),
        "atoms" => atoms_suite(&tf),
        "covariance" => covariance_suite(&tf),
        "frames" => frames_suite(grid),
        "norms" => norms_suite(&tf),
        "all" => {
            let mut out = Vec::new();
            for s in SUITES {
                out.extend(run_suite(s, grid)?);
            }
            Ok(out)
        }
        other => Err(Error::UnknownSuite(other.to_string())),
    }
}
