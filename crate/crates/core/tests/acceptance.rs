//! Acceptance suite. Runs every criterion at desk scale (n = 256, L = 16,
//! Gaussian window sigma = 1), prints one PASS/FAIL line per criterion and
//! exits nonzero if any criterion fails.
//!
//! Run with `cargo test -p metagabor --test acceptance`.

use std::process::ExitCode;
use std::time::Instant;

use metagabor::baselines::norm_baselines;
use metagabor::family::family_v1;
use metagabor::frames::{
    build_system, coefficient_energies, frame_bounds, frame_reconstruct, theorem_main_check, AtomKind, Lattice,
};
use metagabor::grid::{inner_product, Grid1D, Signal, TfGrid};
use metagabor::spaces::{wa_amalgam_equivalence, wa_modulation_equivalence, NormSpec, Weight};
use metagabor::symplectic::{
    is_symplectic, make_aft2, make_de, make_factorization, make_vc, random_right_regular, random_symmetric,
    stft_factorization, tau_factorization, try_factor, Mat, SymplecticMatrix,
};
use metagabor::tfr::{
    atom_apply, atom_inverse_apply, covariance_residual, inversion_reconstruct, moyal_residual, stft_direct,
    tau_wigner_direct, wigner_metaplectic,
};
use metagabor::verify::moderate_factorization;
use metagabor::window::Window;
use metagabor::Result;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SEED: u64 = 0x5eed_acce;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(checks: &[(&str, f64, f64)]) -> Outcome {
    // (label, observed, tolerance); passes when observed <= tolerance
    let passed = checks.iter().all(|(_, v, tol)| *v <= *tol);
    let detail = checks
        .iter()
        .map(|(label, v, tol)| format!("{label}={v:.3e}(<={tol:.0e})"))
        .collect::<Vec<_>>()
        .join(" ");
    Outcome { passed, detail }
}

fn desk() -> (Grid1D, TfGrid) {
    let grid = Grid1D::default_desk();
    (grid, TfGrid::for_signal_grid(&grid))
}

fn max_diff(a: &[num_complex::Complex64], b: &[num_complex::Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

fn rel_l2(a: &Signal, b: &Signal) -> f64 {
    a.sub(b).unwrap().norm() / b.norm()
}

fn factorization_fidelity() -> Result<Outcome> {
    let (_, tf) = desk();
    let g = Window::gaussian(1.0);
    let f = Window::hermite(1, 0.9).tf_shift(0.6, -0.4);
    let stft = max_diff(
        wigner_metaplectic(&f, &g, &stft_factorization(), &tf)?.data(),
        stft_direct(&f, &g, &tf).data(),
    );
    let mut tau_worst = 0.0_f64;
    for tau in [0.25, 1.0 / 3.0, 0.5, 0.75] {
        let w = wigner_metaplectic(&f, &g, &tau_factorization(tau)?, &tf)?;
        tau_worst = tau_worst.max(max_diff(w.data(), tau_wigner_direct(&f, &g, tau, &tf).data()));
    }
    Ok(outcome(&[("stft", stft, 1e-8), ("tau", tau_worst, 1e-6)]))
}

fn atom_duality() -> Result<Outcome> {
    let (grid, tf) = desk();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let f = Window::gaussian(0.9).tf_shift(0.5, 0.3).add(&Window::hermite(2, 1.1))?;
    let g = Window::gaussian(1.0);
    let fs = f.sample(&grid);
    let chirped = moderate_factorization(&mut rng, true);
    assert!(chirped.c().abs().max() > 0.0);
    let facs = [stft_factorization(), tau_factorization(0.5)?, tau_factorization(0.25)?, chirped];
    let mut worst = 0.0_f64;
    for fac in &facs {
        let w = wigner_metaplectic(&f, &g, fac, &tf)?;
        let scale = w.max_abs();
        for _ in 0..25 {
            let i = rng.gen_range(tf.x.n() / 2 - 48..tf.x.n() / 2 + 48);
            let j = rng.gen_range(tf.xi.n() / 2 - 48..tf.xi.n() / 2 + 48);
            let atom = atom_apply(fac, tf.x.node(i), tf.xi.node(j), &g)?.sample(&grid);
            worst = worst.max((inner_product(&fs, &atom)? - w.get(i, j)).norm() / scale);
        }
    }
    Ok(outcome(&[("relative", worst, 1e-7)]))
}

fn atom_inversion() -> Result<Outcome> {
    let (grid, _) = desk();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 3);
    let windows = [
        Window::gaussian(1.0),
        Window::hermite(3, 0.8),
        Window::chirped_gaussian(1.2, 0.7),
        Window::gaussian(0.7).tf_shift(-0.5, 0.25),
    ];
    let mut worst = 0.0_f64;
    let mut chirped_cases = 0;
    for k in 0..50 {
        let chirp = k % 2 == 0;
        chirped_cases += usize::from(chirp);
        let fac = moderate_factorization(&mut rng, chirp);
        let (x, xi) = (rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0));
        let h = &windows[k % windows.len()];
        let back = atom_inverse_apply(&fac, x, xi, &atom_apply(&fac, x, xi, h)?)?;
        worst = worst.max(max_diff(back.sample(&grid).values(), h.sample(&grid).values()));
    }
    assert_eq!(chirped_cases, 25);
    Ok(outcome(&[("max-abs", worst, 1e-9)]))
}

fn moyal() -> Result<Outcome> {
    let (_, tf) = desk();
    let fam = family_v1();
    let g = Window::gaussian(1.0);
    let mut checks = Vec::new();
    for (label, fac) in [("stft", stft_factorization()), ("tau0.5", tau_factorization(0.5)?)] {
        let mut worst = 0.0_f64;
        for (i, (_, f)) in fam.iter().enumerate() {
            for (_, phi) in [&fam[i], &fam[(i + 1) % fam.len()], &fam[(i + 5) % fam.len()]] {
                worst = worst.max(moyal_residual(f, &g, phi, &g, &fac, &tf)?);
            }
        }
        checks.push((label, worst, 1e-4));
    }
    Ok(outcome(&checks))
}

fn covariance() -> Result<Outcome> {
    let (_, tf) = desk();
    let (h, k) = (tf.x.spacing(), tf.xi.spacing());
    let g = Window::gaussian(1.0);
    let f = Window::hermite(1, 1.0).tf_shift(0.3, -0.2);
    let mut stft = 0.0_f64;
    for (a, b) in [(0.0, 0.0), (8.0, 8.0), (-12.0, 20.0), (24.0, -4.0)] {
        stft = stft.max(covariance_residual(&stft_factorization(), &f, &g, (a * h, b * k), &tf)?);
    }
    // E_A = diag(1/2, 1/2): shifts must be even multiples of the grid steps
    let mut tau = 0.0_f64;
    for (a, b) in [(0.0, 0.0), (16.0, 16.0), (-32.0, 8.0), (6.0, -20.0)] {
        tau = tau.max(covariance_residual(&tau_factorization(0.5)?, &f, &g, (a * h, b * k), &tf)?);
    }
    Ok(outcome(&[("stft", stft, 1e-6), ("tau0.5", tau, 1e-6)]))
}

fn theorem_main() -> Result<Outcome> {
    let (grid, _) = desk();
    let g = Window::gaussian(1.0);
    let lattice = Lattice::new(1.0, 0.5, 8.0)?;
    let signals = [
        Window::gaussian(0.8).tf_shift(0.7, -0.4).sample(&grid),
        Window::hermite(2, 1.0).sample(&grid),
    ];
    let mut checks = Vec::new();
    for (label, fac, expected) in [("stft", stft_factorization(), 1.0), ("tau0.5", tau_factorization(0.5)?, 0.25)] {
        let report = theorem_main_check(&fac, &g, &lattice, &grid)?;
        let mut energy = 0.0_f64;
        for f in &signals {
            let (meta, cls) = coefficient_energies(&fac, &g, &lattice, &grid, f)?;
            energy = energy.max((meta / cls * fac.bound_ratio() - 1.0).abs());
        }
        let ratio = report.ratio.unwrap_or(f64::NAN);
        checks.push((format!("{label}-modulus"), report.modulus_residual, 1e-6));
        checks.push((format!("{label}-energy"), energy, 1e-6));
        checks.push((format!("{label}-expected"), (report.expected_ratio - expected).abs(), 1e-12));
        checks.push((format!("{label}-ratio"), (ratio / expected - 1.0).abs(), 0.02));
    }
    let borrowed: Vec<(&str, f64, f64)> = checks.iter().map(|(l, v, t)| (l.as_str(), *v, *t)).collect();
    Ok(outcome(&borrowed))
}

fn reconstruction() -> Result<Outcome> {
    let (grid, _) = desk();
    let g = Window::gaussian(1.0);
    let signals = [
        Window::gaussian(0.8).tf_shift(0.7, -0.4),
        Window::hermite(2, 1.0),
        Window::chirped_gaussian(1.0, 0.5).translate(-0.6),
    ];
    let classical = build_system(&g, &Lattice::new(1.0, 0.5, 8.0)?, AtomKind::Classical, &grid)?;
    assert!(frame_bounds(&classical)?.is_frame());
    let tau = tau_factorization(0.5)?;
    // the lattice map sends (0.5, 0.25) to the classical (1, 1/2) lattice
    let matched = build_system(&g, &Lattice::new(0.5, 0.25, 4.0)?, AtomKind::Metaplectic(tau.clone()), &grid)?;
    let (mut cls, mut meta) = (0.0_f64, 0.0_f64);
    for f in &signals {
        let fs = f.sample(&grid);
        cls = cls.max(frame_reconstruct(&classical, &fs)?.1);
        meta = meta.max(frame_reconstruct(&matched, &fs)?.1);
    }

    let coarse = Grid1D::new(128, 16.0)?;
    let tf = TfGrid::new(coarse, coarse);
    let f = Window::gaussian(1.0).tf_shift(0.5, -0.5);
    let rec = inversion_reconstruct(&f, &g, &g, &stft_factorization(), &tf, &grid)?;
    let inversion = rel_l2(&rec, &f.sample(&grid));
    Ok(outcome(&[("classical", cls, 1e-6), ("metaplectic", meta, 1e-5), ("inversion128", inversion, 1e-3)]))
}

fn norm_equivalence() -> Result<Outcome> {
    let (_, tf) = desk();
    let g = Window::gaussian(1.0);
    let fam: Vec<Window> = family_v1().into_iter().map(|(_, w)| w).collect();
    let stft = stft_factorization();
    let mut spread = 0.0_f64;
    for spec in [
        NormSpec::new(2.0, 2.0, Weight::Constant)?,
        NormSpec::new(1.0, 2.0, Weight::vs(1.0))?,
        NormSpec::new(2.0, 1.0, Weight::vs(0.5))?,
    ] {
        spread = spread.max((wa_modulation_equivalence(&stft, &fam, &g, &spec, &tf)?.spread - 1.0).abs());
    }
    let amalgam = NormSpec::new(2.0, 2.0, Weight::product(Weight::vs(1.0), Weight::vs(0.5)))?;
    spread = spread.max((wa_amalgam_equivalence(&stft, &fam, &g, &amalgam, &tf)?.spread - 1.0).abs());

    let baselines = norm_baselines();
    let mut worst = 0.0_f64;
    for case in &baselines.cases {
        worst = worst.max((case.observed_spread(&tf)? / case.spread - 1.0).abs());
    }
    Ok(outcome(&[("stft-spread", spread, 1e-9), ("baseline-rel", worst, baselines.tolerance)]))
}

fn symplectic_algebra() -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 9);
    let mut failures = 0usize;
    for _ in 0..100 {
        let gens = [
            make_de(&random_right_regular(&mut rng, 1))?,
            make_vc(&random_symmetric(&mut rng, 2))?,
            make_aft2(1),
            SymplecticMatrix::j(1),
        ];
        let mut prod = SymplecticMatrix::identity(4);
        for _ in 0..8 {
            prod = prod.compose(&gens[rng.gen_range(0..4)])?;
            failures += usize::from(!is_symplectic(prod.matrix())?);
        }
        let asm = make_factorization(&random_symmetric(&mut rng, 2), &random_right_regular(&mut rng, 1))?.assembled()?;
        failures += usize::from(!is_symplectic(asm.matrix())?);
    }

    let mut round_trip = 0.0_f64;
    for _ in 0..100 {
        let fac = make_factorization(&random_symmetric(&mut rng, 2), &random_right_regular(&mut rng, 1))?;
        let a = fac.assembled()?;
        let scale = a.matrix().abs().max().max(1.0);
        round_trip = round_trip.max(match try_factor(&a) {
            Some((c, e)) => (make_factorization(&c, &e)?.assembled()?.matrix() - a.matrix()).abs().max() / scale,
            None => f64::INFINITY,
        });
    }

    let mut alpha = 0.0_f64;
    for _ in 0..100 {
        let fac = make_factorization(&Mat::zeros(2, 2), &random_right_regular(&mut rng, 1))?;
        alpha = alpha.max((fac.alpha() * fac.alpha_tilde() - 1.0).abs());
    }
    Ok(outcome(&[
        ("non-symplectic-products", failures as f64, 0.0),
        ("try-factor", round_trip, 1e-9),
        ("alpha", alpha, 1e-12),
    ]))
}

type Criterion = (&'static str, fn() -> Result<Outcome>);

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("1 factorization fidelity", factorization_fidelity),
        ("2 atom duality", atom_duality),
        ("3 atom inversion", atom_inversion),
        ("4 moyal", moyal),
        ("5 covariance", covariance),
        ("6 frame-bound transfer", theorem_main),
        ("7 reconstruction", reconstruction),
        ("8 norm equivalence", norm_equivalence),
        ("9 symplectic algebra", symplectic_algebra),
    ];
    let start = Instant::now();
    let mut failed = 0;
    for (name, run) in criteria {
        let t = Instant::now();
        let (passed, detail) = match run() {
            Ok(o) => (o.passed, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        failed += usize::from(!passed);
        println!(
            "{} criterion {name}: {detail} [{:.1}s]",
            if passed { "PASS" } else { "FAIL" },
            t.elapsed().as_secs_f64()
        );
    }
    println!("acceptance: {}/9 passed in {:.1}s", 9 - failed, start.elapsed().as_secs_f64());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
