//! The fixed test family used by the norm-equivalence and Moyal checks.
//! Changing any member requires bumping [`FAMILY_VERSION`] and regenerating
//! the frozen baselines.

use num_complex::Complex64;

use crate::window::Window;

pub const FAMILY_VERSION: &str = "v1";

/// Ten unit-norm analytic signals.
pub fn family_v1() -> Vec<(&'static str, Window)> {
    let g = Window::gaussian(1.0);
    let bumps = g.translate(-1.5).add(&g.translate(1.5)).expect("analytic sum");
    let bump_norm = (2.0 + 2.0 * (-std::f64::consts::PI * 4.5).exp()).sqrt();
    vec![
        ("gauss-0.7", Window::gaussian(0.7)),
        ("gauss-1.0", Window::gaussian(1.0)),
        ("gauss-1.5", Window::gaussian(1.5)),
        ("hermite-1", Window::hermite(1, 1.0)),
        ("hermite-2", Window::hermite(2, 1.0)),
        ("hermite-3", Window::hermite(3, 1.0)),
        ("shift+1.0+0.5", g.tf_shift(1.0, 0.5)),
        ("shift-1.5-1.0", g.tf_shift(-1.5, -1.0)),
        ("chirp-0.8", Window::chirped_gaussian(1.0, 0.8)),
        ("two-bump", bumps.scale(Complex64::new(1.0 / bump_norm, 0.0))),
    ]
}
