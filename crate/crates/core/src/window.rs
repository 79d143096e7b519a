//! Windows: analytically evaluable functions closed under the elementary
//! metaplectic operators, or sampled signals handled by band-limited
//! interpolation.
//!
//! An analytic window is a finite sum of terms
//!
//! ```text
//! c * e^{2 pi i b t} * e^{i pi k t^2} * h_m(r (t - a))
//! ```
//!
//! where `h_m` is the `L^2`-normalized Hermite function with Gaussian
//! factor `e^{-pi t^2}`. Translation, modulation, chirp multiplication and
//! normalized rescaling each map such a term to another one exactly, so
//! atoms of analytic windows are evaluated in closed form at any point.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{Grid1D, Interpolant, Signal, TfArray, TfGrid};
use crate::symplectic::BlockMatrix2d;

/// `h_m(t) = (2 pi)^{1/4} psi_m(sqrt(2 pi) t)` with `psi_m` the orthonormal
/// physicists' Hermite functions, evaluated by the three-term recurrence.
pub fn hermite_function(order: u32, t: f64) -> f64 {
    let u = (2.0 * PI).sqrt() * t;
    let mut prev = 0.0;
    let mut cur = PI.powf(-0.25) * (-0.5 * u * u).exp();
    for m in 0..order {
        let m = m as f64;
        let next = (2.0 / (m + 1.0)).sqrt() * u * cur - (m / (m + 1.0)).sqrt() * prev;
        prev = cur;
        cur = next;
    }
    (2.0 * PI).powf(0.25) * cur
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Term {
    pub order: u32,
    pub coef: Complex64,
    pub scale: f64,
    pub center: f64,
    pub freq: f64,
    pub chirp: f64,
}

impl Term {
    fn eval(&self, t: f64) -> Complex64 {
        let h = hermite_function(self.order, self.scale * (t - self.center));
        if h == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        let phase = 2.0 * PI * self.freq * t + PI * self.chirp * t * t;
        self.coef * Complex64::from_polar(h, phase)
    }

    fn translate(mut self, a: f64) -> Term {
        // e^{i pi k (t-a)^2} = e^{i pi k t^2} e^{-2 pi i k a t} e^{i pi k a^2}
        self.coef *= Complex64::from_polar(1.0, -2.0 * PI * self.freq * a + PI * self.chirp * a * a);
        self.freq -= self.chirp * a;
        self.center += a;
        self
    }

    fn rescale(mut self, s: f64) -> Term {
        self.coef *= s.abs().sqrt();
        self.freq *= s;
        self.chirp *= s * s;
        self.scale *= s;
        self.center /= s;
        self
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Window {
    Analytic(Vec<Term>),
    Sampled(Signal),
}

impl Window {
    pub fn zero() -> Self {
        Window::Analytic(Vec::new())
    }

    /// `(2/sigma^2)^{1/4} e^{-pi t^2 / sigma^2}`, unit `L^2` norm.
    pub fn gaussian(sigma: f64) -> Self {
        Self::hermite(0, sigma)
    }

    /// `sigma^{-1/2} h_m(t / sigma)`, unit `L^2` norm.
    pub fn hermite(order: u32, sigma: f64) -> Self {
        Window::Analytic(vec![Term {
            order,
            coef: Complex64::new(sigma.abs().powf(-0.5), 0.0),
            scale: 1.0 / sigma,
            center: 0.0,
            freq: 0.0,
            chirp: 0.0,
        }])
    }

    /// Gaussian of width `sigma` times the chirp `e^{i pi c t^2}`.
    pub fn chirped_gaussian(sigma: f64, c: f64) -> Self {
        Self::gaussian(sigma).chirp_mul(c)
    }

    pub fn sampled(signal: Signal) -> Self {
        Window::Sampled(signal)
    }

    pub fn is_analytic(&self) -> bool {
        matches!(self, Window::Analytic(_))
    }

    pub fn translate(&self, a: f64) -> Window {
        match self {
            Window::Analytic(terms) => Window::Analytic(terms.iter().map(|t| t.translate(a)).collect()),
            Window::Sampled(s) => Window::Sampled(s.translate(a)),
        }
    }

    pub fn modulate(&self, b: f64) -> Window {
        match self {
            Window::Analytic(terms) => Window::Analytic(
                terms
                    .iter()
                    .map(|t| Term {
                        freq: t.freq + b,
                        ..*t
                    })
                    .collect(),
            ),
            Window::Sampled(s) => Window::Sampled(s.modulate(b)),
        }
    }

    /// Time-frequency shift `pi(x, xi) = M_xi T_x`.
    pub fn tf_shift(&self, x: f64, xi: f64) -> Window {
        self.translate(x).modulate(xi)
    }

    pub fn chirp_mul(&self, c: f64) -> Window {
        match self {
            Window::Analytic(terms) => Window::Analytic(
                terms
                    .iter()
                    .map(|t| Term {
                        chirp: t.chirp + c,
                        ..*t
                    })
                    .collect(),
            ),
            Window::Sampled(s) => Window::Sampled(s.chirp_mul(c)),
        }
    }

    /// Normalized rescaling `|a|^{1/2} f(a t)`.
    pub fn rescale(&self, a: f64) -> Result<Window> {
        if a == 0.0 {
            return Err(Error::ZeroScale);
        }
        Ok(match self {
            Window::Analytic(terms) => Window::Analytic(terms.iter().map(|t| t.rescale(a)).collect()),
            Window::Sampled(s) => Window::Sampled(s.rescale(a)?),
        })
    }

    pub fn scale(&self, z: Complex64) -> Window {
        match self {
            Window::Analytic(terms) => Window::Analytic(
                terms
                    .iter()
                    .map(|t| Term {
                        coef: t.coef * z,
                        ..*t
                    })
                    .collect(),
            ),
            Window::Sampled(s) => Window::Sampled(s.scaled(z)),
        }
    }

    /// Sum of two windows. Analytic + analytic stays analytic; otherwise
    /// both are sampled on the sampled operand's grid.
    pub fn add(&self, other: &Window) -> Result<Window> {
        match (self, other) {
            (Window::Analytic(a), Window::Analytic(b)) => {
                Ok(Window::Analytic(a.iter().chain(b).copied().collect()))
            }
            (Window::Sampled(s), w) | (w, Window::Sampled(s)) => {
                let mut out = w.sample(s.grid());
                out.add_scaled(s, Complex64::new(1.0, 0.0))?;
                Ok(Window::Sampled(out))
            }
        }
    }

    pub fn evaluator(&self) -> Evaluator<'_> {
        match self {
            Window::Analytic(terms) => Evaluator::Analytic(terms),
            Window::Sampled(s) => Evaluator::Sampled(Interpolant::new(s)),
        }
    }

    /// Value at an arbitrary point (band-limited interpolation for sampled
    /// windows).
    pub fn eval(&self, t: f64) -> Complex64 {
        self.evaluator().eval(t)
    }

    /// Samples on `grid`. Sampled windows on the same grid are returned as
    /// is; on another grid they are interpolated.
    pub fn sample(&self, grid: &Grid1D) -> Signal {
        match self {
            Window::Sampled(s) if s.grid().same_as(grid) => s.clone(),
            _ => {
                let ev = self.evaluator();
                Signal::from_fn(*grid, |t| ev.eval(t))
            }
        }
    }

    /// True if the window is identically zero (analytic: no nonzero terms;
    /// sampled: all samples zero).
    pub fn is_zero(&self) -> bool {
        match self {
            Window::Analytic(terms) => terms.iter().all(|t| t.coef == Complex64::new(0.0, 0.0)),
            Window::Sampled(s) => s.values().iter().all(|v| *v == Complex64::new(0.0, 0.0)),
        }
    }
}

pub enum Evaluator<'a> {
    Analytic(&'a [Term]),
    Sampled(Interpolant),
}

impl Evaluator<'_> {
    pub fn eval(&self, t: f64) -> Complex64 {
        match self {
            Evaluator::Analytic(terms) => terms.iter().map(|term| term.eval(t)).sum(),
            Evaluator::Sampled(it) => it.eval(t),
        }
    }
}

/// `T_E(f (x) conj g)(x, y) = |det E|^{1/2} f(E11 x + E12 y) conj(g(E21 x + E22 y))`
/// on `tf` (second axis is `y`). `d = 1` only. Sampled windows are
/// interpolated when `allow_interpolation` is set and rejected otherwise.
pub fn tensor_eval(
    f: &Window,
    g: &Window,
    e: &BlockMatrix2d,
    tf: &TfGrid,
    allow_interpolation: bool,
) -> Result<TfArray> {
    if e.d() != 1 {
        return Err(Error::UnsupportedDimension(e.d()));
    }
    if !allow_interpolation && !(f.is_analytic() && g.is_analytic()) {
        return Err(Error::InterpolationUnavailable);
    }
    let m = e.full();
    let (e11, e12, e21, e22) = (m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]);
    let amp = e.determinant().abs().sqrt();
    let fe = f.evaluator();
    let ge = g.evaluator();
    let xs = tf.x.nodes();
    let ys = tf.xi.nodes();
    Ok(TfArray::from_fn_par(*tf, |i, j| {
        let (x, y) = (xs[i], ys[j]);
        let fv = fe.eval(e11 * x + e12 * y);
        if fv == Complex64::new(0.0, 0.0) {
            return fv;
        }
        fv * ge.eval(e21 * x + e22 * y).conj() * amp
    }))
}
