//! Weights, weighted mixed norms, modulation and Wiener amalgam norms, and
//! the norm-equivalence checks for Wigner-decomposable distributions.
//!
//! Norm equivalence `||f|| ~ ||W_A(f, g)||` is measured by the spread
//! `max r / min r` of the ratio `r(f)` over a fixed signal family.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::grid::{TfArray, TfGrid};
use crate::symplectic::{Mat, WignerFactorization};
use crate::tfr::{stft_direct, wigner_metaplectic};
use crate::window::Window;

/// Weight functions on `R^k`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Weight {
    Constant,
    /// `v_s(z) = (1 + |z|)^s`.
    Vs { s: f64 },
    /// `e^{a |z|}`.
    Exp { a: f64 },
    /// `m1(z') m2(z'')` with `z = (z', z'')` split in half.
    Product { m1: Box<Weight>, m2: Box<Weight> },
}

impl Weight {
    pub fn vs(s: f64) -> Self {
        Weight::Vs { s }
    }

    pub fn product(m1: Weight, m2: Weight) -> Self {
        Weight::Product { m1: Box::new(m1), m2: Box::new(m2) }
    }

    pub fn eval(&self, z: &[f64]) -> f64 {
        let norm = || z.iter().map(|v| v * v).sum::<f64>().sqrt();
        match self {
            Weight::Constant => 1.0,
            Weight::Vs { s } => (1.0 + norm()).powf(*s),
            Weight::Exp { a } => (a * norm()).exp(),
            Weight::Product { m1, m2 } => {
                let half = z.len() / 2;
                m1.eval(&z[..half]) * m2.eval(&z[half..])
            }
        }
    }

    /// Whether `m(L z) ~ m(z)` holds for every invertible `L` (polynomial
    /// weights and products of them).
    pub fn is_polynomial(&self) -> bool {
        match self {
            Weight::Constant | Weight::Vs { .. } => true,
            Weight::Exp { a } => *a == 0.0,
            Weight::Product { m1, m2 } => m1.is_polynomial() && m2.is_polynomial(),
        }
    }

    /// `(m1, m2)` for the amalgam norm: the factors of a product weight, or
    /// the weight itself on both variables.
    pub fn split(&self) -> (Weight, Weight) {
        match self {
            Weight::Product { m1, m2 } => ((**m1).clone(), (**m2).clone()),
            other => (other.clone(), other.clone()),
        }
    }
}

/// Exponent in `(0, inf]`; serialized as a number or the string `"inf"`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Exponent(pub f64);

impl Exponent {
    pub fn new(p: f64) -> Result<Self> {
        if p.is_nan() || p <= 0.0 {
            return Err(Error::InvalidExponent(p));
        }
        Ok(Self(p))
    }

    pub fn is_infinite(&self) -> bool {
        self.0.is_infinite()
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_infinite() {
            write!(f, "inf")
        } else {
            write!(f, "{}", self.0)
        }
    }
}

impl Serialize for Exponent {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if self.is_infinite() {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(self.0)
        }
    }
}

impl<'de> Deserialize<'de> for Exponent {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Str(String),
        }
        let p = match Raw::deserialize(d)? {
            Raw::Num(p) => p,
            Raw::Str(s) => match s.trim().to_ascii_lowercase().as_str() {
                "inf" | "infinity" => f64::INFINITY,
                other => other.parse().map_err(serde::de::Error::custom)?,
            },
        };
        Exponent::new(p).map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormSpec {
    pub p: Exponent,
    pub q: Exponent,
    #[serde(default = "default_weight")]
    pub weight: Weight,
}

fn default_weight() -> Weight {
    Weight::Constant
}

impl NormSpec {
    pub fn new(p: f64, q: f64, weight: Weight) -> Result<Self> {
        Ok(Self { p: Exponent::new(p)?, q: Exponent::new(q)?, weight })
    }

    pub fn is_quasi(&self) -> bool {
        self.p.0 < 1.0 || self.q.0 < 1.0
    }
}

/// `(sum_k (|v_k| w_k)^p h)^{1/p}`, or the weighted sup for `p = inf`.
fn lp(values: impl Iterator<Item = f64>, p: Exponent, h: f64) -> f64 {
    if p.is_infinite() {
        values.fold(0.0, f64::max)
    } else {
        (values.map(|v| v.powf(p.0)).sum::<f64>() * h).powf(1.0 / p.0)
    }
}

/// `(int (int |F(x, xi)|^p m(x, xi)^p dx)^{q/p} dxi)^{1/q}` as a Riemann sum.
pub fn mixed_norm(f: &TfArray, spec: &NormSpec) -> f64 {
    let tf = f.grid();
    let xs = tf.x.nodes();
    let xis = tf.xi.nodes();
    let inner: Vec<f64> = xis
        .par_iter()
        .enumerate()
        .map(|(j, &xi)| {
            let col = xs
                .iter()
                .enumerate()
                .map(|(i, &x)| f.get(i, j).norm() * spec.weight.eval(&[x, xi]));
            lp(col, spec.p, tf.x.spacing())
        })
        .collect();
    lp(inner.into_iter(), spec.q, tf.xi.spacing())
}

/// `(int (int |F(x, xi)|^p m1(xi)^p dxi)^{q/p} m2(x)^q dx)^{1/q}`.
pub fn amalgam_mixed_norm(f: &TfArray, p: Exponent, q: Exponent, m1: &Weight, m2: &Weight) -> f64 {
    let tf = f.grid();
    let xs = tf.x.nodes();
    let xis = tf.xi.nodes();
    let w1: Vec<f64> = xis.iter().map(|xi| m1.eval(&[*xi])).collect();
    let inner: Vec<f64> = (0..xs.len())
        .into_par_iter()
        .map(|i| {
            let row = f.row(i).iter().zip(&w1).map(|(v, w)| v.norm() * w);
            lp(row, p, tf.xi.spacing()) * m2.eval(&[xs[i]])
        })
        .collect();
    lp(inner.into_iter(), q, tf.x.spacing())
}

fn require_window(g: &Window) -> Result<()> {
    if g.is_zero() {
        Err(Error::ZeroWindow)
    } else {
        Ok(())
    }
}

/// `||V_g f||_{L^{p,q}_m}` on `tf`.
pub fn modulation_norm(f: &Window, g: &Window, spec: &NormSpec, tf: &TfGrid) -> Result<f64> {
    require_window(g)?;
    Ok(mixed_norm(&stft_direct(f, g, tf), spec))
}

/// Wiener amalgam norm `W(F L^p_{m1}, L^q_{m2})` with `(m1, m2) = spec.weight.split()`.
pub fn amalgam_norm(f: &Window, g: &Window, spec: &NormSpec, tf: &TfGrid) -> Result<f64> {
    require_window(g)?;
    let (m1, m2) = spec.weight.split();
    Ok(amalgam_mixed_norm(&stft_direct(f, g, tf), spec.p, spec.q, &m1, &m2))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightCheck {
    pub holds: bool,
    /// `"polynomial"` when analytically certified, else `"numeric"`.
    pub certificate: String,
    /// Largest `max(m(Lz)/m(z), m(z)/m(Lz))` over the sample.
    pub worst_factor: f64,
}

pub const WEIGHT_SAMPLES: usize = 200;
pub const WEIGHT_FACTOR: f64 = 1e3;
const WEIGHT_SAMPLE_RADIUS: f64 = 20.0;
const WEIGHT_SEED: u64 = 0x5eed_0001;

fn diagonal_map(fac: &WignerFactorization) -> Result<(f64, f64)> {
    if fac.d() != 1 {
        return Err(Error::UnsupportedDimension(fac.d()));
    }
    let schur = fac.schur()[(0, 0)];
    let e12 = fac.e().full()[(0, 1)];
    Ok((schur, 1.0 / e12))
}

fn spot_check(eval: impl Fn(f64, f64) -> (f64, f64)) -> WeightCheck {
    let mut rng = ChaCha8Rng::seed_from_u64(WEIGHT_SEED);
    let mut worst = 1.0_f64;
    for _ in 0..WEIGHT_SAMPLES {
        let x = rng.gen_range(-WEIGHT_SAMPLE_RADIUS..=WEIGHT_SAMPLE_RADIUS);
        let xi = rng.gen_range(-WEIGHT_SAMPLE_RADIUS..=WEIGHT_SAMPLE_RADIUS);
        let (mapped, plain) = eval(x, xi);
        let factor = (mapped / plain).max(plain / mapped);
        worst = worst.max(if factor.is_finite() { factor } else { f64::INFINITY });
    }
    WeightCheck { holds: worst <= WEIGHT_FACTOR, certificate: "numeric".into(), worst_factor: worst }
}

fn certified() -> WeightCheck {
    WeightCheck { holds: true, certificate: "polynomial".into(), worst_factor: 1.0 }
}

/// `m(schur x, E12^{-T} xi) ~ m(x, xi)`.
pub fn weight_condition_check(fac: &WignerFactorization, m: &Weight) -> Result<WeightCheck> {
    let (sx, sxi) = diagonal_map(fac)?;
    if m.is_polynomial() {
        return Ok(certified());
    }
    Ok(spot_check(|x, xi| (m.eval(&[sx * x, sxi * xi]), m.eval(&[x, xi]))))
}

/// `m1 (x) m2 ~ (m1 o (-E12^{-T})) (x) (m2 o schur)`.
pub fn amalgam_weight_condition(fac: &WignerFactorization, m1: &Weight, m2: &Weight) -> Result<WeightCheck> {
    let (sx, sxi) = diagonal_map(fac)?;
    if m1.is_polynomial() && m2.is_polynomial() {
        return Ok(certified());
    }
    Ok(spot_check(|xi, x| {
        (m1.eval(&[-sxi * xi]) * m2.eval(&[sx * x]), m1.eval(&[xi]) * m2.eval(&[x]))
    }))
}

/// `J E_A^{-1} J = diag(-E12^{-T}, -schur)` for `d = 1`.
pub fn je_inverse_j(fac: &WignerFactorization) -> Result<Mat> {
    let (sx, sxi) = diagonal_map(fac)?;
    Ok(Mat::from_row_slice(2, 2, &[-sxi, 0.0, 0.0, -sx]))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceReport {
    pub ratios: Vec<f64>,
    pub min: f64,
    pub max: f64,
    pub spread: f64,
    pub weight: WeightCheck,
}

impl EquivalenceReport {
    fn from_ratios(ratios: Vec<f64>, weight: WeightCheck) -> Self {
        let min = ratios.iter().copied().fold(f64::INFINITY, f64::min);
        let max = ratios.iter().copied().fold(0.0, f64::max);
        Self { spread: max / min, ratios, min, max, weight }
    }
}

/// `r(f) = ||W_A(f, g)||_{L^{p,q}_m} / ||f||_{M^{p,q}_m}` over `family`.
pub fn wa_modulation_equivalence(
    fac: &WignerFactorization,
    family: &[Window],
    g: &Window,
    spec: &NormSpec,
    tf: &TfGrid,
) -> Result<EquivalenceReport> {
    require_window(g)?;
    let check = weight_condition_check(fac, &spec.weight)?;
    if !check.holds {
        return Err(Error::WeightConditionFailed);
    }
    let ratios = family
        .iter()
        .map(|f| {
            let w = mixed_norm(&wigner_metaplectic(f, g, fac, tf)?, spec);
            Ok(w / modulation_norm(f, g, spec, tf)?)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(EquivalenceReport::from_ratios(ratios, check))
}

/// Amalgam analogue: `W_A`-side norm with inner `xi`-integral weighted by
/// `m1`, outer `x`-integral by `m2`, over the amalgam norm of `f`.
pub fn wa_amalgam_equivalence(
    fac: &WignerFactorization,
    family: &[Window],
    g: &Window,
    spec: &NormSpec,
    tf: &TfGrid,
) -> Result<EquivalenceReport> {
    require_window(g)?;
    let (m1, m2) = spec.weight.split();
    let check = amalgam_weight_condition(fac, &m1, &m2)?;
    if !check.holds {
        return Err(Error::WeightConditionFailed);
    }
    let ratios = family
        .iter()
        .map(|f| {
            let w = amalgam_mixed_norm(&wigner_metaplectic(f, g, fac, tf)?, spec.p, spec.q, &m1, &m2);
            Ok(w / amalgam_norm(f, g, spec, tf)?)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(EquivalenceReport::from_ratios(ratios, check))
}
