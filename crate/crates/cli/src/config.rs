use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use serde::Deserialize;

use metagabor::frames::Lattice;
use metagabor::grid::{Grid1D, TfGrid};
use metagabor::spaces::{Exponent, Weight};
use metagabor::symplectic::{
    from_rows, stft_factorization, tau_factorization, FactorizationJson, WignerFactorization,
};
use metagabor::window::Window;
use metagabor::Error;

pub const SCHEMA: &str = "1";

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub n: Option<usize>,
    pub length: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeConfig {
    pub a: Option<f64>,
    pub b: Option<f64>,
    pub radius: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TfConfig {
    pub n: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NormConfig {
    pub p: Option<Exponent>,
    pub q: Option<Exponent>,
    pub weight: Option<Weight>,
}

/// Contents of a `--config` file. Every field is optional; command-line
/// flags take precedence.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema: String,
    pub preset: Option<String>,
    #[serde(rename = "C")]
    pub c: Option<Vec<Vec<f64>>>,
    #[serde(rename = "E")]
    pub e: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub lattice: LatticeConfig,
    #[serde(default)]
    pub tf: TfConfig,
    #[serde(default)]
    pub norm: NormConfig,
    pub window: Option<String>,
    pub analysis_window: Option<String>,
    pub signal: Option<PathBuf>,
    pub output: Option<PathBuf>,
}

impl RunConfig {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        let cfg: RunConfig =
            serde_json::from_str(&text).with_context(|| format!("parsing config {}", path.display()))?;
        if cfg.schema != SCHEMA {
            bail!("unsupported config schema {:?} (expected {SCHEMA:?})", cfg.schema);
        }
        Ok(cfg)
    }
}

/// `stft`, `tau:<tau>` or `custom` (with `C` and `E` from the config).
pub fn resolve_factorization(
    preset: &str,
    c: Option<&Vec<Vec<f64>>>,
    e: Option<&Vec<Vec<f64>>>,
) -> anyhow::Result<WignerFactorization> {
    let fac = match preset.trim() {
        "stft" => stft_factorization(),
        "custom" => {
            let e = e.context("preset custom requires an \"E\" matrix in the config")?;
            let d2 = e.len();
            let c = match c {
                Some(c) => c.clone(),
                None => vec![vec![0.0; d2]; d2],
            };
            FactorizationJson { d: d2 / 2, c, e: e.clone() }.build()?
        }
        other => match other.strip_prefix("tau:") {
            Some(t) => {
                let tau: f64 = t.trim().parse().with_context(|| format!("bad tau in preset {other:?}"))?;
                tau_factorization(tau)?
            }
            None => bail!("unknown preset {other:?}; expected stft, tau:<tau> or custom"),
        },
    };
    if fac.d() != 1 {
        return Err(Error::UnsupportedDimension(fac.d()).into());
    }
    Ok(fac)
}

/// Window descriptors: `gaussian[:sigma]`, `hermite:<order>[:sigma]`,
/// `chirp:<c>[:sigma]`, `zero`.
pub fn parse_window(desc: &str) -> anyhow::Result<Window> {
    let parts: Vec<&str> = desc.trim().split(':').collect();
    let num = |k: usize, default: f64| -> anyhow::Result<f64> {
        match parts.get(k) {
            Some(s) => s.trim().parse().with_context(|| format!("bad number {s:?} in window {desc:?}")),
            None => Ok(default),
        }
    };
    let w = match parts[0] {
        "gaussian" => Window::gaussian(num(1, 1.0)?),
        "hermite" => {
            let order: u32 = parts
                .get(1)
                .context("hermite window needs an order, e.g. hermite:2")?
                .trim()
                .parse()
                .with_context(|| format!("bad order in window {desc:?}"))?;
            Window::hermite(order, num(2, 1.0)?)
        }
        "chirp" => Window::chirped_gaussian(num(2, 1.0)?, num(1, 0.0)?),
        "zero" => Window::zero(),
        other => bail!("unknown window {other:?}; expected gaussian, hermite, chirp or zero"),
    };
    Ok(w)
}

pub fn build_grid(n: usize, length: f64) -> anyhow::Result<Grid1D> {
    Ok(Grid1D::new(n, length)?)
}

pub fn tf_grid(grid: &Grid1D, tf_n: Option<usize>) -> anyhow::Result<TfGrid> {
    match tf_n {
        None => Ok(TfGrid::for_signal_grid(grid)),
        Some(n) => {
            let x = Grid1D::new(n, grid.length())?;
            Ok(TfGrid::new(x, x.dual()))
        }
    }
}

pub fn lattice(a: f64, b: f64, radius: f64) -> anyhow::Result<Lattice> {
    Ok(Lattice::new(a, b, radius)?)
}


pub fn parse_matrix(value: &serde_json::Value) -> anyhow::Result<metagabor::symplectic::Mat> {
    let rows = value.get("A").unwrap_or(value);
    let rows: Vec<Vec<f64>> = serde_json::from_value(rows.clone()).context("matrix must be an array of rows")?;
    Ok(from_rows(&rows)?)
}

