//! Frozen norm-spread baselines produced by the independent numpy oracle in
//! `tests/oracles/norm_baselines.py`.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::family::{family_v1, FAMILY_VERSION};
use crate::grid::TfGrid;
use crate::spaces::{wa_amalgam_equivalence, wa_modulation_equivalence, Exponent, NormSpec, Weight};
use crate::symplectic::tau_factorization;
use crate::window::Window;

const BASELINES_V1: &str = include_str!("../tests/data/norm_baselines_v1.json");

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NormKind {
    Modulation,
    Amalgam,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BaselineCase {
    pub id: String,
    pub kind: NormKind,
    pub tau: f64,
    pub p: Exponent,
    pub q: Exponent,
    pub weight: Weight,
    pub ratios: Vec<f64>,
    pub spread: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Baselines {
    pub family: String,
    pub tolerance: f64,
    pub cases: Vec<BaselineCase>,
}

pub fn norm_baselines() -> Baselines {
    let b: Baselines = serde_json::from_str(BASELINES_V1).expect("embedded baseline file is valid");
    assert_eq!(b.family, FAMILY_VERSION, "baseline family version mismatch");
    b
}

impl BaselineCase {
    pub fn spec(&self) -> NormSpec {
        NormSpec { p: self.p, q: self.q, weight: self.weight.clone() }
    }

    /// Spread recomputed by the library for this case.
    pub fn observed_spread(&self, tf: &TfGrid) -> Result<f64> {
        let fac = tau_factorization(self.tau)?;
        let family: Vec<Window> = family_v1().into_iter().map(|(_, w)| w).collect();
        let g = Window::gaussian(1.0);
        let report = match self.kind {
            NormKind::Modulation => wa_modulation_equivalence(&fac, &family, &g, &self.spec(), tf)?,
            NormKind::Amalgam => wa_amalgam_equivalence(&fac, &family, &g, &self.spec(), tf)?,
        };
        Ok(report.spread)
    }
}
