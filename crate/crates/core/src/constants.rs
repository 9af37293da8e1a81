//! Calibrated constants shipped with the crate.
//!
//! The Landau-Kolmogorov constants `C_cal(s)` and the sublevel chart budgets
//! `C_cover(r)` are produced by `surflab calibrate` and stored in
//! `calibration/constants.json`.

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::curve_engine::LandauCalibration;
use crate::error::{Error, Result};

pub const CONSTANTS_VERSION: u32 = 1;

/// Chart budget of the sublevel cover for one smoothness `r`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoverCalibration {
    pub r: f64,
    pub d: usize,
    pub corpus: usize,
    pub max_degree: usize,
    pub seed: u64,
    pub max_count: usize,
    pub safety: f64,
    pub c_cover: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Constants {
    pub version: u32,
    pub landau: Vec<LandauCalibration>,
    pub cover: Vec<CoverCalibration>,
}

static CONSTANTS: OnceLock<Constants> = OnceLock::new();

/// The embedded constants file.
pub fn constants() -> &'static Constants {
    CONSTANTS.get_or_init(|| {
        let c: Constants = serde_json::from_str(include_str!("../calibration/constants.json"))
            .expect("embedded constants file is valid");
        assert_eq!(c.version, CONSTANTS_VERSION, "constants file version mismatch");
        c
    })
}

impl Constants {
    /// `C_cal(s)`: the entry for `s`, or the larger of the two calibrated
    /// neighbors when `s` lies between calibrated orders.
    pub fn c_cal(&self, s: f64) -> Result<f64> {
        let pts: Vec<(f64, f64)> = self.landau.iter().map(|l| (l.s, l.c_cal)).collect();
        bracket(&pts, s).ok_or_else(|| missing("Landau-Kolmogorov constant", s))
    }

    /// `C_cover(r)`, bracketed like [`Constants::c_cal`].
    pub fn c_cover(&self, r: f64) -> Result<usize> {
        let pts: Vec<(f64, f64)> = self.cover.iter().map(|c| (c.r, c.c_cover as f64)).collect();
        bracket(&pts, r).map(|v| v as usize).ok_or_else(|| missing("cover budget", r))
    }
}

/// Orders `s` with a calibrated Landau-Kolmogorov constant.
pub const LANDAU_ORDERS: [f64; 6] = [0.5, 1.0, 1.5, 2.0, 2.5, 3.0];
/// Smoothness values with a calibrated cover budget.
pub const COVER_ORDERS: [f64; 4] = [1.5, 2.0, 2.5, 3.0];

/// Recompute every constant from seeded corpora: `landau_corpus` random
/// polynomial curves of degree at most 8 per order, and `cover_corpus`
/// curves of degree at most 6 per smoothness.
pub fn calibrate(landau_corpus: usize, cover_corpus: usize, seed: u64) -> Result<Constants> {
    let landau = LANDAU_ORDERS
        .iter()
        .map(|s| crate::curve_engine::calibrate_landau_kolmogorov(*s, landau_corpus, 8, seed))
        .collect::<Result<_>>()?;
    let cover = COVER_ORDERS
        .iter()
        .map(|r| crate::reparametrization::calibrate_cover(*r, cover_corpus, 6, seed))
        .collect::<Result<_>>()?;
    Ok(Constants { version: CONSTANTS_VERSION, landau, cover })
}

fn missing(what: &str, x: f64) -> Error {
    Error::Precondition(format!("no calibrated {what} covers {x}"))
}

fn bracket(pts: &[(f64, f64)], x: f64) -> Option<f64> {
    if let Some((_, v)) = pts.iter().find(|(k, _)| (k - x).abs() < 1e-12) {
        return Some(*v);
    }
    let below = pts.iter().filter(|(k, _)| *k < x).max_by(|a, b| a.0.total_cmp(&b.0))?;
    let above = pts.iter().filter(|(k, _)| *k > x).min_by(|a, b| a.0.total_cmp(&b.0))?;
    Some(below.1.max(above.1))
}
