use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::dynamics::{builtin_system, SmoothMap};
use crate::entropy::{topological_entropy_estimate, PoolSpec};
use crate::error::{Error, Result};
use crate::lyapunov::exterior_growth;

/// How `h_top` is estimated.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EntropyConfig {
    pub pool: PoolSpec,
    pub n_min: usize,
    pub n_max: usize,
    pub delta: f64,
}

impl Default for EntropyConfig {
    fn default() -> Self {
        EntropyConfig {
            pool: PoolSpec::Patch { center: [0.37, 0.61], half_width: 0.0025, side: 316 },
            n_min: 7,
            n_max: 12,
            delta: 0.05,
        }
    }
}

impl EntropyConfig {
    pub fn n_range(&self) -> Vec<usize> {
        (self.n_min..=self.n_max).collect()
    }
}

/// How `R(T)` and `R_2(T)` are estimated.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GrowthConfig {
    pub n: usize,
    pub grid_side: usize,
}

impl Default for GrowthConfig {
    fn default() -> Self {
        GrowthConfig { n: 20, grid_side: 64 }
    }
}

/// Whether the bound for local diffeomorphisms may be used.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LocalDiffeo {
    /// The user's assertion, if any; it overrides the grid check.
    pub asserted: Option<bool>,
    pub grid_points: usize,
    pub min_abs_det: f64,
    pub applies: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundsProvenance {
    pub system: String,
    pub params: BTreeMap<String, f64>,
    pub entropy_method: String,
    pub entropy: EntropyConfig,
    pub entropy_counts: Vec<usize>,
    pub entropy_slope: f64,
    pub growth: GrowthConfig,
    pub growth_escaped: usize,
}

/// Headline bounds for a smooth system, with every input kept.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundsReport {
    pub h_top_estimate: f64,
    pub r_estimate: f64,
    /// `[R_1, R_2]`.
    pub r_e_estimates: [f64; 2],
    pub r: f64,
    pub dim: usize,
    /// `h_top + 4R/(r-1)`
    pub sexent_bound_general: f64,
    /// `h_top + R/(r-1)`
    pub sexent_bound_localdiffeo: f64,
    /// `R/r`
    pub tail_bound: f64,
    /// `d R/r`
    pub buzzi_bound: f64,
    pub local_diffeo: LocalDiffeo,
    pub provenance: BoundsProvenance,
}

/// The four bounds as functions of `(h_top, R, r, d)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Bounds {
    pub general: f64,
    pub localdiffeo: f64,
    pub tail: f64,
    pub buzzi: f64,
}

pub fn bounds_from(h_top: f64, growth: f64, r: f64, dim: usize) -> Result<Bounds> {
    if !(r > 1.0) {
        return Err(Error::Precondition(format!(
            "the entropy bounds need smoothness r > 1, got r = {r}"
        )));
    }
    Ok(Bounds {
        general: h_top + 4.0 * growth / (r - 1.0),
        localdiffeo: h_top + growth / (r - 1.0),
        tail: growth / r,
        buzzi: dim as f64 * growth / r,
    })
}

impl BoundsReport {
    /// Recompute the bounds from the stored inputs.
    pub fn recompute(&self) -> Result<Bounds> {
        bounds_from(self.h_top_estimate, self.r_estimate, self.r, self.dim)
    }
}

/// Estimate `h_top` and `R(T)` for `map` and assemble the bounds.
pub fn compute_bounds(
    map: &SmoothMap,
    r: f64,
    entropy: &EntropyConfig,
    growth: &GrowthConfig,
    assert_local_diffeo: Option<bool>,
) -> Result<BoundsReport> {
    if !(r > 1.0) {
        return Err(Error::Precondition(format!(
            "the entropy bounds need smoothness r > 1, got r = {r}"
        )));
    }
    let h = topological_entropy_estimate(map, &entropy.pool, &entropy.n_range(), entropy.delta)?;
    let grid = map.domain().grid(growth.grid_side);
    let r1 = exterior_growth(map, 1, growth.n, &grid)?;
    let r2 = exterior_growth(map, 2, growth.n, &grid)?;
    let min_abs_det = grid
        .iter()
        .map(|p| map.derivative(*p).determinant().abs())
        .fold(f64::INFINITY, f64::min);
    let local_diffeo = LocalDiffeo {
        asserted: assert_local_diffeo,
        grid_points: grid.len(),
        min_abs_det,
        applies: assert_local_diffeo.unwrap_or(min_abs_det > 0.0),
    };
    let dim = 2;
    let b = bounds_from(h.value, r1.value, r, dim)?;
    Ok(BoundsReport {
        h_top_estimate: h.value,
        r_estimate: r1.value,
        r_e_estimates: [r1.value, r2.value],
        r,
        dim,
        sexent_bound_general: b.general,
        sexent_bound_localdiffeo: b.localdiffeo,
        tail_bound: b.tail,
        buzzi_bound: b.buzzi,
        local_diffeo,
        provenance: BoundsProvenance {
            system: map.name().to_string(),
            params: map.params().clone(),
            entropy_method: "separated".into(),
            entropy: entropy.clone(),
            entropy_counts: h.counts,
            entropy_slope: h.slope,
            growth: growth.clone(),
            growth_escaped: r1.escaped,
        },
    })
}

/// [`compute_bounds`] for a named builtin system.
pub fn compute_bounds_named(
    name: &str,
    params: &BTreeMap<String, f64>,
    r: f64,
    entropy: &EntropyConfig,
    growth: &GrowthConfig,
    assert_local_diffeo: Option<bool>,
) -> Result<BoundsReport> {
    let map = builtin_system(name, params)?;
    compute_bounds(&map, r, entropy, growth, assert_local_diffeo)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundMode {
    Diffeo,
    General,
}

/// Bound on `h_sex(mu) - h(mu)`: `chi_1^+/(r-1)` for diffeomorphisms,
/// `2 sum chi^+/(r-1)` in general.
pub fn measure_level_bound(chi1_plus: f64, sum_chi_plus: f64, r: f64, mode: BoundMode) -> Result<f64> {
    if !(r > 1.0) {
        return Err(Error::Precondition(format!("the measure bound needs r > 1, got r = {r}")));
    }
    if !(chi1_plus >= 0.0 && sum_chi_plus >= 0.0) {
        return Err(Error::Precondition("positive Lyapunov parts must be nonnegative".into()));
    }
    Ok(match mode {
        BoundMode::Diffeo => chi1_plus / (r - 1.0),
        BoundMode::General => 2.0 * sum_chi_plus / (r - 1.0),
    })
}
