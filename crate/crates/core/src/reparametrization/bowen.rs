use std::collections::BTreeSet;

use rayon::prelude::*;
use serde::Serialize;

use super::builder::{build_chart_family, BuildOptions};
use super::verify::CoverCheck;
use super::{bowen_grid, ladder, AffineChart, ChartFamily, A_PREC, TOLERANCE};
use crate::combinatorics::{bernoulli_entropy, defect_from_jets, DefectSequence};
use crate::curve_engine::{hyperbolic_at, HyperbolicParams};
use crate::dynamics::{localize, CurveLike, SmoothMap};
use crate::error::{Error, Result};
use crate::geometry::{clamped_floor, Point};

/// Parameters of a Bowen-ball reparametrization.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct BowenSpec {
    pub chi: f64,
    pub gamma: f64,
    pub c: f64,
    pub n: usize,
    pub eps: f64,
    pub r: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct DerivativeCheck {
    pub pass: bool,
    /// Largest sampled `|D(T^l o s o psi)|` over charts and `l <= n`.
    pub worst: f64,
}

/// The family `F_n` (union over realized defect classes) with its count
/// bound and checks.
#[derive(Clone, Debug, Serialize)]
pub struct BowenReparam {
    pub spec: BowenSpec,
    /// Localization radius actually used.
    pub eps_used: f64,
    pub count: usize,
    pub log_count: f64,
    pub classes: Vec<DefectSequence>,
    pub families: Vec<ChartFamily>,
    pub lambda_plus: f64,
    /// `(1 + H([l - chi] + 3)) (l - chi) n / (r - 1)`.
    pub lyapunov_term: f64,
    /// Grid points of `H^n n s^-1(B(n + 1, 1))` in chart coordinates.
    pub target_points: usize,
    pub derivative: DerivativeCheck,
    pub cover: CoverCheck,
}

impl BowenReparam {
    pub fn charts(&self) -> impl Iterator<Item = &AffineChart> {
        self.families.iter().flat_map(|f| f.charts.iter())
    }
}

/// Largest radius at which the localized maps satisfy `|T_k|_s <= 1/A_prec`
/// for `min(2, r) <= s <= r`.
pub fn precision_radius(map: &SmoothMap, r: f64) -> Result<f64> {
    let mut eps = f64::INFINITY;
    for s in ladder(r.min(2.0), r) {
        if s <= 1.0 {
            continue;
        }
        let norm = map.norm_certificate(s)?;
        if norm > 0.0 {
            eps = eps.min((1.0 / (A_PREC * norm)).powf(1.0 / (s - 1.0)) * (1.0 - 1e-9));
        }
    }
    Ok(eps)
}

/// Localize `map` along the orbit of `x`, enumerate the defect classes
/// `K_{n-1}` realized on a grid of `H^n(s, chi, gamma, C) n s^-1(B(n + 1, 1))`
/// and build one chart family per class. `sigma` is given in the localized
/// coordinates `v`, where the phase point is `x + eps v`.
pub fn reparametrize_bowen_ball<C: CurveLike + ?Sized>(
    map: &SmoothMap,
    x: Point,
    sigma: &C,
    spec: BowenSpec,
    opts: &BuildOptions,
) -> Result<BowenReparam> {
    let params = HyperbolicParams::new(spec.chi, spec.gamma, spec.c)?;
    let n = spec.n;
    if n == 0 {
        return Err(Error::Precondition("n must be positive".into()));
    }
    let eps_used = spec.eps.min(precision_radius(map, spec.r)?);
    let seq = localize(map, x, n + 1, eps_used)?;
    let grid = bowen_grid(&seq, sigma, n, opts.grid)?;
    let hyperbolic: Vec<f64> = grid.iter().filter(|(_, j)| hyperbolic_at(j, params, n)).map(|(t, _)| *t).collect();
    let mut classes = BTreeSet::new();
    for (_, jets) in &grid {
        if hyperbolic_at(jets, params, n) {
            match defect_from_jets(&seq, jets, n - 1) {
                Ok(k) => {
                    classes.insert(k);
                }
                Err(Error::DegenerateTangency { .. }) => {}
                Err(e) => return Err(e),
            }
        }
    }
    let classes: Vec<DefectSequence> = classes.into_iter().collect();
    let families: Vec<ChartFamily> = classes
        .par_iter()
        .map(|k| build_chart_family(&seq, sigma, k, n, spec.r, opts))
        .collect::<Result<_>>()?;

    let count: usize = families.iter().map(ChartFamily::len).sum();
    let worst = families
        .iter()
        .flat_map(|f| f.certificates.iter())
        .flat_map(|c| c.derivative_sup.iter().copied())
        .fold(0.0, f64::max);
    let mut misses = Vec::new();
    for t in &hyperbolic {
        if !families.iter().any(|f| f.charts.iter().any(|c| c.contains(*t))) {
            misses.push(*t);
        }
    }
    let lambda_plus = seq.lambda_plus(n)?;
    let excess = lambda_plus - spec.chi;
    let h = bernoulli_entropy(clamped_floor(excess) as f64 + 3.0)?;
    Ok(BowenReparam {
        spec,
        eps_used,
        count,
        log_count: (count as f64).ln(),
        classes,
        families,
        lambda_plus,
        lyapunov_term: (1.0 + h) * excess * n as f64 / (spec.r - 1.0),
        target_points: hyperbolic.len(),
        derivative: DerivativeCheck { pass: worst <= 1.0 + TOLERANCE, worst },
        cover: CoverCheck {
            pass: misses.is_empty(),
            points: hyperbolic.len(),
            misses: misses.len(),
            first_miss: misses.first().copied(),
        },
    })
}
