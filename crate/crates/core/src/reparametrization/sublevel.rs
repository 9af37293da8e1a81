use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::{ladder, DEGENERATE_LENGTH, TOLERANCE};
use crate::constants::CoverCalibration;
use crate::curve_engine::random_polynomial_curve;
use crate::dynamics::{CurveLike, CurveSamples, Reparam};
use crate::error::{Error, Result};

const COMPONENT_GRID: usize = 10_000;
const PIECE_INTERVALS: usize = 32;
const COMPONENT_INTERVALS: usize = 256;

#[derive(Clone, Copy, Debug, Serialize)]
pub struct SublevelOptions {
    /// Largest number of charts; `None` uses the calibrated `C_cover(r)`.
    pub budget: Option<usize>,
}

impl Default for SublevelOptions {
    fn default() -> Self {
        SublevelOptions { budget: None }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SublevelResult {
    /// Charts as `(lo, hi)` sub-intervals of `[0,1]`.
    pub charts: Vec<(f64, f64)>,
    /// Connected components of `{|g| <= a}`.
    pub components: Vec<(f64, f64)>,
    /// Sampled `|g|_{r-1}`.
    pub norm: f64,
    /// Whether `|g|_{r-1} <= a (1 + 1e-6)` held on the samples.
    pub precondition: bool,
    /// Every grid parameter with `|g| <= a` lies in a chart.
    pub cover_verified: bool,
}

struct Piece<'a, C: ?Sized> {
    g: &'a C,
    lo: f64,
    hi: f64,
}

impl<C: CurveLike + ?Sized> CurveLike for Piece<'_, C> {
    fn jet(&self, t: f64) -> crate::dynamics::CurveJet {
        Reparam { curve: self.g, lo: self.lo, hi: self.hi }.jet(t)
    }
}

fn piece_norm<C: CurveLike + ?Sized>(g: &C, lo: f64, hi: f64, s: f64, intervals: usize) -> Result<f64> {
    let samples = CurveSamples::new(&Piece { g, lo, hi }, intervals);
    let mut samples = samples;
    samples.max_order = samples.max_order.min(2);
    samples.norm(s)
}

/// Sign-change components of `{|g| <= a}` on a grid, endpoints refined by
/// bisection to `1e-12`.
fn components<C: CurveLike + ?Sized>(g: &C, a: f64) -> Vec<(f64, f64)> {
    let f = |t: f64| g.value(t).norm_squared() - a * a;
    let n = COMPONENT_GRID;
    let inside: Vec<bool> = (0..=n).into_par_iter().map(|i| f(i as f64 / n as f64) <= 0.0).collect();
    let refine = |mut good: f64, mut bad: f64| {
        while (bad - good).abs() > 1e-12 {
            let mid = 0.5 * (good + bad);
            if f(mid) <= 0.0 {
                good = mid;
            } else {
                bad = mid;
            }
        }
        good
    };
    let mut out = Vec::new();
    let mut i = 0;
    while i <= n {
        if !inside[i] {
            i += 1;
            continue;
        }
        let start = i;
        while i < n && inside[i + 1] {
            i += 1;
        }
        let t = |k: usize| k as f64 / n as f64;
        let lo = if start == 0 { 0.0 } else { refine(t(start), t(start - 1)) };
        let hi = if i == n { 1.0 } else { refine(t(i), t(i + 1)) };
        out.push((lo, hi));
        i += 1;
    }
    out
}

/// Affine charts covering `{t : |g(t)| <= a}` such that on each chart
/// `|g o phi|_t <= a / 12e` (sampled) for `t` in the ladder
/// `min(1, r-1), ..., [r-1], r-1`.
///
/// Components of the sublevel set are located by sign changes of
/// `|g|^2 - a^2` on a `10^4` grid and bisection; each component is then cut
/// into the fewest equal pieces meeting the norm condition.
pub fn sublevel_charts<C: CurveLike + ?Sized>(g: &C, a: f64, r: f64, opts: SublevelOptions) -> Result<SublevelResult> {
    if !(a > 0.0) {
        return Err(Error::Domain(format!("sublevel a = {a} must be positive")));
    }
    if !(r > 1.0 && r <= 3.0) {
        return Err(Error::UnsupportedSmoothness { requested: r, available: 3.0 });
    }
    let budget = match opts.budget {
        Some(b) => b,
        None => crate::constants::constants().c_cover(r)?,
    };
    let orders = ladder((r - 1.0).min(1.0), r - 1.0);
    let target = a / (12.0 * std::f64::consts::E);
    let norm = piece_norm(g, 0.0, 1.0, r - 1.0, 1024)?;
    let comps = components(g, a);
    let mut charts = Vec::new();
    for &(c, d) in &comps {
        let len = d - c;
        if len < DEGENERATE_LENGTH {
            continue;
        }
        let mut q = 1usize;
        for &s in &orders {
            let ns = piece_norm(g, c, d, s, COMPONENT_INTERVALS)?;
            if ns > 0.0 {
                q = q.max((ns / target).powf(1.0 / s).ceil() as usize);
            }
        }
        loop {
            if charts.len() + q > budget {
                return Err(Error::BudgetExceeded(format!(
                    "sublevel cover needs more than {budget} charts (component [{c:.6}, {d:.6}] alone needs {q}, a = {a:.3e})"
                )));
            }
            let h = len / q as f64;
            let ok = (0..q).into_par_iter().map(|i| -> Result<bool> {
                let (lo, hi) = (c + h * i as f64, c + h * (i + 1) as f64);
                for &s in &orders {
                    if piece_norm(g, lo, hi, s, PIECE_INTERVALS)? > target {
                        return Ok(false);
                    }
                }
                Ok(true)
            });
            if ok.collect::<Result<Vec<bool>>>()?.into_iter().all(|b| b) {
                charts.extend((0..q).map(|i| (c + h * i as f64, if i + 1 == q { d } else { c + h * (i + 1) as f64 })));
                break;
            }
            q = (q + 1).max(q * 5 / 4);
        }
    }
    let cover_verified = (0..=COMPONENT_GRID)
        .map(|i| i as f64 / COMPONENT_GRID as f64)
        .filter(|t| g.value(*t).norm() <= a)
        .all(|t| charts.iter().any(|(lo, hi)| *lo <= t && t <= *hi));
    Ok(SublevelResult {
        charts,
        components: comps,
        norm,
        precondition: norm <= a * (1.0 + TOLERANCE),
        cover_verified,
    })
}

/// Largest sublevel chart count over a seeded corpus of random polynomial
/// curves `g` normalized to `|g|_{r-1} = 1`, run with `a = 1`, times a
/// safety factor of two.
pub fn calibrate_cover(r: f64, corpus: usize, max_degree: usize, seed: u64) -> Result<CoverCalibration> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let curves: Vec<_> = (0..corpus).map(|_| random_polynomial_curve(&mut rng, max_degree)).collect();
    let counts: Vec<usize> = curves
        .par_iter()
        .map(|c| -> Result<usize> {
            let n = piece_norm(c, 0.0, 1.0, r - 1.0, 1024)?;
            if n == 0.0 {
                return Ok(1);
            }
            let scaled = crate::dynamics::FnCurve(|t: f64| c.jet(t).map(|p| p / n));
            Ok(sublevel_charts(&scaled, 1.0, r, SublevelOptions { budget: Some(usize::MAX) })?.charts.len())
        })
        .collect::<Result<_>>()?;
    let max_count = counts.into_iter().max().unwrap_or(1);
    let safety = 2.0;
    Ok(CoverCalibration {
        r,
        d: 2,
        corpus,
        max_degree,
        seed,
        max_count,
        safety,
        c_cover: (safety * max_count as f64).ceil() as usize,
    })
}
