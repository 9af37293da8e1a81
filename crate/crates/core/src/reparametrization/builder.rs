use std::sync::atomic::{AtomicUsize, Ordering};

use rayon::prelude::*;
use serde::Serialize;

use super::sublevel::{sublevel_charts, SublevelOptions};
use super::{
    oscillation_ladder, regularity_ladder, AffineChart, ChartCertificate, ChartFamily, FittedConstants, StepTag,
    Target, A_PREC, DEGENERATE_LENGTH, TOLERANCE,
};
use crate::combinatorics::DefectSequence;
use crate::curve_engine::trim_with_witness;
use crate::dynamics::{curve_norm, CurveLike, CurveSamples, Derivative, Iterated, MapSequence, Reparam};
use crate::error::{Error, Result};
use crate::geometry::linear_fit;

const E: f64 = std::f64::consts::E;

/// Tunables of [`build_chart_family`].
#[derive(Clone, Debug, Serialize)]
pub struct BuildOptions {
    /// Grid size for target sets and cover checks.
    pub grid: usize,
    /// Samples per piece for membership and norm tests.
    pub piece_samples: usize,
    /// Budget of each sublevel cover.
    pub c_cover: usize,
    /// Landau-Kolmogorov constant; at most `[3 C_LK] + 1` affine-cover pieces.
    pub c_lk: f64,
    /// Oscillation ratio enforced by the affine cover (below 1/3 so that
    /// trimmed and normalized sub-pieces keep ratio at most 1/3).
    pub ratio: f64,
    /// Piece limit of the initial cover.
    pub base_limit: usize,
}

impl BuildOptions {
    /// Defaults with the calibrated constants for smoothness `r`.
    pub fn for_smoothness(r: f64) -> Result<Self> {
        let consts = crate::constants::constants();
        let mut c_lk: f64 = 0.0;
        for s in oscillation_ladder(r) {
            c_lk = c_lk.max(consts.c_cal(s)?);
        }
        Ok(BuildOptions {
            grid: 10_000,
            piece_samples: 32,
            c_cover: consts.c_cover(r)?,
            c_lk,
            ratio: 0.22,
            base_limit: 100_000,
        })
    }

    pub fn cover_limit(&self) -> usize {
        (3.0 * self.c_lk).floor() as usize + 1
    }
}

/// `sup_s |G o eta|_s / |G o eta|_0` for `G = (T^L o s)'` on `[lo, hi]`.
fn oscillation_ratio<C: CurveLike + ?Sized>(
    seq: &MapSequence,
    sigma: &C,
    level: usize,
    lo: f64,
    hi: f64,
    r: f64,
    intervals: usize,
) -> Result<f64> {
    let it = Iterated { seq, curve: sigma, k: level };
    let d = Derivative(&it);
    let mut samples = CurveSamples::new(&Reparam { curve: &d, lo, hi }, intervals);
    samples.max_order = 2;
    let n0 = samples.norm(0.0)?;
    let mut top: f64 = 0.0;
    for s in oscillation_ladder(r) {
        top = top.max(samples.norm(s)?);
    }
    Ok(if top == 0.0 { 0.0 } else if n0 == 0.0 { f64::INFINITY } else { top / n0 })
}

fn sup_speed<C: CurveLike + ?Sized>(seq: &MapSequence, sigma: &C, level: usize, lo: f64, hi: f64, n: usize) -> f64 {
    let it = Iterated { seq, curve: sigma, k: level };
    (0..=n).map(|i| it.velocity(lo + (hi - lo) * i as f64 / n as f64).norm()).fold(0.0, f64::max)
}

struct Builder<'a, C: ?Sized> {
    seq: &'a MapSequence,
    sigma: &'a C,
    r: f64,
    opts: &'a BuildOptions,
    discarded: AtomicUsize,
}

impl<C: CurveLike + ?Sized> Builder<'_, C> {
    /// Affine cover, trim and normalization of `chart` at the target's level.
    fn finish(&self, target: &Target<'_, C>, chart: &AffineChart, limit: usize, linear: bool) -> Result<Vec<AffineChart>> {
        let level = target.level;
        let ps = self.opts.piece_samples;
        // affine cover: the fewest equal pieces whose target-meeting members
        // have oscillation ratio at most `opts.ratio`
        let mut q = 1usize;
        let pieces = loop {
            let h = chart.len() / q as f64;
            let cand: Vec<Option<AffineChart>> = (0..q)
                .into_par_iter()
                .map(|i| -> Result<Option<AffineChart>> {
                    let lo = chart.lo + h * i as f64;
                    let hi = if i + 1 == q { chart.hi } else { chart.lo + h * (i + 1) as f64 };
                    if target.witness(lo, hi, ps)?.is_none() {
                        return Ok(None);
                    }
                    Ok(Some(chart.child(lo, hi, StepTag::Cover { index: i, of: q })))
                })
                .collect::<Result<_>>()?;
            let ok = cand
                .par_iter()
                .flatten()
                .map(|c| oscillation_ratio(self.seq, self.sigma, level, c.lo, c.hi, self.r, ps).map(|x| x <= self.opts.ratio))
                .collect::<Result<Vec<bool>>>()?;
            if ok.into_iter().all(|b| b) {
                break cand.into_iter().flatten().collect::<Vec<_>>();
            }
            let next = if linear { q + 1 } else { (q + 1).max(q * 5 / 4) };
            if next > limit {
                return Err(Error::BudgetExceeded(format!(
                    "affine cover at level {level} needs more than {limit} pieces on [{:.6e}, {:.6e}]",
                    chart.lo, chart.hi
                )));
            }
            q = next;
        };

        let mut out = Vec::new();
        for piece in pieces {
            let Some(w_abs) = target.witness(piece.lo, piece.hi, ps)? else { continue };
            let it = Iterated { seq: self.seq, curve: self.sigma, k: level };
            let f = Reparam { curve: &it, lo: piece.lo, hi: piece.hi };
            let w = ((w_abs - piece.lo) / piece.len()).clamp(0.0, 1.0);
            let (a, b) = trim_with_witness(&f, w, 2000);
            let (lo, hi) = (piece.at(a), piece.at(b));
            let trimmed = piece.child(lo, hi, StepTag::Trim { a, b });
            let speed = sup_speed(self.seq, self.sigma, level, lo, hi, 1024) * (hi - lo);
            let m = ((speed - 5e-7).ceil() as usize).max(1);
            let h = (hi - lo) / m as f64;
            for i in 0..m {
                let (plo, phi) = (lo + h * i as f64, if i + 1 == m { hi } else { lo + h * (i + 1) as f64 });
                if phi - plo < DEGENERATE_LENGTH {
                    self.discarded.fetch_add(1, Ordering::Relaxed);
                    continue;
                }
                if target.witness(plo, phi, ps)?.is_some() {
                    out.push(trimmed.child(plo, phi, StepTag::Normalize { index: i, of: m }));
                }
            }
        }
        Ok(out)
    }

    /// Charts of level `m + 1` refining one chart of level `m`.
    fn step(&self, target: &Target<'_, C>, parent: usize, chart: &AffineChart, k: u32) -> Result<Vec<AffineChart>> {
        let level = target.level;
        let ps = self.opts.piece_samples;
        let pieces = (k as f64 / (self.r - 1.0)).exp().floor() as usize + 1;
        let h = chart.len() / pieces as f64;
        let mut out = Vec::new();
        for i in 0..pieces {
            let lo = chart.lo + h * i as f64;
            let hi = if i + 1 == pieces { chart.hi } else { chart.lo + h * (i + 1) as f64 };
            let Some(w) = target.witness(lo, hi, ps)? else { continue };
            let psi = AffineChart {
                lo,
                hi,
                parent: Some(parent),
                tags: vec![StepTag::Subdivide { index: i, of: pieces }],
            };
            // sublevel cover of G o psi, G = (T^L o s)'
            let it = Iterated { seq: self.seq, curve: self.sigma, k: level };
            let d = Derivative(&it);
            let g = Reparam { curve: &d, lo, hi };
            let mut a = 4.0 * E * d.value(w).norm();
            for (_, v) in target.points_in(lo, hi) {
                a = a.max(v.norm());
            }
            for j in 0..=ps {
                let t = lo + h * j as f64 / ps as f64;
                if target.contains(t)? {
                    a = a.max(d.value(t).norm());
                }
            }
            if a == 0.0 {
                return Err(Error::DegenerateTangency { step: level });
            }
            let a = a * (1.0 + 1e-9);
            let sub = sublevel_charts(&g, a, self.r, SublevelOptions { budget: Some(self.opts.c_cover) })?;
            for (slo, shi) in sub.charts {
                let xi = psi.child(psi.at(slo), psi.at(shi), StepTag::Sublevel { lo: slo, hi: shi });
                if target.witness(xi.lo, xi.hi, ps)?.is_none() {
                    continue;
                }
                out.extend(self.finish(target, &xi, self.opts.cover_limit(), true)?);
            }
        }
        Ok(out)
    }

    fn certificate(&self, chart: &AffineChart, n: usize) -> Result<ChartCertificate> {
        let intervals = 256;
        let mut sup = vec![0.0f64; n + 1];
        for i in 0..=intervals {
            let jets = self.seq.curve_jets(self.sigma, chart.at(i as f64 / intervals as f64), n)?;
            for (k, j) in jets.iter().enumerate() {
                sup[k] = sup[k].max(j[1].norm() * chart.len());
            }
        }
        let ratio = oscillation_ratio(self.seq, self.sigma, n, chart.lo, chart.hi, self.r, intervals)?;
        Ok(ChartCertificate { derivative_sup: sup, oscillation_ratio: ratio })
    }
}

/// Least-squares `A` (over steps `m >= 1`) and the smallest `B` with
/// `log #G_m <= B + A m + sum_{i=1}^{m-1} k_i / (r - 1)` over the whole history.
pub fn fit_constants(history: &[usize], kseq: &DefectSequence, r: f64) -> FittedConstants {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut sum = 0.0;
    for (m, count) in history.iter().enumerate() {
        if m >= 2 {
            sum += kseq.0.get(m - 2).copied().unwrap_or(0) as f64;
        }
        if *count > 0 {
            xs.push(m as f64);
            ys.push((*count as f64).ln() - sum / (r - 1.0));
        }
    }
    if xs.is_empty() {
        return FittedConstants { a: 0.0, b: 0.0 };
    }
    // the slope skips the initial cover, whose size depends on the curve only
    let skip = usize::from(xs.len() >= 3 && xs[0] == 0.0);
    let a = if xs.len() >= 2 { linear_fit(&xs[skip..], &ys[skip..]).0 } else { 0.0 };
    let b = xs.iter().zip(&ys).map(|(x, y)| y - a * x).fold(f64::NEG_INFINITY, f64::max);
    FittedConstants { a, b }
}

/// Inductive family `G_n` of affine charts for the defect sequence
/// `kseq = (k_1, ..., k_{n-1})`, with `n = kseq.len() + 1` (or `n = 0` via `n`).
///
/// Step `m -> m + 1` subdivides every chart into `[e^{k_m / (r-1)}] + 1`
/// pieces (`k_0 = 1`), keeps those meeting `H(K_m) n s^-1(B(m + 2, 1))`,
/// covers the sublevel set of `(T^{m+1} o s)'` at `a = 4e |(T^{m+1} o s)'(w)|`,
/// splits into pieces of oscillation ratio at most `opts.ratio`, trims each by
/// the cube exit interval of `T^{m+1} o s` and normalizes the derivative to 1.
pub fn build_chart_family<C: CurveLike + ?Sized>(
    maps: &MapSequence,
    sigma: &C,
    kseq: &DefectSequence,
    n: usize,
    r: f64,
    opts: &BuildOptions,
) -> Result<ChartFamily> {
    if !(r > 1.0 && r <= 3.0) {
        return Err(Error::UnsupportedSmoothness { requested: r, available: 3.0 });
    }
    if n > 0 && kseq.len() != n - 1 {
        return Err(Error::Precondition(format!("defect sequence of length {} for n = {n}", kseq.len())));
    }
    if n == 0 && !kseq.is_empty() {
        return Err(Error::Precondition("n = 0 takes an empty defect sequence".into()));
    }
    for s in super::ladder(r.min(2.0), r) {
        let bound = maps.norm_bound(s, n.max(1))?;
        if bound > (1.0 + 1e-9) / A_PREC {
            return Err(Error::Precondition(format!(
                "|T_k|_{s} = {bound:.3e} exceeds 1/A = {:.1e}",
                1.0 / A_PREC
            )));
        }
    }
    for s in regularity_ladder(r) {
        let v = curve_norm(sigma, s, 1024)?.value;
        if v > 1.0 + TOLERANCE {
            return Err(Error::Precondition(format!("|s|_{s} = {v:.6} exceeds 1")));
        }
    }
    let b = Builder { seq: maps, sigma, r, opts, discarded: AtomicUsize::new(0) };

    let base_target = Target::new(maps, sigma, 0, DefectSequence(Vec::new()), opts.grid)?;
    let mut levels = vec![b.finish(&base_target, &AffineChart::root(), opts.base_limit, false)?];
    for m in 0..n {
        let k = if m == 0 { 1 } else { kseq.0[m - 1] };
        let target = Target::new(maps, sigma, m + 1, kseq.prefix(m), opts.grid)?;
        let prev = &levels[m];
        let next: Vec<Vec<AffineChart>> = prev
            .par_iter()
            .enumerate()
            .map(|(p, c)| b.step(&target, p, c, k))
            .collect::<Result<_>>()?;
        levels.push(next.into_iter().flatten().collect());
    }
    let charts = levels[n].clone();
    let certificates = charts.par_iter().map(|c| b.certificate(c, n)).collect::<Result<_>>()?;
    let history: Vec<usize> = levels.iter().map(Vec::len).collect();
    let constants = fit_constants(&history, kseq, r);
    Ok(ChartFamily { step: n, r, kseq: kseq.clone(), charts, levels, certificates, constants, discarded: b.discarded.into_inner() })
}
