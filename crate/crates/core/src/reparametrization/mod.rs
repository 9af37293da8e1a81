//! Affine reparametrization of curves inside Bowen balls: sublevel-set
//! charts, the inductive chart-family builder, property verification and the
//! per-class union over defect sequences.

mod bowen;
mod builder;
mod sublevel;
mod verify;

pub use bowen::{precision_radius, reparametrize_bowen_ball, BowenReparam, BowenSpec, DerivativeCheck};
pub use builder::{build_chart_family, fit_constants, BuildOptions};
pub use sublevel::{calibrate_cover, sublevel_charts, SublevelOptions, SublevelResult};
pub use verify::{verify_chart_properties, CountCheck, CoverCheck, PropertyCheck, PropertyReport};

use serde::Serialize;

use crate::combinatorics::{defect_from_jets, DefectSequence};
use crate::dynamics::{CurveJet, CurveLike, MapSequence};
use crate::error::Result;
use crate::geometry::Point;

/// Slack allowed on every "at most 1"-type sampled certificate.
pub const TOLERANCE: f64 = 1e-6;

/// `A_prec`: maps of a sequence must satisfy `|T_k|_s <= 1 / A_PREC` for
/// `min(2, r) <= s <= r`.
pub const A_PREC: f64 = 1e3;

/// Charts shorter than this are discarded.
pub const DEGENERATE_LENGTH: f64 = 1e-14;

/// One construction step applied to a chart.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum StepTag {
    /// Initial chart `[0,1]`.
    Root,
    /// Equal subdivision `theta`: piece `index` of `of`.
    Subdivide { index: usize, of: usize },
    /// Sublevel chart `xi`, in the coordinates of the subdivided chart.
    Sublevel { lo: f64, hi: f64 },
    /// Affine cover `eta`: piece `index` of `of`.
    Cover { index: usize, of: usize },
    /// Oscillation trim to `[a, b]`.
    Trim { a: f64, b: f64 },
    /// Unit-derivative normalization: piece `index` of `of`.
    Normalize { index: usize, of: usize },
}

/// The affine map `t -> lo + (hi - lo) t` of `[0,1]`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AffineChart {
    pub lo: f64,
    pub hi: f64,
    /// Index of the chart of the previous step this one refines.
    pub parent: Option<usize>,
    pub tags: Vec<StepTag>,
}

impl AffineChart {
    pub fn root() -> Self {
        AffineChart { lo: 0.0, hi: 1.0, parent: None, tags: vec![StepTag::Root] }
    }

    pub fn len(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn at(&self, t: f64) -> f64 {
        self.lo + (self.hi - self.lo) * t
    }

    pub fn contains(&self, t: f64) -> bool {
        self.lo <= t && t <= self.hi
    }

    fn child(&self, lo: f64, hi: f64, tag: StepTag) -> Self {
        let mut tags = self.tags.clone();
        tags.push(tag);
        AffineChart { lo, hi, parent: self.parent, tags }
    }
}

/// Sampled certificates of one chart.
#[derive(Clone, Debug, Serialize)]
pub struct ChartCertificate {
    /// `sup |D(T^k o s o phi)|` for `k = 0..=n`.
    pub derivative_sup: Vec<f64>,
    /// `max_s |(T^n o s)' o phi|_s / |(T^n o s)' o phi|_0`.
    pub oscillation_ratio: f64,
}

/// Least-squares constants of the count bound
/// `log #G_m <= B + A m + sum_{i<m} k_i / (r - 1)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FittedConstants {
    pub a: f64,
    pub b: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ChartFamily {
    pub step: usize,
    pub r: f64,
    pub kseq: DefectSequence,
    pub charts: Vec<AffineChart>,
    /// Families of every step `0..=step`; `levels[step] == charts`.
    pub levels: Vec<Vec<AffineChart>>,
    pub certificates: Vec<ChartCertificate>,
    pub constants: FittedConstants,
    /// Charts discarded as degenerate.
    pub discarded: usize,
}

impl ChartFamily {
    /// A family made of the given charts only, without construction history.
    pub fn from_charts(step: usize, r: f64, kseq: DefectSequence, charts: Vec<AffineChart>) -> Self {
        let count = charts.len().max(1) as f64;
        let mut levels = vec![Vec::new(); step];
        levels.push(charts.clone());
        let b = count.ln() - kseq.sum() as f64 / (r - 1.0);
        ChartFamily {
            step,
            r,
            kseq,
            charts,
            levels,
            certificates: Vec::new(),
            constants: FittedConstants { a: 0.0, b },
            discarded: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.charts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.charts.is_empty()
    }

    /// Chart counts per step.
    pub fn history(&self) -> Vec<usize> {
        self.levels.iter().map(Vec::len).collect()
    }

    /// `(n, log #, bound)` rows of the count comparison.
    pub fn bound_table(&self) -> Vec<(usize, f64, f64)> {
        let mut sum = 0.0;
        self.levels
            .iter()
            .enumerate()
            .map(|(m, l)| {
                if m >= 2 {
                    sum += self.kseq.0[m - 2] as f64;
                }
                let bound = self.constants.b + self.constants.a * m as f64 + sum / (self.r - 1.0);
                (m, (l.len() as f64).ln(), bound)
            })
            .collect()
    }
}

/// `{lo, integers strictly between, hi}`.
pub fn ladder(lo: f64, hi: f64) -> Vec<f64> {
    let mut out = vec![lo];
    let mut k = lo.floor() + 1.0;
    while k < hi {
        out.push(k);
        k += 1.0;
    }
    if hi > lo {
        out.push(hi);
    }
    out
}

/// `lo, lo + step, ...` up to and including `hi`.
pub fn fine_ladder(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let mut out = Vec::new();
    let mut s = lo;
    while s < hi - 1e-12 {
        out.push(s);
        s += step;
    }
    out.push(hi);
    out
}

/// Orders `1, min(2, r), 3, ..., [r], r` of the regularity property.
pub fn regularity_ladder(r: f64) -> Vec<f64> {
    ladder(1.0, r)
}

/// Orders of the oscillation property, `min(1, r-1) <= s <= r-1` in steps of 1/4.
pub fn oscillation_ladder(r: f64) -> Vec<f64> {
    fine_ladder((r - 1.0).min(1.0), r - 1.0, 0.25)
}

/// `T^level o s` stays in the open unit ball for `k = 0..=level`.
fn in_unit_bowen(jets: &[CurveJet], level: usize) -> bool {
    jets[..=level].iter().all(|j| j[0].norm() < 1.0)
}

/// Parameters of a grid of about `points` values laid over
/// `s^-1(B(level + 1, 1))`, located by zooming in one iterate at a time.
pub fn bowen_grid<C: CurveLike + ?Sized>(
    seq: &MapSequence,
    sigma: &C,
    level: usize,
    points: usize,
) -> Result<Vec<(f64, Vec<CurveJet>)>> {
    use rayon::prelude::*;
    let mut region: Vec<(f64, f64)> = vec![(0.0, 1.0)];
    let mut kept: Vec<(f64, Vec<CurveJet>)> = Vec::new();
    for k in 0..=level + 1 {
        let check = k.min(level);
        let measure: f64 = region.iter().map(|(a, b)| b - a).sum();
        if measure <= 0.0 {
            return Ok(Vec::new());
        }
        let h = measure / points as f64;
        let params: Vec<f64> = region
            .iter()
            .flat_map(|(a, b)| {
                let m = ((b - a) / h).ceil().max(1.0) as usize;
                let step = (b - a) / m as f64;
                (0..=m).map(move |i| a + step * i as f64)
            })
            .collect();
        kept = params
            .par_iter()
            .map(|t| -> Result<Option<(f64, Vec<CurveJet>)>> {
                let jets = seq.curve_jets(sigma, *t, level)?;
                Ok(in_unit_bowen(&jets, check).then_some((*t, jets)))
            })
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .flatten()
            .collect();
        kept.dedup_by(|a, b| a.0 == b.0);
        if k == level + 1 {
            break;
        }
        let mut next: Vec<(f64, f64)> = Vec::new();
        for (t, _) in &kept {
            let (a, b) = ((t - 2.0 * h).max(0.0), (t + 2.0 * h).min(1.0));
            match next.last_mut() {
                Some(last) if a <= last.1 => last.1 = last.1.max(b),
                _ => next.push((a, b)),
            }
        }
        region = next;
    }
    Ok(kept)
}

/// Target set `H(K_m) n s^-1(B(m + 2, 1))` of the step producing level
/// `m + 1`, known on a zoomed grid and testable at any parameter.
pub(crate) struct Target<'a, C: ?Sized> {
    pub seq: &'a MapSequence,
    pub sigma: &'a C,
    /// Curve level `L = m + 1`.
    pub level: usize,
    pub prefix: DefectSequence,
    /// Sorted grid parameters in the target with `(T^L o s)'` there.
    pub points: Vec<(f64, Point)>,
}

impl<'a, C: CurveLike + ?Sized> Target<'a, C> {
    /// Target for level `level` with defect prefix `prefix` (of length `level - 1`,
    /// or empty at level 0).
    pub fn new(seq: &'a MapSequence, sigma: &'a C, level: usize, prefix: DefectSequence, grid: usize) -> Result<Self> {
        let mut points = Vec::new();
        for (t, jets) in bowen_grid(seq, sigma, level, grid)? {
            if Self::class_matches(seq, &jets, &prefix) {
                points.push((t, jets[level][1]));
            }
        }
        Ok(Target { seq, sigma, level, prefix, points })
    }

    fn class_matches(seq: &MapSequence, jets: &[CurveJet], prefix: &DefectSequence) -> bool {
        prefix.is_empty() || defect_from_jets(seq, jets, prefix.len()).is_ok_and(|k| k == *prefix)
    }

    pub fn contains(&self, t: f64) -> Result<bool> {
        let jets = self.seq.curve_jets(self.sigma, t, self.level)?;
        Ok(in_unit_bowen(&jets, self.level) && Self::class_matches(self.seq, &jets, &self.prefix))
    }

    /// Grid points inside `[lo, hi]`.
    pub fn points_in(&self, lo: f64, hi: f64) -> &[(f64, Point)] {
        let a = self.points.partition_point(|p| p.0 < lo);
        let b = self.points.partition_point(|p| p.0 <= hi);
        &self.points[a..b]
    }

    /// Smallest target parameter of `[lo, hi]`: a grid point if there is
    /// one, else the first of `samples + 1` equally spaced parameters.
    pub fn witness(&self, lo: f64, hi: f64, samples: usize) -> Result<Option<f64>> {
        if let Some(p) = self.points_in(lo, hi).first() {
            return Ok(Some(p.0));
        }
        for i in 0..=samples {
            let t = lo + (hi - lo) * i as f64 / samples as f64;
            if self.contains(t)? {
                return Ok(Some(t));
            }
        }
        Ok(None)
    }
}
