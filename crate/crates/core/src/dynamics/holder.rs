//! Grid estimates of `C^s` norms.
//!
//! `|g|_s` is the `(s - ceil(s-1))`-Hölder seminorm of the `ceil(s-1)`-th
//! derivative; for integer `s >= 1` this is `sup |D^s g|`, and `|g|_0` is the
//! sup norm. All values are lower estimates from finite samples.

use serde::Serialize;

use super::curve::CurveLike;
use super::jet::{norm2, norm3, sub2, CurveJet};
use super::map::{SmoothMap, MAX_JET_ORDER};
use crate::error::{Error, Result};
use crate::geometry::spectral_norm;

/// A sampled norm with the resolution it was computed at.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct HolderEstimate {
    pub value: f64,
    pub samples: usize,
    pub min_step: f64,
}

/// Split `s` into the derivative order and the Hölder exponent.
pub fn split_order(s: f64) -> (usize, f64) {
    if s <= 0.0 {
        return (0, 0.0);
    }
    let k = (s - 1.0).ceil().max(0.0) as usize;
    (k, s - k as f64)
}

/// Jets of a curve at `N + 1` equally spaced parameters of `[0,1]`.
#[derive(Clone, Debug)]
pub struct CurveSamples {
    pub jets: Vec<CurveJet>,
    /// Highest derivative order with meaningful entries.
    pub max_order: usize,
}

impl CurveSamples {
    pub fn new<C: CurveLike + ?Sized>(c: &C, intervals: usize) -> Self {
        let jets = (0..=intervals).map(|i| c.jet(i as f64 / intervals as f64)).collect();
        CurveSamples { jets, max_order: MAX_JET_ORDER }
    }

    pub fn from_jets(jets: Vec<CurveJet>, max_order: usize) -> Self {
        CurveSamples { jets, max_order }
    }

    pub fn intervals(&self) -> usize {
        self.jets.len() - 1
    }

    /// Samples of the derivative curve.
    pub fn derivative(&self) -> CurveSamples {
        let jets = self
            .jets
            .iter()
            .map(|j| [j[1], j[2], j[3], j[3] * f64::NAN])
            .collect();
        CurveSamples { jets, max_order: self.max_order.saturating_sub(1) }
    }

    pub fn sup(&self, k: usize) -> f64 {
        self.jets.iter().map(|j| j[k].norm()).fold(0.0, f64::max)
    }

    pub fn inf(&self, k: usize) -> f64 {
        self.jets.iter().map(|j| j[k].norm()).fold(f64::INFINITY, f64::min)
    }

    /// Sup of `|g^(k)(t) - g^(k)(u)| / |t - u|^alpha` over sample pairs whose
    /// index offsets follow a geometric ladder of ratio 5/4.
    pub fn holder(&self, k: usize, alpha: f64) -> f64 {
        let n = self.intervals();
        let h = 1.0 / n as f64;
        let mut best: f64 = 0.0;
        for m in offsets(n) {
            let denom = (m as f64 * h).powf(alpha);
            for i in 0..=(n - m) {
                let q = (self.jets[i + m][k] - self.jets[i][k]).norm() / denom;
                best = best.max(q);
            }
        }
        best
    }

    /// `|g|_s`; fails when `s` needs derivatives beyond `max_order`.
    pub fn norm(&self, s: f64) -> Result<f64> {
        let (k, alpha) = split_order(s);
        let needed = if alpha == 1.0 { k + 1 } else { k };
        if needed > self.max_order {
            return Err(Error::UnsupportedSmoothness {
                requested: s,
                available: self.max_order as f64,
            });
        }
        Ok(if s <= 0.0 {
            self.sup(0)
        } else if alpha == 1.0 {
            self.sup(k + 1)
        } else {
            self.holder(k, alpha)
        })
    }
}

/// Index offsets `1 <= m <= n` in a geometric ladder of ratio 5/4, always
/// including `n`.
fn offsets(n: usize) -> Vec<usize> {
    let mut out = Vec::new();
    let mut m = 1;
    while m < n {
        out.push(m);
        m = (m + 1).max((m * 5).div_ceil(4));
    }
    out.push(n);
    out
}

/// `|c|_s` for a curve on `[0,1]` sampled at `intervals + 1` parameters.
pub fn curve_norm<C: CurveLike + ?Sized>(c: &C, s: f64, intervals: usize) -> Result<HolderEstimate> {
    let samples = CurveSamples::new(c, intervals);
    Ok(HolderEstimate {
        value: samples.norm(s)?,
        samples: intervals + 1,
        min_step: 1.0 / intervals as f64,
    })
}

/// `|T|_s` over a `side x side` grid of the domain.
pub fn map_norm(map: &SmoothMap, s: f64, side: usize) -> Result<HolderEstimate> {
    if s > MAX_JET_ORDER as f64 {
        return Err(Error::UnsupportedSmoothness { requested: s, available: MAX_JET_ORDER as f64 });
    }
    let grid = map.domain().grid(side);
    let jets: Vec<_> = grid.iter().map(|p| map.jet(*p)).collect();
    let (k, alpha) = split_order(s);
    let value = if s <= 0.0 {
        jets.iter().map(|j| j.value.norm()).fold(0.0, f64::max)
    } else if alpha == 1.0 {
        jets.iter()
            .map(|j| match k + 1 {
                1 => spectral_norm(&j.d1),
                2 => norm2(&j.d2),
                _ => norm3(&j.d3),
            })
            .fold(0.0, f64::max)
    } else {
        let diff = |a: usize, b: usize| -> f64 {
            let (ja, jb) = (&jets[a], &jets[b]);
            match k {
                0 => (ja.value - jb.value).norm(),
                1 => spectral_norm(&(ja.d1 - jb.d1)),
                _ => norm2(&sub2(&ja.d2, &jb.d2)),
            }
        };
        let mut best: f64 = 0.0;
        for m in offsets(side.saturating_sub(1).max(1)) {
            for i in 0..side {
                for j in 0..side {
                    let a = i * side + j;
                    for b in [(i + m < side).then(|| (i + m) * side + j), (j + m < side).then(|| a + m)]
                        .into_iter()
                        .flatten()
                    {
                        let dist = (grid[a] - grid[b]).norm();
                        best = best.max(diff(a, b) / dist.powf(alpha));
                    }
                }
            }
        }
        best
    };
    Ok(HolderEstimate { value, samples: side * side, min_step: map.domain().width() / side as f64 })
}

/// Object whose norm is estimated by [`holder_norm_estimate`].
pub enum NormTarget<'a> {
    Map(&'a SmoothMap),
    Curve(&'a dyn CurveLike),
}

/// Grid estimate of `|object|_s` at `resolution` samples per axis.
pub fn holder_norm_estimate(object: NormTarget<'_>, s: f64, resolution: usize) -> Result<HolderEstimate> {
    if !(s >= 0.0) {
        return Err(Error::Domain(format!("norm order must be nonnegative, got {s}")));
    }
    match object {
        NormTarget::Map(map) => {
            if s > map.smoothness() {
                return Err(Error::UnsupportedSmoothness { requested: s, available: map.smoothness() });
            }
            map_norm(map, s, resolution)
        }
        NormTarget::Curve(c) => curve_norm(c, s, resolution),
    }
}
