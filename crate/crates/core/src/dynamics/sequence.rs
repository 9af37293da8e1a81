//! Sequences of maps fixing the origin, and the localization of a map along
//! an orbit.

use serde::Serialize;

use super::curve::CurveLike;
use super::jet::{scale2, scale3, CurveJet, MapJet, ZERO2, ZERO3};
use super::map::{evaluate_orbit, SmoothMap};
use crate::error::{Error, Result};
use crate::geometry::{log_plus, spectral_norm, Mat2, Point};

/// Planar dimension.
pub const DIM: usize = 2;

/// One map `T_k` of a sequence.
#[derive(Clone, Debug)]
pub enum StepMap {
    Linear(Mat2),
    /// `v -> eps^-1 (F(base + eps v) - F(base))` for the lift `F` of `map`.
    Local { map: SmoothMap, base: Point, eps: f64 },
}

impl StepMap {
    pub fn value(&self, v: Point) -> Point {
        match self {
            StepMap::Linear(m) => m * v,
            StepMap::Local { map, base, eps } => {
                (map.lift(base + v * *eps) - map.lift(*base)) / *eps
            }
        }
    }

    pub fn derivative(&self, v: Point) -> Mat2 {
        match self {
            StepMap::Linear(m) => *m,
            StepMap::Local { map, base, eps } => map.derivative(base + v * *eps),
        }
    }

    pub fn jet(&self, v: Point) -> MapJet {
        match self {
            StepMap::Linear(m) => MapJet { value: m * v, d1: *m, d2: ZERO2, d3: ZERO3 },
            StepMap::Local { map, base, eps } => {
                let j = map.jet(base + v * *eps);
                MapJet {
                    value: (j.value - map.lift(*base)) / *eps,
                    d1: j.d1,
                    d2: scale2(&j.d2, *eps),
                    d3: scale3(&j.d3, eps * eps),
                }
            }
        }
    }

    /// Certificate for `|T_k|_s` on the `sqrt(d)`-ball: exact for linear
    /// maps, `eps^(s-1) |T|_s` for localized ones.
    pub fn norm_bound(&self, s: f64) -> Result<f64> {
        match self {
            StepMap::Linear(m) => Ok(if s <= 1.0 { spectral_norm(m) } else { 0.0 }),
            StepMap::Local { map, eps, .. } => {
                Ok(eps.powf((s - 1.0).max(0.0)) * map.norm_certificate(s)?)
            }
        }
    }
}

/// `(T_n)_{n >= 0}` with `T_0 = Id` and `T_n(0) = 0`, each defined on the
/// ball of radius `sqrt(d)`.
#[derive(Clone, Debug)]
pub struct MapSequence {
    steps: Vec<StepMap>,
    cyclic: bool,
}

/// Serializable description of a sequence for reports.
#[derive(Clone, Debug, Serialize)]
pub struct SequenceInfo {
    pub horizon: Option<usize>,
    pub kind: String,
}

impl MapSequence {
    /// Every `T_k` (k >= 1) equal to `step`.
    pub fn constant(step: StepMap) -> Self {
        MapSequence { steps: vec![step], cyclic: true }
    }

    pub fn constant_linear(m: Mat2) -> Self {
        Self::constant(StepMap::Linear(m))
    }

    pub fn identity() -> Self {
        Self::constant_linear(Mat2::identity())
    }

    /// `T_1, ..., T_n` given explicitly; later indices are unavailable.
    pub fn finite(steps: Vec<StepMap>) -> Self {
        MapSequence { steps, cyclic: false }
    }

    pub fn horizon(&self) -> Option<usize> {
        if self.cyclic {
            None
        } else {
            Some(self.steps.len())
        }
    }

    pub fn info(&self) -> SequenceInfo {
        let kind = match self.steps.first() {
            Some(StepMap::Linear(_)) if self.cyclic => "constant_linear",
            Some(StepMap::Local { .. }) => "localized",
            _ => "finite",
        };
        SequenceInfo { horizon: self.horizon(), kind: kind.to_string() }
    }

    /// `T_k` for `k >= 1`.
    pub fn step(&self, k: usize) -> Result<&StepMap> {
        assert!(k >= 1, "T_0 is the identity");
        if self.cyclic {
            Ok(&self.steps[(k - 1) % self.steps.len()])
        } else {
            self.steps.get(k - 1).ok_or(Error::Horizon { horizon: self.steps.len(), index: k })
        }
    }

    /// Number of maps available, capped at `want`.
    pub fn available(&self, want: usize) -> usize {
        if self.cyclic {
            want
        } else {
            want.min(self.steps.len())
        }
    }

    /// `T^k v` for `k = 0..=n`.
    pub fn orbit(&self, v: Point, n: usize) -> Result<Vec<Point>> {
        let mut out = Vec::with_capacity(n + 1);
        out.push(v);
        let mut p = v;
        for k in 1..=n {
            p = self.step(k)?.value(p);
            out.push(p);
        }
        Ok(out)
    }

    /// `T^n v` by direct composition.
    pub fn compose(&self, v: Point, n: usize) -> Result<Point> {
        (1..=n).try_fold(v, |p, k| Ok(self.step(k)?.value(p)))
    }

    /// Derivative `D_v T^n`.
    pub fn cocycle(&self, v: Point, n: usize) -> Result<Mat2> {
        let mut p = v;
        let mut m = Mat2::identity();
        for k in 1..=n {
            let step = self.step(k)?;
            m = step.derivative(p) * m;
            p = step.value(p);
        }
        Ok(m)
    }

    /// Bowen ball at the origin: `|T^k v| < rho` for `k = 0..n-1`.
    pub fn in_bowen_ball(&self, v: Point, n: usize, rho: f64) -> Result<bool> {
        let mut p = v;
        for k in 0..n {
            if k > 0 {
                p = self.step(k)?.value(p);
            }
            if !(p.norm() < rho) {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Jets of `T^k o c` at `t` for `k = 0..=n`.
    pub fn curve_jets<C: CurveLike + ?Sized>(&self, c: &C, t: f64, n: usize) -> Result<Vec<CurveJet>> {
        let mut out = Vec::with_capacity(n + 1);
        let mut j = c.jet(t);
        out.push(j);
        for k in 1..=n {
            j = self.step(k)?.jet(j[0]).push(&j);
            out.push(j);
        }
        Ok(out)
    }

    /// `(1/n) sum_{k=1..n} log+ |D_0 T_k|`; for a localized sequence this is
    /// the orbit average of `log+ |DT|` along the base orbit.
    pub fn lambda_plus(&self, n: usize) -> Result<f64> {
        if n == 0 {
            return Err(Error::Domain("lambda_plus needs n >= 1".into()));
        }
        let mut sum = 0.0;
        for k in 1..=n {
            sum += log_plus(spectral_norm(&self.step(k)?.derivative(Point::zeros())));
        }
        Ok(sum / n as f64)
    }

    /// Largest certificate `|T_k|_s` over `k = 1..=n`.
    pub fn norm_bound(&self, s: f64, n: usize) -> Result<f64> {
        let mut best: f64 = 0.0;
        for k in 1..=self.available(n).max(1) {
            best = best.max(self.step(k)?.norm_bound(s)?);
        }
        Ok(best)
    }
}

/// `T^k o c` as a curve.
pub struct Iterated<'a, C: ?Sized> {
    pub seq: &'a MapSequence,
    pub curve: &'a C,
    pub k: usize,
}

impl<C: CurveLike + ?Sized> CurveLike for Iterated<'_, C> {
    fn jet(&self, t: f64) -> CurveJet {
        let mut j = self.curve.jet(t);
        for k in 1..=self.k {
            let step = self.seq.step(k).expect("iterated curve beyond the sequence horizon");
            j = step.jet(j[0]).push(&j);
        }
        j
    }
}

/// Localized dynamics `T^x_{k,eps}(v) = eps^-1 (F(T^{k-1}x + eps v) - F(T^{k-1}x))`
/// for `k = 1..=n`, realized in translation charts.
pub fn localize(map: &SmoothMap, x: Point, n: usize, eps: f64) -> Result<MapSequence> {
    let limit = map.domain().safe_radius() / (DIM as f64).sqrt();
    if !(eps > 0.0 && eps < limit) {
        return Err(Error::ChartTooLarge { eps, limit });
    }
    let orbit = evaluate_orbit(map, x, n.saturating_sub(1))?;
    let steps = orbit
        .iter()
        .take(n)
        .map(|p| StepMap::Local { map: map.clone(), base: *p, eps })
        .collect();
    Ok(MapSequence::finite(steps))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::map::system;
    use crate::dynamics::jet::norm2;
    use crate::geometry::pt;

    #[test]
    fn identity_localization_is_identity() {
        let id = system("identity", &[]).unwrap();
        let seq = localize(&id, pt(0.2, 0.9), 4, 0.05).unwrap();
        for k in 1..=4 {
            let v = pt(0.7, -0.6);
            assert!((seq.step(k).unwrap().value(v) - v).norm() < 1e-13);
        }
    }

    #[test]
    fn cat_localization_is_linear() {
        let cat = system("cat", &[]).unwrap();
        for eps in [0.1, 0.01] {
            let seq = localize(&cat, pt(0.31, 0.47), 3, eps).unwrap();
            let v = pt(0.9, -0.4);
            for k in 1..=3 {
                let w = seq.step(k).unwrap().value(v);
                assert!((w - Mat2::new(2.0, 1.0, 1.0, 1.0) * v).norm() < 1e-12);
                assert!(seq.step(k).unwrap().value(Point::zeros()).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn chart_too_large() {
        let cat = system("cat", &[]).unwrap();
        assert!(matches!(localize(&cat, pt(0.0, 0.0), 2, 0.2), Err(Error::ChartTooLarge { .. })));
    }

    #[test]
    fn henon_second_derivative_scales() {
        let henon = system("henon", &[]).unwrap();
        let eps = 1e-2;
        let seq = localize(&henon, pt(0.1, 0.1), 5, eps).unwrap();
        let d2 = henon.analytic_norm(2).unwrap();
        for k in 1..=5 {
            let step = seq.step(k).unwrap();
            for v in [pt(0.0, 0.0), pt(1.0, 0.3), pt(-0.9, 0.9)] {
                let h = 1e-4;
                // finite-difference oracle of the second derivative along e_x
                let e = pt(h, 0.0);
                let fd = (step.value(v + e) - step.value(v) * 2.0 + step.value(v - e)) / (h * h);
                assert!(fd.norm() <= eps * d2 * (1.0 + 1e-4));
                assert!(norm2(&step.jet(v).d2) <= eps * d2 * (1.0 + 1e-12));
            }
        }
    }

    #[test]
    fn incremental_equals_direct_composition() {
        let map = system("standard", &[("k", 0.8)]).unwrap();
        let seq = localize(&map, pt(0.3, 0.6), 6, 0.05).unwrap();
        let v = pt(0.5, 0.2);
        let orbit = seq.orbit(v, 6).unwrap();
        for n in 0..=6 {
            assert!((orbit[n] - seq.compose(v, n).unwrap()).norm() < 1e-9);
        }
    }

    #[test]
    fn horizon_error() {
        let seq = MapSequence::finite(vec![StepMap::Linear(Mat2::identity())]);
        assert!(matches!(seq.step(2), Err(Error::Horizon { .. })));
    }
}
