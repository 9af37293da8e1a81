use rayon::prelude::*;
use serde::Serialize;

use super::{oscillation_ladder, regularity_ladder, ChartFamily, Target, TOLERANCE};
use crate::combinatorics::DefectSequence;
use crate::dynamics::{CurveJet, CurveLike, CurveSamples, MapSequence, DIM};
use crate::error::Result;

const CHART_INTERVALS: usize = 256;

#[derive(Clone, Debug, Serialize)]
pub struct PropertyCheck {
    pub pass: bool,
    /// Worst sampled value of the checked quantity.
    pub worst: f64,
    pub limit: f64,
    pub worst_chart: Option<usize>,
    pub detail: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct CoverCheck {
    pub pass: bool,
    pub points: usize,
    pub misses: usize,
    pub first_miss: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct CountCheck {
    pub pass: bool,
    pub log_count: f64,
    pub bound: f64,
}

/// Outcome of the five chart-family properties.
#[derive(Clone, Debug, Serialize)]
pub struct PropertyReport {
    pub step: usize,
    pub charts: usize,
    pub tolerance: f64,
    /// (i) `s o phi([0,1]) c B(n + 1, sqrt(d))`.
    pub image: PropertyCheck,
    /// (ii) `|T^k o s o phi|_s <= 1` for `k <= n` and `s = 1, min(2, r), ..., [r], r`.
    pub regularity: PropertyCheck,
    /// (iii) `|(T^n o s)' o phi|_s <= |(T^n o s)' o phi|_0 / 3`.
    pub oscillation: PropertyCheck,
    /// (iv) grid cover of `H(K_{n-1}) n s^-1(B(n + 1, 1))`.
    pub cover: CoverCheck,
    /// (v) `log #G_n <= B + A n + sum k_i / (r - 1)` with the fitted constants.
    pub count: CountCheck,
    pub all_pass: bool,
}

fn check(worst: (f64, Option<usize>, String), limit: f64) -> PropertyCheck {
    PropertyCheck { pass: worst.0 <= limit, worst: worst.0, limit, worst_chart: worst.1, detail: worst.2 }
}

fn scaled(jets: &[Vec<CurveJet>], k: usize, h: f64) -> Vec<CurveJet> {
    jets.iter().map(|j| [j[k][0], j[k][1] * h, j[k][2] * (h * h), j[k][3] * (h * h * h)]).collect()
}

/// Check properties (i)-(v) of `family` by sampling every chart at 257
/// parameters and the target set on a zoomed grid of `grid` points.
pub fn verify_chart_properties<C: CurveLike + ?Sized>(
    family: &ChartFamily,
    maps: &MapSequence,
    sigma: &C,
    kseq: &DefectSequence,
    r: f64,
    grid: usize,
) -> Result<PropertyReport> {
    let n = family.step;
    let big = (DIM as f64).sqrt();
    let reg = regularity_ladder(r);
    let osc = oscillation_ladder(r);
    type Worst = (f64, Option<usize>, String);
    let per_chart: Vec<(Worst, Worst, Worst)> = family
        .charts
        .par_iter()
        .enumerate()
        .map(|(ci, chart)| -> Result<(Worst, Worst, Worst)> {
            let jets: Vec<Vec<CurveJet>> = (0..=CHART_INTERVALS)
                .map(|i| maps.curve_jets(sigma, chart.at(i as f64 / CHART_INTERVALS as f64), n))
                .collect::<Result<_>>()?;
            let mut image: Worst = (0.0, Some(ci), String::new());
            for j in &jets {
                for (k, jk) in j.iter().enumerate() {
                    let v = jk[0].norm();
                    if v > image.0 {
                        image = (v, Some(ci), format!("k = {k}"));
                    }
                }
            }
            let mut regw: Worst = (0.0, Some(ci), String::new());
            for k in 0..=n {
                let samples = CurveSamples::from_jets(scaled(&jets, k, chart.len()), 3);
                for &s in &reg {
                    let v = samples.norm(s)?;
                    if v > regw.0 {
                        regw = (v, Some(ci), format!("k = {k}, s = {s}"));
                    }
                }
            }
            // (T^n o s)' o phi: derivatives pick up powers of the chart length
            let h = chart.len();
            let deriv: Vec<CurveJet> =
                jets.iter().map(|j| [j[n][1], j[n][2] * h, j[n][3] * (h * h), j[n][3] * f64::NAN]).collect();
            let samples = CurveSamples::from_jets(deriv, 2);
            let n0 = samples.norm(0.0)?;
            let mut oscw: Worst = (0.0, Some(ci), String::new());
            for &s in &osc {
                let v = samples.norm(s)?;
                let ratio = if v == 0.0 { 0.0 } else { v / n0 };
                if ratio > oscw.0 {
                    oscw = (ratio, Some(ci), format!("s = {s}"));
                }
            }
            Ok((image, regw, oscw))
        })
        .collect::<Result<_>>()?;
    let fold = |sel: fn(&(Worst, Worst, Worst)) -> &Worst| {
        per_chart.iter().map(sel).fold((0.0, None, String::new()), |acc: Worst, w| if w.0 > acc.0 { w.clone() } else { acc })
    };
    let image = check(fold(|x| &x.0), big + TOLERANCE);
    let regularity = check(fold(|x| &x.1), 1.0 + TOLERANCE);
    let oscillation = check(fold(|x| &x.2), 1.0 / 3.0 + TOLERANCE);

    // (iv): the level-n target with class K_{n-1}
    let prefix = if n == 0 { DefectSequence(Vec::new()) } else { kseq.prefix(n - 1) };
    let target = Target::new(maps, sigma, n, prefix, grid)?;
    let misses: Vec<f64> = target
        .points
        .iter()
        .map(|p| p.0)
        .filter(|t| !family.charts.iter().any(|c| c.contains(*t)))
        .collect();
    let cover = CoverCheck {
        pass: misses.is_empty(),
        points: target.points.len(),
        misses: misses.len(),
        first_miss: misses.first().copied(),
    };

    let log_count = (family.len().max(1) as f64).ln();
    let sum: f64 = kseq.0.iter().take(n.saturating_sub(1)).map(|k| *k as f64).sum();
    let bound = family.constants.b + family.constants.a * n as f64 + sum / (r - 1.0);
    let count = CountCheck { pass: family.is_empty() || log_count <= bound + 1e-9, log_count, bound };

    let all_pass = image.pass && regularity.pass && oscillation.pass && cover.pass && count.pass;
    Ok(PropertyReport {
        step: n,
        charts: family.len(),
        tolerance: TOLERANCE,
        image,
        regularity,
        oscillation,
        cover,
        count,
        all_pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::Curve;
    use crate::geometry::{pt, Mat2};
    use crate::reparametrization::AffineChart;

    #[test]
    fn single_chart_fails_regularity_on_expanding_data() {
        let seq = MapSequence::constant_linear(Mat2::new(2.0, 0.0, 0.0, 0.5));
        let sigma = Curve::segment(pt(-0.25, 0.0), pt(0.5, 0.0));
        let k = DefectSequence::ones(3);
        let fam = ChartFamily::from_charts(4, 2.0, k.clone(), vec![AffineChart::root()]);
        let rep = verify_chart_properties(&fam, &seq, &sigma, &k, 2.0, 1_000).unwrap();
        assert!(!rep.regularity.pass);
        // |D(T^4 o s)| = 16 |s'| = 8
        assert!((rep.regularity.worst - 8.0).abs() < 1e-12);
        assert_eq!(rep.regularity.detail, "k = 4, s = 1");
        assert!(!rep.all_pass);
    }
}
