//! Lyapunov exponents, Birkhoff averages of `log+ |DT|`, and exterior-power
//! growth rates.

use rayon::prelude::*;
use serde::Serialize;

use crate::dynamics::{evaluate_orbit, OrbitSample, SmoothMap};
use crate::error::{Error, Result};
use crate::geometry::{log_plus, singular_values, spectral_norm, Mat2, Point};

/// Default truncation of the infimum over `n`.
pub const DEFAULT_N_MAX: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LyapunovMethod {
    QrRecursion,
    ExteriorPower,
}

#[derive(Clone, Debug, Serialize)]
pub struct LyapunovReport {
    /// `(chi_1, chi_2)` sorted nonincreasing; `chi_2` may be `-inf`.
    pub exponents: [f64; 2],
    pub n_used: usize,
    pub method: LyapunovMethod,
    /// `(chi_1, chi_2)` after each step.
    pub convergence_trace: Vec<[f64; 2]>,
    /// True when the cocycle became singular to machine precision.
    pub singular: bool,
}

impl LyapunovReport {
    pub fn positive_sum(&self) -> f64 {
        self.exponents.iter().map(|c| c.max(0.0)).sum()
    }

    pub fn top_positive(&self) -> f64 {
        self.exponents[0].max(0.0)
    }
}

/// `(1/n) sum_{j<n} log+ |D_{T^j x} T|` with the spectral norm.
pub fn log_plus_average(map: &SmoothMap, x: Point, n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::Domain("log_plus_average needs n >= 1".into()));
    }
    let orbit = evaluate_orbit(map, x, n - 1)?;
    let sum: f64 = orbit.iter().map(|p| log_plus(spectral_norm(&map.derivative(*p)))).sum();
    Ok(sum / n as f64)
}

/// Lyapunov exponents from `D_x T^n` by QR recursion, re-orthonormalizing
/// after every step.
///
/// The cocycle is kept as `Q_n R_n` with `R_n` upper triangular and
/// renormalized by its largest entry, so `chi_1` is the exact spectral norm
/// of the (implicitly formed) product and `chi_1 + chi_2` its log-determinant.
pub fn lyapunov_spectrum(map: &SmoothMap, x: Point, n: usize) -> Result<LyapunovReport> {
    if n < 10 {
        return Err(Error::Domain(format!("lyapunov_spectrum needs n >= 10, got {n}")));
    }
    let orbit = evaluate_orbit(map, x, n - 1)?;
    let mut q = Mat2::identity();
    let mut r = Mat2::identity();
    let mut log_scale = 0.0;
    let mut log_det = 0.0;
    let mut singular = false;
    let mut trace = Vec::with_capacity(n);
    for (i, p) in orbit.iter().enumerate() {
        let d = map.derivative(*p);
        let det = d.determinant().abs();
        if det == 0.0 || !det.is_finite() {
            singular = true;
        } else {
            log_det += det.ln();
        }
        let qr = (d * q).qr();
        let (qn, rn) = (qr.q(), qr.r());
        // fix signs so that R has a nonnegative diagonal
        let mut s = Mat2::identity();
        for k in 0..2 {
            if rn[(k, k)] < 0.0 {
                s[(k, k)] = -1.0;
            }
        }
        q = qn * s;
        r = (s * rn) * r;
        let m = r.abs().max();
        if m > 0.0 {
            r /= m;
            log_scale += m.ln();
        }
        let steps = (i + 1) as f64;
        let chi1 = (log_scale + spectral_norm(&r).ln()) / steps;
        let chi2 = if singular { f64::NEG_INFINITY } else { log_det / steps - chi1 };
        trace.push([chi1, chi2]);
    }
    let last = *trace.last().expect("n >= 10");
    Ok(LyapunovReport {
        exponents: last,
        n_used: n,
        method: LyapunovMethod::QrRecursion,
        convergence_trace: trace,
        singular,
    })
}

/// `max_{k <= e} log+ |Lambda^k M|`; in dimension two `|Lambda^2 M| = |det M|`.
pub fn exterior_log_norm(m: &Mat2, e: usize) -> f64 {
    let (s1, s2) = singular_values(m);
    let one = log_plus(s1);
    if e >= 2 {
        one.max(log_plus(s1 * s2))
    } else {
        one
    }
}

/// Sup-over-grid estimate of `R_e`.
#[derive(Clone, Debug, Serialize)]
pub struct ExteriorGrowth {
    pub value: f64,
    pub e: usize,
    pub n: usize,
    pub grid_points: usize,
    /// Grid points whose orbit left the domain (skipped).
    pub escaped: usize,
    /// Grid index attaining the supremum.
    pub argmax: Option<usize>,
}

/// `sup_x (1/n) max_{k <= e} log+ |Lambda^k D_x T^n|` over the given grid.
pub fn exterior_growth(map: &SmoothMap, e: usize, n: usize, grid: &[Point]) -> Result<ExteriorGrowth> {
    if n == 0 {
        return Err(Error::Domain("exterior_growth needs n >= 1".into()));
    }
    if !(1..=2).contains(&e) {
        return Err(Error::Domain(format!("exterior power must be 1 or 2, got {e}")));
    }
    if grid.is_empty() {
        return Err(Error::Empty("exterior_growth grid".into()));
    }
    let values: Vec<Option<f64>> = grid
        .par_iter()
        .map(|x| {
            crate::dynamics::derivative_cocycle(map, *x, n)
                .ok()
                .map(|m| exterior_log_norm(&m, e) / n as f64)
        })
        .collect();
    let mut best = None::<(usize, f64)>;
    let mut escaped = 0;
    for (i, v) in values.iter().enumerate() {
        match v {
            None => escaped += 1,
            Some(v) => {
                if best.map_or(true, |(_, b)| *v > b) {
                    best = Some((i, *v));
                }
            }
        }
    }
    Ok(ExteriorGrowth {
        value: best.map_or(0.0, |b| b.1),
        e,
        n,
        grid_points: grid.len(),
        escaped,
        argmax: best.map(|b| b.0),
    })
}

/// `n f(n) = sum_x w(x) max_{k<=e} log+ |Lambda^k D_x T^n|` for `n = 1..=n_max`.
pub fn positive_sum_terms(sample: &OrbitSample, map: &SmoothMap, e: usize, n_max: usize) -> Result<Vec<f64>> {
    if sample.is_empty() {
        return Err(Error::Empty("orbit sample".into()));
    }
    let per_point: Vec<Result<Vec<f64>>> = sample
        .iter()
        .collect::<Vec<_>>()
        .par_iter()
        .map(|(x, w)| {
            let orbit = evaluate_orbit(map, *x, n_max.saturating_sub(1))?;
            let mut m = Mat2::identity();
            let mut out = Vec::with_capacity(n_max);
            for p in &orbit[..n_max] {
                m = map.derivative(*p) * m;
                out.push(w * exterior_log_norm(&m, e));
            }
            Ok(out)
        })
        .collect();
    let mut totals = vec![0.0; n_max];
    for terms in per_point {
        for (t, v) in totals.iter_mut().zip(terms?) {
            *t += v;
        }
    }
    Ok(totals)
}

/// Empirical infimum over `n <= n_max` of the averaged exterior growth.
#[derive(Clone, Debug, Serialize)]
pub struct PositiveSum {
    pub value: f64,
    /// The `n` attaining the minimum.
    pub argmin: usize,
    pub n_max: usize,
    /// `f(n)` for `n = 1..=n_max`.
    pub per_n: Vec<f64>,
}

/// `min_{n <= n_max} (1/n) sum_x w(x) max_{k<=e} log+ |Lambda^k D_x T^n|`.
pub fn empirical_positive_sum(map: &SmoothMap, sample: &OrbitSample, e: usize, n_max: usize) -> Result<PositiveSum> {
    if n_max == 0 {
        return Err(Error::Domain("n_max must be positive".into()));
    }
    let totals = positive_sum_terms(sample, map, e, n_max)?;
    let per_n: Vec<f64> = totals.iter().enumerate().map(|(i, t)| t / (i + 1) as f64).collect();
    let (argmin, value) = per_n
        .iter()
        .enumerate()
        .fold((0, f64::INFINITY), |acc, (i, v)| if *v < acc.1 { (i, *v) } else { acc });
    Ok(PositiveSum { value, argmin: argmin + 1, n_max, per_n })
}
