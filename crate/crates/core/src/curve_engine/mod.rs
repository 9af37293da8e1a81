//! Curve iteration: arclength, hyperbolic-time sets, local volume growth,
//! oscillation trimming and Landau-Kolmogorov ratios.

mod landau;
mod oscillation;

pub use landau::{
    calibrate_landau_kolmogorov, landau_kolmogorov_check, random_polynomial_curve, LandauCalibration, LandauCheck,
};
pub use oscillation::{oscillation_trim, random_oscille_curve, trim_with_witness, OscilleCertificate, OscilleTrim, TRIM_BOUND_FACTOR};

use rayon::prelude::*;
use serde::Serialize;

use crate::dynamics::{CurveJet, CurveLike, Iterated, MapSequence, DIM};
use crate::error::{Error, Result};

/// Growth parameters `(chi, gamma, C)` of a hyperbolic-time set.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct HyperbolicParams {
    pub chi: f64,
    pub gamma: f64,
    pub c: f64,
}

impl HyperbolicParams {
    pub fn new(chi: f64, gamma: f64, c: f64) -> Result<Self> {
        let p = HyperbolicParams { chi, gamma, c };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.chi > 0.0) {
            return Err(Error::Precondition(format!("chi = {} must be positive", self.chi)));
        }
        if !(self.gamma > 0.0) {
            return Err(Error::Precondition(format!("gamma = {} must be positive", self.gamma)));
        }
        if !(self.c > 1.0) {
            return Err(Error::Precondition(format!("C = {} must exceed 1", self.c)));
        }
        Ok(())
    }

    /// `C^-1 e^{(chi-gamma) i} <= |v| <= C e^{(chi+gamma) i}`
    pub fn admits(&self, i: usize, norm: f64) -> bool {
        let i = i as f64;
        let lo = ((self.chi - self.gamma) * i).exp() / self.c;
        let hi = ((self.chi + self.gamma) * i).exp() * self.c;
        lo <= norm && norm <= hi
    }
}

/// `sqrt(d)`, the radius of the domain ball of sequence maps.
pub fn ball_radius() -> f64 {
    (DIM as f64).sqrt()
}

/// Membership of a parameter in the hyperbolic-time set at level `n`, from
/// jets `jets[k]` of `T^k o s` for `k = 0..=n`.
pub fn hyperbolic_at(jets: &[CurveJet], p: HyperbolicParams, n: usize) -> bool {
    let rho = ball_radius();
    (0..n).all(|k| jets[k][0].norm() < rho) && (1..=n).all(|i| p.admits(i, jets[i][1].norm()))
}

/// Sorted, pairwise disjoint closed intervals inside `[0,1]`.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct IntervalUnion(pub Vec<(f64, f64)>);

impl IntervalUnion {
    pub fn full() -> Self {
        IntervalUnion(vec![(0.0, 1.0)])
    }

    /// Merge the marked cells of a uniform partition of `[0,1]`.
    pub fn from_cells(marks: &[bool]) -> Self {
        let n = marks.len();
        let mut out = Vec::new();
        let mut start = None;
        for (i, m) in marks.iter().enumerate() {
            match (m, start) {
                (true, None) => start = Some(i),
                (false, Some(s)) => {
                    out.push((s as f64 / n as f64, i as f64 / n as f64));
                    start = None;
                }
                _ => {}
            }
        }
        if let Some(s) = start {
            out.push((s as f64 / n as f64, 1.0));
        }
        IntervalUnion(out)
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn measure(&self) -> f64 {
        self.0.iter().map(|(a, b)| b - a).sum()
    }

    pub fn contains(&self, t: f64) -> bool {
        self.0.iter().any(|(a, b)| *a <= t && t <= *b)
    }
}

/// Cell-level approximation of a parameter set: `inner` cells have every
/// sample inside, `outer` cells have at least one.
#[derive(Clone, Debug, Serialize)]
pub struct CellSet {
    pub inner: IntervalUnion,
    pub outer: IntervalUnion,
    pub cells: usize,
    #[serde(skip)]
    pub inner_cells: Vec<bool>,
    #[serde(skip)]
    pub outer_cells: Vec<bool>,
}

impl CellSet {
    /// Evaluate a predicate at the endpoints and midpoint of each of `cells`
    /// cells.
    pub fn from_predicate<F>(cells: usize, pred: F) -> Result<Self>
    where
        F: Fn(f64) -> Result<bool> + Sync,
    {
        let cells = cells.max(1);
        let points = 2 * cells + 1;
        let marks: Vec<bool> = (0..points)
            .into_par_iter()
            .map(|i| pred(i as f64 / (points - 1) as f64))
            .collect::<Result<_>>()?;
        let inner_cells: Vec<bool> =
            (0..cells).map(|c| marks[2 * c] && marks[2 * c + 1] && marks[2 * c + 2]).collect();
        let outer_cells: Vec<bool> =
            (0..cells).map(|c| marks[2 * c] || marks[2 * c + 1] || marks[2 * c + 2]).collect();
        Ok(CellSet {
            inner: IntervalUnion::from_cells(&inner_cells),
            outer: IntervalUnion::from_cells(&outer_cells),
            cells,
            inner_cells,
            outer_cells,
        })
    }
}

/// Arclength of `c` over a union of parameter intervals, by double
/// exponential quadrature on a fixed partition (absolute tolerance `1e-6`).
pub fn curve_length<C: CurveLike + ?Sized>(c: &C, restriction: &IntervalUnion) -> Result<f64> {
    let mut total = 0.0;
    for &(a, b) in &restriction.0 {
        if !(0.0 <= a && a <= b && b <= 1.0) {
            return Err(Error::Domain(format!("interval [{a}, {b}] is not inside [0,1]")));
        }
        let pieces = (((b - a) * 64.0).ceil() as usize).max(1);
        let h = (b - a) / pieces as f64;
        let tol = 1e-7 / pieces as f64;
        for i in 0..pieces {
            let lo = a + i as f64 * h;
            let out = quadrature::integrate(|t| c.velocity(t).norm(), lo, lo + h, tol);
            total += out.integral;
        }
    }
    Ok(total)
}

/// Hyperbolic-time set `H^n(s, chi, gamma, C)` on a grid of `cells` cells.
pub fn hyperbolic_time_set<C: CurveLike + ?Sized>(
    maps: &MapSequence,
    sigma: &C,
    p: HyperbolicParams,
    n: usize,
    cells: usize,
) -> Result<CellSet> {
    p.validate()?;
    CellSet::from_predicate(cells, |t| {
        let jets = maps.curve_jets(sigma, t, n)?;
        Ok(hyperbolic_at(&jets, p, n))
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct VolumeGrowthReport {
    pub n: usize,
    /// `|T^{n-1} o s|` over the whole parameter interval.
    pub raw_length: f64,
    /// Length over the inner cells of the restriction.
    pub inner: f64,
    /// Length over the outer cells of the restriction.
    pub outer: f64,
    pub restriction: CellSet,
    pub params: HyperbolicParams,
    /// Bowen radius in the coordinates of the sequence.
    pub radius: f64,
}

/// Length of `T^{n-1} o s` restricted to hyperbolic times whose orbit stays in
/// the Bowen ball `B(n, radius)` of the sequence. For a sequence localized at
/// `x` with scale `eps`, radius one corresponds to `B(x, n, eps)`.
pub fn local_volume_growth<C: CurveLike + ?Sized>(
    maps: &MapSequence,
    sigma: &C,
    p: HyperbolicParams,
    n: usize,
    radius: f64,
    cells: usize,
) -> Result<VolumeGrowthReport> {
    p.validate()?;
    if n == 0 {
        return Err(Error::Domain("local_volume_growth needs n >= 1".into()));
    }
    let restriction = CellSet::from_predicate(cells, |t| {
        let jets = maps.curve_jets(sigma, t, n)?;
        Ok(hyperbolic_at(&jets, p, n) && (0..n).all(|k| jets[k][0].norm() < radius))
    })?;
    let image = Iterated { seq: maps, curve: sigma, k: n - 1 };
    Ok(VolumeGrowthReport {
        n,
        raw_length: curve_length(&image, &IntervalUnion::full())?,
        inner: curve_length(&image, &restriction.inner)?,
        outer: curve_length(&image, &restriction.outer)?,
        restriction,
        params: p,
        radius,
    })
}
