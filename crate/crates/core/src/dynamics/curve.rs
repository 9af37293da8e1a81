//! Parametrized planar curves `[0,1] -> R^2` with jets up to order three.

use serde::{Deserialize, Serialize};

use super::jet::CurveJet;
use crate::geometry::Point;

/// Anything that can report the jet of a curve at a parameter.
pub trait CurveLike: Send + Sync {
    fn jet(&self, t: f64) -> CurveJet;

    fn value(&self, t: f64) -> Point {
        self.jet(t)[0]
    }

    fn velocity(&self, t: f64) -> Point {
        self.jet(t)[1]
    }
}

impl<C: CurveLike + ?Sized> CurveLike for &C {
    fn jet(&self, t: f64) -> CurveJet {
        (**self).jet(t)
    }
}

/// One summand of a curve component.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Term {
    /// `sum_i c[i] t^i`
    Poly(Vec<f64>),
    /// `amp * sin(freq * t + phase)`
    Sin { amp: f64, freq: f64, phase: f64 },
}

impl Term {
    fn derivatives(&self, t: f64) -> [f64; 4] {
        match self {
            Term::Poly(c) => {
                let mut out = [0.0; 4];
                // repeated synthetic division gives p^(k)(t) / k!
                let mut coeffs = c.clone();
                let mut fact = 1.0;
                for (k, o) in out.iter_mut().enumerate() {
                    if coeffs.is_empty() {
                        break;
                    }
                    let mut acc = 0.0;
                    let mut quotient = vec![0.0; coeffs.len().saturating_sub(1)];
                    for i in (0..coeffs.len()).rev() {
                        acc = acc * t + coeffs[i];
                        if i > 0 {
                            quotient[i - 1] = acc;
                        }
                    }
                    if k > 0 {
                        fact *= k as f64;
                    }
                    *o = acc * fact;
                    coeffs = quotient;
                }
                out
            }
            Term::Sin { amp, freq, phase } => {
                let w = freq * t + phase;
                let (s, c) = w.sin_cos();
                [amp * s, amp * freq * c, -amp * freq * freq * s, -amp * freq.powi(3) * c]
            }
        }
    }
}

/// A planar curve whose coordinates are finite sums of polynomial and
/// sinusoidal terms.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Curve {
    pub x: Vec<Term>,
    pub y: Vec<Term>,
}

impl Curve {
    pub fn new(x: Vec<Term>, y: Vec<Term>) -> Self {
        Curve { x, y }
    }

    /// Polynomial coordinates (coefficients in increasing degree).
    pub fn polynomial(x: Vec<f64>, y: Vec<f64>) -> Self {
        Curve { x: vec![Term::Poly(x)], y: vec![Term::Poly(y)] }
    }

    /// `t -> p + t v`
    pub fn segment(p: Point, v: Point) -> Self {
        Curve::polynomial(vec![p.x, v.x], vec![p.y, v.y])
    }

    /// `t -> c + rho (cos 2 pi t, sin 2 pi t)`
    pub fn circle(c: Point, rho: f64) -> Self {
        let tau = 2.0 * std::f64::consts::PI;
        Curve {
            x: vec![Term::Poly(vec![c.x]), Term::Sin { amp: rho, freq: tau, phase: tau / 4.0 }],
            y: vec![Term::Poly(vec![c.y]), Term::Sin { amp: rho, freq: tau, phase: 0.0 }],
        }
    }
}

fn component(terms: &[Term], t: f64) -> [f64; 4] {
    let mut out = [0.0; 4];
    for term in terms {
        for (o, d) in out.iter_mut().zip(term.derivatives(t)) {
            *o += d;
        }
    }
    out
}

impl CurveLike for Curve {
    fn jet(&self, t: f64) -> CurveJet {
        let x = component(&self.x, t);
        let y = component(&self.y, t);
        std::array::from_fn(|k| Point::new(x[k], y[k]))
    }
}

/// `c o phi` for the affine chart `phi(t) = lo + (hi - lo) t`.
#[derive(Clone, Copy)]
pub struct Reparam<C> {
    pub curve: C,
    pub lo: f64,
    pub hi: f64,
}

impl<C: CurveLike> CurveLike for Reparam<C> {
    fn jet(&self, t: f64) -> CurveJet {
        let h = self.hi - self.lo;
        let j = self.curve.jet(self.lo + h * t);
        [j[0], j[1] * h, j[2] * (h * h), j[3] * (h * h * h)]
    }
}

/// The derivative `c'` viewed as a curve. Its order-3 entry is unavailable
/// and reported as NaN.
#[derive(Clone, Copy)]
pub struct Derivative<C>(pub C);

impl<C: CurveLike> CurveLike for Derivative<C> {
    fn jet(&self, t: f64) -> CurveJet {
        let j = self.0.jet(t);
        [j[1], j[2], j[3], Point::new(f64::NAN, f64::NAN)]
    }
}

/// A curve sampled from a closure; handy for tests and for the
/// Landau-Kolmogorov corpus.
pub struct FnCurve<F>(pub F);

impl<F: Fn(f64) -> CurveJet + Send + Sync> CurveLike for FnCurve<F> {
    fn jet(&self, t: f64) -> CurveJet {
        (self.0)(t)
    }
}
