//! Smooth self-maps of the flat 2-torus or of a planar box.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::jet::{MapJet, Tensor2, ZERO2, ZERO3};
use crate::error::{Error, Result};
use crate::geometry::{spectral_norm, torus_distance, wrap, Mat2, Point};

/// Highest derivative order available from map and curve jets.
pub const MAX_JET_ORDER: usize = 3;

/// Phase space of a map.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Domain {
    /// `R^2 / Z^2` with the flat quotient metric.
    Torus,
    /// Closed square `|p - center|_inf <= radius` with the euclidean metric.
    Box { center: [f64; 2], radius: f64 },
}

impl Domain {
    pub fn contains(&self, p: &Point) -> bool {
        match self {
            Domain::Torus => p.x.is_finite() && p.y.is_finite(),
            Domain::Box { center, radius } => {
                (p.x - center[0]).abs() <= *radius && (p.y - center[1]).abs() <= *radius
            }
        }
    }

    pub fn distance(&self, p: &Point, q: &Point) -> f64 {
        match self {
            Domain::Torus => torus_distance(p, q),
            Domain::Box { .. } => (p - q).norm(),
        }
    }

    /// Radius below which the translation chart is a valid exponential chart.
    pub fn safe_radius(&self) -> f64 {
        match self {
            Domain::Torus => 0.25,
            Domain::Box { radius, .. } => *radius,
        }
    }

    /// Reduce a lifted point to its canonical representative.
    pub fn reduce(&self, p: Point) -> Point {
        match self {
            Domain::Torus => wrap(p),
            Domain::Box { .. } => p,
        }
    }

    /// Chart difference `q - p` in the translation chart at `p`.
    pub fn chart_offset(&self, p: &Point, q: &Point) -> Point {
        let d = q - p;
        match self {
            Domain::Torus => Point::new(d.x - d.x.round(), d.y - d.y.round()),
            Domain::Box { .. } => d,
        }
    }

    /// Side length of the fundamental square.
    pub fn width(&self) -> f64 {
        match self {
            Domain::Torus => 1.0,
            Domain::Box { radius, .. } => 2.0 * radius,
        }
    }

    /// Regular `side x side` grid of sample points (cell centers).
    pub fn grid(&self, side: usize) -> Vec<Point> {
        let (c, w) = match self {
            Domain::Torus => ([0.5, 0.5], 0.5),
            Domain::Box { center, radius } => (*center, *radius),
        };
        let h = 2.0 * w / side as f64;
        let mut out = Vec::with_capacity(side * side);
        for i in 0..side {
            for j in 0..side {
                out.push(Point::new(
                    c[0] - w + (i as f64 + 0.5) * h,
                    c[1] - w + (j as f64 + 0.5) * h,
                ));
            }
        }
        out
    }
}

pub type ValueFn = Arc<dyn Fn(Point) -> Point + Send + Sync>;

#[derive(Clone)]
enum Kind {
    Linear(Mat2),
    Henon { a: f64, b: f64 },
    /// `(x,y) -> (x + y', y')` with `y' = y + (k / 2 pi) sin 2 pi x`
    Standard { k: f64 },
    /// `A(x,y) + (kappa / 2 pi) sin(2 pi x) (1,1)` with `A = [[2,1],[1,1]]`
    PerturbedCat { kappa: f64 },
    /// Value-only evaluator; derivatives by central differences.
    Custom(ValueFn),
}

/// A `C^r` self-map of a torus or box with jets up to order three.
#[derive(Clone)]
pub struct SmoothMap {
    name: String,
    params: BTreeMap<String, f64>,
    kind: Kind,
    domain: Domain,
    r: f64,
    norms: BTreeMap<String, f64>,
}

impl fmt::Debug for SmoothMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SmoothMap")
            .field("name", &self.name)
            .field("params", &self.params)
            .field("domain", &self.domain)
            .field("r", &self.r)
            .finish()
    }
}

const FD_STEP: f64 = 1e-5;

fn param(params: &BTreeMap<String, f64>, key: &str, default: f64) -> Result<f64> {
    match params.get(key) {
        None => Ok(default),
        Some(v) if v.is_finite() => Ok(*v),
        Some(v) => Err(Error::InvalidParameter {
            name: key.to_string(),
            reason: format!("expected a finite real, got {v}"),
        }),
    }
}

fn check_keys(name: &str, params: &BTreeMap<String, f64>, allowed: &[&str]) -> Result<()> {
    for key in params.keys() {
        if !allowed.contains(&key.as_str()) {
            return Err(Error::InvalidParameter {
                name: key.clone(),
                reason: format!("not a parameter of '{name}'"),
            });
        }
    }
    Ok(())
}

/// Names accepted by [`builtin_system`].
pub const BUILTIN_NAMES: [&str; 7] =
    ["cat", "doubling2d", "henon", "standard", "identity", "diag_linear", "perturbed_cat"];

/// Construct one of the built-in example systems with smoothness `r = 2`.
///
/// | name | map | domain | parameters |
/// |---|---|---|---|
/// | `cat` | `(2x+y, x+y)` | torus | |
/// | `doubling2d` | `(2x, 2y)` | torus | |
/// | `identity` | `(x, y)` | torus | |
/// | `henon` | `(1 - a x^2 + y, b x)` | box | `a` (1.4), `b` (0.3), `radius` (2) |
/// | `standard` | `y' = y + k/(2 pi) sin 2 pi x`, `x' = x + y'` | torus | `k` (1) |
/// | `diag_linear` | `(l1 x, l2 y)` | box | `l1` (2), `l2` (0.5), `radius` (1000) |
/// | `perturbed_cat` | cat plus `kappa/(2 pi) sin(2 pi x) (1,1)` | torus | `kappa` (0.1) |
pub fn builtin_system(name: &str, params: &BTreeMap<String, f64>) -> Result<SmoothMap> {
    let box_domain = |radius: f64| -> Result<Domain> {
        if radius > 0.0 {
            Ok(Domain::Box { center: [0.0, 0.0], radius })
        } else {
            Err(Error::InvalidParameter {
                name: "radius".into(),
                reason: "box radius must be positive".into(),
            })
        }
    };
    let (kind, domain) = match name {
        "cat" | "doubling2d" | "identity" => {
            check_keys(name, params, &[])?;
            let m = match name {
                "cat" => Mat2::new(2.0, 1.0, 1.0, 1.0),
                "doubling2d" => Mat2::new(2.0, 0.0, 0.0, 2.0),
                _ => Mat2::identity(),
            };
            (Kind::Linear(m), Domain::Torus)
        }
        "henon" => {
            check_keys(name, params, &["a", "b", "radius"])?;
            let a = param(params, "a", 1.4)?;
            let b = param(params, "b", 0.3)?;
            (Kind::Henon { a, b }, box_domain(param(params, "radius", 2.0)?)?)
        }
        "standard" => {
            check_keys(name, params, &["k"])?;
            (Kind::Standard { k: param(params, "k", 1.0)? }, Domain::Torus)
        }
        "diag_linear" => {
            check_keys(name, params, &["l1", "l2", "radius"])?;
            let l1 = param(params, "l1", 2.0)?;
            let l2 = param(params, "l2", 0.5)?;
            (Kind::Linear(Mat2::new(l1, 0.0, 0.0, l2)), box_domain(param(params, "radius", 1000.0)?)?)
        }
        "perturbed_cat" => {
            check_keys(name, params, &["kappa"])?;
            (Kind::PerturbedCat { kappa: param(params, "kappa", 0.1)? }, Domain::Torus)
        }
        other => return Err(Error::UnknownSystem(other.to_string())),
    };
    Ok(SmoothMap {
        name: name.to_string(),
        params: params.clone(),
        kind,
        domain,
        r: 2.0,
        norms: BTreeMap::new(),
    })
}

/// Convenience wrapper around [`builtin_system`] with `(key, value)` pairs.
pub fn system(name: &str, params: &[(&str, f64)]) -> Result<SmoothMap> {
    let map = params.iter().map(|(k, v)| (k.to_string(), *v)).collect();
    builtin_system(name, &map)
}

impl SmoothMap {
    /// A map on a box or torus given only by its values (lifted to `R^2` for
    /// torus maps). Derivatives use central differences and the map is
    /// flagged as degraded.
    pub fn from_fn(name: &str, domain: Domain, r: f64, f: ValueFn) -> Result<Self> {
        SmoothMap {
            name: name.to_string(),
            params: BTreeMap::new(),
            kind: Kind::Custom(f),
            domain,
            r: 2.0,
            norms: BTreeMap::new(),
        }
        .with_smoothness(r)
    }

    /// A constant-derivative map `p -> m p`.
    pub fn linear(name: &str, m: Mat2, domain: Domain) -> Self {
        SmoothMap {
            name: name.to_string(),
            params: BTreeMap::new(),
            kind: Kind::Linear(m),
            domain,
            r: 2.0,
            norms: BTreeMap::new(),
        }
    }

    pub fn with_smoothness(mut self, r: f64) -> Result<Self> {
        if !(r > 1.0) || !r.is_finite() {
            return Err(Error::InvalidParameter {
                name: "r".into(),
                reason: format!("smoothness must be a finite real > 1, got {r}"),
            });
        }
        self.r = r;
        Ok(self)
    }

    /// Attach user-supplied norm certificates, keyed by the order `s`.
    pub fn with_norms(mut self, norms: BTreeMap<String, f64>) -> Self {
        self.norms = norms;
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn params(&self) -> &BTreeMap<String, f64> {
        &self.params
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn smoothness(&self) -> f64 {
        self.r
    }

    /// True when derivatives come from finite differences.
    pub fn degraded(&self) -> bool {
        matches!(self.kind, Kind::Custom(_))
    }

    /// The constant derivative of a linear map.
    pub fn linear_part(&self) -> Option<Mat2> {
        match &self.kind {
            Kind::Linear(m) => Some(*m),
            _ => None,
        }
    }

    /// Value of the lift at `p` (no reduction modulo `Z^2`).
    pub fn lift(&self, p: Point) -> Point {
        match &self.kind {
            Kind::Linear(m) => m * p,
            Kind::Henon { a, b } => Point::new(1.0 - a * p.x * p.x + p.y, b * p.x),
            Kind::Standard { k } => {
                let y = p.y + k / (2.0 * PI) * (2.0 * PI * p.x).sin();
                Point::new(p.x + y, y)
            }
            Kind::PerturbedCat { kappa } => {
                let s = kappa / (2.0 * PI) * (2.0 * PI * p.x).sin();
                Point::new(2.0 * p.x + p.y + s, p.x + p.y + s)
            }
            Kind::Custom(f) => f(p),
        }
    }

    /// One application of the map followed by reduction to the domain's
    /// canonical representative.
    pub fn apply(&self, p: Point) -> Point {
        self.domain.reduce(self.lift(p))
    }

    pub fn derivative(&self, p: Point) -> Mat2 {
        match &self.kind {
            Kind::Linear(m) => *m,
            Kind::Henon { a, b } => Mat2::new(-2.0 * a * p.x, 1.0, *b, 0.0),
            Kind::Standard { k } => {
                let c = k * (2.0 * PI * p.x).cos();
                Mat2::new(1.0 + c, 1.0, c, 1.0)
            }
            Kind::PerturbedCat { kappa } => {
                let c = kappa * (2.0 * PI * p.x).cos();
                Mat2::new(2.0 + c, 1.0, 1.0 + c, 1.0)
            }
            Kind::Custom(_) => self.fd_derivative(p, FD_STEP),
        }
    }

    fn fd_derivative(&self, p: Point, h: f64) -> Mat2 {
        let ex = Point::new(h, 0.0);
        let ey = Point::new(0.0, h);
        let cx = (self.lift(p + ex) - self.lift(p - ex)) / (2.0 * h);
        let cy = (self.lift(p + ey) - self.lift(p - ey)) / (2.0 * h);
        Mat2::from_columns(&[cx, cy])
    }

    fn fd_second(&self, p: Point, h: f64) -> Tensor2 {
        let mut t = ZERO2;
        for l in 0..2 {
            let mut e = Point::zeros();
            e[l] = h;
            let dp = self.fd_derivative(p + e, FD_STEP);
            let dm = self.fd_derivative(p - e, FD_STEP);
            for i in 0..2 {
                for j in 0..2 {
                    t[i][j][l] = (dp[(i, j)] - dm[(i, j)]) / (2.0 * h);
                }
            }
        }
        t
    }

    /// Value and derivatives up to order three of the lift at `p`.
    pub fn jet(&self, p: Point) -> MapJet {
        let value = self.lift(p);
        let d1 = self.derivative(p);
        let (d2, d3) = match &self.kind {
            Kind::Linear(_) => (ZERO2, ZERO3),
            Kind::Henon { a, .. } => {
                let mut d2 = ZERO2;
                d2[0][0][0] = -2.0 * a;
                (d2, ZERO3)
            }
            Kind::Standard { k: c } | Kind::PerturbedCat { kappa: c } => {
                let w = 2.0 * PI * p.x;
                let mut d2 = ZERO2;
                let mut d3 = ZERO3;
                for i in 0..2 {
                    d2[i][0][0] = -2.0 * PI * c * w.sin();
                    d3[i][0][0][0] = -4.0 * PI * PI * c * w.cos();
                }
                (d2, d3)
            }
            Kind::Custom(_) => {
                let h2 = 1e-4;
                let h3 = 1e-3;
                let d2 = self.fd_second(p, h2);
                let mut d3 = ZERO3;
                for l in 0..2 {
                    let mut e = Point::zeros();
                    e[l] = h3;
                    let sp = self.fd_second(p + e, h2);
                    let sm = self.fd_second(p - e, h2);
                    for i in 0..2 {
                        for j in 0..2 {
                            for k in 0..2 {
                                d3[i][j][k][l] = (sp[i][j][k] - sm[i][j][k]) / (2.0 * h3);
                            }
                        }
                    }
                }
                (d2, d3)
            }
        };
        MapJet { value, d1, d2, d3 }
    }

    /// Exact `sup |D^s T|` for integer `s` in `{2, 3}` where the built-in
    /// formula makes it available.
    pub fn analytic_norm(&self, s: usize) -> Option<f64> {
        let sq2 = std::f64::consts::SQRT_2;
        match (&self.kind, s) {
            (Kind::Linear(m), 1) => Some(spectral_norm(m)),
            (Kind::Linear(_), _) if s >= 2 => Some(0.0),
            (Kind::Henon { a, .. }, 2) => Some(2.0 * a.abs()),
            (Kind::Henon { .. }, 3) => Some(0.0),
            (Kind::Standard { k: c } | Kind::PerturbedCat { kappa: c }, 2) => {
                Some(2.0 * PI * c.abs() * sq2)
            }
            (Kind::Standard { k: c } | Kind::PerturbedCat { kappa: c }, 3) => {
                Some(4.0 * PI * PI * c.abs() * sq2)
            }
            _ => None,
        }
    }

    /// Norm certificate `|T|_s`: user-supplied, exact where known, otherwise a
    /// grid estimate.
    pub fn norm_certificate(&self, s: f64) -> Result<f64> {
        if let Some(v) = self.norms.get(&format_order(s)) {
            return Ok(*v);
        }
        if s.fract() == 0.0 && s >= 1.0 {
            if let Some(v) = self.analytic_norm(s as usize) {
                return Ok(v);
            }
        }
        Ok(super::holder::map_norm(self, s, 64)?.value)
    }
}

/// Canonical key used for norm certificates: `"1"`, `"2"`, `"2.5"`.
pub fn format_order(s: f64) -> String {
    if s.fract() == 0.0 {
        format!("{}", s as i64)
    } else {
        format!("{s}")
    }
}

/// Iterates `x, T x, ..., T^n x`, reducing modulo `Z^2` on the torus.
pub fn evaluate_orbit(map: &SmoothMap, x: Point, n: usize) -> Result<Vec<Point>> {
    let domain = map.domain();
    let mut p = domain.reduce(x);
    if !domain.contains(&p) {
        return Err(Error::Escape { index: 0, x: p.x, y: p.y });
    }
    let mut out = Vec::with_capacity(n + 1);
    out.push(p);
    for index in 1..=n {
        p = map.apply(p);
        if !domain.contains(&p) {
            return Err(Error::Escape { index, x: p.x, y: p.y });
        }
        out.push(p);
    }
    Ok(out)
}

/// `D_x T^n = D_{T^{n-1}x} T ... D_x T`.
pub fn derivative_cocycle(map: &SmoothMap, x: Point, n: usize) -> Result<Mat2> {
    let orbit = evaluate_orbit(map, x, n)?;
    Ok(orbit[..n].iter().fold(Mat2::identity(), |acc, p| map.derivative(*p) * acc))
}
