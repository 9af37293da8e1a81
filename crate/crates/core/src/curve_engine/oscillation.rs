use serde::Serialize;

use rand::Rng;

use crate::dynamics::{Curve, CurveLike, DIM};
use crate::error::{Error, Result};
use crate::geometry::Point;

/// The enforced length bound is `TRIM_BOUND_FACTOR * sqrt(3 d)`.
pub const TRIM_BOUND_FACTOR: f64 = 2.0;

const SCAN_POINTS: usize = 10_000;
const BALL_SLACK: f64 = 1e-9;

/// Post-hoc verification of a trimming interval by dense sampling.
#[derive(Clone, Debug, Serialize)]
pub struct OscilleCertificate {
    /// Every sampled parameter with `|s(t)| < 1` lies in `[a, b]`.
    pub covers_unit_ball: bool,
    /// Every sampled point of `s([a, b])` lies in `B(0, sqrt(d) (1 + 1e-9))`.
    pub inside_big_ball: bool,
    /// `(b - a) |s|_1`
    pub length_product: f64,
    /// `2 sqrt(3 d)`
    pub length_bound: f64,
    /// `min |s'| - (2/3) |s|_1` over the samples.
    pub speed_margin: f64,
    pub samples: usize,
    pub holds: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct OscilleTrim {
    pub a: f64,
    pub b: f64,
    /// Parameter whose image lies in the unit ball and orients the cube.
    pub w: f64,
    pub certificate: OscilleCertificate,
}

fn sup_speed<C: CurveLike + ?Sized>(c: &C, samples: usize) -> (f64, f64) {
    let mut hi: f64 = 0.0;
    let mut lo = f64::INFINITY;
    for i in 0..=samples {
        let v = c.velocity(i as f64 / samples as f64).norm();
        hi = hi.max(v);
        lo = lo.min(v);
    }
    (hi, lo)
}

/// Diameter of a planar point set, via projections on 720 directions
/// (a lower estimate within a factor `cos(pi/1440)`).
fn diameter(points: &[Point]) -> f64 {
    const DIRS: usize = 720;
    (0..DIRS)
        .map(|k| {
            let a = std::f64::consts::PI * k as f64 / DIRS as f64;
            let u = Point::new(a.cos(), a.sin());
            let (lo, hi) = points
                .iter()
                .map(|p| p.dot(&u))
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), x| (l.min(x), h.max(x)));
            hi - lo
        })
        .fold(0.0, f64::max)
}

pub(crate) fn check_hypotheses<C: CurveLike + ?Sized>(c: &C) -> Result<()> {
    let pts: Vec<_> = (0..=2000).map(|i| c.jet(i as f64 / 2000.0)).collect();
    if !pts.iter().any(|j| j[0].norm() < 1.0) {
        return Err(Error::Precondition("the curve does not meet the unit ball".into()));
    }
    let speeds: Vec<Point> = pts.iter().map(|j| j[1]).collect();
    let sup = speeds.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let osc = diameter(&speeds);
    if osc > sup / 3.0 * (1.0 + 1e-9) {
        return Err(Error::Precondition(format!(
            "derivative oscillation {osc:.6} exceeds |s|_1 / 3 = {:.6}",
            sup / 3.0
        )));
    }
    Ok(())
}

/// Trimming interval of a curve with nearly constant derivative: the
/// parameter range during which the curve stays in the cube of half-side one
/// aligned with `s'(w)`, where `w` is the smallest sampled parameter with
/// `|s(w)| < 1`.
pub fn oscillation_trim<C: CurveLike + ?Sized>(c: &C) -> Result<OscilleTrim> {
    check_hypotheses(c)?;
    let w = (0..=SCAN_POINTS)
        .map(|i| i as f64 / SCAN_POINTS as f64)
        .find(|t| c.value(*t).norm() < 1.0)
        .ok_or_else(|| Error::Precondition("the curve does not meet the unit ball".into()))?;
    let trim = trim_with_witness(c, w, SCAN_POINTS);
    Ok(OscilleTrim { certificate: certify(c, trim.0, trim.1, SCAN_POINTS), a: trim.0, b: trim.1, w })
}

/// Exit parameters `(a, b)` of the cube aligned with `s'(w)`, scanning
/// outward from `w` on a grid of `scan` steps and refining by bisection.
pub fn trim_with_witness<C: CurveLike + ?Sized>(c: &C, w: f64, scan: usize) -> (f64, f64) {
    let v = c.velocity(w);
    let u = if v.norm() > 0.0 { v / v.norm() } else { Point::new(1.0, 0.0) };
    let perp = Point::new(-u.y, u.x);
    let inside = |t: f64| {
        let p = c.value(t);
        p.dot(&u).abs() <= 1.0 && p.dot(&perp).abs() <= 1.0
    };
    let h = 1.0 / scan as f64;
    let refine = |mut good: f64, mut bad: f64| {
        while (bad - good).abs() > 1e-13 {
            let mid = 0.5 * (good + bad);
            if inside(mid) {
                good = mid;
            } else {
                bad = mid;
            }
        }
        good
    };
    let mut b = 1.0;
    let mut t = w;
    while t < 1.0 {
        let next = (t + h).min(1.0);
        if !inside(next) {
            b = refine(t, next);
            break;
        }
        t = next;
    }
    let mut a = 0.0;
    let mut t = w;
    while t > 0.0 {
        let next = (t - h).max(0.0);
        if !inside(next) {
            a = refine(t, next);
            break;
        }
        t = next;
    }
    (a, b)
}

/// A random quadratic curve satisfying the trimming hypotheses, by rejection:
/// speed in `[0.5, 6]`, bending up to a third of the speed, passing through
/// the unit disk at a random parameter.
pub fn random_oscille_curve<R: Rng>(rng: &mut R) -> Curve {
    loop {
        let speed = rng.random_range(0.5..6.0);
        let a = rng.random_range(0.0..std::f64::consts::TAU);
        let v = Point::new(a.cos(), a.sin()) * speed;
        let b = rng.random_range(0.0..std::f64::consts::TAU);
        let w = Point::new(b.cos(), b.sin()) * rng.random_range(0.0..speed / 6.0);
        let rho = rng.random_range(0.0f64..1.0).sqrt() * 0.99;
        let c = rng.random_range(0.0..std::f64::consts::TAU);
        let p = Point::new(c.cos(), c.sin()) * rho;
        let t0: f64 = rng.random_range(0.0..1.0);
        // p + v (t - t0) + w (t - t0)^2 in powers of t
        let x = vec![p.x - v.x * t0 + w.x * t0 * t0, v.x - 2.0 * w.x * t0, w.x];
        let y = vec![p.y - v.y * t0 + w.y * t0 * t0, v.y - 2.0 * w.y * t0, w.y];
        let curve = Curve::polynomial(x, y);
        if check_hypotheses(&curve).is_ok() {
            return curve;
        }
    }
}

/// Verify a trimming interval on `samples + 1` parameters of `[0,1]` and of `[a,b]`.
pub fn certify<C: CurveLike + ?Sized>(c: &C, a: f64, b: f64, samples: usize) -> OscilleCertificate {
    let d = DIM as f64;
    let (sup, inf) = sup_speed(c, samples);
    let covers_unit_ball = (0..=samples)
        .map(|i| i as f64 / samples as f64)
        .filter(|t| c.value(*t).norm() < 1.0)
        .all(|t| a <= t && t <= b);
    let big = d.sqrt() * (1.0 + BALL_SLACK);
    let inside_big_ball =
        (0..=samples).all(|i| c.value(a + (b - a) * i as f64 / samples as f64).norm() <= big);
    let length_product = (b - a) * sup;
    let length_bound = TRIM_BOUND_FACTOR * (3.0 * d).sqrt();
    OscilleCertificate {
        covers_unit_ball,
        inside_big_ball,
        length_product,
        length_bound,
        speed_margin: inf - 2.0 / 3.0 * sup,
        samples: samples + 1,
        holds: covers_unit_ball && inside_big_ball && length_product <= length_bound,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::pt;
    use rand::SeedableRng;

    #[test]
    fn straight_crossing() {
        let c = Curve::segment(pt(-2.0, 0.0), pt(4.0, 0.0));
        let r = oscillation_trim(&c).unwrap();
        assert!((r.a - 0.25).abs() < 1e-12 && (r.b - 0.75).abs() < 1e-12);
        assert!((r.certificate.length_product - 2.0).abs() < 1e-9);
        assert!(r.certificate.holds);
    }

    #[test]
    fn never_exits() {
        let c = Curve::segment(pt(0.0, 0.0), pt(0.5, 0.0));
        let r = oscillation_trim(&c).unwrap();
        assert_eq!((r.a, r.b), (0.0, 1.0));
        assert!((r.certificate.length_product - 0.5).abs() < 1e-12);
    }

    #[test]
    fn tilted_segment() {
        let c = Curve::segment(pt(-1.0, -0.15), pt(2.0, 0.3));
        let r = oscillation_trim(&c).unwrap();
        assert!(r.certificate.holds, "{:?}", r.certificate);
        // the cube is aligned with the segment, whose distance to the origin
        // along the segment direction is |p| in each direction
        let len = (1.0f64 + 0.15 * 0.15).sqrt();
        let exit = 1.0 / (2.0 * len);
        assert!((r.a - (0.5 - exit)).abs() < 1e-9 && (r.b - (0.5 + exit)).abs() < 1e-9);
    }

    #[test]
    fn hypotheses_are_checked() {
        let far = Curve::segment(pt(3.0, 3.0), pt(1.0, 0.0));
        assert!(matches!(oscillation_trim(&far), Err(Error::Precondition(_))));
        let bent = Curve::circle(pt(0.0, 0.0), 0.5);
        assert!(matches!(oscillation_trim(&bent), Err(Error::Precondition(_))));
    }

    #[test]
    fn random_curves_meet_hypotheses() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let c = random_oscille_curve(&mut rng);
            let r = oscillation_trim(&c).unwrap();
            assert!(r.certificate.holds, "{:?}", r.certificate);
            assert!(r.certificate.speed_margin >= -1e-9);
        }
    }
}
