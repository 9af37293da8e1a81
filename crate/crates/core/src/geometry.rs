//! Small fixed-size linear algebra used throughout: points, 2x2 matrices and
//! the closed-form singular values that feed every norm in the crate.

use nalgebra::{Matrix2, Vector2};

pub type Point = Vector2<f64>;
pub type Mat2 = Matrix2<f64>;

pub fn pt(x: f64, y: f64) -> Point {
    Point::new(x, y)
}

/// Singular values `(s_max, s_min)` of a 2x2 matrix.
///
/// Uses the decomposition into a conformal part `(a+d, c-b)` and an
/// anti-conformal part `(a-d, c+b)`; the singular values are the sum and the
/// absolute difference of their half-lengths. No iteration is involved, so the
/// result is bitwise reproducible.
pub fn singular_values(m: &Mat2) -> (f64, f64) {
    let (a, b, c, d) = (m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]);
    let p = (a + d).hypot(c - b);
    let q = (a - d).hypot(c + b);
    ((p + q) / 2.0, (p - q).abs() / 2.0)
}

/// Spectral (operator) norm of a 2x2 matrix.
pub fn spectral_norm(m: &Mat2) -> f64 {
    singular_values(m).0
}

/// `log+ t = max(log t, 0)` with `log+ 0 = 0`.
pub fn log_plus(t: f64) -> f64 {
    if t > 1.0 {
        t.ln()
    } else {
        0.0
    }
}

/// Largest nonnegative integer `k` with `max(x, 0) >= k`, with values within
/// `1e-12` of an integer snapped onto it first.
pub fn clamped_floor(x: f64) -> u64 {
    if !(x > 0.0) {
        return 0;
    }
    let r = x.round();
    let x = if (x - r).abs() < 1e-12 { r } else { x };
    x.floor() as u64
}

/// Flat distance on the quotient `R^2 / Z^2`.
pub fn torus_distance(p: &Point, q: &Point) -> f64 {
    let mut dx = (p.x - q.x).rem_euclid(1.0);
    let mut dy = (p.y - q.y).rem_euclid(1.0);
    if dx > 0.5 {
        dx = 1.0 - dx;
    }
    if dy > 0.5 {
        dy = 1.0 - dy;
    }
    dx.hypot(dy)
}

/// Reduce a point into `[0, 1)^2`.
pub fn wrap(p: Point) -> Point {
    let w = |v: f64| {
        let r = v.rem_euclid(1.0);
        // rem_euclid can return exactly 1.0 for tiny negative inputs
        if r >= 1.0 {
            0.0
        } else {
            r
        }
    };
    Point::new(w(p.x), w(p.y))
}

/// Least-squares slope and intercept of `ys` against `xs`.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx == 0.0 {
        return (0.0, my);
    }
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn singular_values_match_eigen_decomposition() {
        let m = Mat2::new(2.0, 1.0, 1.0, 1.0);
        let (s1, s2) = singular_values(&m);
        let phi = (3.0 + 5f64.sqrt()) / 2.0;
        assert!((s1 - phi).abs() < 1e-14);
        assert!((s2 - 1.0 / phi).abs() < 1e-14);

        let m = Mat2::new(0.3, -1.7, 2.2, 0.4);
        let (s1, s2) = singular_values(&m);
        let svd = m.svd(false, false);
        let mut sv = [svd.singular_values[0], svd.singular_values[1]];
        sv.sort_by(|a, b| b.partial_cmp(a).unwrap());
        assert!((s1 - sv[0]).abs() < 1e-12);
        assert!((s2 - sv[1]).abs() < 1e-12);
        assert!((s1 * s2 - m.determinant().abs()).abs() < 1e-12);
    }

    #[test]
    fn clamped_floor_conventions() {
        assert_eq!(clamped_floor(-3.2), 0);
        assert_eq!(clamped_floor(0.0), 0);
        assert_eq!(clamped_floor(0.999), 0);
        assert_eq!(clamped_floor(2.0 - 1e-14), 2);
        assert_eq!(clamped_floor(4f64.ln()), 1);
        assert_eq!(clamped_floor(f64::NAN), 0);
    }

    #[test]
    fn torus_distance_is_bounded() {
        let d = torus_distance(&pt(0.0, 0.0), &pt(0.5, 0.5));
        assert!((d - 0.5f64.sqrt()).abs() < 1e-15);
        assert!((torus_distance(&pt(0.05, 0.0), &pt(0.95, 0.0)) - 0.1).abs() < 1e-12);
    }
}
