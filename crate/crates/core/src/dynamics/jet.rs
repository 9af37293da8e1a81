//! Second and third derivative tensors of planar maps and the jet of a curve.

use crate::geometry::{Mat2, Point};

/// `t[i][j][k] = d^2 F_i / dx_j dx_k`.
pub type Tensor2 = [[[f64; 2]; 2]; 2];
/// `t[i][j][k][l] = d^3 F_i / dx_j dx_k dx_l`.
pub type Tensor3 = [[[[f64; 2]; 2]; 2]; 2];

pub const ZERO2: Tensor2 = [[[0.0; 2]; 2]; 2];
pub const ZERO3: Tensor3 = [[[[0.0; 2]; 2]; 2]; 2];

/// Value and derivatives up to order three of a planar map at a point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MapJet {
    pub value: Point,
    pub d1: Mat2,
    pub d2: Tensor2,
    pub d3: Tensor3,
}

/// Value and derivatives up to order three of a curve at a parameter;
/// `jet[k]` is the k-th derivative.
pub type CurveJet = [Point; 4];

pub fn apply2(t: &Tensor2, u: &Point, v: &Point) -> Point {
    let mut out = [0.0; 2];
    for (i, o) in out.iter_mut().enumerate() {
        for j in 0..2 {
            for k in 0..2 {
                *o += t[i][j][k] * u[j] * v[k];
            }
        }
    }
    Point::new(out[0], out[1])
}

pub fn apply3(t: &Tensor3, u: &Point, v: &Point, w: &Point) -> Point {
    let mut out = [0.0; 2];
    for (i, o) in out.iter_mut().enumerate() {
        for j in 0..2 {
            for k in 0..2 {
                for l in 0..2 {
                    *o += t[i][j][k][l] * u[j] * v[k] * w[l];
                }
            }
        }
    }
    Point::new(out[0], out[1])
}

const ANGLES: usize = 256;

fn unit(i: usize) -> Point {
    // half circle suffices: the forms below are even or odd in u
    let a = std::f64::consts::PI * i as f64 / ANGLES as f64;
    Point::new(a.cos(), a.sin())
}

/// Operator norm of a symmetric bilinear map, as `sup |t(u,u)|` over sampled
/// unit vectors (equal to the full norm for symmetric forms on a Hilbert space).
pub fn norm2(t: &Tensor2) -> f64 {
    (0..ANGLES)
        .map(|i| {
            let u = unit(i);
            apply2(t, &u, &u).norm()
        })
        .fold(0.0, f64::max)
}

pub fn norm3(t: &Tensor3) -> f64 {
    (0..ANGLES)
        .map(|i| {
            let u = unit(i);
            apply3(t, &u, &u, &u).norm()
        })
        .fold(0.0, f64::max)
}

pub fn scale2(t: &Tensor2, c: f64) -> Tensor2 {
    let mut out = *t;
    out.iter_mut().flatten().flatten().for_each(|x| *x *= c);
    out
}

pub fn scale3(t: &Tensor3, c: f64) -> Tensor3 {
    let mut out = *t;
    out.iter_mut().flatten().flatten().flatten().for_each(|x| *x *= c);
    out
}

pub fn sub2(a: &Tensor2, b: &Tensor2) -> Tensor2 {
    let mut out = *a;
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                out[i][j][k] -= b[i][j][k];
            }
        }
    }
    out
}

impl MapJet {
    /// Jet of `F o c` at a parameter, from the jet of `F` at `c(t)` and the jet of `c`.
    pub fn push(&self, c: &CurveJet) -> CurveJet {
        let (c1, c2, c3) = (&c[1], &c[2], &c[3]);
        let g1 = self.d1 * c1;
        let g2 = apply2(&self.d2, c1, c1) + self.d1 * c2;
        let g3 = apply3(&self.d3, c1, c1, c1) + apply2(&self.d2, c1, c2) * 3.0 + self.d1 * c3;
        [self.value, g1, g2, g3]
    }

    pub fn identity(p: Point) -> Self {
        MapJet { value: p, d1: Mat2::identity(), d2: ZERO2, d3: ZERO3 }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn norm2_of_pure_square() {
        let mut t = ZERO2;
        t[0][0][0] = -2.8;
        assert!((norm2(&t) - 2.8).abs() < 1e-12);
        // (x,y) -> (xy, 0): sup |u_x u_y| = 1/2 on the unit circle
        let mut t = ZERO2;
        t[0][0][1] = 1.0;
        t[0][1][0] = 1.0;
        assert!((norm2(&t) - 1.0).abs() < 1e-3);
    }

    #[test]
    fn push_matches_chain_rule_for_quadratic() {
        // F(x,y) = (x^2, y), c(t) = (t, 0) -> F o c = (t^2, 0)
        let mut d2 = ZERO2;
        d2[0][0][0] = 2.0;
        let t = 0.3;
        let jet = MapJet {
            value: Point::new(t * t, 0.0),
            d1: Mat2::new(2.0 * t, 0.0, 0.0, 1.0),
            d2,
            d3: ZERO3,
        };
        let c = [Point::new(t, 0.0), Point::new(1.0, 0.0), Point::zeros(), Point::zeros()];
        let g = jet.push(&c);
        assert!((g[1].x - 0.6).abs() < 1e-15);
        assert!((g[2].x - 2.0).abs() < 1e-15);
        assert_eq!(g[3].x, 0.0);
    }
}
