use serde::Serialize;

use super::map::{evaluate_orbit, SmoothMap};
use crate::error::{Error, Result};
use crate::geometry::Point;

/// Weighted base points standing in for an invariant measure.
#[derive(Clone, Debug, Serialize)]
pub struct OrbitSample {
    pub points: Vec<[f64; 2]>,
    pub weights: Vec<f64>,
    /// Name of the map whose dynamics produced the sample.
    pub generator: String,
    /// Orbit length used to build the sample (0 for explicit samples).
    pub length: usize,
}

impl OrbitSample {
    /// Equal weights on the given points.
    pub fn uniform(map: &SmoothMap, points: &[Point]) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::Empty("orbit sample".into()));
        }
        let w = 1.0 / points.len() as f64;
        Ok(OrbitSample {
            points: points.iter().map(|p| [p.x, p.y]).collect(),
            weights: vec![w; points.len()],
            generator: map.name().to_string(),
            length: 0,
        })
    }

    /// Empirical measure of the orbit segment `x, ..., T^{length-1} x`.
    pub fn from_orbit(map: &SmoothMap, x: Point, length: usize) -> Result<Self> {
        if length == 0 {
            return Err(Error::Empty("orbit sample".into()));
        }
        let orbit = evaluate_orbit(map, x, length - 1)?;
        let mut s = Self::uniform(map, &orbit)?;
        s.length = length;
        Ok(s)
    }

    pub fn iter(&self) -> impl Iterator<Item = (Point, f64)> + '_ {
        self.points.iter().zip(&self.weights).map(|(p, w)| (Point::new(p[0], p[1]), *w))
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::map::system;
    use crate::geometry::pt;

    #[test]
    fn weights_sum_to_one() {
        let map = system("standard", &[]).unwrap();
        let s = OrbitSample::from_orbit(&map, pt(0.1, 0.2), 37).unwrap();
        let total: f64 = s.weights.iter().sum();
        assert!((total - 1.0).abs() < 1e-12);
        assert!(s.weights.iter().all(|w| *w >= 0.0));
    }
}
