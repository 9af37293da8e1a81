use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{Curve, CurveLike, CurveSamples};
use crate::error::Result;

const SAMPLES: usize = 1024;

#[derive(Clone, Debug, Serialize)]
pub struct LandauCheck {
    pub s: f64,
    /// `|g|_k / (|g|_0 + |g|_s)` for `k = 0..=[s]`.
    pub ratios: Vec<f64>,
    pub norm0: f64,
    pub norm_s: f64,
    pub c_cal: f64,
    pub holds: bool,
}

/// Grid check of `|g|_k <= C (|g|_0 + |g|_s)` for `k = 0, ..., [s]`.
pub fn landau_kolmogorov_check<C: CurveLike + ?Sized>(g: &C, s: f64, c_cal: f64) -> Result<LandauCheck> {
    let samples = CurveSamples::new(g, SAMPLES);
    landau_from_samples(&samples, s, c_cal)
}

pub(crate) fn landau_from_samples(samples: &CurveSamples, s: f64, c_cal: f64) -> Result<LandauCheck> {
    let norm0 = samples.norm(0.0)?;
    let norm_s = samples.norm(s)?;
    let denom = norm0 + norm_s;
    let top = s.floor() as usize;
    let mut ratios = Vec::with_capacity(top + 1);
    for k in 0..=top {
        let nk = samples.norm(k as f64)?;
        ratios.push(if denom > 0.0 { nk / denom } else { 0.0 });
    }
    let holds = ratios.iter().all(|r| *r <= c_cal);
    Ok(LandauCheck { s, ratios, norm0, norm_s, c_cal, holds })
}

/// A polynomial curve of random degree at most `max_degree` with
/// coefficients uniform in `[-1, 1]`, in powers of `t - 1/2`.
pub fn random_polynomial_curve<R: Rng>(rng: &mut R, max_degree: usize) -> Curve {
    let deg = rng.random_range(0..=max_degree);
    let mut coords = [Vec::new(), Vec::new()];
    for c in &mut coords {
        let centered: Vec<f64> = (0..=deg).map(|_| rng.random_range(-1.0..=1.0)).collect();
        // expand sum_j a_j (t - 1/2)^j into monomials of t
        let mut mono = vec![0.0; deg + 1];
        for (j, a) in centered.iter().enumerate() {
            let mut binom = 1.0;
            for i in 0..=j {
                mono[i] += a * binom * (-0.5f64).powi((j - i) as i32);
                binom = binom * (j - i) as f64 / (i + 1) as f64;
            }
        }
        *c = mono;
    }
    let [x, y] = coords;
    Curve::polynomial(x, y)
}

/// Calibrated Landau-Kolmogorov constant for one order `s` in dimension two.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LandauCalibration {
    pub s: f64,
    pub d: usize,
    pub corpus: usize,
    pub max_degree: usize,
    pub seed: u64,
    pub max_ratio: f64,
    pub safety: f64,
    pub c_cal: f64,
}

/// Largest ratio over a seeded corpus of random polynomial curves, times a
/// safety factor of two.
pub fn calibrate_landau_kolmogorov(s: f64, corpus: usize, max_degree: usize, seed: u64) -> Result<LandauCalibration> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let curves: Vec<Curve> = (0..corpus).map(|_| random_polynomial_curve(&mut rng, max_degree)).collect();
    let ratios: Vec<f64> = curves
        .par_iter()
        .map(|c| {
            let check = landau_kolmogorov_check(c, s, f64::INFINITY)?;
            Ok(check.ratios.iter().cloned().fold(0.0, f64::max))
        })
        .collect::<Result<_>>()?;
    let max_ratio = ratios.iter().cloned().fold(0.0, f64::max);
    let safety = 2.0;
    Ok(LandauCalibration { s, d: 2, corpus, max_degree, seed, max_ratio, safety, c_cal: safety * max_ratio })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::FnCurve;
    use crate::geometry::Point;

    #[test]
    fn parabola_ratio() {
        let g = Curve::polynomial(vec![0.0, 0.0, 1.0], vec![0.0]);
        let c = landau_kolmogorov_check(&g, 2.0, 4.0).unwrap();
        assert!((c.norm0 - 1.0).abs() < 1e-12 && (c.norm_s - 2.0).abs() < 1e-12);
        assert!((c.ratios[1] - 2.0 / 3.0).abs() < 1e-12);
        assert!(c.holds);
    }

    #[test]
    fn constant_ratios_vanish() {
        let g = Curve::polynomial(vec![0.0], vec![0.0]);
        let c = landau_kolmogorov_check(&g, 1.5, 1.0).unwrap();
        assert!(c.ratios.iter().all(|r| *r == 0.0));
    }

    #[test]
    fn circle_ratio() {
        let g = FnCurve(|t: f64| {
            let (s, c) = (8.0 * t).sin_cos();
            [
                Point::new(s, c),
                Point::new(8.0 * c, -8.0 * s),
                Point::new(-64.0 * s, -64.0 * c),
                Point::new(-512.0 * c, 512.0 * s),
            ]
        });
        let c = landau_kolmogorov_check(&g, 2.0, 4.0).unwrap();
        assert!((c.ratios[1] - 8.0 / 65.0).abs() < 1e-9);
    }

    #[test]
    fn centered_expansion() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let c = random_polynomial_curve(&mut rng, 6);
            let v = c.value(0.5);
            assert!(v.x.abs() <= 1.0 && v.y.abs() <= 1.0);
        }
    }
}
