//! The binary entropy function, counts of integer sequences with bounded
//! mean, and defect-of-multiplicativity sequences along iterated curves.

use std::collections::BTreeSet;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};
use rayon::prelude::*;
use serde::Serialize;

use crate::curve_engine::{HyperbolicParams, hyperbolic_at};
use crate::dynamics::{CurveLike, MapSequence};
use crate::error::{Error, Result};
use crate::geometry::{clamped_floor, log_plus, spectral_norm};

/// `H(t) = -(1/t) log(1/t) - (1 - 1/t) log(1 - 1/t)` for `t >= 1`, with
/// `0 log 0 = 0`.
pub fn bernoulli_entropy(t: f64) -> Result<f64> {
    if !(t >= 1.0) {
        return Err(Error::Domain(format!("H(t) is defined for t >= 1, got {t}")));
    }
    let p = 1.0 / t;
    let q = 1.0 - p;
    let term = |x: f64| if x > 0.0 { -x * x.ln() } else { 0.0 };
    Ok(term(p) + term(q))
}

/// `C(nS, n)`: the number of positive-integer `n`-tuples with mean at most `S`.
pub fn count_admitting(n: u64, s: u64) -> Result<BigUint> {
    if n == 0 || s == 0 {
        return Err(Error::Domain(format!("count_admitting needs n, S >= 1, got n = {n}, S = {s}")));
    }
    Ok(binomial(n * s, n))
}

pub fn binomial(m: u64, k: u64) -> BigUint {
    if k > m {
        return BigUint::ZERO;
    }
    let k = k.min(m - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc = acc * BigUint::from(m - i) / BigUint::from(i + 1);
    }
    acc
}

/// Natural logarithm of a (possibly huge) positive integer.
pub fn big_ln(x: &BigUint) -> f64 {
    let bits = x.bits();
    if bits <= 1000 {
        x.to_f64().expect("fits in f64").ln()
    } else {
        let shift = bits - 64;
        (x >> shift).to_f64().expect("64-bit head").ln() + shift as f64 * std::f64::consts::LN_2
    }
}

/// Largest instance [`enumerate_admitting`] accepts.
pub const ENUM_MAX_N: usize = 8;
pub const ENUM_MAX_S: u64 = 5;

/// Streaming lexicographic enumeration of positive-integer tuples of length
/// `n` with sum at most `n S`.
pub struct Admitting {
    current: Option<Vec<u64>>,
    budget: u64,
}

impl Admitting {
    pub fn new(n: usize, s: u64) -> Self {
        let budget = n as u64 * s;
        let start = if n == 0 || s == 0 { None } else { Some(vec![1; n]) };
        Admitting { current: start, budget }
    }
}

impl Iterator for Admitting {
    type Item = Vec<u64>;

    fn next(&mut self) -> Option<Vec<u64>> {
        let out = self.current.clone()?;
        let mut v = out.clone();
        let n = v.len();
        let mut sum: u64 = v.iter().sum();
        // increment the last position that still fits, resetting later ones
        let mut i = n;
        loop {
            if i == 0 {
                self.current = None;
                break;
            }
            i -= 1;
            let tail: u64 = v[i + 1..].iter().map(|x| x - 1).sum();
            sum -= tail;
            for x in &mut v[i + 1..] {
                *x = 1;
            }
            if sum < self.budget {
                v[i] += 1;
                self.current = Some(v);
                break;
            }
            sum -= v[i] - 1;
            v[i] = 1;
        }
        Some(out)
    }
}

/// All admitting tuples in lexicographic order, for `n <= 8`, `S <= 5`.
pub fn enumerate_admitting(n: usize, s: u64) -> Result<Vec<Vec<u64>>> {
    if n > ENUM_MAX_N || s > ENUM_MAX_S {
        return Err(Error::EnumerationTooLarge { n, s });
    }
    if n == 0 || s == 0 {
        return Err(Error::Domain("enumerate_admitting needs n, S >= 1".into()));
    }
    Ok(Admitting::new(n, s).collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BoundCheck {
    pub log_count: f64,
    pub bound: f64,
    pub holds: bool,
}

/// Compares `log C(nS, n)` with `n S H(S) + 1`.
pub fn combinatorial_bound_check(n: u64, s: u64) -> Result<BoundCheck> {
    let log_count = big_ln(&count_admitting(n, s)?);
    let bound = (n * s) as f64 * bernoulli_entropy(s as f64)? + 1.0;
    Ok(BoundCheck { log_count, bound, holds: log_count <= bound })
}

/// `(k_1, ..., k_n)` with every entry at least one.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct DefectSequence(pub Vec<u32>);

impl DefectSequence {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn sum(&self) -> u64 {
        self.0.iter().map(|k| *k as u64).sum()
    }

    /// Whether the mean is at most `s`.
    pub fn admits(&self, s: u64) -> bool {
        self.sum() <= s * self.0.len() as u64
    }

    pub fn prefix(&self, m: usize) -> DefectSequence {
        DefectSequence(self.0[..m].to_vec())
    }

    pub fn ones(n: usize) -> Self {
        DefectSequence(vec![1; n])
    }
}

/// `k_i = [log+ (|D_t(T^i o s)| max(1, |D T_{i+1}|) / |D_t(T^{i+1} o s)|)] + 1`
/// for `i = 1..=n`, from precomputed curve jets `jets[k]` of `T^k o s`.
pub fn defect_from_jets(
    maps: &MapSequence,
    jets: &[crate::dynamics::CurveJet],
    n: usize,
) -> Result<DefectSequence> {
    let mut out = Vec::with_capacity(n);
    for i in 1..=n {
        let num = jets[i][1].norm() * spectral_norm(&maps.step(i + 1)?.derivative(jets[i][0])).max(1.0);
        let den = jets[i + 1][1].norm();
        if den == 0.0 {
            return Err(Error::DegenerateTangency { step: i });
        }
        out.push(clamped_floor(log_plus(num / den)) as u32 + 1);
    }
    Ok(DefectSequence(out))
}

/// The defect sequence `(k_1, ..., k_n)` of the curve at parameter `t`.
///
/// The caller is responsible for the orbit of `s(t)` staying where the
/// sequence's maps are meaningful; the formula is evaluated regardless.
pub fn defect_sequence<C: CurveLike + ?Sized>(
    maps: &MapSequence,
    sigma: &C,
    t: f64,
    n: usize,
) -> Result<DefectSequence> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::Domain(format!("parameter {t} outside [0,1]")));
    }
    let jets = maps.curve_jets(sigma, t, n + 1)?;
    defect_from_jets(maps, &jets, n)
}

/// Smallest integer exceeding `log C / (1 - log 2 - 1/3)`; the denominator is
/// negative, so this is at most zero and every `n >= 1` exceeds it.
pub fn threshold_n(c: f64) -> i64 {
    let x = c.ln() / (1.0 - std::f64::consts::LN_2 - 1.0 / 3.0);
    x.floor() as i64 + 1
}

#[derive(Clone, Debug, Serialize)]
pub struct ClassBound {
    /// Distinct sequences `K_{n-1}` met by sampled hyperbolic times.
    pub observed: usize,
    /// `e^{3n-2} e^{(n-1)(l - chi) H([l - chi] + 3)}` in log form.
    pub log_bound: f64,
    pub bound: f64,
    pub lambda_plus: f64,
    pub hyperbolic_samples: usize,
    pub samples: usize,
    /// True when no sampled parameter was a hyperbolic time.
    pub empty: bool,
    pub classes: Vec<DefectSequence>,
}

/// Counts distinct `K_{n-1}` over sampled hyperbolic times and evaluates the
/// class-count bound with `lambda+_n` of the sequence.
pub fn realized_class_bound<C: CurveLike + ?Sized>(
    maps: &MapSequence,
    sigma: &C,
    params: HyperbolicParams,
    n: usize,
    ts: &[f64],
) -> Result<ClassBound> {
    params.validate()?;
    if !(params.gamma < 1.0 / 3.0) {
        return Err(Error::Precondition(format!("gamma = {} must be < 1/3", params.gamma)));
    }
    if n == 0 || (n as i64) <= threshold_n(params.c) {
        return Err(Error::Precondition(format!("n = {n} must exceed N(C) = {}", threshold_n(params.c) - 1)));
    }
    let found: Vec<Option<DefectSequence>> = ts
        .par_iter()
        .map(|t| -> Result<Option<DefectSequence>> {
            let jets = maps.curve_jets(sigma, *t, n)?;
            if !hyperbolic_at(&jets, params, n) {
                return Ok(None);
            }
            defect_from_jets(maps, &jets, n - 1).map(Some)
        })
        .collect::<Result<_>>()?;
    let hyperbolic_samples = found.iter().flatten().count();
    let classes: BTreeSet<DefectSequence> = found.into_iter().flatten().collect();
    let lambda_plus = maps.lambda_plus(n)?;
    let excess = lambda_plus - params.chi;
    let h = bernoulli_entropy(clamped_floor(excess) as f64 + 3.0)?;
    let log_bound = (3 * n) as f64 - 2.0 + (n - 1) as f64 * excess * h;
    Ok(ClassBound {
        observed: classes.len(),
        log_bound,
        bound: log_bound.exp(),
        lambda_plus,
        hyperbolic_samples,
        samples: ts.len(),
        empty: hyperbolic_samples == 0,
        classes: classes.into_iter().collect(),
    })
}
