//! `(n, delta)`-separated and spanning sets, Bowen balls, and entropy
//! estimates fitted over finite ranges of `n`.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{Domain, SmoothMap};
use crate::error::{Error, Result};
use crate::geometry::{linear_fit, Point};

/// How to build a finite pool of phase points.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PoolSpec {
    /// `side x side` cell-centered grid of the whole domain.
    Grid { side: usize },
    /// `side x side` grid of the square `|p - center|_inf <= half_width`.
    Patch { center: [f64; 2], half_width: f64, side: usize },
    /// Like `Patch`, centered at each base point of a local estimate, with the
    /// base point itself placed first.
    Around { half_width: f64, side: usize },
    /// Uniform random points in the domain (or in `region`, a box).
    Random { count: usize, seed: u64, region: Option<[f64; 3]> },
    Explicit { points: Vec<[f64; 2]> },
}

fn patch(center: Point, half_width: f64, side: usize) -> Vec<Point> {
    let h = 2.0 * half_width / side as f64;
    let mut out = Vec::with_capacity(side * side);
    for i in 0..side {
        for j in 0..side {
            out.push(Point::new(
                center.x - half_width + (i as f64 + 0.5) * h,
                center.y - half_width + (j as f64 + 0.5) * h,
            ));
        }
    }
    out
}

impl PoolSpec {
    /// Materialize the pool; `center` is used by [`PoolSpec::Around`].
    pub fn build(&self, domain: &Domain, center: Option<Point>) -> Result<Vec<Point>> {
        let pts = match self {
            PoolSpec::Grid { side } => domain.grid(*side),
            PoolSpec::Patch { center, half_width, side } => {
                patch(Point::new(center[0], center[1]), *half_width, *side)
            }
            PoolSpec::Around { half_width, side } => {
                let c = center.ok_or_else(|| Error::Precondition("pool 'around' needs a base point".into()))?;
                let mut v = vec![c];
                v.extend(patch(c, *half_width, *side));
                v
            }
            PoolSpec::Random { count, seed, region } => {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                let (c, w) = match (region, domain) {
                    (Some([x, y, r]), _) => ([*x, *y], *r),
                    (None, Domain::Torus) => ([0.5, 0.5], 0.5),
                    (None, Domain::Box { center, radius }) => (*center, *radius),
                };
                (0..*count)
                    .map(|_| {
                        Point::new(
                            c[0] + rng.random_range(-w..w),
                            c[1] + rng.random_range(-w..w),
                        )
                    })
                    .collect()
            }
            PoolSpec::Explicit { points } => points.iter().map(|p| Point::new(p[0], p[1])).collect(),
        };
        Ok(pts.into_iter().map(|p| domain.reduce(p)).collect())
    }
}

/// Orbit segments `T^k p`, `k = 0..len`, of every pool point.
pub struct Orbits {
    domain: Domain,
    len: usize,
    pts: Vec<Point>,
}

impl Orbits {
    pub fn new(map: &SmoothMap, pool: &[Point], len: usize) -> Result<Self> {
        let len = len.max(1);
        let rows: Vec<Vec<Point>> = pool
            .par_iter()
            .map(|p| crate::dynamics::evaluate_orbit(map, *p, len - 1))
            .collect::<Result<_>>()?;
        Ok(Orbits { domain: map.domain(), len, pts: rows.into_iter().flatten().collect() })
    }

    pub fn size(&self) -> usize {
        self.pts.len() / self.len
    }

    pub fn point(&self, i: usize, k: usize) -> Point {
        self.pts[i * self.len + k]
    }

    /// `d_n(p_i, p_j) = max_{k<n} d(T^k p_i, T^k p_j)`.
    pub fn dn(&self, i: usize, j: usize, n: usize) -> f64 {
        (0..n).map(|k| self.domain.distance(&self.point(i, k), &self.point(j, k))).fold(0.0, f64::max)
    }

    /// Whether `d_n(p_i, p_j) < delta`, stopping at the first separating iterate.
    pub fn close(&self, i: usize, j: usize, n: usize, delta: f64) -> bool {
        (0..n).all(|k| self.domain.distance(&self.point(i, k), &self.point(j, k)) < delta)
    }

    fn distance_to(&self, x: &[Point], j: usize, n: usize) -> f64 {
        (0..n).map(|k| self.domain.distance(&x[k], &self.point(j, k))).fold(0.0, f64::max)
    }
}

/// Spatial hash of accepted points on one iterate, with cells of side at
/// least `delta`.
struct CellIndex {
    cell: f64,
    wrap: Option<i64>,
    cells: HashMap<(i64, i64), Vec<usize>>,
}

impl CellIndex {
    fn new(domain: &Domain, delta: f64) -> Self {
        match domain {
            Domain::Torus => {
                let m = (1.0 / delta).floor().max(1.0) as i64;
                CellIndex { cell: 1.0 / m as f64, wrap: Some(m), cells: HashMap::new() }
            }
            Domain::Box { .. } => CellIndex { cell: delta, wrap: None, cells: HashMap::new() },
        }
    }

    fn key(&self, p: &Point) -> (i64, i64) {
        let k = ((p.x / self.cell).floor() as i64, (p.y / self.cell).floor() as i64);
        match self.wrap {
            Some(m) => (k.0.rem_euclid(m), k.1.rem_euclid(m)),
            None => k,
        }
    }

    fn insert(&mut self, p: &Point, id: usize) {
        let k = self.key(p);
        self.cells.entry(k).or_default().push(id);
    }

    fn neighbors(&self, p: &Point, mut f: impl FnMut(usize) -> bool) -> bool {
        let (cx, cy) = self.key(p);
        let mut seen: Vec<(i64, i64)> = Vec::with_capacity(9);
        for dx in -1..=1 {
            for dy in -1..=1 {
                let mut k = (cx + dx, cy + dy);
                if let Some(m) = self.wrap {
                    k = (k.0.rem_euclid(m), k.1.rem_euclid(m));
                }
                if seen.contains(&k) {
                    continue;
                }
                seen.push(k);
                if let Some(ids) = self.cells.get(&k) {
                    for id in ids {
                        if f(*id) {
                            return true;
                        }
                    }
                }
            }
        }
        false
    }
}

/// Greedy `(n, delta)`-separated selection over `candidates` (in order),
/// starting from the already accepted `seed` set.
fn greedy_extend(orbits: &Orbits, candidates: &[usize], seed: &[usize], n: usize, delta: f64) -> Vec<usize> {
    let k = n - 1;
    let mut index = CellIndex::new(&orbits.domain, delta);
    let mut accepted = seed.to_vec();
    let mut taken = vec![false; orbits.size()];
    for &i in seed {
        index.insert(&orbits.point(i, k), i);
        taken[i] = true;
    }
    for &i in candidates {
        if taken[i] {
            continue;
        }
        let p = orbits.point(i, k);
        let blocked = index.neighbors(&p, |j| orbits.close(i, j, n, delta));
        if !blocked {
            index.insert(&p, i);
            accepted.push(i);
            taken[i] = true;
        }
    }
    accepted
}

fn check_delta(delta: f64) -> Result<()> {
    if delta > 0.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("delta must be positive, got {delta}")))
    }
}

/// Greedy maximal `(n, delta)`-separated subset of `pool` in pool order:
/// indices of the accepted points. Every rejected point lies within `delta`
/// of an accepted one in the `d_n` metric.
pub fn maximal_separated_set(map: &SmoothMap, pool: &[Point], n: usize, delta: f64) -> Result<Vec<usize>> {
    check_delta(delta)?;
    if pool.is_empty() {
        return Ok(Vec::new());
    }
    let n = n.max(1);
    let orbits = Orbits::new(map, pool, n)?;
    let all: Vec<usize> = (0..pool.len()).collect();
    Ok(greedy_extend(&orbits, &all, &[], n, delta))
}

/// Separated sets along increasing `ns`, each seeded with the previous one
/// (which stays separated because `d_n` grows with `n`), so cardinalities are
/// nondecreasing by construction.
pub fn separated_chain(orbits: &Orbits, ns: &[usize], delta: f64) -> Result<Vec<Vec<usize>>> {
    check_delta(delta)?;
    let all: Vec<usize> = (0..orbits.size()).collect();
    let mut out: Vec<Vec<usize>> = Vec::with_capacity(ns.len());
    let mut prev_n = 0;
    for &n in ns {
        if n < prev_n || n == 0 || n > orbits.len {
            return Err(Error::Domain("n values must be increasing, positive and within the orbit length".into()));
        }
        let seed = out.last().cloned().unwrap_or_default();
        out.push(greedy_extend(orbits, &all, &seed, n, delta));
        prev_n = n;
    }
    Ok(out)
}

/// Exact maximum separated subset of a small pool (at most 20 points).
pub fn exact_max_separated(orbits: &Orbits, members: &[usize], n: usize, delta: f64) -> Result<Vec<usize>> {
    let m = members.len();
    if m > 20 {
        return Err(Error::Domain("exact search limited to 20 points".into()));
    }
    let mut conflict = vec![0u32; m];
    for a in 0..m {
        for b in 0..m {
            if a != b && orbits.close(members[a], members[b], n, delta) {
                conflict[a] |= 1 << b;
            }
        }
    }
    fn search(conflict: &[u32], allowed: u32, chosen: u32, best: &mut u32) {
        if allowed == 0 {
            if chosen.count_ones() > best.count_ones() {
                *best = chosen;
            }
            return;
        }
        if chosen.count_ones() + allowed.count_ones() <= best.count_ones() {
            return;
        }
        let v = allowed.trailing_zeros();
        let bit = 1u32 << v;
        search(conflict, allowed & !bit & !conflict[v as usize], chosen | bit, best);
        search(conflict, allowed & !bit, chosen, best);
    }
    let mut best = 0u32;
    let full = if m == 32 { u32::MAX } else { (1u32 << m) - 1 };
    search(&conflict, full, 0, &mut best);
    Ok((0..m).filter(|i| best & (1 << i) != 0).map(|i| members[i]).collect())
}

/// Exact minimum `(n, delta)`-spanning subset (centers drawn from the pool,
/// open balls) of a small pool.
pub fn exact_min_spanning(orbits: &Orbits, members: &[usize], n: usize, delta: f64) -> Result<Vec<usize>> {
    let m = members.len();
    if m > 20 {
        return Err(Error::Domain("exact search limited to 20 points".into()));
    }
    if m == 0 {
        return Ok(Vec::new());
    }
    let cover: Vec<u32> = (0..m)
        .map(|a| (0..m).filter(|b| orbits.close(members[a], members[*b], n, delta)).fold(0, |acc, b| acc | 1 << b))
        .collect();
    let full = (1u32 << m) - 1;
    let mut best: Option<u32> = None;
    for mask in 1u32..=full {
        if let Some(b) = best {
            if mask.count_ones() >= b.count_ones() {
                continue;
            }
        }
        let covered = (0..m).filter(|i| mask & (1 << i) != 0).fold(0, |acc, i| acc | cover[i]);
        if covered == full {
            best = Some(mask);
        }
    }
    let best = best.expect("the full set spans");
    Ok((0..m).filter(|i| best & (1 << i) != 0).map(|i| members[i]).collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EntropyMethod {
    Separated,
    Spanning,
    Local,
}

#[derive(Clone, Debug, Serialize)]
pub struct EntropyEstimate {
    /// `max(slope, 0)`.
    pub value: f64,
    /// Least-squares slope of `log(count)` against `n`.
    pub slope: f64,
    pub intercept: f64,
    pub n_range: Vec<usize>,
    pub delta: f64,
    pub eps: Option<f64>,
    pub counts: Vec<usize>,
    pub method: EntropyMethod,
    /// All counts equal: the growth rate is reported as zero.
    pub degenerate: bool,
    /// Number of pool points the estimate was computed from.
    pub pool_size: usize,
}

impl EntropyEstimate {
    pub fn from_counts(
        n_range: Vec<usize>,
        counts: Vec<usize>,
        delta: f64,
        eps: Option<f64>,
        method: EntropyMethod,
        pool_size: usize,
    ) -> Self {
        let degenerate = counts.windows(2).all(|w| w[0] == w[1]);
        let xs: Vec<f64> = n_range.iter().map(|n| *n as f64).collect();
        let ys: Vec<f64> = counts.iter().map(|c| (*c.max(&1) as f64).ln()).collect();
        let (slope, intercept) = if degenerate { (0.0, ys[0]) } else { linear_fit(&xs, &ys) };
        EntropyEstimate {
            value: slope.max(0.0),
            slope,
            intercept,
            n_range,
            delta,
            eps,
            counts,
            method,
            degenerate,
            pool_size,
        }
    }

    /// `(n, count)` rows as CSV.
    pub fn write_csv<W: std::io::Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["n", "count"])?;
        for (n, c) in self.n_range.iter().zip(&self.counts) {
            wr.write_record([n.to_string(), c.to_string()])?;
        }
        wr.flush()?;
        Ok(())
    }
}

fn check_range(n_range: &[usize]) -> Result<()> {
    if n_range.len() < 4 {
        return Err(Error::Precondition(format!("n_range needs at least 4 values, got {}", n_range.len())));
    }
    if n_range.windows(2).any(|w| w[0] >= w[1]) || n_range[0] == 0 {
        return Err(Error::Precondition("n_range must be positive and increasing".into()));
    }
    Ok(())
}

/// Growth rate of maximal separated set cardinalities over `n_range`.
pub fn topological_entropy_estimate(
    map: &SmoothMap,
    pool: &PoolSpec,
    n_range: &[usize],
    delta: f64,
) -> Result<EntropyEstimate> {
    check_range(n_range)?;
    let points = pool.build(&map.domain(), None)?;
    if points.is_empty() {
        return Err(Error::Empty("entropy pool".into()));
    }
    let orbits = Orbits::new(map, &points, *n_range.last().expect("checked"))?;
    let sets = separated_chain(&orbits, n_range, delta)?;
    let counts = sets.iter().map(Vec::len).collect();
    Ok(EntropyEstimate::from_counts(n_range.to_vec(), counts, delta, None, EntropyMethod::Separated, points.len()))
}

#[derive(Clone, Debug, Serialize)]
pub struct LocalEntropy {
    /// `H(n, delta | x, F, eps)`
    pub value: f64,
    /// Size of `F` intersected with `B(x, n, eps)`.
    pub in_ball: usize,
    pub separated: usize,
    /// Whether the separated count is an exact maximum.
    pub exact: bool,
}

/// Indices of `F` inside the Bowen ball `B(x, n, eps)`.
pub fn bowen_members(map: &SmoothMap, x: Point, orbits: &Orbits, n: usize, eps: f64) -> Result<Vec<usize>> {
    let xo = crate::dynamics::evaluate_orbit(map, x, n.max(1) - 1)?;
    Ok((0..orbits.size()).filter(|j| orbits.distance_to(&xo, *j, n) < eps).collect())
}

/// `H(n, delta | x, F, eps)`: log of the largest `(n, delta)`-separated subset
/// of `F` inside `B(x, n, eps)`; greedy, and exact when at most 20 points of
/// `F` are in the ball. Empty intersections give 0.
pub fn local_entropy(map: &SmoothMap, x: Point, f: &[Point], n: usize, delta: f64, eps: f64) -> Result<LocalEntropy> {
    check_delta(delta)?;
    if !(delta < eps) {
        return Err(Error::Precondition(format!("delta = {delta} must be < eps = {eps}")));
    }
    if f.is_empty() {
        return Ok(LocalEntropy { value: 0.0, in_ball: 0, separated: 0, exact: true });
    }
    let n = n.max(1);
    let orbits = Orbits::new(map, f, n)?;
    local_entropy_with(map, x, &orbits, n, delta, eps)
}

fn local_entropy_with(map: &SmoothMap, x: Point, orbits: &Orbits, n: usize, delta: f64, eps: f64) -> Result<LocalEntropy> {
    let members = bowen_members(map, x, orbits, n, eps)?;
    if members.is_empty() {
        return Ok(LocalEntropy { value: 0.0, in_ball: 0, separated: 0, exact: true });
    }
    let (sel, exact) = if members.len() <= 20 {
        (exact_max_separated(orbits, &members, n, delta)?, true)
    } else {
        (greedy_extend(orbits, &members, &[], n, delta), false)
    };
    Ok(LocalEntropy { value: (sel.len() as f64).ln(), in_ball: members.len(), separated: sel.len(), exact })
}

/// `h(delta | F, eps)` over `n_range`: growth rate of `sup_x exp H(n, delta | x, F, eps)`
/// for `x` in `centers`.
pub fn local_entropy_rate(
    map: &SmoothMap,
    centers: &[Point],
    f: &[Point],
    n_range: &[usize],
    delta: f64,
    eps: f64,
) -> Result<EntropyEstimate> {
    check_range(n_range)?;
    if !(delta < eps) {
        return Err(Error::Precondition(format!("delta = {delta} must be < eps = {eps}")));
    }
    let orbits = Orbits::new(map, f, *n_range.last().expect("checked"))?;
    let counts = n_range
        .iter()
        .map(|n| {
            let per_x: Vec<usize> = centers
                .par_iter()
                .map(|x| local_entropy_with(map, *x, &orbits, *n, delta, eps).map(|h| h.separated))
                .collect::<Result<_>>()?;
            Ok(per_x.into_iter().max().unwrap_or(0))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(EntropyEstimate::from_counts(n_range.to_vec(), counts, delta, Some(eps), EntropyMethod::Local, f.len()))
}

/// `h(delta | F, eps)` for each `delta` of a decreasing ladder; the trend as
/// `delta -> 0` approximates `h(X | F, eps)`.
pub fn newhouse_ladder(
    map: &SmoothMap,
    centers: &[Point],
    f: &[Point],
    n_range: &[usize],
    deltas: &[f64],
    eps: f64,
) -> Result<Vec<EntropyEstimate>> {
    deltas.iter().map(|d| local_entropy_rate(map, centers, f, n_range, *d, eps)).collect()
}

/// Per-scale tail entropy estimate.
#[derive(Clone, Debug, Serialize)]
pub struct TailEntry {
    pub eps: f64,
    /// Largest fitted rate over base points and `delta` values.
    pub estimate: EntropyEstimate,
    /// Best estimate per base point (over the `delta` ladder).
    pub per_point: Vec<EntropyEstimate>,
    /// `(base point index, n)` where the Bowen ball held fewer than 10 pool points.
    pub sparse: Vec<(usize, usize)>,
}

/// Minimum pool points in a Bowen ball before it is flagged as sparse.
pub const SPARSE_LIMIT: usize = 10;

/// For each `eps`, the largest over base points `x` and `delta` of the
/// fitted growth rate of the greedy `(n, delta)`-spanning count of the pool
/// inside `B(x, n, eps)`.
pub fn tail_entropy_estimate(
    map: &SmoothMap,
    eps_ladder: &[f64],
    n_range: &[usize],
    delta_ladder: &[f64],
    pool: &PoolSpec,
    centers: &[Point],
) -> Result<Vec<TailEntry>> {
    check_range(n_range)?;
    let decreasing = |v: &[f64]| v.windows(2).all(|w| w[0] > w[1]);
    if !decreasing(eps_ladder) || !decreasing(delta_ladder) {
        return Err(Error::Precondition("eps and delta ladders must be sorted decreasing".into()));
    }
    if centers.is_empty() {
        return Err(Error::Empty("tail entropy base points".into()));
    }
    let n_max = *n_range.last().expect("checked");
    let domain = map.domain();
    let per_center: Vec<(Orbits, Point)> = centers
        .iter()
        .map(|x| {
            let pts = pool.build(&domain, Some(*x))?;
            Ok((Orbits::new(map, &pts, n_max)?, *x))
        })
        .collect::<Result<_>>()?;
    let mut out = Vec::with_capacity(eps_ladder.len());
    for &eps in eps_ladder {
        let mut per_point = Vec::with_capacity(centers.len());
        let mut sparse = Vec::new();
        for (ci, (orbits, x)) in per_center.iter().enumerate() {
            let members: Vec<Vec<usize>> = n_range
                .par_iter()
                .map(|n| bowen_members(map, *x, orbits, *n, eps))
                .collect::<Result<_>>()?;
            for (n, m) in n_range.iter().zip(&members) {
                if m.len() < SPARSE_LIMIT {
                    sparse.push((ci, *n));
                }
            }
            let mut best: Option<EntropyEstimate> = None;
            for &delta in delta_ladder.iter().filter(|d| **d < eps) {
                let counts: Vec<usize> = n_range
                    .par_iter()
                    .zip(&members)
                    .map(|(n, m)| greedy_extend(orbits, m, &[], *n, delta).len())
                    .collect();
                let est = EntropyEstimate::from_counts(
                    n_range.to_vec(),
                    counts,
                    delta,
                    Some(eps),
                    EntropyMethod::Spanning,
                    orbits.size(),
                );
                if best.as_ref().map_or(true, |b| est.slope > b.slope) {
                    best = Some(est);
                }
            }
            per_point.push(best.ok_or_else(|| Error::Precondition(format!("no delta below eps = {eps}")))?);
        }
        let estimate = per_point
            .iter()
            .cloned()
            .reduce(|a, b| if b.slope > a.slope { b } else { a })
            .expect("centers nonempty");
        out.push(TailEntry { eps, estimate, per_point, sparse });
    }
    Ok(out)
}
