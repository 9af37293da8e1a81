use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use surflab::combinatorics::{
    bernoulli_entropy, combinatorial_bound_check, count_admitting, defect_sequence, enumerate_admitting,
};
use surflab::curve_engine::{
    hyperbolic_time_set, landau_kolmogorov_check, local_volume_growth, oscillation_trim, random_oscille_curve,
    random_polynomial_curve, HyperbolicParams,
};
use surflab::dynamics::{derivative_cocycle, evaluate_orbit, localize, system, Curve, Domain, MapSequence, OrbitSample};
use surflab::entropy::{exact_max_separated, exact_min_spanning, separated_chain, Orbits};
use surflab::geometry::{pt, Mat2, Point};
use surflab::lyapunov::{exterior_growth, lyapunov_spectrum, positive_sum_terms};
use surflab::reparametrization::{build_chart_family, verify_chart_properties, BuildOptions};
use surflab::reports::bounds_from;

const SYSTEMS: [&str; 5] = ["cat", "doubling2d", "standard", "perturbed_cat", "identity"];

fn torus_point() -> impl Strategy<Value = Point> {
    (0.0..1.0f64, 0.0..1.0f64).prop_map(|(x, y)| pt(x, y))
}

fn rel_close(a: &Mat2, b: &Mat2, tol: f64) -> bool {
    (a - b).abs().max() <= tol * a.abs().max().max(b.abs().max()).max(1.0)
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 48, ..ProptestConfig::default() })]

    #[test]
    fn chain_rule(name in prop::sample::select(SYSTEMS.to_vec()), x in torus_point(), m in 1usize..=10, n in 1usize..=10) {
        let map = system(name, &[]).unwrap();
        let whole = derivative_cocycle(&map, x, m + n).unwrap();
        let y = *evaluate_orbit(&map, x, m).unwrap().last().unwrap();
        let split = derivative_cocycle(&map, y, n).unwrap() * derivative_cocycle(&map, x, m).unwrap();
        prop_assert!(rel_close(&whole, &split, 1e-9));
    }

    #[test]
    fn henon_chain_rule(x in -0.3..0.3f64, y in -0.3..0.3f64, m in 1usize..=4, n in 1usize..=4) {
        let map = system("henon", &[]).unwrap();
        let p = pt(x, y);
        // orbits leaving the trapping box are outside the contract
        let whole = derivative_cocycle(&map, p, m + n);
        prop_assume!(whole.is_ok());
        let whole = whole.unwrap();
        let q = *evaluate_orbit(&map, p, m).unwrap().last().unwrap();
        let split = derivative_cocycle(&map, q, n).unwrap() * derivative_cocycle(&map, p, m).unwrap();
        prop_assert!(rel_close(&whole, &split, 1e-9));
    }

    #[test]
    fn localization_conjugacy(
        name in prop::sample::select(vec!["standard", "perturbed_cat", "cat"]),
        x in torus_point(),
        vx in -1.0..1.0f64,
        vy in -1.0..1.0f64,
        eps in 0.001..0.1f64,
        k in 1usize..=5,
    ) {
        let map = system(name, &[]).unwrap();
        let seq = localize(&map, x, 5, eps).unwrap();
        let orbit = evaluate_orbit(&map, x, 5).unwrap();
        let v = pt(vx, vy);
        let base = orbit[k - 1];
        let moved = map.apply(base + v * eps);
        let expected = Domain::Torus.chart_offset(&orbit[k], &moved);
        let got = seq.step(k).unwrap().value(v) * eps;
        prop_assert!((got - expected).norm() < 1e-10);
    }

    #[test]
    fn torus_distance_bound(p in torus_point(), q in (-3.0..3.0f64, -3.0..3.0f64)) {
        let d = Domain::Torus.distance(&p, &pt(q.0, q.1));
        prop_assert!(d >= 0.0 && d <= 2f64.sqrt() / 2.0 + 1e-15);
    }

    #[test]
    fn positive_sums_are_subadditive(
        name in prop::sample::select(vec!["cat", "doubling2d", "identity", "standard", "perturbed_cat"]),
        pts in prop::collection::vec(torus_point(), 1..6),
        e in 1usize..=2,
        m in 1usize..=8,
        n in 1usize..=8,
    ) {
        let map = system(name, &[]).unwrap();
        // the nonlinear maps need an invariant sample: their common fixed point
        let pts = if map.linear_part().is_some() { pts } else { vec![pt(0.0, 0.0)] };
        prop_assert!(map.linear_part().is_some() || (map.apply(pts[0]) - pts[0]).norm() < 1e-15);
        let sample = OrbitSample::uniform(&map, &pts).unwrap();
        let totals = positive_sum_terms(&sample, &map, e, m + n).unwrap();
        prop_assert!(totals[m + n - 1] <= totals[m - 1] + totals[n - 1] + 1e-9);
    }

    #[test]
    fn exterior_growth_chain(name in prop::sample::select(SYSTEMS.to_vec()), n in 1usize..=12) {
        let map = system(name, &[]).unwrap();
        let grid = map.domain().grid(12);
        let r1 = exterior_growth(&map, 1, n, &grid).unwrap().value;
        let r2 = exterior_growth(&map, 2, n, &grid).unwrap().value;
        prop_assert!(r2 <= 2.0 * r1 + 1e-9);
        prop_assert!(r1 <= r2 + 1e-12);
    }

    #[test]
    fn linear_spectrum_is_n_independent(a in -3i32..=3, b in -3i32..=3, x in torus_point()) {
        // [[a, b], [1, 0]] has integer entries and determinant -b
        prop_assume!(b != 0);
        let map = surflab::dynamics::SmoothMap::linear("lin", Mat2::new(a as f64, b as f64, 1.0, 0.0), Domain::Torus);
        let rep = lyapunov_spectrum(&map, x, 400).unwrap();
        let tail: Vec<f64> = rep.convergence_trace[200..].iter().map(|c| c[0] + c[1]).collect();
        let mean = tail.iter().sum::<f64>() / tail.len() as f64;
        let var = tail.iter().map(|t| (t - mean).powi(2)).sum::<f64>() / tail.len() as f64;
        prop_assert!(var < 1e-10);
    }

    #[test]
    fn separated_and_spanning_duality(seed in any::<u64>(), size in 2usize..=14, n in 1usize..=4, delta in 0.02..0.3f64) {
        let map = system("perturbed_cat", &[]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pool: Vec<Point> = (0..size)
            .map(|_| pt(rand::Rng::random_range(&mut rng, 0.0..0.4), rand::Rng::random_range(&mut rng, 0.0..0.4)))
            .collect();
        let orbits = Orbits::new(&map, &pool, n).unwrap();
        let all: Vec<usize> = (0..size).collect();
        let span = exact_min_spanning(&orbits, &all, n, delta).unwrap().len();
        let sep = exact_max_separated(&orbits, &all, n, delta).unwrap().len();
        let span_half = exact_min_spanning(&orbits, &all, n, delta / 2.0).unwrap().len();
        prop_assert!(span <= sep && sep <= span_half);
    }

    #[test]
    fn exact_separated_monotonicity(seed in any::<u64>(), size in 2usize..=14, n in 1usize..=4, delta in 0.02..0.3f64, grow in 1.0..2.0f64) {
        let map = system("standard", &[]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pool: Vec<Point> = (0..size)
            .map(|_| pt(rand::Rng::random_range(&mut rng, 0.0..0.3), rand::Rng::random_range(&mut rng, 0.0..0.3)))
            .collect();
        let orbits = Orbits::new(&map, &pool, n + 1).unwrap();
        let all: Vec<usize> = (0..size).collect();
        let base = exact_max_separated(&orbits, &all, n, delta).unwrap().len();
        prop_assert!(exact_max_separated(&orbits, &all, n, delta * grow).unwrap().len() <= base);
        prop_assert!(exact_max_separated(&orbits, &all, n + 1, delta).unwrap().len() >= base);
    }

    #[test]
    fn separated_chain_is_nested(seed in any::<u64>(), delta in 0.01..0.2f64) {
        let map = system("cat", &[]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pool: Vec<Point> = (0..400)
            .map(|_| pt(rand::Rng::random_range(&mut rng, 0.0..1.0), rand::Rng::random_range(&mut rng, 0.0..1.0)))
            .collect();
        let ns = [1usize, 2, 3, 4, 5];
        let orbits = Orbits::new(&map, &pool, 5).unwrap();
        let chain = separated_chain(&orbits, &ns, delta).unwrap();
        for (w, n) in chain.windows(2).zip(&ns[1..]) {
            prop_assert!(w[0].iter().all(|i| w[1].contains(i)));
            for (a, i) in w[1].iter().enumerate() {
                for j in &w[1][a + 1..] {
                    prop_assert!(!orbits.close(*i, *j, *n, delta));
                }
            }
        }
    }

    #[test]
    fn bowen_balls_are_nested(vx in -1.0..1.0f64, vy in -1.0..1.0f64, n in 1usize..=8, rho in 0.1..1.5f64) {
        let map = system("standard", &[]).unwrap();
        let seq = localize(&map, pt(0.3, 0.6), 10, 0.05).unwrap();
        let v = pt(vx, vy);
        if seq.in_bowen_ball(v, n + 1, rho).unwrap() {
            prop_assert!(seq.in_bowen_ball(v, n, rho).unwrap());
        }
    }

    #[test]
    fn combinatorial_bound_holds(n in 1u64..=40, s in 1u64..=10) {
        prop_assert!(combinatorial_bound_check(n, s).unwrap().holds);
    }

    #[test]
    fn linear_defects_are_parameter_independent(a in -1.0..1.0f64, b in -1.0..1.0f64, t in 0.0..1.0f64, s in 0.0..1.0f64) {
        prop_assume!(a.abs() + b.abs() > 0.1);
        let seq = MapSequence::constant_linear(Mat2::new(2.0, 1.0, 1.0, 1.0));
        let line = Curve::segment(pt(0.1, -0.2), pt(a, b));
        let k1 = defect_sequence(&seq, &line, t, 6).unwrap();
        let k2 = defect_sequence(&seq, &line, s, 6).unwrap();
        prop_assert_eq!(&k1, &k2);
        prop_assert!(k1.0.iter().all(|k| *k >= 1));
    }

    #[test]
    fn defects_are_at_least_one(t in 0.0..1.0f64, c in -0.3..0.3f64) {
        let seq = MapSequence::constant_linear(Mat2::new(2.0, 0.0, 0.0, 0.5));
        let curve = Curve::polynomial(vec![0.0, 0.3, c], vec![0.0, 0.4, -c]);
        let k = defect_sequence(&seq, &curve, t, 5).unwrap();
        prop_assert!(k.0.iter().all(|k| *k >= 1));
    }

    #[test]
    fn oscille_certificates(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let curve = random_oscille_curve(&mut rng);
        let trim = oscillation_trim(&curve).unwrap();
        prop_assert!(trim.certificate.holds, "{:?}", trim.certificate);
        prop_assert!(trim.certificate.speed_margin >= -1e-6);
    }

    #[test]
    fn hyperbolic_sets_shrink(n in 1usize..=6, a in -0.5..0.5f64, b in 0.3..1.0f64) {
        let seq = MapSequence::constant_linear(Mat2::new(2.0, 1.0, 1.0, 1.0));
        let curve = Curve::polynomial(vec![a, b, 0.2], vec![-0.1, 0.4 * b, -0.1]);
        let p = HyperbolicParams::new(0.96, 0.2, 2.0).unwrap();
        let h1 = hyperbolic_time_set(&seq, &curve, p, n, 300).unwrap();
        let h2 = hyperbolic_time_set(&seq, &curve, p, n + 1, 300).unwrap();
        for (big, small) in h1.inner_cells.iter().zip(&h2.inner_cells) {
            prop_assert!(!small || *big);
        }
    }

    #[test]
    fn volume_growth_ordering(n in 1usize..=6, a in -0.5..0.5f64) {
        let map = system("standard", &[]).unwrap();
        let seq = localize(&map, pt(0.3, 0.6), n + 1, 0.02).unwrap();
        let curve = Curve::polynomial(vec![a, 0.8], vec![0.1, 0.3, 0.1]);
        let p = HyperbolicParams::new(0.5, 0.4, 3.0).unwrap();
        let rep = local_volume_growth(&seq, &curve, p, n, 1.0, 400).unwrap();
        prop_assert!(rep.inner <= rep.outer + 1e-12);
        prop_assert!(rep.outer <= rep.raw_length + 1e-9);
    }

    #[test]
    fn bound_arithmetic_is_pure(h in 0.0..3.0f64, g in 0.0..3.0f64, r in 1.01..5.0f64) {
        let a = bounds_from(h, g, r, 2).unwrap();
        let b = bounds_from(h, g, r, 2).unwrap();
        prop_assert_eq!(a, b);
        prop_assert!(a.localdiffeo <= a.general);
        prop_assert!(a.buzzi == 2.0 * a.tail);
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 8, ..ProptestConfig::default() })]

    #[test]
    fn chart_families_satisfy_their_contract(a in -0.4..0.0f64, b in 0.4..0.65f64, c in -0.2..0.2f64, q in -0.2..0.2f64) {
        let seq = MapSequence::constant_linear(Mat2::new(2.0, 0.0, 0.0, 0.5));
        let sigma = Curve::polynomial(vec![a, b, 0.5 * c], vec![q, 0.3, -0.5 * c]);
        let n = 4;
        let k = defect_sequence(&seq, &sigma, 0.5, n - 1).unwrap();
        let opts = BuildOptions::for_smoothness(2.0).unwrap();
        let fam = build_chart_family(&seq, &sigma, &k, n, 2.0, &opts).unwrap();
        let rep = verify_chart_properties(&fam, &seq, &sigma, &k, 2.0, 4000).unwrap();
        prop_assert!(rep.image.pass && rep.regularity.pass && rep.oscillation.pass && rep.cover.pass, "{:?}", rep);
        for m in 1..=n {
            for ch in &fam.levels[m] {
                let parent = &fam.levels[m - 1][ch.parent.unwrap()];
                prop_assert!(parent.lo <= ch.lo && ch.hi <= parent.hi);
            }
        }
    }
}

#[test]
fn enumeration_matches_count() {
    for n in 1..=6 {
        for s in 1..=4u64 {
            let listed = enumerate_admitting(n, s).unwrap().len();
            assert_eq!(num_bigint::BigUint::from(listed), count_admitting(n as u64, s).unwrap());
        }
    }
}

#[test]
fn bernoulli_entropy_shape() {
    assert!(bernoulli_entropy(1.0).unwrap() == 0.0);
    assert!(bernoulli_entropy(1.0 + 1e-9).unwrap() < 1e-7);
    let (best, _) = (0..=99_000)
        .map(|i| 1.0 + i as f64 * 1e-3)
        .map(|t| (t, bernoulli_entropy(t).unwrap()))
        .fold((0.0, f64::NEG_INFINITY), |acc, v| if v.1 > acc.1 { v } else { acc });
    assert!((best - 2.0).abs() <= 1e-3);
}

#[test]
fn landau_kolmogorov_corpus_holds() {
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    for _ in 0..200 {
        let g = random_polynomial_curve(&mut rng, 6);
        for s in [1.0, 2.0, 3.0] {
            let c = surflab::constants::constants().c_cal(s).unwrap();
            assert!(landau_kolmogorov_check(&g, s, c).unwrap().holds);
        }
    }
}

/// Pairs of parameters in one chart whose step-`m` speeds are comparable
/// keep comparable speeds one step later.
#[test]
fn derivative_comparability_in_charts() {
    let bound = 4.0 * std::f64::consts::E;
    let cases = [
        (Mat2::new(2.0, 0.0, 0.0, 0.5), Curve::polynomial(vec![-0.4, 0.7, 0.1], vec![0.1, -0.3, 0.2])),
        (Mat2::new(2.0, 1.0, 1.0, 1.0), Curve::polynomial(vec![-0.3, 0.5, 0.1], vec![0.05, 0.2, -0.15])),
    ];
    let opts = BuildOptions::for_smoothness(2.0).unwrap();
    let mut pairs = 0;
    for (m, sigma) in cases {
        let seq = MapSequence::constant_linear(m);
        let n = 6;
        let k = defect_sequence(&seq, &sigma, 0.5, n - 1).unwrap();
        let fam = build_chart_family(&seq, &sigma, &k, n, 2.0, &opts).unwrap();
        let mut power = Mat2::identity();
        for level in 0..n {
            let next = m * power;
            for ch in &fam.levels[level] {
                for i in 0..=8 {
                    for j in 0..=8 {
                        let t = ch.at(i as f64 / 8.0);
                        let s = ch.at(j as f64 / 8.0);
                        let (vt, vs) = (sigma_velocity(&sigma, t), sigma_velocity(&sigma, s));
                        let now = (power * vt).norm() / (power * vs).norm();
                        if (0.5..=2.0).contains(&now) {
                            let later = (next * vt).norm() / (next * vs).norm();
                            assert!(later >= 1.0 / bound && later <= bound);
                            pairs += 1;
                        }
                    }
                }
            }
            power = next;
        }
    }
    assert!(pairs > 1000);
}

fn sigma_velocity(c: &Curve, t: f64) -> Point {
    use surflab::dynamics::CurveLike;
    c.velocity(t)
}

/// On the expanding axis of `diag(2, 1/2)`, `(T^m o s)'` keeps one sign on
/// every chart; in the plane it keeps one direction up to a right angle.
#[test]
fn monotone_branches() {
    let seq = MapSequence::constant_linear(Mat2::new(2.0, 0.0, 0.0, 0.5));
    let opts = BuildOptions::for_smoothness(2.0).unwrap();
    let n = 5;
    // p' = 0.05 + 0.45 t^2 is far from constant, so the base chart is split
    let axis = Curve::polynomial(vec![-0.2, 0.05, 0.0, 0.15], vec![0.0]);
    let k = defect_sequence(&seq, &axis, 0.5, n - 1).unwrap();
    let fam = build_chart_family(&seq, &axis, &k, n, 2.0, &opts).unwrap();
    assert!(fam.levels[0].len() > 1);
    for level in 0..=n {
        for ch in &fam.levels[level] {
            let signs: Vec<f64> = (0..=64).map(|i| sigma_velocity(&axis, ch.at(i as f64 / 64.0)).x.signum()).collect();
            assert!(signs.iter().all(|s| *s == signs[0] && *s != 0.0));
        }
    }
    // the first coordinate of s' vanishes at t = 1/2, the second never does
    let bent = Curve::polynomial(vec![0.1125 - 0.05, -0.45, 0.45], vec![-0.25, 0.5]);
    let k = defect_sequence(&seq, &bent, 0.2, n - 1).unwrap();
    let fam = build_chart_family(&seq, &bent, &k, n, 2.0, &opts).unwrap();
    let mut power = Mat2::identity();
    let mut checked = 0;
    for level in 0..=n {
        for ch in &fam.levels[level] {
            let mid = power * sigma_velocity(&bent, ch.at(0.5));
            for i in 0..=64 {
                let g = power * sigma_velocity(&bent, ch.at(i as f64 / 64.0));
                assert!(g.dot(&mid) > 0.0, "chart [{}, {}] at level {level}", ch.lo, ch.hi);
            }
            checked += 1;
        }
        power = Mat2::new(2.0, 0.0, 0.0, 0.5) * power;
    }
    assert!(checked > n);
}
