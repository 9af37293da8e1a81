//! Acceptance suite: one line per criterion, nonzero exit if any fails.

use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use surflab::combinatorics::{combinatorial_bound_check, count_admitting, defect_sequence, enumerate_admitting};
use surflab::constants::{constants, LANDAU_ORDERS};
use surflab::curve_engine::{landau_kolmogorov_check, oscillation_trim, random_oscille_curve, random_polynomial_curve};
use surflab::dynamics::{localize, system, Curve, MapSequence};
use surflab::entropy::{tail_entropy_estimate, topological_entropy_estimate, PoolSpec};
use surflab::geometry::{linear_fit, pt, Mat2};
use surflab::lyapunov::lyapunov_spectrum;
use surflab::reparametrization::{
    build_chart_family, reparametrize_bowen_ball, verify_chart_properties, BowenSpec, BuildOptions,
};
use surflab::reports::{compute_bounds, measure_level_bound, BoundMode, EntropyConfig, GrowthConfig};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn golden_log() -> f64 {
    ((3.0 + 5f64.sqrt()) / 2.0).ln()
}

fn cat_lyapunov() -> Outcome {
    let cat = system("cat", &[]).unwrap();
    let t = Instant::now();
    let rep = lyapunov_spectrum(&cat, pt(0.123, 0.456), 200).unwrap();
    let elapsed = t.elapsed();
    let chi = golden_log();
    let err = (rep.exponents[0] - chi).abs().max((rep.exponents[1] + chi).abs());
    outcome(
        err <= 1e-6 && elapsed < Duration::from_secs(1),
        format!("exponents ({:.9}, {:.9}), max error {err:.2e}, {elapsed:.2?}", rep.exponents[0], rep.exponents[1]),
    )
}

fn combinatorics() -> Outcome {
    let t = Instant::now();
    let mut mismatches = 0;
    for n in 1..=6 {
        for s in 1..=4u64 {
            let listed = enumerate_admitting(n, s).unwrap().len();
            if num_bigint::BigUint::from(listed) != count_admitting(n as u64, s).unwrap() {
                mismatches += 1;
            }
        }
    }
    let mut violations = 0;
    for n in 1..=40u64 {
        for s in 1..=10u64 {
            if !combinatorial_bound_check(n, s).unwrap().holds {
                violations += 1;
            }
        }
    }
    let elapsed = t.elapsed();
    outcome(
        mismatches == 0 && violations == 0 && elapsed < Duration::from_secs(10),
        format!("{mismatches} count mismatches, {violations} bound violations, {elapsed:.2?}"),
    )
}

fn entropy_case(name: &str, half_width: f64, n_max: usize) -> (f64, usize, Duration) {
    let map = system(name, &[]).unwrap();
    let pool = PoolSpec::Patch { center: [0.37, 0.61], half_width, side: 316 };
    let ns: Vec<usize> = (7..=n_max).collect();
    let t = Instant::now();
    let e = topological_entropy_estimate(&map, &pool, &ns, 0.05).unwrap();
    (e.value, e.pool_size, t.elapsed())
}

fn entropy() -> Outcome {
    let limit = Duration::from_secs(120);
    let two_ln2 = 2.0 * 2f64.ln();
    let (d, pd, td) = entropy_case("doubling2d", 0.002, 11);
    let (c, pc, tc) = entropy_case("cat", 0.0025, 12);
    let (i, pi, ti) = entropy_case("identity", 0.0025, 12);
    let pass = (d - two_ln2).abs() <= 0.15 * two_ln2
        && (c - golden_log()).abs() <= 0.15 * golden_log()
        && i.abs() <= 0.02
        && pd.max(pc).max(pi) <= 100_000
        && td.max(tc).max(ti) < limit;
    outcome(
        pass,
        format!(
            "doubling {d:.4} ({:+.1}%, {td:.1?}), cat {c:.4} ({:+.1}%, {tc:.1?}), identity {i:.4} ({ti:.1?})",
            100.0 * (d / two_ln2 - 1.0),
            100.0 * (c / golden_log() - 1.0)
        ),
    )
}

fn tail_entropy() -> Outcome {
    let cat = system("cat", &[]).unwrap();
    let centers = [pt(0.37, 0.61), pt(0.11, 0.83), pt(0.72, 0.25)];
    let ns: Vec<usize> = (1..=6).collect();
    let mut values = Vec::new();
    for eps in [0.1, 0.05, 0.02] {
        let pool = PoolSpec::Around { half_width: 0.1, side: 300 };
        let tail = tail_entropy_estimate(&cat, &[eps], &ns, &[eps / 2.0, eps / 4.0], &pool, &centers).unwrap();
        values.push(tail[0].estimate.value);
    }
    let nonincreasing = values.windows(2).all(|w| w[1] <= w[0]);
    outcome(
        nonincreasing && values[2] < 0.15,
        format!("values at eps 0.1, 0.05, 0.02: {values:?} (nonincreasing: {nonincreasing})"),
    )
}

fn oscille() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(500);
    let mut failures = 0;
    let mut worst: f64 = 0.0;
    for _ in 0..500 {
        let c = random_oscille_curve(&mut rng);
        let trim = oscillation_trim(&c).unwrap();
        worst = worst.max(trim.certificate.length_product / trim.certificate.length_bound);
        if !trim.certificate.holds || trim.certificate.samples < 10_000 {
            failures += 1;
        }
    }
    outcome(failures == 0, format!("500 curves, {failures} failures, worst length ratio {worst:.3}"))
}

fn landau() -> Outcome {
    let table = constants();
    let mut rng = ChaCha8Rng::seed_from_u64(0xfeed_5eed);
    let corpus: Vec<Curve> = (0..200).map(|_| random_polynomial_curve(&mut rng, 8)).collect();
    let mut violations = 0;
    for s in LANDAU_ORDERS {
        let c = table.c_cal(s).unwrap();
        violations += corpus.iter().filter(|g| !landau_kolmogorov_check(*g, s, c).unwrap().holds).count();
    }
    outcome(violations == 0, format!("{} orders x 200 curves, {violations} violations", LANDAU_ORDERS.len()))
}

fn reparametrization() -> Outcome {
    let t = Instant::now();
    let opts = BuildOptions::for_smoothness(2.0).unwrap();
    let cat = system("cat", &[]).unwrap();
    let mut details = Vec::new();
    let mut pass = true;
    for which in ["diag", "cat"] {
        let mut fitted = Vec::new();
        let mut misses = 0;
        let mut failed = Vec::new();
        for n in 4..=10 {
            let (seq, sigma) = if which == "diag" {
                (MapSequence::constant_linear(Mat2::new(2.0, 0.0, 0.0, 0.5)), Curve::segment(pt(-0.5, 0.0), pt(1.0, 0.0)))
            } else {
                (
                    localize(&cat, pt(0.31, 0.47), n + 1, 0.05).unwrap(),
                    Curve::polynomial(vec![-0.35, 0.7], vec![0.05, -0.2, 0.3]),
                )
            };
            let k = defect_sequence(&seq, &sigma, 0.5, n - 1).unwrap();
            let fam = build_chart_family(&seq, &sigma, &k, n, 2.0, &opts).unwrap();
            let rep = verify_chart_properties(&fam, &seq, &sigma, &k, 2.0, 10_000).unwrap();
            misses += rep.cover.misses;
            if !rep.all_pass {
                failed.push(n);
            }
            fitted.push(fam.constants.a);
        }
        let mean = fitted.iter().sum::<f64>() / fitted.len() as f64;
        let spread = fitted.iter().map(|a| ((a - mean) / mean).abs()).fold(0.0, f64::max);
        pass &= failed.is_empty() && misses == 0 && spread <= 0.2;
        details.push(format!("{which}: A {mean:.3} (spread {:.1}%), failing n {failed:?}, misses {misses}", 100.0 * spread));
    }
    let elapsed = t.elapsed();
    pass &= elapsed < Duration::from_secs(300);
    outcome(pass, format!("{}; {elapsed:.1?}", details.join("; ")))
}

fn count_reduction() -> Outcome {
    let opts = BuildOptions::for_smoothness(2.0).unwrap();
    let phi = (1.0 + 5f64.sqrt()) / 2.0;
    let u = pt(phi, 1.0).normalize();
    let cases = [
        ("cat", system("cat", &[]).unwrap(), pt(0.31, 0.47), Curve::segment(-u * 0.5, u), 2.0 * phi.ln()),
        ("diag", system("diag_linear", &[]).unwrap(), pt(0.0, 0.0), Curve::segment(pt(-0.5, 0.0), pt(1.0, 0.0)), 2f64.ln()),
    ];
    let mut pass = true;
    let mut details = Vec::new();
    for (name, map, x, sigma, chi) in cases {
        let ns: Vec<f64> = (4..=12).map(|n| n as f64).collect();
        let mut logs = Vec::new();
        for n in 4..=12 {
            let spec = BowenSpec { chi, gamma: 0.1, c: 2.0, n, eps: 0.05, r: 2.0 };
            let rep = reparametrize_bowen_ball(&map, x, &sigma, spec, &opts).unwrap();
            pass &= rep.cover.misses == 0;
            logs.push(rep.log_count);
        }
        let (slope, intercept) = linear_fit(&ns, &logs);
        let worst = ns.iter().zip(&logs).map(|(n, l)| (l - slope * n - intercept).abs()).fold(0.0, f64::max);
        pass &= worst < 0.2;
        details.push(format!("{name}: slope {slope:.3}, worst residual {worst:.3}"));
    }
    outcome(pass, details.join("; "))
}

fn bounds() -> Outcome {
    let cat = system("cat", &[]).unwrap();
    let rep = compute_bounds(&cat, 2.0, &EntropyConfig::default(), &GrowthConfig::default(), None).unwrap();
    let chi = golden_log();
    let diffeo_ok = (rep.sexent_bound_localdiffeo - 2.0 * chi).abs() <= 0.15;
    let tail_ok = (rep.tail_bound - chi / 2.0).abs() <= 0.08;
    let measure_ok = measure_level_bound(chi, chi, 2.0, BoundMode::Diffeo).unwrap() == chi / (2.0 - 1.0)
        && measure_level_bound(chi, 2.0 * chi, 3.0, BoundMode::General).unwrap() == 2.0 * (2.0 * chi) / (3.0 - 1.0)
        && measure_level_bound(0.0, 0.0, 2.0, BoundMode::General).unwrap() == 0.0;
    outcome(
        diffeo_ok && tail_ok && measure_ok && rep.local_diffeo.applies,
        format!(
            "diffeo bound {:.4} (target {:.4}), tail bound {:.4} (target {:.4}), measure bounds exact: {measure_ok}",
            rep.sexent_bound_localdiffeo,
            2.0 * chi,
            rep.tail_bound,
            chi / 2.0
        ),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("1 cat Lyapunov exponents", cat_lyapunov),
        ("2 combinatorics exactness", combinatorics),
        ("3 topological entropy", entropy),
        ("4 tail entropy trend", tail_entropy),
        ("5 oscillation trimming", oscille),
        ("6 Landau-Kolmogorov constants", landau),
        ("7 chart family verification", reparametrization),
        ("8 count-bound reduction", count_reduction),
        ("9 bounds arithmetic", bounds),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        let o = run();
        println!("{} criterion {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        if !o.pass {
            failed += 1;
        }
    }
    println!("acceptance: {} of 9 criteria passed", 9 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
