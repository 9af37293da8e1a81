use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::combinatorics::{big_ln, combinatorial_bound_check, count_admitting, enumerate_admitting, BoundCheck};
use crate::curve_engine::{local_volume_growth, oscillation_trim, random_oscille_curve, HyperbolicParams, OscilleTrim, VolumeGrowthReport};
use crate::dynamics::{builtin_system, localize, Curve};
use crate::entropy::{topological_entropy_estimate, EntropyEstimate};
use crate::error::{Error, Result};
use crate::geometry::pt;
use crate::lyapunov::{lyapunov_spectrum, LyapunovReport};
use crate::reparametrization::{reparametrize_bowen_ball, BowenReparam, BowenSpec, BuildOptions};

use super::bounds::{compute_bounds_named, BoundsReport, GrowthConfig};
use super::config::{ExperimentConfig, Pipeline, SCHEMA_VERSION};

const DEFAULT_GRID: usize = 64;
const DEFAULT_CELLS: usize = 4000;

#[derive(Clone, Debug, Serialize)]
pub struct OscilleSummary {
    pub curves: usize,
    pub failures: usize,
    pub worst_length_product: f64,
    pub length_bound: f64,
    pub trims: Vec<OscilleTrim>,
}

#[derive(Clone, Debug, Serialize)]
pub struct CombiReport {
    pub n: u64,
    pub s: u64,
    /// `C(nS, n)` in decimal.
    pub count: String,
    pub log_count: f64,
    /// Size of the explicit enumeration, when small enough to run.
    pub enumerated: Option<usize>,
    pub bound: BoundCheck,
}

#[derive(Clone, Debug, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PipelineResult {
    Entropy(EntropyEstimate),
    Lyapunov(LyapunovReport),
    Volume(VolumeGrowthReport),
    Reparam(BowenReparam),
    Bounds(BoundsReport),
    Oscille(OscilleSummary),
    Combi(CombiReport),
}

/// Deterministic part of a run: identical config and seed give identical
/// JSON.
#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub schema_version: u32,
    pub seed: u64,
    pub config: ExperimentConfig,
    pub results: Vec<PipelineResult>,
}

/// Timing and environment, kept out of `report.json`.
#[derive(Clone, Debug, Serialize)]
pub struct RunMetadata {
    pub started_unix: u64,
    pub elapsed_seconds: f64,
    pub package_version: &'static str,
}

pub struct RunOutput {
    pub report: Report,
    pub files: Vec<PathBuf>,
}

/// A CSV table: header plus rows of already formatted cells.
#[derive(Clone, Debug)]
pub struct Table {
    pub name: String,
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    fn write(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        w.flush()?;
        Ok(())
    }
}

fn fmt(x: f64) -> String {
    format!("{x:e}")
}

/// Run one pipeline, returning its result and CSV tables.
pub fn run_pipeline(p: &Pipeline, seed: u64, grid: Option<usize>) -> Result<(PipelineResult, Vec<Table>)> {
    Ok(match p {
        Pipeline::Entropy { system, pool, n_min, n_max, delta } => {
            let map = builtin_system(&system.name, &system.params)?;
            let ns: Vec<usize> = (*n_min..=*n_max).collect();
            let e = topological_entropy_estimate(&map, pool, &ns, *delta)?;
            let rows = e
                .n_range
                .iter()
                .zip(&e.counts)
                .map(|(n, c)| vec![n.to_string(), c.to_string(), fmt((*c as f64).ln())])
                .collect();
            let t = Table { name: "counts".into(), header: vec!["n", "count", "log_count"], rows };
            (PipelineResult::Entropy(e), vec![t])
        }
        Pipeline::Lyapunov { system, x, n } => {
            let map = builtin_system(&system.name, &system.params)?;
            let rep = lyapunov_spectrum(&map, pt(x[0], x[1]), *n)?;
            let rows = rep
                .convergence_trace
                .iter()
                .enumerate()
                .map(|(k, c)| vec![(k + 1).to_string(), fmt(c[0]), fmt(c[1])])
                .collect();
            let t = Table { name: "trace".into(), header: vec!["step", "chi1", "chi2"], rows };
            (PipelineResult::Lyapunov(rep), vec![t])
        }
        Pipeline::Volume { system, x, sigma, chi, gamma, c, n, eps, cells } => {
            let map = builtin_system(&system.name, &system.params)?;
            let seq = localize(&map, pt(x[0], x[1]), n + 1, *eps)?;
            let params = HyperbolicParams::new(*chi, *gamma, *c)?;
            let cells = cells.or(grid).unwrap_or(DEFAULT_CELLS);
            let rep = local_volume_growth(&seq, sigma, params, *n, 1.0, cells)?;
            let rows = rep
                .restriction
                .inner
                .0
                .iter()
                .map(|(lo, hi)| vec!["inner".to_string(), fmt(*lo), fmt(*hi)])
                .chain(rep.restriction.outer.0.iter().map(|(lo, hi)| vec!["outer".to_string(), fmt(*lo), fmt(*hi)]))
                .collect();
            let t = Table { name: "intervals".into(), header: vec!["set", "lo", "hi"], rows };
            (PipelineResult::Volume(rep), vec![t])
        }
        Pipeline::Reparam { system, x, sigma, chi, gamma, c, n, eps, r } => {
            let map = builtin_system(&system.name, &system.params)?;
            let spec = BowenSpec { chi: *chi, gamma: *gamma, c: *c, n: *n, eps: *eps, r: *r };
            let opts = BuildOptions::for_smoothness(*r)?;
            let rep = reparametrize_bowen_ball(&map, pt(x[0], x[1]), sigma, spec, &opts)?;
            let rows = rep
                .families
                .iter()
                .enumerate()
                .flat_map(|(f, fam)| {
                    fam.charts.iter().map(move |ch| vec![f.to_string(), fmt(ch.lo), fmt(ch.hi)])
                })
                .collect();
            let t = Table { name: "charts".into(), header: vec!["class", "lo", "hi"], rows };
            (PipelineResult::Reparam(rep), vec![t])
        }
        Pipeline::Bounds { system, r, entropy, growth, local_diffeo } => {
            let entropy = entropy.clone().unwrap_or_default();
            let growth = growth.clone().unwrap_or(GrowthConfig { grid_side: grid.unwrap_or(DEFAULT_GRID), ..Default::default() });
            let rep = compute_bounds_named(&system.name, &system.params, *r, &entropy, &growth, *local_diffeo)?;
            let rows = vec![
                vec!["h_top".to_string(), fmt(rep.h_top_estimate)],
                vec!["R".to_string(), fmt(rep.r_estimate)],
                vec!["R_2".to_string(), fmt(rep.r_e_estimates[1])],
                vec!["sexent_general".to_string(), fmt(rep.sexent_bound_general)],
                vec!["sexent_localdiffeo".to_string(), fmt(rep.sexent_bound_localdiffeo)],
                vec!["tail".to_string(), fmt(rep.tail_bound)],
                vec!["buzzi".to_string(), fmt(rep.buzzi_bound)],
            ];
            let t = Table { name: "bounds".into(), header: vec!["quantity", "value"], rows };
            (PipelineResult::Bounds(rep), vec![t])
        }
        Pipeline::Oscille { curves, random } => {
            let mut all: Vec<Curve> = curves.clone();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            all.extend((0..*random).map(|_| random_oscille_curve(&mut rng)));
            let trims = all.iter().map(oscillation_trim).collect::<Result<Vec<_>>>()?;
            let failures = trims.iter().filter(|t| !t.certificate.holds).count();
            let rows = trims
                .iter()
                .enumerate()
                .map(|(i, t)| {
                    vec![i.to_string(), fmt(t.a), fmt(t.b), fmt(t.w), fmt(t.certificate.length_product), t.certificate.holds.to_string()]
                })
                .collect();
            let summary = OscilleSummary {
                curves: trims.len(),
                failures,
                worst_length_product: trims.iter().map(|t| t.certificate.length_product).fold(0.0, f64::max),
                length_bound: trims.first().map_or(0.0, |t| t.certificate.length_bound),
                trims,
            };
            let t = Table { name: "trims".into(), header: vec!["curve", "a", "b", "w", "length_product", "holds"], rows };
            (PipelineResult::Oscille(summary), vec![t])
        }
        Pipeline::Combi { n, s } => {
            let count = count_admitting(*n, *s)?;
            let enumerated = match enumerate_admitting(*n as usize, *s) {
                Ok(v) => Some(v.len()),
                Err(Error::EnumerationTooLarge { .. }) => None,
                Err(e) => return Err(e),
            };
            let rep = CombiReport {
                n: *n,
                s: *s,
                log_count: big_ln(&count),
                count: count.to_string(),
                enumerated,
                bound: combinatorial_bound_check(*n, *s)?,
            };
            (PipelineResult::Combi(rep), vec![])
        }
    })
}

/// Run every pipeline of `cfg` in order, writing `report.json`,
/// `metadata.json` and one CSV per table into `out`.
pub fn run_experiment(cfg: &ExperimentConfig, out: &Path) -> Result<RunOutput> {
    cfg.validate()?;
    let started = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    let clock = Instant::now();
    fs::create_dir_all(out)?;
    let mut results = Vec::new();
    let mut files = Vec::new();
    for (i, p) in cfg.pipeline.iter().enumerate() {
        let (res, tables) = run_pipeline(p, cfg.seed, cfg.grid)?;
        for t in tables {
            let path = out.join(format!("{i}_{}_{}.csv", p.kind(), t.name));
            t.write(&path)?;
            files.push(path);
        }
        results.push(res);
    }
    let report = Report { schema_version: SCHEMA_VERSION, seed: cfg.seed, config: cfg.clone(), results };
    let path = out.join("report.json");
    fs::write(&path, to_json(&report)?)?;
    files.push(path);
    let meta = RunMetadata {
        started_unix: started,
        elapsed_seconds: clock.elapsed().as_secs_f64(),
        package_version: env!("CARGO_PKG_VERSION"),
    };
    let path = out.join("metadata.json");
    fs::write(&path, to_json(&meta)?)?;
    files.push(path);
    Ok(RunOutput { report, files })
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    serde_json::to_string_pretty(value).map(|s| s + "\n").map_err(|e| Error::Io(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn combi_pipeline_counts() {
        let (res, _) = run_pipeline(&Pipeline::Combi { n: 2, s: 2 }, 0, None).unwrap();
        let PipelineResult::Combi(c) = res else { panic!() };
        assert_eq!(c.count, "6");
        assert_eq!(c.enumerated, Some(6));
        assert!(c.bound.holds);
    }

    #[test]
    fn deterministic_reports() {
        let cfg = ExperimentConfig::from_json(
            r#"{"version":1,"seed":11,"pipeline":[
                {"kind":"combi","n":3,"s":2},
                {"kind":"oscille","random":5},
                {"kind":"lyapunov","system":{"name":"cat"},"x":[0.1,0.2],"n":50}
            ]}"#,
        )
        .unwrap();
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        run_experiment(&cfg, a.path()).unwrap();
        run_experiment(&cfg, b.path()).unwrap();
        let ra = fs::read(a.path().join("report.json")).unwrap();
        let rb = fs::read(b.path().join("report.json")).unwrap();
        assert_eq!(ra, rb);
        assert!(a.path().join("metadata.json").exists());
        assert!(a.path().join("1_oscille_trims.csv").exists());
        assert!(a.path().join("2_lyapunov_trace.csv").exists());
    }

    #[test]
    fn errors_map_to_exit_codes() {
        let p = Pipeline::Bounds { system: crate::reports::SystemSpec { name: "cat".into(), params: Default::default() }, r: 0.5, entropy: None, growth: None, local_diffeo: None };
        assert_eq!(run_pipeline(&p, 0, None).unwrap_err().exit_code(), 2);
        let p = Pipeline::Lyapunov {
            system: crate::reports::SystemSpec { name: "henon".into(), params: Default::default() },
            x: [1.9, 1.9],
            n: 20,
        };
        assert_eq!(run_pipeline(&p, 0, None).unwrap_err().exit_code(), 3);
    }
}
