use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use surflab::dynamics::Curve;
use surflab::entropy::PoolSpec;
use surflab::reports::{
    run_experiment, to_json, EntropyConfig, ExperimentConfig, GrowthConfig, Pipeline, PipelineResult, SystemSpec,
    SCHEMA_VERSION,
};
use surflab::{Error, Result};

#[derive(Parser)]
#[command(name = "surflab", version, about = "Entropy, Lyapunov and reparametrization experiments for surface maps")]
struct Cli {
    /// Output directory for report.json, metadata.json and CSV tables.
    #[arg(long, global = true, default_value = "surflab-out")]
    out: PathBuf,
    /// Seed for every random choice.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Default grid resolution.
    #[arg(long, global = true)]
    grid: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct SystemArgs {
    /// Builtin system: cat, doubling2d, henon, standard, identity, diag_linear, perturbed_cat.
    #[arg(long, default_value = "cat")]
    system: String,
    /// System parameter, repeatable.
    #[arg(long = "param", value_name = "NAME=VALUE", value_parser = parse_param)]
    params: Vec<(String, f64)>,
}

impl SystemArgs {
    fn spec(&self) -> SystemSpec {
        SystemSpec { name: self.system.clone(), params: self.params.iter().cloned().collect::<BTreeMap<_, _>>() }
    }
}

#[derive(Args, Clone)]
struct CurveArgs {
    /// Base point x.
    #[arg(long, value_parser = parse_pair, default_value = "0.31,0.47")]
    x: [f64; 2],
    /// Curve `p + t v` in chart coordinates, as `px,py,vx,vy`.
    #[arg(long, value_parser = parse_segment, conflicts_with = "sigma_json")]
    segment: Option<[f64; 4]>,
    /// Curve as JSON, e.g. `{"x":[{"poly":[0,1]}],"y":[{"poly":[0]}]}`.
    #[arg(long)]
    sigma_json: Option<String>,
    #[arg(long)]
    chi: f64,
    #[arg(long, default_value_t = 0.1)]
    gamma: f64,
    #[arg(long, default_value_t = 2.0)]
    c: f64,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 0.05)]
    eps: f64,
}

impl CurveArgs {
    fn sigma(&self) -> Result<Curve> {
        match (&self.segment, &self.sigma_json) {
            (Some(s), None) => Ok(Curve::polynomial(vec![s[0], s[2]], vec![s[1], s[3]])),
            (None, Some(j)) => serde_json::from_str(j).map_err(|e| Error::Schema(format!("--sigma-json: {e}"))),
            _ => Err(Error::Schema("give exactly one of --segment and --sigma-json".into())),
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Separated-set estimate of topological entropy.
    Entropy {
        #[command(flatten)]
        system: SystemArgs,
        /// Square patch of initial points, as `cx,cy`; without it the pool is the domain grid.
        #[arg(long, value_parser = parse_pair)]
        center: Option<[f64; 2]>,
        #[arg(long, default_value_t = 0.0025)]
        half_width: f64,
        /// Points per side of the pool.
        #[arg(long, default_value_t = 316)]
        side: usize,
        #[arg(long, default_value_t = 7)]
        n_min: usize,
        #[arg(long, default_value_t = 12)]
        n_max: usize,
        #[arg(long, default_value_t = 0.05)]
        delta: f64,
    },
    /// Lyapunov exponents along one orbit.
    Lyapunov {
        #[command(flatten)]
        system: SystemArgs,
        #[arg(long, value_parser = parse_pair, default_value = "0.1,0.2")]
        x: [f64; 2],
        #[arg(long, default_value_t = 200)]
        n: usize,
    },
    /// Length of an iterated curve restricted to hyperbolic times in a Bowen ball.
    Volume {
        #[command(flatten)]
        system: SystemArgs,
        #[command(flatten)]
        curve: CurveArgs,
    },
    /// Affine reparametrization of a curve in a Bowen ball.
    Reparam {
        #[command(flatten)]
        system: SystemArgs,
        #[command(flatten)]
        curve: CurveArgs,
        #[arg(long, default_value_t = 2.0)]
        r: f64,
    },
    /// Entropy bounds from h_top and the derivative growth rate.
    Bounds {
        #[command(flatten)]
        system: SystemArgs,
        #[arg(long, default_value_t = 2.0)]
        r: f64,
        /// Assert (or deny) that the system is a local diffeomorphism.
        #[arg(long)]
        local_diffeo: Option<bool>,
    },
    /// Trimming certificates for random curves with nearly constant derivative.
    Oscille {
        #[arg(long, default_value_t = 100)]
        random: usize,
    },
    /// Count of sequences admitting a value and its entropy bound.
    Combi {
        #[arg(long)]
        n: u64,
        #[arg(long)]
        s: u64,
    },
    /// Run an experiment config file.
    Run { config: PathBuf },
    /// Recompute the Landau-Kolmogorov and cover constants.
    Calibrate {
        #[arg(long, default_value_t = 10_000)]
        landau_corpus: usize,
        #[arg(long, default_value_t = 2_000)]
        cover_corpus: usize,
    },
}

fn parse_param(s: &str) -> std::result::Result<(String, f64), String> {
    let (k, v) = s.split_once('=').ok_or("expected NAME=VALUE")?;
    Ok((k.to_string(), v.parse().map_err(|e| format!("{e}"))?))
}

fn parse_floats<const N: usize>(s: &str) -> std::result::Result<[f64; N], String> {
    let v: Vec<f64> = s.split(',').map(|p| p.trim().parse::<f64>()).collect::<std::result::Result<_, _>>().map_err(|e| e.to_string())?;
    v.try_into().map_err(|_| format!("expected {N} comma-separated numbers"))
}

fn parse_pair(s: &str) -> std::result::Result<[f64; 2], String> {
    parse_floats::<2>(s)
}

fn parse_segment(s: &str) -> std::result::Result<[f64; 4], String> {
    parse_floats::<4>(s)
}

fn pipeline(cmd: &Command, grid: Option<usize>) -> Result<Pipeline> {
    Ok(match cmd {
        Command::Entropy { system, center, half_width, side, n_min, n_max, delta } => Pipeline::Entropy {
            system: system.spec(),
            pool: match center {
                Some(c) => PoolSpec::Patch { center: *c, half_width: *half_width, side: *side },
                None => PoolSpec::Grid { side: grid.unwrap_or(*side) },
            },
            n_min: *n_min,
            n_max: *n_max,
            delta: *delta,
        },
        Command::Lyapunov { system, x, n } => Pipeline::Lyapunov { system: system.spec(), x: *x, n: *n },
        Command::Volume { system, curve } => Pipeline::Volume {
            system: system.spec(),
            x: curve.x,
            sigma: curve.sigma()?,
            chi: curve.chi,
            gamma: curve.gamma,
            c: curve.c,
            n: curve.n,
            eps: curve.eps,
            cells: grid,
        },
        Command::Reparam { system, curve, r } => Pipeline::Reparam {
            system: system.spec(),
            x: curve.x,
            sigma: curve.sigma()?,
            chi: curve.chi,
            gamma: curve.gamma,
            c: curve.c,
            n: curve.n,
            eps: curve.eps,
            r: *r,
        },
        Command::Bounds { system, r, local_diffeo } => Pipeline::Bounds {
            system: system.spec(),
            r: *r,
            entropy: Some(EntropyConfig::default()),
            growth: Some(GrowthConfig { grid_side: grid.unwrap_or(64), ..Default::default() }),
            local_diffeo: *local_diffeo,
        },
        Command::Oscille { random } => Pipeline::Oscille { curves: vec![], random: *random },
        Command::Combi { n, s } => Pipeline::Combi { n: *n, s: *s },
        Command::Run { .. } | Command::Calibrate { .. } => unreachable!("not a single pipeline"),
    })
}

fn summary(res: &PipelineResult) -> String {
    match res {
        PipelineResult::Entropy(e) => format!("entropy estimate {:.6} (counts {:?})", e.value, e.counts),
        PipelineResult::Lyapunov(l) => format!("exponents {:.9} {:.9}", l.exponents[0], l.exponents[1]),
        PipelineResult::Volume(v) => format!("length {:.6} raw, restricted in [{:.6}, {:.6}]", v.raw_length, v.inner, v.outer),
        PipelineResult::Reparam(b) => format!(
            "{} charts over {} classes, log count {:.4}, cover misses {}",
            b.count,
            b.classes.len(),
            b.log_count,
            b.cover.misses
        ),
        PipelineResult::Bounds(b) => format!(
            "h_top {:.4}  R {:.4}  general {:.4}  local diffeo {:.4}  tail {:.4}",
            b.h_top_estimate, b.r_estimate, b.sexent_bound_general, b.sexent_bound_localdiffeo, b.tail_bound
        ),
        PipelineResult::Oscille(o) => format!("{} curves, {} certificate failures", o.curves, o.failures),
        PipelineResult::Combi(c) => format!("count {} (bound holds: {})", c.count, c.bound.holds),
    }
}

fn execute(cli: &Cli) -> Result<()> {
    let cfg = match &cli.command {
        Command::Run { config } => {
            let mut cfg = ExperimentConfig::from_path(config)?;
            if cli.grid.is_some() {
                cfg.grid = cli.grid;
            }
            cfg
        }
        Command::Calibrate { landau_corpus, cover_corpus } => {
            let c = surflab::constants::calibrate(*landau_corpus, *cover_corpus, cli.seed.unwrap_or(20_240_601))?;
            std::fs::create_dir_all(&cli.out)?;
            let path = cli.out.join("constants.json");
            std::fs::write(&path, to_json(&c)?)?;
            println!("wrote {}", path.display());
            return Ok(());
        }
        cmd => ExperimentConfig {
            version: SCHEMA_VERSION,
            seed: cli.seed.unwrap_or(0),
            grid: cli.grid,
            pipeline: vec![pipeline(cmd, cli.grid)?],
        },
    };
    let out = run_experiment(&cfg, &cli.out)?;
    for r in &out.report.results {
        println!("{}", summary(r));
    }
    println!("wrote {}", cli.out.join("report.json").display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
