use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::dynamics::Curve;
use crate::entropy::PoolSpec;
use crate::error::{Error, Result};

use super::bounds::{EntropyConfig, GrowthConfig};

/// Version of both the config schema and the `report.json` layout.
pub const SCHEMA_VERSION: u32 = 1;

/// An experiment: a seed and a nonempty list of pipelines run in order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub version: u32,
    pub seed: u64,
    /// Default sampling resolution for grids not fixed by a pipeline.
    #[serde(default)]
    pub grid: Option<usize>,
    pub pipeline: Vec<Pipeline>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemSpec {
    pub name: String,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Pipeline {
    Entropy {
        system: SystemSpec,
        pool: PoolSpec,
        n_min: usize,
        n_max: usize,
        delta: f64,
    },
    Lyapunov {
        system: SystemSpec,
        x: [f64; 2],
        n: usize,
    },
    Volume {
        system: SystemSpec,
        x: [f64; 2],
        sigma: Curve,
        chi: f64,
        gamma: f64,
        c: f64,
        n: usize,
        eps: f64,
        #[serde(default)]
        cells: Option<usize>,
    },
    Reparam {
        system: SystemSpec,
        x: [f64; 2],
        sigma: Curve,
        chi: f64,
        gamma: f64,
        c: f64,
        n: usize,
        eps: f64,
        r: f64,
    },
    Bounds {
        system: SystemSpec,
        r: f64,
        #[serde(default)]
        entropy: Option<EntropyConfig>,
        #[serde(default)]
        growth: Option<GrowthConfig>,
        #[serde(default)]
        local_diffeo: Option<bool>,
    },
    Oscille {
        /// Explicit curves; when empty, `random` curves are drawn from the
        /// experiment seed.
        #[serde(default)]
        curves: Vec<Curve>,
        #[serde(default)]
        random: usize,
    },
    Combi {
        n: u64,
        s: u64,
    },
}

impl Pipeline {
    pub fn kind(&self) -> &'static str {
        match self {
            Pipeline::Entropy { .. } => "entropy",
            Pipeline::Lyapunov { .. } => "lyapunov",
            Pipeline::Volume { .. } => "volume",
            Pipeline::Reparam { .. } => "reparam",
            Pipeline::Bounds { .. } => "bounds",
            Pipeline::Oscille { .. } => "oscille",
            Pipeline::Combi { .. } => "combi",
        }
    }
}

impl ExperimentConfig {
    /// Parse and validate; every failure is an [`Error::Schema`] naming the
    /// line and column or the offending field.
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(text).map_err(|e| Error::Schema(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Schema(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if self.version != SCHEMA_VERSION {
            return Err(Error::Schema(format!(
                "field `version`: expected {SCHEMA_VERSION}, got {}",
                self.version
            )));
        }
        if self.pipeline.is_empty() {
            return Err(Error::Schema("field `pipeline`: at least one pipeline is required".into()));
        }
        if self.grid == Some(0) {
            return Err(Error::Schema("field `grid`: must be positive".into()));
        }
        for (i, p) in self.pipeline.iter().enumerate() {
            let bad = |field: &str, why: &str| Err(Error::Schema(format!("field `pipeline[{i}].{field}`: {why}")));
            match p {
                Pipeline::Entropy { n_min, n_max, delta, .. } => {
                    if n_min >= n_max {
                        return bad("n_max", "must exceed n_min");
                    }
                    if !(*delta > 0.0) {
                        return bad("delta", "must be positive");
                    }
                }
                Pipeline::Oscille { curves, random } => {
                    if curves.is_empty() && *random == 0 {
                        return bad("curves", "give curves or a positive `random` count");
                    }
                }
                Pipeline::Combi { n, s } => {
                    if *n == 0 || *s == 0 {
                        return bad("n", "n and s must be positive");
                    }
                }
                _ => {}
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_combi_config() {
        let cfg = ExperimentConfig::from_json(r#"{"version":1,"seed":7,"pipeline":[{"kind":"combi","n":2,"s":2}]}"#)
            .unwrap();
        assert_eq!(cfg.pipeline, vec![Pipeline::Combi { n: 2, s: 2 }]);
    }

    #[test]
    fn schema_violations() {
        let cases = [
            r#"{"version":1,"seed":7,"pipeline":[]}"#,
            r#"{"version":1,"pipeline":[{"kind":"combi","n":2,"s":2}]}"#,
            r#"{"version":2,"seed":7,"pipeline":[{"kind":"combi","n":2,"s":2}]}"#,
            r#"{"version":1,"seed":7,"pipeline":[{"kind":"combi","n":2,"s":2,"extra":1}]}"#,
            r#"{"version":1,"seed":7,"pipeline":[{"kind":"plot"}]}"#,
            r#"{"version":1,"seed":7,"pipeline":[{"kind":"combi","n":0,"s":2}]}"#,
            "{\"version\":1,\n\"seed\":\"x\"}",
        ];
        for c in cases {
            let e = ExperimentConfig::from_json(c).unwrap_err();
            assert!(matches!(e, Error::Schema(_)), "{c}");
            assert_eq!(e.exit_code(), 1);
        }
        let e = ExperimentConfig::from_json("{\"version\":1,\n\"seed\":\"x\"}").unwrap_err();
        assert!(e.to_string().contains("line 2"), "{e}");
        let e = ExperimentConfig::from_json(r#"{"version":1,"seed":7,"pipeline":[]}"#).unwrap_err();
        assert!(e.to_string().contains("pipeline"));
    }
}
