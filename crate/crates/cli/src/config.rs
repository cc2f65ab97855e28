//! Pipeline run configuration: a flat TOML file with one table per stage.
//!
//! ```toml
//! seed = 42
//! methods = "k0,k1,k2,concat"
//!
//! [input]
//! synthetic = "default"      # or: records = "dblp.tsv"
//!
//! [sample]
//! iterations = 30
//! length = 100
//!
//! [train]
//! dim = 128
//! ```
//!
//! Stage seeds default to the top-level `seed`.

use std::path::{Path, PathBuf};

use hopwalk::datagen::{EvalPairMode, SyntheticConfig, TimeSplit};
use hopwalk::linkpred::LogisticConfig;
use hopwalk::{EvalConfig, TrainConfig, WalkConfig};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub workers: usize,
    pub methods: String,
    pub input: InputSection,
    pub split: SplitSection,
    pub synthetic: SyntheticSection,
    pub sample: SampleSection,
    pub train: TrainSection,
    pub evaluate: EvaluateSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 42,
            workers: 1,
            methods: "k0,k1,k2,concat".into(),
            input: InputSection::default(),
            split: SplitSection::default(),
            synthetic: SyntheticSection::default(),
            sample: SampleSection::default(),
            train: TrainSection::default(),
            evaluate: EvaluateSection::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InputSection {
    pub records: Option<PathBuf>,
    /// Preset name used when `records` is unset.
    pub synthetic: String,
}

impl Default for InputSection {
    fn default() -> Self {
        Self {
            records: None,
            synthetic: "default".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SplitSection {
    pub train_end_year: i32,
    pub eval_end_year: i32,
}

impl Default for SplitSection {
    fn default() -> Self {
        let d = TimeSplit::default();
        Self {
            train_end_year: d.train_end_year,
            eval_end_year: d.eval_end_year,
        }
    }
}

/// Overrides on top of the chosen synthetic preset.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SyntheticSection {
    pub communities: Option<usize>,
    pub authors_per_community: Option<usize>,
    pub papers_per_author: Option<usize>,
    pub venues_per_community: Option<usize>,
    pub max_authors_per_paper: Option<usize>,
    pub cross_fraction: Option<f64>,
    pub eval_fraction: Option<f64>,
    pub eval_mode: Option<EvalPairMode>,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SampleSection {
    pub iterations: usize,
    pub length: usize,
    pub seed: Option<u64>,
}

impl Default for SampleSection {
    fn default() -> Self {
        let d = WalkConfig::default();
        Self {
            iterations: d.iterations_per_node,
            length: d.sample_length,
            seed: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainSection {
    pub dim: usize,
    pub window: usize,
    pub negatives: usize,
    pub epochs: usize,
    pub lr_start: f64,
    pub lr_end: f64,
    pub ns_exponent: f64,
    pub seed: Option<u64>,
}

impl Default for TrainSection {
    fn default() -> Self {
        let d = TrainConfig::default();
        Self {
            dim: d.dim,
            window: d.window,
            negatives: d.negatives,
            epochs: d.epochs,
            lr_start: d.lr_start,
            lr_end: d.lr_end,
            ns_exponent: d.ns_exponent,
            seed: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvaluateSection {
    pub repeats: usize,
    pub ratio: f64,
    pub seed: Option<u64>,
}

impl Default for EvaluateSection {
    fn default() -> Self {
        let d = EvalConfig::default();
        Self {
            repeats: d.repeats,
            ratio: d.train_ratio,
            seed: None,
        }
    }
}

impl RunConfig {
    pub fn parse(text: &str, overrides: &[String]) -> Result<Self, CliError> {
        let mut table: toml::Table = text
            .parse()
            .map_err(|e| CliError::Usage(format!("config: {e}")))?;
        for o in overrides {
            apply_override(&mut table, o)?;
        }
        toml::Value::Table(table)
            .try_into()
            .map_err(|e| CliError::Usage(format!("config: {e}")))
    }

    pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<Self, CliError> {
        let text = match path {
            Some(p) => {
                if !p.exists() {
                    return Err(CliError::Usage(format!("config path does not exist: {}", p.display())));
                }
                std::fs::read_to_string(p).map_err(|e| CliError::runtime(format!("{}: {e}", p.display())))?
            }
            None => String::new(),
        };
        Self::parse(&text, overrides)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn synthetic_config(&self) -> Result<SyntheticConfig, CliError> {
        let base = crate::commands::synthetic_preset(&self.input.synthetic)?;
        let s = &self.synthetic;
        Ok(SyntheticConfig {
            n_communities: s.communities.unwrap_or(base.n_communities),
            authors_per_community: s.authors_per_community.unwrap_or(base.authors_per_community),
            papers_per_author: s.papers_per_author.unwrap_or(base.papers_per_author),
            venues_per_community: s.venues_per_community.unwrap_or(base.venues_per_community),
            max_authors_per_paper: s.max_authors_per_paper.unwrap_or(base.max_authors_per_paper),
            cross_community_paper_fraction: s.cross_fraction.unwrap_or(base.cross_community_paper_fraction),
            eval_pair_fraction: s.eval_fraction.unwrap_or(base.eval_pair_fraction),
            eval_pair_mode: s.eval_mode.unwrap_or(base.eval_pair_mode),
            rng_seed: s.seed.unwrap_or(self.seed),
        })
    }

    pub fn time_split(&self) -> TimeSplit {
        TimeSplit {
            train_end_year: self.split.train_end_year,
            eval_end_year: self.split.eval_end_year,
        }
    }

    pub fn walk_config(&self, hop_k: usize) -> WalkConfig {
        WalkConfig {
            hop_k,
            iterations_per_node: self.sample.iterations,
            sample_length: self.sample.length,
            rng_seed: self.sample.seed.unwrap_or(self.seed),
        }
    }

    pub fn train_config(&self) -> TrainConfig {
        let t = &self.train;
        TrainConfig {
            dim: t.dim,
            window: t.window,
            negatives: t.negatives,
            epochs: t.epochs,
            lr_start: t.lr_start,
            lr_end: t.lr_end,
            ns_exponent: t.ns_exponent,
            rng_seed: t.seed.unwrap_or(self.seed),
        }
    }

    pub fn eval_config(&self) -> EvalConfig {
        EvalConfig {
            repeats: self.evaluate.repeats,
            train_ratio: self.evaluate.ratio,
            seed: self.evaluate.seed.unwrap_or(self.seed),
            logistic: LogisticConfig::default(),
        }
    }
}

/// `section.key=value` or `key=value`; the value is read as a TOML literal
/// and falls back to a plain string.
fn apply_override(table: &mut toml::Table, arg: &str) -> Result<(), CliError> {
    let (path, raw) = arg
        .split_once('=')
        .ok_or_else(|| CliError::Usage(format!("override `{arg}` is not KEY=VALUE")))?;
    let value: toml::Value = format!("v = {raw}")
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()));
    let mut parts: Vec<&str> = path.trim().split('.').collect();
    let leaf = parts.pop().filter(|s| !s.is_empty()).ok_or_else(|| CliError::Usage(format!("bad key in `{arg}`")))?;
    let mut cur = table;
    for p in parts {
        cur = cur
            .entry(p.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()))
            .as_table_mut()
            .ok_or_else(|| CliError::Usage(format!("`{p}` is not a section")))?;
    }
    cur.insert(leaf.to_string(), value);
    Ok(())
}
