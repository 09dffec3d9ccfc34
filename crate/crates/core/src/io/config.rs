//! Flat `key = value` run configuration.
//!
//! ```text
//! tasks = multiome, citeseq
//! multiome.features = multiome_x.txt
//! multiome.targets = multiome_y.csv
//! multiome.groups = multiome_groups.txt
//! citeseq.source = synthetic
//! citeseq.n_cells = 1400
//! citeseq.esn.reservoir_size = 100
//! models = esn, elm, forest
//! elm.hidden_size = 8000
//! folds = 3
//! seed = 7
//! ```

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::datagen::SynthSpec;
use crate::elm::{Activation, ElmConfig};
use crate::error::{Error, Result};
use crate::esn::EsnConfig;
use crate::forest::ForestConfig;
use crate::model::{ModelConfig, ModelKind};

#[derive(Debug, Clone, PartialEq)]
pub enum TaskSource {
    Files {
        features: PathBuf,
        targets: PathBuf,
        groups: PathBuf,
    },
    Synthetic(SynthSpec),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TaskSpec {
    pub name: String,
    pub source: TaskSource,
    pub components: Option<usize>,
    pub esn: EsnConfig,
    pub elm: ElmConfig,
    pub forest: ForestConfig,
}

impl TaskSpec {
    pub fn model_config(&self, kind: ModelKind) -> ModelConfig {
        match kind {
            ModelKind::Esn => ModelConfig::Esn(self.esn.clone()),
            ModelKind::Elm => ModelConfig::Elm(self.elm.clone()),
            ModelKind::Forest => ModelConfig::Forest(self.forest.clone()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub tasks: Vec<TaskSpec>,
    pub models: Vec<ModelKind>,
    pub esn: EsnConfig,
    pub elm: ElmConfig,
    pub forest: ForestConfig,
    pub folds: usize,
    pub seed: Option<u64>,
    pub components: usize,
    pub log1p: bool,
    pub header: bool,
    pub output_dir: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            tasks: Vec::new(),
            models: vec![ModelKind::Esn, ModelKind::Elm, ModelKind::Forest],
            esn: EsnConfig::default(),
            elm: ElmConfig::default(),
            forest: ForestConfig::default(),
            folds: 3,
            seed: None,
            components: 64,
            log1p: false,
            header: false,
            output_dir: None,
        }
    }
}

fn origin(line: usize) -> String {
    if line == 0 {
        "override".to_string()
    } else {
        format!("line {line}")
    }
}

fn bad(key: &str, line: usize, msg: impl std::fmt::Display) -> Error {
    Error::Config(format!("{}: key `{key}`: {msg}", origin(line)))
}

fn unknown(key: &str, line: usize) -> Error {
    Error::Config(format!("{}: unknown key `{key}`", origin(line)))
}

fn num<T: FromStr>(key: &str, line: usize, v: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    v.parse::<T>().map_err(|e| bad(key, line, format!("`{v}`: {e}")))
}

pub fn parse_bool(v: &str) -> Option<bool> {
    match v.to_ascii_lowercase().as_str() {
        "true" | "yes" | "1" | "on" => Some(true),
        "false" | "no" | "0" | "off" => Some(false),
        _ => None,
    }
}

fn boolean(key: &str, line: usize, v: &str) -> Result<bool> {
    parse_bool(v).ok_or_else(|| bad(key, line, format!("`{v}` is not a boolean")))
}

fn list(v: &str) -> Vec<String> {
    v.split(',').map(str::trim).filter(|s| !s.is_empty()).map(String::from).collect()
}

fn set_esn(c: &mut EsnConfig, param: &str, key: &str, line: usize, v: &str) -> Result<()> {
    match param {
        "reservoir_size" => c.reservoir_size = num(key, line, v)?,
        "spectral_radius" => c.spectral_radius = num(key, line, v)?,
        "input_scale" => c.input_scale = num(key, line, v)?,
        "reservoir_density" => c.reservoir_density = num(key, line, v)?,
        "state_iters" => c.state_iters = num(key, line, v)?,
        "state_tol" => c.state_tol = num(key, line, v)?,
        "ridge_lambda" => c.ridge_lambda = num(key, line, v)?,
        "seed" => c.seed = num(key, line, v)?,
        _ => return Err(unknown(key, line)),
    }
    Ok(())
}

fn set_elm(c: &mut ElmConfig, param: &str, key: &str, line: usize, v: &str) -> Result<()> {
    match param {
        "hidden_size" => c.hidden_size = num(key, line, v)?,
        "activation" => c.activation = v.parse::<Activation>().map_err(|e| bad(key, line, e))?,
        "rcond" => c.rcond = Some(num(key, line, v)?),
        "seed" => c.seed = num(key, line, v)?,
        _ => return Err(unknown(key, line)),
    }
    Ok(())
}

fn set_forest(c: &mut ForestConfig, param: &str, key: &str, line: usize, v: &str) -> Result<()> {
    match param {
        "n_trees" => c.n_trees = num(key, line, v)?,
        "max_leaf_nodes" => c.max_leaf_nodes = num(key, line, v)?,
        "min_samples_leaf" => c.min_samples_leaf = num(key, line, v)?,
        "feature_fraction" => c.feature_fraction = num(key, line, v)?,
        "bootstrap" => c.bootstrap = boolean(key, line, v)?,
        "seed" => c.seed = num(key, line, v)?,
        _ => return Err(unknown(key, line)),
    }
    Ok(())
}

fn set_synth(s: &mut SynthSpec, param: &str, key: &str, line: usize, v: &str) -> Result<bool> {
    match param {
        "n_cells" => s.n_cells = num(key, line, v)?,
        "d_input" => s.d_input = num(key, line, v)?,
        "d_output" => s.d_output = num(key, line, v)?,
        "latent_rank" => s.latent_rank = num(key, line, v)?,
        "noise_sigma" => s.noise_sigma = num(key, line, v)?,
        "n_groups" => s.n_groups = num(key, line, v)?,
        "sparsity" => s.sparsity = num(key, line, v)?,
        "data_seed" => s.seed = num(key, line, v)?,
        _ => return Ok(false),
    }
    Ok(true)
}

fn set_model(
    esn: &mut EsnConfig,
    elm: &mut ElmConfig,
    forest: &mut ForestConfig,
    key: &str,
    line: usize,
    v: &str,
) -> Result<bool> {
    let Some((prefix, param)) = key.split_once('.') else {
        return Ok(false);
    };
    match prefix {
        "esn" => set_esn(esn, param, key, line, v)?,
        "elm" => set_elm(elm, param, key, line, v)?,
        "forest" | "rf" => set_forest(forest, param, key, line, v)?,
        _ => return Ok(false),
    }
    Ok(true)
}

impl RunConfig {
    /// Parses config text. Relative task paths are resolved against `base`.
    pub fn parse(text: &str, base: &Path) -> Result<RunConfig> {
        Self::parse_with_overrides(text, base, &[])
    }

    /// As [`RunConfig::parse`], with `overrides` replacing or adding keys.
    pub fn parse_with_overrides(text: &str, base: &Path, overrides: &[(String, String)]) -> Result<RunConfig> {
        let mut entries: BTreeMap<String, (usize, String)> = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected `key = value`", i + 1)))?;
            let k = k.trim().to_string();
            if let Some((prev, _)) = entries.get(&k) {
                return Err(Error::Config(format!("line {}: key `{k}` already set on line {prev}", i + 1)));
            }
            entries.insert(k, (i + 1, v.trim().to_string()));
        }
        for (k, v) in overrides {
            entries.insert(k.trim().to_string(), (0, v.trim().to_string()));
        }

        let mut cfg = RunConfig::default();
        let task_names = entries.get("tasks").map(|(_, v)| list(v)).unwrap_or_default();
        for n in &task_names {
            if matches!(n.as_str(), "esn" | "elm" | "forest" | "rf") || n.contains(['.', ',', ' ']) {
                return Err(Error::Config(format!("invalid task name `{n}`")));
            }
        }

        for (key, (line, v)) in &entries {
            let line = *line;
            if set_model(&mut cfg.esn, &mut cfg.elm, &mut cfg.forest, key, line, v)? {
                continue;
            }
            match key.as_str() {
                "tasks" => {}
                "models" => {
                    cfg.models = list(v)
                        .iter()
                        .map(|m| m.parse::<ModelKind>().map_err(|e| bad(key, line, e)))
                        .collect::<Result<_>>()?;
                }
                "folds" | "k" => cfg.folds = num(key, line, v)?,
                "seed" => cfg.seed = Some(num(key, line, v)?),
                "components" => cfg.components = num(key, line, v)?,
                "log1p" => cfg.log1p = boolean(key, line, v)?,
                "header" => cfg.header = boolean(key, line, v)?,
                "output_dir" => cfg.output_dir = Some(base.join(v)),
                _ => {
                    let task_key = key.split_once('.').filter(|(t, _)| task_names.iter().any(|n| n == t));
                    if task_key.is_none() {
                        return Err(unknown(key, line));
                    }
                }
            }
        }

        for name in &task_names {
            let mut task = TaskSpec {
                name: name.clone(),
                source: TaskSource::Synthetic(SynthSpec::desk()),
                components: None,
                esn: cfg.esn.clone(),
                elm: cfg.elm.clone(),
                forest: cfg.forest.clone(),
            };
            let mut synth = SynthSpec::desk();
            let (mut features, mut targets, mut groups) = (None, None, None);
            let mut synthetic = None;
            let prefix = format!("{name}.");
            for (key, (line, v)) in entries.range(prefix.clone()..) {
                let Some(param) = key.strip_prefix(&prefix) else { break };
                let line = *line;
                if set_model(&mut task.esn, &mut task.elm, &mut task.forest, param, line, v)? {
                    continue;
                }
                if set_synth(&mut synth, param, key, line, v)? {
                    continue;
                }
                match param {
                    "features" => features = Some(base.join(v)),
                    "targets" => targets = Some(base.join(v)),
                    "groups" => groups = Some(base.join(v)),
                    "components" => task.components = Some(num(key, line, v)?),
                    "source" => match v.as_str() {
                        "synthetic" => synthetic = Some(true),
                        "files" => synthetic = Some(false),
                        _ => return Err(bad(key, line, format!("`{v}` is not one of synthetic, files"))),
                    },
                    _ => return Err(unknown(key, line)),
                }
            }
            let any_file = features.is_some() || targets.is_some() || groups.is_some();
            task.source = if synthetic.unwrap_or(!any_file) {
                if any_file {
                    return Err(Error::Config(format!("task `{name}` is synthetic but names data files")));
                }
                TaskSource::Synthetic(synth)
            } else {
                match (features, targets, groups) {
                    (Some(features), Some(targets), Some(groups)) => TaskSource::Files { features, targets, groups },
                    _ => {
                        return Err(Error::Config(format!(
                            "task `{name}` needs `{name}.features`, `{name}.targets` and `{name}.groups`"
                        )))
                    }
                }
            };
            cfg.tasks.push(task);
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<RunConfig> {
        Self::load_with_overrides(path, &[])
    }

    pub fn load_with_overrides(path: &Path, overrides: &[(String, String)]) -> Result<RunConfig> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::from(e).context(path.display().to_string()))?;
        let base = path.parent().unwrap_or(Path::new("."));
        RunConfig::parse_with_overrides(&text, base, overrides).map_err(|e| e.context(path.display().to_string()))
    }
}
