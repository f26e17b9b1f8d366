//! Run configuration: a flat TOML file whose keys mirror the fields below.
//! Command-line flags and `--set key=value` pairs override file values.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use topicdisc::coherence::CoherenceConfig;
use topicdisc::corpus::{load_word_list, tokenize, BigramMode, PreprocessConfig, RawDocument};
use topicdisc::eval::SimilarityNormalization;
use topicdisc::hdp::HdpConfig;
use topicdisc::lda::LdaConfig;

use crate::error::{CliError, Result};

/// Environment variable naming a default config file.
pub const CONFIG_ENV: &str = "TOPICDISC_CONFIG";

const PATH_KEYS: [&str; 4] = ["input", "stopwords_file", "geo_words_file", "output_dir"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ModelKind {
    #[serde(rename = "LDA", alias = "lda")]
    Lda,
    #[serde(rename = "HDP", alias = "hdp")]
    Hdp,
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ModelKind::Lda => "LDA",
            ModelKind::Hdp => "HDP",
        })
    }
}

impl std::str::FromStr for ModelKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "lda" => Ok(ModelKind::Lda),
            "hdp" => Ok(ModelKind::Hdp),
            other => Err(format!(
                "unknown model kind `{other}` (expected lda or hdp)"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub input: Option<PathBuf>,
    /// Tag used in report rows; defaults to the input file stem.
    pub dataset: Option<String>,
    pub output_dir: Option<PathBuf>,
    pub seed: u64,
    /// Worker threads for the sweep (0 = one per core).
    pub threads: usize,

    pub builtin_stopwords: bool,
    pub stopwords_file: Option<PathBuf>,
    pub geo_words_file: Option<PathBuf>,
    /// Also treat the words of every group value as geographic words.
    pub geo_from_group: bool,
    pub min_token_len: usize,
    pub bigram_min_count: u64,
    pub bigram_threshold: f64,
    pub bigram_mode: BigramMode,

    pub models: Vec<ModelKind>,
    pub k_values: Vec<usize>,

    /// Defaults to 1/K.
    pub lda_alpha: Option<f64>,
    /// Defaults to 1/K.
    pub lda_eta: Option<f64>,
    pub lda_passes: usize,
    pub lda_minibatch_size: usize,
    pub lda_tau0: f64,
    pub lda_kappa: f64,
    pub lda_batch: bool,
    pub lda_e_step_max_iters: usize,
    pub lda_e_step_tol: f64,

    pub hdp_max_topics: usize,
    pub hdp_doc_truncation: usize,
    pub hdp_gamma: f64,
    pub hdp_alpha0: f64,
    pub hdp_eta: f64,
    pub hdp_tau0: f64,
    pub hdp_kappa: f64,
    pub hdp_passes: usize,
    pub hdp_minibatch_size: usize,
    pub hdp_e_step_max_iters: usize,
    pub hdp_e_step_converge: f64,

    pub window_size: usize,
    pub top_n: usize,
    pub epsilon: f64,
    pub gamma_exponent: i32,
    pub hdp_weight_floor: f64,
    pub similarity_normalization: SimilarityNormalization,
}

impl Default for RunConfig {
    fn default() -> Self {
        let pre = PreprocessConfig::default();
        let lda = LdaConfig::new(1);
        let hdp = HdpConfig::default();
        let coh = CoherenceConfig::default();
        RunConfig {
            input: None,
            dataset: None,
            output_dir: None,
            seed: 0,
            threads: 0,
            builtin_stopwords: true,
            stopwords_file: None,
            geo_words_file: None,
            geo_from_group: true,
            min_token_len: pre.min_token_len,
            bigram_min_count: pre.bigram_min_count,
            bigram_threshold: pre.bigram_threshold,
            bigram_mode: pre.bigram_mode,
            models: vec![ModelKind::Lda, ModelKind::Hdp],
            k_values: vec![10, 25, 50, 100],
            lda_alpha: None,
            lda_eta: None,
            lda_passes: lda.passes,
            lda_minibatch_size: lda.minibatch_size,
            lda_tau0: lda.tau0,
            lda_kappa: lda.kappa,
            lda_batch: lda.batch,
            lda_e_step_max_iters: lda.e_step_max_iters,
            lda_e_step_tol: lda.e_step_mean_change_tol,
            hdp_max_topics: hdp.max_topics,
            hdp_doc_truncation: hdp.doc_truncation,
            hdp_gamma: hdp.gamma,
            hdp_alpha0: hdp.alpha0,
            hdp_eta: hdp.eta,
            hdp_tau0: hdp.tau0,
            hdp_kappa: hdp.kappa,
            hdp_passes: hdp.passes,
            hdp_minibatch_size: hdp.minibatch_size,
            hdp_e_step_max_iters: hdp.e_step_max_iters,
            hdp_e_step_converge: hdp.e_step_converge,
            window_size: coh.window_size,
            top_n: coh.top_n,
            epsilon: coh.epsilon,
            gamma_exponent: coh.gamma_exponent,
            hdp_weight_floor: coh.hdp_weight_floor,
            similarity_normalization: SimilarityNormalization::default(),
        }
    }
}

/// Key-value overrides collected from the command line.
#[derive(Debug, Clone, Default)]
pub struct Overrides(toml::Table);

impl Overrides {
    pub fn set(&mut self, key: &str, value: impl Into<toml::Value>) {
        self.0.insert(key.to_string(), value.into());
    }

    pub fn set_opt<V: Into<toml::Value>>(&mut self, key: &str, value: Option<V>) {
        if let Some(v) = value {
            self.set(key, v);
        }
    }

    pub fn set_path(&mut self, key: &str, value: Option<&Path>) {
        if let Some(p) = value {
            self.set(key, p.to_string_lossy().into_owned());
        }
    }

    /// Parses `key=value`; the value is read as TOML and falls back to a
    /// bare string.
    pub fn set_pair(&mut self, pair: &str) -> Result<()> {
        let (key, value) = pair
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("expected key=value, got `{pair}`")))?;
        let key = key.trim();
        let value = value.trim();
        let parsed = format!("v = {value}")
            .parse::<toml::Table>()
            .ok()
            .and_then(|mut t| t.remove("v"))
            .unwrap_or_else(|| toml::Value::String(value.to_string()));
        self.set(key, parsed);
        Ok(())
    }
}

impl RunConfig {
    /// Loads `file` (if any), applies `overrides`, and validates. Relative
    /// paths inside the file are resolved against the file's directory.
    pub fn load(file: Option<&Path>, overrides: Overrides) -> Result<Self> {
        let mut table = match file {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| {
                    CliError::Usage(format!("cannot read config {}: {e}", path.display()))
                })?;
                let mut table: toml::Table = text.parse().map_err(|e| {
                    CliError::Usage(format!("invalid config {}: {e}", path.display()))
                })?;
                let base = path.parent().unwrap_or(Path::new(""));
                for key in PATH_KEYS {
                    if let Some(toml::Value::String(s)) = table.get_mut(key) {
                        if Path::new(s.as_str()).is_relative() {
                            *s = base.join(&*s).to_string_lossy().into_owned();
                        }
                    }
                }
                table
            }
            None => toml::Table::new(),
        };
        table.extend(overrides.0);
        let config: RunConfig = toml::Value::Table(table)
            .try_into()
            .map_err(|e: toml::de::Error| CliError::Usage(format!("invalid configuration: {e}")))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        let usage = |m: String| Err(CliError::Usage(m));
        if self.k_values.is_empty() {
            return usage("k_values must not be empty".into());
        }
        if self.k_values[0] < 1 || self.k_values.windows(2).any(|w| w[0] >= w[1]) {
            return usage("k_values must be positive and strictly increasing".into());
        }
        if self.models.is_empty() {
            return usage("at least one model kind is required".into());
        }
        let max_k = *self.k_values.last().expect("nonempty");
        if self.models.contains(&ModelKind::Hdp) && max_k > self.hdp_max_topics {
            return usage(format!(
                "K = {max_k} exceeds hdp_max_topics = {}",
                self.hdp_max_topics
            ));
        }
        for &k in &self.k_values {
            self.lda_config(k).validate()?;
        }
        self.hdp_config().validate()?;
        self.coherence_config().validate()?;
        Ok(())
    }

    /// Models in report order, deduplicated.
    pub fn model_kinds(&self) -> Vec<ModelKind> {
        let mut kinds = self.models.clone();
        kinds.sort();
        kinds.dedup();
        kinds
    }

    pub fn dataset_tag(&self) -> String {
        self.dataset.clone().unwrap_or_else(|| {
            self.input
                .as_deref()
                .and_then(Path::file_stem)
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "corpus".into())
        })
    }

    pub fn input_path(&self) -> Result<&Path> {
        self.input.as_deref().ok_or_else(|| {
            CliError::Usage("no input file given (use --input or `input` in the config)".into())
        })
    }

    /// Preprocessing settings; geographic words may draw on `docs`' groups.
    pub fn preprocess_config(&self, docs: &[RawDocument]) -> Result<PreprocessConfig> {
        let mut cfg = if self.builtin_stopwords {
            PreprocessConfig::english()
        } else {
            PreprocessConfig::default()
        };
        cfg.min_token_len = self.min_token_len;
        cfg.bigram_min_count = self.bigram_min_count;
        cfg.bigram_threshold = self.bigram_threshold;
        cfg.bigram_mode = self.bigram_mode;
        if let Some(path) = &self.stopwords_file {
            cfg.add_stopwords(load_word_list(path)?);
        }
        if let Some(path) = &self.geo_words_file {
            cfg.add_geo_words(load_word_list(path)?);
        }
        if self.geo_from_group {
            let words: Vec<String> = docs
                .iter()
                .filter_map(|d| d.group.as_deref())
                .flat_map(|g| tokenize(g, &cfg))
                .collect();
            cfg.add_geo_words(words);
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn lda_config(&self, k: usize) -> LdaConfig {
        let mut cfg = LdaConfig::new(k).with_seed(self.seed);
        if let Some(a) = self.lda_alpha {
            cfg.alpha = a;
        }
        if let Some(e) = self.lda_eta {
            cfg.eta = e;
        }
        cfg.passes = self.lda_passes;
        cfg.minibatch_size = self.lda_minibatch_size;
        cfg.tau0 = self.lda_tau0;
        cfg.kappa = self.lda_kappa;
        cfg.batch = self.lda_batch;
        cfg.e_step_max_iters = self.lda_e_step_max_iters;
        cfg.e_step_mean_change_tol = self.lda_e_step_tol;
        cfg
    }

    pub fn hdp_config(&self) -> HdpConfig {
        HdpConfig {
            max_topics: self.hdp_max_topics,
            doc_truncation: self.hdp_doc_truncation,
            gamma: self.hdp_gamma,
            alpha0: self.hdp_alpha0,
            eta: self.hdp_eta,
            tau0: self.hdp_tau0,
            kappa: self.hdp_kappa,
            passes: self.hdp_passes,
            minibatch_size: self.hdp_minibatch_size,
            e_step_max_iters: self.hdp_e_step_max_iters,
            e_step_converge: self.hdp_e_step_converge,
            seed: self.seed,
        }
    }

    pub fn coherence_config(&self) -> CoherenceConfig {
        CoherenceConfig {
            window_size: self.window_size,
            top_n: self.top_n,
            epsilon: self.epsilon,
            gamma_exponent: self.gamma_exponent,
            hdp_weight_floor: self.hdp_weight_floor,
        }
    }
}
