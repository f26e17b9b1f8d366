//! Command-line front end: corpus statistics, K sweeps over LDA and HDP,
//! top-word listings and synthetic corpora.

pub mod commands;
pub mod config;
mod error;
pub mod report;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use topicdisc::corpus::BigramMode;
use topicdisc::eval::SimilarityNormalization;
use topicdisc::synth::SynthConfig;

use config::{ModelKind, Overrides, RunConfig, CONFIG_ENV};
pub use error::{CliError, Result};

#[derive(Debug, Parser)]
#[command(
    name = "topicdisc",
    version,
    about = "Discover categories in labeled text with topic models"
)]
pub struct Cli {
    /// Flat TOML run configuration; flags override its values.
    #[arg(long, global = true, env = CONFIG_ENV)]
    pub config: Option<PathBuf>,

    /// Override any configuration key, e.g. `--set hdp_passes=5`.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    pub set: Vec<String>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Corpus summary: D, V, W_mean, W_std and optional per-group counts.
    Stats(StatsArgs),
    /// Fit models across K values and report C_v, S and coverage.
    Sweep(SweepArgs),
    /// Print the top words of every topic in a saved model.
    Topics(TopicsArgs),
    /// Write a synthetic corpus with planted topics as CSV.
    Synth(SynthArgs),
}

#[derive(Debug, Args)]
pub struct CorpusArgs {
    /// Input CSV with an `id,text[,labels][,group]` header.
    #[arg(long, short)]
    pub input: Option<PathBuf>,
    /// Additional stopwords, one per line.
    #[arg(long)]
    pub stopwords: Option<PathBuf>,
    /// Geographic words to remove, one per line.
    #[arg(long)]
    pub geo_words: Option<PathBuf>,
    #[arg(long)]
    pub bigram_mode: Option<BigramMode>,
    /// Dataset tag for reports (default: input file stem).
    #[arg(long)]
    pub dataset: Option<String>,
}

impl CorpusArgs {
    fn apply(&self, o: &mut Overrides) {
        o.set_path("input", self.input.as_deref());
        o.set_path("stopwords_file", self.stopwords.as_deref());
        o.set_path("geo_words_file", self.geo_words.as_deref());
        o.set_opt(
            "bigram_mode",
            self.bigram_mode.map(|m| bigram_name(m).to_string()),
        );
        o.set_opt("dataset", self.dataset.clone());
    }
}

fn bigram_name(m: BigramMode) -> &'static str {
    match m {
        BigramMode::Append => "append",
        BigramMode::Replace => "replace",
        BigramMode::Off => "off",
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum GroupBy {
    Group,
}

#[derive(Debug, Args)]
pub struct StatsArgs {
    #[command(flatten)]
    pub corpus: CorpusArgs,
    /// Add a per-group table.
    #[arg(long, value_enum)]
    pub group_by: Option<GroupBy>,
    /// Also write the statistics as JSON.
    #[arg(long)]
    pub json: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub corpus: CorpusArgs,
    /// Output directory for reports and models.
    #[arg(long, short)]
    pub out: Option<PathBuf>,
    /// Model kinds, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub models: Option<Vec<ModelKind>>,
    /// Topic counts, comma separated and strictly increasing.
    #[arg(long, short, value_delimiter = ',')]
    pub k: Option<Vec<usize>>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub threads: Option<usize>,
    #[arg(long)]
    pub hdp_max_topics: Option<usize>,
    #[arg(long)]
    pub window_size: Option<usize>,
    #[arg(long)]
    pub similarity: Option<SimilarityNormalization>,
}

#[derive(Debug, Args)]
pub struct TopicsArgs {
    /// Saved model artifact.
    #[arg(long, short)]
    pub model: PathBuf,
    /// Words per topic.
    #[arg(short, default_value_t = 10)]
    pub n: usize,
    /// For HDP, only the K heaviest topics.
    #[arg(long, short)]
    pub k: Option<usize>,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Output CSV path.
    #[arg(long, short)]
    pub out: PathBuf,
    #[arg(long, default_value_t = SynthConfig::default().num_topics)]
    pub topics: usize,
    #[arg(long, default_value_t = SynthConfig::default().vocab_size)]
    pub vocab: usize,
    #[arg(long, default_value_t = SynthConfig::default().num_docs)]
    pub docs: usize,
    #[arg(long, default_value_t = SynthConfig::default().doc_len_mean)]
    pub doc_len: f64,
    #[arg(long, default_value_t = SynthConfig::default().alpha)]
    pub alpha: f64,
    #[arg(long, default_value_t = SynthConfig::default().topic_concentration)]
    pub concentration: f64,
    /// Spread documents over this many groups (0 = none).
    #[arg(long, default_value_t = 0)]
    pub groups: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

impl SynthArgs {
    pub fn synth_config(&self) -> SynthConfig {
        SynthConfig {
            num_topics: self.topics,
            vocab_size: self.vocab,
            num_docs: self.docs,
            doc_len_mean: self.doc_len,
            alpha: self.alpha,
            topic_concentration: self.concentration,
            groups: self.groups,
            seed: self.seed,
        }
    }
}

fn run_config(cli: &Cli, fill: impl FnOnce(&mut Overrides)) -> Result<RunConfig> {
    let mut o = Overrides::default();
    for pair in &cli.set {
        o.set_pair(pair)?;
    }
    fill(&mut o);
    RunConfig::load(cli.config.as_deref(), o)
}

/// Runs a parsed command, writing human-readable output to `out`.
pub fn run(cli: Cli, out: &mut dyn Write) -> Result<()> {
    match &cli.command {
        Command::Stats(a) => {
            let cfg = run_config(&cli, |o| a.corpus.apply(o))?;
            commands::stats(&cfg, a.group_by.is_some(), a.json.as_deref(), out)?;
        }
        Command::Sweep(a) => {
            let cfg = run_config(&cli, |o| {
                a.corpus.apply(o);
                o.set_path("output_dir", a.out.as_deref());
                if let Some(models) = &a.models {
                    let names: Vec<String> = models
                        .iter()
                        .map(|m| m.to_string().to_lowercase())
                        .collect();
                    o.set("models", names);
                }
                if let Some(ks) = &a.k {
                    o.set("k_values", ks.iter().map(|&k| k as i64).collect::<Vec<_>>());
                }
                o.set_opt("seed", a.seed.map(|s| s as i64));
                o.set_opt("threads", a.threads.map(|t| t as i64));
                o.set_opt("hdp_max_topics", a.hdp_max_topics.map(|t| t as i64));
                o.set_opt("window_size", a.window_size.map(|t| t as i64));
                o.set_opt(
                    "similarity_normalization",
                    a.similarity.map(|s| match s {
                        SimilarityNormalization::Cosine => "cosine",
                        SimilarityNormalization::Raw => "raw",
                    }),
                );
            })?;
            commands::sweep(&cfg, out)?;
        }
        Command::Topics(a) => {
            commands::topics(&a.model, a.n, a.k, out)?;
        }
        Command::Synth(a) => {
            commands::synth(&a.synth_config(), &a.out)?;
        }
    }
    Ok(())
}

/// Parses `args`, runs, reports errors on stderr and returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    let stdout = std::io::stdout();
    let mut lock = stdout.lock();
    match run(cli, &mut lock) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
