//! `headtag`: corpus statistics, silver-data projection, training, tagging
//! and evaluation for headline POS tagging.

mod commands;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use manifest::RunManifest;

const DEFAULTS: &str = "Defaults: silver training fraction 0.7; search budget 10 trials, \
each retrained under 3 seeds; bootstrap with 2000 replications of 0.2 of the sentences \
at alpha 0.01. All randomness comes from --seed (default 0).";

#[derive(Parser, Debug)]
#[command(name = "headtag", version, about = "POS tagging for news headlines", after_help = DEFAULTS)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Corpus statistics as JSON plus a tag-distribution CSV.
    Stats(StatsArgs),
    /// Build silver headline corpora by projecting lead tags.
    Project(ProjectArgs),
    /// Train one tagger.
    Train(TrainArgs),
    /// Random hyperparameter search with multi-seed retraining.
    Search(SearchArgs),
    /// Tag a CoNLL-U file.
    Tag(TagArgs),
    /// Score predictions against gold tags.
    Eval(EvalArgs),
    /// Paired bootstrap test between two prediction files.
    Compare(CompareArgs),
}

#[derive(Args, Debug)]
struct ManifestArg {
    /// Where to write the run manifest [default: <main output>.manifest.json]
    #[arg(long)]
    manifest: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct StatsArgs {
    /// CoNLL-U corpus, optionally named as path@name
    #[arg(long = "in", required = true, num_args = 1..)]
    inputs: Vec<String>,
    /// Statistics JSON
    #[arg(long)]
    out: PathBuf,
    /// Tag distribution CSV, one column per corpus
    #[arg(long)]
    csv: PathBuf,
    #[command(flatten)]
    manifest: ManifestArg,
}

#[derive(Args, Debug)]
pub struct ProjectArgs {
    /// Headline/lead pairs, one JSON object per line
    #[arg(long)]
    pairs: PathBuf,
    /// Model used to tag the lead sentences
    #[arg(long)]
    tagger: PathBuf,
    /// Head of the tagger used for the leads
    #[arg(long)]
    tagger_domain: String,
    /// Domain name given to the silver headlines
    #[arg(long, default_value = "headline")]
    silver_domain: String,
    /// Share of aligned headlines used for training
    #[arg(long, default_value_t = 0.7)]
    train_frac: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out_train: PathBuf,
    #[arg(long)]
    out_val: PathBuf,
    /// Projection report JSON
    #[arg(long)]
    report: PathBuf,
    #[command(flatten)]
    manifest: ManifestArg,
}

#[derive(Args, Debug)]
pub struct DataArgs {
    /// Training corpus as path@domain; repeat for several domains
    #[arg(long = "train", required = true, num_args = 1..)]
    train: Vec<String>,
    /// Validation corpus as path@domain
    #[arg(long = "val", num_args = 1..)]
    val: Vec<String>,
    /// JSON config with optional `train`, `search`, `model` and `vocab_min_freq` sections
    #[arg(long)]
    config: Option<PathBuf>,
    /// Validation domain used for model selection; required with several validation domains
    #[arg(long)]
    select_domain: Option<String>,
    /// Pretrained word vectors, one `word v1 v2 ...` per line
    #[arg(long)]
    vectors: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Model file
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
pub struct TrainArgs {
    #[command(flatten)]
    data: DataArgs,
    /// Training report JSON [default: <out>.report.json]
    #[arg(long)]
    report: Option<PathBuf>,
    #[command(flatten)]
    manifest: ManifestArg,
}

#[derive(Args, Debug)]
pub struct SearchArgs {
    #[command(flatten)]
    data: DataArgs,
    /// Number of sampled configurations [default: 10]
    #[arg(long)]
    budget: Option<usize>,
    /// Seeds each configuration is trained under [default: 3]
    #[arg(long)]
    seeds: Option<usize>,
    /// One JSON line per training run [default: <out>.trials.jsonl]
    #[arg(long)]
    trial_log: Option<PathBuf>,
    /// Per-trial summary JSON [default: <out>.search.json]
    #[arg(long)]
    report: Option<PathBuf>,
    #[command(flatten)]
    manifest: ManifestArg,
}

#[derive(Args, Debug)]
pub struct TagArgs {
    #[arg(long)]
    model: PathBuf,
    /// Decoder head to use
    #[arg(long)]
    domain: String,
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Tag each sentence with a final period appended, then drop its tag
    #[arg(long)]
    append_period: bool,
    #[command(flatten)]
    manifest: ManifestArg,
}

#[derive(Args, Debug)]
pub struct EvalArgs {
    #[arg(long)]
    gold: PathBuf,
    #[arg(long)]
    pred: PathBuf,
    /// Evaluation report JSON
    #[arg(long)]
    report: PathBuf,
    #[command(flatten)]
    manifest: ManifestArg,
}

#[derive(Args, Debug)]
pub struct CompareArgs {
    #[arg(long)]
    gold: PathBuf,
    /// Baseline predictions
    #[arg(long)]
    pred_a: PathBuf,
    /// Predictions tested for improvement over the baseline
    #[arg(long)]
    pred_b: PathBuf,
    /// JSON with any of `batch_fraction`, `replications`, `alpha`
    #[arg(long)]
    bootstrap_config: Option<PathBuf>,
    /// Resamples drawn [default: 2000]
    #[arg(long)]
    replications: Option<usize>,
    /// Share of sentences per resample [default: 0.2]
    #[arg(long)]
    batch_fraction: Option<f64>,
    /// Significance level [default: 0.01]
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Test result JSON
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    manifest: ManifestArg,
}

/// Failure with its process exit code.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Core(headtag::Error),
}

impl From<headtag::Error> for CliError {
    fn from(e: headtag::Error) -> Self {
        CliError::Core(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Core(e.into())
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        use headtag::Error::*;
        match self {
            CliError::Usage(_) => 1,
            CliError::Core(e) => match e {
                InvalidInput(_) | UnknownDomain(_) => 1,
                Parse { .. } | UnknownTag(_) | Io(_) | Json(_) | Shape(_) => 2,
                Empty(_) => 3,
                Mismatch { .. } | Untagged(_) => 4,
            },
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Core(e) => e.fmt(f),
        }
    }
}

fn manifest_path(explicit: &Option<PathBuf>, main_output: &std::path::Path) -> PathBuf {
    explicit.clone().unwrap_or_else(|| {
        let mut s = main_output.as_os_str().to_owned();
        s.push(".manifest.json");
        PathBuf::from(s)
    })
}

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };

    let (name, manifest_file) = match &cli.command {
        Command::Stats(a) => ("stats", manifest_path(&a.manifest.manifest, &a.out)),
        Command::Project(a) => ("project", manifest_path(&a.manifest.manifest, &a.report)),
        Command::Train(a) => ("train", manifest_path(&a.manifest.manifest, &a.data.out)),
        Command::Search(a) => ("search", manifest_path(&a.manifest.manifest, &a.data.out)),
        Command::Tag(a) => ("tag", manifest_path(&a.manifest.manifest, &a.out)),
        Command::Eval(a) => ("eval", manifest_path(&a.manifest.manifest, &a.report)),
        Command::Compare(a) => ("compare", manifest_path(&a.manifest.manifest, &a.out)),
    };
    let mut manifest = RunManifest::start(name, argv);
    let result = match &cli.command {
        Command::Stats(a) => commands::stats(a, &mut manifest),
        Command::Project(a) => commands::project(a, &mut manifest),
        Command::Train(a) => commands::train(a, &mut manifest),
        Command::Search(a) => commands::search(a, &mut manifest),
        Command::Tag(a) => commands::tag(a, &mut manifest),
        Command::Eval(a) => commands::eval(a, &mut manifest),
        Command::Compare(a) => commands::compare(a, &mut manifest),
    };
    let code = match &result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("headtag {name}: {e}");
            e.exit_code()
        }
    };
    if let Err(e) = manifest.finish(&manifest_file, i32::from(code)) {
        eprintln!("headtag {name}: cannot write manifest: {e}");
        return ExitCode::from(if code == 0 { 2 } else { code });
    }
    ExitCode::from(code)
}
