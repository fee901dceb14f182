//! The `subpost` command line: `synth`, `sample`, `eval`, `run` and `analyze`.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::corpus::{generate_synthetic, Corpus, SyntheticSpec};
use crate::embedding::read_questions;
use crate::error::{Error, Result};
use crate::experiment::{
    analyze, evaluate_lines, run_experiment, EvalRecord, ExperimentConfig, Metric, RESULTS_HEADER,
};
use crate::sampler::{materialize, sample_lines};

/// Process exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExitStatus {
    pub code: i32,
}

impl ExitStatus {
    pub const SUCCESS: ExitStatus = ExitStatus { code: 0 };
    pub const USAGE: ExitStatus = ExitStatus { code: 1 };
    pub const FAILURE: ExitStatus = ExitStatus { code: 2 };
    pub const PARTIAL: ExitStatus = ExitStatus { code: 3 };

    /// Configuration and argument errors are usage errors; everything else
    /// is a runtime failure.
    pub fn for_error(error: &Error) -> Self {
        match error {
            Error::Config(_) | Error::InvalidParams(_) | Error::Parse(_) => Self::USAGE,
            _ => Self::FAILURE,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "subpost", version, about = "Evaluation posteriors over random corpus subsets")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic corpus with planted analogy families.
    Synth(SynthArgs),
    /// Draw a seeded random subset of corpus lines.
    Sample(SampleArgs),
    /// Train and evaluate one model on one corpus file.
    Eval(EvalArgs),
    /// Run the full subset experiment.
    Run(RunArgs),
    /// Summarize a results CSV.
    Analyze(AnalyzeArgs),
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Output corpus file.
    #[arg(long)]
    pub out: PathBuf,
    /// Output analogy question file.
    #[arg(long)]
    pub questions: PathBuf,
    /// Number of planted capital/country families.
    #[arg(long, default_value_t = 50)]
    pub families: u32,
    /// Filler vocabulary size.
    #[arg(long, default_value_t = 2000)]
    pub filler: u32,
    /// Number of corpus lines.
    #[arg(long, default_value_t = 200_000)]
    pub lines: u64,
    #[arg(long, default_value = "1", value_parser = parse_seed)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    /// Number of lines to draw.
    #[arg(long)]
    pub k: u64,
    #[arg(long, value_parser = parse_seed)]
    pub seed: u64,
    /// Output subset file.
    #[arg(long)]
    pub out: PathBuf,
    /// Also write the selected line indices here.
    #[arg(long)]
    pub manifest: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ModelArgs {
    #[arg(long)]
    pub dim: Option<usize>,
    #[arg(long)]
    pub window: Option<usize>,
    #[arg(long)]
    pub negatives: Option<usize>,
    #[arg(long)]
    pub epochs: Option<usize>,
    /// N-gram order; resets the lambdas to the defaults for that order.
    #[arg(long)]
    pub order: Option<usize>,
    /// Interpolation weights, highest order first, floor weight last.
    #[arg(long)]
    pub lambdas: Option<String>,
}

impl ModelArgs {
    fn apply(&self, config: &mut ExperimentConfig) -> Result<()> {
        let numbers = [
            ("dim", self.dim),
            ("window", self.window),
            ("negatives", self.negatives),
            ("epochs", self.epochs),
            ("order", self.order),
        ];
        for (key, value) in numbers {
            if let Some(v) = value {
                config.set(key, &v.to_string())?;
            }
        }
        if let Some(l) = &self.lambdas {
            config.set("lambdas", l)?;
        }
        Ok(())
    }
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Training corpus (typically the output of `sample`).
    #[arg(long)]
    pub corpus: PathBuf,
    /// analogy, perplexity or both.
    #[arg(long, default_value = "both")]
    pub metric: String,
    /// Analogy question file.
    #[arg(long)]
    pub questions: Option<PathBuf>,
    /// Evaluation corpus for perplexity.
    #[arg(long)]
    pub heldout: Option<PathBuf>,
    /// Seed for embedding training, reported in the record.
    #[arg(long, default_value = "1", value_parser = parse_seed)]
    pub seed: u64,
    #[command(flatten)]
    pub model: ModelArgs,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Experiment config file (`key = value` lines); flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    #[arg(long)]
    pub questions: Option<PathBuf>,
    /// Comma-separated, strictly increasing subset sizes.
    #[arg(long, alias = "size")]
    pub sizes: Option<String>,
    #[arg(long)]
    pub replicates: Option<u64>,
    /// Master seed.
    #[arg(long, value_parser = parse_seed)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub heldout_lines: Option<u64>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub workers: Option<usize>,
    /// analogy, perplexity or both.
    #[arg(long)]
    pub metric: Option<String>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub model: ModelArgs,
}

impl RunArgs {
    pub fn to_config(&self) -> Result<ExperimentConfig> {
        let mut config = match &self.config {
            Some(path) => ExperimentConfig::from_file(path)?,
            None => ExperimentConfig::default(),
        };
        let paths = [("corpus", &self.corpus), ("questions", &self.questions), ("out_dir", &self.out)];
        for (key, value) in paths {
            if let Some(p) = value {
                config.set(key, &p.to_string_lossy())?;
            }
        }
        if let Some(s) = &self.sizes {
            config.set("sizes", s)?;
        }
        if let Some(m) = &self.metric {
            config.set("metrics", m)?;
        }
        let scalars = [
            ("replicates", self.replicates.map(|v| v.to_string())),
            ("master_seed", self.seed.map(|v| v.to_string())),
            ("heldout_lines", self.heldout_lines.map(|v| v.to_string())),
            ("alpha", self.alpha.map(|v| v.to_string())),
            ("workers", self.workers.map(|v| v.to_string())),
        ];
        for (key, value) in scalars {
            if let Some(v) = value {
                config.set(key, &v)?;
            }
        }
        self.model.apply(&mut config)?;
        config.validate()?;
        Ok(config)
    }
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    /// Results CSV written by `run`.
    #[arg(long)]
    pub results: PathBuf,
    #[arg(long, default_value_t = 0.10)]
    pub alpha: f64,
    /// Output directory for the summary files.
    #[arg(long)]
    pub out: PathBuf,
}

fn parse_seed(text: &str) -> std::result::Result<u64, String> {
    crate::experiment::parse_u64(text).map_err(|e| e.to_string())
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> ExitStatus
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitStatus::USAGE } else { ExitStatus::SUCCESS };
        }
    };
    match execute(cli.command) {
        Ok(status) => status,
        Err(e) => {
            eprintln!("error: {}: {}", e.kind(), single_line(&e.to_string()));
            ExitStatus::for_error(&e)
        }
    }
}

fn single_line(text: &str) -> String {
    text.split_whitespace().collect::<Vec<_>>().join(" ")
}

pub fn execute(command: Command) -> Result<ExitStatus> {
    match command {
        Command::Synth(a) => cmd_synth(&a),
        Command::Sample(a) => cmd_sample(&a),
        Command::Eval(a) => cmd_eval(&a),
        Command::Run(a) => cmd_run(&a),
        Command::Analyze(a) => cmd_analyze(&a),
    }
}

fn cmd_synth(a: &SynthArgs) -> Result<ExitStatus> {
    let spec = SyntheticSpec {
        n_families: a.families,
        n_filler: a.filler,
        n_lines: a.lines,
        seed: a.seed,
    };
    spec.validate()?;
    let corpus = generate_synthetic(&spec, &a.out, &a.questions)?;
    println!(
        "wrote {} lines to {} and {} questions to {}",
        corpus.line_count(),
        a.out.display(),
        spec.question_count(),
        a.questions.display()
    );
    Ok(ExitStatus::SUCCESS)
}

fn cmd_sample(a: &SampleArgs) -> Result<ExitStatus> {
    let corpus = Corpus::open(&a.corpus)?;
    let subset = sample_lines(&corpus, a.k, a.seed)?;
    materialize(&subset, &corpus, &a.out)?;
    if let Some(manifest) = &a.manifest {
        subset.write_manifest(manifest)?;
    }
    Ok(ExitStatus::SUCCESS)
}

fn cmd_eval(a: &EvalArgs) -> Result<ExitStatus> {
    let metrics = Metric::parse_list(&a.metric)?;
    let mut config = ExperimentConfig::default();
    a.model.apply(&mut config)?;
    if metrics.contains(&Metric::AnalogyAccuracy) && a.questions.is_none() {
        return Err(Error::Config("analogy evaluation needs --questions".into()));
    }
    if metrics.contains(&Metric::Perplexity) && a.heldout.is_none() {
        return Err(Error::Config("perplexity evaluation needs --heldout".into()));
    }
    config.sgns.validate().map_err(|e| Error::Config(format!("sgns: {e}")))?;

    let corpus = Corpus::open(&a.corpus)?;
    let lines = corpus.read_lines()?;
    let questions = match &a.questions {
        Some(p) if metrics.contains(&Metric::AnalogyAccuracy) => read_questions(p)?,
        _ => Vec::new(),
    };
    let heldout = match &a.heldout {
        Some(p) if metrics.contains(&Metric::Perplexity) => Corpus::open(p)?.read_lines()?,
        _ => Vec::new(),
    };

    let mut out = std::io::stdout().lock();
    writeln!(out, "{RESULTS_HEADER}").map_err(|e| Error::io("<stdout>", e))?;
    for metric in metrics {
        let value = evaluate_lines(metric, &lines, &config, a.seed, &heldout, &questions)?;
        let record = EvalRecord {
            size: corpus.line_count(),
            replicate: 0,
            seed: a.seed,
            metric,
            value: Some(value),
        };
        writeln!(out, "{}", record.csv_row()).map_err(|e| Error::io("<stdout>", e))?;
    }
    Ok(ExitStatus::SUCCESS)
}

fn cmd_run(a: &RunArgs) -> Result<ExitStatus> {
    let config = a.to_config()?;
    let outcome = run_experiment(&config)?;
    for f in &outcome.failures {
        eprintln!(
            "warning: {} size {} replicate {} failed: {}",
            f.metric, f.size, f.replicate, f.error
        );
    }
    println!("{}", outcome.results_csv.display());
    if outcome.failures.is_empty() {
        Ok(ExitStatus::SUCCESS)
    } else {
        Ok(ExitStatus::PARTIAL)
    }
}

fn cmd_analyze(a: &AnalyzeArgs) -> Result<ExitStatus> {
    if !(a.alpha > 0.0 && a.alpha < 1.0) {
        return Err(Error::Config(format!("alpha must be in (0, 1), got {}", a.alpha)));
    }
    let analysis = analyze(&a.results, a.alpha, &a.out)?;
    print!("{}", analysis.text_report());
    Ok(ExitStatus::SUCCESS)
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn clap_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn unknown_flag_is_usage_error() {
        assert_eq!(run(["subpost", "sample", "--bogus"]), ExitStatus::USAGE);
        assert_eq!(run(["subpost"]), ExitStatus::USAGE);
    }

    #[test]
    fn flags_override_config_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("exp.conf");
        std::fs::write(&path, "corpus = a.txt\nsizes = 10,20\nreplicates = 50\nmetrics = perplexity\n")
            .unwrap();
        let cli = Cli::try_parse_from([
            "subpost", "run", "--config", path.to_str().unwrap(), "--replicates", "12", "--seed", "0x10",
            "--order", "2",
        ])
        .unwrap();
        let Command::Run(args) = cli.command else { panic!() };
        let config = args.to_config().unwrap();
        assert_eq!(config.replicates, 12);
        assert_eq!(config.master_seed, 16);
        assert_eq!(config.sizes, vec![10, 20]);
        assert_eq!(config.ngram.lambdas.len(), 3);
    }
}
