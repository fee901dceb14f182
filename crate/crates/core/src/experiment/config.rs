//! Experiment configuration: flat `key = value` files, lists
//! comma-separated, `#` starts a comment.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::embedding::SgnsParams;
use crate::error::{Error, Result};
use crate::ngram::{default_lambdas, DEFAULT_ORDER};
use crate::stats::MIN_NORMALITY_SAMPLES;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Metric {
    AnalogyAccuracy,
    Perplexity,
}

impl Metric {
    pub const ALL: [Metric; 2] = [Metric::AnalogyAccuracy, Metric::Perplexity];

    pub fn name(self) -> &'static str {
        match self {
            Metric::AnalogyAccuracy => "analogy_accuracy",
            Metric::Perplexity => "perplexity",
        }
    }

    /// Higher is better; quality ratios are only reported for these.
    pub fn is_accuracy(self) -> bool {
        matches!(self, Metric::AnalogyAccuracy)
    }

    /// Parses a metric list: `analogy`, `perplexity`, `both`, or the full
    /// metric names, comma-separated.
    pub fn parse_list(text: &str) -> Result<Vec<Metric>> {
        let mut out = Vec::new();
        for item in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            match item {
                "both" | "all" => out.extend(Metric::ALL),
                other => out.push(other.parse()?),
            }
        }
        out.sort_unstable();
        out.dedup();
        if out.is_empty() {
            return Err(Error::Config("no metric selected".into()));
        }
        Ok(out)
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "analogy" | "analogy_accuracy" => Ok(Metric::AnalogyAccuracy),
            "perplexity" => Ok(Metric::Perplexity),
            other => Err(Error::Config(format!("unknown metric {other:?}"))),
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NgramSettings {
    pub order: usize,
    /// Highest order first, uniform-floor weight last.
    pub lambdas: Vec<f64>,
    pub min_count: u64,
}

impl Default for NgramSettings {
    fn default() -> Self {
        NgramSettings {
            order: DEFAULT_ORDER,
            lambdas: default_lambdas(DEFAULT_ORDER),
            min_count: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub corpus_path: PathBuf,
    pub questions_path: Option<PathBuf>,
    pub sizes: Vec<u64>,
    pub replicates: u64,
    pub master_seed: u64,
    pub heldout_lines: u64,
    pub metrics: Vec<Metric>,
    pub ngram: NgramSettings,
    /// `seed` is replaced by the per-replicate seed.
    pub sgns: SgnsParams,
    pub alpha: f64,
    pub workers: usize,
    pub out_dir: PathBuf,
    /// Also summarize the results after the run.
    pub analyze: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            corpus_path: PathBuf::new(),
            questions_path: None,
            sizes: Vec::new(),
            replicates: 100,
            master_seed: 0,
            heldout_lines: 1000,
            metrics: Metric::ALL.to_vec(),
            ngram: NgramSettings::default(),
            sgns: SgnsParams::default(),
            alpha: 0.10,
            workers: 1,
            out_dir: PathBuf::from("out"),
            analyze: true,
        }
    }
}

/// Decimal or `0x`-prefixed hexadecimal.
pub fn parse_u64(text: &str) -> Result<u64> {
    let t = text.trim();
    let parsed = match t.strip_prefix("0x").or_else(|| t.strip_prefix("0X")) {
        Some(hex) => u64::from_str_radix(hex, 16),
        None => t.parse(),
    };
    parsed.map_err(|e| Error::Config(format!("invalid integer {t:?}: {e}")))
}

fn parse_num<T: FromStr>(key: &str, value: &str) -> Result<T>
where
    T::Err: fmt::Display,
{
    value
        .trim()
        .parse()
        .map_err(|e| Error::Config(format!("{key}: invalid value {value:?}: {e}")))
}

fn parse_list<T: FromStr>(key: &str, value: &str) -> Result<Vec<T>>
where
    T::Err: fmt::Display,
{
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| parse_num(key, s))
        .collect()
}

impl ExperimentConfig {
    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut config = ExperimentConfig::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!("line {}: expected `key = value`", lineno + 1))
            })?;
            config.set(key.trim(), value.trim())?;
        }
        Ok(config)
    }

    /// Sets one configuration key from its textual value.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "corpus" => self.corpus_path = PathBuf::from(value),
            "questions" => {
                self.questions_path = (!value.is_empty()).then(|| PathBuf::from(value))
            }
            "sizes" => self.sizes = parse_list(key, value)?,
            "replicates" => self.replicates = parse_num(key, value)?,
            "master_seed" | "seed" => self.master_seed = parse_u64(value)?,
            "heldout_lines" => self.heldout_lines = parse_num(key, value)?,
            "metrics" | "metric" => self.metrics = Metric::parse_list(value)?,
            "order" => {
                self.ngram.order = parse_num(key, value)?;
                self.ngram.lambdas = default_lambdas(self.ngram.order);
            }
            "lambdas" => self.ngram.lambdas = parse_list(key, value)?,
            "ngram_min_count" => self.ngram.min_count = parse_num(key, value)?,
            "dim" => self.sgns.dim = parse_num(key, value)?,
            "window" => self.sgns.window = parse_num(key, value)?,
            "negatives" => self.sgns.negatives = parse_num(key, value)?,
            "epochs" => self.sgns.epochs = parse_num(key, value)?,
            "lr" | "initial_lr" => self.sgns.initial_lr = parse_num(key, value)?,
            "subsample" | "subsample_t" => self.sgns.subsample_t = parse_num(key, value)?,
            "min_count" => self.sgns.min_count = parse_num(key, value)?,
            "alpha" => self.alpha = parse_num(key, value)?,
            "workers" => self.workers = parse_num(key, value)?,
            "out_dir" | "out" => self.out_dir = PathBuf::from(value),
            "analyze" => self.analyze = parse_num(key, value)?,
            other => return Err(Error::Config(format!("unknown key {other:?}"))),
        }
        Ok(())
    }

    /// Checks everything that does not need the corpus.
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(msg));
        if self.corpus_path.as_os_str().is_empty() {
            return fail("corpus is required".into());
        }
        if self.sizes.is_empty() {
            return fail("sizes must list at least one subset size".into());
        }
        if self.sizes[0] == 0 || self.sizes.windows(2).any(|w| w[0] >= w[1]) {
            return fail("sizes must be positive and strictly increasing".into());
        }
        if self.replicates == 0 {
            return fail("replicates must be positive".into());
        }
        if self.analyze && self.replicates < MIN_NORMALITY_SAMPLES as u64 {
            return fail(format!(
                "normality analysis needs replicates >= {MIN_NORMALITY_SAMPLES}"
            ));
        }
        if self.heldout_lines == 0 {
            return fail("heldout_lines must be positive".into());
        }
        if self.metrics.is_empty() {
            return fail("no metric selected".into());
        }
        if self.metrics.contains(&Metric::AnalogyAccuracy) && self.questions_path.is_none() {
            return fail("analogy_accuracy needs a questions file".into());
        }
        if self.ngram.order == 0 {
            return fail("order must be at least 1".into());
        }
        if self.ngram.lambdas.len() != self.ngram.order + 1 {
            return fail(format!(
                "order {} needs {} lambdas, got {}",
                self.ngram.order,
                self.ngram.order + 1,
                self.ngram.lambdas.len()
            ));
        }
        let sum: f64 = self.ngram.lambdas.iter().sum();
        if self.ngram.lambdas.iter().any(|l| *l < 0.0) || (sum - 1.0).abs() > 1e-12 {
            return fail(format!("lambdas must be >= 0 and sum to 1 (sum {sum})"));
        }
        if self.ngram.min_count == 0 {
            return fail("ngram_min_count must be positive".into());
        }
        self.sgns
            .validate()
            .or_else(|e| fail(format!("sgns: {e}")))?;
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return fail(format!("alpha must be in (0, 1), got {}", self.alpha));
        }
        if self.workers == 0 {
            return fail("workers must be positive".into());
        }
        Ok(())
    }

    /// Checks the sizes against the corpus line count.
    pub fn validate_against(&self, corpus_lines: u64) -> Result<()> {
        self.validate()?;
        let largest = *self.sizes.last().unwrap_or(&0);
        if largest + self.heldout_lines > corpus_lines {
            return Err(Error::Config(format!(
                "largest size {largest} plus {} held-out lines exceeds the corpus ({corpus_lines} lines)",
                self.heldout_lines
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_file() {
        let text = "
            # comment
            corpus = data/c.txt
            questions = data/q.txt
            sizes = 100, 200,400
            replicates = 20
            master_seed = 0xff
            metrics = perplexity
            order = 2
            lambdas = 0.6, 0.3, 0.1
            dim = 20   # trailing comment
            workers = 4
            alpha = 0.05
        ";
        let c = ExperimentConfig::parse(text).unwrap();
        assert_eq!(c.corpus_path, PathBuf::from("data/c.txt"));
        assert_eq!(c.sizes, vec![100, 200, 400]);
        assert_eq!(c.replicates, 20);
        assert_eq!(c.master_seed, 255);
        assert_eq!(c.metrics, vec![Metric::Perplexity]);
        assert_eq!(c.ngram.order, 2);
        assert_eq!(c.ngram.lambdas, vec![0.6, 0.3, 0.1]);
        assert_eq!(c.sgns.dim, 20);
        assert_eq!(c.workers, 4);
        assert_eq!(c.alpha, 0.05);
        c.validate_against(10_000).unwrap();
        assert!(matches!(c.validate_against(1000), Err(Error::Config(_))));
    }

    #[test]
    fn rejects_bad_input() {
        assert!(ExperimentConfig::parse("nonsense").is_err());
        assert!(ExperimentConfig::parse("colour = red").is_err());
        assert!(ExperimentConfig::parse("replicates = many").is_err());
        let base = "corpus = c\nquestions = q\n";
        for extra in [
            "sizes = 200, 100",
            "sizes = 0, 100",
            "sizes = 10\nreplicates = 5",
            "sizes = 10\nlambdas = 0.5, 0.5",
            "sizes = 10\nepochs = 0",
            "sizes = 10\nalpha = 1.5",
        ] {
            let c = ExperimentConfig::parse(&format!("{base}{extra}")).unwrap();
            assert!(matches!(c.validate(), Err(Error::Config(_))), "{extra}");
        }
        let no_questions = ExperimentConfig::parse("corpus = c\nsizes = 10").unwrap();
        assert!(no_questions.validate().is_err());
        let small = ExperimentConfig::parse("corpus = c\nsizes = 10\nreplicates = 5\nanalyze = false\nmetrics = perplexity").unwrap();
        assert!(small.validate().is_ok());
    }

    #[test]
    fn metric_lists() {
        assert_eq!(Metric::parse_list("both").unwrap(), Metric::ALL.to_vec());
        assert_eq!(
            Metric::parse_list("perplexity,analogy").unwrap(),
            Metric::ALL.to_vec()
        );
        assert!(Metric::parse_list("bleu").is_err());
        assert_eq!(parse_u64("0x10").unwrap(), 16);
        assert_eq!(parse_u64("10").unwrap(), 10);
    }
}
