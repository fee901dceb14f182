use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use super::config::{ExperimentConfig, Metric};
use super::format_sig6;
use crate::corpus::{Corpus, Vocabulary};
use crate::embedding::{analogy_accuracy, read_questions, train_sgns_lines, AnalogyQuestion};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::ngram::NGramModel;
use crate::sampler::{derive_seed, materialize, materialize_complement, sample_lines};

pub const RESULTS_HEADER: &str = "size,replicate,seed,metric,value";
pub const RESULTS_FILE: &str = "results.csv";
pub const POOL_FILE: &str = "pool.txt";
pub const HELDOUT_FILE: &str = "heldout.txt";

/// One evaluation of one metric on one replicate subset. `value` is `None`
/// when the replicate failed.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalRecord {
    pub size: u64,
    pub replicate: u64,
    pub seed: u64,
    pub metric: Metric,
    pub value: Option<f64>,
}

impl EvalRecord {
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{:016x},{},{}",
            self.size,
            self.replicate,
            self.seed,
            self.metric,
            self.value.map(format_sig6).unwrap_or_default()
        )
    }

    fn sort_key(&self) -> (u64, u64, Metric) {
        (self.size, self.replicate, self.metric)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Failure {
    pub size: u64,
    pub replicate: u64,
    pub metric: Metric,
    pub error: String,
}

#[derive(Debug)]
pub struct HeldoutSplit {
    /// Lines available for training subsets.
    pub pool: Corpus,
    pub heldout: Corpus,
    /// Held-out line numbers in the original corpus.
    pub heldout_indices: Vec<u64>,
}

/// Removes a fixed held-out set, drawn with `derive_seed(master, 0, 0)`,
/// from the sampling pool. Writes `heldout.txt` and `pool.txt` to `out_dir`.
pub fn split_heldout(
    corpus: &Corpus,
    heldout_lines: u64,
    master_seed: u64,
    out_dir: &Path,
) -> Result<HeldoutSplit> {
    if heldout_lines >= corpus.line_count() {
        return Err(Error::SubsetTooLarge {
            k: heldout_lines,
            available: corpus.line_count(),
        });
    }
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let subset = sample_lines(corpus, heldout_lines, derive_seed(master_seed, 0, 0))?;
    let heldout = materialize(&subset, corpus, out_dir.join(HELDOUT_FILE))?;
    let pool = materialize_complement(&subset, corpus, out_dir.join(POOL_FILE))?;
    Ok(HeldoutSplit {
        pool,
        heldout,
        heldout_indices: subset.indices().to_vec(),
    })
}

/// Trains and evaluates one metric on in-memory training lines.
pub fn evaluate_lines(
    metric: Metric,
    lines: &[String],
    config: &ExperimentConfig,
    seed: u64,
    heldout: &[String],
    questions: &[AnalogyQuestion],
) -> Result<f64> {
    match metric {
        Metric::Perplexity => {
            let vocab = Vocabulary::from_lines(lines, config.ngram.min_count)?;
            let model = NGramModel::train_lines(lines, vocab, config.ngram.order)?
                .with_lambdas(&config.ngram.lambdas)?;
            model.perplexity_lines(heldout)
        }
        Metric::AnalogyAccuracy => {
            let params = crate::embedding::SgnsParams {
                seed,
                ..config.sgns.clone()
            };
            let model = train_sgns_lines(lines, &params)?;
            Ok(analogy_accuracy(&model, questions)?.percent)
        }
    }
}

#[derive(Debug)]
pub struct RunOutcome {
    pub results_csv: PathBuf,
    /// Canonically ordered by (size, replicate, metric).
    pub records: Vec<EvalRecord>,
    pub failures: Vec<Failure>,
    pub split: HeldoutSplit,
}

struct Shared<'a> {
    config: &'a ExperimentConfig,
    pool: &'a Corpus,
    heldout: &'a [String],
    questions: &'a [AnalogyQuestion],
}

fn run_replicate(shared: &Shared<'_>, size: u64, replicate: u64) -> Vec<(EvalRecord, Option<String>)> {
    let config = shared.config;
    let seed = derive_seed(config.master_seed, size, replicate);
    let lines = sample_lines(shared.pool, size, seed).and_then(|s| s.read_lines(shared.pool));
    config
        .metrics
        .iter()
        .map(|&metric| {
            let value = lines.as_ref().map_err(|e| e.to_string()).and_then(|lines| {
                evaluate_lines(metric, lines, config, seed, shared.heldout, shared.questions)
                    .map_err(|e| format!("{}: {e}", e.kind()))
            });
            let (value, error) = match value {
                Ok(v) if v.is_finite() => (Some(v), None),
                Ok(v) => (None, Some(format!("non-finite value {v}"))),
                Err(e) => (None, Some(e)),
            };
            let record = EvalRecord {
                size,
                replicate,
                seed,
                metric,
                value,
            };
            (record, error)
        })
        .collect()
}

/// Runs every (size, replicate) task and writes `results.csv` to the output
/// directory.
///
/// Replicates that fail are recorded with an empty value and the run goes
/// on; `CellFailed` is returned (after the CSV is written) only when every
/// replicate of some (size, metric) cell failed. The CSV bytes do not depend
/// on `workers`.
pub fn run_experiment(config: &ExperimentConfig) -> Result<RunOutcome> {
    config.validate()?;
    let corpus = Corpus::open(&config.corpus_path)?;
    config.validate_against(corpus.line_count())?;
    let questions = match (&config.questions_path, config.metrics.contains(&Metric::AnalogyAccuracy)) {
        (Some(path), true) => read_questions(path)?,
        _ => Vec::new(),
    };

    let split = split_heldout(&corpus, config.heldout_lines, config.master_seed, &config.out_dir)?;
    let heldout = split.heldout.read_lines()?;
    let shared = Shared {
        config,
        pool: &split.pool,
        heldout: &heldout,
        questions: &questions,
    };

    let tasks: Vec<(u64, u64)> = config
        .sizes
        .iter()
        .flat_map(|&s| (0..config.replicates).map(move |r| (s, r)))
        .collect();
    let exec = Execution::with_workers(config.workers);
    let outputs = exec.map(&tasks, |&(size, replicate)| run_replicate(&shared, size, replicate));

    let mut records = Vec::with_capacity(tasks.len() * config.metrics.len());
    let mut failures = Vec::new();
    for (record, error) in outputs.into_iter().flatten() {
        if let Some(error) = error {
            failures.push(Failure {
                size: record.size,
                replicate: record.replicate,
                metric: record.metric,
                error,
            });
        }
        records.push(record);
    }
    records.sort_by_key(EvalRecord::sort_key);

    let results_csv = config.out_dir.join(RESULTS_FILE);
    write_results_csv(&records, &results_csv)?;

    for &size in &config.sizes {
        for &metric in &config.metrics {
            let all_failed = records
                .iter()
                .filter(|r| r.size == size && r.metric == metric)
                .all(|r| r.value.is_none());
            if all_failed {
                return Err(Error::CellFailed {
                    metric: metric.to_string(),
                    size,
                });
            }
        }
    }

    if config.analyze {
        super::analyze(&results_csv, config.alpha, &config.out_dir)?;
    }
    Ok(RunOutcome {
        results_csv,
        records,
        failures,
        split,
    })
}

/// Writes the results through a temporary file and a rename.
pub fn write_results_csv(records: &[EvalRecord], path: &Path) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| RESULTS_FILE.into());
    let tmp = dir.join(format!(".{name}.tmp"));
    {
        let file = File::create(&tmp).map_err(|e| Error::io(&tmp, e))?;
        let mut w = BufWriter::new(file);
        let err = |e| Error::io(&tmp, e);
        writeln!(w, "{RESULTS_HEADER}").map_err(err)?;
        for r in records {
            writeln!(w, "{}", r.csv_row()).map_err(err)?;
        }
        w.flush().map_err(err)?;
    }
    std::fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

pub fn read_results_csv(path: impl AsRef<Path>) -> Result<Vec<EvalRecord>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut lines = text.lines();
    if lines.next().map(str::trim) != Some(RESULTS_HEADER) {
        return Err(Error::Parse(format!(
            "{}: expected header {RESULTS_HEADER:?}",
            path.display()
        )));
    }
    let bad = |n: usize, what: &str| {
        Error::Parse(format!("{}: line {}: {what}", path.display(), n + 2))
    };
    let mut records = Vec::new();
    for (n, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        let [size, replicate, seed, metric, value] = fields[..] else {
            return Err(bad(n, "expected 5 fields"));
        };
        let value = match value.trim() {
            "" => None,
            v => Some(v.parse::<f64>().map_err(|_| bad(n, "invalid value"))?),
        };
        records.push(EvalRecord {
            size: size.parse().map_err(|_| bad(n, "invalid size"))?,
            replicate: replicate.parse().map_err(|_| bad(n, "invalid replicate"))?,
            seed: u64::from_str_radix(seed, 16).map_err(|_| bad(n, "invalid seed"))?,
            metric: metric.parse().map_err(|_| bad(n, "invalid metric"))?,
            value,
        });
    }
    Ok(records)
}
