//! Line-oriented corpora: tokenization, vocabulary construction and the
//! synthetic corpus generator with planted analogy families.
//!
//! A corpus is a UTF-8 file with one sentence per line. Lines are the unit
//! of sampling throughout the crate.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Zipf};

use crate::error::{Error, Result};

/// Fraction of synthetic lines that instantiate the analogy template.
pub const TEMPLATE_FRACTION: f64 = 0.5;

/// Section header used for the generated analogy questions.
pub const SYNTHETIC_SECTION: &str = "capital-country";

/// Lowercases `line`, splits on Unicode whitespace and strips every piece of
/// leading/trailing characters that are neither letters nor digits.
/// Internal punctuation survives (`"e-mail"` stays one token).
pub fn tokenize(line: &str) -> Vec<String> {
    line.to_lowercase()
        .split_whitespace()
        .map(|piece| piece.trim_matches(|c: char| !c.is_alphanumeric()))
        .filter(|piece| !piece.is_empty())
        .map(str::to_owned)
        .collect()
}

/// Handle to a line-oriented text file with its record count cached.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Corpus {
    path: PathBuf,
    line_count: u64,
    byte_len: u64,
}

impl Corpus {
    /// Opens `path` and counts its newline-delimited records in one
    /// streaming pass. A trailing line without a final LF counts as a record.
    pub fn open(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref().to_path_buf();
        let file = File::open(&path).map_err(|e| Error::io(&path, e))?;
        let mut reader = BufReader::with_capacity(1 << 16, file);
        let mut line_count = 0u64;
        let mut byte_len = 0u64;
        let mut last = b'\n';
        loop {
            let buf = reader.fill_buf().map_err(|e| Error::io(&path, e))?;
            if buf.is_empty() {
                break;
            }
            line_count += buf.iter().filter(|&&b| b == b'\n').count() as u64;
            last = buf[buf.len() - 1];
            let n = buf.len();
            byte_len += n as u64;
            reader.consume(n);
        }
        if byte_len > 0 && last != b'\n' {
            line_count += 1;
        }
        Ok(Corpus {
            path,
            line_count,
            byte_len,
        })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn line_count(&self) -> u64 {
        self.line_count
    }

    pub fn byte_len(&self) -> u64 {
        self.byte_len
    }

    /// Streams the raw records, terminator included, to `f` with their
    /// zero-based index.
    pub fn for_each_raw_line<F>(&self, mut f: F) -> Result<()>
    where
        F: FnMut(u64, &[u8]) -> Result<()>,
    {
        let file = File::open(&self.path).map_err(|e| Error::io(&self.path, e))?;
        let mut reader = BufReader::with_capacity(1 << 16, file);
        let mut buf = Vec::with_capacity(256);
        let mut index = 0u64;
        loop {
            buf.clear();
            let n = reader
                .read_until(b'\n', &mut buf)
                .map_err(|e| Error::io(&self.path, e))?;
            if n == 0 {
                return Ok(());
            }
            f(index, &buf)?;
            index += 1;
        }
    }

    /// Streams decoded lines (terminator stripped) to `f`.
    pub fn for_each_line<F>(&self, mut f: F) -> Result<()>
    where
        F: FnMut(&str) -> Result<()>,
    {
        self.for_each_raw_line(|index, raw| {
            let text = std::str::from_utf8(raw).map_err(|e| {
                Error::Parse(format!(
                    "{}: line {}: invalid UTF-8: {e}",
                    self.path.display(),
                    index + 1
                ))
            })?;
            f(strip_terminator(text))
        })
    }

    /// Reads every line into memory.
    pub fn read_lines(&self) -> Result<Vec<String>> {
        let mut lines = Vec::with_capacity(self.line_count as usize);
        self.for_each_line(|line| {
            lines.push(line.to_owned());
            Ok(())
        })?;
        Ok(lines)
    }
}

pub(crate) fn strip_terminator(line: &str) -> &str {
    let line = line.strip_suffix('\n').unwrap_or(line);
    line.strip_suffix('\r').unwrap_or(line)
}

/// Token inventory with dense ids, sorted by descending count with
/// lexicographic tie-break.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    tokens: Vec<String>,
    counts: Vec<u64>,
    index: HashMap<String, u32>,
    min_count: u64,
    total_tokens: u64,
}

impl Vocabulary {
    /// Keeps tokens with `count >= min_count`.
    pub fn from_counts(counts: HashMap<String, u64>, min_count: u64) -> Result<Self> {
        if min_count == 0 {
            return Err(Error::InvalidParams("min_count must be positive".into()));
        }
        let mut kept: Vec<(String, u64)> = counts
            .into_iter()
            .filter(|&(_, c)| c >= min_count)
            .collect();
        kept.sort_unstable_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        if kept.len() > u32::MAX as usize {
            return Err(Error::InvalidParams("vocabulary exceeds u32 ids".into()));
        }
        let total_tokens = kept.iter().map(|(_, c)| c).sum();
        let index = kept
            .iter()
            .enumerate()
            .map(|(i, (t, _))| (t.clone(), i as u32))
            .collect();
        let (tokens, counts) = kept.into_iter().unzip();
        Ok(Vocabulary {
            tokens,
            counts,
            index,
            min_count,
            total_tokens,
        })
    }

    pub fn from_lines<I, S>(lines: I, min_count: u64) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut counts = HashMap::new();
        for line in lines {
            count_tokens(line.as_ref(), &mut counts);
        }
        Self::from_counts(counts, min_count)
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn id(&self, token: &str) -> Option<u32> {
        self.index.get(token).copied()
    }

    pub fn token(&self, id: u32) -> &str {
        &self.tokens[id as usize]
    }

    pub fn count(&self, id: u32) -> u64 {
        self.counts[id as usize]
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn min_count(&self) -> u64 {
        self.min_count
    }

    /// Sum of retained counts.
    pub fn total_tokens(&self) -> u64 {
        self.total_tokens
    }

    /// Ids of the in-vocabulary tokens of `line`, OOV tokens dropped.
    pub fn encode(&self, line: &str) -> Vec<u32> {
        tokenize(line)
            .iter()
            .filter_map(|t| self.id(t))
            .collect()
    }
}

fn count_tokens(line: &str, counts: &mut HashMap<String, u64>) {
    for token in tokenize(line) {
        *counts.entry(token).or_insert(0) += 1;
    }
}

/// Counts tokens over every line of `corpus`.
pub fn build_vocab(corpus: &Corpus, min_count: u64) -> Result<Vocabulary> {
    let mut counts = HashMap::new();
    corpus.for_each_line(|line| {
        count_tokens(line, &mut counts);
        Ok(())
    })?;
    Vocabulary::from_counts(counts, min_count)
}

/// Parameters of a synthetic corpus.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SyntheticSpec {
    /// Number of planted `capQ`/`ctyQ` families.
    pub n_families: u32,
    /// Size of the Zipf-distributed filler vocabulary `w0..`.
    pub n_filler: u32,
    pub n_lines: u64,
    pub seed: u64,
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n_families < 2 {
            return Err(Error::InvalidParams(
                "synthetic corpus needs at least 2 families".into(),
            ));
        }
        if self.n_filler == 0 {
            return Err(Error::InvalidParams("n_filler must be positive".into()));
        }
        if self.n_lines == 0 {
            return Err(Error::InvalidParams("n_lines must be positive".into()));
        }
        Ok(())
    }

    /// Number of questions in the generated analogy file.
    pub fn question_count(&self) -> u64 {
        let f = u64::from(self.n_families);
        f * (f - 1)
    }
}

/// Writes a synthetic corpus and its analogy question file.
///
/// Half of the lines (in expectation) read `the capQ is the capital of ctyQ`
/// for a uniformly drawn family `q`; the others are 8 to 15 filler tokens
/// drawn Zipf(1.0) over `w0..w{n_filler-1}`. The question file lists every
/// ordered family pair `capI ctyI capJ ctyJ` with `I != J`.
pub fn generate_synthetic(
    spec: &SyntheticSpec,
    out_corpus: impl AsRef<Path>,
    out_questions: impl AsRef<Path>,
) -> Result<Corpus> {
    spec.validate()?;
    let out_corpus = out_corpus.as_ref();
    let out_questions = out_questions.as_ref();

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let zipf = Zipf::new(f64::from(spec.n_filler), 1.0)
        .map_err(|e| Error::InvalidParams(format!("zipf: {e}")))?;

    let file = File::create(out_corpus).map_err(|e| Error::io(out_corpus, e))?;
    let mut w = BufWriter::new(file);
    let mut line = String::with_capacity(128);
    for _ in 0..spec.n_lines {
        line.clear();
        if rng.random_bool(TEMPLATE_FRACTION) {
            let q = rng.random_range(0..spec.n_families);
            line.push_str(&format!("the cap{q} is the capital of cty{q}"));
        } else {
            let len = rng.random_range(8..=15);
            for i in 0..len {
                // Zipf samples ranks 1..=n as floats.
                let rank = zipf.sample(&mut rng) as u64;
                if i > 0 {
                    line.push(' ');
                }
                line.push_str(&format!("w{}", rank - 1));
            }
        }
        line.push('\n');
        w.write_all(line.as_bytes())
            .map_err(|e| Error::io(out_corpus, e))?;
    }
    w.flush().map_err(|e| Error::io(out_corpus, e))?;
    drop(w);

    let file = File::create(out_questions).map_err(|e| Error::io(out_questions, e))?;
    let mut q = BufWriter::new(file);
    let write_err = |e| Error::io(out_questions, e);
    writeln!(q, ": {SYNTHETIC_SECTION}").map_err(write_err)?;
    for i in 0..spec.n_families {
        for j in 0..spec.n_families {
            if i != j {
                writeln!(q, "cap{i} cty{i} cap{j} cty{j}").map_err(write_err)?;
            }
        }
    }
    q.flush().map_err(write_err)?;

    Corpus::open(out_corpus)
}
