//! Skip-gram with negative sampling (SGNS) and 3CosAdd analogy evaluation.
//!
//! Training is single-threaded and fully determined by the seed: the same
//! lines and parameters always yield bit-identical matrices.

mod analogy;
mod noise;
mod sgd;

use std::io::Write;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub use analogy::{
    analogy_accuracy, parse_questions, read_questions, AccuracyReport, AnalogyQuestion,
    SectionAccuracy,
};
pub use noise::{NoiseTable, NOISE_POWER};
pub use sgd::{pair_loss, sgd_pair_update, Sigmoid, MAX_EXP, SIGMOID_TABLE_SIZE};

use crate::corpus::{Corpus, Vocabulary};
use crate::error::{Error, Result};

/// Learning rate never decays below `initial_lr * MIN_LR_FRACTION`.
pub const MIN_LR_FRACTION: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq)]
pub struct SgnsParams {
    pub dim: usize,
    /// Maximum window radius; each center draws its radius from `1..=window`.
    pub window: usize,
    pub negatives: usize,
    pub epochs: usize,
    pub initial_lr: f64,
    /// Frequent-word subsampling threshold; 0 disables subsampling.
    pub subsample_t: f64,
    pub min_count: u64,
    pub seed: u64,
    /// Use the exact logistic instead of the lookup table.
    pub exact_sigmoid: bool,
}

impl Default for SgnsParams {
    fn default() -> Self {
        SgnsParams {
            dim: 100,
            window: 5,
            negatives: 5,
            epochs: 5,
            initial_lr: 0.025,
            subsample_t: 1e-4,
            min_count: 5,
            seed: 1,
            exact_sigmoid: false,
        }
    }
}

impl SgnsParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("dim", self.dim),
            ("window", self.window),
            ("negatives", self.negatives),
            ("epochs", self.epochs),
        ];
        for (name, value) in positive {
            if value == 0 {
                return Err(Error::InvalidParams(format!("{name} must be positive")));
            }
        }
        if self.min_count == 0 {
            return Err(Error::InvalidParams("min_count must be positive".into()));
        }
        if !(self.initial_lr.is_finite() && self.initial_lr > 0.0) {
            return Err(Error::InvalidParams("initial_lr must be positive".into()));
        }
        if !(self.subsample_t.is_finite() && self.subsample_t >= 0.0) {
            return Err(Error::InvalidParams("subsample_t must be >= 0".into()));
        }
        Ok(())
    }
}

/// Vocabulary plus input (word) and output (context) vector tables, stored
/// row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingModel {
    vocab: Vocabulary,
    dim: usize,
    input: Vec<f32>,
    output: Vec<f32>,
}

impl EmbeddingModel {
    pub fn from_parts(
        vocab: Vocabulary,
        dim: usize,
        input: Vec<f32>,
        output: Vec<f32>,
    ) -> Result<Self> {
        let expected = vocab.len() * dim;
        if dim == 0 || input.len() != expected || output.len() != expected {
            return Err(Error::ShapeMismatch(format!(
                "{} tokens x {dim} dims needs {expected} entries per table, got {} and {}",
                vocab.len(),
                input.len(),
                output.len()
            )));
        }
        Ok(EmbeddingModel {
            vocab,
            dim,
            input,
            output,
        })
    }

    pub fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn input_vector(&self, id: u32) -> &[f32] {
        let i = id as usize * self.dim;
        &self.input[i..i + self.dim]
    }

    pub fn output_vector(&self, id: u32) -> &[f32] {
        let i = id as usize * self.dim;
        &self.output[i..i + self.dim]
    }

    pub fn input_matrix(&self) -> &[f32] {
        &self.input
    }

    pub fn output_matrix(&self) -> &[f32] {
        &self.output
    }

    /// No NaN or infinite entry in either table.
    pub fn is_finite(&self) -> bool {
        self.input.iter().chain(&self.output).all(|x| x.is_finite())
    }

    /// Word-vector text format: `<|V|> <dim>` then `token v1 .. vdim`.
    pub fn dump(&self, mut w: impl Write) -> std::io::Result<()> {
        writeln!(w, "{} {}", self.vocab.len(), self.dim)?;
        for (id, token) in self.vocab.tokens().iter().enumerate() {
            write!(w, "{token}")?;
            for x in self.input_vector(id as u32) {
                write!(w, " {x}")?;
            }
            writeln!(w)?;
        }
        Ok(())
    }

    pub fn dump_to_file(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = std::io::BufWriter::new(file);
        self.dump(&mut w).map_err(|e| Error::io(path, e))?;
        w.flush().map_err(|e| Error::io(path, e))
    }
}

/// `u·v / (|u| |v|)`.
pub fn cosine(u: &[f32], v: &[f32]) -> Result<f64> {
    if u.len() != v.len() {
        return Err(Error::ShapeMismatch(format!(
            "vectors of length {} and {}",
            u.len(),
            v.len()
        )));
    }
    let (mut dot, mut uu, mut vv) = (0.0f64, 0.0f64, 0.0f64);
    for (&a, &b) in u.iter().zip(v) {
        let (a, b) = (f64::from(a), f64::from(b));
        dot += a * b;
        uu += a * a;
        vv += b * b;
    }
    if uu == 0.0 || vv == 0.0 {
        return Err(Error::ZeroVector);
    }
    Ok((dot / (uu.sqrt() * vv.sqrt())).clamp(-1.0, 1.0))
}

/// Trains SGNS on every line of `corpus`.
pub fn train_sgns(corpus: &Corpus, params: &SgnsParams) -> Result<EmbeddingModel> {
    train_sgns_lines(&corpus.read_lines()?, params)
}

/// Trains SGNS on in-memory lines.
///
/// Per epoch, each line is subsampled (keep probability
/// `min(1, (sqrt(f/t) + 1) t / f)` for relative frequency `f`), then every
/// center word draws a window radius uniformly from `1..=window` and each
/// (center, context) pair gets one positive and `negatives` noise updates.
/// The learning rate decays linearly with processed tokens.
pub fn train_sgns_lines<S: AsRef<str>>(lines: &[S], params: &SgnsParams) -> Result<EmbeddingModel> {
    params.validate()?;
    let vocab = Vocabulary::from_lines(lines.iter().map(AsRef::as_ref), params.min_count)?;
    if vocab.is_empty() {
        return Err(Error::EmptyTrainingStream);
    }
    let encoded: Vec<Vec<u32>> = lines.iter().map(|l| vocab.encode(l.as_ref())).collect();
    let train_tokens: u64 = encoded.iter().map(|l| l.len() as u64).sum();
    if train_tokens == 0 {
        return Err(Error::EmptyTrainingStream);
    }
    let noise = NoiseTable::new(&vocab)?;
    let sigmoid = if params.exact_sigmoid {
        Sigmoid::exact()
    } else {
        Sigmoid::table()
    };

    let keep: Vec<f32> = vocab
        .counts()
        .iter()
        .map(|&c| {
            let t = params.subsample_t;
            if t <= 0.0 {
                return 1.0;
            }
            let f = c as f64 / train_tokens as f64;
            (((f / t).sqrt() + 1.0) * t / f).min(1.0) as f32
        })
        .collect();

    let dim = params.dim;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let bound = 0.5 / dim as f32;
    let mut input: Vec<f32> = (0..vocab.len() * dim)
        .map(|_| rng.random_range(-bound..bound))
        .collect();
    let mut output = vec![0.0f32; vocab.len() * dim];

    let total = (params.epochs as u64 * train_tokens) as f64;
    let mut processed = 0u64;
    let mut sentence = Vec::new();
    for _ in 0..params.epochs {
        for line in &encoded {
            let progress = processed as f64 / total;
            let lr = (params.initial_lr * (1.0 - progress).max(MIN_LR_FRACTION)) as f32;
            processed += line.len() as u64;

            sentence.clear();
            for &id in line {
                let k = keep[id as usize];
                if k >= 1.0 || rng.random::<f32>() < k {
                    sentence.push(id);
                }
            }
            for (pos, &center) in sentence.iter().enumerate() {
                let radius = rng.random_range(1..=params.window);
                let lo = pos.saturating_sub(radius);
                let hi = (pos + radius).min(sentence.len() - 1);
                for (ctx_pos, &context) in sentence.iter().enumerate().take(hi + 1).skip(lo) {
                    if ctx_pos == pos {
                        continue;
                    }
                    update(&mut input, &mut output, dim, center, context, 1.0, lr, &sigmoid);
                    for _ in 0..params.negatives {
                        let neg = noise.sample(&mut rng);
                        if neg == context {
                            continue;
                        }
                        update(&mut input, &mut output, dim, center, neg, 0.0, lr, &sigmoid);
                    }
                }
            }
        }
    }
    EmbeddingModel::from_parts(vocab, dim, input, output)
}

#[allow(clippy::too_many_arguments)]
#[inline]
fn update(
    input: &mut [f32],
    output: &mut [f32],
    dim: usize,
    center: u32,
    target: u32,
    label: f32,
    lr: f32,
    sigmoid: &Sigmoid,
) {
    let c = center as usize * dim;
    let t = target as usize * dim;
    sgd_pair_update(
        &mut input[c..c + dim],
        &mut output[t..t + dim],
        label,
        lr,
        sigmoid,
    );
}
