//! Count-based n-gram language model with fixed-weight interpolation and a
//! uniform floor, plus held-out perplexity.
//!
//! Every line is padded on the left with `order - 1` start symbols and has
//! no end symbol, so contexts never cross line boundaries. Tokens outside
//! the vocabulary map to a reserved unknown id at training and evaluation.

use std::collections::HashMap;
use std::io::Write;
use std::path::Path;

use crate::corpus::{tokenize, Corpus, Vocabulary};
use crate::error::{Error, Result};

pub const DEFAULT_ORDER: usize = 3;

/// Trigram weights `(λ3, λ2, λ1, λ0)`; `λ0` weights the uniform floor.
pub const DEFAULT_TRIGRAM_LAMBDAS: [f64; 4] = [0.5, 0.3, 0.15, 0.05];

pub const UNK_TOKEN: &str = "<unk>";
pub const BOS_TOKEN: &str = "<s>";

/// Default interpolation weights for `order`, highest order first.
///
/// Orders other than 3 keep `λ0 = 0.05` and split the rest with each order
/// weighted twice the next lower one.
pub fn default_lambdas(order: usize) -> Vec<f64> {
    if order == DEFAULT_ORDER {
        return DEFAULT_TRIGRAM_LAMBDAS.to_vec();
    }
    let floor = 0.05;
    let raw: Vec<f64> = (0..order).map(|i| 2f64.powi((order - 1 - i) as i32)).collect();
    let sum: f64 = raw.iter().sum();
    raw.iter()
        .map(|w| (1.0 - floor) * w / sum)
        .chain(std::iter::once(floor))
        .collect()
}

#[derive(Debug, Clone)]
pub struct NGramModel {
    order: usize,
    vocab: Vocabulary,
    /// `counts[j - 1]`: j-gram (context then word) -> count.
    counts: Vec<HashMap<Vec<u32>, u64>>,
    /// `context_totals[j - 1]`: (j-1)-gram context -> total count.
    context_totals: Vec<HashMap<Vec<u32>, u64>>,
    lambdas: Vec<f64>,
}

impl NGramModel {
    /// Counts every j-gram (`j = 1..=order`) ending at a real token of each
    /// padded line.
    pub fn train_lines<I, S>(lines: I, vocab: Vocabulary, order: usize) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        if order == 0 {
            return Err(Error::InvalidParams("n-gram order must be at least 1".into()));
        }
        if vocab.is_empty() {
            return Err(Error::EmptyVocab);
        }
        let mut model = NGramModel {
            order,
            counts: vec![HashMap::new(); order],
            context_totals: vec![HashMap::new(); order],
            lambdas: default_lambdas(order),
            vocab,
        };
        let mut padded = Vec::new();
        for line in lines {
            model.pad_line(line.as_ref(), &mut padded);
            for end in (order - 1)..padded.len() {
                for j in 1..=order {
                    let gram = &padded[end + 1 - j..=end];
                    bump(&mut model.counts[j - 1], gram);
                    bump(&mut model.context_totals[j - 1], &gram[..j - 1]);
                }
            }
        }
        Ok(model)
    }

    /// Replaces the interpolation weights, highest order first with the
    /// uniform-floor weight last.
    pub fn with_lambdas(mut self, lambdas: &[f64]) -> Result<Self> {
        if lambdas.len() != self.order + 1 {
            return Err(Error::InvalidParams(format!(
                "order {} needs {} lambdas, got {}",
                self.order,
                self.order + 1,
                lambdas.len()
            )));
        }
        if lambdas.iter().any(|l| !l.is_finite() || *l < 0.0) {
            return Err(Error::InvalidParams("lambdas must be finite and >= 0".into()));
        }
        let sum: f64 = lambdas.iter().sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParams(format!("lambdas sum to {sum}, not 1")));
        }
        self.lambdas = lambdas.to_vec();
        Ok(self)
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn lambdas(&self) -> &[f64] {
        &self.lambdas
    }

    pub fn unk_id(&self) -> u32 {
        self.vocab.len() as u32
    }

    pub fn bos_id(&self) -> u32 {
        self.vocab.len() as u32 + 1
    }

    /// Size of the prediction support: vocabulary plus the unknown token.
    pub fn support_size(&self) -> usize {
        self.vocab.len() + 1
    }

    /// Id of `token`, falling back to the unknown id.
    pub fn token_id(&self, token: &str) -> u32 {
        self.vocab.id(token).unwrap_or_else(|| self.unk_id())
    }

    pub fn count(&self, gram: &[u32]) -> u64 {
        match gram.len() {
            0 => 0,
            j if j <= self.order => self.counts[j - 1].get(gram).copied().unwrap_or(0),
            _ => 0,
        }
    }

    pub fn context_total(&self, context: &[u32]) -> u64 {
        let j = context.len() + 1;
        if j > self.order {
            return 0;
        }
        self.context_totals[j - 1].get(context).copied().unwrap_or(0)
    }

    /// Interpolated probability of `word` after `context` (`order - 1` ids).
    ///
    /// Components whose context was never seen are dropped and the remaining
    /// weights renormalized.
    pub fn prob(&self, context: &[u32], word: u32) -> Result<f64> {
        if context.len() != self.order - 1 {
            return Err(Error::InvalidQuery(format!(
                "context has {} ids, order {} needs {}",
                context.len(),
                self.order,
                self.order - 1
            )));
        }
        if word == self.bos_id() {
            return Err(Error::InvalidQuery("the start symbol is never predicted".into()));
        }
        if word > self.bos_id() || context.iter().any(|&c| c > self.bos_id()) {
            return Err(Error::InvalidQuery(format!("id out of range: {word}")));
        }
        let floor_weight = self.lambdas[self.order];
        let mut active = floor_weight;
        let mut mass = floor_weight / self.support_size() as f64;
        let mut key = Vec::with_capacity(self.order);
        for j in 1..=self.order {
            let lambda = self.lambdas[self.order - j];
            let ctx = &context[context.len() + 1 - j..];
            let total = self.context_total(ctx);
            if total == 0 {
                continue;
            }
            active += lambda;
            key.clear();
            key.extend_from_slice(ctx);
            key.push(word);
            let c = self.counts[j - 1].get(key.as_slice()).copied().unwrap_or(0);
            mass += lambda * c as f64 / total as f64;
        }
        if active == 0.0 {
            return Ok(0.0);
        }
        Ok(mass / active)
    }

    /// Perplexity over in-memory lines; see [`perplexity`].
    pub fn perplexity_lines<I, S>(&self, lines: I) -> Result<f64>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut padded = Vec::new();
        let mut log_sum = 0.0;
        let mut n = 0u64;
        for line in lines {
            let line = line.as_ref();
            self.pad_line(line, &mut padded);
            for end in (self.order - 1)..padded.len() {
                let context = &padded[end + 1 - self.order..end];
                let p = self.prob(context, padded[end])?;
                if p <= 0.0 {
                    return Err(Error::ZeroProbabilityEvent(format!(
                        "token {:?} in line {line:?}",
                        self.id_token(padded[end])
                    )));
                }
                log_sum += p.ln();
                n += 1;
            }
        }
        if n == 0 {
            return Err(Error::EmptyEvalSet);
        }
        Ok((-log_sum / n as f64).exp())
    }

    fn id_token(&self, id: u32) -> &str {
        if id == self.unk_id() {
            UNK_TOKEN
        } else if id == self.bos_id() {
            BOS_TOKEN
        } else {
            self.vocab.token(id)
        }
    }

    fn pad_line(&self, line: &str, padded: &mut Vec<u32>) {
        padded.clear();
        padded.resize(self.order - 1, self.bos_id());
        padded.extend(tokenize(line).iter().map(|t| self.token_id(t)));
    }

    /// Writes `j<TAB>gram tokens<TAB>count` lines, sorted by order then gram.
    pub fn dump(&self, mut w: impl Write) -> std::io::Result<()> {
        for (j, table) in self.counts.iter().enumerate() {
            let mut rows: Vec<(String, u64)> = table
                .iter()
                .map(|(gram, &c)| {
                    let text: Vec<&str> = gram.iter().map(|&id| self.id_token(id)).collect();
                    (text.join(" "), c)
                })
                .collect();
            rows.sort();
            for (gram, c) in rows {
                writeln!(w, "{}\t{gram}\t{c}", j + 1)?;
            }
        }
        Ok(())
    }

    /// Every context total equals the sum of the counts it prefixes.
    pub fn is_consistent(&self) -> bool {
        (0..self.order).all(|j| {
            let mut sums: HashMap<&[u32], u64> = HashMap::new();
            for (gram, &c) in &self.counts[j] {
                *sums.entry(&gram[..j]).or_insert(0) += c;
            }
            sums.len() == self.context_totals[j].len()
                && sums
                    .iter()
                    .all(|(ctx, s)| self.context_totals[j].get(*ctx) == Some(s))
        })
    }
}

fn bump(table: &mut HashMap<Vec<u32>, u64>, key: &[u32]) {
    if let Some(c) = table.get_mut(key) {
        *c += 1;
    } else {
        table.insert(key.to_vec(), 1);
    }
}

/// Trains an n-gram model on every line of `corpus`.
pub fn train_ngram(corpus: &Corpus, vocab: Vocabulary, order: usize) -> Result<NGramModel> {
    NGramModel::train_lines(corpus.read_lines()?, vocab, order)
}

/// `exp(-(1/N) Σ ln p(w_i | context_i))` over the real tokens of
/// `eval_corpus`.
pub fn perplexity(model: &NGramModel, eval_corpus: &Corpus) -> Result<f64> {
    model.perplexity_lines(eval_corpus.read_lines()?)
}

/// Writes the count dump to `path`.
pub fn dump_to_file(model: &NGramModel, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = std::io::BufWriter::new(file);
    model.dump(&mut w).map_err(|e| Error::io(path, e))?;
    w.flush().map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn model(lines: &[&str], order: usize) -> NGramModel {
        let vocab = Vocabulary::from_lines(lines, 1).unwrap();
        NGramModel::train_lines(lines, vocab, order).unwrap()
    }

    #[test]
    fn bigram_counts() {
        let m = model(&["a b"], 2);
        let (a, b, s) = (m.token_id("a"), m.token_id("b"), m.bos_id());
        assert_eq!(m.count(&[s, a]), 1);
        assert_eq!(m.count(&[a, b]), 1);
        assert_eq!(m.count(&[a]), 1);
        assert_eq!(m.count(&[b]), 1);
        assert_eq!(m.count(&[s]), 0);
        assert_eq!(m.context_total(&[]), 2);
        assert_eq!(m.context_total(&[s]), 1);
        assert!(m.is_consistent());
    }

    #[test]
    fn unigram_repeated() {
        let m = model(&["a a a"], 1);
        assert_eq!(m.count(&[m.token_id("a")]), 3);
    }

    #[test]
    fn empty_training_corpus_uses_floor_only() {
        let vocab = Vocabulary::from_lines(["a b c d e f g h i"], 1).unwrap();
        let m = NGramModel::train_lines(Vec::<String>::new(), vocab, 3).unwrap();
        assert_eq!(m.support_size(), 10);
        let ctx = [m.bos_id(), m.bos_id()];
        for w in 0..m.support_size() as u32 {
            assert!((m.prob(&ctx, w).unwrap() - 0.1).abs() < 1e-15);
        }
        assert!((m.perplexity_lines(["a b zz"]).unwrap() - 10.0).abs() < 1e-9);
    }

    #[test]
    fn empty_vocab_rejected() {
        let vocab = Vocabulary::from_lines(Vec::<String>::new(), 1).unwrap();
        assert!(matches!(
            NGramModel::train_lines(["a"], vocab, 3),
            Err(Error::EmptyVocab)
        ));
    }

    #[test]
    fn unigram_mle() {
        let vocab = Vocabulary::from_lines(["a a a b"], 1).unwrap();
        let m = NGramModel::train_lines(["a a a b"], vocab, 3)
            .unwrap()
            .with_lambdas(&[0.0, 0.0, 1.0, 0.0])
            .unwrap();
        let ctx = [m.bos_id(), m.bos_id()];
        assert!((m.prob(&ctx, m.token_id("a")).unwrap() - 0.75).abs() < 1e-15);
        assert!((m.prob(&ctx, m.token_id("b")).unwrap() - 0.25).abs() < 1e-15);
    }

    #[test]
    fn start_symbol_is_not_predictable() {
        let m = model(&["a b"], 3);
        let ctx = [m.bos_id(), m.bos_id()];
        assert!(matches!(m.prob(&ctx, m.bos_id()), Err(Error::InvalidQuery(_))));
        assert!(matches!(m.prob(&[m.bos_id()], 0), Err(Error::InvalidQuery(_))));
    }

    #[test]
    fn lambda_validation() {
        let m = model(&["a"], 3);
        assert!(m.clone().with_lambdas(&[0.5, 0.5]).is_err());
        assert!(m.clone().with_lambdas(&[0.5, 0.5, 0.5, -0.5]).is_err());
        assert!(m.clone().with_lambdas(&[0.5, 0.3, 0.1, 0.05]).is_err());
        assert!(m.with_lambdas(&[0.25; 4]).is_ok());
        for order in 1..6 {
            let l = default_lambdas(order);
            assert_eq!(l.len(), order + 1);
            assert!((l.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn floor_only_perplexity_is_support_size() {
        let vocab = Vocabulary::from_lines(["a b c d e f g h i"], 1).unwrap();
        let m = NGramModel::train_lines(["a b c", "d e"], vocab, 3)
            .unwrap()
            .with_lambdas(&[0.0, 0.0, 0.0, 1.0])
            .unwrap();
        let pp = m.perplexity_lines(["a a b", "unknown words here"]).unwrap();
        assert!((pp - 10.0).abs() < 1e-9);
    }

    #[test]
    fn perfect_unigram_perplexity() {
        let vocab = Vocabulary::from_lines(["a a a"], 1).unwrap();
        let m = NGramModel::train_lines(["a a a"], vocab, 3)
            .unwrap()
            .with_lambdas(&[0.0, 0.0, 1.0, 0.0])
            .unwrap();
        assert!((m.perplexity_lines(["a a"]).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn hand_derived_perplexity() {
        // Unigram MLE p(a) = 3/4, p(b) = 1/4: PP = ((3/4)^3 (1/4))^(-1/4).
        let expected = (0.75f64.powi(3) * 0.25).powf(-0.25);
        assert!((expected - 1.754_765_350_603_323).abs() < 1e-12);
        let lines = ["a b", "a a"];
        let vocab = Vocabulary::from_lines(lines, 1).unwrap();
        let m = NGramModel::train_lines(lines, vocab, 3)
            .unwrap()
            .with_lambdas(&[0.0, 0.0, 1.0, 0.0])
            .unwrap();
        let pp = m.perplexity_lines(["a a a b"]).unwrap();
        assert!((pp - expected).abs() < 1e-12, "{pp}");
    }

    #[test]
    fn zero_probability_without_floor() {
        let vocab = Vocabulary::from_lines(["a b"], 1).unwrap();
        let m = NGramModel::train_lines(["a a"], vocab, 2)
            .unwrap()
            .with_lambdas(&[0.0, 1.0, 0.0])
            .unwrap();
        assert!(matches!(
            m.perplexity_lines(["b"]),
            Err(Error::ZeroProbabilityEvent(_))
        ));
    }

    #[test]
    fn empty_eval_set() {
        let m = model(&["a b"], 3);
        assert!(matches!(m.perplexity_lines(["", "  "]), Err(Error::EmptyEvalSet)));
    }

    #[test]
    fn dump_format() {
        let m = model(&["a b"], 2);
        let mut out = Vec::new();
        m.dump(&mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert_eq!(text, "1\ta\t1\n1\tb\t1\n2\t<s> a\t1\n2\ta b\t1\n");
    }

    fn brute_force_total(m: &NGramModel, ctx: &[u32]) -> f64 {
        (0..m.support_size() as u32).map(|w| m.prob(ctx, w).unwrap()).sum()
    }

    proptest! {
        #[test]
        fn probabilities_normalize(
            lines in proptest::collection::vec("[a-f]( [a-f]){0,8}", 1..12),
            eval in "[a-g]( [a-g]){0,8}",
            order in 1usize..5,
            raw in proptest::collection::vec(0.0f64..1.0, 6),
        ) {
            let vocab = Vocabulary::from_lines(&lines, 1).unwrap();
            let m = NGramModel::train_lines(&lines, vocab, order).unwrap();
            let raw = &raw[..=order];
            let s: f64 = raw.iter().sum::<f64>() + 1e-3;
            let mut lambdas: Vec<f64> = raw.iter().map(|x| x / s).collect();
            let rest = 1.0 - lambdas[..order].iter().sum::<f64>();
            lambdas[order] = rest;
            let m = m.with_lambdas(&lambdas).unwrap();
            prop_assert!(m.is_consistent());
            let mut padded = Vec::new();
            m.pad_line(&eval, &mut padded);
            for end in (order - 1)..padded.len() {
                let ctx = &padded[end + 1 - order..end];
                prop_assert!((brute_force_total(&m, ctx) - 1.0).abs() < 1e-9);
            }
        }

        #[test]
        fn perplexity_ignores_line_order(
            lines in proptest::collection::vec("[a-d]( [a-d]){0,6}", 1..10),
            mut eval in proptest::collection::vec("[a-e]( [a-e]){0,6}", 1..10),
        ) {
            let vocab = Vocabulary::from_lines(&lines, 1).unwrap();
            let m = NGramModel::train_lines(&lines, vocab, 3).unwrap();
            let forward = m.perplexity_lines(&eval).unwrap();
            eval.reverse();
            let backward = m.perplexity_lines(&eval).unwrap();
            prop_assert!((forward - backward).abs() <= 1e-9 * forward);
        }
    }
}
