use std::collections::HashMap;
use std::path::Path;

use super::EmbeddingModel;
use crate::corpus::tokenize;
use crate::error::{Error, Result};

/// `a : b :: c : d`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnalogyQuestion {
    pub a: String,
    pub b: String,
    pub c: String,
    pub d: String,
    pub section: String,
}

const DEFAULT_SECTION: &str = "default";

/// Parses the classic question format: `: section` headers and
/// `a b c d` lines. Blank lines are ignored.
pub fn parse_questions(text: &str) -> Result<Vec<AnalogyQuestion>> {
    let mut section = DEFAULT_SECTION.to_owned();
    let mut questions = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        if let Some(name) = line.strip_prefix(": ") {
            section = name.trim().to_owned();
            continue;
        }
        let words = tokenize(line);
        if words.is_empty() {
            continue;
        }
        let [a, b, c, d]: [String; 4] = words.try_into().map_err(|w: Vec<String>| {
            Error::Parse(format!(
                "question line {}: expected 4 words, got {}",
                lineno + 1,
                w.len()
            ))
        })?;
        if a == b || a == c || a == d || b == c || b == d || c == d {
            return Err(Error::Parse(format!(
                "question line {}: words must be distinct",
                lineno + 1
            )));
        }
        questions.push(AnalogyQuestion {
            a,
            b,
            c,
            d,
            section: section.clone(),
        });
    }
    Ok(questions)
}

pub fn read_questions(path: impl AsRef<Path>) -> Result<Vec<AnalogyQuestion>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_questions(&text)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SectionAccuracy {
    pub section: String,
    pub correct: usize,
    pub answered: usize,
    pub skipped: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AccuracyReport {
    /// `100 * correct / answered`.
    pub percent: f64,
    pub correct: usize,
    pub answered: usize,
    /// Questions with at least one out-of-vocabulary word.
    pub skipped: usize,
    /// Per section, in order of first appearance.
    pub sections: Vec<SectionAccuracy>,
}

/// Rows above this many cached similarity entries fall back to scoring each
/// question directly.
const SIMILARITY_CACHE_LIMIT: usize = 1 << 24;

/// 3CosAdd accuracy: the answer is the vocabulary word, other than `a`, `b`
/// and `c`, whose unit-normalized input vector has the highest cosine with
/// `b - a + c` (each term unit-normalized). Ties go to the lower id.
pub fn analogy_accuracy(
    model: &EmbeddingModel,
    questions: &[AnalogyQuestion],
) -> Result<AccuracyReport> {
    let vocab = model.vocab();
    let dim = model.dim();
    let unit = normalized_rows(model);

    let mut sections: Vec<SectionAccuracy> = Vec::new();
    let mut section_index: HashMap<&str, usize> = HashMap::new();
    let mut answerable: Vec<(usize, [u32; 4])> = Vec::new();
    for q in questions {
        let slot = *section_index.entry(q.section.as_str()).or_insert_with(|| {
            sections.push(SectionAccuracy {
                section: q.section.clone(),
                correct: 0,
                answered: 0,
                skipped: 0,
            });
            sections.len() - 1
        });
        match (vocab.id(&q.a), vocab.id(&q.b), vocab.id(&q.c), vocab.id(&q.d)) {
            (Some(a), Some(b), Some(c), Some(d)) => answerable.push((slot, [a, b, c, d])),
            _ => sections[slot].skipped += 1,
        }
    }
    if answerable.is_empty() {
        return Err(Error::NoApplicableQuestions);
    }

    // Cosine rows for every query word, shared across questions.
    let mut query_words: Vec<u32> = answerable
        .iter()
        .flat_map(|(_, [a, b, c, _])| [*a, *b, *c])
        .collect();
    query_words.sort_unstable();
    query_words.dedup();
    let cache: Option<HashMap<u32, Vec<f32>>> =
        (query_words.len() * vocab.len() <= SIMILARITY_CACHE_LIMIT).then(|| {
            query_words
                .iter()
                .map(|&w| {
                    let q = &unit[w as usize * dim..(w as usize + 1) * dim];
                    (w, unit.chunks_exact(dim).map(|row| dot(row, q)).collect())
                })
                .collect()
        });

    let mut scores = vec![0.0f32; vocab.len()];
    let mut query = vec![0.0f32; dim];
    for &(slot, [a, b, c, d]) in &answerable {
        match &cache {
            Some(cache) => {
                let (sa, sb, sc) = (&cache[&a], &cache[&b], &cache[&c]);
                for (i, s) in scores.iter_mut().enumerate() {
                    *s = sb[i] - sa[i] + sc[i];
                }
            }
            None => {
                let row = |w: u32| &unit[w as usize * dim..(w as usize + 1) * dim];
                for (k, q) in query.iter_mut().enumerate() {
                    *q = row(b)[k] - row(a)[k] + row(c)[k];
                }
                for (s, r) in scores.iter_mut().zip(unit.chunks_exact(dim)) {
                    *s = dot(r, &query);
                }
            }
        }
        let mut best: Option<(u32, f32)> = None;
        for (w, &s) in scores.iter().enumerate() {
            let w = w as u32;
            if w == a || w == b || w == c {
                continue;
            }
            if best.is_none_or(|(_, top)| s > top) {
                best = Some((w, s));
            }
        }
        let entry = &mut sections[slot];
        entry.answered += 1;
        if best.map(|(w, _)| w) == Some(d) {
            entry.correct += 1;
        }
    }

    let correct = sections.iter().map(|s| s.correct).sum();
    let answered = sections.iter().map(|s| s.answered).sum::<usize>();
    let skipped = sections.iter().map(|s| s.skipped).sum();
    Ok(AccuracyReport {
        percent: 100.0 * correct as f64 / answered as f64,
        correct,
        answered,
        skipped,
        sections,
    })
}

fn dot(a: &[f32], b: &[f32]) -> f32 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Input vectors scaled to unit length; zero rows stay zero.
fn normalized_rows(model: &EmbeddingModel) -> Vec<f32> {
    let mut unit = model.input_matrix().to_vec();
    for row in unit.chunks_exact_mut(model.dim()) {
        let norm = row.iter().map(|x| x * x).sum::<f32>().sqrt();
        if norm > 0.0 {
            row.iter_mut().for_each(|x| *x /= norm);
        }
    }
    unit
}
