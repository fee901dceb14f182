//! Seeded exact-size random subsets of corpus lines.
//!
//! Indices are drawn with Floyd's algorithm over the cached line count, so a
//! subset costs O(k) memory regardless of corpus size, and materialization
//! is a single streaming pass that keeps corpus order.

use std::collections::HashSet;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::{strip_terminator, Corpus};
use crate::error::{Error, Result};

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;
const MIX_1: u64 = 0xBF58_476D_1CE4_E5B9;
const MIX_2: u64 = 0x94D0_49BB_1331_11EB;

/// The splitmix64 output function.
pub fn splitmix64_finalize(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(MIX_1);
    z = (z ^ (z >> 27)).wrapping_mul(MIX_2);
    z ^ (z >> 31)
}

/// Seed for replicate `replicate` of subset size `size_k`.
///
/// `state = master + GOLDEN_GAMMA*(size_k+1) + MIX_1*(replicate+1)` (wrapping),
/// followed by one splitmix64 finalization.
pub fn derive_seed(master: u64, size_k: u64, replicate: u64) -> u64 {
    let state = master
        .wrapping_add(GOLDEN_GAMMA.wrapping_mul(size_k.wrapping_add(1)))
        .wrapping_add(MIX_1.wrapping_mul(replicate.wrapping_add(1)));
    splitmix64_finalize(state)
}

/// A sorted selection of `k` distinct line indices of one corpus.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Subset {
    corpus_path: PathBuf,
    corpus_lines: u64,
    seed: u64,
    indices: Vec<u64>,
}

impl Subset {
    pub fn corpus_path(&self) -> &Path {
        &self.corpus_path
    }

    pub fn corpus_lines(&self) -> u64 {
        self.corpus_lines
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn size(&self) -> usize {
        self.indices.len()
    }

    /// Strictly increasing line indices.
    pub fn indices(&self) -> &[u64] {
        &self.indices
    }

    fn check_against(&self, corpus: &Corpus) -> Result<()> {
        if corpus.line_count() != self.corpus_lines {
            return Err(Error::InvalidParams(format!(
                "subset was drawn from {} lines but {} has {}",
                self.corpus_lines,
                corpus.path().display(),
                corpus.line_count()
            )));
        }
        Ok(())
    }

    /// Streams the selected records (terminator included) in corpus order.
    pub fn for_each_selected<F>(&self, corpus: &Corpus, mut f: F) -> Result<()>
    where
        F: FnMut(u64, &[u8]) -> Result<()>,
    {
        self.check_against(corpus)?;
        let mut next = self.indices.iter().copied().peekable();
        corpus.for_each_raw_line(|index, raw| {
            if next.peek() == Some(&index) {
                next.next();
                f(index, raw)?;
            }
            Ok(())
        })
    }

    /// Reads the selected lines into memory, terminators stripped.
    pub fn read_lines(&self, corpus: &Corpus) -> Result<Vec<String>> {
        let mut lines = Vec::with_capacity(self.indices.len());
        self.for_each_selected(corpus, |index, raw| {
            let text = std::str::from_utf8(raw).map_err(|e| {
                Error::Parse(format!("line {}: invalid UTF-8: {e}", index + 1))
            })?;
            lines.push(strip_terminator(text).to_owned());
            Ok(())
        })?;
        Ok(lines)
    }

    /// Writes the manifest: a `# corpus=<path> k=<k> seed=<hex>` header then
    /// one decimal index per line.
    pub fn write_manifest(&self, out: impl AsRef<Path>) -> Result<()> {
        let out = out.as_ref();
        let file = File::create(out).map_err(|e| Error::io(out, e))?;
        let mut w = BufWriter::new(file);
        let err = |e| Error::io(out, e);
        writeln!(
            w,
            "# corpus={} k={} seed={:016x}",
            self.corpus_path.display(),
            self.indices.len(),
            self.seed
        )
        .map_err(err)?;
        for i in &self.indices {
            writeln!(w, "{i}").map_err(err)?;
        }
        w.flush().map_err(err)
    }
}

/// Draws `k` distinct line indices uniformly without replacement.
pub fn sample_lines(corpus: &Corpus, k: u64, seed: u64) -> Result<Subset> {
    let indices = floyd_sample(corpus.line_count(), k, seed)?;
    Ok(Subset {
        corpus_path: corpus.path().to_path_buf(),
        corpus_lines: corpus.line_count(),
        seed,
        indices,
    })
}

/// Floyd's algorithm: `k` distinct uniform values from `0..n`, sorted.
pub fn floyd_sample(n: u64, k: u64, seed: u64) -> Result<Vec<u64>> {
    if k > n {
        return Err(Error::SubsetTooLarge { k, available: n });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut chosen: HashSet<u64> = HashSet::with_capacity(k as usize);
    for j in (n - k)..n {
        let t = rng.random_range(0..=j);
        if !chosen.insert(t) {
            chosen.insert(j);
        }
    }
    let mut indices: Vec<u64> = chosen.into_iter().collect();
    indices.sort_unstable();
    Ok(indices)
}

/// Writes the selected lines to `out` byte-for-byte, in corpus order.
pub fn materialize(subset: &Subset, corpus: &Corpus, out: impl AsRef<Path>) -> Result<Corpus> {
    let out = out.as_ref();
    let file = File::create(out).map_err(|e| Error::io(out, e))?;
    let mut w = BufWriter::new(file);
    subset.for_each_selected(corpus, |_, raw| {
        w.write_all(raw).map_err(|e| Error::io(out, e))?;
        if raw.last() != Some(&b'\n') {
            w.write_all(b"\n").map_err(|e| Error::io(out, e))?;
        }
        Ok(())
    })?;
    w.flush().map_err(|e| Error::io(out, e))?;
    drop(w);
    Corpus::open(out)
}

/// Writes the lines of `corpus` that are NOT in `subset`, in corpus order.
pub fn materialize_complement(
    subset: &Subset,
    corpus: &Corpus,
    out: impl AsRef<Path>,
) -> Result<Corpus> {
    subset.check_against(corpus)?;
    let out = out.as_ref();
    let file = File::create(out).map_err(|e| Error::io(out, e))?;
    let mut w = BufWriter::new(file);
    let mut next = subset.indices.iter().copied().peekable();
    corpus.for_each_raw_line(|index, raw| {
        if next.peek() == Some(&index) {
            next.next();
            return Ok(());
        }
        w.write_all(raw).map_err(|e| Error::io(out, e))?;
        if raw.last() != Some(&b'\n') {
            w.write_all(b"\n").map_err(|e| Error::io(out, e))?;
        }
        Ok(())
    })?;
    w.flush().map_err(|e| Error::io(out, e))?;
    drop(w);
    Corpus::open(out)
}
