//! Monte Carlo estimate of the tests' empirical size under the null.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::normality::normality_report_values;
use crate::error::Result;
use crate::exec::Execution;
use crate::sampler::derive_seed;

/// Fraction of null samples on which each test rejected.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RejectionRates {
    pub trials: u64,
    pub chi_square: f64,
    pub anderson_darling: f64,
}

const CHUNK: u64 = 1000;

/// Draws `trials` standard-normal samples of size `n` and runs both tests at
/// `alpha` on each. Trial `t` uses seed `derive_seed(seed, n, t)`, so the
/// result does not depend on `exec`.
pub fn empirical_rejection_rates(
    n: usize,
    trials: u64,
    alpha: f64,
    seed: u64,
    exec: Execution,
) -> Result<RejectionRates> {
    let chunks: Vec<u64> = (0..trials.div_ceil(CHUNK)).collect();
    let counts = exec.map(&chunks, |&chunk| -> Result<(u64, u64)> {
        let mut values = vec![0.0; n];
        let (mut chi, mut ad) = (0, 0);
        let end = ((chunk + 1) * CHUNK).min(trials);
        for t in chunk * CHUNK..end {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, n as u64, t));
            for v in values.iter_mut() {
                *v = StandardNormal.sample(&mut rng);
            }
            let r = normality_report_values(&values, alpha)?;
            chi += u64::from(r.chi_square.reject);
            ad += u64::from(r.anderson_darling.reject);
        }
        Ok((chi, ad))
    });
    let (mut chi, mut ad) = (0u64, 0u64);
    for c in counts {
        let (a, b) = c?;
        chi += a;
        ad += b;
    }
    let t = trials.max(1) as f64;
    Ok(RejectionRates {
        trials,
        chi_square: chi as f64 / t,
        anderson_darling: ad as f64 / t,
    })
}
