//! Composite normality tests with both parameters estimated from the
//! sample: chi-square goodness of fit over equal-probability bins, and
//! Anderson-Darling with the small-sample correction.

use std::fmt;

use super::special::{chi2_sf, std_normal_cdf};
use super::{mean_variance, SampleSet};
use crate::error::{Error, Result};

/// Below this many values the tests refuse to run.
pub const MIN_NORMALITY_SAMPLES: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum NormalityTest {
    ChiSquare,
    AndersonDarling,
}

impl NormalityTest {
    pub fn name(self) -> &'static str {
        match self {
            NormalityTest::ChiSquare => "chi_square",
            NormalityTest::AndersonDarling => "anderson_darling",
        }
    }
}

impl fmt::Display for NormalityTest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalityTestResult {
    pub test: NormalityTest,
    pub statistic: f64,
    pub p_value: f64,
    /// Null rejected: `p_value < alpha`.
    pub reject: bool,
    pub alpha: f64,
}

impl NormalityTestResult {
    fn new(test: NormalityTest, statistic: f64, p_value: f64, alpha: f64) -> Self {
        NormalityTestResult {
            test,
            statistic,
            p_value,
            reject: p_value < alpha,
            alpha,
        }
    }

    /// The 0/1 rejection flag.
    pub fn h(&self) -> u8 {
        u8::from(self.reject)
    }
}

/// Number of equal-probability bins for the chi-square test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Bins {
    /// `max(5, floor(n / 10))`.
    #[default]
    Auto,
    Fixed(usize),
}

impl Bins {
    pub fn resolve(self, n: usize) -> usize {
        match self {
            Bins::Auto => (n / 10).max(5),
            Bins::Fixed(b) => b,
        }
    }
}

/// Mean and standard deviation fitted to a sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalFit {
    pub mean: f64,
    pub sd: f64,
}

impl NormalFit {
    pub fn estimate(values: &[f64]) -> Result<Self> {
        if values.len() < MIN_NORMALITY_SAMPLES {
            return Err(Error::DegenerateSample(format!(
                "normality tests need at least {MIN_NORMALITY_SAMPLES} values, got {}",
                values.len()
            )));
        }
        let (mean, variance) = mean_variance(values)?;
        if !(variance > 0.0) || !(mean.is_finite()) {
            return Err(Error::DegenerateSample("sample has zero variance".into()));
        }
        Ok(NormalFit {
            mean,
            sd: variance.sqrt(),
        })
    }

    fn z(&self, x: f64) -> f64 {
        (x - self.mean) / self.sd
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParams(format!("alpha must be in (0, 1), got {alpha}")))
    }
}

fn chi_square_with_fit(
    values: &[f64],
    fit: NormalFit,
    alpha: f64,
    bins: Bins,
) -> Result<NormalityTestResult> {
    let n = values.len();
    let bins = bins.resolve(n);
    if bins < 4 {
        return Err(Error::TooFewBins(bins));
    }
    // Bin by fitted CDF value: equal-probability edges without a quantile
    // function.
    let mut observed = vec![0u64; bins];
    for &x in values {
        let u = std_normal_cdf(fit.z(x));
        let bin = ((u * bins as f64) as usize).min(bins - 1);
        observed[bin] += 1;
    }
    let expected = n as f64 / bins as f64;
    let statistic: f64 = observed
        .iter()
        .map(|&o| {
            let d = o as f64 - expected;
            d * d / expected
        })
        .sum();
    // Two estimated parameters.
    let dof = (bins - 3) as u32;
    let p = chi2_sf(statistic, dof)?;
    Ok(NormalityTestResult::new(NormalityTest::ChiSquare, statistic, p, alpha))
}

/// Chi-square goodness of fit against `N(mean, sd^2)` fitted to the sample,
/// over `bins` equal-probability intervals, with `bins - 3` degrees of
/// freedom.
pub fn chi_square_normality(s: &SampleSet, alpha: f64, bins: Bins) -> Result<NormalityTestResult> {
    check_alpha(alpha)?;
    let fit = NormalFit::estimate(&s.values)?;
    chi_square_with_fit(&s.values, fit, alpha, bins)
}

/// Approximate p-value of the modified Anderson-Darling statistic
/// `A*^2 = A^2 (1 + 0.75/n + 2.25/n^2)` when both normal parameters are
/// estimated.
pub fn anderson_darling_p_value(a2_star: f64) -> f64 {
    let a = a2_star;
    let p = if a >= 0.6 {
        (1.2937 - 5.709 * a + 0.0186 * a * a).exp()
    } else if a >= 0.34 {
        (0.9177 - 4.279 * a - 1.38 * a * a).exp()
    } else if a >= 0.2 {
        1.0 - (-8.318 + 42.796 * a - 59.938 * a * a).exp()
    } else {
        1.0 - (-13.436 + 101.14 * a - 223.73 * a * a).exp()
    };
    p.clamp(0.0, 1.0)
}

fn anderson_darling_with_fit(
    values: &[f64],
    fit: NormalFit,
    alpha: f64,
) -> Result<NormalityTestResult> {
    let n = values.len();
    let mut z: Vec<f64> = values.iter().map(|&x| fit.z(x)).collect();
    z.sort_unstable_by(f64::total_cmp);
    let mut acc = 0.0;
    for i in 0..n {
        let lower = std_normal_cdf(z[i]);
        // 1 - Φ(z) evaluated as Φ(-z).
        let upper = std_normal_cdf(-z[n - 1 - i]);
        if lower <= 0.0 || upper <= 0.0 {
            return Err(Error::NumericalUnderflow(format!(
                "normal CDF underflows at z = {}",
                if lower <= 0.0 { z[i] } else { z[n - 1 - i] }
            )));
        }
        acc += (2 * i + 1) as f64 * (lower.ln() + upper.ln());
    }
    let nf = n as f64;
    let a2 = -nf - acc / nf;
    let a2_star = a2 * (1.0 + 0.75 / nf + 2.25 / (nf * nf));
    let p = anderson_darling_p_value(a2_star);
    Ok(NormalityTestResult::new(NormalityTest::AndersonDarling, a2_star, p, alpha))
}

/// Anderson-Darling normality test with mean and variance estimated.
///
/// The reported statistic is the corrected `A*^2` that the p-value
/// approximation is defined on.
pub fn anderson_darling_normality(s: &SampleSet, alpha: f64) -> Result<NormalityTestResult> {
    check_alpha(alpha)?;
    let fit = NormalFit::estimate(&s.values)?;
    anderson_darling_with_fit(&s.values, fit, alpha)
}

/// Both tests for one sample, sharing one parameter fit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalityReport {
    pub fit: NormalFit,
    pub chi_square: NormalityTestResult,
    pub anderson_darling: NormalityTestResult,
}

pub fn normality_report(s: &SampleSet, alpha: f64) -> Result<NormalityReport> {
    normality_report_values(&s.values, alpha)
}

pub(crate) fn normality_report_values(values: &[f64], alpha: f64) -> Result<NormalityReport> {
    check_alpha(alpha)?;
    let fit = NormalFit::estimate(values)?;
    Ok(NormalityReport {
        fit,
        chi_square: chi_square_with_fit(values, fit, alpha, Bins::Auto)?,
        anderson_darling: anderson_darling_with_fit(values, fit, alpha)?,
    })
}
