//! Statistics over evaluation posteriors: per-cell moments, normality tests
//! and the variance-versus-subset-size scaling report.

mod calibration;
mod normality;
mod scaling;
pub mod special;

pub use calibration::{empirical_rejection_rates, RejectionRates};
pub use normality::{
    anderson_darling_normality, anderson_darling_p_value, chi_square_normality,
    normality_report, Bins, NormalFit, NormalityReport, NormalityTest, NormalityTestResult,
    MIN_NORMALITY_SAMPLES,
};
pub(crate) use normality::normality_report_values;
pub use scaling::{variance_scaling, VarianceScalingReport};
pub use special::{chi2_sf, std_normal_cdf};

use crate::error::{Error, Result};

/// Values of one metric across replicates at one subset size.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet {
    pub values: Vec<f64>,
    pub metric: String,
    pub subset_size: u64,
}

impl SampleSet {
    pub fn new(metric: impl Into<String>, subset_size: u64, values: Vec<f64>) -> Result<Self> {
        if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidStatistic(format!("non-finite sample value {bad}")));
        }
        Ok(SampleSet {
            values,
            metric: metric.into(),
            subset_size,
        })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Arithmetic mean and unbiased (n - 1) sample variance.
pub fn mean_variance(values: &[f64]) -> Result<(f64, f64)> {
    let n = values.len();
    if n < 2 {
        return Err(Error::DegenerateSample(format!(
            "variance needs at least 2 values, got {n}"
        )));
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
    Ok((mean, ss / (n - 1) as f64))
}
