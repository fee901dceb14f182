use crate::error::{Error, Result};

/// How posterior variance shrinks with subset size.
#[derive(Debug, Clone, PartialEq)]
pub struct VarianceScalingReport {
    pub sizes: Vec<u64>,
    pub variances: Vec<f64>,
    /// Variances strictly decrease as size grows.
    pub monotone_decreasing: bool,
    /// `c` of the least-squares fit `v ≈ c / s` through the origin.
    pub inverse_fit_c: f64,
    /// Centered R² of that fit; can be negative for a poor fit.
    pub inverse_fit_r2: f64,
}

pub fn variance_scaling(sizes: &[u64], variances: &[f64]) -> Result<VarianceScalingReport> {
    if sizes.len() != variances.len() {
        return Err(Error::ShapeMismatch(format!(
            "{} sizes but {} variances",
            sizes.len(),
            variances.len()
        )));
    }
    if sizes.len() < 2 {
        return Err(Error::ShapeMismatch(
            "variance scaling needs at least two sizes".into(),
        ));
    }
    if sizes[0] == 0 || sizes.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParams(
            "sizes must be positive and strictly increasing".into(),
        ));
    }
    if variances.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
        return Err(Error::InvalidParams("variances must be positive".into()));
    }

    let inv: Vec<f64> = sizes.iter().map(|&s| 1.0 / s as f64).collect();
    let sxy: f64 = inv.iter().zip(variances).map(|(x, v)| x * v).sum();
    let sxx: f64 = inv.iter().map(|x| x * x).sum();
    let c = sxy / sxx;

    let mean = variances.iter().sum::<f64>() / variances.len() as f64;
    let ss_tot: f64 = variances.iter().map(|v| (v - mean).powi(2)).sum();
    let ss_res: f64 = inv
        .iter()
        .zip(variances)
        .map(|(x, v)| (v - c * x).powi(2))
        .sum();
    let r2 = if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else if ss_res == 0.0 { 1.0 } else { 0.0 };

    Ok(VarianceScalingReport {
        sizes: sizes.to_vec(),
        variances: variances.to_vec(),
        monotone_decreasing: variances.windows(2).all(|w| w[0] > w[1]),
        inverse_fit_c: c,
        inverse_fit_r2: r2,
    })
}
