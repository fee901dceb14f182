use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use super::config::Metric;
use super::run::{read_results_csv, EvalRecord};
use super::{format_sig6, svg};
use crate::error::{Error, Result};
use crate::stats::{
    mean_variance, normality_report_values, variance_scaling, NormalityReport,
    VarianceScalingReport, MIN_NORMALITY_SAMPLES,
};

pub const SUMMARY_HEADER: &str =
    "metric,size,n,mean,variance,chi2_stat,chi2_p,chi2_h,ad_stat,ad_p,ad_h";
const NORMALITY_HEADER: &str = "metric,size,test,statistic,p,h,alpha";
const SCALING_HEADER: &str =
    "metric,size,variance,monotone_decreasing,inverse_fit_c,inverse_fit_r2";
const QUALITY_HEADER: &str = "metric,size,mean,ratio_to_largest";

/// Statistics of one (metric, size) cell.
#[derive(Debug, Clone, PartialEq)]
pub struct CellSummary {
    pub metric: Metric,
    pub size: u64,
    /// Non-missing values.
    pub n: usize,
    pub missing: usize,
    pub mean: Option<f64>,
    pub variance: Option<f64>,
    pub normality: Option<NormalityReport>,
    /// Why a statistic is absent, e.g. `DegenerateSample: ...`.
    pub warning: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricScaling {
    pub metric: Metric,
    pub report: Option<VarianceScalingReport>,
    pub warning: Option<String>,
}

/// Mean at one size relative to the mean at the largest size.
#[derive(Debug, Clone, PartialEq)]
pub struct QualityRatio {
    pub metric: Metric,
    pub size: u64,
    pub mean: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Analysis {
    pub alpha: f64,
    /// Ordered by (metric, size).
    pub cells: Vec<CellSummary>,
    pub scaling: Vec<MetricScaling>,
    pub quality: Vec<QualityRatio>,
    /// (size, value) points per metric, in results order.
    pub scatter: BTreeMap<Metric, Vec<(u64, f64)>>,
}

impl Analysis {
    pub fn cell(&self, metric: Metric, size: u64) -> Option<&CellSummary> {
        self.cells.iter().find(|c| c.metric == metric && c.size == size)
    }

    pub fn scaling_for(&self, metric: Metric) -> Option<&MetricScaling> {
        self.scaling.iter().find(|s| s.metric == metric)
    }

    pub fn warnings(&self) -> Vec<String> {
        let cells = self.cells.iter().filter_map(|c| {
            c.warning
                .as_ref()
                .map(|w| format!("{} size {}: {w}", c.metric, c.size))
        });
        let scaling = self
            .scaling
            .iter()
            .filter_map(|s| s.warning.as_ref().map(|w| format!("{}: {w}", s.metric)));
        cells.chain(scaling).collect()
    }

    pub fn summary_csv(&self) -> String {
        let mut out = format!("{SUMMARY_HEADER}\n");
        let opt = |v: Option<f64>| v.map(format_sig6).unwrap_or_default();
        for c in &self.cells {
            let tests = match &c.normality {
                Some(r) => format!(
                    "{},{},{},{},{},{}",
                    format_sig6(r.chi_square.statistic),
                    format_sig6(r.chi_square.p_value),
                    r.chi_square.h(),
                    format_sig6(r.anderson_darling.statistic),
                    format_sig6(r.anderson_darling.p_value),
                    r.anderson_darling.h()
                ),
                None => ",,,,,".into(),
            };
            let _ = writeln!(
                out,
                "{},{},{},{},{},{tests}",
                c.metric,
                c.size,
                c.n,
                opt(c.mean),
                opt(c.variance)
            );
        }
        out
    }

    pub fn normality_csv(&self) -> String {
        let mut out = format!("{NORMALITY_HEADER}\n");
        for c in &self.cells {
            if let Some(r) = &c.normality {
                for t in [r.chi_square, r.anderson_darling] {
                    let _ = writeln!(
                        out,
                        "{},{},{},{},{},{},{}",
                        c.metric,
                        c.size,
                        t.test,
                        format_sig6(t.statistic),
                        format_sig6(t.p_value),
                        t.h(),
                        format_sig6(t.alpha)
                    );
                }
            }
        }
        out
    }

    pub fn scaling_csv(&self) -> String {
        let mut out = format!("{SCALING_HEADER}\n");
        for s in &self.scaling {
            if let Some(r) = &s.report {
                for (size, var) in r.sizes.iter().zip(&r.variances) {
                    let _ = writeln!(
                        out,
                        "{},{size},{},{},{},{}",
                        s.metric,
                        format_sig6(*var),
                        r.monotone_decreasing,
                        format_sig6(r.inverse_fit_c),
                        format_sig6(r.inverse_fit_r2)
                    );
                }
            }
        }
        out
    }

    pub fn quality_csv(&self) -> String {
        let mut out = format!("{QUALITY_HEADER}\n");
        for q in &self.quality {
            let _ = writeln!(
                out,
                "{},{},{},{}",
                q.metric,
                q.size,
                format_sig6(q.mean),
                format_sig6(q.ratio)
            );
        }
        out
    }

    /// Aligned plain-text tables of everything above.
    pub fn text_report(&self) -> String {
        let mut out = String::new();
        let opt = |v: Option<f64>| v.map(format_sig6).unwrap_or_else(|| "-".into());
        let _ = writeln!(out, "Posterior summary (alpha = {})", format_sig6(self.alpha));
        let _ = writeln!(
            out,
            "{:<18} {:>10} {:>5} {:>12} {:>12} {:>10} {:>3} {:>10} {:>3}",
            "metric", "size", "n", "mean", "variance", "chi2_p", "h", "ad_p", "h"
        );
        for c in &self.cells {
            let (cp, ch, ap, ah) = match &c.normality {
                Some(r) => (
                    format_sig6(r.chi_square.p_value),
                    r.chi_square.h().to_string(),
                    format_sig6(r.anderson_darling.p_value),
                    r.anderson_darling.h().to_string(),
                ),
                None => ("-".into(), "-".into(), "-".into(), "-".into()),
            };
            let _ = writeln!(
                out,
                "{:<18} {:>10} {:>5} {:>12} {:>12} {:>10} {:>3} {:>10} {:>3}",
                c.metric.name(),
                c.size,
                c.n,
                opt(c.mean),
                opt(c.variance),
                cp,
                ch,
                ap,
                ah
            );
        }
        let _ = writeln!(out, "\nVariance scaling");
        for s in &self.scaling {
            match &s.report {
                Some(r) => {
                    let _ = writeln!(
                        out,
                        "{:<18} monotone_decreasing={} c={} r2={}",
                        s.metric.name(),
                        r.monotone_decreasing,
                        format_sig6(r.inverse_fit_c),
                        format_sig6(r.inverse_fit_r2)
                    );
                }
                None => {
                    let _ = writeln!(out, "{:<18} -", s.metric.name());
                }
            }
        }
        if !self.quality.is_empty() {
            let _ = writeln!(out, "\nQuality relative to the largest size");
            for q in &self.quality {
                let _ = writeln!(
                    out,
                    "{:<18} {:>10} mean={} ratio={}",
                    q.metric.name(),
                    q.size,
                    format_sig6(q.mean),
                    format_sig6(q.ratio)
                );
            }
        }
        let warnings = self.warnings();
        if !warnings.is_empty() {
            let _ = writeln!(out, "\nWarnings");
            for w in warnings {
                let _ = writeln!(out, "{w}");
            }
        }
        out
    }
}

/// Summarizes records per (metric, size) cell and per metric.
pub fn analyze_records(records: &[EvalRecord], alpha: f64) -> Analysis {
    let mut groups: BTreeMap<(Metric, u64), (Vec<f64>, usize)> = BTreeMap::new();
    let mut scatter: BTreeMap<Metric, Vec<(u64, f64)>> = BTreeMap::new();
    for r in records {
        let entry = groups.entry((r.metric, r.size)).or_default();
        match r.value {
            Some(v) if v.is_finite() => {
                entry.0.push(v);
                scatter.entry(r.metric).or_default().push((r.size, v));
            }
            _ => entry.1 += 1,
        }
    }

    let cells: Vec<CellSummary> = groups
        .into_iter()
        .map(|((metric, size), (values, missing))| summarize_cell(metric, size, &values, missing, alpha))
        .collect();

    let metrics: Vec<Metric> = {
        let mut m: Vec<Metric> = cells.iter().map(|c| c.metric).collect();
        m.dedup();
        m
    };

    let scaling = metrics
        .iter()
        .map(|&metric| {
            let (sizes, variances): (Vec<u64>, Vec<f64>) = cells
                .iter()
                .filter(|c| c.metric == metric)
                .filter_map(|c| c.variance.filter(|v| *v > 0.0).map(|v| (c.size, v)))
                .unzip();
            match variance_scaling(&sizes, &variances) {
                Ok(report) => MetricScaling {
                    metric,
                    report: Some(report),
                    warning: None,
                },
                Err(e) => MetricScaling {
                    metric,
                    report: None,
                    warning: Some(format!("{}: {e}", e.kind())),
                },
            }
        })
        .collect();

    let mut quality = Vec::new();
    for &metric in metrics.iter().filter(|m| m.is_accuracy()) {
        let means: Vec<(u64, f64)> = cells
            .iter()
            .filter(|c| c.metric == metric)
            .filter_map(|c| c.mean.map(|m| (c.size, m)))
            .collect();
        if let Some(&(_, top)) = means.last() {
            if top != 0.0 {
                quality.extend(means.iter().map(|&(size, mean)| QualityRatio {
                    metric,
                    size,
                    mean,
                    ratio: mean / top,
                }));
            }
        }
    }

    Analysis {
        alpha,
        cells,
        scaling,
        quality,
        scatter,
    }
}

fn summarize_cell(metric: Metric, size: u64, values: &[f64], missing: usize, alpha: f64) -> CellSummary {
    let mut cell = CellSummary {
        metric,
        size,
        n: values.len(),
        missing,
        mean: None,
        variance: None,
        normality: None,
        warning: None,
    };
    match mean_variance(values) {
        Ok((mean, variance)) => {
            cell.mean = Some(mean);
            cell.variance = Some(variance);
        }
        Err(e) => {
            cell.mean = values.first().copied();
            cell.warning = Some(format!("{}: {e}", e.kind()));
            return cell;
        }
    }
    if values.len() < MIN_NORMALITY_SAMPLES {
        cell.warning = Some(format!(
            "normality skipped: n = {} < {MIN_NORMALITY_SAMPLES}",
            values.len()
        ));
        return cell;
    }
    match normality_report_values(values, alpha) {
        Ok(report) => cell.normality = Some(report),
        Err(e) => cell.warning = Some(format!("{}: {e}", e.kind())),
    }
    cell
}

/// Reads `results_csv` and writes `summary.csv`, `summary.txt`,
/// `normality.csv`, `scaling.csv`, `quality.csv` and per-metric
/// `scatter_<metric>.csv` / `.svg` into `out_dir`.
pub fn analyze(results_csv: impl AsRef<Path>, alpha: f64, out_dir: impl AsRef<Path>) -> Result<Analysis> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidParams(format!("alpha must be in (0, 1), got {alpha}")));
    }
    let records = read_results_csv(results_csv)?;
    let analysis = analyze_records(&records, alpha);
    let out_dir = out_dir.as_ref();
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let write = |name: &str, text: &str| -> Result<()> {
        let path = out_dir.join(name);
        std::fs::write(&path, text).map_err(|e| Error::io(&path, e))
    };
    write("summary.csv", &analysis.summary_csv())?;
    write("summary.txt", &analysis.text_report())?;
    write("normality.csv", &analysis.normality_csv())?;
    write("scaling.csv", &analysis.scaling_csv())?;
    write("quality.csv", &analysis.quality_csv())?;
    for (metric, points) in &analysis.scatter {
        let mut csv = String::from("size,value\n");
        for (size, v) in points {
            let _ = writeln!(csv, "{size},{}", format_sig6(*v));
        }
        write(&format!("scatter_{metric}.csv"), &csv)?;
        write(&format!("scatter_{metric}.svg"), &svg::scatter(metric.name(), points))?;
    }
    Ok(analysis)
}
