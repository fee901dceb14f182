//! End-to-end posterior experiment: held-out split, per-replicate subset
//! training and evaluation, results CSV, and the summary analysis.

mod analyze;
mod config;
mod run;
mod svg;

pub use analyze::{
    analyze, analyze_records, Analysis, CellSummary, MetricScaling, QualityRatio,
    SUMMARY_HEADER,
};
pub use config::{parse_u64, ExperimentConfig, Metric, NgramSettings};
pub use run::{
    evaluate_lines, read_results_csv, run_experiment, split_heldout, write_results_csv,
    EvalRecord, Failure, HeldoutSplit, RunOutcome, RESULTS_HEADER,
};

/// Formats like C's `%.6g`: six significant digits, trailing zeros dropped,
/// scientific notation outside `1e-4 <= |v| < 1e6`.
pub fn format_sig6(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if !v.is_finite() {
        return v.to_string();
    }
    let sci = format!("{v:.5e}");
    let (mantissa, exp) = sci.split_once('e').unwrap_or((&sci, "0"));
    let exp: i32 = exp.parse().unwrap_or(0);
    if (-4..6).contains(&exp) {
        let decimals = (5 - exp).max(0) as usize;
        trim_zeros(format!("{v:.decimals$}"))
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim_zeros(mantissa.to_owned()), exp.abs())
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_owned()
    } else {
        s
    }
}

#[cfg(test)]
mod tests {
    use super::format_sig6;

    #[test]
    fn sig6_matches_printf_g() {
        let cases = [
            (0.0, "0"),
            (1.0, "1"),
            (64.142857, "64.1429"),
            (-2.5, "-2.5"),
            (123456.7, "123457"),
            (1234567.0, "1.23457e+06"),
            (0.0001234567, "0.000123457"),
            (0.00001234567, "1.23457e-05"),
            (9.9999996, "10"),
            (213.21, "213.21"),
            (100.0, "100"),
        ];
        for (v, expected) in cases {
            assert_eq!(format_sig6(v), expected, "{v}");
        }
    }
}
