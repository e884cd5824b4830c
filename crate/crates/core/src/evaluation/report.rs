//! Text and tab-separated renderings of evaluation results.

use std::io::Write;

use super::cv::CvReport;
use super::sweep::AccuracyReport;
use crate::error::{Error, Result};

fn tsv<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new().delimiter(b'\t').from_writer(w)
}

/// `model  average_rmse` table, one row per report.
pub fn write_cv_tsv<W: Write>(reports: &[CvReport], w: W) -> Result<()> {
    let mut out = tsv(w);
    out.write_record(["model", "average_rmse"])?;
    for r in reports {
        out.write_record([r.family.short().to_string(), format!("{:.4}", r.average_rmse)])?;
    }
    out.flush().map_err(|e| Error::io("<cv tsv>", e))
}

/// Per-attribute breakdown, one column per attribute.
pub fn write_cv_attribute_tsv<W: Write>(reports: &[CvReport], w: W) -> Result<()> {
    let mut out = tsv(w);
    let Some(first) = reports.first() else {
        return out.flush().map_err(|e| Error::io("<cv tsv>", e));
    };
    let mut header = vec!["model".to_string()];
    header.extend(first.attributes.iter().cloned());
    out.write_record(&header)?;
    for r in reports {
        let mut row = vec![r.family.short().to_string()];
        row.extend(r.per_attribute.iter().map(|v| format!("{v:.4}")));
        out.write_record(&row)?;
    }
    out.flush().map_err(|e| Error::io("<cv tsv>", e))
}

pub fn percent_label(m: f64) -> String {
    format!("{}%", (m * 100.0).round() as i64)
}

/// `prediction_size  accuracy_mean  accuracy_std` table.
pub fn write_accuracy_tsv<W: Write>(report: &AccuracyReport, w: W) -> Result<()> {
    let mut out = tsv(w);
    out.write_record(["prediction_size", "accuracy_mean", "accuracy_std"])?;
    for r in &report.rows {
        out.write_record([percent_label(r.m), format!("{:.6}", r.mean), format!("{:.6}", r.std)])?;
    }
    out.flush().map_err(|e| Error::io("<accuracy tsv>", e))
}

pub fn to_json<T: serde::Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evaluation::sweep::AccuracyRow;

    #[test]
    fn accuracy_table_layout() {
        let rep = AccuracyReport {
            imputer: "rf".into(),
            k: 5,
            n_users: 100,
            repetitions: 10,
            seed: 0,
            rows: vec![AccuracyRow {
                m: 0.33,
                hidden: 442,
                mean: 0.8,
                std: 0.1,
                per_repetition: vec![],
            }],
        };
        let mut buf = Vec::new();
        write_accuracy_tsv(&rep, &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "prediction_size\taccuracy_mean\taccuracy_std\n33%\t0.800000\t0.100000\n"
        );
    }

    #[test]
    fn percent_labels() {
        assert_eq!(percent_label(0.1), "10%");
        assert_eq!(percent_label(0.5), "50%");
        assert_eq!(percent_label(0.0), "0%");
    }
}
