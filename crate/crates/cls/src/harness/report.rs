use serde::{Deserialize, Serialize};

use super::stats::{diff_metric, pearson_spearman};
use crate::error::{Error, Result};

/// Replicate averages at one grid point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub similarity: f64,
    pub values: Vec<f64>,
    pub replicates_ok: usize,
    /// Messages of the replicates left out of the averages.
    pub failures: Vec<String>,
}

/// Sweep table with correlation and deviation footers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub columns: Vec<String>,
    pub rows: Vec<Row>,
    /// `|Pearson|` of each column against the similarity; empty for a one-point grid.
    pub pearson_abs: Vec<Option<f64>>,
    pub spearman_abs: Vec<Option<f64>>,
    /// Mean absolute deviation from the oracle column, for estimator columns.
    pub diff: Vec<Option<f64>>,
    pub config: serde_json::Value,
    pub version: String,
}

impl Report {
    pub fn new(columns: Vec<String>, estimators: Vec<String>, rows: Vec<Row>, config: serde_json::Value) -> Result<Self> {
        if rows.iter().any(|r| r.values.len() != columns.len()) {
            return Err(Error::usage("row width does not match the column count"));
        }
        let mut report = Report {
            pearson_abs: vec![None; columns.len()],
            spearman_abs: vec![None; columns.len()],
            diff: vec![None; columns.len()],
            columns,
            rows,
            config,
            version: env!("CARGO_PKG_VERSION").to_string(),
        };
        let sim: Vec<f64> = report.rows.iter().map(|r| r.similarity).collect();
        let oracle = report.column("oracle");
        for j in 0..report.columns.len() {
            let col: Vec<f64> = report.rows.iter().map(|r| r.values[j]).collect();
            if sim.len() >= 2 {
                let (p, s) = pearson_spearman(&sim, &col)?;
                report.pearson_abs[j] = Some(p);
                report.spearman_abs[j] = Some(s);
            }
            if let Some(o) = &oracle {
                if estimators.contains(&report.columns[j]) {
                    report.diff[j] = Some(diff_metric(&col, o)?);
                }
            }
        }
        Ok(report)
    }

    fn index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let j = self.index(name)?;
        Some(self.rows.iter().map(|r| r.values[j]).collect())
    }

    pub fn similarities(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.similarity).collect()
    }

    pub fn diff_of(&self, name: &str) -> Option<f64> {
        self.diff[self.index(name)?]
    }

    pub fn pearson_of(&self, name: &str) -> Option<f64> {
        self.pearson_abs[self.index(name)?]
    }

    pub fn spearman_of(&self, name: &str) -> Option<f64> {
        self.spearman_abs[self.index(name)?]
    }

    /// One row per grid point, then the `pearson_abs`, `spearman_abs` and
    /// `diff` footer rows. Numbers use their shortest exact form.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("similarity,");
        out.push_str(&self.columns.join(","));
        out.push_str(",replicates_ok\n");
        for r in &self.rows {
            out.push_str(&r.similarity.to_string());
            for v in &r.values {
                out.push(',');
                out.push_str(&v.to_string());
            }
            out.push_str(&format!(",{}\n", r.replicates_ok));
        }
        for (label, vals) in [("pearson_abs", &self.pearson_abs), ("spearman_abs", &self.spearman_abs), ("diff", &self.diff)] {
            out.push_str(label);
            for v in vals {
                out.push(',');
                if let Some(v) = v {
                    out.push_str(&v.to_string());
                }
            }
            out.push_str(",\n");
        }
        out
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Renders CSV text as a right-aligned plain-text table.
pub fn render_table(csv_text: &str) -> Result<String> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(false).flexible(true).from_reader(csv_text.as_bytes());
    let mut cells: Vec<Vec<String>> = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| Error::usage(format!("bad report: {e}")))?;
        cells.push(rec.iter().map(|c| match c.parse::<f64>() {
            Ok(v) if c.contains('.') || c.contains('e') => format!("{v:.4}"),
            _ => c.to_string(),
        }).collect());
    }
    if cells.is_empty() {
        return Err(Error::usage("report is empty"));
    }
    let width = cells.iter().map(Vec::len).max().unwrap_or(0);
    let mut widths = vec![0; width];
    for row in &cells {
        for (j, c) in row.iter().enumerate() {
            widths[j] = widths[j].max(c.chars().count());
        }
    }
    let mut out = String::new();
    for row in &cells {
        let line: Vec<String> = (0..width).map(|j| format!("{:>w$}", row.get(j).map_or("", String::as_str), w = widths[j])).collect();
        out.push_str(line.join("  ").trim_end());
        out.push('\n');
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn report() -> Report {
        let rows = (0..3)
            .map(|i| Row { similarity: i as f64, values: vec![0.5 - 0.1 * i as f64, 0.52 - 0.1 * i as f64, 2.0], replicates_ok: 4, failures: vec![] })
            .collect();
        Report::new(vec!["oracle".into(), "ensemble".into(), "kl".into()], vec!["ensemble".into()], rows, serde_json::Value::Null).unwrap()
    }

    #[test]
    fn footers() {
        let r = report();
        assert!((r.diff_of("ensemble").unwrap() - 0.02).abs() < 1e-12);
        assert_eq!(r.diff_of("kl"), None);
        assert!((r.spearman_of("ensemble").unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(r.pearson_of("kl"), Some(0.0));
    }

    #[test]
    fn csv_layout() {
        let csv = report().to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "similarity,oracle,ensemble,kl,replicates_ok");
        assert_eq!(lines.len(), 1 + 3 + 3);
        assert!(lines[4].starts_with("pearson_abs,"));
        assert!(lines[6].starts_with("diff,,"));
        let table = render_table(&csv).unwrap();
        assert_eq!(table.lines().count(), 7);
    }

    #[test]
    fn one_point_grid_has_empty_correlations() {
        let rows = vec![Row { similarity: 0.0, values: vec![0.5, 0.4], replicates_ok: 1, failures: vec![] }];
        let r = Report::new(vec!["oracle".into(), "ensemble".into()], vec!["ensemble".into()], rows, serde_json::Value::Null).unwrap();
        assert_eq!(r.pearson_abs, vec![None, None]);
        assert!((r.diff_of("ensemble").unwrap() - 0.1).abs() < 1e-12);
    }
}
