//! Experiment reports: seeded per-trial rows plus aggregate rows, written
//! as CSV with `#` metadata comments. Aggregate rows carry the literal
//! `mean` in the trial column so a parser can recompute and verify them.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::error::{Result, UgaError};

pub const AGGREGATE_MARKER: &str = "mean";

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentReport {
    pub name: String,
    pub parameters: Vec<(String, String)>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
    pub aggregates: Vec<Vec<String>>,
}

impl ExperimentReport {
    pub fn new(name: impl Into<String>, columns: &[&str]) -> Self {
        ExperimentReport {
            name: name.into(),
            parameters: Vec::new(),
            columns: columns.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
            aggregates: Vec::new(),
        }
    }

    pub fn set_parameter(&mut self, key: impl Into<String>, value: impl ToString) {
        self.parameters.push((key.into(), value.to_string()));
    }

    pub fn push_row(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn push_aggregate(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.aggregates.push(row);
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    pub fn to_csv_string(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("# experiment={}\n", self.name));
        for (k, v) in &self.parameters {
            out.push_str(&format!("# {k}={v}\n"));
        }
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in self.rows.iter().chain(self.aggregates.iter()) {
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        w.write_all(self.to_csv_string().as_bytes())?;
        w.flush()?;
        Ok(())
    }

    /// Parses a report written by [`Self::to_csv_string`]. Rows whose first
    /// cell is the aggregate marker land in `aggregates`.
    pub fn parse(text: &str) -> Result<Self> {
        let mut name = String::new();
        let mut parameters = Vec::new();
        let mut columns: Option<Vec<String>> = None;
        let mut rows = Vec::new();
        let mut aggregates = Vec::new();
        for (idx, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(comment) = line.strip_prefix('#') {
                let comment = comment.trim();
                if let Some((k, v)) = comment.split_once('=') {
                    if k == "experiment" {
                        name = v.to_string();
                    } else {
                        parameters.push((k.to_string(), v.to_string()));
                    }
                }
                continue;
            }
            let cells: Vec<String> = line.split(',').map(|s| s.to_string()).collect();
            match &columns {
                None => columns = Some(cells),
                Some(cols) => {
                    if cells.len() != cols.len() {
                        return Err(UgaError::Parse {
                            path: "<report>".into(),
                            line: idx + 1,
                            msg: format!("expected {} cells, found {}", cols.len(), cells.len()),
                        });
                    }
                    if cells.first().map(|c| c == AGGREGATE_MARKER).unwrap_or(false) {
                        aggregates.push(cells);
                    } else {
                        rows.push(cells);
                    }
                }
            }
        }
        let columns = columns.ok_or_else(|| UgaError::Parse {
            path: "<report>".into(),
            line: 0,
            msg: "missing header".into(),
        })?;
        Ok(ExperimentReport { name, parameters, columns, rows, aggregates })
    }

    /// Mean of a numeric column over data rows, optionally restricted to
    /// rows whose `filter_col` equals `filter_value`.
    pub fn column_mean(
        &self,
        column: &str,
        filter: Option<(&str, &str)>,
    ) -> Option<f64> {
        let idx = self.column_index(column)?;
        let filter_idx = match filter {
            Some((col, _)) => Some(self.column_index(col)?),
            None => None,
        };
        let mut sum = 0.0;
        let mut count = 0usize;
        for row in &self.rows {
            if let (Some(fi), Some((_, fv))) = (filter_idx, filter) {
                if row[fi] != fv {
                    continue;
                }
            }
            let v: f64 = row[idx].parse().ok()?;
            sum += v;
            count += 1;
        }
        (count > 0).then(|| sum / count as f64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_and_aggregate_recompute() {
        let mut r = ExperimentReport::new("demo", &["trial", "seed", "epsilon", "success"]);
        r.set_parameter("n", 100);
        r.set_parameter("trials", 2);
        r.push_row(vec!["0".into(), "11".into(), "0.5".into(), "1".into()]);
        r.push_row(vec!["1".into(), "12".into(), "0.5".into(), "0".into()]);
        r.push_aggregate(vec![
            AGGREGATE_MARKER.into(),
            String::new(),
            "0.5".into(),
            "0.5".into(),
        ]);
        let text = r.to_csv_string();
        let back = ExperimentReport::parse(&text).unwrap();
        assert_eq!(back, r);

        let recomputed = back.column_mean("success", Some(("epsilon", "0.5"))).unwrap();
        let stored: f64 = back.aggregates[0][3].parse().unwrap();
        assert_eq!(recomputed, stored);
    }

    #[test]
    fn parse_rejects_ragged_rows() {
        let text = "a,b\n1,2\n1,2,3\n";
        assert!(ExperimentReport::parse(text).is_err());
    }
}
