//! Result containers and the file emitter.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::Result;
use crate::experiment::fit::DecayFit;

/// A CSV table. Cells are pre-formatted so output is byte-stable.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: impl Into<String>, header: &[&str]) -> Self {
        Self { name: name.into(), header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Formats a float for CSV output.
pub fn num(x: f64) -> String {
    format!("{x:.12e}")
}

/// A decay series with its fit, rendered as CSV plus a gnuplot script.
#[derive(Debug, Clone, PartialEq)]
pub struct DecaySeries {
    pub name: String,
    pub label: String,
    pub points: Vec<(u32, f64)>,
    pub fit: Option<DecayFit>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CriterionOutcome {
    pub id: String,
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl CriterionOutcome {
    pub fn new(id: impl Into<String>, name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Self { id: id.into(), name: name.into(), passed, detail: detail.into() }
    }

    pub fn line(&self) -> String {
        format!("[{}] {} {}: {}", if self.passed { "PASS" } else { "FAIL" }, self.id, self.name, self.detail)
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ExperimentReport {
    pub outcomes: Vec<CriterionOutcome>,
    pub tables: Vec<Table>,
    pub series: Vec<DecaySeries>,
    pub notes: Vec<String>,
}

impl ExperimentReport {
    pub fn merge(&mut self, other: ExperimentReport) {
        self.outcomes.extend(other.outcomes);
        self.tables.extend(other.tables);
        self.series.extend(other.series);
        self.notes.extend(other.notes);
    }

    pub fn all_passed(&self) -> bool {
        self.outcomes.iter().all(|o| o.passed)
    }

    /// `0` iff every enabled criterion passed.
    pub fn exit_code(&self) -> i32 {
        if self.all_passed() {
            0
        } else {
            1
        }
    }

    pub fn summary(&self) -> String {
        let mut s = String::new();
        let passed = self.outcomes.iter().filter(|o| o.passed).count();
        let _ = writeln!(s, "criteria: {} passed, {} failed", passed, self.outcomes.len() - passed);
        for o in &self.outcomes {
            let _ = writeln!(s, "{}", o.line());
        }
        for n in &self.notes {
            let _ = writeln!(s, "note: {n}");
        }
        s
    }
}

fn gnuplot_script(series: &DecaySeries, csv_name: &str) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "set datafile separator ','");
    let _ = writeln!(s, "set logscale xy");
    let _ = writeln!(s, "set xlabel 'k'");
    let _ = writeln!(s, "set ylabel '{}'", series.label);
    let _ = writeln!(s, "set key top right");
    let mut plot = format!("plot '{csv_name}' using 1:2 skip 1 with linespoints title '{}'", series.name);
    if let Some(fit) = &series.fit {
        if fit.slope.is_finite() {
            let _ = write!(
                plot,
                ", 10**({:.6}) * x**({:.6}) title 'fit slope {:.2}'",
                fit.intercept, fit.slope, fit.slope
            );
        }
    }
    let _ = writeln!(s, "{plot}");
    s
}

/// Writes every table as CSV, one CSV and gnuplot script per decay series,
/// and `summary.txt`. Returns the paths written.
pub fn emit_report(report: &ExperimentReport, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    for t in &report.tables {
        let p = dir.join(format!("{}.csv", t.name));
        t.write_csv(&p)?;
        written.push(p);
    }
    for s in &report.series {
        let csv_name = format!("{}.csv", s.name);
        let mut t = Table::new(&s.name, &["k", "value"]);
        for &(k, v) in &s.points {
            t.push(vec![k.to_string(), num(v)]);
        }
        let p = dir.join(&csv_name);
        t.write_csv(&p)?;
        written.push(p);
        let gp = dir.join(format!("{}.gp", s.name));
        fs::write(&gp, gnuplot_script(s, &csv_name))?;
        written.push(gp);
    }
    let summary = dir.join("summary.txt");
    fs::write(&summary, report.summary())?;
    written.push(summary);
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_report() {
        let dir = tempfile::tempdir().unwrap();
        let r = ExperimentReport::default();
        emit_report(&r, dir.path()).unwrap();
        let text = fs::read_to_string(dir.path().join("summary.txt")).unwrap();
        assert!(text.starts_with("criteria: 0 passed, 0 failed"));
        assert_eq!(r.exit_code(), 0);
    }

    #[test]
    fn failing_criterion_sets_exit_code() {
        let mut r = ExperimentReport::default();
        r.outcomes.push(CriterionOutcome::new("C4", "low-band decay", false, "slope -1.2"));
        r.outcomes.push(CriterionOutcome::new("C1", "bounds", true, "ok"));
        assert_eq!(r.exit_code(), 1);
        assert!(r.summary().contains("[FAIL] C4 low-band decay"));
    }

    #[test]
    fn output_is_deterministic() {
        let mut r = ExperimentReport::default();
        let mut t = Table::new("t", &["a", "b"]);
        t.push(vec!["1".into(), num(0.1)]);
        t.push(vec!["x,y".into(), num(-2.5e-300)]);
        r.tables.push(t);
        r.series.push(DecaySeries { name: "s".into(), label: "a_k".into(), points: vec![(64, 1e-3), (128, 1e-5)], fit: None });
        let d1 = tempfile::tempdir().unwrap();
        let d2 = tempfile::tempdir().unwrap();
        emit_report(&r, d1.path()).unwrap();
        emit_report(&r, d2.path()).unwrap();
        for f in ["t.csv", "s.csv", "s.gp", "summary.txt"] {
            assert_eq!(fs::read(d1.path().join(f)).unwrap(), fs::read(d2.path().join(f)).unwrap());
        }
        let csv = fs::read_to_string(d1.path().join("t.csv")).unwrap();
        assert!(csv.contains("\"x,y\""));
    }
}
