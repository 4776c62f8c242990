//! Check reports and convergence tables on disk.

use anyhow::{Context, Result};
use polyrig::suite::{CheckRecord, ConvergenceTable, SuiteConfig, SuiteOutcome};
use serde::Serialize;
use std::fs;
use std::path::{Path, PathBuf};

#[derive(Debug, Serialize)]
pub struct Environment {
    pub version: String,
    pub seed: u64,
    pub grid: GridBlock,
}

#[derive(Debug, Serialize)]
pub struct GridBlock {
    pub n: usize,
    pub parity: String,
    pub preset: String,
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub resolutions: Vec<usize>,
    pub lambdas: Vec<f64>,
    pub n0: Vec<f64>,
}

#[derive(Debug, Serialize)]
pub struct Summary {
    pub pass: bool,
    pub checks: usize,
    pub failed: usize,
    pub suites: Vec<String>,
    pub skipped: Vec<String>,
    pub errors: Vec<String>,
    pub notes: Vec<String>,
}

#[derive(Debug, Serialize)]
pub struct TableEntry {
    pub suite: String,
    pub name: String,
    pub csv: String,
    pub orders: Vec<f64>,
}

/// Body of a report; contains nothing that varies between identical runs.
#[derive(Debug, Serialize)]
pub struct CheckReport {
    pub environment: Environment,
    pub summary: Summary,
    pub check: Vec<CheckRecord>,
    pub table: Vec<TableEntry>,
}

impl CheckReport {
    pub fn new(cfg: &SuiteConfig, suites: &[String]) -> Self {
        CheckReport {
            environment: Environment {
                version: env!("CARGO_PKG_VERSION").into(),
                seed: cfg.seed,
                grid: GridBlock {
                    n: cfg.n,
                    parity: format!("{:?}", cfg.parity).to_lowercase(),
                    preset: cfg.preset.clone(),
                    lo: cfg.polyhedron.bbox.0.clone(),
                    hi: cfg.polyhedron.bbox.1.clone(),
                    resolutions: cfg.resolutions.clone(),
                    lambdas: cfg.lambdas.clone(),
                    n0: cfg.n0.clone(),
                },
            },
            summary: Summary {
                pass: true,
                checks: 0,
                failed: 0,
                suites: suites.to_vec(),
                skipped: Vec::new(),
                errors: Vec::new(),
                notes: Vec::new(),
            },
            check: Vec::new(),
            table: Vec::new(),
        }
    }

    pub fn absorb(&mut self, suite: &str, out: SuiteOutcome, tables: &mut Vec<ConvergenceTable>) {
        for t in out.tables {
            self.table.push(TableEntry {
                suite: t.suite.clone(),
                name: t.name.clone(),
                csv: csv_name(&t),
                orders: t.rows.iter().filter_map(|r| r.order).collect(),
            });
            tables.push(t);
        }
        self.summary.notes.extend(out.notes.into_iter().map(|n| format!("{suite}: {n}")));
        self.check.extend(out.checks);
        self.tally();
    }

    pub fn skip(&mut self, suite: &str, why: String) {
        self.summary.skipped.push(format!("{suite}: {why}"));
    }

    pub fn fail(&mut self, suite: &str, why: String) {
        self.summary.errors.push(format!("{suite}: {why}"));
        self.tally();
    }

    fn tally(&mut self) {
        self.summary.checks = self.check.len();
        self.summary.failed = self.check.iter().filter(|c| !c.pass).count();
        self.summary.pass = self.summary.failed == 0 && self.summary.errors.is_empty();
    }

    pub fn body(&self) -> Result<String> {
        Ok(toml::to_string(self)?)
    }
}

pub fn csv_name(t: &ConvergenceTable) -> String {
    format!("{}_{}.csv", t.suite, t.name)
}

pub fn write_table(dir: &Path, t: &ConvergenceTable) -> Result<PathBuf> {
    let path = dir.join(csv_name(t));
    let mut w = csv::Writer::from_path(&path).with_context(|| format!("writing {}", path.display()))?;
    w.write_record(["resolution", "h", "residual", "order"])?;
    for r in &t.rows {
        w.write_record([
            r.resolution.to_string(),
            format!("{:e}", r.h),
            format!("{:e}", r.residual),
            r.order.map(|p| format!("{p:.6}")).unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    Ok(path)
}

/// Header line, then the deterministic body.
pub fn write_report(path: &Path, report: &CheckReport, stamp: &str) -> Result<()> {
    let text = format!("# polyrig report generated {stamp}\n{}", report.body()?);
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}
