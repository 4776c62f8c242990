//! Command-line front end for the polyrig check suites.

pub mod config;
pub mod explain;
pub mod report;

use anyhow::{Context, Result};
use config::{Overrides, RunConfig};
use polyrig::suite::run_suite;
use polyrig::Error;
use report::CheckReport;
use std::fs;
use std::path::{Path, PathBuf};

/// Where a run left its files and whether every check passed.
#[derive(Debug)]
pub struct RunOutcome {
    pub pass: bool,
    pub report: PathBuf,
    pub tables: Vec<PathBuf>,
    pub summary: String,
}

pub fn run(path: &Path, overrides: &Overrides) -> Result<RunOutcome> {
    let mut cfg = RunConfig::load(path)?;
    cfg.apply(overrides);
    let suites = cfg.suite_list()?;
    let sc = cfg.suite_config()?;

    let mut report = CheckReport::new(&sc, &suites);
    let mut tables = Vec::new();
    for name in &suites {
        match run_suite(name, &sc) {
            Ok(out) => report.absorb(name, out, &mut tables),
            Err(Error::Unsupported(why)) => report.skip(name, why),
            Err(e) => report.fail(name, e.to_string()),
        }
    }

    let tdir = cfg.tables_dir();
    fs::create_dir_all(&cfg.output.dir).with_context(|| format!("creating {}", cfg.output.dir.display()))?;
    fs::create_dir_all(&tdir).with_context(|| format!("creating {}", tdir.display()))?;
    let written = tables.iter().map(|t| report::write_table(&tdir, t)).collect::<Result<Vec<_>>>()?;
    let rpath = cfg.output.dir.join(&cfg.output.report);
    let stamp = chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true);
    report::write_report(&rpath, &report, &stamp)?;

    let s = &report.summary;
    let mut summary = format!(
        "{}: {} checks, {} failed, {} skipped, {} errors",
        if s.pass { "PASS" } else { "FAIL" },
        s.checks,
        s.failed,
        s.skipped.len(),
        s.errors.len()
    );
    for c in report.check.iter().filter(|c| !c.pass) {
        summary.push_str(&format!(
            "\n  {}/{} at {}: {:e} (limit {} {:e})",
            c.suite,
            c.name,
            c.location,
            c.value,
            if matches!(c.comparison, polyrig::suite::Comparison::AtMost) { "<=" } else { ">=" },
            c.threshold
        ));
    }
    for e in &s.errors {
        summary.push_str(&format!("\n  error {e}"));
    }
    Ok(RunOutcome { pass: s.pass, report: rpath, tables: written, summary })
}
