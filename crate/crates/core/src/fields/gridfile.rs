//! Plain-text grid files.
//!
//! ```text
//! polyrig-grid 1
//! n 3
//! dims 17 17 17
//! spacing 0.0625 0.0625 0.0625
//! origin 0 0 1
//! provenance hyperbolic_uhs
//! data
//! <g upper triangle> <q upper triangle>      one line per node, first axis slowest
//! ```

use super::{FieldSet, FieldSource, GridSpec};
use crate::error::{Error, Result};
use std::fmt::Write as _;
use std::io::{BufRead, BufReader, Read, Write};

const MAGIC: &str = "polyrig-grid 1";

pub fn write_grid_file<W: Write>(fields: &FieldSet, mut out: W) -> Result<()> {
    let stored = match &fields.source {
        FieldSource::Stored(_) => fields.clone(),
        FieldSource::Analytic(_) => fields.materialize()?,
    };
    let FieldSource::Stored(data) = &stored.source else { unreachable!() };
    let g = &fields.grid;
    let n = g.n();
    let join = |v: &[f64]| v.iter().map(|x| format!("{x:e}")).collect::<Vec<_>>().join(" ");
    writeln!(out, "{MAGIC}")?;
    writeln!(out, "n {n}")?;
    writeln!(out, "dims {}", g.dims.iter().map(|d| d.to_string()).collect::<Vec<_>>().join(" "))?;
    writeln!(out, "spacing {}", join(&g.spacing))?;
    writeln!(out, "origin {}", join(&g.origin))?;
    writeln!(out, "provenance {}", fields.provenance)?;
    writeln!(out, "data")?;
    let stride = n * (n + 1);
    let mut line = String::new();
    for rec in data.chunks(stride) {
        line.clear();
        for (i, v) in rec.iter().enumerate() {
            if i > 0 {
                line.push(' ');
            }
            write!(line, "{v:e}").expect("string write");
        }
        writeln!(out, "{line}")?;
    }
    Ok(())
}

pub fn read_grid_file<R: Read>(input: R) -> Result<FieldSet> {
    let reader = BufReader::new(input);
    let mut lines = reader.lines().enumerate();
    let mut next = |what: &str| -> Result<(usize, String)> {
        match lines.next() {
            Some((i, Ok(l))) => Ok((i + 1, l)),
            Some((i, Err(e))) => Err(Error::Parse { line: i + 1, msg: e.to_string() }),
            None => Err(Error::Parse { line: 0, msg: format!("missing {what}") }),
        }
    };
    let (ln, magic) = next("header")?;
    if magic.trim() != MAGIC {
        return Err(Error::Parse { line: ln, msg: format!("expected '{MAGIC}'") });
    }
    let mut field = |key: &str| -> Result<(usize, String)> {
        let (ln, l) = next(key)?;
        let rest = l
            .strip_prefix(key)
            .ok_or_else(|| Error::Parse { line: ln, msg: format!("expected '{key}'") })?;
        Ok((ln, rest.trim().to_string()))
    };
    let nums = |ln: usize, s: &str| -> Result<Vec<f64>> {
        s.split_whitespace()
            .map(|t| t.parse::<f64>().map_err(|e| Error::Parse { line: ln, msg: e.to_string() }))
            .collect()
    };
    let (ln, ns) = field("n")?;
    let n: usize = ns.parse().map_err(|_| Error::Parse { line: ln, msg: "bad n".into() })?;
    let (ln, d) = field("dims")?;
    let dims: Vec<usize> = nums(ln, &d)?.into_iter().map(|v| v as usize).collect();
    let (ln, s) = field("spacing")?;
    let spacing = nums(ln, &s)?;
    let (ln, o) = field("origin")?;
    let origin = nums(ln, &o)?;
    if dims.len() != n || spacing.len() != n || origin.len() != n {
        return Err(Error::Parse { line: ln, msg: format!("header vectors must have {n} entries") });
    }
    let (_, provenance) = field("provenance")?;
    let (ln, tag) = field("data")?;
    if !tag.is_empty() {
        return Err(Error::Parse { line: ln, msg: "unexpected text after 'data'".into() });
    }
    let grid = GridSpec::new(origin, spacing, dims)?;
    let stride = n * (n + 1);
    let mut data = Vec::with_capacity(grid.node_count() * stride);
    loop {
        match next("data") {
            Ok((ln, l)) => {
                if l.trim().is_empty() {
                    continue;
                }
                let rec = nums(ln, &l)?;
                if rec.len() != stride {
                    return Err(Error::Parse { line: ln, msg: format!("expected {stride} values") });
                }
                data.extend(rec);
            }
            Err(Error::Parse { line: 0, .. }) => break,
            Err(e) => return Err(e),
        }
    }
    if data.len() != grid.node_count() * stride {
        return Err(Error::Parse {
            line: 0,
            msg: format!("expected {} node records, found {}", grid.node_count(), data.len() / stride),
        });
    }
    FieldSet::from_stored(grid, data, provenance)
}
