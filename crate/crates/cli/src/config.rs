//! Run configuration as read from TOML.

use anyhow::{bail, Context, Result};
use polyrig::fields::Params;
use polyrig::suite::{SuiteConfig, SUITES};
use polyrig::{HalfSpace, Parity, Polyhedron};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub n: usize,
    #[serde(default)]
    pub parity: Option<Parity>,
    pub polyhedron: PolyhedronSpec,
    pub fields: FieldSpec,
    #[serde(default = "default_resolutions")]
    pub resolutions: Vec<usize>,
    #[serde(default = "default_lambdas")]
    pub lambdas: Vec<f64>,
    #[serde(default)]
    pub n0: Option<Vec<f64>>,
    #[serde(default = "default_suites")]
    pub suites: Vec<String>,
    #[serde(default)]
    pub output: OutputSpec,
    #[serde(default = "default_seed")]
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "lowercase", deny_unknown_fields)]
pub enum PolyhedronSpec {
    Cube {
        #[serde(default = "one")]
        side: f64,
    },
    Box {
        lo: Vec<f64>,
        hi: Vec<f64>,
    },
    Simplex,
    Prism,
    Halfspaces {
        halfspaces: Vec<HalfSpaceSpec>,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HalfSpaceSpec {
    pub a: Vec<f64>,
    pub b: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldSpec {
    pub preset: String,
    #[serde(default)]
    pub params: Params,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default = "default_dir")]
    pub dir: PathBuf,
    #[serde(default = "default_report")]
    pub report: String,
    #[serde(default)]
    pub tables: Option<PathBuf>,
}

impl Default for OutputSpec {
    fn default() -> Self {
        OutputSpec { dir: default_dir(), report: default_report(), tables: None }
    }
}

fn one() -> f64 {
    1.0
}

fn default_resolutions() -> Vec<usize> {
    vec![8, 16, 32]
}

fn default_lambdas() -> Vec<f64> {
    vec![8.0, 16.0, 32.0, 64.0]
}

fn default_suites() -> Vec<String> {
    vec!["all".into()]
}

fn default_seed() -> u64 {
    2024
}

fn default_dir() -> PathBuf {
    PathBuf::from("polyrig-out")
}

fn default_report() -> String {
    "report.toml".into()
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub suites: Vec<String>,
    pub resolutions: Vec<usize>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("invalid config {}", path.display()))
    }

    pub fn parse(text: &str) -> Result<Self> {
        Ok(toml::from_str(text)?)
    }

    pub fn apply(&mut self, o: &Overrides) {
        if !o.suites.is_empty() {
            self.suites = o.suites.clone();
        }
        if !o.resolutions.is_empty() {
            self.resolutions = o.resolutions.clone();
        }
        if let Some(s) = o.seed {
            self.seed = s;
        }
        if let Some(d) = &o.out {
            self.output.dir = d.clone();
        }
    }

    /// Suite names in run order, with `all` expanded.
    pub fn suite_list(&self) -> Result<Vec<String>> {
        if self.suites.is_empty() {
            bail!("key `suites`: no suites requested");
        }
        let mut out: Vec<String> = Vec::new();
        for s in &self.suites {
            let names: Vec<&str> = if s == "all" {
                SUITES.to_vec()
            } else if SUITES.contains(&s.as_str()) {
                vec![s.as_str()]
            } else {
                bail!("key `suites`: unknown suite '{s}' (expected one of {}, all)", SUITES.join(", "));
            };
            for name in names {
                if !out.iter().any(|o| o == name) {
                    out.push(name.to_string());
                }
            }
        }
        Ok(out)
    }

    pub fn n0(&self) -> Vec<f64> {
        self.n0.clone().unwrap_or_else(|| {
            let mut v = vec![0.0; self.n];
            if let Some(first) = v.first_mut() {
                *first = 1.0;
            }
            v
        })
    }

    pub fn polyhedron(&self) -> Result<Polyhedron> {
        let p = match &self.polyhedron {
            PolyhedronSpec::Cube { side } => Polyhedron::cube(self.n, *side),
            PolyhedronSpec::Box { lo, hi } => Polyhedron::boxed(lo, hi),
            PolyhedronSpec::Simplex => Polyhedron::simplex(self.n),
            PolyhedronSpec::Prism => Polyhedron::prism(),
            PolyhedronSpec::Halfspaces { halfspaces } => halfspaces
                .iter()
                .map(|h| HalfSpace::new(h.a.clone(), h.b))
                .collect::<polyrig::Result<Vec<_>>>()
                .and_then(Polyhedron::new),
        };
        p.context("key `polyhedron`")
    }

    /// Validated suite configuration; errors name the offending key.
    pub fn suite_config(&self) -> Result<SuiteConfig> {
        if !(2..=8).contains(&self.n) {
            bail!("key `n`: {} outside 2..=8", self.n);
        }
        let parity = Parity::of(self.n);
        if let Some(p) = self.parity {
            if p != parity {
                bail!("key `parity`: {p:?} does not match n = {}", self.n);
            }
        }
        if self.resolutions.is_empty() || self.resolutions.windows(2).any(|w| w[0] >= w[1]) {
            bail!("key `resolutions`: must be non-empty and strictly increasing");
        }
        if self.resolutions[0] < 2 {
            bail!("key `resolutions`: entries must be at least 2");
        }
        if self.lambdas.is_empty() || self.lambdas.iter().any(|l| !(*l > 0.0)) {
            bail!("key `lambdas`: must be non-empty and positive");
        }
        let n0 = self.n0();
        let len = n0.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n0.len() != self.n || (len - 1.0).abs() > 1e-10 {
            bail!("key `n0`: must be a unit vector with {} entries", self.n);
        }
        let polyhedron = self.polyhedron()?;
        if polyhedron.n != self.n {
            bail!("key `polyhedron`: dimension {} does not match n = {}", polyhedron.n, self.n);
        }
        let lo = &polyhedron.bbox.0;
        let hi = &polyhedron.bbox.1;
        polyrig::GridSpec::covering(lo, hi, self.resolutions[0]).context("key `polyhedron`")?;
        polyrig::Preset::from_name(&self.fields.preset, self.n, &self.fields.params).context("key `fields`")?;
        Ok(SuiteConfig {
            n: self.n,
            parity,
            polyhedron,
            preset: self.fields.preset.clone(),
            params: self.fields.params.clone(),
            resolutions: self.resolutions.clone(),
            lambdas: self.lambdas.clone(),
            n0,
            seed: self.seed,
        })
    }

    pub fn tables_dir(&self) -> PathBuf {
        match &self.output.tables {
            Some(t) if t.is_absolute() => t.clone(),
            Some(t) => self.output.dir.join(t),
            None => self.output.dir.join("tables"),
        }
    }
}
