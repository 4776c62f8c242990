//! Closed-form model data sampled onto grids.

use crate::error::{Error, Result};
use crate::linalg::{dot, RMat};
use evalexpr::{ContextWithMutableVariables, DefaultNumericTypes, HashMapContext, Node, Value};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Preset parameter values as read from configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Param {
    Number(f64),
    List(Vec<f64>),
    Matrix(Vec<Vec<f64>>),
    Text(String),
    Texts(Vec<String>),
}

pub type Params = BTreeMap<String, Param>;

/// Height function of a spacelike graph in Minkowski space:
/// `f(x) = amplitude * sin(<k, x> + phase) + 0.5 x^T B x + <c, x>`.
#[derive(Debug, Clone)]
pub struct GraphFunction {
    pub amplitude: f64,
    pub wave: Vec<f64>,
    pub phase: f64,
    pub quadratic: RMat,
    pub linear: Vec<f64>,
}

impl GraphFunction {
    pub fn value(&self, x: &[f64]) -> f64 {
        let s = dot(&self.wave, x) + self.phase;
        let xv = nalgebra::DVector::from_column_slice(x);
        self.amplitude * s.sin() + 0.5 * xv.dot(&(&self.quadratic * &xv)) + dot(&self.linear, x)
    }

    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let s = dot(&self.wave, x) + self.phase;
        let xv = nalgebra::DVector::from_column_slice(x);
        let bx = &self.quadratic * &xv;
        (0..x.len())
            .map(|i| self.amplitude * s.cos() * self.wave[i] + bx[i] + self.linear[i])
            .collect()
    }

    pub fn hessian(&self, x: &[f64]) -> RMat {
        let n = x.len();
        let s = dot(&self.wave, x) + self.phase;
        RMat::from_fn(n, n, |i, j| {
            -self.amplitude * s.sin() * self.wave[i] * self.wave[j] + self.quadratic[(i, j)]
        })
    }

    /// Third derivatives `∂_i ∂_j ∂_k f`.
    pub fn third(&self, x: &[f64], i: usize, j: usize, k: usize) -> f64 {
        let s = dot(&self.wave, x) + self.phase;
        -self.amplitude * s.cos() * self.wave[i] * self.wave[j] * self.wave[k]
    }
}

/// Symbolic entries compiled once and evaluated per point.
#[derive(Debug, Clone)]
pub struct ExpressionField {
    pub g_src: Vec<String>,
    pub q_src: Vec<String>,
    g: Vec<Node<DefaultNumericTypes>>,
    q: Vec<Node<DefaultNumericTypes>>,
}

#[derive(Debug, Clone)]
pub enum Preset {
    /// Euclidean metric with constant coordinate `q`.
    Flat { q: RMat },
    /// Constant metric and constant `q`.
    Constant { g: RMat, q: RMat },
    /// `g = e^{2φ} δ` with `φ = a Σ_i sin(k x_i + i)`, constant coordinate `q`.
    Conformal { amplitude: f64, wavenumber: f64, q: RMat },
    /// `g = w(x) x_n^{-2} δ` with `w = 1 + b sin(x_1) sin(x_2)` and `q = s g`.
    HyperbolicUhs { sign: f64, bump: f64 },
    /// Induced data on a spacelike graph `t = f(x)` in Minkowski space.
    MinkowskiGraph { f: GraphFunction },
    /// `dx_1^2 + e^{2φ(x')} δ'` with `φ` depending on the remaining coordinates.
    Product { amplitude: f64, q: RMat },
    Custom(ExpressionField),
}

fn upper_len(n: usize) -> usize {
    n * (n + 1) / 2
}

fn from_upper(n: usize, vals: &[f64]) -> RMat {
    let mut m = RMat::zeros(n, n);
    let mut k = 0;
    for i in 0..n {
        for j in i..n {
            m[(i, j)] = vals[k];
            m[(j, i)] = vals[k];
            k += 1;
        }
    }
    m
}

fn number(p: &Params, key: &str, default: f64) -> Result<f64> {
    match p.get(key) {
        None => Ok(default),
        Some(Param::Number(v)) => Ok(*v),
        Some(_) => Err(Error::Config(format!("params.{key} must be a number"))),
    }
}

fn list(p: &Params, key: &str, n: usize, default: Vec<f64>) -> Result<Vec<f64>> {
    match p.get(key) {
        None => Ok(default),
        Some(Param::List(v)) if v.len() == n => Ok(v.clone()),
        Some(Param::Number(v)) if n == 1 => Ok(vec![*v]),
        Some(_) => Err(Error::Config(format!("params.{key} must be a list of {n} numbers"))),
    }
}

fn matrix(p: &Params, key: &str, n: usize) -> Result<Option<RMat>> {
    match p.get(key) {
        None => Ok(None),
        Some(Param::Matrix(rows)) => {
            if rows.len() != n || rows.iter().any(|r| r.len() != n) {
                return Err(Error::Config(format!("params.{key} must be {n}x{n}")));
            }
            let m = RMat::from_fn(n, n, |i, j| rows[i][j]);
            if (&m - m.transpose()).amax() > 1e-14 {
                return Err(Error::Config(format!("params.{key} must be symmetric")));
            }
            Ok(Some(m))
        }
        Some(_) => Err(Error::Config(format!("params.{key} must be a matrix"))),
    }
}

/// Coordinate `q`: explicit `q_matrix` or `q_scale * δ`.
fn q_param(p: &Params, n: usize) -> Result<RMat> {
    if let Some(m) = matrix(p, "q_matrix", n)? {
        return Ok(m);
    }
    Ok(RMat::identity(n, n) * number(p, "q_scale", 0.0)?)
}

fn texts(p: &Params, key: &str, len: usize) -> Result<Vec<String>> {
    match p.get(key) {
        Some(Param::Texts(v)) if v.len() == len => Ok(v.clone()),
        _ => Err(Error::Config(format!(
            "params.{key} must list {len} upper-triangular expressions"
        ))),
    }
}

impl ExpressionField {
    pub fn new(n: usize, g_src: Vec<String>, q_src: Vec<String>) -> Result<Self> {
        let len = upper_len(n);
        if g_src.len() != len || q_src.len() != len {
            return Err(Error::Config(format!("custom preset needs {len} entries for g and q")));
        }
        let compile = |s: &String| {
            evalexpr::build_operator_tree::<DefaultNumericTypes>(s)
                .map_err(|e| Error::Expression(format!("{s}: {e}")))
        };
        let g = g_src.iter().map(compile).collect::<Result<Vec<_>>>()?;
        let q = q_src.iter().map(compile).collect::<Result<Vec<_>>>()?;
        Ok(Self { g_src, q_src, g, q })
    }

    fn eval(&self, x: &[f64]) -> Result<(RMat, RMat)> {
        let mut ctx = HashMapContext::<DefaultNumericTypes>::new();
        for (i, v) in x.iter().enumerate() {
            ctx.set_value(format!("x{}", i + 1), Value::Float(*v))
                .map_err(|e| Error::Expression(e.to_string()))?;
        }
        let run = |nodes: &[Node<DefaultNumericTypes>]| -> Result<Vec<f64>> {
            nodes
                .iter()
                .map(|nd| nd.eval_number_with_context(&ctx).map_err(|e| Error::Expression(e.to_string())))
                .collect()
        };
        let n = x.len();
        Ok((from_upper(n, &run(&self.g)?), from_upper(n, &run(&self.q)?)))
    }
}

impl Preset {
    /// Build a preset by name from configuration parameters.
    pub fn from_name(name: &str, n: usize, p: &Params) -> Result<Self> {
        Ok(match name {
            "flat" => Preset::Flat { q: q_param(p, n)? },
            "constant" => Preset::Constant {
                g: matrix(p, "g_matrix", n)?.unwrap_or_else(|| RMat::identity(n, n)),
                q: q_param(p, n)?,
            },
            "conformal" => Preset::Conformal {
                amplitude: number(p, "amplitude", 0.05)?,
                wavenumber: number(p, "wavenumber", 1.0)?,
                q: if p.contains_key("q_matrix") || p.contains_key("q_scale") {
                    q_param(p, n)?
                } else {
                    RMat::identity(n, n) * 0.1
                },
            },
            "hyperbolic_uhs" => Preset::HyperbolicUhs {
                sign: number(p, "sign", 1.0)?,
                bump: number(p, "bump", 0.0)?,
            },
            "minkowski_graph" => {
                let mut wave = vec![0.0; n];
                wave[0] = 1.0;
                Preset::MinkowskiGraph {
                    f: GraphFunction {
                        amplitude: number(p, "amplitude", 0.2)?,
                        wave: list(p, "wave", n, wave)?,
                        phase: number(p, "phase", 0.0)?,
                        quadratic: matrix(p, "quadratic", n)?.unwrap_or_else(|| RMat::zeros(n, n)),
                        linear: list(p, "linear", n, vec![0.0; n])?,
                    },
                }
            }
            "product" => Preset::Product { amplitude: number(p, "amplitude", 0.05)?, q: q_param(p, n)? },
            "custom" => {
                let len = upper_len(n);
                Preset::Custom(ExpressionField::new(n, texts(p, "g", len)?, texts(p, "q", len)?)?)
            }
            other => {
                return Err(Error::Config(format!(
                    "unknown field preset '{other}' (expected flat, constant, conformal, hyperbolic_uhs, minkowski_graph, product, custom)"
                )))
            }
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Preset::Flat { .. } => "flat",
            Preset::Constant { .. } => "constant",
            Preset::Conformal { .. } => "conformal",
            Preset::HyperbolicUhs { .. } => "hyperbolic_uhs",
            Preset::MinkowskiGraph { .. } => "minkowski_graph",
            Preset::Product { .. } => "product",
            Preset::Custom(_) => "custom",
        }
    }

    /// Whether `g` and `q` are independent of position.
    pub fn is_uniform(&self) -> bool {
        matches!(self, Preset::Flat { .. } | Preset::Constant { .. })
    }

    /// Metric and `q` in coordinates at `x`.
    pub fn eval(&self, x: &[f64]) -> Result<(RMat, RMat)> {
        let n = x.len();
        Ok(match self {
            Preset::Flat { q } => (RMat::identity(n, n), q.clone()),
            Preset::Constant { g, q } => (g.clone(), q.clone()),
            Preset::Conformal { amplitude, wavenumber, q } => {
                let phi: f64 = x.iter().enumerate().map(|(i, v)| (wavenumber * v + i as f64).sin()).sum::<f64>() * amplitude;
                (RMat::identity(n, n) * (2.0 * phi).exp(), q.clone())
            }
            Preset::HyperbolicUhs { sign, bump } => {
                let xn = x[n - 1];
                if xn <= 0.0 {
                    return Err(Error::DegenerateMetric { location: format!("{x:?} (x_n <= 0)") });
                }
                let w = 1.0 + bump * x[0].sin() * x[1 % n].sin();
                let g = RMat::identity(n, n) * (w / (xn * xn));
                let q = &g * *sign;
                (g, q)
            }
            Preset::MinkowskiGraph { f } => {
                let df = f.gradient(x);
                let s2: f64 = df.iter().map(|v| v * v).sum();
                if s2 >= 1.0 {
                    return Err(Error::NonSpacelike(format!("|grad f| = {} at {x:?}", s2.sqrt())));
                }
                let g = RMat::from_fn(n, n, |i, j| if i == j { 1.0 } else { 0.0 } - df[i] * df[j]);
                let q = f.hessian(x) / (1.0 - s2).sqrt();
                (g, q)
            }
            Preset::Product { amplitude, q } => {
                let phi: f64 = x.iter().skip(1).enumerate().map(|(i, v)| (v + i as f64).sin()).sum::<f64>() * amplitude;
                let mut g = RMat::identity(n, n) * (2.0 * phi).exp();
                g[(0, 0)] = 1.0;
                (g, q.clone())
            }
            Preset::Custom(e) => e.eval(x)?,
        })
    }
}
