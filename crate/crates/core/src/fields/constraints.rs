//! Constraint densities, dominant energy margins and rigidity residuals.

use super::{FieldSet, FramePoint, Level};
use crate::error::{check_len, Error, Result};
use crate::linalg::{norm, orthogonal_complement, RMat};
use serde::Serialize;

#[derive(Debug, Clone, Serialize)]
pub struct NodeDensity {
    pub idx: Vec<usize>,
    pub x: Vec<f64>,
    pub mu: f64,
    /// Frame components of `J`.
    pub j: Vec<f64>,
    pub j_norm: f64,
    pub margin: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConstraintDensities {
    pub nodes: Vec<NodeDensity>,
}

impl ConstraintDensities {
    pub fn max_abs_mu(&self) -> f64 {
        self.nodes.iter().map(|d| d.mu.abs()).fold(0.0, f64::max)
    }

    pub fn max_j_norm(&self) -> f64 {
        self.nodes.iter().map(|d| d.j_norm).fold(0.0, f64::max)
    }
}

/// `μ`, `J` and `μ - |J|` at every node at least `skip` nodes from the grid edge.
pub fn constraint_densities(fields: &FieldSet, skip: usize) -> Result<ConstraintDensities> {
    let grid = &fields.grid;
    let mut nodes = Vec::new();
    for k in 0..grid.node_count() {
        let idx = grid.unflat(k);
        if grid.depth(&idx) < skip {
            continue;
        }
        let fp = fields.node_frame(&idx, Level::Curvature)?;
        let mu = fp.mu();
        let j = fp.current();
        let j_norm = norm(&j);
        nodes.push(NodeDensity { x: fp.x.clone(), idx, mu, j, j_norm, margin: mu - j_norm });
    }
    Ok(ConstraintDensities { nodes })
}

#[derive(Debug, Clone, Serialize)]
pub struct DecReport {
    pub min_margin: f64,
    pub argmin: Vec<f64>,
    /// Up to 20 locations with `μ - |J| < -tol`.
    pub violations: Vec<(Vec<f64>, f64)>,
}

/// Worst dominant-energy margin in fixed node order.
pub fn dec_report(dens: &ConstraintDensities, tol: f64) -> Result<DecReport> {
    let first = dens.nodes.first().ok_or_else(|| Error::Degenerate("no nodes".into()))?;
    let mut min_margin = first.margin;
    let mut argmin = first.x.clone();
    let mut violations = Vec::new();
    for d in &dens.nodes {
        if d.margin < min_margin {
            min_margin = d.margin;
            argmin = d.x.clone();
        }
        if d.margin < -tol && violations.len() < 20 {
            violations.push((d.x.clone(), d.margin));
        }
    }
    Ok(DecReport { min_margin, argmin, violations })
}

/// `R̂_{ijkl} = R_{ijkl} + q_{jk} q_{il} - q_{ik} q_{jl}` in the frame.
pub fn rhat_tensor(fp: &FramePoint) -> Vec<f64> {
    let n = fp.n;
    let q = &fp.q;
    let mut out = vec![0.0; n * n * n * n];
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    out[((i * n + j) * n + k) * n + l] =
                        fp.riemann(i, j, k, l) + q[(j, k)] * q[(i, l)] - q[(i, k)] * q[(j, l)];
                }
            }
        }
    }
    out
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct RigidityResiduals {
    /// `max |∇_i q_{jn} - ∇_j q_{in}|`.
    pub codazzi_normal: f64,
    /// `max |R̂_{ijkl}|` over tangential indices.
    pub rhat_tangential: f64,
    /// `max |R̂_{ijkn} - (∇_i q_{jk} - ∇_j q_{ik})|`, tangential `i, j, k`.
    pub mixed: f64,
    /// Same with the opposite sign on the derivative term.
    pub mixed_opposite: f64,
    /// `|μ + J(e_n)|`.
    pub energy_flux: f64,
    /// `max |R̂_{ijkl} - τ_{kl} + τ_{lk}|`, `τ_{kl} = (∇_i q_{jk} - ∇_j q_{ik}) δ_{ln}`.
    pub tau_consistency: f64,
    /// `max |R_{ijkl} - R_{klij}|`.
    pub pair_symmetry: f64,
    /// `max |R_{ijkl} + R_{jkil} + R_{kijl}|`.
    pub bianchi: f64,
}

impl RigidityResiduals {
    pub fn max(&self) -> f64 {
        [self.codazzi_normal, self.rhat_tangential, self.mixed, self.energy_flux, self.tau_consistency]
            .into_iter()
            .fold(0.0, f64::max)
    }
}

/// Orthonormal basis (columns) whose last column is `v`.
fn adapted_basis(v: &[f64]) -> RMat {
    let n = v.len();
    let comp = orthogonal_complement(v);
    let nv = norm(v);
    RMat::from_fn(n, n, |i, a| if a + 1 == n { v[i] / nv } else { comp[a][i] })
}

/// Rigidity identity residuals with `e_n` the frame vector with components `normal`.
pub fn rigidity_residuals(fp: &FramePoint, normal: &[f64]) -> Result<RigidityResiduals> {
    let n = fp.n;
    check_len(n, normal.len())?;
    let o = adapted_basis(normal);
    let rh = rhat_tensor(fp);
    let rot4 = |t: &[f64]| -> Vec<f64> {
        let mut out = vec![0.0; n * n * n * n];
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    for d in 0..n {
                        let mut v = 0.0;
                        for i in 0..n {
                            for j in 0..n {
                                let w = o[(i, a)] * o[(j, b)];
                                if w == 0.0 {
                                    continue;
                                }
                                for k in 0..n {
                                    for l in 0..n {
                                        v += w * o[(k, c)] * o[(l, d)] * t[((i * n + j) * n + k) * n + l];
                                    }
                                }
                            }
                        }
                        out[((a * n + b) * n + c) * n + d] = v;
                    }
                }
            }
        }
        out
    };
    let r_raw: Vec<f64> = {
        let mut v = vec![0.0; n * n * n * n];
        for (f, slot) in v.iter_mut().enumerate() {
            let (i, j, k, l) = (f / (n * n * n), (f / (n * n)) % n, (f / n) % n, f % n);
            *slot = fp.riemann(i, j, k, l);
        }
        v
    };
    let rh = rot4(&rh);
    let r = rot4(&r_raw);
    let dq: Vec<RMat> = (0..n)
        .map(|a| {
            let mut acc = RMat::zeros(n, n);
            for i in 0..n {
                acc += &fp.nabla_q[i] * o[(i, a)];
            }
            o.transpose() * acc * &o
        })
        .collect();
    let at = |t: &[f64], i: usize, j: usize, k: usize, l: usize| t[((i * n + j) * n + k) * n + l];
    let nn = n - 1;
    let mut codazzi = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            codazzi = codazzi.max((dq[i][(j, nn)] - dq[j][(i, nn)]).abs());
        }
    }
    let (mut tang, mut mixed, mut opp, mut tau, mut pair, mut bianchi) = (0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    if i < nn && j < nn && k < nn && l < nn {
                        tang = tang.max(at(&rh, i, j, k, l).abs());
                    }
                    let tkl = if l == nn { dq[i][(j, k)] - dq[j][(i, k)] } else { 0.0 };
                    let tlk = if k == nn { dq[i][(j, l)] - dq[j][(i, l)] } else { 0.0 };
                    tau = tau.max((at(&rh, i, j, k, l) - tkl + tlk).abs());
                    pair = pair.max((at(&r, i, j, k, l) - at(&r, k, l, i, j)).abs());
                    bianchi = bianchi.max((at(&r, i, j, k, l) + at(&r, j, k, i, l) + at(&r, k, i, j, l)).abs());
                }
                if i < nn && j < nn && k < nn {
                    let d = dq[i][(j, k)] - dq[j][(i, k)];
                    mixed = mixed.max((at(&rh, i, j, k, nn) - d).abs());
                    opp = opp.max((at(&rh, i, j, k, nn) + d).abs());
                }
            }
        }
    }
    let jv = fp.current();
    let jn: f64 = (0..n).map(|a| jv[a] * o[(a, nn)]).sum();
    Ok(RigidityResiduals {
        codazzi_normal: codazzi,
        rhat_tangential: tang,
        mixed,
        mixed_opposite: opp,
        energy_flux: (fp.mu() + jn).abs(),
        tau_consistency: tau,
        pair_symmetry: pair,
        bianchi,
    })
}
