//! Orthonormal frames, connection and curvature at a point from a jet.

use super::Jet;
use crate::error::{Error, Result};
use crate::linalg::{cholesky, half_lower, lower_inverse, RMat};

/// How much of the jet to process.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Level {
    /// Frame, connection one-form and `∇q`.
    Connection,
    /// Additionally the scalar curvature.
    Scalar,
    /// Additionally the full Riemann tensor.
    Curvature,
}

/// Geometry at one point, in the Gram–Schmidt frame of the coordinate basis.
#[derive(Debug, Clone)]
pub struct FramePoint {
    pub x: Vec<f64>,
    pub n: usize,
    pub g: RMat,
    pub ginv: RMat,
    /// Lower Cholesky factor, `g = L L^T`.
    pub l: RMat,
    /// Columns are the frame vectors in coordinates, `E = L^{-T}`.
    pub e: RMat,
    /// `de[c] = ∂_c E`.
    pub de: Vec<RMat>,
    /// `christoffel[(k * n + i) * n + j] = Γ^k_{ij}`.
    pub christoffel: Vec<f64>,
    /// `omega[c][(a, b)] = g(∇_{∂_c} e_a, e_b)`.
    pub omega: Vec<RMat>,
    /// Coordinate `q` and its partials.
    pub q_coord: RMat,
    pub dq_coord: Vec<RMat>,
    /// `q(e_a, e_b)`.
    pub q: RMat,
    /// `nabla_q[a][(b, c)] = (∇_{e_a} q)(e_b, e_c)`.
    pub nabla_q: Vec<RMat>,
    /// `R(e_a, e_b, e_c, e_d)` flattened, only at curvature level.
    pub riemann: Option<Vec<f64>>,
    /// Scalar curvature, at scalar level and above.
    pub scalar: Option<f64>,
    /// Coordinate partials of `g`, kept for derived quantities.
    pub dg: Vec<RMat>,
}

fn idx3(n: usize, a: usize, b: usize, c: usize) -> usize {
    (a * n + b) * n + c
}

impl FramePoint {
    pub fn new(jet: &Jet, level: Level) -> Result<Self> {
        let n = jet.n();
        let l = cholesky(&jet.g).ok_or_else(|| Error::DegenerateMetric { location: format!("{:?}", jet.x) })?;
        let linv = lower_inverse(&l);
        let e = linv.transpose();
        let ginv = &e * e.transpose();

        let mut christoffel = vec![0.0; n * n * n];
        let mut lowered = vec![0.0; n * n * n];
        for h in 0..n {
            for i in 0..n {
                for j in 0..n {
                    lowered[idx3(n, h, i, j)] =
                        0.5 * (jet.dg[i][(h, j)] + jet.dg[j][(h, i)] - jet.dg[h][(i, j)]);
                }
            }
        }
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    christoffel[idx3(n, k, i, j)] = (0..n).map(|h| ginv[(k, h)] * lowered[idx3(n, h, i, j)]).sum();
                }
            }
        }

        let mut de = Vec::with_capacity(n);
        let mut omega = Vec::with_capacity(n);
        for c in 0..n {
            let x = &linv * &jet.dg[c] * linv.transpose();
            let dl = &l * half_lower(&x);
            let dec = -(&e * dl.transpose() * &e);
            let gamma_c = RMat::from_fn(n, n, |d, f| christoffel[idx3(n, d, c, f)]);
            let k = &dec + gamma_c * &e;
            omega.push(k.transpose() * &l);
            de.push(dec);
        }

        let mut nabla_coord = Vec::with_capacity(n);
        for c in 0..n {
            let gamma_c = RMat::from_fn(n, n, |l_, i| christoffel[idx3(n, l_, c, i)]);
            let t = gamma_c.transpose() * &jet.q;
            nabla_coord.push(&jet.dq[c] - &t - t.transpose());
        }
        let q = e.transpose() * &jet.q * &e;
        let nabla_q = (0..n)
            .map(|a| {
                let mut acc = RMat::zeros(n, n);
                for c in 0..n {
                    if e[(c, a)] != 0.0 {
                        acc += &nabla_coord[c] * e[(c, a)];
                    }
                }
                e.transpose() * acc * &e
            })
            .collect();

        let riemann = match level {
            Level::Curvature => Some(riemann_frame(jet, &ginv, &christoffel, &lowered, &e)),
            _ => None,
        };
        let scalar = match (level, &riemann) {
            (Level::Connection, _) => None,
            (_, Some(r)) => Some((0..n).flat_map(|a| (0..n).map(move |b| (a, b))).map(|(a, b)| r[((a * n + b) * n + b) * n + a]).sum()),
            (_, None) => Some(scalar_curvature(jet, &ginv, &christoffel, &lowered)),
        };

        Ok(Self {
            x: jet.x.clone(),
            n,
            g: jet.g.clone(),
            ginv,
            l,
            e,
            de,
            christoffel,
            omega,
            q_coord: jet.q.clone(),
            dq_coord: jet.dq.clone(),
            q,
            nabla_q,
            riemann,
            scalar,
            dg: jet.dg.clone(),
        })
    }

    pub fn gamma(&self, k: usize, i: usize, j: usize) -> f64 {
        self.christoffel[idx3(self.n, k, i, j)]
    }

    /// Connection matrix `ω(X)` for a coordinate vector `X`.
    pub fn omega_along(&self, x: &[f64]) -> RMat {
        let mut acc = RMat::zeros(self.n, self.n);
        for (c, &v) in x.iter().enumerate() {
            if v != 0.0 {
                acc += &self.omega[c] * v;
            }
        }
        acc
    }

    /// Connection matrix `ω(e_a)`.
    pub fn omega_frame(&self, a: usize) -> RMat {
        let col: Vec<f64> = self.e.column(a).iter().copied().collect();
        self.omega_along(&col)
    }

    /// Frame components of a coordinate vector.
    pub fn to_frame(&self, v: &[f64]) -> Vec<f64> {
        let lv = self.l.transpose() * nalgebra::DVector::from_column_slice(v);
        lv.iter().copied().collect()
    }

    /// Coordinate components of a frame vector.
    pub fn to_coord(&self, v: &[f64]) -> Vec<f64> {
        let ev = &self.e * nalgebra::DVector::from_column_slice(v);
        ev.iter().copied().collect()
    }

    pub fn riemann(&self, a: usize, b: usize, c: usize, d: usize) -> f64 {
        let n = self.n;
        self.riemann.as_ref().expect("curvature level")[((a * n + b) * n + c) * n + d]
    }

    /// `R = Σ_{a,b} R_{abba}`.
    pub fn scalar_curvature(&self) -> f64 {
        self.scalar.expect("scalar curvature level")
    }

    pub fn trace_q(&self) -> f64 {
        self.q.trace()
    }

    pub fn q_norm_sq(&self) -> f64 {
        self.q.iter().map(|v| v * v).sum()
    }

    /// Energy density `½ (R + (tr q)^2 - |q|^2)`.
    pub fn mu(&self) -> f64 {
        let t = self.trace_q();
        0.5 * (self.scalar_curvature() + t * t - self.q_norm_sq())
    }

    /// Current `div q - d tr q` in frame components.
    pub fn current(&self) -> Vec<f64> {
        (0..self.n)
            .map(|b| (0..self.n).map(|a| self.nabla_q[a][(a, b)] - self.nabla_q[b][(a, a)]).sum())
            .collect()
    }
}

/// `g^{jk} (∂_i Γ^i_{jk} - ∂_k Γ^i_{ji} + Γ^i_{im} Γ^m_{jk} - Γ^i_{km} Γ^m_{ji})`.
fn scalar_curvature(jet: &Jet, ginv: &RMat, christoffel: &[f64], lowered: &[f64]) -> f64 {
    let n = jet.n();
    let gam = |k: usize, i: usize, j: usize| christoffel[idx3(n, k, i, j)];
    let dginv: Vec<RMat> = (0..n).map(|c| -(ginv * &jet.dg[c] * ginv)).collect();
    // ∂_c Γ^l_{jk} = ∂_c g^{lh} Γ_{hjk} + g^{lh} ∂_c Γ_{hjk}
    let dgam = |c: usize, l: usize, j: usize, k: usize| -> f64 {
        (0..n)
            .map(|h| {
                let ds = 0.5 * (jet.ddg[c * n + j][(h, k)] + jet.ddg[c * n + k][(h, j)] - jet.ddg[c * n + h][(j, k)]);
                dginv[c][(l, h)] * lowered[idx3(n, h, j, k)] + ginv[(l, h)] * ds
            })
            .sum()
    };
    let mut r = 0.0;
    for j in 0..n {
        for k in 0..n {
            let w = ginv[(j, k)];
            if w == 0.0 {
                continue;
            }
            let mut v = 0.0;
            for i in 0..n {
                v += dgam(i, i, j, k) - dgam(k, i, j, i);
                for m in 0..n {
                    v += gam(i, i, m) * gam(m, j, k) - gam(i, k, m) * gam(m, j, i);
                }
            }
            r += w * v;
        }
    }
    r
}

fn riemann_frame(jet: &Jet, ginv: &RMat, christoffel: &[f64], lowered: &[f64], e: &RMat) -> Vec<f64> {
    let n = jet.n();
    let gi = |c: usize| -> RMat { -(ginv * &jet.dg[c] * ginv) };
    // dgamma[((i * n + l) * n + j) * n + k] = ∂_i Γ^l_{jk}
    let mut dgamma = vec![0.0; n * n * n * n];
    for i in 0..n {
        let dginv = gi(i);
        for h in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let ds = 0.5
                        * (jet.ddg[i * n + j][(h, k)] + jet.ddg[i * n + k][(h, j)] - jet.ddg[i * n + h][(j, k)]);
                    for l in 0..n {
                        dgamma[((i * n + l) * n + j) * n + k] +=
                            dginv[(l, h)] * lowered[idx3(n, h, j, k)] + ginv[(l, h)] * ds;
                    }
                }
            }
        }
    }
    let gam = |k: usize, i: usize, j: usize| christoffel[idx3(n, k, i, j)];
    let dgam = |i: usize, l: usize, j: usize, k: usize| dgamma[((i * n + l) * n + j) * n + k];
    // coord[((i * n + j) * n + k) * n + l] = g(R(∂_i, ∂_j) ∂_k, ∂_l)
    let mut coord = vec![0.0; n * n * n * n];
    let mut up = vec![0.0; n];
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for (p, slot) in up.iter_mut().enumerate() {
                    let mut v = dgam(i, p, j, k) - dgam(j, p, i, k);
                    for m in 0..n {
                        v += gam(p, i, m) * gam(m, j, k) - gam(p, j, m) * gam(m, i, k);
                    }
                    *slot = v;
                }
                for l in 0..n {
                    coord[((i * n + j) * n + k) * n + l] = (0..n).map(|p| jet.g[(l, p)] * up[p]).sum();
                }
            }
        }
    }
    let mut cur = coord;
    for slot in 0..4 {
        let mut next = vec![0.0; n * n * n * n];
        let stride = n.pow(3 - slot as u32);
        for flat in 0..n * n * n * n {
            let hi = flat / (stride * n);
            let lo = flat % stride;
            let a = (flat / stride) % n;
            let mut v = 0.0;
            for i in 0..n {
                let ei = e[(i, a)];
                if ei != 0.0 {
                    v += ei * cur[(hi * n + i) * stride + lo];
                }
            }
            next[flat] = v;
        }
        cur = next;
    }
    cur
}
