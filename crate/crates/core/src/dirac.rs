//! Twisted connections, Dirac operators and boundary operators at a point.
//!
//! A twisted spinor `σ = Σ_α s_α ⊗ s̄_α` is stored as the `m × m` matrix
//! `S[(a, α)] = (s_α)_a`, so that `(A ⊗ B) σ` is `A S Bᵀ`.

use crate::clifford::{CliffordRep, Parity};
use crate::error::{check_len, Error, Result};
use crate::fields::{FaceGeometry, FramePoint};
use crate::linalg::{c, identity, inner, kron, mm, mm_t, norm, trace_norm, CMat, RMat, I};
use crate::tolerances;
use num_complex::Complex64;

pub type Twisted = CMat;

/// Sign with which the zeroth-order term enters the modified Dirac operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PsiSign {
    /// `D̂ = Σ c(e_i) ∇̂_i = D + Ψ`.
    Plus,
    /// `D̂ = D - Ψ`, kept as a diagnostic.
    Minus,
}

/// `A σ Bᵀ`.
pub fn apply_kron(a: &CMat, b: &CMat, s: &Twisted) -> Twisted {
    mm_t(&mm(a, s), b)
}

/// Column-stacked view matching `kron(A, B)` acting on `vec(S)` row by row.
pub fn to_vector(s: &Twisted) -> Vec<Complex64> {
    let m = s.nrows();
    (0..m * m).map(|k| s[(k / m, k % m)]).collect()
}

pub fn from_vector(m: usize, v: &[Complex64]) -> Twisted {
    CMat::from_fn(m, m, |a, al| v[a * m + al])
}

/// Squared twisted norm.
pub fn norm_sq(s: &Twisted) -> f64 {
    s.iter().map(|z| z.norm_sqr()).sum()
}

/// Real part of the twisted inner product.
pub fn re_inner(u: &Twisted, v: &Twisted) -> f64 {
    inner(u, v).re
}

/// Operators at an interior point with a reference flat direction `N0`.
#[derive(Debug, Clone)]
pub struct TwistedPointOperators<'a> {
    pub rep: &'a CliffordRep,
    pub fp: &'a FramePoint,
    pub n0: Vec<f64>,
    /// `Ω(e_a) = ¼ Σ ω_{bc}(e_a) γ_b γ_c`.
    pub spin: Vec<CMat>,
    /// `h(q(e_a))`.
    pub hq: Vec<CMat>,
    /// `F(N0)`.
    pub flat_n0: CMat,
    pub sign: PsiSign,
}

/// `¼ Σ_{b,c} w_{bc} γ_b γ_c` for an antisymmetric `w`.
pub fn spin_matrix(rep: &CliffordRep, w: &RMat) -> CMat {
    let mut acc = CMat::zeros(rep.m, rep.m);
    for (k, (b, cc)) in rep.pairs().enumerate() {
        let v = 0.25 * (w[(b, cc)] - w[(cc, b)]);
        if v != 0.0 {
            acc.zip_apply(&rep.bivectors[k], |x, y| *x += y * v);
        }
    }
    acc
}

impl<'a> TwistedPointOperators<'a> {
    pub fn new(rep: &'a CliffordRep, fp: &'a FramePoint, n0: &[f64], sign: PsiSign) -> Result<Self> {
        check_len(rep.n, fp.n)?;
        check_len(rep.n, n0.len())?;
        let nn = norm(n0);
        if (nn - 1.0).abs() > tolerances::UNIT {
            return Err(Error::NonUnit { norm: nn });
        }
        let n = rep.n;
        let spin = (0..n).map(|a| spin_matrix(rep, &fp.omega_frame(a))).collect();
        let hq = (0..n)
            .map(|a| {
                let row: Vec<f64> = (0..n).map(|b| fp.q[(a, b)]).collect();
                rep.hermitian(&row)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { rep, fp, n0: n0.to_vec(), spin, hq, flat_n0: rep.flat_action(n0)?, sign })
    }

    /// `e_a(σ)` from coordinate partials.
    pub fn frame_derivative(&self, a: usize, ds: &[Twisted]) -> Twisted {
        let mut acc = CMat::zeros(self.rep.m, self.rep.m);
        for (cc, d) in ds.iter().enumerate() {
            let w = self.fp.e[(cc, a)];
            if w != 0.0 {
                acc += d * c(w);
            }
        }
        acc
    }

    /// `∇_{e_a} σ`.
    pub fn nabla_apply(&self, a: usize, s: &Twisted, ds: &[Twisted]) -> Twisted {
        self.frame_derivative(a, ds) + mm(&self.spin[a], s)
    }

    /// `½ Γ_{q(e_a)} σ = ½ h(q(e_a)) ⊗ F(N0) σ`.
    pub fn q_term(&self, a: usize, s: &Twisted) -> Twisted {
        apply_kron(&self.hq[a], &self.flat_n0, s) * c(0.5)
    }

    /// `∇̂_{e_a} σ`.
    pub fn nabla_hat_apply(&self, a: usize, s: &Twisted, ds: &[Twisted]) -> Twisted {
        self.nabla_apply(a, s, ds) + self.q_term(a, s)
    }

    /// `D σ = Σ γ_a ∇_a σ`.
    pub fn dirac_apply(&self, s: &Twisted, ds: &[Twisted]) -> Twisted {
        let mut acc = CMat::zeros(self.rep.m, self.rep.m);
        for a in 0..self.rep.n {
            acc += &self.rep.gamma[a] * self.nabla_apply(a, s, ds);
        }
        acc
    }

    /// Closed form of `Ψ`: `½ tr q (ε ⊗ F(N0))` in even and `½ tr q (1 ⊗ c̄(N0))` in odd dimension.
    pub fn psi(&self) -> (CMat, CMat) {
        let t = self.fp.trace_q();
        match self.rep.parity {
            Parity::Even => (self.rep.epsilon.clone() * c(0.5 * t), self.flat_n0.clone()),
            Parity::Odd => (identity(self.rep.m) * c(0.5 * t), self.flat_n0.clone() * (-I)),
        }
    }

    pub fn psi_apply(&self, s: &Twisted) -> Twisted {
        let (a, b) = self.psi();
        apply_kron(&a, &b, s)
    }

    /// `D̂ σ` assembled as `D σ ± Ψ σ`.
    pub fn dirac_hat_apply(&self, s: &Twisted, ds: &[Twisted]) -> Twisted {
        let d = self.dirac_apply(s, ds);
        match self.sign {
            PsiSign::Plus => d + self.psi_apply(s),
            PsiSign::Minus => d - self.psi_apply(s),
        }
    }

    /// `Σ γ_a ∇̂_a σ`, the Dirac operator of the modified connection.
    pub fn dirac_of_nabla_hat(&self, s: &Twisted, ds: &[Twisted]) -> Twisted {
        let mut acc = CMat::zeros(self.rep.m, self.rep.m);
        for a in 0..self.rep.n {
            acc += &self.rep.gamma[a] * self.nabla_hat_apply(a, s, ds);
        }
        acc
    }

    /// Dense fiber matrix of `c(e_a) ⊗ 1`.
    pub fn clifford_dense(&self, a: usize) -> CMat {
        kron(&self.rep.gamma[a], &identity(self.rep.m))
    }

    /// Dense fiber matrix of `1 ⊗ c̄(E_i)`.
    pub fn flat_clifford_dense(&self, i: usize) -> CMat {
        kron(&identity(self.rep.m), &self.rep.gamma_bar[i])
    }

    pub fn grading_dense(&self) -> CMat {
        kron(&self.rep.epsilon, &self.rep.epsilon_bar)
    }

    pub fn psi_dense(&self) -> CMat {
        let (a, b) = self.psi();
        kron(&a, &b)
    }

    /// Dense connection coefficient of `∇` along `e_a`.
    pub fn connection_dense(&self, a: usize) -> CMat {
        kron(&self.spin[a], &identity(self.rep.m))
    }

    /// Dense connection coefficient of `∇̂` along `e_a`.
    pub fn connection_hat_dense(&self, a: usize) -> CMat {
        self.connection_dense(a) + kron(&self.hq[a], &self.flat_n0) * c(0.5)
    }
}

/// Boundary data at a face point, all vectors in frame components.
#[derive(Debug, Clone)]
pub struct BoundaryPoint {
    /// `g`-unit outward normal.
    pub nu: Vec<f64>,
    /// Orthonormal tangent frame.
    pub tangents: Vec<Vec<f64>>,
    /// Connection matrices `ω(t_j)`.
    pub omega_t: Vec<RMat>,
    /// `t_j` applied to the frame components of `ν`.
    pub nu_deriv: Vec<Vec<f64>>,
    /// Euclidean unit map `N` and its derivatives `t_j(N)`.
    pub normal: Vec<f64>,
    pub normal_deriv: Vec<Vec<f64>>,
}

impl BoundaryPoint {
    /// Assemble from the metric geometry of a face and the prescribed map `N`.
    pub fn from_face(fp: &FramePoint, fg: &FaceGeometry, normal: &[f64], d_normal: &[Vec<f64>]) -> Result<Self> {
        let n = fp.n;
        check_len(n, normal.len())?;
        check_len(n, d_normal.len())?;
        let omega_t = fg.tangents.iter().map(|t| fp.omega_along(t)).collect();
        let along = |t: &[f64], d: &[Vec<f64>]| -> Vec<f64> {
            (0..n).map(|i| (0..n).map(|cc| t[cc] * d[cc][i]).sum()).collect()
        };
        let nu_deriv = fg.tangents.iter().map(|t| along(t, &fg.d_nu_frame_components)).collect();
        let normal_deriv = fg.tangents.iter().map(|t| along(t, d_normal)).collect();
        Ok(Self {
            nu: fg.nu_frame.clone(),
            tangents: fg.tangents_frame.clone(),
            omega_t,
            nu_deriv,
            normal: normal.to_vec(),
            normal_deriv,
        })
    }

    /// Random admissible data in flat frame coordinates: unit `ν`, `N`, arbitrary
    /// `ω(t_j)`, derivatives of `ν` and `N` orthogonal to them.
    pub fn random(rng: &mut impl rand::Rng, n: usize) -> Self {
        use crate::linalg::{random_orthogonal, random_unit};
        let nu = random_unit(rng, n);
        let tangents = crate::linalg::orthogonal_complement(&nu);
        let k = tangents.len();
        let omega_t = (0..k)
            .map(|_| {
                let a = RMat::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
                (&a - a.transpose()) * 0.5
            })
            .collect();
        let nu_deriv = (0..k).map(|_| random_orthogonal(rng, &nu, 1.0)).collect();
        let normal = random_unit(rng, n);
        let normal_deriv = (0..k).map(|_| random_orthogonal(rng, &normal, 1.0)).collect();
        Self { nu, tangents, omega_t, nu_deriv, normal, normal_deriv }
    }

    pub fn nabla_nu(&self, j: usize) -> Vec<f64> {
        let n = self.nu.len();
        (0..n)
            .map(|b| self.nu_deriv[j][b] + (0..n).map(|a| self.nu[a] * self.omega_t[j][(a, b)]).sum::<f64>())
            .collect()
    }

    /// `H = Σ_j <∇_{t_j} ν, t_j>`.
    pub fn mean_curvature(&self) -> f64 {
        (0..self.tangents.len()).map(|j| crate::linalg::dot(&self.nabla_nu(j), &self.tangents[j])).sum()
    }

    /// Trace norm of `t_j ↦ t_j(N)`.
    pub fn dn_trace_norm(&self) -> f64 {
        let k = self.tangents.len();
        let n = self.normal.len();
        trace_norm(&RMat::from_fn(k, n, |j, i| self.normal_deriv[j][i]))
    }
}

/// Boundary operators built from a representation and a boundary point.
pub struct BoundaryOperators<'a> {
    pub rep: &'a CliffordRep,
    pub bp: &'a BoundaryPoint,
    c_nu: CMat,
    c_t: Vec<CMat>,
    spin_t: Vec<CMat>,
    flat_corr: Vec<CMat>,
    h_nu: CMat,
    f_n: CMat,
}

impl<'a> BoundaryOperators<'a> {
    pub fn new(rep: &'a CliffordRep, bp: &'a BoundaryPoint) -> Result<Self> {
        let nn = norm(&bp.normal);
        if (nn - 1.0).abs() > tolerances::UNIT {
            return Err(Error::NonUnit { norm: nn });
        }
        let c_nu = rep.clifford_mul(&bp.nu)?;
        let c_t = bp.tangents.iter().map(|t| rep.clifford_mul(t)).collect::<Result<Vec<_>>>()?;
        let cb_n = rep.clifford_mul_bar(&bp.normal)?;
        let mut spin_t = Vec::with_capacity(c_t.len());
        let mut flat_corr = Vec::with_capacity(c_t.len());
        for j in 0..c_t.len() {
            let corr = rep.clifford_mul(&bp.nabla_nu(j))? * &c_nu * c(0.5);
            spin_t.push(spin_matrix(rep, &bp.omega_t[j]) + corr);
            flat_corr.push(rep.clifford_mul_bar(&bp.normal_deriv[j])? * &cb_n * c(0.5));
        }
        Ok(Self { rep, bp, h_nu: rep.hermitian(&bp.nu)?, f_n: rep.flat_action(&bp.normal)?, c_nu, c_t, spin_t, flat_corr })
    }

    /// `χ σ`.
    pub fn chi_apply(&self, s: &Twisted) -> Twisted {
        apply_kron(&self.h_nu, &self.f_n, s)
    }

    /// `t_j(χ) σ`.
    pub fn chi_derivative_apply(&self, j: usize, s: &Twisted) -> Result<Twisted> {
        let a = self.rep.hermitian(&self.bp.nu_deriv[j])?;
        let b = self.rep.flat_action(&self.bp.normal_deriv[j])?;
        Ok(apply_kron(&a, &self.f_n, s) + apply_kron(&self.h_nu, &b, s))
    }

    /// `D^∂ φ` from `φ` and its tangential derivatives `t_j(φ)`.
    pub fn boundary_dirac_apply(&self, s: &Twisted, dt: &[Twisted]) -> Twisted {
        let mut acc = CMat::zeros(self.rep.m, self.rep.m);
        for j in 0..self.c_t.len() {
            let conn = &dt[j] + &self.spin_t[j] * s + s * self.flat_corr[j].transpose();
            acc += &self.c_t[j] * (&self.c_nu * conn);
        }
        acc
    }

    /// `𝒜 σ = ½ H σ + ½ Σ_j c(ν) c(t_j) ⊗ c̄(t_j N) c̄(N) σ`.
    pub fn a_apply(&self, s: &Twisted) -> Twisted {
        let mut acc = s * c(0.5 * self.bp.mean_curvature());
        for j in 0..self.c_t.len() {
            let left = &self.c_nu * &self.c_t[j];
            acc += apply_kron(&left, &self.flat_corr[j], s);
        }
        acc
    }

    /// `(D^∂ χ + χ D^∂)` applied to the section with value `s` and tangential derivatives `dt`.
    pub fn anticommutator_apply(&self, s: &Twisted, dt: &[Twisted]) -> Result<Twisted> {
        let chi_s = self.chi_apply(s);
        let d_chi_s = (0..dt.len())
            .map(|j| Ok(self.chi_derivative_apply(j, s)? + self.chi_apply(&dt[j])))
            .collect::<Result<Vec<_>>>()?;
        Ok(self.boundary_dirac_apply(&chi_s, &d_chi_s) + self.chi_apply(&self.boundary_dirac_apply(s, dt)))
    }
}

/// Largest `|(D^∂ χ + χ D^∂) σ|` over fiber basis sections and linear sections.
pub fn anticommutator_residual(rep: &CliffordRep, bp: &BoundaryPoint) -> Result<f64> {
    let ops = BoundaryOperators::new(rep, bp)?;
    let m = rep.m;
    let k = bp.tangents.len();
    let zero = CMat::zeros(m, m);
    let mut worst = 0.0f64;
    for e in 0..m * m {
        let mut basis = zero.clone();
        basis[(e / m, e % m)] = c(1.0);
        let r = ops.anticommutator_apply(&basis, &vec![zero.clone(); k])?;
        worst = worst.max(norm_sq(&r).sqrt());
        for j in 0..k {
            let mut dt = vec![zero.clone(); k];
            dt[j] = basis.clone();
            let r = ops.anticommutator_apply(&zero, &dt)?;
            worst = worst.max(norm_sq(&r).sqrt());
        }
    }
    Ok(worst)
}

/// Pairings that vanish on `±1` eigenvectors of `χ(ν, N)`:
/// `<h(ν) ⊗ F(Y) σ, σ>` with `Y ⟂ N` and `<h(v) ⊗ F(N) σ, σ>` with `v ⟂ ν`.
pub fn chi_eigenspace_vanishing(
    rep: &CliffordRep,
    s: &Twisted,
    nu: &[f64],
    normal: &[f64],
    y: &[f64],
    v: &[f64],
) -> Result<(f64, f64)> {
    let a = apply_kron(&rep.hermitian(nu)?, &rep.flat_action(y)?, s);
    let b = apply_kron(&rep.hermitian(v)?, &rep.flat_action(normal)?, s);
    Ok((inner(&a, s).norm(), inner(&b, s).norm()))
}

/// `(<𝒜 σ, σ>, ½ (H - ‖dN‖_tr) |σ|²)`.
pub fn a_operator_bound(rep: &CliffordRep, bp: &BoundaryPoint, s: &Twisted) -> Result<(f64, f64)> {
    let ops = BoundaryOperators::new(rep, bp)?;
    let lhs = re_inner(&ops.a_apply(s), s);
    let rhs = 0.5 * (bp.mean_curvature() - bp.dn_trace_norm()) * norm_sq(s);
    Ok((lhs, rhs))
}

/// Projector `(1 + A) / 2` applied to `s`, for an involution `A = a ⊗ b`.
pub fn project_plus(a: &CMat, b: &CMat, s: &Twisted) -> Twisted {
    (s + apply_kron(a, b, s)) * c(0.5)
}

