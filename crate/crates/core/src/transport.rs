//! Killing-equation transport along segments and the pointwise rigidity identities.
//!
//! The killing equation `∇_X σ = -Ω(X) σ - ½ Γ_{q(X)} σ` is integrated with the
//! classical four-stage scheme. Field values come from multilinear interpolation
//! of node jets, so segments should run along grid lines with an integer number
//! of steps per cell to keep every step inside one smooth piece.

use crate::clifford::CliffordRep;
use crate::dirac::{apply_kron, norm_sq, project_plus, spin_matrix, Twisted};
use crate::error::{check_len, Error, Result};
use crate::fields::{FaceGeometry, FieldSet, FramePoint, GridSpec, Jet, Level};
use crate::linalg::{c, dot, inner_vec, mm, norm, orthogonal_complement, CMat, CVec, RMat};
use crate::sl::Section;
use crate::tolerances;
use num_complex::Complex64;
use serde::Serialize;
use std::cell::RefCell;
use std::collections::HashMap;

/// Straight coordinate segment `x(t) = start + t (end - start)`, `t ∈ [0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Segment {
    pub start: Vec<f64>,
    pub end: Vec<f64>,
}

impl Segment {
    pub fn new(start: Vec<f64>, end: Vec<f64>) -> Result<Self> {
        check_len(start.len(), end.len())?;
        Ok(Self { start, end })
    }

    /// Segment from node `idx` along `axis` spanning `cells` grid cells (negative runs backwards).
    pub fn along_grid(grid: &GridSpec, idx: &[usize], axis: usize, cells: i64) -> Result<Self> {
        check_len(grid.n(), idx.len())?;
        let start = grid.coord(idx);
        let mut end = start.clone();
        end[axis] += cells as f64 * grid.spacing[axis];
        if !grid.contains(&end) {
            return Err(Error::OutsideGrid { point: end });
        }
        Ok(Self { start, end })
    }

    pub fn point(&self, t: f64) -> Vec<f64> {
        self.start.iter().zip(&self.end).map(|(a, b)| a + t * (b - a)).collect()
    }

    pub fn velocity(&self) -> Vec<f64> {
        self.end.iter().zip(&self.start).map(|(b, a)| b - a).collect()
    }
}

/// One sample of a transported twisted spinor.
#[derive(Debug, Clone)]
pub struct TransportState {
    pub t: f64,
    pub x: Vec<f64>,
    pub s: Twisted,
}

/// Spinor `ψ = ⟨c, s⟩` with `f = |ψ|²` and `W^j = ⟨h(e_j) ψ, ψ⟩`.
#[derive(Debug, Clone)]
pub struct SpinorScalars {
    pub psi: CVec,
    pub f: f64,
    pub w: Vec<f64>,
}

/// `ψ_a = Σ_α conj(c_α) S_{aα}`.
pub fn pair_with(c_vec: &CVec, s: &Twisted) -> CVec {
    s * c_vec.map(|z| z.conj())
}

pub fn spinor_scalars(rep: &CliffordRep, s: &Twisted, c_vec: &CVec) -> SpinorScalars {
    let psi = pair_with(c_vec, s);
    let f = psi.norm_squared();
    let w = (0..rep.n).map(|j| h_expect(rep, j, &psi, &psi).re).collect();
    SpinorScalars { psi, f, w }
}

fn h_basis(rep: &CliffordRep, j: usize) -> CMat {
    let mut e = vec![0.0; rep.n];
    e[j] = 1.0;
    rep.hermitian(&e).expect("basis vector is unit")
}

fn h_expect(rep: &CliffordRep, j: usize, u: &CVec, v: &CVec) -> Complex64 {
    inner_vec(&(h_basis(rep, j) * u), v)
}

/// `|h(W) ψ - f ψ|`, zero in the rigidity regime `f = |W|`.
pub fn rigidity_defect(rep: &CliffordRep, sc: &SpinorScalars) -> Result<f64> {
    let hw = rep.hermitian(&sc.w)?;
    Ok((hw * &sc.psi - &sc.psi * c(sc.f)).norm())
}

/// Normalised projection of `v` onto `Λ_± = {ω_{N_0} c = ±c}`.
pub fn project_lambda(rep: &CliffordRep, n0: &[f64], v: &CVec, sign: f64) -> Result<CVec> {
    let w = rep.flat_action(n0)?;
    let p = (v + &w * v * c(sign)) * c(0.5);
    let l = p.norm();
    if l < 1e-8 * v.norm().max(f64::MIN_POSITIVE) {
        return Err(Error::ZeroSection);
    }
    Ok(p * c(1.0 / l))
}

/// Random unit coefficient vector in `Λ_±`.
pub fn random_lambda(rng: &mut impl rand::Rng, rep: &CliffordRep, n0: &[f64], sign: f64) -> Result<CVec> {
    for _ in 0..16 {
        let v = CVec::from_fn(rep.m, |_, _| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
        match project_lambda(rep, n0, &v, sign) {
            Err(Error::ZeroSection) => continue,
            other => return other,
        }
    }
    Err(Error::ZeroSection)
}

impl ConservedChoices {
    /// Random choices with `X` the normalised part of `N` orthogonal to `N_0`.
    pub fn random(rng: &mut impl rand::Rng, rep: &CliffordRep, n0: &[f64], normal: &[f64]) -> Result<Self> {
        let p = dot(normal, n0);
        let x: Vec<f64> = normal.iter().zip(n0).map(|(a, b)| a - p * b).collect();
        let l = norm(&x);
        if l < 1e-9 {
            return Err(Error::Degenerate("N parallel to N0".into()));
        }
        Ok(Self {
            c: random_lambda(rng, rep, n0, 1.0)?,
            c_plus: random_lambda(rng, rep, n0, 1.0)?,
            c_minus: random_lambda(rng, rep, n0, -1.0)?,
            x: x.iter().map(|a| a / l).collect(),
        })
    }
}

/// Coefficient vectors for the three conserved quantities.
#[derive(Debug, Clone)]
pub struct ConservedChoices {
    /// `c ∈ Λ_+` for `f² - |W|²`.
    pub c: CVec,
    /// `c_+ ∈ Λ_+`, `c_- ∈ Λ_-` for `⟨ψ_+, ψ_-⟩` and the pair `z`, `Z`.
    pub c_plus: CVec,
    pub c_minus: CVec,
    /// Flat unit vector `X`, orthogonal or parallel to `N_0`.
    pub x: Vec<f64>,
}

impl ConservedChoices {
    /// Checks the eigenspace memberships against `ω_{N_0}`.
    pub fn check(&self, rep: &CliffordRep, n0: &[f64]) -> Result<()> {
        let w = rep.flat_action(n0)?;
        let defect = |v: &CVec, sign: f64| (&w * v - v * c(sign)).norm() / v.norm().max(f64::MIN_POSITIVE);
        for d in [defect(&self.c, 1.0), defect(&self.c_plus, 1.0), defect(&self.c_minus, -1.0)] {
            if d > tolerances::EIGENSPACE {
                return Err(Error::NotInEigenspace { defect: d });
            }
        }
        let xn = norm(&self.x);
        if (xn - 1.0).abs() > tolerances::UNIT {
            return Err(Error::NonUnit { norm: xn });
        }
        let along = dot(&self.x, n0).abs();
        if along > tolerances::UNIT && (along - 1.0).abs() > tolerances::UNIT {
            return Err(Error::Config("X must be orthogonal or parallel to N0".into()));
        }
        Ok(())
    }
}

/// Values of `f² - |W|²`, `⟨ψ_+, ψ_-⟩` and `|z|² - |Z|²` at one state.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ConservedSet {
    pub c1: f64,
    pub c2: Complex64,
    pub c3: f64,
}

/// `z` and the complex vector `Z` built from `c_1 ∈ Λ_+`, `c_2 ∈ Λ_-` and `ω_X`.
pub fn pair_scalars(rep: &CliffordRep, s: &Twisted, c1: &CVec, c2: &CVec, x: &[f64]) -> Result<(Complex64, Vec<Complex64>)> {
    let wx = rep.flat_action(x)?;
    let a = pair_with(&(&wx * c1), s);
    let b = pair_with(c2, s);
    let cc = pair_with(c1, s);
    let d = pair_with(&(&wx * c2), s);
    let z = inner_vec(&a, &b) - inner_vec(&cc, &d);
    let big_z = (0..rep.n).map(|j| h_expect(rep, j, &a, &b) + h_expect(rep, j, &cc, &d)).collect();
    Ok((z, big_z))
}

pub fn conserved(rep: &CliffordRep, s: &Twisted, ch: &ConservedChoices) -> Result<ConservedSet> {
    let sc = spinor_scalars(rep, s, &ch.c);
    let c1 = sc.f * sc.f - sc.w.iter().map(|v| v * v).sum::<f64>();
    let c2 = inner_vec(&pair_with(&ch.c_plus, s), &pair_with(&ch.c_minus, s));
    let (z, big_z) = pair_scalars(rep, s, &ch.c_plus, &ch.c_minus, &ch.x)?;
    let c3 = z.norm_sqr() - big_z.iter().map(|v| v.norm_sqr()).sum::<f64>();
    Ok(ConservedSet { c1, c2, c3 })
}

/// Largest departure of each conserved quantity from its initial value.
#[derive(Debug, Clone, Copy, Default, Serialize)]
pub struct DriftReport {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    /// Largest `|W| - f` seen; non-positive by Cauchy–Schwarz.
    pub max_w_excess: f64,
}

impl DriftReport {
    pub fn max(&self) -> f64 {
        self.c1.max(self.c2).max(self.c3)
    }
}

pub fn conserved_drift(rep: &CliffordRep, traj: &[TransportState], n0: &[f64], ch: &ConservedChoices) -> Result<DriftReport> {
    ch.check(rep, n0)?;
    let first = traj.first().ok_or(Error::ZeroSection)?;
    let base = conserved(rep, &first.s, ch)?;
    let mut out = DriftReport { max_w_excess: f64::NEG_INFINITY, ..Default::default() };
    for st in traj {
        let v = conserved(rep, &st.s, ch)?;
        out.c1 = out.c1.max((v.c1 - base.c1).abs());
        out.c2 = out.c2.max((v.c2 - base.c2).norm());
        out.c3 = out.c3.max((v.c3 - base.c3).abs());
        let sc = spinor_scalars(rep, &st.s, &ch.c);
        out.max_w_excess = out.max_w_excess.max(norm(&sc.w) - sc.f);
    }
    Ok(out)
}

/// Integrates the killing equation over one field set, caching node jets.
pub struct Transporter<'a> {
    pub fields: &'a FieldSet,
    pub rep: &'a CliffordRep,
    pub n0: Vec<f64>,
    flat_n0: CMat,
    cache: RefCell<HashMap<Vec<usize>, Jet>>,
}

impl<'a> Transporter<'a> {
    pub fn new(fields: &'a FieldSet, rep: &'a CliffordRep, n0: &[f64]) -> Result<Self> {
        check_len(rep.n, fields.n())?;
        let flat_n0 = rep.flat_action(n0)?;
        Ok(Self { fields, rep, n0: n0.to_vec(), flat_n0, cache: RefCell::new(HashMap::new()) })
    }

    fn frame(&self, x: &[f64]) -> Result<FramePoint> {
        let mut provider = |idx: &[usize]| -> Result<Jet> {
            if let Some(j) = self.cache.borrow().get(idx) {
                return Ok(j.clone());
            }
            let j = self.fields.node_jet(idx, false)?;
            self.cache.borrow_mut().insert(idx.to_vec(), j.clone());
            Ok(j)
        };
        let jet = self.fields.jet_at_with(x, &mut provider)?;
        FramePoint::new(&jet, Level::Connection)
    }

    /// `dσ/dt` for the coordinate velocity `v` at `x`.
    pub fn rhs(&self, x: &[f64], v: &[f64], s: &Twisted) -> Result<Twisted> {
        let fp = self.frame(x)?;
        let spin = spin_matrix(self.rep, &fp.omega_along(v));
        let vf = fp.to_frame(v);
        let qv: Vec<f64> = (0..self.rep.n).map(|a| (0..self.rep.n).map(|b| fp.q[(a, b)] * vf[b]).sum()).collect();
        let hq = self.rep.hermitian(&qv)?;
        Ok(-(mm(&spin, s) + apply_kron(&hq, &self.flat_n0, s) * c(0.5)))
    }

    /// Fixed-step fourth-order integration; returns `steps + 1` states.
    pub fn transport(&self, seg: &Segment, s0: &Twisted, steps: usize) -> Result<Vec<TransportState>> {
        check_len(self.rep.n, seg.start.len())?;
        check_len(self.rep.m, s0.nrows())?;
        if steps == 0 {
            return Err(Error::Config("transport needs at least one step".into()));
        }
        for x in [&seg.start, &seg.end] {
            if !self.fields.grid.contains(x) {
                return Err(Error::OutsideGrid { point: x.clone() });
            }
        }
        let v = seg.velocity();
        let dt = 1.0 / steps as f64;
        let mut s = s0.clone();
        let mut out = Vec::with_capacity(steps + 1);
        out.push(TransportState { t: 0.0, x: seg.start.clone(), s: s.clone() });
        for k in 0..steps {
            let t = k as f64 * dt;
            let k1 = self.rhs(&seg.point(t), &v, &s)?;
            let mid = seg.point(t + 0.5 * dt);
            let k2 = self.rhs(&mid, &v, &(&s + &k1 * c(0.5 * dt)))?;
            let k3 = self.rhs(&mid, &v, &(&s + &k2 * c(0.5 * dt)))?;
            let end = seg.point(t + dt);
            let k4 = self.rhs(&end, &v, &(&s + &k3 * c(dt)))?;
            s += (k1 + (k2 + k3) * c(2.0) + k4) * c(dt / 6.0);
            out.push(TransportState { t: t + dt, x: end, s: s.clone() });
        }
        Ok(out)
    }
}

pub fn transport(
    fields: &FieldSet,
    rep: &CliffordRep,
    n0: &[f64],
    seg: &Segment,
    s0: &Twisted,
    steps: usize,
) -> Result<Vec<TransportState>> {
    Transporter::new(fields, rep, n0)?.transport(seg, s0, steps)
}

/// Independent trajectories on scoped worker threads.
pub fn transport_many(
    fields: &FieldSet,
    rep: &CliffordRep,
    n0: &[f64],
    jobs: &[(Segment, Twisted)],
    steps: usize,
) -> Result<Vec<Result<Vec<TransportState>>>> {
    Transporter::new(fields, rep, n0)?;
    let workers = std::thread::available_parallelism().map_or(1, |v| v.get()).min(jobs.len().max(1));
    let chunk = jobs.len().div_ceil(workers).max(1);
    std::thread::scope(|scope| {
        let handles: Vec<_> = jobs
            .chunks(chunk)
            .map(|part| {
                scope.spawn(move || {
                    let tr = Transporter::new(fields, rep, n0).expect("validated above");
                    part.iter().map(|(seg, s0)| tr.transport(seg, s0, steps)).collect::<Vec<_>>()
                })
            })
            .collect();
        Ok(handles.into_iter().flat_map(|h| h.join().expect("transport worker panicked")).collect())
    })
}

/// `exp(-t/2 Γ_v) σ_0 = cosh(t|v|/2) σ_0 - sinh(t|v|/2) Γ_v σ_0 / |v|` for a frame vector `v`.
pub fn killing_exponential(rep: &CliffordRep, n0: &[f64], v: &[f64], t: f64, s0: &Twisted) -> Result<Twisted> {
    let len = norm(v);
    if len == 0.0 {
        return Ok(s0.clone());
    }
    let unit: Vec<f64> = v.iter().map(|a| a / len).collect();
    let gs = apply_kron(&rep.hermitian(&unit)?, &rep.flat_action(n0)?, s0);
    let a = 0.5 * t * len;
    Ok(s0 * c(a.cosh()) - gs * c(a.sinh()))
}

/// Closed-form killing section for flat `g` and `q = κ u ⊗ u`.
#[derive(Debug, Clone)]
pub struct ExponentialKilling {
    pub u: Vec<f64>,
    pub kappa: f64,
    pub sigma0: Twisted,
    gamma_sigma0: Twisted,
}

impl ExponentialKilling {
    pub fn new(rep: &CliffordRep, n0: &[f64], u: &[f64], kappa: f64, sigma0: Twisted) -> Result<Self> {
        let un = norm(u);
        if (un - 1.0).abs() > tolerances::UNIT {
            return Err(Error::NonUnit { norm: un });
        }
        let gamma_sigma0 = apply_kron(&rep.hermitian(u)?, &rep.flat_action(n0)?, &sigma0);
        Ok(Self { u: u.to_vec(), kappa, sigma0, gamma_sigma0 })
    }
}

impl Section for ExponentialKilling {
    fn m(&self) -> usize {
        self.sigma0.nrows()
    }

    fn eval(&self, x: &[f64]) -> (Twisted, Vec<Twisted>) {
        let a = 0.5 * self.kappa * dot(&self.u, x);
        let (ch, sh) = (a.cosh(), a.sinh());
        let s = &self.sigma0 * c(ch) - &self.gamma_sigma0 * c(sh);
        let tangent = &self.sigma0 * c(sh) - &self.gamma_sigma0 * c(ch);
        let ds = self.u.iter().map(|&ui| &tangent * c(0.5 * self.kappa * ui)).collect();
        (s, ds)
    }
}

/// Residuals of `∇f = -q(W)`, `∇W = -f q` and `dW♭ = 0`.
#[derive(Debug, Clone, Copy, Default, Serialize)]
pub struct WGradientReport {
    /// Using central differences of `f` and `W` with the given step.
    pub f_residual_fd: f64,
    pub w_residual_fd: f64,
    /// Using the section's exact derivatives.
    pub f_residual_exact: f64,
    pub w_residual_exact: f64,
    pub curl: f64,
}

pub fn w_gradient_residual(
    fields: &FieldSet,
    rep: &CliffordRep,
    section: &dyn Section,
    c_vec: &CVec,
    points: &[Vec<f64>],
    h: f64,
) -> Result<WGradientReport> {
    let n = rep.n;
    check_len(rep.m, section.m())?;
    let mut out = WGradientReport::default();
    for x in points {
        check_len(n, x.len())?;
        let fp = fields.frame_at(x, Level::Connection)?;
        let (s, ds) = section.eval(x);
        let sc = spinor_scalars(rep, &s, c_vec);
        // Coordinate partials of f and of the frame components of W.
        let exact: Vec<(f64, Vec<f64>)> = ds
            .iter()
            .map(|d| {
                let dpsi = pair_with(c_vec, d);
                let df = 2.0 * inner_vec(&dpsi, &sc.psi).re;
                let dw = (0..n).map(|j| 2.0 * h_expect(rep, j, &dpsi, &sc.psi).re).collect();
                (df, dw)
            })
            .collect();
        let mut fd = Vec::with_capacity(n);
        for cc in 0..n {
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[cc] += h;
            xm[cc] -= h;
            let sp = spinor_scalars(rep, &section.eval(&xp).0, c_vec);
            let sm = spinor_scalars(rep, &section.eval(&xm).0, c_vec);
            let df = (sp.f - sm.f) / (2.0 * h);
            let dw = (0..n).map(|j| (sp.w[j] - sm.w[j]) / (2.0 * h)).collect();
            fd.push((df, dw));
        }
        let (fe, we, curl) = covariant_residuals(&fp, &sc, &exact);
        let (ff, wf, _) = covariant_residuals(&fp, &sc, &fd);
        out.f_residual_exact = out.f_residual_exact.max(fe);
        out.w_residual_exact = out.w_residual_exact.max(we);
        out.curl = out.curl.max(curl);
        out.f_residual_fd = out.f_residual_fd.max(ff);
        out.w_residual_fd = out.w_residual_fd.max(wf);
    }
    Ok(out)
}

fn covariant_residuals(fp: &FramePoint, sc: &SpinorScalars, partials: &[(f64, Vec<f64>)]) -> (f64, f64, f64) {
    let n = fp.n;
    let mut nabla_w = RMat::zeros(n, n);
    let mut f_res = 0.0f64;
    for a in 0..n {
        let ea: Vec<f64> = fp.e.column(a).iter().copied().collect();
        let df: f64 = (0..n).map(|cc| ea[cc] * partials[cc].0).sum();
        let qw: f64 = (0..n).map(|j| fp.q[(a, j)] * sc.w[j]).sum();
        f_res = f_res.max((df + qw).abs());
        let om = fp.omega_along(&ea);
        for b in 0..n {
            let dw: f64 = (0..n).map(|cc| ea[cc] * partials[cc].1[b]).sum();
            let conn: f64 = (0..n).map(|k| sc.w[k] * om[(k, b)]).sum();
            nabla_w[(a, b)] = dw + conn;
        }
    }
    let w_res = (&nabla_w + &fp.q * sc.f).amax();
    let curl = (&nabla_w - nabla_w.transpose()).amax();
    (f_res, w_res, curl)
}

/// Which eigenspace conditions are imposed before the capillary check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CapillaryProjection {
    /// Boundary condition together with `h(ξ) ⊗ ω_{N_0} s = s`.
    Leaf,
    /// Boundary condition only.
    BoundaryOnly,
}

#[derive(Debug, Clone, Serialize)]
pub struct CapillaryReport {
    pub residual: f64,
    pub w_nu: f64,
    pub f: f64,
    pub cos_theta: f64,
    /// `|h(ν) ⊗ ω_N s - s|` and `|h(ξ) ⊗ ω_{N_0} s - s|` after projection, relative.
    pub boundary_defect: f64,
    pub leaf_defect: f64,
}

/// `|⟨W, ν⟩ - ⟨N, N_0⟩ f|` after projecting `s`.
///
/// `nu`, `xi` are frame components; `normal`, `n0` are flat vectors with
/// `⟨ξ, ν⟩ = ⟨N, N_0⟩`.
pub fn capillary_residual(
    rep: &CliffordRep,
    s: &Twisted,
    nu: &[f64],
    xi: &[f64],
    normal: &[f64],
    n0: &[f64],
    c_vec: &CVec,
    projection: CapillaryProjection,
) -> Result<CapillaryReport> {
    let ct = dot(normal, n0);
    if (dot(nu, xi) - ct).abs() > tolerances::UNIT {
        return Err(Error::Config("⟨ξ, ν⟩ must equal ⟨N, N0⟩".into()));
    }
    let w0 = rep.flat_action(n0)?;
    let dc = (&w0 * c_vec - c_vec).norm() / c_vec.norm().max(f64::MIN_POSITIVE);
    if dc > tolerances::EIGENSPACE {
        return Err(Error::NotInEigenspace { defect: dc });
    }
    let hnu = rep.hermitian(nu)?;
    let wn = rep.flat_action(normal)?;
    let mut p = project_plus(&hnu, &wn, s);
    let st = (1.0 - ct * ct).max(0.0).sqrt();
    if projection == CapillaryProjection::Leaf && st > 1e-9 {
        let tau: Vec<f64> = xi.iter().zip(nu).map(|(a, b)| (a - ct * b) / st).collect();
        let t_flat: Vec<f64> = n0.iter().zip(normal).map(|(a, b)| (a - ct * b) / st).collect();
        p = project_plus(&rep.hermitian(&tau)?, &rep.flat_action(&t_flat)?, &p);
    }
    let len = norm_sq(&p).sqrt();
    if len < 1e-8 * norm_sq(s).sqrt().max(f64::MIN_POSITIVE) {
        return Err(Error::ZeroSection);
    }
    let p = p * c(1.0 / len);
    let boundary_defect = norm_sq(&(apply_kron(&hnu, &wn, &p) - &p)).sqrt();
    let leaf_defect = norm_sq(&(apply_kron(&rep.hermitian(xi)?, &w0, &p) - &p)).sqrt();
    let sc = spinor_scalars(rep, &p, c_vec);
    let w_nu = dot(&sc.w, nu);
    Ok(CapillaryReport { residual: (w_nu - ct * sc.f).abs(), w_nu, f: sc.f, cos_theta: ct, boundary_defect, leaf_defect })
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct Boundary2ffReport {
    /// `max |h_ik + cos θ q_ik - q(e_i, ν) ⟨ξ, e_k⟩|` over face tangents.
    pub identity: f64,
    /// Second fundamental form of the face inside the leaf, when `θ ∉ {0, π}`.
    pub geodesic: Option<f64>,
}

/// Both residuals at one face point; `q` and `xi` in frame components.
pub fn boundary_2ff_residual(fg: &FaceGeometry, q: &RMat, xi: &[f64], theta: f64) -> Result<Boundary2ffReport> {
    let n = fg.nu_frame.len();
    check_len(n, xi.len())?;
    let ct = theta.cos();
    let t = &fg.tangents_frame;
    let qf = |u: &[f64], v: &[f64]| -> f64 { (0..n).map(|a| (0..n).map(|b| u[a] * q[(a, b)] * v[b]).sum::<f64>()).sum() };
    let mut identity = 0.0f64;
    for i in 0..n - 1 {
        for k in 0..n - 1 {
            let r = fg.h[(i, k)] + ct * qf(&t[i], &t[k]) - qf(&t[i], &fg.nu_frame) * dot(xi, &t[k]);
            identity = identity.max(r.abs());
        }
    }
    let geodesic = match leaf_boundary_geodesic_residual(fg, q, xi, theta) {
        Ok(v) => Some(v),
        Err(Error::InvalidAngle(_)) => None,
        Err(e) => return Err(e),
    };
    Ok(Boundary2ffReport { identity, geodesic })
}

/// `max |A(u_i, u_j)|` for the intersection of the face with the leaf normal to `ξ`.
pub fn leaf_boundary_geodesic_residual(fg: &FaceGeometry, q: &RMat, xi: &[f64], theta: f64) -> Result<f64> {
    let n = fg.nu_frame.len();
    if theta.sin().abs() < 1e-9 || !theta.is_finite() {
        return Err(Error::InvalidAngle(theta));
    }
    let ct = dot(xi, &fg.nu_frame);
    let eta: Vec<f64> = fg.nu_frame.iter().zip(xi).map(|(v, x)| v - ct * x).collect();
    let eta_len = norm(&eta);
    if eta_len < 1e-9 {
        return Err(Error::InvalidAngle(theta));
    }
    // Frame directions orthogonal to both ν and ξ.
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for cand in orthogonal_complement(&fg.nu_frame) {
        let mut v = cand;
        let xt: Vec<f64> = xi.iter().zip(&fg.nu_frame).map(|(x, nv)| x - ct * nv).collect();
        let xtl = norm(&xt);
        let p = dot(&v, &xt) / (xtl * xtl);
        for (a, b) in v.iter_mut().zip(&xt) {
            *a -= p * b;
        }
        for u in &basis {
            let p = dot(&v, u);
            for (a, b) in v.iter_mut().zip(u) {
                *a -= p * b;
            }
        }
        let l = norm(&v);
        if l > 1e-8 {
            basis.push(v.iter().map(|a| a / l).collect());
        }
        if basis.len() == n.saturating_sub(2) {
            break;
        }
    }
    let t = &fg.tangents_frame;
    let coeffs: Vec<Vec<f64>> = basis.iter().map(|u| t.iter().map(|tk| dot(u, tk)).collect()).collect();
    let mut worst = 0.0f64;
    for (i, ui) in basis.iter().enumerate() {
        for (j, uj) in basis.iter().enumerate() {
            let mut hij = 0.0;
            for a in 0..n - 1 {
                for b in 0..n - 1 {
                    hij += coeffs[i][a] * fg.h[(a, b)] * coeffs[j][b];
                }
            }
            let qij: f64 = (0..n).map(|a| (0..n).map(|b| ui[a] * q[(a, b)] * uj[b]).sum::<f64>()).sum();
            worst = worst.max(((hij + ct * qij) / eta_len).abs());
        }
    }
    Ok(worst)
}
