//! Integrated Schrödinger–Lichnerowicz identity and its boundary inequality on boxes.

use crate::clifford::CliffordRep;
use crate::dirac::{apply_kron, norm_sq, re_inner, BoundaryOperators, BoundaryPoint, PsiSign, Twisted, TwistedPointOperators};
use crate::error::{check_len, Error, Result};
use crate::fields::{FaceGeometry, FieldSet, FramePoint, Level};
use crate::linalg::{c, dot, mm, CMat};
use crate::polyhedron::Polyhedron;
use crate::tolerances;
use num_complex::Complex64;
use rand::Rng;
use serde::Serialize;
use std::collections::BTreeMap;

/// Smooth twisted section with exact coordinate partials.
pub trait Section: Sync {
    fn m(&self) -> usize;
    /// Value and `∂_c σ` for each coordinate `c`.
    fn eval(&self, x: &[f64]) -> (Twisted, Vec<Twisted>);
}

/// `Σ_k (x - x_0)^{α_k} C_k` with fiber-valued coefficients.
#[derive(Debug, Clone)]
pub struct PolySection {
    pub m: usize,
    pub center: Vec<f64>,
    pub terms: Vec<(Vec<u32>, Twisted)>,
}

fn monomial(exps: &[u32], y: &[f64]) -> (f64, Vec<f64>) {
    let n = y.len();
    let pw: Vec<f64> = (0..n).map(|i| y[i].powi(exps[i] as i32)).collect();
    let val: f64 = pw.iter().product();
    let grad = (0..n)
        .map(|c| {
            if exps[c] == 0 {
                return 0.0;
            }
            let mut v = exps[c] as f64 * y[c].powi(exps[c] as i32 - 1);
            for i in 0..n {
                if i != c {
                    v *= pw[i];
                }
            }
            v
        })
        .collect();
    (val, grad)
}

/// All exponent vectors of total degree `<= deg`.
pub fn exponents(n: usize, deg: u32) -> Vec<Vec<u32>> {
    let mut out = vec![vec![0u32; n]];
    for _ in 0..deg {
        let mut next = Vec::new();
        for e in &out {
            let start = e.iter().rposition(|&v| v > 0).unwrap_or(0);
            for k in start..n {
                let mut f = e.clone();
                f[k] += 1;
                next.push(f);
            }
        }
        out.extend(next.iter().filter(|f| !out.contains(f)).cloned().collect::<Vec<_>>());
    }
    out.sort_by_key(|e| (e.iter().sum::<u32>(), std::cmp::Reverse(e.clone())));
    out.dedup();
    out
}

pub fn random_twisted(rng: &mut impl Rng, m: usize, scale: f64) -> Twisted {
    CMat::from_fn(m, m, |_, _| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)) * scale)
}

impl PolySection {
    pub fn constant(center: Vec<f64>, value: Twisted) -> Self {
        let n = center.len();
        Self { m: value.nrows(), center, terms: vec![(vec![0; n], value)] }
    }

    /// Random polynomial of degree `<= deg` using `count` distinct monomials
    /// (the constant and linear ones always included), coefficients scaled by
    /// `decay^{degree}`.
    pub fn random(rng: &mut impl Rng, center: Vec<f64>, m: usize, deg: u32, count: usize, decay: f64) -> Self {
        let n = center.len();
        let all = exponents(n, deg);
        let mut chosen: Vec<Vec<u32>> = all.iter().filter(|e| e.iter().sum::<u32>() <= 1).cloned().collect();
        let mut rest: Vec<Vec<u32>> = all.into_iter().filter(|e| e.iter().sum::<u32>() > 1).collect();
        while chosen.len() < count && !rest.is_empty() {
            let k = rng.random_range(0..rest.len());
            chosen.push(rest.swap_remove(k));
        }
        let terms = chosen
            .into_iter()
            .map(|e| {
                let d = e.iter().sum::<u32>() as i32;
                let coeff = random_twisted(rng, m, decay.powi(d));
                (e, coeff)
            })
            .collect();
        Self { m, center, terms }
    }
}

impl Section for PolySection {
    fn m(&self) -> usize {
        self.m
    }

    fn eval(&self, x: &[f64]) -> (Twisted, Vec<Twisted>) {
        let n = x.len();
        let y: Vec<f64> = x.iter().zip(&self.center).map(|(a, b)| a - b).collect();
        let mut s = CMat::zeros(self.m, self.m);
        let mut ds = vec![CMat::zeros(self.m, self.m); n];
        for (e, coeff) in &self.terms {
            let (v, g) = monomial(e, &y);
            if v != 0.0 {
                s += coeff * c(v);
            }
            for cc in 0..n {
                if g[cc] != 0.0 {
                    ds[cc] += coeff * c(g[cc]);
                }
            }
        }
        (s, ds)
    }
}

/// `p(x) σ_0 + b(x) τ(x)` with `b` vanishing on the box boundary.
pub struct BubbleSection {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub sigma0: Twisted,
    /// Scalar profile `p`, stored as a 1×1 polynomial section.
    pub profile: PolySection,
    pub interior: PolySection,
}

impl Section for BubbleSection {
    fn m(&self) -> usize {
        self.sigma0.nrows()
    }

    fn eval(&self, x: &[f64]) -> (Twisted, Vec<Twisted>) {
        let n = x.len();
        let (p, dp) = self.profile.eval(x);
        let (t, dt) = self.interior.eval(x);
        let f: Vec<f64> = (0..n).map(|a| (x[a] - self.lo[a]) * (self.hi[a] - x[a])).collect();
        let b: f64 = f.iter().product();
        let db: Vec<f64> = (0..n)
            .map(|cc| {
                let dfc = self.hi[cc] + self.lo[cc] - 2.0 * x[cc];
                (0..n).map(|a| if a == cc { dfc } else { f[a] }).product()
            })
            .collect();
        let s = &self.sigma0 * p[(0, 0)] + &t * c(b);
        let ds = (0..n).map(|cc| &self.sigma0 * dp[cc][(0, 0)] + &t * c(db[cc]) + &dt[cc] * c(b)).collect();
        (s, ds)
    }
}

/// Prescribed Euclidean unit map `N` on the boundary with its coordinate partials.
pub trait NormalField: Sync {
    fn eval(&self, face: usize, x: &[f64]) -> (Vec<f64>, Vec<Vec<f64>>);
}

/// `N` equal to the outward face normal.
pub struct FaceNormals<'a>(pub &'a Polyhedron);

impl NormalField for FaceNormals<'_> {
    fn eval(&self, face: usize, x: &[f64]) -> (Vec<f64>, Vec<Vec<f64>>) {
        (self.0.normals[face].clone(), vec![vec![0.0; x.len()]; x.len()])
    }
}

/// `N = (N_f + a s v_f) / |·|`, `s = sin(Σ x_i)`, `v_f ⟂ N_f` a fixed unit vector.
pub struct WobbledNormals<'a> {
    pub poly: &'a Polyhedron,
    pub amplitude: f64,
}

impl NormalField for WobbledNormals<'_> {
    fn eval(&self, face: usize, x: &[f64]) -> (Vec<f64>, Vec<Vec<f64>>) {
        let n = x.len();
        let nf = &self.poly.normals[face];
        let v = crate::linalg::orthogonal_complement(nf)[0].clone();
        let sum: f64 = x.iter().sum();
        let (s, co) = (sum.sin(), sum.cos());
        let a = self.amplitude;
        let den = (1.0 + a * a * s * s).sqrt();
        let val: Vec<f64> = (0..n).map(|i| (nf[i] + a * s * v[i]) / den).collect();
        let k = a * co / den.powi(3);
        let d: Vec<f64> = (0..n).map(|i| k * (v[i] - a * s * nf[i])).collect();
        (val, vec![d; n])
    }
}

/// Axis-aligned box split into `cells[k]` cells along axis `k`.
#[derive(Debug, Clone, Serialize)]
pub struct SlDomain {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub cells: Vec<usize>,
}

impl SlDomain {
    pub fn cube(n: usize, res: usize) -> Self {
        Self { lo: vec![0.0; n], hi: vec![1.0; n], cells: vec![res; n] }
    }

    pub fn spacing(&self) -> Vec<f64> {
        (0..self.lo.len()).map(|k| (self.hi[k] - self.lo[k]) / self.cells[k] as f64).collect()
    }

    pub fn polyhedron(&self) -> Result<Polyhedron> {
        Polyhedron::boxed(&self.lo, &self.hi)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SlReport {
    pub lhs: f64,
    /// `grad`, `bulk_energy` (with its factor ½), `bdry_mixed`, `bdry_A`, `bdry_q`.
    pub rhs_terms: BTreeMap<String, f64>,
    pub residual: f64,
    pub relative_residual: f64,
    pub h: f64,
    /// Largest `|χσ - σ|` over boundary quadrature points.
    pub chi_defect: f64,
}

impl SlReport {
    fn finish(lhs: f64, terms: BTreeMap<String, f64>, h: f64, chi_defect: f64) -> Self {
        let sum: f64 = terms.values().sum();
        let scale: f64 = lhs.abs() + terms.values().map(|v| v.abs()).sum::<f64>() + 1e-30;
        let residual = lhs - sum;
        Self { lhs, rhs_terms: terms, residual, relative_residual: residual.abs() / scale, h, chi_defect }
    }

    pub fn term(&self, k: &str) -> f64 {
        self.rhs_terms.get(k).copied().unwrap_or(0.0)
    }
}

/// Pointwise boundary contributions at one quadrature point.
#[derive(Debug, Clone, Copy, Default)]
struct BoundarySample {
    mixed: f64,
    a: f64,
    q: f64,
    /// `½ (H + cos θ tr q - sin θ |q(ν)^⊤| - ‖dN‖_tr) |σ|²`.
    bound: f64,
    chi_defect: f64,
}

#[derive(Debug, Clone, Copy, Default)]
struct VolumeSums {
    lhs: f64,
    grad: f64,
    bulk: f64,
}

/// Everything the verifier needs besides the domain.
pub struct SlProblem<'a> {
    pub fields: &'a FieldSet,
    pub rep: &'a CliffordRep,
    pub section: &'a dyn Section,
    pub normals: &'a dyn NormalField,
    pub n0: Vec<f64>,
    pub sign: PsiSign,
}

impl SlProblem<'_> {
    fn check(&self, dom: &SlDomain) -> Result<()> {
        let n = self.rep.n;
        check_len(n, self.fields.n())?;
        check_len(n, dom.lo.len())?;
        check_len(self.rep.m, self.section.m())?;
        for k in 0..n {
            if !(self.fields.grid.contains(&dom.lo) && self.fields.grid.contains(&dom.hi)) {
                return Err(Error::OutsideGrid { point: dom.hi.clone() });
            }
            if dom.cells[k] == 0 {
                return Err(Error::Config("box needs at least one cell per axis".into()));
            }
        }
        Ok(())
    }

    fn cell_center(dom: &SlDomain, h: &[f64], flat: usize) -> Vec<f64> {
        let n = dom.lo.len();
        let mut r = flat;
        let mut x = vec![0.0; n];
        for k in (0..n).rev() {
            let i = r % dom.cells[k];
            r /= dom.cells[k];
            x[k] = dom.lo[k] + (i as f64 + 0.5) * h[k];
        }
        x
    }

    fn volume(&self, dom: &SlDomain) -> Result<VolumeSums> {
        let n = self.rep.n;
        let h = dom.spacing();
        let cell_vol: f64 = h.iter().product();
        let total: usize = dom.cells.iter().product();
        let mut sums = VolumeSums::default();
        let uniform = self.fields.uniform_frame(Level::Scalar)?;
        for flat in 0..total {
            let x = Self::cell_center(dom, &h, flat);
            let local;
            let fp = match &uniform {
                Some(f) => f,
                None => {
                    local = self.fields.frame_at(&x, Level::Scalar)?;
                    &local
                }
            };
            let ops = TwistedPointOperators::new(self.rep, fp, &self.n0, self.sign)?;
            let (s, ds) = self.section.eval(&x);
            let w = fp.l.diagonal().product() * cell_vol;
            let mut d = CMat::zeros(self.rep.m, self.rep.m);
            let mut grad = 0.0;
            for a in 0..n {
                let nab = ops.nabla_apply(a, &s, &ds);
                d += mm(&self.rep.gamma[a], &nab);
                grad += norm_sq(&(nab + ops.q_term(a, &s)));
            }
            let dhat = match self.sign {
                PsiSign::Plus => d + ops.psi_apply(&s),
                PsiSign::Minus => d - ops.psi_apply(&s),
            };
            let j = fp.current();
            let gj = apply_kron(&self.rep.hermitian(&j)?, &ops.flat_n0, &s);
            let bulk = 0.5 * (fp.mu() * norm_sq(&s) + re_inner(&s, &gj));
            sums.lhs += w * norm_sq(&dhat);
            sums.grad += w * grad;
            sums.bulk += w * bulk;
        }
        Ok(sums)
    }

    fn boundary_sample(
        &self,
        face: usize,
        x: &[f64],
        face_normal: &[f64],
        uniform: Option<&FramePoint>,
    ) -> Result<(BoundarySample, f64)> {
        let n = self.rep.n;
        let local;
        let fp = match uniform {
            Some(f) => f,
            None => {
                local = self.fields.frame_at(x, Level::Connection)?;
                &local
            }
        };
        let fg = FaceGeometry::at(fp, face_normal, None)?;
        let (nmap, dn) = self.normals.eval(face, x);
        let bp = BoundaryPoint::from_face(fp, &fg, &nmap, &dn)?;
        let bops = BoundaryOperators::new(self.rep, &bp)?;
        let (s, ds) = self.section.eval(x);
        let along = |t: &[f64]| -> Twisted {
            let mut acc = CMat::zeros(self.rep.m, self.rep.m);
            for cc in 0..n {
                if t[cc] != 0.0 {
                    acc += &ds[cc] * c(t[cc]);
                }
            }
            acc
        };
        let dts: Vec<Twisted> = fg.tangents.iter().map(|t| along(t)).collect();
        let chi_s = bops.chi_apply(&s);
        let mut d_chi = Vec::with_capacity(dts.len());
        for (j, dt) in dts.iter().enumerate() {
            d_chi.push(bops.chi_derivative_apply(j, &s)? + bops.chi_apply(dt));
        }
        let plus = &s + &chi_s;
        let minus = &s - &chi_s;
        let dplus: Vec<Twisted> = dts.iter().zip(&d_chi).map(|(a, b)| a + b).collect();
        let dminus: Vec<Twisted> = dts.iter().zip(&d_chi).map(|(a, b)| a - b).collect();
        let mixed = 0.25 * re_inner(&bops.boundary_dirac_apply(&plus, &dplus), &minus)
            + 0.25 * re_inner(&bops.boundary_dirac_apply(&minus, &dminus), &plus);
        let a = re_inner(&bops.a_apply(&s), &s);
        let tq = fp.trace_q();
        let qnu: Vec<f64> = (0..n).map(|b| (0..n).map(|a| fp.q[(b, a)] * bp.nu[a]).sum()).collect();
        let v: Vec<f64> = (0..n).map(|b| tq * bp.nu[b] - qnu[b]).collect();
        let flat_n0 = self.rep.flat_action(&self.n0)?;
        let gq = apply_kron(&self.rep.hermitian(&v)?, &flat_n0, &s);
        let q = 0.5 * re_inner(&gq, &s);
        let ct = dot(&self.n0, &nmap).clamp(-1.0, 1.0);
        let st = (1.0 - ct * ct).max(0.0).sqrt();
        let bound = 0.5
            * (fg.mean_curvature + ct * fg.trace_q - st * fg.q_nu_tangential_norm() - bp.dn_trace_norm())
            * norm_sq(&s);
        let chi_defect = norm_sq(&(chi_s - &s)).sqrt();
        let nvec = nalgebra::DVector::from_column_slice(face_normal);
        let area = fp.l.diagonal().product() * nvec.dot(&(&fp.ginv * &nvec)).sqrt();
        Ok((BoundarySample { mixed, a, q, bound, chi_defect }, area))
    }

    fn boundary(&self, dom: &SlDomain) -> Result<(f64, f64, f64, f64, f64, f64)> {
        let poly = dom.polyhedron()?;
        let n = self.rep.n;
        let (mut mixed, mut a, mut q, mut bound, mut chi, mut min_gap) = (0.0, 0.0, 0.0, 0.0, 0.0f64, f64::INFINITY);
        let uniform = self.fields.uniform_frame(Level::Connection)?;
        for face in 0..poly.len() {
            let axis = (0..n).find(|&k| poly.normals[face][k] != 0.0).unwrap();
            let res: Vec<usize> = (0..n).filter(|&k| k != axis).map(|k| dom.cells[k]).collect();
            for (x, w) in box_face_points(&dom.lo, &dom.hi, &poly.normals[face], axis, &res) {
                let (bs, area) = self.boundary_sample(face, &x, &poly.normals[face], uniform.as_ref())?;
                let wa = w * area;
                mixed += wa * bs.mixed;
                a += wa * bs.a;
                q += wa * bs.q;
                bound += wa * bs.bound;
                chi = chi.max(bs.chi_defect);
                min_gap = min_gap.min(bs.mixed + bs.a + bs.q - bs.bound);
            }
        }
        Ok((mixed, a, q, bound, chi, min_gap))
    }

    /// Both sides of the integrated identity by the midpoint rule.
    pub fn verify(&self, dom: &SlDomain) -> Result<SlReport> {
        Ok(self.verify_with_boundary(dom)?.0)
    }

    fn verify_with_boundary(&self, dom: &SlDomain) -> Result<(SlReport, (f64, f64, f64, f64, f64, f64))> {
        self.check(dom)?;
        let vol = self.volume(dom)?;
        let bsums = self.boundary(dom)?;
        let (mixed, a, q, _, chi, _) = bsums;
        let mut terms = BTreeMap::new();
        terms.insert("grad".to_string(), vol.grad);
        terms.insert("bulk_energy".to_string(), vol.bulk);
        terms.insert("bdry_mixed".to_string(), mixed);
        terms.insert("bdry_A".to_string(), a);
        terms.insert("bdry_q".to_string(), q);
        let h = dom.spacing().into_iter().fold(0.0, f64::max);
        Ok((SlReport::finish(vol.lhs, terms, h, chi), bsums))
    }

    /// Volume terms only: `(lhs, grad, bulk_energy)`.
    pub fn volume_terms(&self, dom: &SlDomain) -> Result<(f64, f64, f64)> {
        self.check(dom)?;
        let v = self.volume(dom)?;
        Ok((v.lhs, v.grad, v.bulk))
    }

    /// Inequality with the boundary condition imposed through the section.
    pub fn verify_inequality(&self, dom: &SlDomain) -> Result<SlInequalityReport> {
        let (identity, (_, _, _, bound, chi, min_gap)) = self.verify_with_boundary(dom)?;
        let lhs = identity.lhs;
        let rhs = identity.term("grad") + identity.term("bulk_energy") + bound;
        let margin = lhs - rhs;
        // Measured quadrature defect plus summation roundoff.
        let tol_quad = identity.residual.abs() + tolerances::EXACT_ZERO * (1.0 + lhs.abs() + rhs.abs());
        Ok(SlInequalityReport {
            lhs,
            rhs,
            margin,
            tol_quad,
            pointwise_boundary_gap: min_gap,
            chi_defect: chi,
            holds: margin >= -tol_quad,
            identity,
        })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SlInequalityReport {
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
    pub tol_quad: f64,
    /// Smallest pointwise gap between the boundary integrand and its lower bound.
    pub pointwise_boundary_gap: f64,
    pub chi_defect: f64,
    pub holds: bool,
    pub identity: SlReport,
}

fn box_face_points(lo: &[f64], hi: &[f64], normal: &[f64], axis: usize, res: &[usize]) -> Vec<(Vec<f64>, f64)> {
    let n = lo.len();
    let axes: Vec<usize> = (0..n).filter(|&k| k != axis).collect();
    let h: Vec<f64> = axes.iter().zip(res).map(|(&a, &r)| (hi[a] - lo[a]) / r as f64).collect();
    let w: f64 = h.iter().product();
    let count: usize = res.iter().product();
    (0..count)
        .map(|flat| {
            let mut p = vec![0.0; n];
            p[axis] = if normal[axis] > 0.0 { hi[axis] } else { lo[axis] };
            let mut r = flat;
            for j in (0..axes.len()).rev() {
                let i = r % res[j];
                r /= res[j];
                p[axes[j]] = lo[axes[j]] + (i as f64 + 0.5) * h[j];
            }
            (p, w)
        })
        .collect()
}

/// Simultaneous `+1` eigenvector of `h(e_a) ⊗ F(E_a)` for every axis, normalised.
pub fn box_boundary_spinor(rep: &CliffordRep, rng: &mut impl Rng) -> Result<Twisted> {
    let n = rep.n;
    for _ in 0..16 {
        let mut s = random_twisted(rng, rep.m, 1.0);
        for a in 0..n {
            let mut e = vec![0.0; n];
            e[a] = 1.0;
            s = crate::dirac::project_plus(&rep.hermitian(&e)?, &rep.flat_action(&e)?, &s);
        }
        let l = norm_sq(&s).sqrt();
        if l > 1e-6 {
            return Ok(s * c(1.0 / l));
        }
    }
    Err(Error::ZeroSection)
}

