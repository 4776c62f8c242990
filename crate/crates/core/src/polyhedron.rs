//! Convex polyhedra in half-space form and their exponential smoothing.

use crate::error::{check_len, Error, Result};
use crate::linalg::{dot, norm, RMat, RVec};
use crate::tolerances;
use serde::Serialize;

/// `u(x) = <a, x> + b`, with the half-space `u <= 0`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HalfSpace {
    pub a: Vec<f64>,
    pub b: f64,
}

impl HalfSpace {
    pub fn new(a: Vec<f64>, b: f64) -> Result<Self> {
        if norm(&a) == 0.0 {
            return Err(Error::Degenerate("half-space with zero normal".into()));
        }
        Ok(Self { a, b })
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        dot(&self.a, x) + self.b
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum Membership {
    Interior,
    Boundary(Vec<usize>),
    Exterior,
}

/// Recognised shape, used to select exact face meshing.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Shape {
    Box { lo: Vec<f64>, hi: Vec<f64> },
    General,
}

/// How compactness and non-empty interior were established.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ValidityCheck {
    VertexEnumeration,
    BoxBounds,
    BoundingBoxHeuristic,
}

#[derive(Debug, Clone, Serialize)]
pub struct Polyhedron {
    pub n: usize,
    pub halfspaces: Vec<HalfSpace>,
    pub normals: Vec<Vec<f64>>,
    pub bbox: (Vec<f64>, Vec<f64>),
    pub vertices: Option<Vec<Vec<f64>>>,
    pub shape: Shape,
    pub validity: ValidityCheck,
}

/// Per-face contact angles against a fixed unit direction.
#[derive(Debug, Clone, Serialize)]
pub struct ThetaProfile {
    pub theta: Vec<f64>,
}

/// Upper limit on `C(|faces|, n)` for exact vertex enumeration.
const ENUMERATION_LIMIT: u128 = 250_000;

fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

fn combinations(n: usize, k: usize, mut f: impl FnMut(&[usize])) {
    if k > n {
        return;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        f(&idx);
        let mut i = k;
        while i > 0 && idx[i - 1] == n - k + i - 1 {
            i -= 1;
        }
        if i == 0 {
            return;
        }
        idx[i - 1] += 1;
        for j in i..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

fn detect_box(n: usize, hs: &[HalfSpace]) -> Option<(Vec<f64>, Vec<f64>)> {
    if hs.len() != 2 * n {
        return None;
    }
    let mut lo = vec![f64::NAN; n];
    let mut hi = vec![f64::NAN; n];
    for h in hs {
        let nz: Vec<usize> = (0..n).filter(|&k| h.a[k] != 0.0).collect();
        if nz.len() != 1 {
            return None;
        }
        let k = nz[0];
        let v = -h.b / h.a[k];
        if h.a[k] > 0.0 {
            if !hi[k].is_nan() {
                return None;
            }
            hi[k] = v;
        } else {
            if !lo[k].is_nan() {
                return None;
            }
            lo[k] = v;
        }
    }
    if (0..n).all(|k| lo[k] < hi[k]) {
        Some((lo, hi))
    } else {
        None
    }
}

impl Polyhedron {
    /// Validate and build from half-spaces.
    pub fn new(halfspaces: Vec<HalfSpace>) -> Result<Self> {
        let n = halfspaces
            .first()
            .map(|h| h.a.len())
            .ok_or_else(|| Error::NotAPolytope("no half-spaces".into()))?;
        if n < 1 {
            return Err(Error::NotAPolytope("zero-dimensional ambient space".into()));
        }
        for h in &halfspaces {
            check_len(n, h.a.len())?;
            if norm(&h.a) == 0.0 {
                return Err(Error::Degenerate("half-space with zero normal".into()));
            }
        }
        let normals: Vec<Vec<f64>> = halfspaces
            .iter()
            .map(|h| {
                let l = norm(&h.a);
                h.a.iter().map(|x| x / l).collect()
            })
            .collect();

        if let Some((lo, hi)) = detect_box(n, &halfspaces) {
            let vertices = if n <= 10 { Some(box_vertices(&lo, &hi)) } else { None };
            return Ok(Self {
                n,
                halfspaces,
                normals,
                bbox: (lo.clone(), hi.clone()),
                vertices,
                shape: Shape::Box { lo, hi },
                validity: ValidityCheck::BoxBounds,
            });
        }

        let mut poly = Self {
            n,
            halfspaces,
            normals,
            bbox: (vec![0.0; n], vec![0.0; n]),
            vertices: None,
            shape: Shape::General,
            validity: ValidityCheck::BoundingBoxHeuristic,
        };
        poly.check_bounded()?;
        if binomial(poly.halfspaces.len(), n) <= ENUMERATION_LIMIT {
            let verts = poly.enumerate_vertices();
            if verts.len() < n + 1 {
                return Err(Error::NotAPolytope("fewer than n+1 vertices".into()));
            }
            let centroid = centroid(&verts);
            if poly.halfspaces.iter().any(|h| h.eval(&centroid) > -tolerances::HALFSPACE) {
                return Err(Error::NotAPolytope("empty interior".into()));
            }
            poly.bbox = bbox_of(&verts);
            poly.vertices = Some(verts);
            poly.validity = ValidityCheck::VertexEnumeration;
        } else {
            return Err(Error::Unsupported(
                "too many faces for vertex enumeration; use a box preset".into(),
            ));
        }
        Ok(poly)
    }

    /// Axis-aligned box `[lo, hi]`.
    pub fn boxed(lo: &[f64], hi: &[f64]) -> Result<Self> {
        check_len(lo.len(), hi.len())?;
        let n = lo.len();
        let mut hs = Vec::with_capacity(2 * n);
        for k in 0..n {
            let mut a = vec![0.0; n];
            a[k] = -1.0;
            hs.push(HalfSpace::new(a.clone(), lo[k])?);
            a[k] = 1.0;
            hs.push(HalfSpace::new(a, -hi[k])?);
        }
        Self::new(hs)
    }

    /// Cube `[0, side]^n`.
    pub fn cube(n: usize, side: f64) -> Result<Self> {
        Self::boxed(&vec![0.0; n], &vec![side; n])
    }

    /// Standard simplex `x_i >= 0, sum x_i <= 1`.
    pub fn simplex(n: usize) -> Result<Self> {
        let mut hs = Vec::with_capacity(n + 1);
        for k in 0..n {
            let mut a = vec![0.0; n];
            a[k] = -1.0;
            hs.push(HalfSpace::new(a, 0.0)?);
        }
        hs.push(HalfSpace::new(vec![1.0; n], -1.0)?);
        Self::new(hs)
    }

    /// Triangular prism: standard triangle times `[0, 1]` in three dimensions.
    pub fn prism() -> Result<Self> {
        Self::new(vec![
            HalfSpace::new(vec![-1.0, 0.0, 0.0], 0.0)?,
            HalfSpace::new(vec![0.0, -1.0, 0.0], 0.0)?,
            HalfSpace::new(vec![1.0, 1.0, 0.0], -1.0)?,
            HalfSpace::new(vec![0.0, 0.0, -1.0], 0.0)?,
            HalfSpace::new(vec![0.0, 0.0, 1.0], -1.0)?,
        ])
    }

    pub fn len(&self) -> usize {
        self.halfspaces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.halfspaces.is_empty()
    }

    pub fn u(&self, face: usize, x: &[f64]) -> f64 {
        self.halfspaces[face].eval(x)
    }

    fn check_bounded(&self) -> Result<()> {
        let n = self.n;
        let rows = self.halfspaces.len();
        let a = RMat::from_fn(rows, n, |i, j| self.normals[i][j]);
        if a.rank(1e-10) < n {
            return Err(Error::NotAPolytope("normals do not span".into()));
        }
        if n == 1 {
            let pos = self.normals.iter().any(|v| v[0] > 0.0);
            let neg = self.normals.iter().any(|v| v[0] < 0.0);
            return if pos && neg { Ok(()) } else { Err(Error::NotAPolytope("unbounded".into())) };
        }
        if binomial(rows, n - 1) > ENUMERATION_LIMIT {
            return Ok(());
        }
        let mut unbounded = false;
        combinations(rows, n - 1, |sub| {
            if unbounded {
                return;
            }
            let s = RMat::from_fn(sub.len(), n, |i, j| self.normals[sub[i]][j]);
            let svd = s.clone().svd(false, true);
            let vt = svd.v_t.unwrap();
            let mut sv: Vec<f64> = svd.singular_values.iter().copied().collect();
            sv.resize(n, 0.0);
            let null: Vec<usize> = (0..vt.nrows()).filter(|&i| sv[i] < 1e-10).collect();
            let d: Vec<f64> = if null.len() == 1 {
                (0..n).map(|j| vt[(null[0], j)]).collect()
            } else if vt.nrows() < n {
                let full = s.transpose() * &s;
                let e = full.symmetric_eigen();
                let k = (0..n)
                    .min_by(|&x, &y| e.eigenvalues[x].partial_cmp(&e.eigenvalues[y]).unwrap())
                    .unwrap();
                (0..n).map(|j| e.eigenvectors[(j, k)]).collect()
            } else {
                return;
            };
            for sign in [1.0, -1.0] {
                if self.normals.iter().all(|v| sign * dot(v, &d) <= 1e-12) {
                    unbounded = true;
                }
            }
        });
        if unbounded {
            Err(Error::NotAPolytope("recession cone is non-trivial".into()))
        } else {
            Ok(())
        }
    }

    fn enumerate_vertices(&self) -> Vec<Vec<f64>> {
        let n = self.n;
        let mut verts: Vec<Vec<f64>> = Vec::new();
        combinations(self.halfspaces.len(), n, |sub| {
            let a = RMat::from_fn(n, n, |i, j| self.halfspaces[sub[i]].a[j]);
            let b = RVec::from_fn(n, |i, _| -self.halfspaces[sub[i]].b);
            let lu = a.lu();
            if lu.determinant().abs() < 1e-12 {
                return;
            }
            if let Some(x) = lu.solve(&b) {
                let x: Vec<f64> = x.iter().copied().collect();
                if self.halfspaces.iter().all(|h| h.eval(&x) <= tolerances::HALFSPACE)
                    && !verts.iter().any(|v| norm(&sub_vec(v, &x)) < 1e-9)
                {
                    verts.push(x);
                }
            }
        });
        verts
    }

    /// Interior, boundary with every active face, or exterior.
    pub fn membership(&self, x: &[f64]) -> Membership {
        let tol = tolerances::HALFSPACE;
        let vals: Vec<f64> = self.halfspaces.iter().map(|h| h.eval(x)).collect();
        if vals.iter().any(|&v| v > tol) {
            return Membership::Exterior;
        }
        let active: Vec<usize> = (0..vals.len()).filter(|&i| vals[i].abs() <= tol).collect();
        if active.is_empty() {
            Membership::Interior
        } else {
            Membership::Boundary(active)
        }
    }

    /// `log F_λ(x)` evaluated in shifted form.
    pub fn log_levelset(&self, lambda: f64, x: &[f64]) -> f64 {
        let e: Vec<f64> = self.halfspaces.iter().map(|h| lambda * h.eval(x)).collect();
        let mx = e.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        mx + e.iter().map(|v| (v - mx).exp()).sum::<f64>().ln()
    }

    /// `F_λ(x) = Σ exp(λ u_ℓ(x))`; `{F_λ <= 1}` is the smoothed body.
    pub fn smoothing_levelset(&self, lambda: f64, x: &[f64]) -> f64 {
        self.log_levelset(lambda, x).exp()
    }

    /// Normalised exponential-weighted average of face normals.
    pub fn smoothed_gauss(&self, lambda: f64, x: &[f64]) -> Result<Vec<f64>> {
        check_len(self.n, x.len())?;
        let e: Vec<f64> = self.halfspaces.iter().map(|h| lambda * h.eval(x)).collect();
        let mx = e.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut v = vec![0.0; self.n];
        let mut total = 0.0;
        for (h, ex) in self.halfspaces.iter().zip(&e) {
            let w = (ex - mx).exp();
            total += w * norm(&h.a);
            for (vi, ai) in v.iter_mut().zip(&h.a) {
                *vi += w * ai;
            }
        }
        let l = norm(&v);
        if l <= 1e-12 * total {
            return Err(Error::Degenerate("smoothed normal cancels".into()));
        }
        Ok(v.iter().map(|x| x / l).collect())
    }

    pub fn theta_profile(&self, n0: &[f64]) -> Result<ThetaProfile> {
        check_len(self.n, n0.len())?;
        let l = norm(n0);
        if (l - 1.0).abs() > tolerances::UNIT {
            return Err(Error::NonUnit { norm: l });
        }
        let theta = self.normals.iter().map(|v| dot(v, n0).clamp(-1.0, 1.0).acos()).collect();
        Ok(ThetaProfile { theta })
    }

    /// Vertices lying on face `face`.
    pub fn face_vertices(&self, face: usize) -> Result<Vec<Vec<f64>>> {
        let verts = self
            .vertices
            .as_ref()
            .ok_or_else(|| Error::Unsupported("vertices unavailable for this polytope".into()))?;
        Ok(verts
            .iter()
            .filter(|v| self.u(face, v).abs() <= 1e-8)
            .cloned()
            .collect())
    }

    /// Barycentre of the vertices of a face.
    pub fn face_center(&self, face: usize) -> Result<Vec<f64>> {
        if let Shape::Box { lo, hi } = &self.shape {
            let (k, upper) = box_face(&self.halfspaces[face]);
            let mut c: Vec<f64> = lo.iter().zip(hi).map(|(a, b)| 0.5 * (a + b)).collect();
            c[k] = if upper { hi[k] } else { lo[k] };
            return Ok(c);
        }
        Ok(centroid(&self.face_vertices(face)?))
    }

    /// Midpoint-rule quadrature on a face; weights sum to its Euclidean area.
    pub fn face_quadrature(&self, face: usize, resolution: usize) -> Result<Vec<(Vec<f64>, f64)>> {
        if face >= self.len() {
            return Err(Error::SizeMismatch { expected: self.len(), found: face });
        }
        let res = resolution.max(1);
        if let Shape::Box { lo, hi } = &self.shape {
            return Ok(box_face_quadrature(lo, hi, box_face(&self.halfspaces[face]), res));
        }
        match self.n {
            2 => {
                let v = self.face_vertices(face)?;
                if v.len() != 2 {
                    return Err(Error::Degenerate("edge without two endpoints".into()));
                }
                let len = norm(&sub_vec(&v[1], &v[0]));
                let w = len / res as f64;
                Ok((0..res)
                    .map(|i| {
                        let t = (i as f64 + 0.5) / res as f64;
                        (lerp(&v[0], &v[1], t), w)
                    })
                    .collect())
            }
            3 => self.polygon_quadrature(face, res),
            _ => Err(Error::Unsupported(
                "face meshing needs a box (any n) or a polytope with n <= 3".into(),
            )),
        }
    }

    fn polygon_quadrature(&self, face: usize, res: usize) -> Result<Vec<(Vec<f64>, f64)>> {
        let verts = self.face_vertices(face)?;
        if verts.len() < 3 {
            return Err(Error::Degenerate("face with fewer than three vertices".into()));
        }
        let c = centroid(&verts);
        let nrm = &self.normals[face];
        let basis = crate::linalg::orthogonal_complement(nrm);
        let mut ordered = verts.clone();
        ordered.sort_by(|p, q| {
            let dp = sub_vec(p, &c);
            let dq = sub_vec(q, &c);
            let ap = dot(&dp, &basis[1]).atan2(dot(&dp, &basis[0]));
            let aq = dot(&dq, &basis[1]).atan2(dot(&dq, &basis[0]));
            ap.partial_cmp(&aq).unwrap()
        });
        let mut out = Vec::new();
        for i in 0..ordered.len() {
            let a = &ordered[i];
            let b = &ordered[(i + 1) % ordered.len()];
            triangle_quadrature(&c, a, b, res, &mut out);
        }
        Ok(out)
    }

    /// Sample points on the codimension-two face shared by `f1` and `f2`.
    pub fn edge_samples(&self, f1: usize, f2: usize) -> Result<Vec<Vec<f64>>> {
        let v1 = self.face_vertices(f1)?;
        let common: Vec<Vec<f64>> = v1.into_iter().filter(|v| self.u(f2, v).abs() <= 1e-8).collect();
        if common.len() < self.n - 1 {
            return Ok(Vec::new());
        }
        let c = centroid(&common);
        let mut pts = vec![c.clone()];
        for v in &common {
            pts.push(lerp(&c, v, 0.5));
        }
        Ok(pts
            .into_iter()
            .filter(|p| match self.membership(p) {
                Membership::Boundary(act) => act.len() == 2,
                _ => false,
            })
            .collect())
    }

    /// All face pairs sharing a codimension-two face.
    pub fn edges(&self) -> Result<Vec<(usize, usize)>> {
        let mut out = Vec::new();
        for i in 0..self.len() {
            for j in i + 1..self.len() {
                if !self.edge_samples(i, j)?.is_empty() {
                    out.push((i, j));
                }
            }
        }
        Ok(out)
    }

    /// Barycentre of the vertex set, an interior point.
    pub fn interior_point(&self) -> Vec<f64> {
        match &self.vertices {
            Some(v) => centroid(v),
            None => self.bbox.0.iter().zip(&self.bbox.1).map(|(a, b)| 0.5 * (a + b)).collect(),
        }
    }

    /// Ray-sampled Hausdorff distance between `{F_λ = 1}` and the boundary.
    pub fn hausdorff_estimate(&self, lambda: f64, directions: &[Vec<f64>]) -> Result<f64> {
        let c = self.interior_point();
        if self.log_levelset(lambda, &c) >= 0.0 {
            return Err(Error::Degenerate(format!("smoothed body empty at lambda = {lambda}")));
        }
        let mut worst = 0.0f64;
        for d in directions {
            let nd = norm(d);
            let d: Vec<f64> = d.iter().map(|x| x / nd).collect();
            let t_exit = self
                .halfspaces
                .iter()
                .filter(|h| dot(&h.a, &d) > 0.0)
                .map(|h| -h.eval(&c) / dot(&h.a, &d))
                .fold(f64::INFINITY, f64::min);
            if !t_exit.is_finite() {
                return Err(Error::NotAPolytope("ray escapes".into()));
            }
            let (mut lo, mut hi) = (0.0, t_exit);
            for _ in 0..80 {
                let mid = 0.5 * (lo + hi);
                let p = axpy(&c, mid, &d);
                if self.log_levelset(lambda, &p) < 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let t = 0.5 * (lo + hi);
            let p = axpy(&c, t, &d);
            let inward = self
                .halfspaces
                .iter()
                .map(|h| -h.eval(&p) / norm(&h.a))
                .fold(f64::INFINITY, f64::min);
            worst = worst.max(inward).max(t_exit - t);
        }
        Ok(worst)
    }

    /// Heuristic smoothing-scale bound `sqrt(n) log|faces| / λ`.
    pub fn hausdorff_bound(&self, lambda: f64) -> f64 {
        (self.n as f64).sqrt() * (self.len() as f64).ln() / lambda
    }
}

fn box_face(h: &HalfSpace) -> (usize, bool) {
    let k = (0..h.a.len()).find(|&k| h.a[k] != 0.0).unwrap_or(0);
    (k, h.a[k] > 0.0)
}

fn box_vertices(lo: &[f64], hi: &[f64]) -> Vec<Vec<f64>> {
    let n = lo.len();
    (0..1usize << n)
        .map(|mask| (0..n).map(|k| if mask >> k & 1 == 1 { hi[k] } else { lo[k] }).collect())
        .collect()
}

fn box_face_quadrature(lo: &[f64], hi: &[f64], (k, upper): (usize, bool), res: usize) -> Vec<(Vec<f64>, f64)> {
    let n = lo.len();
    let axes: Vec<usize> = (0..n).filter(|&a| a != k).collect();
    let h: Vec<f64> = axes.iter().map(|&a| (hi[a] - lo[a]) / res as f64).collect();
    let w: f64 = h.iter().product();
    let count = res.pow(axes.len() as u32);
    let mut out = Vec::with_capacity(count);
    for flat in 0..count {
        let mut p = vec![0.0; n];
        p[k] = if upper { hi[k] } else { lo[k] };
        let mut r = flat;
        for (j, &a) in axes.iter().enumerate().rev() {
            let i = r % res;
            r /= res;
            p[a] = lo[a] + (i as f64 + 0.5) * h[j];
        }
        out.push((p, w));
    }
    out
}

fn triangle_quadrature(a: &[f64], b: &[f64], c: &[f64], res: usize, out: &mut Vec<(Vec<f64>, f64)>) {
    let ab = sub_vec(b, a);
    let ac = sub_vec(c, a);
    let cross = [
        ab[1] * ac[2] - ab[2] * ac[1],
        ab[2] * ac[0] - ab[0] * ac[2],
        ab[0] * ac[1] - ab[1] * ac[0],
    ];
    let area = 0.5 * norm(&cross);
    let w = area / (res * res) as f64;
    let r = res as f64;
    let point = |s: f64, t: f64| -> Vec<f64> { (0..3).map(|i| a[i] + s * ab[i] + t * ac[i]).collect() };
    for i in 0..res {
        for j in 0..res - i {
            let (s, t) = ((i as f64 + 1.0 / 3.0) / r, (j as f64 + 1.0 / 3.0) / r);
            out.push((point(s, t), w));
            if i + j + 1 < res {
                let (s, t) = ((i as f64 + 2.0 / 3.0) / r, (j as f64 + 2.0 / 3.0) / r);
                out.push((point(s, t), w));
            }
        }
    }
}

fn sub_vec(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

fn lerp(a: &[f64], b: &[f64], t: f64) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + t * (y - x)).collect()
}

fn axpy(x: &[f64], t: f64, d: &[f64]) -> Vec<f64> {
    x.iter().zip(d).map(|(a, b)| a + t * b).collect()
}

fn centroid(pts: &[Vec<f64>]) -> Vec<f64> {
    let n = pts[0].len();
    let mut c = vec![0.0; n];
    for p in pts {
        for i in 0..n {
            c[i] += p[i];
        }
    }
    c.iter().map(|x| x / pts.len() as f64).collect()
}

fn bbox_of(pts: &[Vec<f64>]) -> (Vec<f64>, Vec<f64>) {
    let n = pts[0].len();
    let mut lo = vec![f64::INFINITY; n];
    let mut hi = vec![f64::NEG_INFINITY; n];
    for p in pts {
        for i in 0..n {
            lo[i] = lo[i].min(p[i]);
            hi[i] = hi[i].max(p[i]);
        }
    }
    (lo, hi)
}
