//! Hypersurface geometry of planar faces in the metric `g`.

use super::{FieldSet, FramePoint, Level};
use crate::error::{check_len, Error, Result};
use crate::linalg::{dot, norm, orthogonal_complement, RMat, RVec};
use crate::polyhedron::{Membership, Polyhedron};
use crate::tolerances;
use serde::Serialize;

/// A point on a coordinate hyperplane with Euclidean unit conormal `normal`.
#[derive(Debug, Clone)]
pub struct HyperplaneFrame {
    pub point: Vec<f64>,
    pub normal: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct FaceGeometry {
    pub face: Option<usize>,
    pub point: Vec<f64>,
    /// Euclidean unit normal `N`.
    pub normal: Vec<f64>,
    /// `g`-unit normal in coordinates and in frame components.
    pub nu: Vec<f64>,
    pub nu_frame: Vec<f64>,
    /// `g`-orthonormal tangent vectors in coordinates, one per row.
    pub tangents: Vec<Vec<f64>>,
    /// Their frame components.
    pub tangents_frame: Vec<Vec<f64>>,
    /// `h(t_i, t_j) = g(∇_{t_i} ν, t_j)`.
    #[serde(skip)]
    pub h: RMat,
    pub mean_curvature: f64,
    pub trace_q: f64,
    /// `q(ν, t_i)`.
    pub q_nu_tangential: Vec<f64>,
    /// `∇_X ν` in frame components, for each coordinate axis `X = ∂_c`.
    #[serde(skip)]
    pub dnu_frame: Vec<Vec<f64>>,
    /// Coordinate partials of the frame components of `ν`.
    #[serde(skip)]
    pub d_nu_frame_components: Vec<Vec<f64>>,
    /// `cos θ`, `sin θ` against the reference direction, when given.
    pub cos_theta: Option<f64>,
    pub tilted_margin: Option<f64>,
}

impl FaceGeometry {
    /// Geometry of the hyperplane with conormal `normal` through `fp.x`.
    pub fn at(fp: &FramePoint, normal: &[f64], n0: Option<&[f64]>) -> Result<Self> {
        let n = fp.n;
        check_len(n, normal.len())?;
        let nn = norm(normal);
        if (nn - 1.0).abs() > tolerances::UNIT {
            return Err(Error::NonUnit { norm: nn });
        }
        let nvec = RVec::from_column_slice(normal);
        let raised = &fp.ginv * &nvec;
        let s = nvec.dot(&raised).sqrt();
        let nu = raised / s;
        let dnu_coord: Vec<RVec> = (0..n)
            .map(|c| {
                let dg = &fp.dg[c];
                let a = -(&fp.ginv * (dg * &nu));
                let b = &nu * (0.5 * nu.dot(&(dg * &nu)));
                a + b
            })
            .collect();
        let mut cov: Vec<RVec> = Vec::with_capacity(n);
        for c in 0..n {
            let mut v = dnu_coord[c].clone();
            for a in 0..n {
                v[a] += (0..n).map(|b| fp.gamma(a, c, b) * nu[b]).sum::<f64>();
            }
            cov.push(v);
        }
        let mut tangents: Vec<RVec> = Vec::with_capacity(n - 1);
        for t in orthogonal_complement(normal) {
            let mut v = RVec::from_vec(t);
            for u in &tangents {
                let p = v.dot(&(&fp.g * u));
                v -= u * p;
            }
            let l = v.dot(&(&fp.g * &v)).sqrt();
            if l < 1e-12 {
                return Err(Error::Degenerate("tangent frame".into()));
            }
            tangents.push(v / l);
        }
        let nabla = |t: &RVec| -> RVec {
            let mut acc = RVec::zeros(n);
            for c in 0..n {
                acc += &cov[c] * t[c];
            }
            acc
        };
        let k = n - 1;
        let h = RMat::from_fn(k, k, |i, j| nabla(&tangents[i]).dot(&(&fp.g * &tangents[j])));
        let trace_q = (0..k).map(|i| tangents[i].dot(&(&fp.q_coord * &tangents[i]))).sum();
        let q_nu_tangential: Vec<f64> = (0..k).map(|i| nu.dot(&(&fp.q_coord * &tangents[i]))).collect();
        let mean_curvature = h.trace();
        let (cos_theta, tilted_margin) = match n0 {
            Some(v) => {
                check_len(n, v.len())?;
                let ct = dot(v, normal).clamp(-1.0, 1.0);
                let st = (1.0 - ct * ct).max(0.0).sqrt();
                (Some(ct), Some(mean_curvature + ct * trace_q - st * norm(&q_nu_tangential)))
            }
            None => (None, None),
        };
        let nu_v: Vec<f64> = nu.iter().copied().collect();
        let nu_frame = fp.to_frame(&nu_v);
        let lt = fp.l.transpose();
        let dnu_frame: Vec<Vec<f64>> = cov.iter().map(|v| (&lt * v).iter().copied().collect()).collect();
        // ∂_c (L^T ν) = (∂_c L)^T ν + L^T ∂_c ν
        let d_nu_frame_components: Vec<Vec<f64>> = (0..n)
            .map(|c| {
                let dl = -(&fp.l * fp.de[c].transpose() * &fp.l);
                let v = dl.transpose() * &nu + &lt * &dnu_coord[c];
                v.iter().copied().collect()
            })
            .collect();
        let tangents_v: Vec<Vec<f64>> = tangents.iter().map(|t| t.iter().copied().collect()).collect();
        let tangents_frame = tangents_v.iter().map(|t| fp.to_frame(t)).collect();
        Ok(Self {
            face: None,
            point: fp.x.clone(),
            normal: normal.to_vec(),
            nu: nu_v,
            nu_frame,
            tangents: tangents_v,
            tangents_frame,
            h,
            mean_curvature,
            trace_q,
            q_nu_tangential,
            dnu_frame,
            d_nu_frame_components,
            cos_theta,
            tilted_margin,
        })
    }

    pub fn q_nu_tangential_norm(&self) -> f64 {
        norm(&self.q_nu_tangential)
    }

    pub fn h_asymmetry(&self) -> f64 {
        (&self.h - self.h.transpose()).amax()
    }
}

/// Face geometry at points lying in the relative interior of one face.
pub fn face_geometry(
    fields: &FieldSet,
    poly: &Polyhedron,
    face: usize,
    points: &[Vec<f64>],
    n0: Option<&[f64]>,
) -> Result<Vec<FaceGeometry>> {
    points
        .iter()
        .map(|p| {
            match poly.membership(p) {
                Membership::Boundary(act) if act == [face] => {}
                _ => return Err(Error::Degenerate(format!("{p:?} is not interior to face {face}"))),
            }
            let fp = fields.frame_at(p, Level::Connection)?;
            let mut fg = FaceGeometry::at(&fp, &poly.normals[face], n0)?;
            fg.face = Some(face);
            Ok(fg)
        })
        .collect()
}

/// `H + sign tr_Σ q` for the hyperplane through `frame.point`.
pub fn null_expansion(fields: &FieldSet, frame: &HyperplaneFrame, sign: f64) -> Result<f64> {
    let fp = fields.frame_at(&frame.point, Level::Connection)?;
    let fg = FaceGeometry::at(&fp, &frame.normal, None)?;
    Ok(fg.mean_curvature + sign * fg.trace_q)
}

/// `g(ν_1, ν_2) - <N_1, N_2>` at points where exactly `f1` and `f2` are active.
pub fn matching_angle_residual(
    fields: &FieldSet,
    poly: &Polyhedron,
    samples: &[(Vec<f64>, usize, usize)],
) -> Result<Vec<f64>> {
    samples
        .iter()
        .map(|(p, f1, f2)| {
            match poly.membership(p) {
                Membership::Boundary(act) if act.len() == 2 && act.contains(f1) && act.contains(f2) => {}
                _ => return Err(Error::Degenerate(format!("{p:?} is not on the edge {f1}/{f2}"))),
            }
            let jet = fields.jet_at(p, false)?;
            let ginv = jet.g.clone().try_inverse().ok_or_else(|| Error::DegenerateMetric { location: format!("{p:?}") })?;
            let n1 = RVec::from_column_slice(&poly.normals[*f1]);
            let n2 = RVec::from_column_slice(&poly.normals[*f2]);
            let (r1, r2) = (&ginv * &n1, &ginv * &n2);
            let gn = r1.dot(&n2) / (r1.dot(&n1).sqrt() * r2.dot(&n2).sqrt());
            Ok(gn - n1.dot(&n2))
        })
        .collect()
}
