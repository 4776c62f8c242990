//! Grid-sampled initial data `(g, q)` and their finite-difference jets.

mod constraints;
mod frame;
mod gridfile;
mod presets;
mod surfaces;

pub use constraints::{
    constraint_densities, dec_report, rhat_tensor, rigidity_residuals, ConstraintDensities, DecReport, NodeDensity,
    RigidityResiduals,
};
pub use frame::{FramePoint, Level};
pub use gridfile::{read_grid_file, write_grid_file};
pub use presets::{ExpressionField, GraphFunction, Param, Params, Preset};
pub use surfaces::{face_geometry, matching_angle_residual, null_expansion, FaceGeometry, HyperplaneFrame};

use crate::error::{check_len, Error, Result};
use crate::linalg::RMat;

/// Uniform node lattice `origin + i * spacing`, `i < dims`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub origin: Vec<f64>,
    pub spacing: Vec<f64>,
    pub dims: Vec<usize>,
}

impl GridSpec {
    pub fn new(origin: Vec<f64>, spacing: Vec<f64>, dims: Vec<usize>) -> Result<Self> {
        check_len(origin.len(), spacing.len())?;
        check_len(origin.len(), dims.len())?;
        if dims.iter().any(|&d| d < 4) || spacing.iter().any(|&h| !(h > 0.0)) {
            return Err(Error::Config("grid needs >= 4 nodes and positive spacing per axis".into()));
        }
        Ok(Self { origin, spacing, dims })
    }

    /// Nodes at `lo + i h`, `h = (hi - lo) / res`, `i = 0..=res`.
    pub fn covering(lo: &[f64], hi: &[f64], res: usize) -> Result<Self> {
        let spacing: Vec<f64> = lo.iter().zip(hi).map(|(a, b)| (b - a) / res as f64).collect();
        Self::new(lo.to_vec(), spacing, vec![res + 1; lo.len()])
    }

    /// Nodes at the cell centres of a `res`-cell subdivision of `[lo, hi]`,
    /// padded by `ghost` extra nodes per side.
    pub fn cell_centered(lo: &[f64], hi: &[f64], res: usize, ghost: usize) -> Result<Self> {
        let spacing: Vec<f64> = lo.iter().zip(hi).map(|(a, b)| (b - a) / res as f64).collect();
        let origin = lo.iter().zip(&spacing).map(|(a, h)| a + (0.5 - ghost as f64) * h).collect();
        Self::new(origin, spacing, vec![res + 2 * ghost; lo.len()])
    }

    pub fn n(&self) -> usize {
        self.origin.len()
    }

    pub fn node_count(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn coord(&self, idx: &[usize]) -> Vec<f64> {
        idx.iter().enumerate().map(|(k, &i)| self.origin[k] + i as f64 * self.spacing[k]).collect()
    }

    /// Row-major flat index, first axis slowest.
    pub fn flat(&self, idx: &[usize]) -> usize {
        idx.iter().zip(&self.dims).fold(0, |acc, (&i, &d)| acc * d + i)
    }

    pub fn unflat(&self, mut k: usize) -> Vec<usize> {
        let mut idx = vec![0; self.n()];
        for a in (0..self.n()).rev() {
            idx[a] = k % self.dims[a];
            k /= self.dims[a];
        }
        idx
    }

    pub fn bbox(&self) -> (Vec<f64>, Vec<f64>) {
        let hi = (0..self.n()).map(|k| self.origin[k] + (self.dims[k] - 1) as f64 * self.spacing[k]).collect();
        (self.origin.clone(), hi)
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        let (lo, hi) = self.bbox();
        x.iter().enumerate().all(|(k, &v)| v >= lo[k] - 1e-12 && v <= hi[k] + 1e-12)
    }

    /// Interior nodes `i * (dims - 1) / per_axis`, `0 < i < per_axis`, shared by every
    /// refinement of the same box.
    pub fn sublattice(&self, per_axis: usize) -> Result<Vec<Vec<usize>>> {
        if per_axis < 2 || self.dims.iter().any(|&d| (d - 1) % per_axis != 0) {
            return Err(Error::Config(format!("grid {:?} is not divisible into {per_axis} cells", self.dims)));
        }
        let steps: Vec<usize> = self.dims.iter().map(|d| (d - 1) / per_axis).collect();
        let inner = per_axis - 1;
        let count = inner.pow(self.n() as u32);
        Ok((0..count)
            .map(|mut k| {
                let mut idx = vec![0; self.n()];
                for a in (0..self.n()).rev() {
                    idx[a] = (k % inner + 1) * steps[a];
                    k /= inner;
                }
                idx
            })
            .collect())
    }

    /// Minimum number of nodes from `idx` to the grid edge.
    pub fn depth(&self, idx: &[usize]) -> usize {
        idx.iter().zip(&self.dims).map(|(&i, &d)| i.min(d - 1 - i)).min().unwrap_or(0)
    }
}

#[derive(Debug, Clone)]
pub enum FieldSource {
    Analytic(Preset),
    /// Per node: `g` then `q`, each as the upper triangle in row order.
    Stored(Vec<f64>),
}

/// Metric and symmetric 2-tensor on a uniform coordinate grid.
#[derive(Debug, Clone)]
pub struct FieldSet {
    pub grid: GridSpec,
    pub source: FieldSource,
    pub provenance: String,
}

/// Values and finite-difference derivatives of `(g, q)` at a point.
#[derive(Debug, Clone)]
pub struct Jet {
    pub x: Vec<f64>,
    pub g: RMat,
    pub q: RMat,
    /// `dg[c] = ∂_c g`.
    pub dg: Vec<RMat>,
    /// `ddg[c * n + d] = ∂_c ∂_d g`.
    pub ddg: Vec<RMat>,
    /// `dq[c] = ∂_c q`.
    pub dq: Vec<RMat>,
}

impl Jet {
    fn zeros(n: usize, x: Vec<f64>) -> Self {
        let z = RMat::zeros(n, n);
        Jet { x, g: z.clone(), q: z.clone(), dg: vec![z.clone(); n], ddg: vec![z.clone(); n * n], dq: vec![z; n] }
    }

    fn add_scaled(&mut self, other: &Jet, w: f64) {
        self.g += &other.g * w;
        self.q += &other.q * w;
        for (a, b) in self.dg.iter_mut().zip(&other.dg) {
            *a += b * w;
        }
        for (a, b) in self.ddg.iter_mut().zip(&other.ddg) {
            *a += b * w;
        }
        for (a, b) in self.dq.iter_mut().zip(&other.dq) {
            *a += b * w;
        }
    }

    pub fn n(&self) -> usize {
        self.g.nrows()
    }
}

/// Second-order first-derivative stencil at node `i` of `len`.
fn first_stencil(i: usize, len: usize, h: f64) -> [(isize, f64); 3] {
    let s = 0.5 / h;
    if i >= 1 && i + 1 < len {
        [(-1, -s), (0, 0.0), (1, s)]
    } else if i == 0 {
        [(0, -3.0 * s), (1, 4.0 * s), (2, -s)]
    } else {
        [(0, 3.0 * s), (-1, -4.0 * s), (-2, s)]
    }
}

/// Second-order second-derivative stencil at node `i` of `len`.
fn second_stencil(i: usize, len: usize, h: f64) -> Vec<(isize, f64)> {
    let s = 1.0 / (h * h);
    if i >= 1 && i + 1 < len {
        vec![(-1, s), (0, -2.0 * s), (1, s)]
    } else if i == 0 {
        vec![(0, 2.0 * s), (1, -5.0 * s), (2, 4.0 * s), (3, -s)]
    } else {
        vec![(0, 2.0 * s), (-1, -5.0 * s), (-2, 4.0 * s), (-3, -s)]
    }
}

fn upper_to_mat(n: usize, vals: &[f64]) -> RMat {
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

impl FieldSet {
    /// Preset sampled lazily at nodes; validates every node.
    pub fn from_preset(preset: Preset, grid: GridSpec) -> Result<Self> {
        let fs = FieldSet { provenance: preset.name().to_string(), grid, source: FieldSource::Analytic(preset) };
        fs.validate()?;
        Ok(fs)
    }

    /// Convenience: `preset_field(name, params, grid)`.
    pub fn preset(name: &str, params: &Params, grid: GridSpec) -> Result<Self> {
        let p = Preset::from_name(name, grid.n(), params)?;
        Self::from_preset(p, grid)
    }

    pub fn from_stored(grid: GridSpec, data: Vec<f64>, provenance: String) -> Result<Self> {
        let n = grid.n();
        check_len(grid.node_count() * n * (n + 1), data.len())?;
        let fs = FieldSet { grid, source: FieldSource::Stored(data), provenance };
        fs.validate()?;
        Ok(fs)
    }

    pub fn n(&self) -> usize {
        self.grid.n()
    }

    /// Positive definiteness of `g`, symmetry of `q` and preset domain checks.
    pub fn validate(&self) -> Result<()> {
        for k in 0..self.grid.node_count() {
            let idx = self.grid.unflat(k);
            let (g, q) = self.node(&idx)?;
            let sym = ((&g - g.transpose()).amax()).max((&q - q.transpose()).amax());
            if sym > 1e-12 {
                return Err(Error::Degenerate(format!("asymmetric tensor at node {idx:?}")));
            }
            let ev = g.clone().symmetric_eigen().eigenvalues.min();
            if !(ev > 1e-8) {
                return Err(Error::DegenerateMetric { location: format!("node {idx:?}") });
            }
        }
        Ok(())
    }

    /// `(g, q)` at a node.
    pub fn node(&self, idx: &[usize]) -> Result<(RMat, RMat)> {
        match &self.source {
            FieldSource::Analytic(p) => p.eval(&self.grid.coord(idx)),
            FieldSource::Stored(data) => {
                let n = self.n();
                let stride = n * (n + 1);
                let off = self.grid.flat(idx) * stride;
                let half = stride / 2;
                Ok((upper_to_mat(n, &data[off..off + half]), upper_to_mat(n, &data[off + half..off + stride])))
            }
        }
    }

    /// Copy with all node values stored explicitly.
    pub fn materialize(&self) -> Result<FieldSet> {
        let n = self.n();
        let mut data = Vec::with_capacity(self.grid.node_count() * n * (n + 1));
        for k in 0..self.grid.node_count() {
            let (g, q) = self.node(&self.grid.unflat(k))?;
            for m in [&g, &q] {
                for i in 0..n {
                    for j in i..n {
                        data.push(m[(i, j)]);
                    }
                }
            }
        }
        Ok(FieldSet { grid: self.grid.clone(), source: FieldSource::Stored(data), provenance: self.provenance.clone() })
    }

    /// Finite-difference jet at a node; `second` includes `∂∂g`.
    pub fn node_jet(&self, idx: &[usize], second: bool) -> Result<Jet> {
        let n = self.n();
        let mut cache: Vec<(Vec<isize>, RMat, RMat)> = Vec::with_capacity(1 + 2 * n + 4 * n * n);
        let mut sample = |off: &[isize]| -> Result<(RMat, RMat)> {
            if let Some(hit) = cache.iter().find(|c| c.0 == off) {
                return Ok((hit.1.clone(), hit.2.clone()));
            }
            let j: Vec<usize> = idx.iter().zip(off).map(|(&i, &o)| (i as isize + o) as usize).collect();
            let v = self.node(&j)?;
            cache.push((off.to_vec(), v.0.clone(), v.1.clone()));
            Ok(v)
        };
        let x = self.grid.coord(idx);
        if let FieldSource::Analytic(p) = &self.source {
            if p.is_uniform() {
                let (g, q) = self.node(idx)?;
                let mut jet = Jet::zeros(n, x);
                jet.g = g;
                jet.q = q;
                return Ok(jet);
            }
        }
        let mut jet = Jet::zeros(n, x);
        let zero = vec![0isize; n];
        let (g0, q0) = sample(&zero)?;
        jet.g = g0;
        jet.q = q0;
        for c in 0..n {
            let st = first_stencil(idx[c], self.grid.dims[c], self.grid.spacing[c]);
            for &(o, w) in &st {
                if w == 0.0 {
                    continue;
                }
                let mut off = zero.clone();
                off[c] = o;
                let (g, q) = sample(&off)?;
                jet.dg[c] += g * w;
                jet.dq[c] += q * w;
            }
        }
        if second {
            for c in 0..n {
                for &(o, w) in &second_stencil(idx[c], self.grid.dims[c], self.grid.spacing[c]) {
                    let mut off = zero.clone();
                    off[c] = o;
                    let (g, _) = sample(&off)?;
                    jet.ddg[c * n + c] += g * w;
                }
                for d in c + 1..n {
                    let sc = first_stencil(idx[c], self.grid.dims[c], self.grid.spacing[c]);
                    let sd = first_stencil(idx[d], self.grid.dims[d], self.grid.spacing[d]);
                    let mut acc = RMat::zeros(n, n);
                    for &(oc, wc) in &sc {
                        for &(od, wd) in &sd {
                            if wc == 0.0 || wd == 0.0 {
                                continue;
                            }
                            let mut off = zero.clone();
                            off[c] = oc;
                            off[d] = od;
                            let (g, _) = sample(&off)?;
                            acc += g * (wc * wd);
                        }
                    }
                    jet.ddg[c * n + d] = acc.clone();
                    jet.ddg[d * n + c] = acc;
                }
            }
        }
        Ok(jet)
    }

    /// Multilinear interpolation of node jets at an arbitrary point.
    pub fn jet_at(&self, x: &[f64], second: bool) -> Result<Jet> {
        self.jet_at_with(x, &mut |idx| self.node_jet(idx, second))
    }

    /// As [`jet_at`](Self::jet_at) with a caller-supplied node-jet provider.
    pub fn jet_at_with(&self, x: &[f64], node_jet: &mut dyn FnMut(&[usize]) -> Result<Jet>) -> Result<Jet> {
        let n = self.n();
        check_len(n, x.len())?;
        if !self.grid.contains(x) {
            return Err(Error::OutsideGrid { point: x.to_vec() });
        }
        let mut base = vec![0usize; n];
        let mut frac = vec![0.0; n];
        for k in 0..n {
            let t = (x[k] - self.grid.origin[k]) / self.grid.spacing[k];
            let i = (t.floor().max(0.0) as usize).min(self.grid.dims[k] - 2);
            base[k] = i;
            frac[k] = (t - i as f64).clamp(0.0, 1.0);
            if frac[k] < 1e-12 {
                frac[k] = 0.0;
            }
            if frac[k] > 1.0 - 1e-12 {
                frac[k] = 1.0;
            }
        }
        if let FieldSource::Analytic(p) = &self.source {
            if p.is_uniform() {
                let mut j = node_jet(&base)?;
                j.x = x.to_vec();
                return Ok(j);
            }
        }
        let mut out: Option<Jet> = None;
        for corner in 0..1usize << n {
            let mut w = 1.0;
            let mut idx = base.clone();
            for k in 0..n {
                if corner >> k & 1 == 1 {
                    w *= frac[k];
                    idx[k] += 1;
                } else {
                    w *= 1.0 - frac[k];
                }
            }
            if w == 0.0 {
                continue;
            }
            let j = node_jet(&idx)?;
            match out.as_mut() {
                None if w == 1.0 => out = Some(j),
                None => {
                    let mut z = Jet::zeros(n, x.to_vec());
                    z.add_scaled(&j, w);
                    out = Some(z);
                }
                Some(o) => o.add_scaled(&j, w),
            }
        }
        let mut out = out.expect("at least one corner has positive weight");
        out.x = x.to_vec();
        Ok(out)
    }

    pub fn frame_at(&self, x: &[f64], level: Level) -> Result<FramePoint> {
        let jet = self.jet_at(x, level != Level::Connection)?;
        FramePoint::new(&jet, level)
    }

    /// One frame valid at every point, when the fields are spatially constant.
    pub fn uniform_frame(&self, level: Level) -> Result<Option<FramePoint>> {
        match &self.source {
            FieldSource::Analytic(p) if p.is_uniform() => {
                let g = &self.grid;
                let x: Vec<f64> = (0..g.origin.len())
                    .map(|k| g.origin[k] + 0.5 * g.spacing[k] * (g.dims[k] - 1) as f64)
                    .collect();
                self.frame_at(&x, level).map(Some)
            }
            _ => Ok(None),
        }
    }

    pub fn node_frame(&self, idx: &[usize], level: Level) -> Result<FramePoint> {
        let jet = self.node_jet(idx, level != Level::Connection)?;
        FramePoint::new(&jet, level)
    }
}
