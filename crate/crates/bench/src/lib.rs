//! Shared fixtures for the benchmarks.

use polyrig::fields::{Param, Params};
use polyrig::{FieldSet, GridSpec};

pub fn axis(n: usize, k: usize) -> Vec<f64> {
    let mut v = vec![0.0; n];
    v[k] = 1.0;
    v
}

/// Upper half-space data on `[0,1]^{n-1} x [1,2]`.
pub fn hyperbolic(n: usize, res: usize) -> FieldSet {
    let lo: Vec<f64> = (0..n).map(|k| if k == n - 1 { 1.0 } else { 0.0 }).collect();
    let hi: Vec<f64> = lo.iter().map(|l| l + 1.0).collect();
    FieldSet::preset("hyperbolic_uhs", &Params::new(), GridSpec::covering(&lo, &hi, res).unwrap()).unwrap()
}

pub fn conformal(n: usize, res: usize) -> FieldSet {
    let mut p = Params::new();
    p.insert("amplitude".into(), Param::Number(0.05));
    FieldSet::preset("conformal", &p, GridSpec::covering(&vec![0.0; n], &vec![1.0; n], res).unwrap()).unwrap()
}
