//! Small dense helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type CMat = DMatrix<Complex64>;
pub type CVec = DVector<Complex64>;
pub type RMat = DMatrix<f64>;
pub type RVec = DVector<f64>;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub const I: Complex64 = Complex64::new(0.0, 1.0);

pub fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Kronecker product `a ⊗ b` with the first factor as the slow index.
pub fn kron(a: &CMat, b: &CMat) -> CMat {
    let (ar, ac) = a.shape();
    let (br, bc) = b.shape();
    let mut out = CMat::zeros(ar * br, ac * bc);
    for i in 0..ar {
        for j in 0..ac {
            let aij = a[(i, j)];
            if aij == ZERO {
                continue;
            }
            for k in 0..br {
                for l in 0..bc {
                    out[(i * br + k, j * bc + l)] = aij * b[(k, l)];
                }
            }
        }
    }
    out
}

/// `A B` by a plain triple loop; faster than the generic product for tiny sizes.
pub fn mm(a: &CMat, b: &CMat) -> CMat {
    let (r, k, cols) = (a.nrows(), a.ncols(), b.ncols());
    debug_assert_eq!(k, b.nrows());
    let mut out = CMat::zeros(r, cols);
    for j in 0..cols {
        for p in 0..k {
            let bp = b[(p, j)];
            if bp == ZERO {
                continue;
            }
            for i in 0..r {
                out[(i, j)] += a[(i, p)] * bp;
            }
        }
    }
    out
}

/// `A Bᵀ` without materialising the transpose.
pub fn mm_t(a: &CMat, b: &CMat) -> CMat {
    let (r, k, cols) = (a.nrows(), a.ncols(), b.nrows());
    debug_assert_eq!(k, b.ncols());
    let mut out = CMat::zeros(r, cols);
    for j in 0..cols {
        for p in 0..k {
            let bp = b[(j, p)];
            if bp == ZERO {
                continue;
            }
            for i in 0..r {
                out[(i, j)] += a[(i, p)] * bp;
            }
        }
    }
    out
}

/// Entrywise complex conjugate.
pub fn conj(a: &CMat) -> CMat {
    a.map(|z| z.conj())
}

/// Largest entry modulus.
pub fn max_abs(a: &CMat) -> f64 {
    a.iter().fold(0.0f64, |m, z| m.max(z.norm()))
}

pub fn identity(m: usize) -> CMat {
    CMat::identity(m, m)
}

/// Hermitian inner product, linear in the first slot.
pub fn inner(u: &CMat, v: &CMat) -> Complex64 {
    v.dotc(u)
}

pub fn inner_vec(u: &CVec, v: &CVec) -> Complex64 {
    v.dotc(u)
}

/// Real matrix promoted to complex.
pub fn complexify(a: &RMat) -> CMat {
    a.map(c)
}

/// Lower Cholesky factor, `None` if not positive definite.
pub fn cholesky(g: &RMat) -> Option<RMat> {
    nalgebra::Cholesky::new(g.clone()).map(|ch| ch.l())
}

/// Inverse of a lower-triangular matrix.
pub fn lower_inverse(l: &RMat) -> RMat {
    let n = l.nrows();
    l.solve_lower_triangular(&RMat::identity(n, n))
        .expect("non-singular triangular factor")
}

/// Strict lower part plus half the diagonal.
pub fn half_lower(x: &RMat) -> RMat {
    let n = x.nrows();
    RMat::from_fn(n, n, |i, j| {
        if i > j {
            x[(i, j)]
        } else if i == j {
            0.5 * x[(i, i)]
        } else {
            0.0
        }
    })
}

/// Euclidean norm of a slice.
pub fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Orthonormal basis of the Euclidean orthogonal complement of `v`.
pub fn orthogonal_complement(v: &[f64]) -> Vec<Vec<f64>> {
    let n = v.len();
    let nv = norm(v);
    let u: Vec<f64> = v.iter().map(|x| x / nv).collect();
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(n - 1);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| u[a].abs().partial_cmp(&u[b].abs()).unwrap());
    for &k in &order {
        let mut w = vec![0.0; n];
        w[k] = 1.0;
        let p = w[k] * u[k];
        for i in 0..n {
            w[i] -= p * u[i];
        }
        for b in &basis {
            let d = dot(&w, b);
            for i in 0..n {
                w[i] -= d * b[i];
            }
        }
        let nw = norm(&w);
        if nw > 1e-8 {
            basis.push(w.iter().map(|x| x / nw).collect());
        }
        if basis.len() == n - 1 {
            break;
        }
    }
    basis
}

/// Sum of singular values.
/// Uniform random unit vector.
pub fn random_unit(rng: &mut impl rand::Rng, n: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let l = norm(&v);
        if l > 1e-3 && l <= 1.0 {
            return v.iter().map(|a| a / l).collect();
        }
    }
}

/// Random vector orthogonal to the unit vector `u`, with entries of order `scale`.
pub fn random_orthogonal(rng: &mut impl rand::Rng, u: &[f64], scale: f64) -> Vec<f64> {
    let v: Vec<f64> = u.iter().map(|_| rng.random_range(-scale..scale)).collect();
    let p = dot(&v, u);
    v.iter().zip(u).map(|(a, b)| a - p * b).collect()
}

/// Unit vector at angle `theta` from the unit vector `u` in a random direction.
pub fn rotate_towards_random(rng: &mut impl rand::Rng, u: &[f64], theta: f64) -> Vec<f64> {
    loop {
        let t = random_orthogonal(rng, u, 1.0);
        let l = norm(&t);
        if l > 1e-3 {
            return u.iter().zip(&t).map(|(a, b)| theta.cos() * a + theta.sin() * b / l).collect();
        }
    }
}

pub fn trace_norm(a: &RMat) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    a.clone().svd(false, false).singular_values.iter().sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kron_mixed_product() {
        let a = CMat::from_fn(2, 2, |i, j| Complex64::new(i as f64 + 1.0, j as f64));
        let b = CMat::from_fn(3, 3, |i, j| Complex64::new((i * j) as f64, 1.0));
        let lhs = kron(&a, &b) * kron(&a, &b);
        let rhs = kron(&(&a * &a), &(&b * &b));
        assert!(max_abs(&(lhs - rhs)) < 1e-12);
    }

    #[test]
    fn complement_is_orthonormal() {
        let v = [0.3, -1.0, 2.0, 0.5];
        let b = orthogonal_complement(&v);
        assert_eq!(b.len(), 3);
        for (i, x) in b.iter().enumerate() {
            assert!(dot(x, &v).abs() < 1e-12);
            for (j, y) in b.iter().enumerate() {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((dot(x, y) - want).abs() < 1e-12);
            }
        }
    }
}
