//! Complex Clifford representations, gradings and the flat-factor pairing.
//!
//! Generators are skew-Hermitian with `γ_a γ_b + γ_b γ_a = -2 δ_ab`. Two
//! Hermitian actions are exposed: `h(v)` on the metric factor and `F(X)` on
//! the flat factor. In even dimension `h(v) = ε c(v)` and `F(X) = ε̄ c̄(X)`;
//! in odd dimension `h(v) = i c(v)` and `F(X) = i c̄(X)`.

use crate::error::{check_dim, check_len, Error, Result};
use crate::linalg::{conj, identity, kron, max_abs, norm, CMat, I, ONE, ZERO};
use crate::tolerances;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub const MIN_DIM: usize = 2;
pub const MAX_DIM: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn of(n: usize) -> Parity {
        if n % 2 == 0 {
            Parity::Even
        } else {
            Parity::Odd
        }
    }
}

/// Complex Clifford module of rank `m = 2^{floor(n/2)}`.
#[derive(Debug, Clone)]
pub struct CliffordRep {
    pub n: usize,
    pub m: usize,
    pub parity: Parity,
    /// Skew-Hermitian generators.
    pub gamma: Vec<CMat>,
    /// Entrywise conjugates, acting on the flat factor.
    pub gamma_bar: Vec<CMat>,
    /// Grading, `+Id` in odd dimension.
    pub epsilon: CMat,
    pub epsilon_bar: CMat,
    /// Whether the last odd generator was negated to normalise the grading.
    pub last_flipped: bool,
    /// `γ_a γ_b` for `a < b` in `pairs()` order.
    pub bivectors: Vec<CMat>,
}

fn pauli() -> [CMat; 3] {
    let s1 = CMat::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO]);
    let s2 = CMat::from_row_slice(2, 2, &[ZERO, -I, I, ZERO]);
    let s3 = CMat::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE]);
    [s1, s2, s3]
}

fn tensor_chain(factors: &[&CMat]) -> CMat {
    factors
        .iter()
        .fold(identity(1), |acc, f| kron(&acc, f))
}

fn product(mats: &[CMat], m: usize) -> CMat {
    mats.iter().fold(identity(m), |acc, g| acc * g)
}

impl CliffordRep {
    /// Build the Jordan–Wigner representation for `2 <= n <= 8`.
    pub fn new(n: usize) -> Result<Self> {
        check_dim(n, MIN_DIM, MAX_DIM)?;
        let k = n / 2;
        let m = 1usize << k;
        let [s1, s2, s3] = pauli();
        let id2 = identity(2);
        let mut herm = Vec::with_capacity(n);
        for j in 0..k {
            for s in [&s1, &s2] {
                let mut f: Vec<&CMat> = Vec::with_capacity(k);
                for _ in 0..j {
                    f.push(&s3);
                }
                f.push(s);
                for _ in j + 1..k {
                    f.push(&id2);
                }
                herm.push(tensor_chain(&f));
            }
        }
        if n % 2 == 1 {
            let f: Vec<&CMat> = (0..k).map(|_| &s3).collect();
            herm.push(tensor_chain(&f));
        }
        let mut gamma: Vec<CMat> = herm.into_iter().map(|g| g * I).collect();
        let parity = Parity::of(n);
        let phase = I.powu(if parity == Parity::Even { k as u32 } else { (k + 1) as u32 });
        let mut epsilon = product(&gamma, m) * phase;
        let mut last_flipped = false;
        if parity == Parity::Odd {
            if (epsilon.clone() + identity(m)).norm() < 1e-9 {
                let last = gamma.len() - 1;
                gamma[last] = -gamma[last].clone();
                epsilon = product(&gamma, m) * phase;
                last_flipped = true;
            }
        }
        let gamma_bar = gamma.iter().map(conj).collect();
        let epsilon_bar = conj(&epsilon);
        let bivectors = (0..n)
            .flat_map(|a| (a + 1..n).map(move |b| (a, b)))
            .map(|(a, b)| &gamma[a] * &gamma[b])
            .collect();
        Ok(Self { n, m, parity, gamma, gamma_bar, epsilon, epsilon_bar, last_flipped, bivectors })
    }

    /// Clifford multiplication `c(v)` by a frame vector.
    pub fn clifford_mul(&self, v: &[f64]) -> Result<CMat> {
        check_len(self.n, v.len())?;
        Ok(self.combo(&self.gamma, v))
    }

    /// Conjugate Clifford multiplication `c̄(X)` on the flat factor.
    pub fn clifford_mul_bar(&self, x: &[f64]) -> Result<CMat> {
        check_len(self.n, x.len())?;
        Ok(self.combo(&self.gamma_bar, x))
    }

    fn combo(&self, basis: &[CMat], v: &[f64]) -> CMat {
        let mut out = CMat::zeros(self.m, self.m);
        for (g, &x) in basis.iter().zip(v) {
            if x != 0.0 {
                out += g * Complex64::new(x, 0.0);
            }
        }
        out
    }

    /// Hermitian action `h(v)` on the metric factor, `h(v)^2 = |v|^2`.
    pub fn hermitian(&self, v: &[f64]) -> Result<CMat> {
        let cv = self.clifford_mul(v)?;
        Ok(match self.parity {
            Parity::Even => &self.epsilon * cv,
            Parity::Odd => cv * I,
        })
    }

    /// Hermitian action `F(X)` on the flat factor, `F(X)^2 = |X|^2`.
    pub fn flat_action(&self, x: &[f64]) -> Result<CMat> {
        let cb = self.clifford_mul_bar(x)?;
        Ok(match self.parity {
            Parity::Even => &self.epsilon_bar * cb,
            Parity::Odd => cb * I,
        })
    }

    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> {
        let n = self.n;
        (0..n).flat_map(move |a| (a + 1..n).map(move |b| (a, b)))
    }

    /// Pairing matrix `ω_X` acting on spinor m-tuples.
    pub fn omega_matrix(&self, x: &[f64]) -> Result<OmegaMatrix> {
        let mat = self.flat_action(x)?;
        Ok(OmegaMatrix { x: x.to_vec(), mat })
    }

    /// As [`omega_matrix`](Self::omega_matrix), rejecting a parity that disagrees with `n`.
    pub fn omega_matrix_mode(&self, x: &[f64], mode: Parity) -> Result<OmegaMatrix> {
        if mode != self.parity {
            return Err(Error::ParityMismatch(format!("{mode:?} pairing requested for n = {}", self.n)));
        }
        self.omega_matrix(x)
    }

    /// Boundary involution `h(ν) ⊗ F(N)` on the twisted fiber.
    pub fn chi_matrix(&self, nu: &[f64], normal: &[f64]) -> Result<CMat> {
        for v in [nu, normal] {
            check_len(self.n, v.len())?;
            let nv = norm(v);
            if (nv - 1.0).abs() > tolerances::UNIT {
                return Err(Error::NonUnit { norm: nv });
            }
        }
        Ok(kron(&self.hermitian(nu)?, &self.flat_action(normal)?))
    }

    /// Entrywise defects of every defining identity of the representation.
    pub fn defects(&self) -> AlgebraDefects {
        let m = self.m;
        let id = identity(m);
        let mut anti = 0.0f64;
        let mut skew = 0.0f64;
        let mut eps_anti = 0.0f64;
        for (a, ga) in self.gamma.iter().enumerate() {
            skew = skew.max(max_abs(&(ga.adjoint() + ga)));
            for (b, gb) in self.gamma.iter().enumerate() {
                let want = if a == b { -2.0 } else { 0.0 };
                anti = anti.max(max_abs(&(ga * gb + gb * ga - &id * Complex64::new(want, 0.0))));
            }
            let comm = match self.parity {
                Parity::Even => &self.epsilon * ga + ga * &self.epsilon,
                Parity::Odd => &self.epsilon * ga - ga * &self.epsilon,
            };
            eps_anti = eps_anti.max(max_abs(&comm));
        }
        let eps_sq = max_abs(&(&self.epsilon * &self.epsilon - &id));
        let eps_herm = max_abs(&(self.epsilon.adjoint() - &self.epsilon));
        let eps_odd_identity = match self.parity {
            Parity::Odd => max_abs(&(&self.epsilon - &id)),
            Parity::Even => 0.0,
        };
        AlgebraDefects { anticommutator: anti, skew_hermitian: skew, epsilon_square: eps_sq, epsilon_hermitian: eps_herm, epsilon_generator: eps_anti, epsilon_odd_identity: eps_odd_identity }
    }
}

/// Largest entrywise defects of the representation identities.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct AlgebraDefects {
    pub anticommutator: f64,
    pub skew_hermitian: f64,
    pub epsilon_square: f64,
    pub epsilon_hermitian: f64,
    /// Anticommutator (even) or commutator (odd) of ε with generators.
    pub epsilon_generator: f64,
    pub epsilon_odd_identity: f64,
}

impl AlgebraDefects {
    pub fn max(&self) -> f64 {
        [self.anticommutator, self.skew_hermitian, self.epsilon_square, self.epsilon_hermitian, self.epsilon_generator, self.epsilon_odd_identity]
            .into_iter()
            .fold(0.0, f64::max)
    }
}

/// Hermitian `m × m` matrix pairing a flat vector with spinor tuples.
#[derive(Debug, Clone)]
pub struct OmegaMatrix {
    pub x: Vec<f64>,
    pub mat: CMat,
}

impl OmegaMatrix {
    pub fn hermitian_defect(&self) -> f64 {
        max_abs(&(self.mat.adjoint() - &self.mat))
    }

    pub fn square_defect(&self) -> f64 {
        let n2: f64 = self.x.iter().map(|v| v * v).sum();
        let m = self.mat.nrows();
        max_abs(&(&self.mat * &self.mat - identity(m) * Complex64::new(n2, 0.0)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranks_and_parities() {
        for n in 2..=8 {
            let r = CliffordRep::new(n).unwrap();
            assert_eq!(r.m, 1 << (n / 2));
            assert_eq!(r.gamma.len(), n);
            assert!(r.defects().max() < tolerances::ALGEBRA, "n={n}");
        }
        assert!(CliffordRep::new(1).is_err());
        assert!(CliffordRep::new(9).is_err());
    }

    #[test]
    fn three_dim_grading_needs_flip() {
        let r = CliffordRep::new(3).unwrap();
        assert!(r.last_flipped);
        assert!(max_abs(&(&r.epsilon - identity(2))) < 1e-14);
    }

    #[test]
    fn hermitian_actions_square_to_norm() {
        let r = CliffordRep::new(4).unwrap();
        let v = [0.3, -0.2, 0.9, 0.1];
        let n2: f64 = v.iter().map(|x| x * x).sum();
        for h in [r.hermitian(&v).unwrap(), r.flat_action(&v).unwrap()] {
            assert!(max_abs(&(h.adjoint() - &h)) < 1e-14);
            assert!(max_abs(&(&h * &h - identity(4) * Complex64::new(n2, 0.0))) < 1e-14);
        }
    }

    #[test]
    fn chi_rejects_non_unit() {
        let r = CliffordRep::new(3).unwrap();
        assert!(matches!(r.chi_matrix(&[1.0, 1.0, 0.0], &[1.0, 0.0, 0.0]), Err(Error::NonUnit { .. })));
    }
}
