//! Formulas behind each named check.

use anyhow::{bail, Result};

pub struct Entry {
    pub name: &'static str,
    pub suite: &'static str,
    pub records: &'static str,
    pub text: &'static str,
}

pub const ENTRIES: &[Entry] = &[
    Entry {
        name: "algebra",
        suite: "algebra",
        records: "anticommutation, skew_hermitian, grading, omega_hermitian_square, chi_involution, chi_split",
        text: "\
γ_i γ_j + γ_j γ_i = -2 δ_ij Id,  γ_i† = -γ_i
even n: ε = i^{n/2} γ_1⋯γ_n,  ε² = Id,  ε γ_i = -γ_i ε
odd n:  ε = i^{(n+1)/2} γ_1⋯γ_n,  ε² = Id,  ε γ_i = γ_i ε
ω_X = [⟨ε̄ c̄(X) s̄_β, s̄_α⟩]  (odd n: i c̄(X) in place of ε̄ c̄(X))
ω_X† = ω_X,  ω_X² = |X|² Id
χ = (ε ⊗ ε̄)(c(ν) ⊗ c̄(N)),  χ² = Id,  tr χ = 0",
    },
    Entry {
        name: "anticommutation",
        suite: "sl",
        records: "anticommutation, a_bound",
        text: "\
D^∂ χ + χ D^∂ = 0
over random boundary frames, Gauss-map differentials dN and linear sections;
|⟨A σ, σ⟩| ≤ ½ ‖dN‖_tr |σ|²",
    },
    Entry {
        name: "dec",
        suite: "dec",
        records: "mu_error_order, j_error_order, dec_margin",
        text: "\
μ = ½ (R_g + (tr_g q)² - |q|_g²)
J = div_g q - d(tr_g q)
margin = min over nodes of μ - |J|_g, required ≥ 0
with closed-form data the errors |μ - μ_exact|, |J - J_exact| must converge at order ≥ 1.7",
    },
    Entry {
        name: "tilt-dec",
        suite: "faces",
        records: "tilted_dec_face_<k>",
        text: "\
H_ℓ + cos θ_ℓ tr_{F_ℓ} q - sin θ_ℓ |q(ν_ℓ, ·)^⊤| ≥ 0 on every face F_ℓ
cos θ_ℓ = ⟨N_0, N_ℓ⟩",
    },
    Entry {
        name: "faces",
        suite: "faces",
        records: "tilted_dec_face_<k>, matching_angle, boundary_2ff_order",
        text: "\
per face: tilted dominant energy condition (see tilt-dec)
per edge: matching angle (see matching-angle)
per face centre: boundary second fundamental form identity (see boundary-2ff)",
    },
    Entry {
        name: "matching-angle",
        suite: "faces",
        records: "matching_angle",
        text: "\
g(ν_ℓ, ν_k) - ⟨N_ℓ, N_k⟩ = 0 along every edge F_ℓ ∩ F_k",
    },
    Entry {
        name: "smoothing",
        suite: "smoothing",
        records: "hausdorff_monotone, hausdorff_bound, smoothed_normal",
        text: "\
F_λ(x) = Σ_ℓ exp(λ u_ℓ(x)),  Ω_λ = {F_λ ≤ 1}
N_λ = Σ_ℓ e^{λ u_ℓ} |∇u_ℓ| N_ℓ / |Σ_ℓ e^{λ u_ℓ} |∇u_ℓ| N_ℓ|
d_H({F_λ = 1}, ∂Ω) decreasing in λ,  |N_λ - N_ℓ| ≤ 1e-6 at face centres for the largest λ",
    },
    Entry {
        name: "sl",
        suite: "sl",
        records: "exact_zero, identity_order",
        text: "\
∫_Ω |D̂σ|² = ∫_Ω |∇̂σ|² + ½ ∫_Ω (μ |σ|² + ⟨(J ⊗ ω_{N_0}) σ, σ⟩)
          + ∫_∂Ω (⟨D^∂ σ_+, σ_-⟩ + ⟨A σ, σ⟩ + ½ ⟨((tr q) ν - q(ν)) ⊗ ω_{N_0} σ, σ⟩)
D̂ = D + Ψ,  ∇̂_i = ∇_i + ½ ε q(e_i) ω_{N_0},  σ_± = ½ (σ ± χσ)
midpoint quadrature; relative residual must converge at order ≥ 1.7",
    },
    Entry {
        name: "sl-inequality",
        suite: "sl",
        records: "inequality",
        text: "\
for σ with χσ = σ on ∂Ω:
∫_Ω |D̂σ|² ≥ ∫_Ω |∇̂σ|² + ½ ∫_Ω (μ |σ|² + ⟨(J ⊗ ω_{N_0}) σ, σ⟩)
          + ½ ∫_∂Ω (H + cos θ tr_∂ q - sin θ |q(ν, ·)^⊤| - ‖dN‖_tr) |σ|²
violations are counted beyond the measured quadrature defect",
    },
    Entry {
        name: "transport",
        suite: "transport",
        records: "closed_form, drift_*_order, cauchy_schwarz, capillary, capillary_control",
        text: "\
∇_i s + ½ ε q(e_i) ω_{N_0} s = 0 integrated by RK4 along grid lines
f² - |W|²,  ⟨ψ_+, ψ_-⟩,  |z|² - |Z|² constant along solutions; drift order ≥ 3.5
flat data with constant q: s(t) = exp(-½ t ε q(e_a) ω_{N_0}) s(0)",
    },
    Entry {
        name: "capillary",
        suite: "transport",
        records: "capillary, capillary_control",
        text: "\
⟨W, ν⟩ = ⟨N, N_0⟩ f for s projected onto both boundary eigenspaces",
    },
    Entry {
        name: "boundary-2ff",
        suite: "faces",
        records: "boundary_2ff_order",
        text: "\
h(e_i, e_k) + cos θ q(e_i, e_k) - q(e_i, ν) ⟨ξ, e_k⟩ = 0 for face tangents e_i, e_k
cos θ = ⟨ξ, ν⟩",
    },
    Entry {
        name: "rigidity",
        suite: "rigidity",
        records: "rhat_order, codazzi_order",
        text: "\
R̂_ijkl = R_ijkl + q_jk q_il - q_ik q_jl = 0
(∇_i q)_jk - (∇_j q)_ik = 0
residuals must converge at order ≥ 1.7",
    },
];

pub fn names() -> Vec<&'static str> {
    ENTRIES.iter().map(|e| e.name).collect()
}

pub fn explain(name: &str) -> Result<String> {
    match ENTRIES.iter().find(|e| e.name == name) {
        Some(e) => Ok(format!("{}\n  suite: {}\n  records: {}\n\n{}\n", e.name, e.suite, e.records, e.text)),
        None => bail!("unknown check '{name}' (valid: {})", names().join(", ")),
    }
}
