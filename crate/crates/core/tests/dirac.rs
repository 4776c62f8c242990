use num_complex::Complex64;
use polyrig::dirac::{
    a_operator_bound, anticommutator_residual, apply_kron, chi_eigenspace_vanishing, from_vector, norm_sq, project_plus,
    re_inner, to_vector, BoundaryOperators, BoundaryPoint, PsiSign, TwistedPointOperators,
};
use polyrig::fields::{FaceGeometry, Param, Params};
use polyrig::linalg::{inner, kron, max_abs, random_orthogonal, random_unit, CMat, RMat};
use polyrig::sl::random_twisted;
use polyrig::{CliffordRep, FieldSet, GridSpec, Level};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

fn flat_frame(n: usize, q_scale: f64) -> polyrig::FramePoint {
    let mut p = Params::new();
    p.insert("q_scale".into(), Param::Number(q_scale));
    let f = FieldSet::preset("flat", &p, GridSpec::covering(&vec![0.0; n], &vec![1.0; n], 4).unwrap()).unwrap();
    f.node_frame(&vec![2; n], Level::Connection).unwrap()
}

fn conformal_frame(n: usize) -> polyrig::FramePoint {
    let mut p = Params::new();
    p.insert("amplitude".into(), Param::Number(0.3));
    p.insert("q_matrix".into(), Param::Matrix((0..n).map(|i| (0..n).map(|j| 0.1 * (i + j + 1) as f64 / (1 + i * j) as f64).collect()).collect()));
    let f = FieldSet::preset("conformal", &p, GridSpec::covering(&vec![0.0; n], &vec![1.0; n], 8).unwrap()).unwrap();
    f.node_frame(&vec![3; n], Level::Connection).unwrap()
}

fn zero_bp(n: usize, nu: Vec<f64>, normal: Vec<f64>) -> BoundaryPoint {
    let tangents = polyrig::linalg::orthogonal_complement(&nu);
    let k = tangents.len();
    BoundaryPoint {
        nu,
        tangents,
        omega_t: vec![RMat::zeros(n, n); k],
        nu_deriv: vec![vec![0.0; n]; k],
        normal,
        normal_deriv: vec![vec![0.0; n]; k],
    }
}

#[test]
fn anticommutator_vanishes_on_random_boundary_data() {
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    for (n, draws, tol) in [(3, 20, 1e-10), (4, 50, 1e-10), (5, 10, 1e-10), (6, 5, 1e-9)] {
        let rep = CliffordRep::new(n).unwrap();
        for _ in 0..draws {
            let bp = BoundaryPoint::random(&mut rng, n);
            let r = anticommutator_residual(&rep, &bp).unwrap();
            assert!(r <= tol, "n={n}: {r:e}");
        }
    }
}

#[test]
fn boundary_dirac_does_not_commute_with_chi() {
    // The anticommutator check is only meaningful if the commutator is not also zero.
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let rep = CliffordRep::new(4).unwrap();
    let bp = BoundaryPoint::random(&mut rng, 4);
    let ops = BoundaryOperators::new(&rep, &bp).unwrap();
    let s = random_twisted(&mut rng, 4, 1.0);
    let zero = vec![CMat::zeros(4, 4); 3];
    let chi_d = ops.chi_apply(&ops.boundary_dirac_apply(&s, &zero));
    let chi_s = ops.chi_apply(&s);
    let d_chi: Vec<CMat> = (0..3).map(|j| ops.chi_derivative_apply(j, &s).unwrap()).collect();
    let d_chi_s = ops.boundary_dirac_apply(&chi_s, &d_chi);
    assert!(norm_sq(&(d_chi_s - chi_d)).sqrt() > 1e-3);
}

#[test]
fn anticommutator_exact_without_derivatives() {
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    for n in [2, 3, 4] {
        let rep = CliffordRep::new(n).unwrap();
        let bp = zero_bp(n, random_unit(&mut rng, n), random_unit(&mut rng, n));
        assert!(anticommutator_residual(&rep, &bp).unwrap() <= 1e-14);
        let ops = BoundaryOperators::new(&rep, &bp).unwrap();
        let s = random_twisted(&mut rng, rep.m, 1.0);
        let out = ops.boundary_dirac_apply(&s, &vec![CMat::zeros(rep.m, rep.m); n - 1]);
        assert_eq!(max_abs(&out), 0.0);
    }
}

#[test]
fn boundary_correction_is_linear_in_dn() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let rep = CliffordRep::new(4).unwrap();
    let mut bp = BoundaryPoint::random(&mut rng, 4);
    let s = random_twisted(&mut rng, 4, 1.0);
    let dt: Vec<CMat> = (0..3).map(|_| random_twisted(&mut rng, 4, 1.0)).collect();
    let dn = bp.normal_deriv.clone();
    let eval = |bp: &BoundaryPoint| BoundaryOperators::new(&rep, bp).unwrap().boundary_dirac_apply(&s, &dt);
    bp.normal_deriv = vec![vec![0.0; 4]; 3];
    let base = eval(&bp);
    bp.normal_deriv = dn.clone();
    let one = eval(&bp);
    bp.normal_deriv = dn.iter().map(|v| v.iter().map(|x| 2.0 * x).collect()).collect();
    let two = eval(&bp);
    assert!(max_abs(&((&two - &base) - (&one - &base) * c(2.0))) <= 1e-12);
    assert!(max_abs(&(&one - &base)) > 1e-3);
}

#[test]
fn boundary_non_unit_normal_rejected() {
    let rep = CliffordRep::new(3).unwrap();
    let bp = zero_bp(3, vec![1.0, 0.0, 0.0], vec![2.0, 0.0, 0.0]);
    assert!(BoundaryOperators::new(&rep, &bp).is_err());
}

#[test]
fn face_derived_boundary_points_anticommute() {
    let fp = conformal_frame(4);
    let rep = CliffordRep::new(4).unwrap();
    let normal = [0.0, 1.0, 0.0, 0.0];
    let fg = FaceGeometry::at(&fp, &normal, None).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(24);
    let dn: Vec<Vec<f64>> = (0..4).map(|_| random_orthogonal(&mut rng, &normal, 0.5)).collect();
    let bp = BoundaryPoint::from_face(&fp, &fg, &normal, &dn).unwrap();
    assert!((bp.mean_curvature() - fg.mean_curvature).abs() < 1e-12);
    assert!(anticommutator_residual(&rep, &bp).unwrap() <= 1e-10);
}

fn chi_projections(rep: &CliffordRep, rng: &mut ChaCha8Rng, nu: &[f64], normal: &[f64]) -> (CMat, CMat) {
    let s = random_twisted(rng, rep.m, 1.0);
    let (h, f) = (rep.hermitian(nu).unwrap(), rep.flat_action(normal).unwrap());
    let plus = project_plus(&h, &f, &s);
    let minus = &s - &plus;
    (plus, minus)
}

#[test]
fn chi_eigenspaces_annihilate_mixed_pairings() {
    let mut rng = ChaCha8Rng::seed_from_u64(25);
    for n in [3, 4, 5] {
        let rep = CliffordRep::new(n).unwrap();
        for _ in 0..20 {
            let nu = random_unit(&mut rng, n);
            let normal = random_unit(&mut rng, n);
            let y = random_orthogonal(&mut rng, &normal, 1.3);
            let v = random_orthogonal(&mut rng, &nu, 0.7);
            let (plus, minus) = chi_projections(&rep, &mut rng, &nu, &normal);
            for s in [&plus, &minus] {
                let chi = rep.chi_matrix(&nu, &normal).unwrap();
                let sv = to_vector(s);
                let cs: Vec<Complex64> = (0..sv.len()).map(|i| (0..sv.len()).map(|j| chi[(i, j)] * sv[j]).sum()).collect();
                let sign = if std::ptr::eq(s, &plus) { 1.0 } else { -1.0 };
                assert!(cs.iter().zip(&sv).all(|(a, b)| (a - b * sign).norm() < 1e-12));
                let (a, b) = chi_eigenspace_vanishing(&rep, s, &nu, &normal, &y, &v).unwrap();
                let scale = norm_sq(s);
                assert!(a <= 1e-12 * scale && b <= 1e-12 * scale, "n={n}: {a:e} {b:e}");
            }
            let (a, _) = chi_eigenspace_vanishing(&rep, &plus, &nu, &normal, &vec![0.0; n], &v).unwrap();
            assert_eq!(a, 0.0);
        }
    }
}

#[test]
fn mixed_pairings_are_generic_off_the_eigenspace() {
    let mut rng = ChaCha8Rng::seed_from_u64(26);
    let rep = CliffordRep::new(4).unwrap();
    let nu = random_unit(&mut rng, 4);
    let normal = random_unit(&mut rng, 4);
    let y = random_orthogonal(&mut rng, &normal, 1.0);
    let v = random_orthogonal(&mut rng, &nu, 1.0);
    let (plus, minus) = chi_projections(&rep, &mut rng, &nu, &normal);
    let (a, b) = chi_eigenspace_vanishing(&rep, &(plus + minus * c(0.7)), &nu, &normal, &y, &v).unwrap();
    assert!(a > 1e-3 || b > 1e-3);
}

#[test]
fn a_operator_bound_holds() {
    let mut rng = ChaCha8Rng::seed_from_u64(27);
    let rep = CliffordRep::new(4).unwrap();
    for _ in 0..100 {
        let bp = BoundaryPoint::random(&mut rng, 4);
        let s = random_twisted(&mut rng, 4, 1.0);
        let (lhs, rhs) = a_operator_bound(&rep, &bp, &s).unwrap();
        assert!(lhs >= rhs - 1e-10 * norm_sq(&s), "{lhs} < {rhs}");
    }
    // H = 0 with generic dN.
    for _ in 0..100 {
        let mut bp = zero_bp(4, random_unit(&mut rng, 4), random_unit(&mut rng, 4));
        bp.normal_deriv = (0..3).map(|_| random_orthogonal(&mut rng, &bp.normal, 1.0)).collect();
        let s = random_twisted(&mut rng, 4, 1.0);
        let (lhs, rhs) = a_operator_bound(&rep, &bp, &s).unwrap();
        assert!(bp.mean_curvature().abs() < 1e-14);
        assert!(lhs >= rhs - 1e-10 * norm_sq(&s));
    }
}

#[test]
fn a_operator_without_dn_is_half_mean_curvature() {
    let mut rng = ChaCha8Rng::seed_from_u64(28);
    let rep = CliffordRep::new(4).unwrap();
    let mut bp = BoundaryPoint::random(&mut rng, 4);
    bp.normal_deriv = vec![vec![0.0; 4]; 3];
    let s = random_twisted(&mut rng, 4, 1.0);
    let (lhs, rhs) = a_operator_bound(&rep, &bp, &s).unwrap();
    let want = 0.5 * bp.mean_curvature() * norm_sq(&s);
    assert!((lhs - want).abs() < 1e-12 && (rhs - want).abs() < 1e-12);
}

#[test]
fn a_operator_rank_one_dn() {
    // Singular values of a rank-one map t_1 ↦ τ u are {|τ|}, so ‖dN‖_tr = |τ|.
    let mut rng = ChaCha8Rng::seed_from_u64(29);
    let rep = CliffordRep::new(4).unwrap();
    for tau in [0.3, -1.2, 2.0] {
        let mut bp = zero_bp(4, random_unit(&mut rng, 4), random_unit(&mut rng, 4));
        let u = random_orthogonal(&mut rng, &bp.normal, 1.0);
        let l = polyrig::linalg::norm(&u);
        bp.normal_deriv[0] = u.iter().map(|x| tau * x / l).collect();
        assert!((bp.dn_trace_norm() - tau.abs()).abs() < 1e-12);
        let s = random_twisted(&mut rng, 4, 1.0);
        let (lhs, rhs) = a_operator_bound(&rep, &bp, &s).unwrap();
        assert!(lhs - rhs >= -1e-12);
    }
}

#[test]
fn modified_dirac_closed_form_flat_unit_q() {
    // Flat g, q = δ, constant σ, so Dσ = 0. Even n: γ_a h(e_a) = γ_a ε γ_a = ε, hence
    // Σ_a γ_a ½ h(e_a) σ F(N0)ᵀ = (n/2) ε σ F(N0)ᵀ, which is exactly Ψσ.
    // Odd n: γ_a (i γ_a) = -i, giving -(n/2) i σ F(N0)ᵀ.
    let mut rng = ChaCha8Rng::seed_from_u64(30);
    for n in 2..=6 {
        let rep = CliffordRep::new(n).unwrap();
        let fp = flat_frame(n, 1.0);
        let n0 = random_unit(&mut rng, n);
        let ops = TwistedPointOperators::new(&rep, &fp, &n0, PsiSign::Plus).unwrap();
        let s = random_twisted(&mut rng, rep.m, 1.0);
        let ds = vec![CMat::zeros(rep.m, rep.m); n];
        let f0 = rep.flat_action(&n0).unwrap();
        let want = if n % 2 == 0 {
            &rep.epsilon * &s * f0.transpose() * c(0.5 * n as f64)
        } else {
            &s * f0.transpose() * Complex64::new(0.0, -0.5 * n as f64)
        };
        let got = ops.dirac_hat_apply(&s, &ds);
        assert!(max_abs(&(&got - &want)) <= 1e-12, "n={n}");
        assert!(max_abs(&(ops.psi_apply(&s) - &want)) <= 1e-12);
        let minus = TwistedPointOperators::new(&rep, &fp, &n0, PsiSign::Minus).unwrap();
        assert!(max_abs(&(minus.dirac_hat_apply(&s, &ds) + &want)) <= 1e-12);
        for a in 0..n {
            let v = ops.nabla_hat_apply(a, &s, &ds);
            assert!((norm_sq(&v).sqrt() - 0.5 * norm_sq(&s).sqrt()).abs() < 1e-12);
        }
    }
}

#[test]
fn trivial_sections_are_annihilated() {
    let rep = CliffordRep::new(4).unwrap();
    let fp = flat_frame(4, 0.0);
    let ops = TwistedPointOperators::new(&rep, &fp, &[1.0, 0.0, 0.0, 0.0], PsiSign::Plus).unwrap();
    let s = CMat::from_fn(4, 4, |i, j| c((i * 4 + j) as f64));
    let ds = vec![CMat::zeros(4, 4); 4];
    assert_eq!(max_abs(&ops.dirac_hat_apply(&s, &ds)), 0.0);
    for a in 0..4 {
        assert_eq!(max_abs(&ops.nabla_hat_apply(a, &s, &ds)), 0.0);
    }
}

#[test]
fn modified_dirac_two_ways() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for n in [3, 4] {
        let rep = CliffordRep::new(n).unwrap();
        let fp = conformal_frame(n);
        let n0 = random_unit(&mut rng, n);
        let plus = TwistedPointOperators::new(&rep, &fp, &n0, PsiSign::Plus).unwrap();
        let minus = TwistedPointOperators::new(&rep, &fp, &n0, PsiSign::Minus).unwrap();
        for _ in 0..10 {
            let s = random_twisted(&mut rng, rep.m, 1.0);
            let ds: Vec<CMat> = (0..n).map(|_| random_twisted(&mut rng, rep.m, 1.0)).collect();
            let direct = plus.dirac_of_nabla_hat(&s, &ds);
            assert!(max_abs(&(plus.dirac_hat_apply(&s, &ds) - &direct)) <= 1e-12);
            let gap = minus.dirac_hat_apply(&s, &ds) - &direct;
            assert!(max_abs(&(gap + plus.psi_apply(&s) * c(2.0))) <= 1e-12);
        }
    }
}

#[test]
fn dense_operator_invariants() {
    let mut rng = ChaCha8Rng::seed_from_u64(32);
    for n in [3, 4, 5] {
        let rep = CliffordRep::new(n).unwrap();
        let fp = conformal_frame(n);
        let n0 = random_unit(&mut rng, n);
        let ops = TwistedPointOperators::new(&rep, &fp, &n0, PsiSign::Plus).unwrap();
        let m2 = rep.m * rep.m;
        let id = CMat::identity(m2, m2);
        let g = ops.grading_dense();
        assert!(max_abs(&(&g * &g - &id)) <= 1e-12);
        assert!(max_abs(&(g.adjoint() - &g)) <= 1e-12);
        for a in 0..n {
            let w = ops.connection_dense(a);
            assert!(max_abs(&(w.adjoint() + &w)) <= 1e-12);
            let cd = ops.clifford_dense(a);
            assert!(max_abs(&(&cd * &cd + &id)) <= 1e-12);
            let fd = ops.flat_clifford_dense(a);
            assert!(max_abs(&(&cd * &fd - &fd * &cd)) <= 1e-12);
        }
        let psi = ops.psi_dense();
        let t = fp.trace_q();
        let sq = psi.adjoint() * &psi;
        assert!(max_abs(&(sq - &id * c(0.25 * t * t))) <= 1e-12);
        let herm = if n % 2 == 0 { psi.adjoint() - &psi } else { psi.adjoint() + &psi };
        assert!(max_abs(&herm) <= 1e-12);
        // The twisted layout matches the dense Kronecker action.
        let s = random_twisted(&mut rng, rep.m, 1.0);
        let a = random_twisted(&mut rng, rep.m, 1.0);
        let b = random_twisted(&mut rng, rep.m, 1.0);
        let k = kron(&a, &b);
        let v = to_vector(&s);
        let kv: Vec<Complex64> = (0..m2).map(|i| (0..m2).map(|j| k[(i, j)] * v[j]).sum()).collect();
        assert!(max_abs(&(from_vector(rep.m, &kv) - apply_kron(&a, &b, &s))) <= 1e-12);
    }
}

#[test]
fn connection_is_metric_along_smooth_sections() {
    // σ(x) = S0 + Σ x_c S_c; compare e_a |σ|² by central differences with 2 Re<∇_a σ, σ>.
    let n = 3;
    let rep = CliffordRep::new(n).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(33);
    let fp = conformal_frame(n);
    let ops = TwistedPointOperators::new(&rep, &fp, &[0.0, 0.0, 1.0], PsiSign::Plus).unwrap();
    let s0 = random_twisted(&mut rng, rep.m, 1.0);
    let ds: Vec<CMat> = (0..n).map(|_| random_twisted(&mut rng, rep.m, 1.0)).collect();
    let sigma = |x: &[f64]| -> CMat {
        let mut acc = s0.clone();
        for (cc, d) in ds.iter().enumerate() {
            acc += d * c(x[cc] - fp.x[cc]);
        }
        acc
    };
    let mut errs = Vec::new();
    for h in [1e-2, 5e-3] {
        let mut worst = 0.0f64;
        for a in 0..n {
            let e: Vec<f64> = (0..n).map(|cc| fp.e[(cc, a)]).collect();
            let xp: Vec<f64> = fp.x.iter().zip(&e).map(|(x, v)| x + h * v).collect();
            let xm: Vec<f64> = fp.x.iter().zip(&e).map(|(x, v)| x - h * v).collect();
            let fd = (norm_sq(&sigma(&xp)) - norm_sq(&sigma(&xm))) / (2.0 * h);
            let exact = 2.0 * re_inner(&ops.nabla_apply(a, &s0, &ds), &s0);
            worst = worst.max((fd - exact).abs());
        }
        errs.push(worst);
    }
    // |σ|² is quadratic along straight lines, so central differences are exact.
    assert!(errs.iter().all(|e| *e <= 1e-10), "{errs:?}");
    for a in 0..n {
        assert!(re_inner(&(&ops.spin[a] * &s0), &s0).abs() < 1e-12);
    }
}

#[test]
fn inner_product_is_linear_in_first_slot() {
    let mut rng = ChaCha8Rng::seed_from_u64(34);
    let u = random_twisted(&mut rng, 2, 1.0);
    let v = random_twisted(&mut rng, 2, 1.0);
    let z = Complex64::new(0.3, -1.1);
    assert!((inner(&(&u * z), &v) - z * inner(&u, &v)).norm() < 1e-14);
    assert!((inner(&u, &(&v * z)) - z.conj() * inner(&u, &v)).norm() < 1e-14);
}

proptest! {
    #[test]
    fn modified_dirac_is_linear(seed in any::<u64>(), a in -2.0..2.0f64, b in -2.0..2.0f64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rep = CliffordRep::new(4).unwrap();
        let fp = conformal_frame(4);
        let ops = TwistedPointOperators::new(&rep, &fp, &random_unit(&mut rng, 4), PsiSign::Plus).unwrap();
        let s1 = random_twisted(&mut rng, 4, 1.0);
        let s2 = random_twisted(&mut rng, 4, 1.0);
        let d1: Vec<CMat> = (0..4).map(|_| random_twisted(&mut rng, 4, 1.0)).collect();
        let d2: Vec<CMat> = (0..4).map(|_| random_twisted(&mut rng, 4, 1.0)).collect();
        let mix = &s1 * c(a) + &s2 * c(b);
        let dmix: Vec<CMat> = d1.iter().zip(&d2).map(|(x, y)| x * c(a) + y * c(b)).collect();
        let lhs = ops.dirac_hat_apply(&mix, &dmix);
        let rhs = ops.dirac_hat_apply(&s1, &d1) * c(a) + ops.dirac_hat_apply(&s2, &d2) * c(b);
        prop_assert!(max_abs(&(lhs - rhs)) <= 1e-12);
    }

    #[test]
    fn chi_is_an_involution(seed in any::<u64>(), n in 2usize..=6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rep = CliffordRep::new(n).unwrap();
        let bp = BoundaryPoint::random(&mut rng, n);
        let ops = BoundaryOperators::new(&rep, &bp).unwrap();
        let s = random_twisted(&mut rng, rep.m, 1.0);
        let twice = ops.chi_apply(&ops.chi_apply(&s));
        prop_assert!(max_abs(&(twice - &s)) <= 1e-12);
        let u = random_twisted(&mut rng, rep.m, 1.0);
        prop_assert!((inner(&ops.chi_apply(&s), &u) - inner(&s, &ops.chi_apply(&u))).norm() <= 1e-12);
    }
}
