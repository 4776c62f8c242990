use num_complex::Complex64;
use polyrig::convergence::OrderStudy;
use polyrig::fields::{FaceGeometry, Level, Param, Params};
use polyrig::linalg::{c, dot, max_abs, norm, random_unit, rotate_towards_random, CVec};
use polyrig::sl::{random_twisted, PolySection};
use polyrig::transport::*;
use polyrig::{CliffordRep, Error, FieldSet, GridSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, PI};

fn en(n: usize) -> Vec<f64> {
    let mut v = vec![0.0; n];
    v[n - 1] = 1.0;
    v
}

fn unit_box(n: usize, res: usize) -> GridSpec {
    GridSpec::covering(&vec![0.0; n], &vec![1.0; n], res).unwrap()
}

fn hyperbolic(n: usize, res: usize, bump: f64) -> FieldSet {
    let lo: Vec<f64> = (0..n).map(|k| if k == n - 1 { 1.0 } else { 0.0 }).collect();
    let hi: Vec<f64> = (0..n).map(|k| if k == n - 1 { 2.0 } else { 1.0 }).collect();
    let mut p = Params::new();
    if bump != 0.0 {
        p.insert("bump".into(), Param::Number(bump));
    }
    FieldSet::preset("hyperbolic_uhs", &p, GridSpec::covering(&lo, &hi, res).unwrap()).unwrap()
}

fn choices(rng: &mut ChaCha8Rng, rep: &CliffordRep, n0: &[f64]) -> ConservedChoices {
    let normal = rotate_towards_random(rng, n0, 1.1);
    ConservedChoices::random(rng, rep, n0, &normal).unwrap()
}

#[test]
fn constant_q_matches_exponential() {
    let mut rng = ChaCha8Rng::seed_from_u64(60);
    for n in [3, 4, 5] {
        let rep = CliffordRep::new(n).unwrap();
        let mut p = Params::new();
        p.insert("q_scale".into(), Param::Number(1.0));
        let f = FieldSet::preset("flat", &p, unit_box(n, 6)).unwrap();
        for _ in 0..3 {
            let a: Vec<f64> = (0..n).map(|_| rng.random_range(0.05..0.95)).collect();
            let b: Vec<f64> = (0..n).map(|_| rng.random_range(0.05..0.95)).collect();
            let seg = Segment::new(a, b).unwrap();
            let n0 = random_unit(&mut rng, n);
            let s0 = random_twisted(&mut rng, rep.m, 1.0);
            let traj = transport(&f, &rep, &n0, &seg, &s0, 200).unwrap();
            let exact = killing_exponential(&rep, &n0, &seg.velocity(), 1.0, &s0).unwrap();
            assert!(max_abs(&(&traj.last().unwrap().s - exact)) <= 1e-10, "n={n}");
            let half = killing_exponential(&rep, &n0, &seg.velocity(), 0.5, &s0).unwrap();
            assert!(max_abs(&(&traj[100].s - half)) <= 1e-10);
        }
    }
}

#[test]
fn drift_is_fourth_order_in_step() {
    let n = 4;
    let rep = CliffordRep::new(n).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(61);
    let n0 = en(n);
    let ch = choices(&mut rng, &rep, &n0);
    let res = 8;
    let f = hyperbolic(n, res, 0.0);
    let mut idx = vec![res / 2; n];
    idx[n - 1] = 1;
    let seg = Segment::along_grid(&f.grid, &idx, n - 1, (res - 2) as i64).unwrap();
    let s0 = random_twisted(&mut rng, rep.m, 1.0);
    let drifts: Vec<DriftReport> = [1, 2, 4, 8]
        .iter()
        .map(|k| conserved_drift(&rep, &transport(&f, &rep, &n0, &seg, &s0, k * (res - 2)).unwrap(), &n0, &ch).unwrap())
        .collect();
    for pick in [|d: &DriftReport| d.c1, |d: &DriftReport| d.c2, |d: &DriftReport| d.c3] {
        let e: Vec<f64> = drifts.iter().map(pick).collect();
        assert!(e[0] > 1e-10, "drift must be measurable: {e:?}");
        let s = OrderStudy::new(e.clone(), 2.0, 3.5, 1e-14);
        assert!(s.passes, "{e:?} {:?}", s.orders);
    }
}

#[test]
fn long_hyperbolic_run_conserves() {
    let n = 4;
    let rep = CliffordRep::new(n).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(62);
    let n0 = en(n);
    let ch = choices(&mut rng, &rep, &n0);
    let f = hyperbolic(n, 10, 0.0);
    let mut idx = vec![3; n];
    idx[n - 1] = 0;
    let seg = Segment::along_grid(&f.grid, &idx, n - 1, 10).unwrap();
    let s0 = random_twisted(&mut rng, rep.m, 1.0);
    let traj = transport(&f, &rep, &n0, &seg, &s0, 1000).unwrap();
    let d = conserved_drift(&rep, &traj, &n0, &ch).unwrap();
    assert!(d.max() <= 1e-10, "{d:?}");
    assert!(d.max_w_excess <= 1e-12);
}

#[test]
fn minkowski_segments_conserve_and_respect_cauchy_schwarz() {
    let n = 3;
    let rep = CliffordRep::new(n).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(63);
    let mut p = Params::new();
    p.insert("wave".into(), Param::List(vec![1.0, 0.7, 0.4]));
    let f = FieldSet::preset("minkowski_graph", &p, unit_box(n, 12)).unwrap();
    let n0 = en(n);
    let ch = choices(&mut rng, &rep, &n0);
    let mut jobs = Vec::new();
    for _ in 0..8 {
        let axis = rng.random_range(0..n);
        let idx: Vec<usize> = (0..n).map(|_| rng.random_range(0..=4)).collect();
        let seg = Segment::along_grid(&f.grid, &idx, axis, rng.random_range(3..=7)).unwrap();
        jobs.push((seg, random_twisted(&mut rng, rep.m, 1.0)));
    }
    let many = transport_many(&f, &rep, &n0, &jobs, 16 * 7).unwrap();
    for (traj, (seg, s0)) in many.into_iter().zip(&jobs) {
        let traj = traj.unwrap();
        let single = transport(&f, &rep, &n0, seg, s0, 16 * 7).unwrap();
        assert_eq!(traj.last().unwrap().s, single.last().unwrap().s);
        let d = conserved_drift(&rep, &traj, &n0, &ch).unwrap();
        assert!(d.max() <= 1e-9, "{d:?}");
        assert!(d.max_w_excess <= 1e-12);
        // Two-component spinors always saturate |W| = f.
        for st in &traj {
            let sc = spinor_scalars(&rep, &st.s, &ch.c);
            assert!(rigidity_defect(&rep, &sc).unwrap() <= 1e-10 * (1.0 + sc.f));
        }
    }
}

#[test]
fn orthogonality_propagates() {
    let n = 4;
    let rep = CliffordRep::new(n).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(64);
    let n0 = en(n);
    let mut ch = choices(&mut rng, &rep, &n0);
    let f = hyperbolic(n, 8, 0.0);
    let seg = Segment::along_grid(&f.grid, &[2, 5, 3, 1], 3, 6).unwrap();
    let s0 = random_twisted(&mut rng, rep.m, 1.0);
    // Make ⟨ψ_+, ψ_-⟩ vanish at t = 0 by adjusting c_- within Λ_-.
    let psi_p = pair_with(&ch.c_plus, &s0);
    let v = CVec::from_fn(rep.m, |_, _| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
    let cand = project_lambda(&rep, &n0, &v, -1.0).unwrap();
    let alt = project_lambda(&rep, &n0, &(&cand * c(0.3) + &ch.c_minus), -1.0).unwrap();
    let g = |cm: &CVec| polyrig::linalg::inner_vec(&psi_p, &pair_with(cm, &s0));
    let (a, b) = (g(&ch.c_minus), g(&alt));
    assert!((b - a).norm() > 1e-8);
    let t = -a / (b - a);
    let mixed = &ch.c_minus + (&alt - &ch.c_minus) * t;
    ch.c_minus = project_lambda(&rep, &n0, &mixed, -1.0).unwrap();
    let start = conserved(&rep, &s0, &ch).unwrap();
    assert!(start.c2.norm() <= 1e-12, "{:?}", start.c2);
    let traj = transport(&f, &rep, &n0, &seg, &s0, 240).unwrap();
    for st in &traj {
        assert!(conserved(&rep, &st.s, &ch).unwrap().c2.norm() <= 1e-10);
    }
}

#[test]
fn choices_are_validated() {
    let rep = CliffordRep::new(4).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(65);
    let n0 = en(4);
    let mut ch = choices(&mut rng, &rep, &n0);
    assert!(ch.check(&rep, &n0).is_ok());
    assert!(ConservedChoices::random(&mut rng, &rep, &n0, &n0).is_err());
    std::mem::swap(&mut ch.c_plus, &mut ch.c_minus);
    assert!(matches!(ch.check(&rep, &n0), Err(Error::NotInEigenspace { .. })));
    let f = FieldSet::preset("flat", &Params::new(), unit_box(4, 4)).unwrap();
    let out = Segment::new(vec![0.5; 4], vec![1.5, 0.5, 0.5, 0.5]).unwrap();
    let s0 = random_twisted(&mut rng, rep.m, 1.0);
    assert!(matches!(transport(&f, &rep, &n0, &out, &s0, 4), Err(Error::OutsideGrid { .. })));
    assert!(transport(&f, &rep, &n0, &Segment::new(vec![0.5; 4], vec![0.6; 4]).unwrap(), &s0, 0).is_err());
}

fn angled_pair(rng: &mut ChaCha8Rng, n: usize, theta: f64) -> (Vec<f64>, Vec<f64>) {
    let a = random_unit(rng, n);
    let b = if theta == 0.0 { a.clone() } else { rotate_towards_random(rng, &a, theta) };
    (a, b)
}

#[test]
fn capillary_identity_on_leaves() {
    let mut rng = ChaCha8Rng::seed_from_u64(66);
    for n in [3, 4, 5] {
        let rep = CliffordRep::new(n).unwrap();
        for theta in [0.0, FRAC_PI_3, FRAC_PI_2] {
            let mut control = 0.0f64;
            for _ in 0..10 {
                let (normal, n0) = angled_pair(&mut rng, n, theta);
                let (nu, xi) = angled_pair(&mut rng, n, theta);
                let cv = random_lambda(&mut rng, &rep, &n0, 1.0).unwrap();
                let s = random_twisted(&mut rng, rep.m, 1.0);
                let r = capillary_residual(&rep, &s, &nu, &xi, &normal, &n0, &cv, CapillaryProjection::Leaf).unwrap();
                assert!(r.residual <= 1e-10, "n={n} θ={theta}: {r:?}");
                assert!(r.boundary_defect <= 1e-10 && r.leaf_defect <= 1e-10);
                assert!((r.cos_theta - theta.cos()).abs() < 1e-12);
                let b = capillary_residual(&rep, &s, &nu, &xi, &normal, &n0, &cv, CapillaryProjection::BoundaryOnly).unwrap();
                control = control.max(b.residual);
            }
            if theta != 0.0 {
                assert!(control > 1e-2, "boundary condition alone should not suffice: n={n} θ={theta}");
            }
        }
    }
}

#[test]
fn capillary_inputs_are_checked() {
    let rep = CliffordRep::new(3).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(67);
    let n0 = en(3);
    let cv = random_lambda(&mut rng, &rep, &n0, 1.0).unwrap();
    let s = random_twisted(&mut rng, rep.m, 1.0);
    let e1 = vec![1.0, 0.0, 0.0];
    let bad = capillary_residual(&rep, &s, &e1, &e1, &e1, &n0, &cv, CapillaryProjection::Leaf);
    assert!(matches!(bad, Err(Error::Config(_))));
    let wrong = random_lambda(&mut rng, &rep, &n0, -1.0).unwrap();
    let bad = capillary_residual(&rep, &s, &n0, &n0, &n0, &n0, &wrong, CapillaryProjection::Leaf);
    assert!(matches!(bad, Err(Error::NotInEigenspace { .. })));
}

#[test]
fn boundary_2ff_on_flat_planes() {
    let mut rng = ChaCha8Rng::seed_from_u64(68);
    let n = 3;
    let f = FieldSet::preset("flat", &Params::new(), unit_box(n, 4)).unwrap();
    for theta in [0.0, FRAC_PI_3, FRAC_PI_2] {
        for _ in 0..5 {
            let x: Vec<f64> = (0..n).map(|_| rng.random_range(0.2..0.8)).collect();
            let fp = f.frame_at(&x, Level::Connection).unwrap();
            let normal = random_unit(&mut rng, n);
            let fg = FaceGeometry::at(&fp, &normal, None).unwrap();
            let xi = if theta == 0.0 { fg.nu_frame.clone() } else { rotate_towards_random(&mut rng, &fg.nu_frame, theta) };
            assert!((dot(&xi, &fg.nu_frame) - theta.cos()).abs() < 1e-12);
            let r = boundary_2ff_residual(&fg, &fp.q, &xi, theta).unwrap();
            assert!(r.identity <= 1e-10);
            if theta == 0.0 {
                assert!(r.geodesic.is_none());
            } else {
                assert!(r.geodesic.unwrap() <= 1e-10);
            }
        }
    }
    let fp = f.frame_at(&[0.5; 3], Level::Connection).unwrap();
    let fg = FaceGeometry::at(&fp, &[0.0, 0.0, 1.0], None).unwrap();
    assert!(matches!(leaf_boundary_geodesic_residual(&fg, &fp.q, &fg.nu_frame, PI), Err(Error::InvalidAngle(_))));
}

fn horizontal_2ff(res: usize, bump: f64) -> f64 {
    let f = hyperbolic(3, res, bump);
    let mut worst = 0.0f64;
    for x in [[0.3, 0.4, 1.3], [0.5, 0.7, 1.6], [0.25, 0.6, 1.5]] {
        let fp = f.frame_at(&x, Level::Connection).unwrap();
        let fg = FaceGeometry::at(&fp, &[0.0, 0.0, 1.0], None).unwrap();
        let r = boundary_2ff_residual(&fg, &fp.q, &fg.nu_frame, 0.0).unwrap();
        worst = worst.max(r.identity);
    }
    worst
}

#[test]
fn boundary_2ff_on_horospheres_is_second_order() {
    let e: Vec<f64> = [8, 16, 32].iter().map(|&r| horizontal_2ff(r, 0.0)).collect();
    let s = OrderStudy::new(e.clone(), 2.0, 1.7, 1e-10);
    assert!(s.passes, "{e:?} {:?}", s.orders);
}

#[test]
fn boundary_2ff_perturbed_data_fails() {
    let e: Vec<f64> = [16, 32].iter().map(|&r| horizontal_2ff(r, 0.2)).collect();
    assert!(e[1] > 1e-2, "{e:?}");
    assert!(e[1] > 0.5 * e[0], "perturbed residual must not shrink: {e:?}");
}

#[test]
fn w_gradient_identities() {
    let n = 4;
    let rep = CliffordRep::new(n).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(69);
    let n0 = en(n);
    let u = random_unit(&mut rng, n);
    let kappa = 0.8;
    let qm: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| kappa * u[i] * u[j]).collect()).collect();
    let mut p = Params::new();
    p.insert("q_matrix".into(), Param::Matrix(qm));
    let f = FieldSet::preset("flat", &p, unit_box(n, 6)).unwrap();
    let cv = random_lambda(&mut rng, &rep, &n0, 1.0).unwrap();
    let sec = ExponentialKilling::new(&rep, &n0, &u, kappa, random_twisted(&mut rng, rep.m, 1.0)).unwrap();
    let pts: Vec<Vec<f64>> = (0..5).map(|_| (0..n).map(|_| rng.random_range(0.2..0.8)).collect()).collect();
    let reports: Vec<WGradientReport> =
        [1e-2, 5e-3, 2.5e-3].iter().map(|&h| w_gradient_residual(&f, &rep, &sec, &cv, &pts, h).unwrap()).collect();
    assert!(reports[0].f_residual_exact <= 1e-10 && reports[0].w_residual_exact <= 1e-10 && reports[0].curl <= 1e-10);
    let fd: Vec<f64> = reports.iter().map(|r| r.f_residual_fd.max(r.w_residual_fd)).collect();
    assert!(OrderStudy::new(fd.clone(), 2.0, 1.7, 1e-10).passes, "{fd:?}");
    // A generic section is not killing.
    let generic = PolySection::random(&mut rng, vec![0.5; n], rep.m, 2, 5, 0.7);
    let r = w_gradient_residual(&f, &rep, &generic, &cv, &pts, 1e-3).unwrap();
    assert!(r.f_residual_exact.max(r.w_residual_exact) > 1e-3);
    assert!(ExponentialKilling::new(&rep, &n0, &[1.0, 1.0, 0.0, 0.0], kappa, random_twisted(&mut rng, rep.m, 1.0)).is_err());
}

#[test]
fn scalars_obey_cauchy_schwarz_for_random_states() {
    let mut rng = ChaCha8Rng::seed_from_u64(70);
    for n in [3, 4, 5, 6] {
        let rep = CliffordRep::new(n).unwrap();
        for _ in 0..20 {
            let s = random_twisted(&mut rng, rep.m, 1.0);
            let cv = CVec::from_fn(rep.m, |_, _| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
            let sc = spinor_scalars(&rep, &s, &cv);
            assert!(norm(&sc.w) <= sc.f * (1.0 + 1e-12));
        }
    }
}

proptest::proptest! {
    #![proptest_config(proptest::prelude::ProptestConfig::with_cases(24))]

    #[test]
    fn flat_constant_q_transport_conserves(seed in 0u64..10_000, n in 3usize..=5, scale in -1.0f64..1.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rep = CliffordRep::new(n).unwrap();
        let mut p = Params::new();
        p.insert("q_scale".into(), Param::Number(scale));
        let f = FieldSet::preset("flat", &p, unit_box(n, 4)).unwrap();
        let a: Vec<f64> = (0..n).map(|_| rng.random_range(0.1..0.9)).collect();
        let b: Vec<f64> = (0..n).map(|_| rng.random_range(0.1..0.9)).collect();
        let seg = Segment::new(a, b).unwrap();
        let n0 = random_unit(&mut rng, n);
        let ch = choices(&mut rng, &rep, &n0);
        let s0 = random_twisted(&mut rng, rep.m, 1.0);
        let traj = transport(&f, &rep, &n0, &seg, &s0, 64).unwrap();
        let d = conserved_drift(&rep, &traj, &n0, &ch).unwrap();
        proptest::prop_assert!(d.max() <= 1e-10, "{:?}", d);
        proptest::prop_assert!(d.max_w_excess <= 1e-12);
    }
}
