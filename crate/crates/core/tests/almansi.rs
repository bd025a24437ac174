mod common;

use common::*;
use piezosv::case_almansi::{
    design_v2, shear_resultant, solve_almansi, solve_phi2, AlmansiBoundaryData, AlmansiOptions, FluxSign, Phi2Data,
};
use piezosv::elliptic::SolverConfig;
use piezosv::section::{best_rule, integrate_area};
use piezosv::svcore::SVConstants;
use piezosv::{EdgeTrace, Error, ScalarField2D, Section, Vec2};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn affine_phi2_exact_on_all_grids() {
    for n in [17, 33, 65, 129] {
        let s = Section::build(1.0, 1.0, n, n).unwrap();
        let bd = AlmansiBoundaryData::rectangle(0.0, 1.0);
        let phi2 = solve_phi2(&bd, &s, &SolverConfig::default()).unwrap();
        let exact = ScalarField2D::from_fn(&s, |p| p.y);
        assert!(phi2.max_abs_diff(&exact).unwrap() <= 1e-12, "n = {n}");
    }
}

/// `int r sigma'` by Simpson on the assembled profiles, against the closed form.
fn shear_by_quadrature(n: usize, rng: &mut ChaCha8Rng) -> (Vec2, Vec2) {
    let m = random_material(rng);
    let dm = m.derive().unwrap();
    let s = Section::build(rng.gen_range(0.5..2.0), rng.gen_range(0.5..2.0), n, n).unwrap();
    let (k0, k1) = (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
    let c = SVConstants { v2: random_vec2(rng), ..Default::default() };
    let bd = AlmansiBoundaryData::rectangle(k0, k1);
    let sol = solve_almansi(&c, &bd, &m, &s, 1.0, &SolverConfig::default(), &AlmansiOptions::default()).unwrap();
    let p = &sol.solution.profiles;
    let sigma_p = p.uz2.lin(dm.a1, &p.phi2, dm.b1).unwrap();
    let rule = best_rule(&s);
    let mx = ScalarField2D::from_fn(&s, |r| r.x);
    let my = ScalarField2D::from_fn(&s, |r| r.y);
    let prod = |a: &ScalarField2D| ScalarField2D {
        section: s,
        values: a.values.iter().zip(&sigma_p.values).map(|(x, y)| x * y).collect(),
    };
    let q = Vec2::new(integrate_area(&prod(&mx), rule).unwrap(), integrate_area(&prod(&my), rule).unwrap());
    let k = Vec2::new(0.0, (k1 - k0) / s.y0);
    (q, shear_resultant(c.v2, k, &dm, &s.inertia()))
}

#[test]
fn shear_identity_by_quadrature() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..5 {
        let (q, closed) = shear_by_quadrature(65, &mut rng);
        assert!((q - closed).norm() <= 1e-10 * closed.norm(), "{q:?} {closed:?}");
    }
}

#[test]
fn unit_square_shear_example() {
    let m = module_material();
    let dm = m.derive().unwrap();
    let s = Section::build(1.0, 1.0, 5, 5).unwrap();
    let v2 = Vec2::new(1.0 / dm.y, 0.0);
    let q = shear_resultant(v2, Vec2::ZERO, &dm, &s.inertia());
    assert!((q - Vec2::new(1.0 / 12.0, 0.0)).norm() < 1e-15);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn design_roundtrip(seed in any::<u64>(), qx in -10.0f64..10.0, qy in -10.0f64..10.0, kx in -2.0f64..2.0, ky in -2.0f64..2.0,
                        x0 in 0.2f64..3.0, y0 in 0.2f64..3.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = random_material(&mut rng);
        let dm = m.derive().unwrap();
        let s = Section::build(x0, y0, 5, 5).unwrap();
        let inertia = s.inertia();
        let q = Vec2::new(qx, qy);
        let k = Vec2::new(kx, ky);
        let v2 = design_v2(q, k, &dm, &inertia).unwrap();
        let back = shear_resultant(v2, k, &dm, &inertia);
        prop_assert!((back - q).norm() <= 1e-12 * q.norm(), "{:?} {:?}", back, q);
    }

    #[test]
    fn shear_is_linear_in_v2_and_k(seed in any::<u64>(), t in -3.0f64..3.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = random_material(&mut rng);
        let dm = m.derive().unwrap();
        let s = Section::build(1.0, 0.5, 5, 5).unwrap();
        let i = s.inertia();
        let (v, w, k, l) = (random_vec2(&mut rng), random_vec2(&mut rng), random_vec2(&mut rng), random_vec2(&mut rng));
        let lhs = shear_resultant(v + w * t, k + l * t, &dm, &i);
        let rhs = shear_resultant(v, k, &dm, &i) + shear_resultant(w, l, &dm, &i) * t;
        prop_assert!((lhs - rhs).norm() <= 1e-12 * (1.0 + rhs.norm()));
    }
}

#[test]
fn warping_data_compatible_with_default_sign() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..4 {
        let m = random_material(&mut rng);
        let s = Section::build(1.0, 0.7, 25, 21).unwrap();
        let c = SVConstants { v1: random_vec2(&mut rng), v2: random_vec2(&mut rng), b1: 0.3, ..Default::default() };
        let bd = AlmansiBoundaryData::rectangle(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let sol = solve_almansi(&c, &bd, &m, &s, 1.0, &SolverConfig::default(), &AlmansiOptions::default()).unwrap();
        let (defect, scale) = sol.compatibility;
        assert!(defect <= 1e-10 * scale, "{defect} {scale}");
        assert_eq!(sol.b2_correction, 0.0);
    }
}

#[test]
fn plus_sign_is_incompatible() {
    let s = Section::build(1.0, 1.0, 17, 17).unwrap();
    let c = SVConstants { v2: Vec2::new(0.4, 0.7), ..Default::default() };
    let opts = AlmansiOptions { flux_sign: FluxSign::Plus };
    let r = solve_almansi(
        &c,
        &AlmansiBoundaryData::rectangle(0.2, 1.0),
        &generic_material(),
        &s,
        1.0,
        &SolverConfig::default(),
        &opts,
    );
    assert!(matches!(r, Err(Error::IncompatibleData { .. })), "{r:?}");
}

/// Affine data given as a general trace follow the discrete route and agree
/// with the closed-form route up to discretization error.
#[test]
fn trace_route_matches_affine_route() {
    let m = generic_material();
    let c = generic_almansi_constants();
    let cfg = SolverConfig::default();
    let mut errs = Vec::new();
    for n in [17, 33, 65] {
        let s = Section::build(1.0, 0.8, n, n).unwrap();
        let lin = AlmansiBoundaryData::rectangle(0.1, 0.6);
        let k = Vec2::new(0.0, 0.5 / s.y0);
        let tr = AlmansiBoundaryData {
            phi2: Phi2Data::Trace(EdgeTrace::from_fn(&s, |p, _| 0.1 + k.dot(p))),
            ..lin.clone()
        };
        let a = solve_almansi(&c, &lin, &m, &s, 1.0, &cfg, &AlmansiOptions::default()).unwrap();
        let b = solve_almansi(&c, &tr, &m, &s, 1.0, &cfg, &AlmansiOptions::default()).unwrap();
        assert!(b.b2_correction.abs() < 1e-10);
        errs.push(a.solution.uz(0.7).max_abs_diff(&b.solution.uz(0.7)).unwrap());
        assert!(a.solution.u_pi(0.7).max_abs_diff(&b.solution.u_pi(0.7)).unwrap() < 1e-8);
    }
    assert!(errs.iter().all(|e| *e < 1e-8), "{errs:?}");
}

#[test]
fn nonaffine_trace_is_solved() {
    let s = Section::build(1.0, 0.8, 33, 33).unwrap();
    let bd = AlmansiBoundaryData {
        phi2: Phi2Data::Trace(EdgeTrace::from_fn(&s, |p, _| p.x * p.x - p.y * p.y + 0.3 * p.x * p.y)),
        phi1_trace: None,
        phi0_trace: None,
    };
    let sol = solve_almansi(
        &generic_almansi_constants(),
        &bd,
        &generic_material(),
        &s,
        1.0,
        &SolverConfig::default(),
        &AlmansiOptions::default(),
    )
    .unwrap();
    assert!(!sol.solution.has_nan());
    let (defect, scale) = sol.compatibility;
    assert!(defect <= 1e-10 * scale);
    assert!(sol.resultants.routes_agree(1e-10));
}

#[test]
fn resultant_routes_agree_on_generic_case() {
    let (sol, _) = generic_almansi(33);
    let r = sol.resultants;
    assert!((r.shear - r.shear_quadrature).norm() <= 1e-10 * r.shear.norm());
    assert!((r.axial_force - r.axial_force_quadrature).abs() <= 1e-10 * r.axial_force.abs().max(1.0));
}
