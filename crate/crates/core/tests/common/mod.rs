#![allow(dead_code)]

use piezosv::case_almansi::{solve_almansi, AlmansiBoundaryData, AlmansiOptions, AlmansiSolution};
use piezosv::case_fluxfree::{solve_fluxfree, FluxFreeSolution};
use piezosv::elliptic::SolverConfig;
use piezosv::svcore::{check_nondegeneracy, SVConstants};
use piezosv::verify::LateralCondition;
use piezosv::{derive_moduli, EdgeTrace, MaterialTip, Section, Vec2};
use rand::Rng;

pub fn module_material() -> MaterialTip {
    MaterialTip::from_array([1.0, 0.0, 2.0, 0.0, 0.0, 0.0, 0.0, 1.0, 1.0, 1.0])
}

/// A material whose moduli are all of order one and which passes every
/// degeneracy check.
pub fn random_material<R: Rng>(rng: &mut R) -> MaterialTip {
    loop {
        let m = MaterialTip::from_array([
            rng.gen_range(0.5..2.0),
            rng.gen_range(0.1..1.5),
            rng.gen_range(1.5..4.0),
            rng.gen_range(0.2..1.0),
            rng.gen_range(2.0..5.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(0.5..2.0),
            rng.gen_range(0.5..2.0),
        ]);
        let Ok(dm) = derive_moduli(&m) else { continue };
        let nd = check_nondegeneracy(&m, &dm);
        let pc = 2.0 * m.alpha2 * m.beta2 - m.alpha1 * m.beta1;
        if nd.margin() > 1e-2 && dm.dc.abs() > 1e-2 && dm.y.abs() > 1e-2 && pc.abs() > 1e-2 {
            return m;
        }
    }
}

pub fn random_vec2<R: Rng>(rng: &mut R) -> Vec2 {
    Vec2::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

pub fn generic_material() -> MaterialTip {
    MaterialTip::from_array([1.3, 0.6, 2.4, 0.5, 3.2, 0.35, -0.45, 0.3, 1.1, 0.9])
}

pub fn generic_fluxfree_constants() -> SVConstants {
    SVConstants {
        v1: Vec2::new(0.3, -0.2),
        v2: Vec2::new(0.5, 0.4),
        b1: 0.7,
        phi1_tilde0: 0.2,
        ..Default::default()
    }
}

pub fn generic_fluxfree(n: usize) -> FluxFreeSolution {
    let s = Section::build(1.0, 0.8, n, n).unwrap();
    solve_fluxfree(&generic_fluxfree_constants(), &generic_material(), &s, 2.0, &SolverConfig::default()).unwrap()
}

pub fn generic_almansi_data(s: &Section) -> AlmansiBoundaryData {
    let mut bd = AlmansiBoundaryData::rectangle(0.1, 0.6);
    bd.phi1_trace = Some(EdgeTrace::from_fn(s, |p, _| 0.3 * p.x * p.y - 0.1 * p.x));
    bd.phi0_trace = Some(EdgeTrace::from_fn(s, |p, _| 0.2 * (p.x * p.x - p.y * p.y) + 0.05 * p.y));
    bd
}

pub fn generic_almansi_constants() -> SVConstants {
    SVConstants { v1: Vec2::new(-0.25, 0.15), v2: Vec2::new(0.4, -0.3), b1: 0.5, phi1_tilde0: -0.1, ..Default::default() }
}

pub fn generic_almansi(n: usize) -> (AlmansiSolution, LateralCondition) {
    let s = Section::build(1.0, 0.8, n, n).unwrap();
    let bd = generic_almansi_data(&s);
    let sol = solve_almansi(
        &generic_almansi_constants(),
        &bd,
        &generic_material(),
        &s,
        2.0,
        &SolverConfig::default(),
        &AlmansiOptions::default(),
    )
    .unwrap();
    let phi2 = sol.solution.profiles.phi2.trace();
    let lateral = LateralCondition::Potential {
        phi0: bd.phi0_trace.clone().unwrap(),
        phi1: bd.phi1_trace.clone().unwrap(),
        phi2,
    };
    (sol, lateral)
}
