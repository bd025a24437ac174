//! Unloaded lateral wall with zero normal electric displacement.
//!
//! Everything but the order-zero profiles is closed form: `phi2 = 0`,
//! `phi1` is constant, `u_z` coefficients of order one and two are affine, and
//! both in-plane fields are quadratic. `u~0` and `phi~0` solve Neumann
//! problems whose compatibility is guaranteed by the centroid choice of `b2`.

use crate::elliptic::{compatibility, solve_neumann, NeumannProblem, SolverConfig};
use crate::error::{Degeneracy, Error, Result};
use crate::material::{derive_moduli, is_degenerate, DerivedModuli, MaterialTip, Vec2};
use crate::section::{best_rule, integrate_area, EdgeTrace, ScalarField2D, Section};
use crate::svcore::{
    assemble, check_nondegeneracy, invert_tilde, spherical_closed_form, AxialProfiles, SVConstants,
    Solution3D,
};

/// End-section resultants. Quantities with a `_quadrature` twin are computed
/// both from closed forms and by integrating the assembled fields at `z = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Resultants {
    pub axial_force: f64,
    pub axial_force_quadrature: f64,
    pub d_flux: f64,
    pub d_flux_quadrature: f64,
    /// Potential drop between the bases, `2 L phi1` (section mean of `phi1`).
    pub potential_difference: f64,
    /// `int r sigma'`
    pub shear: Vec2,
    pub shear_quadrature: Vec2,
}

impl Resultants {
    /// Largest relative disagreement between the closed-form and quadrature routes.
    pub fn route_mismatch(&self) -> f64 {
        let rel = |a: f64, b: f64| {
            let s = a.abs().max(b.abs());
            if s == 0.0 {
                0.0
            } else {
                (a - b).abs() / s
            }
        };
        let sv = self.shear.norm().max(self.shear_quadrature.norm());
        let shear = if sv == 0.0 { 0.0 } else { (self.shear - self.shear_quadrature).norm() / sv };
        rel(self.axial_force, self.axial_force_quadrature)
            .max(rel(self.d_flux, self.d_flux_quadrature))
            .max(shear)
    }

    pub fn routes_agree(&self, rtol: f64) -> bool {
        self.route_mismatch() <= rtol
    }

    pub fn is_finite(&self) -> bool {
        [
            self.axial_force,
            self.axial_force_quadrature,
            self.d_flux,
            self.d_flux_quadrature,
            self.potential_difference,
        ]
        .iter()
        .all(|v| v.is_finite())
            && self.shear.is_finite()
            && self.shear_quadrature.is_finite()
    }
}

#[derive(Debug, Clone)]
pub struct FluxFreeSolution {
    pub solution: Solution3D,
    /// Coefficients of `w0 = lambda0 r + [(lambda1.r) r + (*lambda1.r) *r]/2 + mu1_0 *r`.
    pub lambda0: f64,
    pub lambda1: Vec2,
    pub resultants: Resultants,
    /// `(defect, scale)` of the `phi~0` and `u~0` Neumann problems.
    pub compatibility: [(f64, f64); 2],
}

/// Axial-profile constants of the extension part: `u1 = v1.r/alpha1 + u1c`, `phi1 = p1`.
pub(crate) fn extension_constants(c: &SVConstants, m: &MaterialTip, dm: &DerivedModuli) -> (f64, f64) {
    let u1c = (m.gamma1 * c.b1 - 2.0 * m.beta2 * c.phi1_tilde0) / dm.dc;
    let p1 = (m.alpha1 * c.phi1_tilde0 + 0.5 * (m.beta1 + m.beta2) * c.b1) / dm.dc;
    (u1c, p1)
}

/// `lambda0 = -(alpha2 u1c + beta1 p1) / (2 (mu + lambda))`.
pub fn lambda0(c: &SVConstants, m: &MaterialTip) -> Result<f64> {
    let dm = derive_moduli(m)?;
    let (u1c, p1) = extension_constants(c, m, &dm);
    Ok(-(m.alpha2 * u1c + m.beta1 * p1) / (2.0 * m.plane_bulk()))
}

/// Value of `phi~1^0` that removes the lateral contraction in pure extension
/// (`lambda0 = 0`).
pub fn poisson_cancel_potential(b1: f64, m: &MaterialTip) -> Result<f64> {
    let den = 2.0 * m.alpha2 * m.beta2 - m.alpha1 * m.beta1;
    let scale = (2.0 * m.alpha2 * m.beta2).abs() + (m.alpha1 * m.beta1).abs();
    if is_degenerate(den, scale) {
        return Err(Error::DegenerateMaterial(Degeneracy::PoissonCancel));
    }
    Ok(b1 * (m.alpha2 * m.gamma1 + 0.5 * m.beta1 * (m.beta1 + m.beta2)) / den)
}

pub fn solve_fluxfree(
    c: &SVConstants,
    m: &MaterialTip,
    s: &Section,
    half_length: f64,
    cfg: &SolverConfig,
) -> Result<FluxFreeSolution> {
    let dm = derive_moduli(m)?;
    if !check_nondegeneracy(m, &dm).pass {
        return Err(Error::DegenerateMaterial(Degeneracy::Bracket));
    }
    if !c.is_finite() {
        return Err(Error::InvalidInput("constants must be finite".into()));
    }
    if c.k0 != 0.0 || c.k != Vec2::ZERO {
        return Err(Error::InvalidInput("k0 and k belong to the Almansi case".into()));
    }
    let rb = s.inertia().centroid;
    let a1 = m.alpha1;
    let bs = m.beta1 + m.beta2;
    let pb = m.plane_bulk();

    let mut c = *c;
    c.b2 = -c.v2.dot(rb);
    c.phi2_tilde0 = bs * c.v2.dot(rb) / (2.0 * a1);

    let (u1c, p1c) = extension_constants(&c, m, &dm);
    let mut prof = AxialProfiles::zeros(s);
    prof.uz1 = ScalarField2D::affine(s, u1c, c.v1 * (1.0 / a1));
    prof.phi1 = ScalarField2D::constant(s, p1c);
    prof.uz2 = ScalarField2D::affine(s, -c.v2.dot(rb) / a1, c.v2 * (1.0 / a1));

    let a_w1 = c.v2 * dm.z4;
    let c_w1 = -dm.z4 * c.v2.dot(rb);
    let w1 = spherical_closed_form(s, a_w1, c_w1, c.mu2_0);
    let w1n = w1.normal_trace();

    let phi_prob = NeumannProblem {
        rhs: prof.uz2.map(|v| -dm.f2 * v),
        flux: w1n.map(|v| 0.5 * bs * v),
    };
    let u_prob = NeumannProblem {
        rhs: prof.uz2.map(|v| -dm.f3 * v),
        flux: w1n.map(|v| -a1 * v),
    };
    let compat = [compatibility(&phi_prob)?, compatibility(&u_prob)?];
    let phit0 = solve_neumann(&phi_prob, cfg)?;
    let ut0 = solve_neumann(&u_prob, cfg)?;
    let (u0, p0) = invert_tilde(&ut0, &phit0, m)?;
    prof.uz0 = u0;
    prof.phi0 = p0;

    let lambda1 = c.v1 * (-m.alpha2 / (2.0 * a1 * pb));
    let lambda0 = -(m.alpha2 * u1c + m.beta1 * p1c) / (2.0 * pb);
    let w0 = spherical_closed_form(s, lambda1, lambda0, c.mu1_0);

    let solution = assemble(prof, w0, w1, c, half_length, a1)?;
    let resultants = resultants_fluxfree(&solution, m, s, half_length)?;
    Ok(FluxFreeSolution { solution, lambda0, lambda1, resultants, compatibility: compat })
}

/// `int r f dA` with the best available rule.
pub(crate) fn first_moment(f: &ScalarField2D) -> Result<Vec2> {
    let s = f.section;
    let rule = best_rule(&s);
    let fx = ScalarField2D::from_fn(&s, |p| p.x);
    let fy = ScalarField2D::from_fn(&s, |p| p.y);
    let mx = ScalarField2D { section: s, values: f.values.iter().zip(&fx.values).map(|(a, b)| a * b).collect() };
    let my = ScalarField2D { section: s, values: f.values.iter().zip(&fy.values).map(|(a, b)| a * b).collect() };
    Ok(Vec2::new(integrate_area(&mx, rule)?, integrate_area(&my, rule)?))
}

/// Quadrature of `(int sigma, int D_z, int r sigma')` at `z = 0`, using
/// `sigma = A1 u_z' + B1 phi'` and `D_z = B2 u_z' + A2 phi'` (valid under `T^ = 0`).
pub(crate) fn quadrature_resultants(sol: &Solution3D, dm: &DerivedModuli) -> Result<(f64, f64, Vec2)> {
    let p = &sol.profiles;
    let rule = best_rule(&p.uz1.section);
    let sigma = p.uz1.lin(dm.a1, &p.phi1, dm.b1)?;
    let dz = p.uz1.lin(dm.b2, &p.phi1, dm.a2)?;
    let sigma_p = p.uz2.lin(dm.a1, &p.phi2, dm.b1)?;
    Ok((integrate_area(&sigma, rule)?, integrate_area(&dz, rule)?, first_moment(&sigma_p)?))
}

pub fn resultants_fluxfree(sol: &Solution3D, m: &MaterialTip, s: &Section, half_length: f64) -> Result<Resultants> {
    let dm = derive_moduli(m)?;
    let inertia = s.inertia();
    let c = &sol.constants;
    let (u1c, p1c) = extension_constants(c, m, &dm);
    let eta_mean = c.v1.dot(inertia.centroid) / m.alpha1 + u1c;
    let (fq, dq, sq) = quadrature_resultants(sol, &dm)?;
    Ok(Resultants {
        axial_force: inertia.area * (dm.a1 * eta_mean + dm.b1 * p1c),
        axial_force_quadrature: fq,
        d_flux: inertia.area * (dm.b2 * eta_mean + dm.a2 * p1c),
        d_flux_quadrature: dq,
        potential_difference: 2.0 * half_length * sol.profiles.phi1.mean(),
        shear: inertia.apply_euler(c.v2 * dm.y),
        shear_quadrature: sq,
    })
}

/// The two lateral-flux traces used by [`solve_fluxfree`], exposed for checks.
pub fn lateral_flux_traces(sol: &FluxFreeSolution, m: &MaterialTip) -> (EdgeTrace, EdgeTrace) {
    let w1n = sol.solution.u_pi1.normal_trace();
    (w1n.map(|v| 0.5 * (m.beta1 + m.beta2) * v), w1n.map(|v| -m.alpha1 * v))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mat() -> MaterialTip {
        MaterialTip {
            mu: 1.0,
            lambda_: 0.4,
            alpha1: 1.5,
            alpha2: 0.6,
            alpha3: 0.8,
            beta1: 0.3,
            beta2: 0.5,
            beta3: 1.2,
            gamma1: 1.1,
            gamma2: 0.9,
        }
    }

    fn sec() -> Section {
        Section::build(1.2, 0.8, 17, 13).unwrap()
    }

    #[test]
    fn zero_constants_zero_solution() {
        let sol = solve_fluxfree(&SVConstants::default(), &mat(), &sec(), 2.0, &SolverConfig::default()).unwrap();
        let s3 = &sol.solution;
        assert_eq!(s3.uz(0.5).max_abs(), 0.0);
        assert_eq!(s3.phi(0.5).max_abs(), 0.0);
        assert_eq!(s3.u_pi(0.5).max_norm(), 0.0);
        assert_eq!(sol.resultants.axial_force, 0.0);
        assert_eq!(sol.resultants.shear, Vec2::ZERO);
    }

    #[test]
    fn pure_extension_structure() {
        let m = mat();
        let c = SVConstants { b1: 0.7, phi1_tilde0: -0.2, ..Default::default() };
        let sol = solve_fluxfree(&c, &m, &sec(), 1.0, &SolverConfig::default()).unwrap();
        let p = &sol.solution.profiles;
        assert_eq!(p.phi2.max_abs(), 0.0);
        assert_eq!(p.uz2.max_abs(), 0.0);
        assert!(p.uz0.max_abs() < 1e-14 && p.phi0.max_abs() < 1e-14);
        assert_eq!(sol.solution.u_pi1.max_norm(), 0.0);
        let expect = crate::section::VectorField2D::from_fn(&sec(), |r| r * sol.lambda0);
        assert!(sol.solution.u_pi0.max_abs_diff(&expect).unwrap() < 1e-15);
        assert!((sol.lambda0 - lambda0(&c, &m).unwrap()).abs() < 1e-16);
    }

    #[test]
    fn poisson_cancel() {
        let m = mat();
        assert_eq!(poisson_cancel_potential(0.0, &m).unwrap(), 0.0);
        let p1 = poisson_cancel_potential(1.0, &m).unwrap();
        let p3 = poisson_cancel_potential(3.0, &m).unwrap();
        assert!((p3 - 3.0 * p1).abs() < 1e-14);
        let c = SVConstants { b1: 1.0, phi1_tilde0: p1, ..Default::default() };
        let sol = solve_fluxfree(&c, &m, &sec(), 1.0, &SolverConfig::default()).unwrap();
        assert!(sol.solution.u_pi0.max_norm() <= 1e-12 * sec().diameter());

        let mut d = m;
        d.beta1 = 0.0;
        d.beta2 = 0.0;
        assert_eq!(
            poisson_cancel_potential(1.0, &d),
            Err(Error::DegenerateMaterial(Degeneracy::PoissonCancel))
        );
    }

    #[test]
    fn extension_axial_force() {
        let m = mat();
        let dm = derive_moduli(&m).unwrap();
        let s = sec();
        let c = SVConstants { b1: 1.0, ..Default::default() };
        let sol = solve_fluxfree(&c, &m, &s, 1.0, &SolverConfig::default()).unwrap();
        let area = s.inertia().area;
        let expect = area * (dm.a1 * m.gamma1 + dm.b1 * 0.5 * (m.beta1 + m.beta2)) / dm.dc;
        assert!((sol.resultants.axial_force - expect).abs() < 1e-13 * expect.abs());
        assert!(sol.resultants.routes_agree(1e-10));
    }

    #[test]
    fn flexure_is_compatible_and_routes_agree() {
        let c = SVConstants {
            v1: Vec2::new(0.3, -0.2),
            v2: Vec2::new(-0.5, 0.9),
            b1: 0.4,
            phi1_tilde0: 0.1,
            ..Default::default()
        };
        let sol = solve_fluxfree(&c, &mat(), &sec(), 1.0, &SolverConfig::default()).unwrap();
        for (d, s) in sol.compatibility {
            assert!(d.abs() <= 1e-12 * s);
        }
        assert!(sol.resultants.routes_agree(1e-10));
        assert!(sol.resultants.shear.norm() > 0.0);
        let (int_u2, _) = (
            integrate_area(&sol.solution.profiles.uz2, crate::section::Quadrature::Simpson).unwrap(),
            0,
        );
        assert!(int_u2.abs() < 1e-14);
    }

    #[test]
    fn rejects_almansi_constants_and_degenerate_bracket() {
        let c = SVConstants { k0: 1.0, ..Default::default() };
        assert!(matches!(
            solve_fluxfree(&c, &mat(), &sec(), 1.0, &SolverConfig::default()),
            Err(Error::InvalidInput(_))
        ));
        let m = MaterialTip {
            mu: 1.0,
            lambda_: 0.0,
            alpha1: 2.0,
            alpha2: 0.0,
            alpha3: 0.0,
            beta1: 0.0,
            beta2: 0.0,
            beta3: 1.0,
            gamma1: 1.0,
            gamma2: 1.0,
        };
        assert_eq!(
            solve_fluxfree(&SVConstants::default(), &m, &sec(), 1.0, &SolverConfig::default()).unwrap_err(),
            Error::DegenerateMaterial(Degeneracy::Bracket)
        );
    }
}
