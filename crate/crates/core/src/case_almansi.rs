//! Lateral wall held at a potential quadratic in `z`.
//!
//! The potential profiles solve Dirichlet problems, `u~2` is affine with `b2`
//! fixed by the compatibility of the warping problem, and `u~0` solves a
//! Neumann problem driven by the lateral trace of `u_pi1`. On the rectangle
//! with `phi2 = k0` on `y = 0` and `k1` on `y = y0` the whole order-two part
//! is closed form.

use crate::case_fluxfree::{first_moment, quadrature_resultants, Resultants};
use crate::elliptic::{
    compatibility, solve_dirichlet, solve_neumann, DirichletProblem, NeumannProblem, SolverConfig,
};
use crate::error::{Degeneracy, Error, Result};
use crate::material::{derive_moduli, is_degenerate, DerivedModuli, MaterialTip, Vec2};
use crate::section::{best_rule, integrate_area, EdgeTrace, InertiaData, ScalarField2D, Section, VectorField2D};
use crate::svcore::{
    assemble, check_nondegeneracy, complete_gradient, reconstruct_inplane, spherical_closed_form,
    uz_from_tilde, AxialProfiles, SVConstants, Solution3D,
};

/// Lateral data for `phi2`.
#[derive(Debug, Clone, PartialEq)]
pub enum Phi2Data {
    /// `k0` on `y = 0`, `k1` on `y = y0`, linear in `y` on the vertical edges.
    Linear { k0: f64, k1: f64 },
    Trace(EdgeTrace),
}

/// Lateral potential data. Traces are those of the profile fields, i.e. the
/// wall potential is `phi0 + phi1 z + phi2 z^2 / 2`. Missing traces are zero.
#[derive(Debug, Clone, PartialEq)]
pub struct AlmansiBoundaryData {
    pub phi2: Phi2Data,
    pub phi1_trace: Option<EdgeTrace>,
    pub phi0_trace: Option<EdgeTrace>,
}

impl AlmansiBoundaryData {
    pub fn rectangle(k0: f64, k1: f64) -> Self {
        AlmansiBoundaryData { phi2: Phi2Data::Linear { k0, k1 }, phi1_trace: None, phi0_trace: None }
    }

    /// `(k0, k)` of the affine `phi2 = k0 + k . r`, when the data are of that form.
    pub fn affine_phi2(&self, s: &Section) -> Option<(f64, Vec2)> {
        match self.phi2 {
            Phi2Data::Linear { k0, k1 } => Some((k0, Vec2::new(0.0, (k1 - k0) / s.y0))),
            Phi2Data::Trace(_) => None,
        }
    }

    fn phi2_trace(&self, s: &Section) -> EdgeTrace {
        match &self.phi2 {
            Phi2Data::Linear { .. } => {
                let (k0, k) = self.affine_phi2(s).expect("linear data");
                EdgeTrace::from_fn(s, |p, _| k0 + k.dot(p))
            }
            Phi2Data::Trace(t) => t.clone(),
        }
    }
}

/// Sign of the lateral flux in the warping problem, `grad u~0 . n = sign alpha1 u_pi1 . n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FluxSign {
    /// The sign that follows from `T n = 0` on the wall.
    #[default]
    Minus,
    Plus,
}

impl FluxSign {
    pub fn factor(self) -> f64 {
        match self {
            FluxSign::Minus => -1.0,
            FluxSign::Plus => 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct AlmansiOptions {
    pub flux_sign: FluxSign,
}

/// Coefficients of the closed-form order-two fields on the rectangle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Omegas {
    pub omega0: Vec2,
    pub omega1_bar: f64,
    pub omega2: Vec2,
    pub omega3_bar: f64,
}

#[derive(Debug, Clone)]
pub struct AlmansiSolution {
    pub solution: Solution3D,
    pub omega0: Vec2,
    pub omega1_bar: f64,
    pub omega2: Vec2,
    pub omega3_bar: f64,
    pub resultants: Resultants,
    /// `(defect, scale)` of the warping problem.
    pub compatibility: (f64, f64),
    /// Shift applied to `b2` so the discrete warping problem is compatible
    /// (zero for affine `phi2` data).
    pub b2_correction: f64,
}

/// `2 beta2 - B1 alpha1 / A1`, written as `-Ybar / Y`.
fn trace_factor(dm: &DerivedModuli) -> Result<f64> {
    if is_degenerate(dm.a1, dm.alpha.abs() + (dm.alpha - dm.a1).abs()) {
        return Err(Error::DegenerateMaterial(Degeneracy::A1));
    }
    Ok(-dm.ybar / dm.y)
}

pub fn omegas(v2: Vec2, k0: f64, k: Vec2, dm: &DerivedModuli, s: &Section) -> Result<Omegas> {
    let cf = trace_factor(dm)?;
    let kb = k0 + k.dot(s.inertia().centroid);
    Ok(Omegas {
        omega0: v2 * dm.z4 + k * dm.z5,
        omega1_bar: kb * (dm.z5 + dm.z4 * cf),
        omega2: v2 * dm.z0 + k * dm.z1,
        omega3_bar: kb * (dm.z1 + dm.z0 * cf),
    })
}

pub fn solve_phi2(bd: &AlmansiBoundaryData, s: &Section, cfg: &SolverConfig) -> Result<ScalarField2D> {
    solve_dirichlet(&DirichletProblem { rhs: ScalarField2D::zeros(s), boundary: bd.phi2_trace(s) }, cfg)
}

pub fn solve_phi1(bd: &AlmansiBoundaryData, s: &Section, cfg: &SolverConfig) -> Result<ScalarField2D> {
    let boundary = bd.phi1_trace.clone().unwrap_or_else(|| EdgeTrace::zeros(s));
    solve_dirichlet(&DirichletProblem { rhs: ScalarField2D::zeros(s), boundary }, cfg)
}

/// `Lap phi0 = Z2 u~2 + Z3 phi2` with the `phi0` trace.
pub fn solve_phi0(
    uz2_tilde: &ScalarField2D,
    phi2: &ScalarField2D,
    dm: &DerivedModuli,
    bd: &AlmansiBoundaryData,
    s: &Section,
    cfg: &SolverConfig,
) -> Result<ScalarField2D> {
    let boundary = bd.phi0_trace.clone().unwrap_or_else(|| EdgeTrace::zeros(s));
    let rhs = uz2_tilde.lin(dm.z2, phi2, dm.z3)?;
    solve_dirichlet(&DirichletProblem { rhs, boundary }, cfg)
}

/// `b2 = -v2 . r_B + (k0 + k . r_B)(2 beta2 - B1 alpha1 / A1)` and `u~2 = v2 . r + b2`.
pub fn b2_and_uz2(v2: Vec2, k0: f64, k: Vec2, dm: &DerivedModuli, s: &Section) -> Result<(f64, ScalarField2D)> {
    let rb = s.inertia().centroid;
    b2_from_mean(v2, k0 + k.dot(rb), dm, s)
}

fn b2_from_mean(v2: Vec2, phi2_mean: f64, dm: &DerivedModuli, s: &Section) -> Result<(f64, ScalarField2D)> {
    let cf = trace_factor(dm)?;
    let b2 = -v2.dot(s.inertia().centroid) + phi2_mean * cf;
    Ok((b2, ScalarField2D::affine(s, b2, v2)))
}

/// `w1 = [(O0.(r - r_B)) r + (*O0.r) *r]/2 + O1 r + mu *r`.
pub fn u_pi1_closed(v2: Vec2, k: Vec2, k0: f64, dm: &DerivedModuli, s: &Section, mu2_0: f64) -> Result<VectorField2D> {
    let o = omegas(v2, k0, k, dm, s)?;
    let rb = s.inertia().centroid;
    Ok(spherical_closed_form(s, o.omega0, o.omega1_bar - o.omega0.dot(rb), mu2_0))
}

fn warping_problem(u_pi1: &VectorField2D, rhs: ScalarField2D, alpha1: f64, sign: FluxSign) -> NeumannProblem {
    let f = sign.factor() * alpha1;
    NeumannProblem { rhs, flux: u_pi1.normal_trace().map(|v| f * v) }
}

/// `Lap u~0 = O2 . (r - r_B) + O3`, `grad u~0 . n = -alpha1 u_pi1 . n` (or `+` with [`FluxSign::Plus`]).
pub fn warping_bvp(
    u_pi1: &VectorField2D,
    omega2: Vec2,
    omega3_bar: f64,
    m: &MaterialTip,
    s: &Section,
    cfg: &SolverConfig,
    sign: FluxSign,
) -> Result<ScalarField2D> {
    let rb = s.inertia().centroid;
    let rhs = ScalarField2D::affine(s, omega3_bar - omega2.dot(rb), omega2);
    solve_neumann(&warping_problem(u_pi1, rhs, m.alpha1, sign), cfg)
}

/// `q = int r sigma' = J_B (Y v2 + Ybar k)`.
pub fn shear_resultant(v2: Vec2, k: Vec2, dm: &DerivedModuli, inertia: &InertiaData) -> Vec2 {
    inertia.apply_euler(v2 * dm.y + k * dm.ybar)
}

/// Inverse of [`shear_resultant`] in `v2` for a given `k`.
pub fn design_v2(q_target: Vec2, k: Vec2, dm: &DerivedModuli, inertia: &InertiaData) -> Result<Vec2> {
    if is_degenerate(dm.a1, dm.alpha.abs() + (dm.alpha - dm.a1).abs()) || !dm.y.is_finite() {
        return Err(Error::DegenerateMaterial(Degeneracy::Y));
    }
    Ok((inertia.solve_euler(q_target) - k * dm.ybar) * (1.0 / dm.y))
}

pub fn solve_almansi(
    c: &SVConstants,
    bd: &AlmansiBoundaryData,
    m: &MaterialTip,
    s: &Section,
    half_length: f64,
    cfg: &SolverConfig,
    opts: &AlmansiOptions,
) -> Result<AlmansiSolution> {
    let dm = derive_moduli(m)?;
    if !check_nondegeneracy(m, &dm).pass {
        return Err(Error::DegenerateMaterial(Degeneracy::Bracket));
    }
    if !c.is_finite() {
        return Err(Error::InvalidInput("constants must be finite".into()));
    }
    let a1 = m.alpha1;
    let rb = s.inertia().centroid;
    let mut c = *c;

    let phi2 = solve_phi2(bd, s, cfg)?;
    let affine = bd.affine_phi2(s);
    let (k0, k) = affine.unwrap_or((phi2.mean(), Vec2::ZERO));
    c.k0 = k0;
    c.k = k;
    let phi2_mean = match affine {
        Some((k0, k)) => k0 + k.dot(rb),
        None => phi2.mean(),
    };
    let o = omegas(c.v2, k0, k, &dm, s)?;
    let (b2, mut ut2) = b2_from_mean(c.v2, phi2_mean, &dm, s)?;
    c.b2 = b2;

    let mut w1 = match affine {
        Some(_) => spherical_closed_form(s, o.omega0, o.omega1_bar - o.omega0.dot(rb), c.mu2_0),
        None => {
            let f1 = ut2.lin(dm.z4, &phi2, dm.z5)?;
            let g1 = complete_gradient(&f1, 0.0)?;
            reconstruct_inplane(&f1, &g1, Vec2::ZERO, c.mu2_0)?
        }
    };
    let mut rhs = ut2.lin(dm.z0, &phi2, dm.z1)?;

    let mut b2_correction = 0.0;
    if affine.is_none() && opts.flux_sign == FluxSign::Minus {
        // d(defect)/d(b2) = A (Z0 + 2 alpha1 Z4) = -2 A Y
        let (d, _) = compatibility(&warping_problem(&w1, rhs.clone(), a1, opts.flux_sign))?;
        let area = s.inertia().area;
        b2_correction = d / (2.0 * area * dm.y);
        c.b2 += b2_correction;
        ut2 = ut2.map(|v| v + b2_correction);
        rhs = rhs.map(|v| v + dm.z0 * b2_correction);
        let dil = spherical_closed_form(s, Vec2::ZERO, dm.z4 * b2_correction, 0.0);
        w1 = w1.lin(1.0, &dil, 1.0)?;
    }

    let phi1 = solve_phi1(bd, s, cfg)?;
    let phi0 = solve_phi0(&ut2, &phi2, &dm, bd, s, cfg)?;
    let prob = warping_problem(&w1, rhs, a1, opts.flux_sign);
    let compat = compatibility(&prob)?;
    let ut0 = solve_neumann(&prob, cfg)?;
    let ut1 = ScalarField2D::affine(s, c.b1, c.v1);

    let f0 = ut1.lin(dm.z4, &phi1, dm.z5)?;
    let g0 = complete_gradient(&f0, 0.0)?;
    let w0 = reconstruct_inplane(&f0, &g0, Vec2::ZERO, c.mu1_0)?;

    let prof = AxialProfiles {
        uz0: uz_from_tilde(&ut0, &phi0, m)?,
        uz1: uz_from_tilde(&ut1, &phi1, m)?,
        uz2: uz_from_tilde(&ut2, &phi2, m)?,
        phi0,
        phi1,
        phi2,
    };
    let solution = assemble(prof, w0, w1, c, half_length, a1)?;
    let resultants = resultants_almansi(&solution, m, &dm, s, half_length, affine.is_some())?;
    Ok(AlmansiSolution {
        solution,
        omega0: o.omega0,
        omega1_bar: o.omega1_bar,
        omega2: o.omega2,
        omega3_bar: o.omega3_bar,
        resultants,
        compatibility: compat,
        b2_correction,
    })
}

/// Closed forms use `sigma = Y u~1 + Ybar phi1` and
/// `D_z = (B2/alpha1) u~1 + (A2 - 2 beta2 B2/alpha1) phi1`; the `phi1`
/// integral is taken by quadrature since `phi1` is a discrete harmonic field.
fn resultants_almansi(
    sol: &Solution3D,
    m: &MaterialTip,
    dm: &DerivedModuli,
    s: &Section,
    half_length: f64,
    affine: bool,
) -> Result<Resultants> {
    let inertia = s.inertia();
    let c = &sol.constants;
    let rule = best_rule(s);
    let int_p1 = integrate_area(&sol.profiles.phi1, rule)?;
    let int_ut1 = inertia.area * (c.v1.dot(inertia.centroid) + c.b1);
    let (fq, dq, sq) = quadrature_resultants(sol, dm)?;
    let shear = if affine {
        shear_resultant(c.v2, c.k, dm, &inertia)
    } else {
        let sigma_p = sol.profiles.uz2.lin(dm.a1, &sol.profiles.phi2, dm.b1)?;
        first_moment(&sigma_p)?
    };
    Ok(Resultants {
        axial_force: dm.y * int_ut1 + dm.ybar * int_p1,
        axial_force_quadrature: fq,
        d_flux: dm.b2 / m.alpha1 * int_ut1 + (dm.a2 - 2.0 * m.beta2 * dm.b2 / m.alpha1) * int_p1,
        d_flux_quadrature: dq,
        potential_difference: 2.0 * half_length * int_p1 / inertia.area,
        shear,
        shear_quadrature: sq,
    })
}
