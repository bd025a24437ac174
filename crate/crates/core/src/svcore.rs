//! Machinery shared by both lateral-wall cases: nondegeneracy guard, the
//! polynomial-in-z field structure, gradient completion and in-plane
//! displacement reconstruction.
//!
//! Profiles follow `u_z = u0 + u1 z + u2 z^2/2`, `phi = p0 + p1 z + p2 z^2/2`
//! and `u_pi = w0 + w1 z - (v1 z^2/2 + v2 z^3/6) / alpha1`.

use crate::error::{Error, Result};
use crate::material::{is_degenerate, DerivedModuli, MaterialTip, Vec2};
use crate::section::{check_same, gradient, laplacian, ScalarField2D, Section, VectorField2D};

/// Default threshold on `max|Lap_h f| h^2 / max|f|` for [`complete_gradient`].
pub const HARMONIC_TOL: f64 = 1e-8;
/// Default threshold on the relative disagreement of the two integration sweeps.
pub const INTEGRABILITY_TOL: f64 = 1e-2;

/// Constants parameterizing a solution. `k0`, `k` are only used by the Almansi case.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SVConstants {
    pub v1: Vec2,
    pub v2: Vec2,
    pub b1: f64,
    pub b2: f64,
    pub phi1_tilde0: f64,
    pub phi2_tilde0: f64,
    /// Rigid rotation carried by `w0`.
    pub mu1_0: f64,
    /// Rigid rotation carried by `w1`.
    pub mu2_0: f64,
    pub k0: f64,
    pub k: Vec2,
}

impl SVConstants {
    pub fn is_finite(&self) -> bool {
        self.v1.is_finite()
            && self.v2.is_finite()
            && self.k.is_finite()
            && [self.b1, self.b2, self.phi1_tilde0, self.phi2_tilde0, self.mu1_0, self.mu2_0, self.k0]
                .iter()
                .all(|v| v.is_finite())
    }
}

/// Coefficient fields of `u_z` and `phi` in powers of `z`.
#[derive(Debug, Clone, PartialEq)]
pub struct AxialProfiles {
    pub uz0: ScalarField2D,
    pub uz1: ScalarField2D,
    pub uz2: ScalarField2D,
    pub phi0: ScalarField2D,
    pub phi1: ScalarField2D,
    pub phi2: ScalarField2D,
}

impl AxialProfiles {
    pub fn zeros(s: &Section) -> Self {
        let z = ScalarField2D::zeros(s);
        AxialProfiles {
            uz0: z.clone(),
            uz1: z.clone(),
            uz2: z.clone(),
            phi0: z.clone(),
            phi1: z.clone(),
            phi2: z,
        }
    }

    pub fn section(&self) -> Section {
        self.uz0.section
    }

    fn pair(&self, order: usize) -> (&ScalarField2D, &ScalarField2D) {
        match order {
            0 => (&self.uz0, &self.phi0),
            1 => (&self.uz1, &self.phi1),
            _ => (&self.uz2, &self.phi2),
        }
    }

    /// `alpha1 u + 2 beta2 phi` for the coefficient of order `order`.
    pub fn uz_tilde(&self, order: usize, m: &MaterialTip) -> ScalarField2D {
        let (u, p) = self.pair(order);
        u.lin(m.alpha1, p, 2.0 * m.beta2).expect("profiles share a grid")
    }

    /// `gamma1 phi - (beta1 + beta2) u / 2` for the coefficient of order `order`.
    pub fn phi_tilde(&self, order: usize, m: &MaterialTip) -> ScalarField2D {
        let (u, p) = self.pair(order);
        p.lin(m.gamma1, u, -0.5 * (m.beta1 + m.beta2)).expect("profiles share a grid")
    }

    fn check(&self) -> Result<()> {
        let s = &self.uz0.section;
        for f in [&self.uz1, &self.uz2, &self.phi0, &self.phi1, &self.phi2] {
            check_same(s, &f.section)?;
        }
        Ok(())
    }
}

/// Recovers `(u, phi)` from `(u~, phi~)`; the determinant is `Dc`.
pub fn invert_tilde(
    ut: &ScalarField2D,
    pt: &ScalarField2D,
    m: &MaterialTip,
) -> Result<(ScalarField2D, ScalarField2D)> {
    let dc = m.gamma1 * m.alpha1 + m.beta2 * (m.beta1 + m.beta2);
    let u = ut.lin(m.gamma1 / dc, pt, -2.0 * m.beta2 / dc)?;
    let p = pt.lin(m.alpha1 / dc, ut, 0.5 * (m.beta1 + m.beta2) / dc)?;
    Ok((u, p))
}

/// Recovers `u` from `u~` and a known `phi`.
pub fn uz_from_tilde(ut: &ScalarField2D, p: &ScalarField2D, m: &MaterialTip) -> Result<ScalarField2D> {
    ut.lin(1.0 / m.alpha1, p, -2.0 * m.beta2 / m.alpha1)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Nondegeneracy {
    /// `alpha2 F1 + beta1 G1`
    pub bracket: f64,
    pub scale: f64,
    pub pass: bool,
}

impl Nondegeneracy {
    pub fn margin(&self) -> f64 {
        self.bracket.abs()
    }
}

/// Guard for the polynomial-in-z branch: the bracket multiplying the
/// higher-order axial term must not vanish.
pub fn check_nondegeneracy(m: &MaterialTip, dm: &DerivedModuli) -> Nondegeneracy {
    let a = m.alpha2 * dm.f1;
    let b = m.beta1 * dm.g1;
    let bracket = a + b;
    let scale = a.abs() + b.abs();
    Nondegeneracy { bracket, scale, pass: !is_degenerate(bracket, scale) }
}

/// `u~1 = v1 . r + b1`, `u~2 = v2 . r + b2`.
pub fn axial_linear_profiles(c: &SVConstants, s: &Section) -> (ScalarField2D, ScalarField2D) {
    (
        ScalarField2D::affine(s, c.b1, c.v1),
        ScalarField2D::affine(s, c.b2, c.v2),
    )
}

/// Two path integrals of a gradient field `(gx, gy)` from node (0,0):
/// along the bottom row then up each column, and up the left column then
/// along each row. Trapezoid rule on grid lines.
pub fn integrate_gradient_paths(
    gx: &ScalarField2D,
    gy: &ScalarField2D,
    base: f64,
) -> (ScalarField2D, ScalarField2D) {
    let s = gx.section;
    let (hx, hy) = (0.5 * s.hx, 0.5 * s.hy);
    let mut a = ScalarField2D::zeros(&s);
    a.set(0, 0, base);
    for i in 1..s.nx {
        let v = a.at(i - 1, 0) + hx * (gx.at(i - 1, 0) + gx.at(i, 0));
        a.set(i, 0, v);
    }
    for j in 1..s.ny {
        for i in 0..s.nx {
            let v = a.at(i, j - 1) + hy * (gy.at(i, j - 1) + gy.at(i, j));
            a.set(i, j, v);
        }
    }
    let mut b = ScalarField2D::zeros(&s);
    b.set(0, 0, base);
    for j in 1..s.ny {
        let v = b.at(0, j - 1) + hy * (gy.at(0, j - 1) + gy.at(0, j));
        b.set(0, j, v);
    }
    for j in 0..s.ny {
        for i in 1..s.nx {
            let v = b.at(i - 1, j) + hx * (gx.at(i - 1, j) + gx.at(i, j));
            b.set(i, j, v);
        }
    }
    (a, b)
}

fn harmonic_residual(f: &ScalarField2D) -> f64 {
    let s = &f.section;
    let fmax = f.max_abs();
    if fmax == 0.0 {
        return 0.0;
    }
    laplacian(f).max_abs() * s.hx * s.hy / fmax
}

/// The two sweeps of [`complete_gradient`] before averaging.
pub fn complete_gradient_paths(
    f: &ScalarField2D,
    base_value: f64,
    tol: f64,
) -> Result<(ScalarField2D, ScalarField2D)> {
    let res = harmonic_residual(f);
    if !(res <= tol) {
        return Err(Error::NotHarmonic(res));
    }
    let gf = gradient(f);
    let gx = gf.y().map(|v| -v);
    let gy = gf.x();
    Ok(integrate_gradient_paths(&gx, &gy, base_value))
}

/// Harmonic conjugate-like completion: `grad g = *grad f`, `g(0,0) = base_value`.
pub fn complete_gradient(f: &ScalarField2D, base_value: f64) -> Result<ScalarField2D> {
    complete_gradient_with_tol(f, base_value, HARMONIC_TOL)
}

pub fn complete_gradient_with_tol(f: &ScalarField2D, base_value: f64, tol: f64) -> Result<ScalarField2D> {
    let (a, b) = complete_gradient_paths(f, base_value, tol)?;
    a.lin(0.5, &b, 0.5)
}

/// In-plane field `u` with `Sym grad u = f I` and skew part `g`, plus the
/// rigid motion `anchor + rotation * (*r)`.
///
/// Integrates `grad u_x = (f, -g)` and `grad u_y = (g, f)` along both sweeps
/// and averages them.
pub fn reconstruct_inplane(
    spherical_coeff: &ScalarField2D,
    g: &ScalarField2D,
    anchor: Vec2,
    rotation: f64,
) -> Result<VectorField2D> {
    reconstruct_inplane_with_tol(spherical_coeff, g, anchor, rotation, INTEGRABILITY_TOL)
}

pub fn reconstruct_inplane_with_tol(
    f: &ScalarField2D,
    g: &ScalarField2D,
    anchor: Vec2,
    rotation: f64,
    tol: f64,
) -> Result<VectorField2D> {
    check_same(&f.section, &g.section)?;
    let s = f.section;
    let neg_g = g.map(|v| -v);
    let (ax, bx) = integrate_gradient_paths(f, &neg_g, anchor.x);
    let (ay, by) = integrate_gradient_paths(g, f, anchor.y);
    let ux = ax.lin(0.5, &bx, 0.5)?;
    let uy = ay.lin(0.5, &by, 0.5)?;
    let mismatch = ax.max_abs_diff(&bx)?.max(ay.max_abs_diff(&by)?);
    let size = ux.max_abs().max(uy.max_abs());
    if mismatch > tol * size {
        return Err(Error::IntegrabilityFailure(if size > 0.0 { mismatch / size } else { mismatch }));
    }
    let mut u = VectorField2D::from_components(&ux, &uy)?;
    if rotation != 0.0 {
        for j in 0..s.ny {
            for i in 0..s.nx {
                let k = s.idx(i, j);
                u.values[k] = u.values[k] + s.point(i, j).rot90() * rotation;
            }
        }
    }
    Ok(u)
}

/// Exact in-plane field with `Sym grad w = (a . r + c) I` and skew part
/// `*a . r + mu`: `w = c r + [(a.r) r + (*a.r) *r]/2 + mu *r`.
pub fn spherical_closed_form(s: &Section, a: Vec2, c: f64, mu: f64) -> VectorField2D {
    let ra = a.rot90();
    VectorField2D::from_fn(s, |r| {
        let rr = r.rot90();
        r * c + (r * a.dot(r) + rr * ra.dot(r)) * 0.5 + rr * mu
    })
}

/// Assembled 3-D fields on the section grid for `z` in `[-L, L]`.
#[derive(Debug, Clone)]
pub struct Solution3D {
    pub profiles: AxialProfiles,
    pub u_pi0: VectorField2D,
    pub u_pi1: VectorField2D,
    pub constants: SVConstants,
    pub half_length: f64,
    pub alpha1: f64,
}

pub fn assemble(
    profiles: AxialProfiles,
    u_pi0: VectorField2D,
    u_pi1: VectorField2D,
    constants: SVConstants,
    half_length: f64,
    alpha1: f64,
) -> Result<Solution3D> {
    profiles.check()?;
    let s = profiles.section();
    check_same(&s, &u_pi0.section)?;
    check_same(&s, &u_pi1.section)?;
    if !(half_length > 0.0 && half_length.is_finite()) {
        return Err(Error::InvalidGeometry(format!("half length must be positive, got {half_length}")));
    }
    Ok(Solution3D { profiles, u_pi0, u_pi1, constants, half_length, alpha1 })
}

fn quad(a: &ScalarField2D, b: &ScalarField2D, c: &ScalarField2D, z: f64) -> ScalarField2D {
    ScalarField2D {
        section: a.section,
        values: a
            .values
            .iter()
            .zip(&b.values)
            .zip(&c.values)
            .map(|((a, b), c)| a + b * z + c * (0.5 * z * z))
            .collect(),
    }
}

fn lin(a: &ScalarField2D, b: &ScalarField2D, z: f64) -> ScalarField2D {
    a.lin(1.0, b, z).expect("profiles share a grid")
}

impl Solution3D {
    pub fn section(&self) -> Section {
        self.profiles.section()
    }

    pub fn uz(&self, z: f64) -> ScalarField2D {
        let p = &self.profiles;
        quad(&p.uz0, &p.uz1, &p.uz2, z)
    }

    pub fn phi(&self, z: f64) -> ScalarField2D {
        let p = &self.profiles;
        quad(&p.phi0, &p.phi1, &p.phi2, z)
    }

    pub fn uz_dz(&self, z: f64) -> ScalarField2D {
        lin(&self.profiles.uz1, &self.profiles.uz2, z)
    }

    pub fn phi_dz(&self, z: f64) -> ScalarField2D {
        lin(&self.profiles.phi1, &self.profiles.phi2, z)
    }

    pub fn uz_dzz(&self) -> ScalarField2D {
        self.profiles.uz2.clone()
    }

    pub fn phi_dzz(&self) -> ScalarField2D {
        self.profiles.phi2.clone()
    }

    /// The rigid-body-like part `-(v1 z^2/2 + v2 z^3/6)/alpha1` and its z-derivatives.
    fn tail(&self, z: f64, order: usize) -> Vec2 {
        let c = &self.constants;
        let t = match order {
            0 => c.v1 * (0.5 * z * z) + c.v2 * (z * z * z / 6.0),
            1 => c.v1 * z + c.v2 * (0.5 * z * z),
            _ => c.v1 + c.v2 * z,
        };
        t * (-1.0 / self.alpha1)
    }

    pub fn u_pi(&self, z: f64) -> VectorField2D {
        let t = self.tail(z, 0);
        let mut out = self.u_pi0.lin(1.0, &self.u_pi1, z).expect("profiles share a grid");
        out.values.iter_mut().for_each(|v| *v = *v + t);
        out
    }

    pub fn u_pi_dz(&self, z: f64) -> VectorField2D {
        let t = self.tail(z, 1);
        let mut out = self.u_pi1.clone();
        out.values.iter_mut().for_each(|v| *v = *v + t);
        out
    }

    pub fn u_pi_dzz(&self, z: f64) -> Vec2 {
        self.tail(z, 2)
    }

    /// `(u_pi, u_z)` at node `(i, j)`.
    pub fn displacement_at(&self, i: usize, j: usize, z: f64) -> crate::material::BlockVec3 {
        let p = &self.profiles;
        let uz = p.uz0.at(i, j) + p.uz1.at(i, j) * z + p.uz2.at(i, j) * 0.5 * z * z;
        let up = self.u_pi0.at(i, j) + self.u_pi1.at(i, j) * z + self.tail(z, 0);
        crate::material::BlockVec3::new(up, uz)
    }

    pub fn potential_at(&self, i: usize, j: usize, z: f64) -> f64 {
        let p = &self.profiles;
        p.phi0.at(i, j) + p.phi1.at(i, j) * z + p.phi2.at(i, j) * 0.5 * z * z
    }

    pub fn has_nan(&self) -> bool {
        let p = &self.profiles;
        [&p.uz0, &p.uz1, &p.uz2, &p.phi0, &p.phi1, &p.phi2].iter().any(|f| f.has_nan())
            || self.u_pi0.has_nan()
            || self.u_pi1.has_nan()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::material::derive_moduli;

    fn unit(n: usize) -> Section {
        Section::build(1.0, 1.0, n, n).unwrap()
    }

    fn mat() -> MaterialTip {
        MaterialTip {
            mu: 1.0,
            lambda_: 0.5,
            alpha1: 2.0,
            alpha2: 0.7,
            alpha3: 0.4,
            beta1: 0.0,
            beta2: 0.3,
            beta3: 1.1,
            gamma1: 1.3,
            gamma2: 0.9,
        }
    }

    #[test]
    fn nondegeneracy_examples() {
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
        let nd = check_nondegeneracy(&m, &derive_moduli(&m).unwrap());
        assert_eq!(nd.bracket, 0.0);
        assert!(!nd.pass);

        let m = mat();
        let dm = derive_moduli(&m).unwrap();
        let nd = check_nondegeneracy(&m, &dm);
        assert!(dm.f1 != 0.0 && nd.pass);
        assert_eq!(nd.margin(), (m.alpha2 * dm.f1).abs());
    }

    #[test]
    fn linear_profiles() {
        let s = unit(5);
        let c = SVConstants { b1: 1.0, ..Default::default() };
        let (u1, _) = axial_linear_profiles(&c, &s);
        assert!(u1.values.iter().all(|&v| v == 1.0));
        let c = SVConstants { v1: Vec2::new(1.0, 0.0), ..Default::default() };
        let (u1, u2) = axial_linear_profiles(&c, &s);
        assert_eq!(u1, ScalarField2D::from_fn(&s, |p| p.x));
        assert_eq!(u2.max_abs(), 0.0);
        assert!(laplacian(&u1).max_abs() < 1e-12);
    }

    #[test]
    fn completion_examples() {
        let s = unit(9);
        let g = complete_gradient(&ScalarField2D::from_fn(&s, |p| p.x), 0.5).unwrap();
        assert!(g.max_abs_diff(&ScalarField2D::from_fn(&s, |p| p.y + 0.5)).unwrap() < 1e-14);

        let f = ScalarField2D::from_fn(&s, |p| p.x * p.y);
        let g = complete_gradient(&f, 0.0).unwrap();
        let exact = ScalarField2D::from_fn(&s, |p| 0.5 * (p.y * p.y - p.x * p.x));
        assert!(g.max_abs_diff(&exact).unwrap() < 1e-14);

        let f = ScalarField2D::from_fn(&s, |p| p.x * p.x);
        assert!(matches!(complete_gradient(&f, 0.0), Err(Error::NotHarmonic(_))));
    }

    #[test]
    fn reconstruction_examples() {
        let s = unit(9);
        let c = ScalarField2D::constant(&s, 0.3);
        let z = ScalarField2D::zeros(&s);
        let u = reconstruct_inplane(&c, &z, Vec2::ZERO, 0.0).unwrap();
        assert!(u.max_abs_diff(&VectorField2D::from_fn(&s, |p| p * 0.3)).unwrap() < 1e-15);

        let u = reconstruct_inplane(&z, &z, Vec2::ZERO, 0.7).unwrap();
        assert!(u.max_abs_diff(&VectorField2D::from_fn(&s, |p| p.rot90() * 0.7)).unwrap() < 1e-15);

        let a = Vec2::new(0.4, -0.9);
        let f = ScalarField2D::affine(&s, 0.2, a);
        let g = complete_gradient(&f, 0.0).unwrap();
        let u = reconstruct_inplane(&f, &g, Vec2::ZERO, 0.0).unwrap();
        let exact = spherical_closed_form(&s, a, 0.2, 0.0);
        assert!(u.max_abs_diff(&exact).unwrap() < 1e-14);

        let bad = ScalarField2D::from_fn(&s, |p| p.x);
        assert!(matches!(
            reconstruct_inplane(&z, &bad, Vec2::ZERO, 0.0),
            Err(Error::IntegrabilityFailure(_))
        ));
    }

    #[test]
    fn assemble_and_evaluate() {
        let s = unit(5);
        let z = VectorField2D::zeros(&s);
        let sol = assemble(AxialProfiles::zeros(&s), z.clone(), z.clone(), SVConstants::default(), 1.0, 1.0)
            .unwrap();
        assert_eq!(sol.uz(0.7).max_abs(), 0.0);
        assert_eq!(sol.u_pi(0.7).max_norm(), 0.0);

        let c = SVConstants { v2: Vec2::new(1.0, 0.0), ..Default::default() };
        let sol = assemble(AxialProfiles::zeros(&s), z.clone(), z, c, 1.0, 1.0).unwrap();
        let u = sol.u_pi(1.0);
        assert!((u.values[0] - Vec2::new(-1.0 / 6.0, 0.0)).norm() < 1e-16);

        let other = unit(7);
        assert_eq!(
            assemble(
                AxialProfiles::zeros(&s),
                VectorField2D::zeros(&other),
                VectorField2D::zeros(&s),
                c,
                1.0,
                1.0
            )
            .unwrap_err(),
            Error::GridMismatch
        );
    }

    #[test]
    fn tilde_roundtrip() {
        let s = unit(5);
        let m = mat();
        let mut p = AxialProfiles::zeros(&s);
        p.uz1 = ScalarField2D::from_fn(&s, |r| r.x - 0.3 * r.y);
        p.phi1 = ScalarField2D::from_fn(&s, |r| 0.2 + r.x * r.y);
        let (u, f) = invert_tilde(&p.uz_tilde(1, &m), &p.phi_tilde(1, &m), &m).unwrap();
        assert!(u.max_abs_diff(&p.uz1).unwrap() < 1e-15);
        assert!(f.max_abs_diff(&p.phi1).unwrap() < 1e-15);
    }
}
