//! Transversely isotropic piezoelectric (TIP) constitutive law in (2+1) block form.
//!
//! Vectors and symmetric tensors are split into an in-plane part (the cross
//! section) and an axial part along `e_z`, which is also the material symmetry
//! axis. The electric field is taken as `E = (grad phi, phi')` with no minus
//! sign; every composite modulus below is consistent with that convention.

use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{Degeneracy, Error, Result};

/// Relative threshold under which a denominator is treated as zero.
pub const DEGENERACY_RTOL: f64 = 1e-12;

/// `|value| <= DEGENERACY_RTOL * scale`, where `scale` is the sum of the
/// magnitudes of the terms that built `value`.
pub(crate) fn is_degenerate(value: f64, scale: f64) -> bool {
    !value.is_finite() || value.abs() <= DEGENERACY_RTOL * scale
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Vec2 { x, y }
    }

    pub fn dot(self, o: Vec2) -> f64 {
        self.x * o.x + self.y * o.y
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    /// Counter-clockwise quarter turn, `(x, y) -> (-y, x)`.
    pub fn rot90(self) -> Vec2 {
        Vec2::new(-self.y, self.x)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

/// Counter-clockwise quarter turn of an in-plane vector.
pub fn rotate90(v: Vec2) -> Vec2 {
    v.rot90()
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x - o.x, self.y - o.y)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, s: f64) -> Vec2 {
        Vec2::new(self.x * s, self.y * s)
    }
}

impl Mul<Vec2> for f64 {
    type Output = Vec2;
    fn mul(self, v: Vec2) -> Vec2 {
        v * self
    }
}

/// Symmetric 2x2 tensor.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Sym2 {
    pub xx: f64,
    pub xy: f64,
    pub yy: f64,
}

impl Sym2 {
    pub const ZERO: Sym2 = Sym2 { xx: 0.0, xy: 0.0, yy: 0.0 };

    pub const fn new(xx: f64, xy: f64, yy: f64) -> Self {
        Sym2 { xx, xy, yy }
    }

    /// `s * I`
    pub const fn spherical(s: f64) -> Self {
        Sym2 { xx: s, xy: 0.0, yy: s }
    }

    pub fn trace(self) -> f64 {
        self.xx + self.yy
    }

    pub fn apply(self, v: Vec2) -> Vec2 {
        Vec2::new(self.xx * v.x + self.xy * v.y, self.xy * v.x + self.yy * v.y)
    }

    pub fn max_abs(self) -> f64 {
        self.xx.abs().max(self.xy.abs()).max(self.yy.abs())
    }
}

impl Add for Sym2 {
    type Output = Sym2;
    fn add(self, o: Sym2) -> Sym2 {
        Sym2::new(self.xx + o.xx, self.xy + o.xy, self.yy + o.yy)
    }
}

impl Mul<f64> for Sym2 {
    type Output = Sym2;
    fn mul(self, s: f64) -> Sym2 {
        Sym2::new(self.xx * s, self.xy * s, self.yy * s)
    }
}

/// Symmetric 3x3 tensor `plane + shear (x) e_z + e_z (x) shear + axial e_z (x) e_z`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BlockSymTensor {
    pub plane: Sym2,
    pub shear: Vec2,
    pub axial: f64,
}

impl BlockSymTensor {
    pub const ZERO: BlockSymTensor = BlockSymTensor {
        plane: Sym2::ZERO,
        shear: Vec2::ZERO,
        axial: 0.0,
    };

    pub fn to_matrix(self) -> [[f64; 3]; 3] {
        let p = self.plane;
        let s = self.shear;
        [
            [p.xx, p.xy, s.x],
            [p.xy, p.yy, s.y],
            [s.x, s.y, self.axial],
        ]
    }

    /// Reads the symmetric part of a full 3x3 matrix.
    pub fn from_matrix(m: [[f64; 3]; 3]) -> Self {
        BlockSymTensor {
            plane: Sym2::new(m[0][0], 0.5 * (m[0][1] + m[1][0]), m[1][1]),
            shear: Vec2::new(0.5 * (m[0][2] + m[2][0]), 0.5 * (m[1][2] + m[2][1])),
            axial: m[2][2],
        }
    }

    /// Traction on a face with in-plane normal `n`: `(T^ n, tau . n)`.
    pub fn traction(self, n: Vec2) -> BlockVec3 {
        BlockVec3 {
            plane: self.plane.apply(n),
            axial: self.shear.dot(n),
        }
    }
}

impl Add for BlockSymTensor {
    type Output = BlockSymTensor;
    fn add(self, o: BlockSymTensor) -> BlockSymTensor {
        BlockSymTensor {
            plane: self.plane + o.plane,
            shear: self.shear + o.shear,
            axial: self.axial + o.axial,
        }
    }
}

impl Mul<f64> for BlockSymTensor {
    type Output = BlockSymTensor;
    fn mul(self, s: f64) -> BlockSymTensor {
        BlockSymTensor {
            plane: self.plane * s,
            shear: self.shear * s,
            axial: self.axial * s,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BlockVec3 {
    pub plane: Vec2,
    pub axial: f64,
}

impl BlockVec3 {
    pub const ZERO: BlockVec3 = BlockVec3 {
        plane: Vec2::ZERO,
        axial: 0.0,
    };

    pub const fn new(plane: Vec2, axial: f64) -> Self {
        BlockVec3 { plane, axial }
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.plane.x, self.plane.y, self.axial]
    }

    pub fn norm(self) -> f64 {
        (self.plane.dot(self.plane) + self.axial * self.axial).sqrt()
    }
}

impl Add for BlockVec3 {
    type Output = BlockVec3;
    fn add(self, o: BlockVec3) -> BlockVec3 {
        BlockVec3::new(self.plane + o.plane, self.axial + o.axial)
    }
}

impl Mul<f64> for BlockVec3 {
    type Output = BlockVec3;
    fn mul(self, s: f64) -> BlockVec3 {
        BlockVec3::new(self.plane * s, self.axial * s)
    }
}

/// The ten scalar moduli of a TIP material.
///
/// Units: `mu`, `lambda_`, `alpha*` in Pa; `beta*` in C/m^2; `gamma*` in F/m.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaterialTip {
    pub mu: f64,
    pub lambda_: f64,
    pub alpha1: f64,
    pub alpha2: f64,
    pub alpha3: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub beta3: f64,
    pub gamma1: f64,
    pub gamma2: f64,
}

impl MaterialTip {
    pub fn as_array(&self) -> [f64; 10] {
        [
            self.mu,
            self.lambda_,
            self.alpha1,
            self.alpha2,
            self.alpha3,
            self.beta1,
            self.beta2,
            self.beta3,
            self.gamma1,
            self.gamma2,
        ]
    }

    pub fn from_array(a: [f64; 10]) -> Self {
        MaterialTip {
            mu: a[0],
            lambda_: a[1],
            alpha1: a[2],
            alpha2: a[3],
            alpha3: a[4],
            beta1: a[5],
            beta2: a[6],
            beta3: a[7],
            gamma1: a[8],
            gamma2: a[9],
        }
    }

    /// `mu + lambda`, the in-plane bulk-like modulus that the Clebsch condition divides by.
    pub fn plane_bulk(&self) -> f64 {
        self.mu + self.lambda_
    }

    pub fn derive(&self) -> Result<DerivedModuli> {
        derive_moduli(self)
    }
}

/// Composite moduli produced by the Saint-Venant reduction.
///
/// Naming follows the usual notation: `a1` is A1, `ybar` is the coefficient of
/// `k` in the shear resultant, `k` is the bracket `A4(b1+b2) + A2 A1/B1 - B2`
/// and `dc` is the denominator `gamma1*alpha1 + beta2*(beta1 + beta2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedModuli {
    pub alpha: f64,
    pub a1: f64,
    pub b1: f64,
    pub a2: f64,
    pub b2: f64,
    pub a4: f64,
    pub k: f64,
    pub f1: f64,
    pub g1: f64,
    pub f2: f64,
    pub g2: f64,
    pub f3: f64,
    pub g3: f64,
    pub z0: f64,
    pub z1: f64,
    pub z2: f64,
    pub z3: f64,
    pub z4: f64,
    pub z5: f64,
    pub y: f64,
    pub ybar: f64,
    pub dc: f64,
}

impl DerivedModuli {
    /// Name/value pairs in a fixed order (used for reports).
    pub fn entries(&self) -> [(&'static str, f64); 22] {
        [
            ("alpha", self.alpha),
            ("A1", self.a1),
            ("B1", self.b1),
            ("A2", self.a2),
            ("B2", self.b2),
            ("A4", self.a4),
            ("K", self.k),
            ("F1", self.f1),
            ("G1", self.g1),
            ("F2", self.f2),
            ("G2", self.g2),
            ("F3", self.f3),
            ("G3", self.g3),
            ("Z0", self.z0),
            ("Z1", self.z1),
            ("Z2", self.z2),
            ("Z3", self.z3),
            ("Z4", self.z4),
            ("Z5", self.z5),
            ("Y", self.y),
            ("Ybar", self.ybar),
            ("Dc", self.dc),
        ]
    }
}

/// Computes every composite modulus, rejecting materials whose denominators vanish.
///
/// `G3`, `Z1` and `Z3` are the combinations that make the assembled fields
/// satisfy `DIV T = 0` and `DIV D = 0` with the block law of [`stress`] and
/// [`electric_displacement`]:
///
/// * `G3 = 2 B1 - alpha1 beta1 / (mu + lambda)`
/// * `Z1 = 2 beta2 F3 / alpha1 - G3`
/// * `Z3 = [2 beta2 (alpha1 F2 + F3 (beta1+beta2)/2) / alpha1 - (alpha1 G2 + G3 (beta1+beta2)/2)] / Dc`
pub fn derive_moduli(m: &MaterialTip) -> Result<DerivedModuli> {
    let finite = m.as_array().iter().all(|v| v.is_finite());
    if !finite {
        return Err(Error::InvalidInput("material moduli must be finite".into()));
    }
    if m.mu <= 0.0 {
        return Err(Error::DegenerateMaterial(Degeneracy::ShearModulus));
    }
    let pb = m.plane_bulk();
    if pb <= 0.0 || is_degenerate(pb, m.mu.abs() + m.lambda_.abs()) {
        return Err(Error::DegenerateMaterial(Degeneracy::PlaneBulk));
    }
    if m.gamma1 <= 0.0 || m.gamma2 <= 0.0 {
        return Err(Error::DegenerateMaterial(Degeneracy::Permittivity));
    }
    let mech_scale = m.mu.abs() + m.lambda_.abs() + m.alpha1.abs() + m.alpha2.abs() + m.alpha3.abs();
    if is_degenerate(m.alpha1, mech_scale) {
        return Err(Error::DegenerateMaterial(Degeneracy::Alpha1));
    }

    let (a1_, a2_, a3_) = (m.alpha1, m.alpha2, m.alpha3);
    let (b1_, b2_, b3_) = (m.beta1, m.beta2, m.beta3);
    let (g1_, g2_) = (m.gamma1, m.gamma2);
    let bsum = b1_ + b2_;

    let b1 = b3_ - b1_ * a2_ / pb;
    if is_degenerate(b1, b3_.abs() + (b1_ * a2_ / pb).abs()) {
        return Err(Error::DegenerateMaterial(Degeneracy::B1));
    }
    let dc = g1_ * a1_ + b2_ * bsum;
    if is_degenerate(dc, (g1_ * a1_).abs() + (b2_ * bsum).abs()) {
        return Err(Error::DegenerateMaterial(Degeneracy::CouplingDenominator));
    }

    let alpha = 2.0 * (a1_ + a2_ + a3_);
    let a1 = alpha - a2_ * a2_ / pb;
    let a2 = g2_ + b2_ * b1_ / pb;
    let b2 = b2_ * a2_ / pb - b3_;
    let a4 = -(a2_ - b1_ * a1 / b1) / (2.0 * pb);
    let k = a4 * bsum + a2 * a1 / b1 - b2;
    let f1 = (2.0 * g1_ - 2.0 * b2_ * k) / dc;
    let g1 = (bsum + a1_ * k) / dc;
    let f2 = a2_ * bsum / (2.0 * pb) + b2;
    let g2 = b1_ * bsum / (2.0 * pb) + a2;
    let f3 = 2.0 * a1 - a1_ * a2_ / pb;
    let g3 = 2.0 * b1 - a1_ * b1_ / pb;
    let z0 = -f3 / a1_;
    let z1 = 2.0 * b2_ * f3 / a1_ - g3;
    let f_comb = a1_ * f2 + f3 * bsum / 2.0;
    let g_comb = a1_ * g2 + g3 * bsum / 2.0;
    let z2 = -f_comb / (a1_ * dc);
    let z3 = (2.0 * b2_ * f_comb / a1_ - g_comb) / dc;
    let z4 = -a2_ / (2.0 * a1_ * pb);
    let z5 = (2.0 * b2_ * a2_ - a1_ * b1_) / (2.0 * a1_ * pb);
    let y = a1 / a1_;
    let ybar = b1 - 2.0 * b2_ * a1 / a1_;

    Ok(DerivedModuli {
        alpha,
        a1,
        b1,
        a2,
        b2,
        a4,
        k,
        f1,
        g1,
        f2,
        g2,
        f3,
        g3,
        z0,
        z1,
        z2,
        z3,
        z4,
        z5,
        y,
        ybar,
        dc,
    })
}

/// Stress `T = C : Sigma + Xi : E` in block form.
pub fn stress(sigma: BlockSymTensor, e: BlockVec3, m: &MaterialTip) -> BlockSymTensor {
    let tr = sigma.plane.trace();
    let eta = sigma.axial;
    let alpha = 2.0 * (m.alpha1 + m.alpha2 + m.alpha3);
    let iso = m.lambda_ * tr + m.alpha2 * eta + m.beta1 * e.axial;
    BlockSymTensor {
        plane: sigma.plane * (2.0 * m.mu) + Sym2::spherical(iso),
        shear: sigma.shear * m.alpha1 + e.plane * m.beta2,
        axial: m.alpha2 * tr + alpha * eta + m.beta3 * e.axial,
    }
}

/// Electric displacement `D = Sigma_d . E - Xi : Sigma` in block form.
pub fn electric_displacement(sigma: BlockSymTensor, e: BlockVec3, m: &MaterialTip) -> BlockVec3 {
    BlockVec3 {
        plane: e.plane * m.gamma1 - sigma.shear * (m.beta1 + m.beta2),
        axial: m.gamma2 * e.axial - m.beta2 * sigma.plane.trace() - m.beta3 * sigma.axial,
    }
}
