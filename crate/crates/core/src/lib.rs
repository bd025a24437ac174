//! Saint-Venant and Almansi problems for transversely isotropic piezoelectric
//! cylinders with a rectangular cross section.
//!
//! The 3-D displacement and potential are polynomials in the axial
//! coordinate whose coefficients solve 2-D Poisson problems on the section.
//! [`case_fluxfree`] handles an unloaded lateral wall with zero normal
//! electric displacement, [`case_almansi`] a lateral potential quadratic in
//! `z`, and [`verify`] rebuilds strain, field, stress and displacement from
//! an assembled solution to measure how well the balance laws hold.

pub mod case_almansi;
pub mod case_fluxfree;
pub mod elliptic;
pub mod error;
pub mod exec;
pub mod material;
pub mod section;
pub mod svcore;
pub mod verify;

pub use error::{Degeneracy, Error, Result};
pub use exec::Execution;
pub use material::{
    derive_moduli, electric_displacement, rotate90, stress, BlockSymTensor, BlockVec3,
    DerivedModuli, MaterialTip, Sym2, Vec2,
};
pub use section::{EdgeTrace, InertiaData, Quadrature, ScalarField2D, Section, VectorField2D};
