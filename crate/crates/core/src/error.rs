use thiserror::Error;

/// Which material combination failed a nondegeneracy check.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Degeneracy {
    /// `mu <= 0`
    ShearModulus,
    /// `mu + lambda <= 0`
    PlaneBulk,
    /// `gamma1 <= 0` or `gamma2 <= 0`
    Permittivity,
    Alpha1,
    B1,
    /// `gamma1*alpha1 + beta2*(beta1 + beta2)`
    CouplingDenominator,
    A1,
    /// `2*alpha2*beta2 - alpha1*beta1`
    PoissonCancel,
    Y,
    /// The bracket `alpha2*F1 + beta1*G1` multiplying h(z).
    Bracket,
}

impl std::fmt::Display for Degeneracy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Degeneracy::ShearModulus => "mu",
            Degeneracy::PlaneBulk => "mu + lambda",
            Degeneracy::Permittivity => "gamma1/gamma2",
            Degeneracy::Alpha1 => "alpha1",
            Degeneracy::B1 => "B1",
            Degeneracy::CouplingDenominator => "gamma1*alpha1 + beta2*(beta1 + beta2)",
            Degeneracy::A1 => "A1",
            Degeneracy::PoissonCancel => "2*alpha2*beta2 - alpha1*beta1",
            Degeneracy::Y => "Y",
            Degeneracy::Bracket => "alpha2*F1 + beta1*G1",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("degenerate material: {0} vanishes or violates its sign constraint")]
    DegenerateMaterial(Degeneracy),

    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),

    #[error("Simpson quadrature needs an odd number of nodes per axis")]
    QuadratureOrderUnavailable,

    #[error("node ({0}, {1}) is not on the section boundary")]
    NotBoundaryNode(usize, usize),

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("invalid boundary trace: {0}")]
    InvalidTrace(String),

    #[error("linear solve failed: relative residual {0:e}")]
    SolveFailure(f64),

    #[error("incompatible Neumann data: defect {defect:e} (scale {scale:e})")]
    IncompatibleData { defect: f64, scale: f64 },

    #[error("field is not discrete-harmonic: scaled Laplacian residual {0:e}")]
    NotHarmonic(f64),

    #[error("in-plane reconstruction is not integrable: sweep mismatch {0:e}")]
    IntegrabilityFailure(f64),

    #[error("convergence study needs at least {needed} grids, got {got}")]
    InsufficientGrids { needed: usize, got: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
