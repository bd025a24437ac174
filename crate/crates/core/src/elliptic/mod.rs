//! 5-point Poisson solvers on the section grid, with Dirichlet or pure
//! Neumann data.

pub mod linalg;

use crate::error::{Error, Result};
use crate::section::{
    best_rule, integrate_area, integrate_boundary, laplacian_at, EdgeTrace, ScalarField2D, Section,
};
use linalg::{conjugate_gradient, BandCholesky, FivePoint};

/// Largest node count handled by the banded factorization under [`LinearSolver::Auto`].
pub const DIRECT_NODE_LIMIT: usize = 257 * 257;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LinearSolver {
    #[default]
    Auto,
    DirectBanded,
    ConjugateGradient,
}

/// How the additive constant of a Neumann solution is fixed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Pinning {
    #[default]
    ZeroMean,
    ZeroAtOrigin,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    pub method: LinearSolver,
    /// Relative residual (CG) or normwise backward error (direct) accepted.
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Relative tolerance of the Neumann compatibility check.
    pub compat_tolerance: f64,
    pub pinning: Pinning,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            method: LinearSolver::Auto,
            tolerance: 1e-10,
            max_iterations: 100_000,
            compat_tolerance: 1e-8,
            pinning: Pinning::ZeroMean,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tolerance > 0.0) || !(self.compat_tolerance > 0.0) {
            return Err(Error::InvalidInput("solver tolerances must be positive".into()));
        }
        Ok(())
    }

    fn use_direct(&self, nodes: usize) -> bool {
        match self.method {
            LinearSolver::Auto => nodes <= DIRECT_NODE_LIMIT,
            LinearSolver::DirectBanded => true,
            LinearSolver::ConjugateGradient => false,
        }
    }
}

/// `Delta u = rhs` inside, `u = boundary` on the edges.
#[derive(Debug, Clone)]
pub struct DirichletProblem {
    pub rhs: ScalarField2D,
    pub boundary: EdgeTrace,
}

/// `Delta u = rhs` inside, `grad u . n = flux` on the edges.
#[derive(Debug, Clone)]
pub struct NeumannProblem {
    pub rhs: ScalarField2D,
    pub flux: EdgeTrace,
}

/// Compatibility defect `int rhs - oint flux` and the scale it is measured against.
pub fn compatibility(p: &NeumannProblem) -> Result<(f64, f64)> {
    let s = &p.rhs.section;
    if !p.flux.matches(s) {
        return Err(Error::InvalidTrace("flux trace does not match the grid".into()));
    }
    let rule = best_rule(s);
    let int_rhs = integrate_area(&p.rhs, rule)?;
    let int_abs = integrate_area(&p.rhs.map(f64::abs), rule)?;
    let flux = integrate_boundary(s, &p.flux, rule)?;
    let flux_abs = integrate_boundary(s, &p.flux.map(f64::abs), rule)?;
    Ok((int_rhs - flux, int_abs + flux_abs + f64::MIN_POSITIVE))
}

/// Bilinearly blended (Coons) extension of an edge trace into the rectangle.
pub fn transfinite_lift(s: &Section, t: &EdgeTrace) -> ScalarField2D {
    let (nx, ny) = (s.nx, s.ny);
    let c00 = t.bottom[0];
    let c10 = t.bottom[nx - 1];
    let c01 = t.top[0];
    let c11 = t.top[nx - 1];
    let mut out = ScalarField2D::zeros(s);
    for j in 0..ny {
        let v = j as f64 / (ny - 1) as f64;
        for i in 0..nx {
            let u = i as f64 / (nx - 1) as f64;
            let val = (1.0 - u) * t.left[j] + u * t.right[j] + (1.0 - v) * t.bottom[i] + v * t.top[i]
                - ((1.0 - u) * (1.0 - v) * c00
                    + u * (1.0 - v) * c10
                    + (1.0 - u) * v * c01
                    + u * v * c11);
            out.set(i, j, val);
        }
    }
    // edges exactly equal to the trace
    for i in 0..nx {
        out.set(i, 0, t.bottom[i]);
        out.set(i, ny - 1, t.top[i]);
    }
    for j in 0..ny {
        out.set(0, j, t.left[j]);
        out.set(nx - 1, j, t.right[j]);
    }
    out
}

fn solve_spd(a: &FivePoint, b: &[f64], cfg: &SolverConfig) -> Result<Vec<f64>> {
    if b.iter().all(|v| *v == 0.0) {
        return Ok(vec![0.0; b.len()]);
    }
    if cfg.use_direct(a.n()) {
        let f = BandCholesky::factor(a).ok_or(Error::SolveFailure(f64::INFINITY))?;
        let x = f.solve(b);
        let be = a.backward_error(&x, b);
        if !(be <= cfg.tolerance) {
            return Err(Error::SolveFailure(be));
        }
        Ok(x)
    } else {
        let (x, rel) = conjugate_gradient(a, b, cfg.tolerance, cfg.max_iterations);
        if !(rel <= cfg.tolerance) {
            return Err(Error::SolveFailure(rel));
        }
        Ok(x)
    }
}

pub fn solve_dirichlet(p: &DirichletProblem, cfg: &SolverConfig) -> Result<ScalarField2D> {
    cfg.validate()?;
    let s = p.rhs.section;
    let t = &p.boundary;
    if !t.matches(&s) {
        return Err(Error::InvalidTrace("boundary trace does not match the grid".into()));
    }
    if !t.is_finite() || p.rhs.has_nan() {
        return Err(Error::InvalidTrace("non-finite data".into()));
    }
    let corner_tol = 1e-10 * t.max_abs().max(f64::MIN_POSITIVE);
    if t.corner_mismatch() > corner_tol {
        return Err(Error::InvalidTrace(format!(
            "corner values disagree by {:e}",
            t.corner_mismatch()
        )));
    }

    let lift = transfinite_lift(&s, t);
    let (m, rows) = (s.nx - 2, s.ny - 2);
    let (cx, cy) = (1.0 / (s.hx * s.hx), 1.0 / (s.hy * s.hy));
    let mut a = FivePoint::new(m * rows, m);
    let mut b = vec![0.0; m * rows];
    for r in 0..rows {
        for c in 0..m {
            let k = r * m + c;
            let (i, j) = (c + 1, r + 1);
            a.diag[k] = 2.0 * (cx + cy);
            if c + 1 < m {
                a.east[k] = -cx;
            }
            if r + 1 < rows {
                a.north[k] = -cy;
            }
            b[k] = laplacian_at(&lift, i, j) - p.rhs.at(i, j);
        }
    }
    let w = solve_spd(&a, &b, cfg)?;
    let mut u = lift;
    for r in 0..rows {
        for c in 0..m {
            let (i, j) = (c + 1, r + 1);
            let v = u.at(i, j) + w[r * m + c];
            u.set(i, j, v);
        }
    }
    Ok(u)
}

/// Pure Neumann solve, with the constant fixed by `cfg.pinning`.
///
/// Boundary rows use a ghost node `u_ghost = u_mirror + 2 h g`; the system is
/// symmetrized by the trapezoid weights, and its right-hand side is deflated
/// onto the range of the operator after the compatibility check.
pub fn solve_neumann(p: &NeumannProblem, cfg: &SolverConfig) -> Result<ScalarField2D> {
    cfg.validate()?;
    let s = p.rhs.section;
    if !p.flux.is_finite() || p.rhs.has_nan() {
        return Err(Error::InvalidTrace("non-finite data".into()));
    }
    let (defect, scale) = compatibility(p)?;
    if !(defect.abs() <= cfg.compat_tolerance * scale) {
        return Err(Error::IncompatibleData { defect, scale });
    }

    let (nx, ny) = (s.nx, s.ny);
    let wx = |i: usize| if i == 0 || i + 1 == nx { 0.5 } else { 1.0 };
    let wy = |j: usize| if j == 0 || j + 1 == ny { 0.5 } else { 1.0 };
    let (cx, cy) = (1.0 / (s.hx * s.hx), 1.0 / (s.hy * s.hy));

    let n = s.len();
    let mut a = FivePoint::new(n, nx);
    let mut b = vec![0.0; n];
    let mut wsum = 0.0;
    let mut wvec = vec![0.0; n];
    for j in 0..ny {
        for i in 0..nx {
            let k = s.idx(i, j);
            if i + 1 < nx {
                let e = -wy(j) * cx;
                a.east[k] = e;
                a.diag[k] -= e;
                a.diag[k + 1] -= e;
            }
            if j + 1 < ny {
                let e = -wx(i) * cy;
                a.north[k] = e;
                a.diag[k] -= e;
                a.diag[k + nx] -= e;
            }
            let w = wx(i) * wy(j);
            let mut g = 0.0;
            if i == 0 {
                g += 2.0 * p.flux.left[j] / s.hx;
            }
            if i + 1 == nx {
                g += 2.0 * p.flux.right[j] / s.hx;
            }
            if j == 0 {
                g += 2.0 * p.flux.bottom[i] / s.hy;
            }
            if j + 1 == ny {
                g += 2.0 * p.flux.top[i] / s.hy;
            }
            b[k] = w * (g - p.rhs.at(i, j));
            wvec[k] = w;
            wsum += w;
        }
    }
    let shift = b.iter().sum::<f64>() / wsum;
    for k in 0..n {
        b[k] -= shift * wvec[k];
    }
    a.pin(0);
    b[0] = 0.0;

    let x = solve_spd(&a, &b, cfg)?;
    let mut u = ScalarField2D::from_values(&s, x)?;
    if cfg.pinning == Pinning::ZeroMean {
        let mean = u.mean();
        u = u.map(|v| v - mean);
    }
    Ok(u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::material::Vec2;
    use crate::section::Edge;
    use std::f64::consts::PI;

    fn unit(n: usize) -> Section {
        Section::build(1.0, 1.0, n, n).unwrap()
    }

    #[test]
    fn dirichlet_affine_exact() {
        let s = Section::build(1.5, 0.8, 17, 13).unwrap();
        let f = |p: Vec2| 0.3 - 1.2 * p.x + 2.5 * p.y;
        let prob = DirichletProblem {
            rhs: ScalarField2D::zeros(&s),
            boundary: EdgeTrace::from_fn(&s, |p, _| f(p)),
        };
        let u = solve_dirichlet(&prob, &SolverConfig::default()).unwrap();
        assert!(u.max_abs_diff(&ScalarField2D::from_fn(&s, f)).unwrap() < 1e-12);
    }

    #[test]
    fn dirichlet_rejects_bad_corners() {
        let s = unit(5);
        let mut t = EdgeTrace::zeros(&s);
        t.bottom[0] = 1.0;
        let prob = DirichletProblem { rhs: ScalarField2D::zeros(&s), boundary: t };
        assert!(matches!(
            solve_dirichlet(&prob, &SolverConfig::default()),
            Err(Error::InvalidTrace(_))
        ));
    }

    #[test]
    fn dirichlet_manufactured_poisson() {
        let err = |n| {
            let s = unit(n);
            let exact = |p: Vec2| (PI * p.x).sin() * (PI * p.y).sin();
            let prob = DirichletProblem {
                rhs: ScalarField2D::from_fn(&s, |p| -2.0 * PI * PI * exact(p)),
                boundary: EdgeTrace::zeros(&s),
            };
            let u = solve_dirichlet(&prob, &SolverConfig::default()).unwrap();
            u.max_abs_diff(&ScalarField2D::from_fn(&s, exact)).unwrap()
        };
        let r = err(17) / err(33);
        assert!((3.2..=4.8).contains(&r), "ratio {r}");
    }

    #[test]
    fn dirichlet_max_principle() {
        let s = unit(21);
        let t = EdgeTrace::from_fn(&s, |p, _| (3.0 * p.x).sin() + p.y * p.y);
        let (lo, hi) = Edge::ALL.iter().flat_map(|&e| t.edge(e).iter()).fold(
            (f64::INFINITY, f64::NEG_INFINITY),
            |(a, b), &v| (a.min(v), b.max(v)),
        );
        let prob = DirichletProblem { rhs: ScalarField2D::zeros(&s), boundary: t };
        let u = solve_dirichlet(&prob, &SolverConfig::default()).unwrap();
        assert!(u.values.iter().all(|&v| v >= lo - 1e-12 && v <= hi + 1e-12));
    }

    #[test]
    fn neumann_zero_and_quadratic() {
        let s = unit(9);
        let zero = NeumannProblem { rhs: ScalarField2D::zeros(&s), flux: EdgeTrace::zeros(&s) };
        assert_eq!(solve_neumann(&zero, &SolverConfig::default()).unwrap().max_abs(), 0.0);

        // u = x^2: the ghost-node discretization is exact on quadratics
        let prob = NeumannProblem {
            rhs: ScalarField2D::constant(&s, 2.0),
            flux: EdgeTrace::from_fn(&s, |p, e| 2.0 * p.x * e.normal().x),
        };
        let u = solve_neumann(&prob, &SolverConfig::default()).unwrap();
        let exact = ScalarField2D::from_fn(&s, |p| p.x * p.x - 1.0 / 3.0);
        assert!(u.max_abs_diff(&exact).unwrap() < 1e-12);
    }

    #[test]
    fn neumann_incompatible() {
        let s = unit(9);
        let prob = NeumannProblem { rhs: ScalarField2D::constant(&s, 1.0), flux: EdgeTrace::zeros(&s) };
        match solve_neumann(&prob, &SolverConfig::default()) {
            Err(Error::IncompatibleData { defect, .. }) => assert!((defect - 1.0).abs() < 1e-14),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn neumann_pinnings_differ_by_constant() {
        let s = unit(17);
        let exact = |p: Vec2| (PI * p.x).cos() * (PI * p.y).cos() + p.x * p.y;
        let prob = NeumannProblem {
            rhs: ScalarField2D::from_fn(&s, |p| -2.0 * PI * PI * (exact(p) - p.x * p.y)),
            flux: EdgeTrace::from_fn(&s, |p, e| {
                let g = Vec2::new(
                    -PI * (PI * p.x).sin() * (PI * p.y).cos() + p.y,
                    -PI * (PI * p.x).cos() * (PI * p.y).sin() + p.x,
                );
                g.dot(e.normal())
            }),
        };
        let a = solve_neumann(&prob, &SolverConfig::default()).unwrap();
        let cfg = SolverConfig { pinning: Pinning::ZeroAtOrigin, ..Default::default() };
        let b = solve_neumann(&prob, &cfg).unwrap();
        assert_eq!(b.at(0, 0), 0.0);
        let d = a.lin(1.0, &b, -1.0).unwrap();
        let c = d.at(0, 0);
        assert!(d.values.iter().all(|v| (v - c).abs() < 1e-10));
    }

    #[test]
    fn cg_matches_direct() {
        let s = unit(17);
        let prob = DirichletProblem {
            rhs: ScalarField2D::from_fn(&s, |p| p.x.exp() * p.y),
            boundary: EdgeTrace::from_fn(&s, |p, _| p.x * p.y),
        };
        let d = solve_dirichlet(&prob, &SolverConfig { method: LinearSolver::DirectBanded, ..Default::default() })
            .unwrap();
        let c = solve_dirichlet(
            &prob,
            &SolverConfig { method: LinearSolver::ConjugateGradient, tolerance: 1e-13, ..Default::default() },
        )
        .unwrap();
        assert!(d.max_abs_diff(&c).unwrap() < 1e-10);
    }
}
