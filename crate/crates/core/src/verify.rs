//! Residual checks on an assembled solution.
//!
//! Strain and electric field are rebuilt from the displacement and potential
//! evaluators only: in-plane derivatives by finite differences, z-derivatives
//! from the polynomial structure. Stress and displacement then go through the
//! constitutive law and every balance law and lateral condition is sampled.
//!
//! Each residual is reported twice. The full maximum runs over every node;
//! the core maximum skips nodes closer than `corner_radius` to a corner of the
//! section, where the Poisson problems carry `r^2 log r` singularities that
//! keep pointwise finite-difference residuals from converging.

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::material::{electric_displacement, stress, BlockSymTensor, BlockVec3, MaterialTip, Sym2, Vec2};
use crate::section::{ddx, ddy, Edge, EdgeTrace, ScalarField2D, Section, VectorField2D};
use crate::svcore::Solution3D;

/// Below `EXACT_RTOL * scale` a residual counts as exact (no observable order).
pub const EXACT_RTOL: f64 = 1e-9;

/// Lateral condition checked on the wall in addition to `T n = 0`.
#[derive(Debug, Clone, PartialEq)]
pub enum LateralCondition {
    /// `D . n = 0`
    FluxFree,
    /// Wall potential `phi0 + phi1 z + phi2 z^2 / 2` with the given traces.
    Potential { phi0: EdgeTrace, phi1: EdgeTrace, phi2: EdgeTrace },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyOptions {
    /// Corner exclusion radius as a fraction of `min(x0, y0)`.
    pub corner_fraction: f64,
    pub execution: Execution,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions { corner_fraction: 0.35, execution: Execution::default() }
    }
}

/// One group of residuals.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Residuals {
    pub max_div_t: f64,
    pub max_div_d: f64,
    pub max_that: f64,
    pub max_lateral_tn: f64,
    /// `|D . n|` (flux-free) or the wall potential error (prescribed potential).
    pub max_lateral_electric: f64,
}

impl Residuals {
    fn merge(self, o: Residuals) -> Residuals {
        Residuals {
            max_div_t: self.max_div_t.max(o.max_div_t),
            max_div_d: self.max_div_d.max(o.max_div_d),
            max_that: self.max_that.max(o.max_that),
            max_lateral_tn: self.max_lateral_tn.max(o.max_lateral_tn),
            max_lateral_electric: self.max_lateral_electric.max(o.max_lateral_electric),
        }
    }

    fn as_array(&self) -> [f64; 5] {
        [self.max_div_t, self.max_div_d, self.max_that, self.max_lateral_tn, self.max_lateral_electric]
    }
}

/// Magnitudes the residuals are compared with to decide whether they are exact.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Scales {
    pub stress: f64,
    pub displacement: f64,
    pub potential: f64,
    pub length: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResidualReport {
    pub full: Residuals,
    pub core: Residuals,
    pub scales: Scales,
    pub flux_free: bool,
    pub h: f64,
    pub z_stations: Vec<f64>,
    pub corner_radius: f64,
}

pub const FAMILY_NAMES: [&str; 5] = ["div_T", "div_D", "That", "lateral_Tn", "lateral_electric"];

impl ResidualReport {
    pub fn max_div_t(&self) -> f64 {
        self.full.max_div_t
    }
    pub fn max_div_d(&self) -> f64 {
        self.full.max_div_d
    }
    pub fn max_that(&self) -> f64 {
        self.full.max_that
    }
    pub fn max_lateral_tn(&self) -> f64 {
        self.full.max_lateral_tn
    }
    pub fn max_lateral_dn(&self) -> Option<f64> {
        self.flux_free.then_some(self.full.max_lateral_electric)
    }
    pub fn max_lateral_phi_error(&self) -> Option<f64> {
        (!self.flux_free).then_some(self.full.max_lateral_electric)
    }

    pub fn family_scales(&self) -> [f64; 5] {
        let s = &self.scales;
        [s.stress / s.length, s.displacement / s.length, s.stress, s.stress, if self.flux_free {
            s.displacement
        } else {
            s.potential
        }]
    }

    /// `(name, full, core, scale)` per family.
    pub fn families(&self) -> Vec<(&'static str, f64, f64, f64)> {
        let f = self.full.as_array();
        let c = self.core.as_array();
        let s = self.family_scales();
        (0..5).map(|k| (FAMILY_NAMES[k], f[k], c[k], s[k])).collect()
    }

    pub fn is_finite(&self) -> bool {
        self.full.as_array().iter().chain(self.core.as_array().iter()).all(|v| v.is_finite())
    }
}

/// Strain and electric field blocks per node.
#[derive(Debug, Clone)]
pub struct Kinematics {
    pub section: Section,
    pub strain: Vec<BlockSymTensor>,
    pub field: Vec<BlockVec3>,
}

struct Inputs<'a> {
    ux: &'a ScalarField2D,
    uy: &'a ScalarField2D,
    up_dz: &'a VectorField2D,
    uz: &'a ScalarField2D,
    uz_dz: &'a ScalarField2D,
    phi: &'a ScalarField2D,
    phi_dz: &'a ScalarField2D,
}

fn strain_at(inp: &Inputs, i: usize, j: usize) -> (BlockSymTensor, BlockVec3) {
    let (ux_x, ux_y) = (ddx(inp.ux, i, j), ddy(inp.ux, i, j));
    let (uy_x, uy_y) = (ddx(inp.uy, i, j), ddy(inp.uy, i, j));
    let guz = Vec2::new(ddx(inp.uz, i, j), ddy(inp.uz, i, j));
    let k = inp.ux.section.idx(i, j);
    let sigma = BlockSymTensor {
        plane: Sym2::new(ux_x, 0.5 * (ux_y + uy_x), uy_y),
        shear: (inp.up_dz.values[k] + guz) * 0.5,
        axial: inp.uz_dz.values[k],
    };
    let e = BlockVec3::new(Vec2::new(ddx(inp.phi, i, j), ddy(inp.phi, i, j)), inp.phi_dz.values[k]);
    (sigma, e)
}

fn kinematics_of(inp: &Inputs, exec: Execution) -> Kinematics {
    let s = inp.ux.section;
    let rows = exec.map_range(s.ny, |j| (0..s.nx).map(|i| strain_at(inp, i, j)).collect::<Vec<_>>());
    let mut strain = Vec::with_capacity(s.len());
    let mut field = Vec::with_capacity(s.len());
    for row in rows {
        for (a, b) in row {
            strain.push(a);
            field.push(b);
        }
    }
    Kinematics { section: s, strain, field }
}

/// `Sigma = Sym GRAD u` and `E = (grad phi, phi')` at height `z`.
pub fn kinematics(sol: &Solution3D, z: f64) -> Kinematics {
    kinematics_with(sol, z, Execution::default())
}

pub fn kinematics_with(sol: &Solution3D, z: f64, exec: Execution) -> Kinematics {
    let up = sol.u_pi(z);
    let (ux, uy) = (up.x(), up.y());
    let up_dz = sol.u_pi_dz(z);
    let (uz, uz_dz) = (sol.uz(z), sol.uz_dz(z));
    let (phi, phi_dz) = (sol.phi(z), sol.phi_dz(z));
    kinematics_of(&Inputs { ux: &ux, uy: &uy, up_dz: &up_dz, uz: &uz, uz_dz: &uz_dz, phi: &phi, phi_dz: &phi_dz }, exec)
}

/// z-derivative of [`kinematics`], from the differentiated evaluators.
pub fn kinematics_dz(sol: &Solution3D, z: f64, exec: Execution) -> Kinematics {
    let s = sol.section();
    let up = sol.u_pi_dz(z);
    let (ux, uy) = (up.x(), up.y());
    let c = sol.u_pi_dzz(z);
    let up_dz = VectorField2D { section: s, values: vec![c; s.len()] };
    let (uz, uz_dz) = (sol.uz_dz(z), sol.uz_dzz());
    let (phi, phi_dz) = (sol.phi_dz(z), sol.phi_dzz());
    kinematics_of(&Inputs { ux: &ux, uy: &uy, up_dz: &up_dz, uz: &uz, uz_dz: &uz_dz, phi: &phi, phi_dz: &phi_dz }, exec)
}

/// Stress and electric displacement per node at height `z`.
pub fn constitutive_fields(sol: &Solution3D, m: &MaterialTip, z: f64, exec: Execution) -> (Vec<BlockSymTensor>, Vec<BlockVec3>) {
    let k = kinematics_with(sol, z, exec);
    apply_law(&k, m)
}

fn apply_law(k: &Kinematics, m: &MaterialTip) -> (Vec<BlockSymTensor>, Vec<BlockVec3>) {
    let t = k.strain.iter().zip(&k.field).map(|(s, e)| stress(*s, *e, m)).collect();
    let d = k.strain.iter().zip(&k.field).map(|(s, e)| electric_displacement(*s, *e, m)).collect();
    (t, d)
}

/// Derivative along one axis at an interior index `k` (`1 <= k <= n-2`) that
/// only reads interior values.
#[inline]
fn d_interior(f: impl Fn(usize) -> f64, k: usize, n: usize, h: f64) -> f64 {
    if n < 5 {
        return (f(k + 1) - f(k - 1)) / (2.0 * h);
    }
    if k == 1 {
        (-3.0 * f(1) + 4.0 * f(2) - f(3)) / (2.0 * h)
    } else if k == n - 2 {
        (3.0 * f(n - 2) - 4.0 * f(n - 3) + f(n - 4)) / (2.0 * h)
    } else {
        (f(k + 1) - f(k - 1)) / (2.0 * h)
    }
}

fn near_corner(s: &Section, p: Vec2, radius: f64) -> bool {
    [Vec2::new(0.0, 0.0), Vec2::new(s.x0, 0.0), Vec2::new(0.0, s.y0), Vec2::new(s.x0, s.y0)]
        .iter()
        .any(|c| (p - *c).norm() < radius)
}

struct Station {
    full: Residuals,
    core: Residuals,
    stress: f64,
    displacement: f64,
    potential: f64,
}

fn station(sol: &Solution3D, m: &MaterialTip, z: f64, lateral: &LateralCondition, radius: f64, exec: Execution) -> Station {
    let s = sol.section();
    let (t, d) = apply_law(&kinematics_with(sol, z, exec), m);
    let (tp, dp) = apply_law(&kinematics_dz(sol, z, exec), m);
    let (nx, ny) = (s.nx, s.ny);

    let rows = exec.map_range(ny, |j| {
        let mut full = Residuals::default();
        let mut core = Residuals::default();
        if j == 0 || j + 1 == ny {
            return (full, core);
        }
        for i in 1..nx - 1 {
            let k = s.idx(i, j);
            let dx = |g: &dyn Fn(usize) -> f64| d_interior(|a| g(s.idx(a, j)), i, nx, s.hx);
            let dy = |g: &dyn Fn(usize) -> f64| d_interior(|b| g(s.idx(i, b)), j, ny, s.hy);
            let rx = dx(&|q| t[q].plane.xx) + dy(&|q| t[q].plane.xy) + tp[k].shear.x;
            let ry = dx(&|q| t[q].plane.xy) + dy(&|q| t[q].plane.yy) + tp[k].shear.y;
            let rz = dx(&|q| t[q].shear.x) + dy(&|q| t[q].shear.y) + tp[k].axial;
            let rd = dx(&|q| d[q].plane.x) + dy(&|q| d[q].plane.y) + dp[k].axial;
            let rt = (rx * rx + ry * ry + rz * rz).sqrt();
            full.max_div_t = full.max_div_t.max(rt);
            full.max_div_d = full.max_div_d.max(rd.abs());
            if !near_corner(&s, s.point(i, j), radius) {
                core.max_div_t = core.max_div_t.max(rt);
                core.max_div_d = core.max_div_d.max(rd.abs());
            }
        }
        (full, core)
    });
    let mut full = Residuals::default();
    let mut core = Residuals::default();
    for (f, c) in rows {
        full = full.merge(f);
        core = core.merge(c);
    }

    let mut stress_scale: f64 = 0.0;
    let mut disp_scale: f64 = 0.0;
    for k in 0..s.len() {
        let tm = t[k].to_matrix();
        stress_scale = stress_scale.max(tm.iter().flatten().fold(0.0, |a: f64, v| a.max(v.abs())));
        disp_scale = disp_scale.max(d[k].norm());
        let th = t[k].plane.max_abs();
        full.max_that = full.max_that.max(th);
        if !near_corner(&s, s.point(k % nx, k / nx), radius) {
            core.max_that = core.max_that.max(th);
        }
    }

    let phi = sol.phi(z);
    let pot_scale = phi.max_abs();
    for e in Edge::ALL {
        let n = e.normal();
        for q in 0..s.edge_len(e) {
            let (i, j) = s.edge_node(e, q);
            let k = s.idx(i, j);
            let tn = t[k].traction(n).norm();
            let el = match lateral {
                LateralCondition::FluxFree => d[k].plane.dot(n).abs(),
                LateralCondition::Potential { phi0, phi1, phi2 } => {
                    let wall = phi0.edge(e)[q] + phi1.edge(e)[q] * z + phi2.edge(e)[q] * 0.5 * z * z;
                    (phi.at(i, j) - wall).abs()
                }
            };
            full.max_lateral_tn = full.max_lateral_tn.max(tn);
            full.max_lateral_electric = full.max_lateral_electric.max(el);
            if !near_corner(&s, s.point(i, j), radius) {
                core.max_lateral_tn = core.max_lateral_tn.max(tn);
                core.max_lateral_electric = core.max_lateral_electric.max(el);
            }
        }
    }
    Station { full, core, stress: stress_scale, displacement: disp_scale, potential: pot_scale }
}

/// Default stations `{-L, -L/2, 0, L/2, L}`.
pub fn default_stations(half_length: f64) -> Vec<f64> {
    let l = half_length;
    vec![-l, -0.5 * l, 0.0, 0.5 * l, l]
}

pub fn residuals(sol: &Solution3D, m: &MaterialTip, z_stations: &[f64], lateral: &LateralCondition) -> Result<ResidualReport> {
    residuals_with(sol, m, z_stations, lateral, &VerifyOptions::default())
}

pub fn residuals_with(
    sol: &Solution3D,
    m: &MaterialTip,
    z_stations: &[f64],
    lateral: &LateralCondition,
    opts: &VerifyOptions,
) -> Result<ResidualReport> {
    let s = sol.section();
    let l = sol.half_length;
    if z_stations.is_empty() {
        return Err(Error::InvalidInput("no z stations".into()));
    }
    if let Some(z) = z_stations.iter().find(|z| !(z.abs() <= l * (1.0 + 1e-12))) {
        return Err(Error::InvalidInput(format!("z station {z} outside [-{l}, {l}]")));
    }
    if let LateralCondition::Potential { phi0, phi1, phi2 } = lateral {
        if !(phi0.matches(&s) && phi1.matches(&s) && phi2.matches(&s)) {
            return Err(Error::GridMismatch);
        }
    }
    let radius = opts.corner_fraction * s.x0.min(s.y0);
    let exec = opts.execution;
    let per = exec.map_slice(z_stations, |&z| station(sol, m, z, lateral, radius, exec));
    let mut full = Residuals::default();
    let mut core = Residuals::default();
    let mut scales = Scales { length: s.diameter(), ..Default::default() };
    for st in per {
        full = full.merge(st.full);
        core = core.merge(st.core);
        scales.stress = scales.stress.max(st.stress);
        scales.displacement = scales.displacement.max(st.displacement);
        scales.potential = scales.potential.max(st.potential);
    }
    Ok(ResidualReport {
        full,
        core,
        scales,
        flux_free: matches!(lateral, LateralCondition::FluxFree),
        h: s.h(),
        z_stations: z_stations.to_vec(),
        corner_radius: radius,
    })
}

/// Observed order of a residual sequence.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Order {
    /// All values at round-off level.
    Exact,
    Rate(f64),
}

impl Order {
    pub fn at_least(&self, p: f64) -> bool {
        match self {
            Order::Exact => true,
            Order::Rate(r) => *r >= p,
        }
    }
}

impl std::fmt::Display for Order {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Order::Exact => f.write_str("exact"),
            Order::Rate(r) => write!(f, "{r:.3}"),
        }
    }
}

/// Least-squares slope of `log(err)` against `log(h)`; `Exact` when every
/// error is at most `exact_below`.
pub fn observed_order(hs: &[f64], errs: &[f64], exact_below: f64) -> Result<Order> {
    if hs.len() < 3 || hs.len() != errs.len() {
        return Err(Error::InsufficientGrids { needed: 3, got: hs.len().min(errs.len()) });
    }
    if errs.iter().all(|e| *e <= exact_below) {
        return Ok(Order::Exact);
    }
    let n = hs.len() as f64;
    let xs: Vec<f64> = hs.iter().map(|h| h.ln()).collect();
    let ys: Vec<f64> = errs.iter().map(|e| e.max(f64::MIN_POSITIVE).ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    Ok(Order::Rate(sxy / sxx))
}

#[derive(Debug, Clone, PartialEq)]
pub struct FamilyConvergence {
    pub name: &'static str,
    pub full: Vec<f64>,
    pub core: Vec<f64>,
    /// Successive ratios of the core residual under halving of `h`.
    pub core_ratios: Vec<f64>,
    pub core_order: Order,
    pub full_order: Order,
}

impl FamilyConvergence {
    pub fn ratios_within(&self, lo: f64, hi: f64) -> bool {
        self.core_order == Order::Exact || self.core_ratios.iter().all(|r| (lo..=hi).contains(r))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub nodes: Vec<usize>,
    pub hs: Vec<f64>,
    pub families: Vec<FamilyConvergence>,
    pub reports: Vec<ResidualReport>,
}

/// Runs `run(n)` for each node count (nested: `n - 1` doubling) and fits orders.
pub fn convergence_study<F>(nodes: &[usize], run: F) -> Result<ConvergenceReport>
where
    F: Fn(usize) -> Result<ResidualReport>,
{
    if nodes.len() < 3 {
        return Err(Error::InsufficientGrids { needed: 3, got: nodes.len() });
    }
    if nodes.windows(2).any(|w| w[1] < 2 || (w[1] - 1) != 2 * (w[0] - 1)) {
        return Err(Error::InvalidInput("grids must be nested (n - 1 doubling)".into()));
    }
    let reports = nodes.iter().map(|&n| run(n)).collect::<Result<Vec<_>>>()?;
    let hs: Vec<f64> = reports.iter().map(|r| r.h).collect();
    let mut families = Vec::new();
    for k in 0..5 {
        let full: Vec<f64> = reports.iter().map(|r| r.families()[k].1).collect();
        let core: Vec<f64> = reports.iter().map(|r| r.families()[k].2).collect();
        let scale = reports.iter().map(|r| r.families()[k].3).fold(0.0, f64::max);
        let tiny = EXACT_RTOL * scale;
        families.push(FamilyConvergence {
            name: FAMILY_NAMES[k],
            core_ratios: core.windows(2).map(|w| w[0] / w[1]).collect(),
            core_order: observed_order(&hs, &core, tiny)?,
            full_order: observed_order(&hs, &full, tiny)?,
            full,
            core,
        });
    }
    Ok(ConvergenceReport { nodes: nodes.to_vec(), hs, families, reports })
}
