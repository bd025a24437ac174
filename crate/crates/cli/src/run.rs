use crate::config::{load_trace, Mode, RunConfig};
use crate::report::Report;
use crate::CliError;
use piezosv::case_almansi::{
    design_v2, shear_resultant, solve_almansi, AlmansiBoundaryData, AlmansiOptions, Phi2Data,
};
use piezosv::case_fluxfree::{poisson_cancel_potential, solve_fluxfree, Resultants};
use piezosv::svcore::{SVConstants, Solution3D};
use piezosv::verify::{constitutive_fields, default_stations, residuals_with, LateralCondition, ResidualReport, VerifyOptions};
use piezosv::{derive_moduli, MaterialTip, DerivedModuli, EdgeTrace, Execution, Vec2};
use std::io::Write;
use std::path::Path;

/// A solved case with everything the report needs.
pub struct Solved {
    pub solution: Solution3D,
    pub derived: DerivedModuli,
    pub resultants: Resultants,
    pub lateral: LateralCondition,
    /// Extra `[constants]` entries (lambda0, Omegas, compatibility defects, ...).
    pub extras: Vec<(String, f64)>,
    /// `(q target, q from the designed v2)` when `design_q` is set.
    pub design: Option<(Vec2, Vec2)>,
}

pub fn derive(m: &MaterialTip) -> Result<Report, CliError> {
    let dm = derive_moduli(m)?;
    let mut r = Report::default();
    r.section("derived", dm.entries().iter().map(|(k, v)| (k.to_string(), *v)).collect());
    Ok(r)
}

pub fn solve(cfg: &RunConfig) -> Result<Solved, CliError> {
    let s = cfg.build_section()?;
    let m = &cfg.material;
    let dm = derive_moduli(m)?;
    let case = &cfg.case;
    let mut c = SVConstants {
        v1: case.v1,
        v2: case.v2,
        b1: case.b1,
        phi1_tilde0: case.phi1_tilde0,
        mu1_0: case.mu1_0,
        mu2_0: case.mu2_0,
        ..Default::default()
    };
    let l = cfg.section.half_length;
    let mut extras = Vec::new();
    let mut design = None;
    match case.mode {
        Mode::FluxFree => {
            if case.poisson_cancel {
                c.phi1_tilde0 = poisson_cancel_potential(case.b1, m)?;
            }
            if let Some(q) = case.design_q {
                c.v2 = design_v2(q, Vec2::ZERO, &dm, &s.inertia())?;
                design = Some((q, shear_resultant(c.v2, Vec2::ZERO, &dm, &s.inertia())));
            }
            let sol = solve_fluxfree(&c, m, &s, l, &cfg.solver)?;
            extras.push(("lambda0".into(), sol.lambda0));
            extras.push(("lambda1_x".into(), sol.lambda1.x));
            extras.push(("lambda1_y".into(), sol.lambda1.y));
            for (name, (d, sc)) in ["phi_tilde0", "uz_tilde0"].iter().zip(sol.compatibility) {
                extras.push((format!("compat_defect_{name}"), d));
                extras.push((format!("compat_scale_{name}"), sc));
            }
            Ok(Solved {
                solution: sol.solution,
                derived: dm,
                resultants: sol.resultants,
                lateral: LateralCondition::FluxFree,
                extras,
                design,
            })
        }
        Mode::Almansi => {
            let trace = |p: &Option<std::path::PathBuf>| p.as_deref().map(|p| load_trace(p, &s)).transpose();
            let bd = AlmansiBoundaryData {
                phi2: match trace(&case.phi2_trace)? {
                    Some(t) => Phi2Data::Trace(t),
                    None => Phi2Data::Linear { k0: case.k0, k1: case.k1 },
                },
                phi1_trace: trace(&case.phi1_trace)?,
                phi0_trace: trace(&case.phi0_trace)?,
            };
            if let Some(q) = case.design_q {
                // Design needs k; with a general trace the affine part is unknown.
                let (_, k) = bd.affine_phi2(&s).ok_or_else(|| {
                    CliError::Config("[case] design_q needs k0/k1 data, not phi2_trace".into())
                })?;
                c.v2 = design_v2(q, k, &dm, &s.inertia())?;
                design = Some((q, shear_resultant(c.v2, k, &dm, &s.inertia())));
            }
            let opts = AlmansiOptions { flux_sign: case.flux_sign };
            let sol = solve_almansi(&c, &bd, m, &s, l, &cfg.solver, &opts)?;
            extras.push(("omega0_x".into(), sol.omega0.x));
            extras.push(("omega0_y".into(), sol.omega0.y));
            extras.push(("omega1_bar".into(), sol.omega1_bar));
            extras.push(("omega2_x".into(), sol.omega2.x));
            extras.push(("omega2_y".into(), sol.omega2.y));
            extras.push(("omega3_bar".into(), sol.omega3_bar));
            extras.push(("b2_correction".into(), sol.b2_correction));
            extras.push(("compat_defect_uz_tilde0".into(), sol.compatibility.0));
            extras.push(("compat_scale_uz_tilde0".into(), sol.compatibility.1));
            let zero = || EdgeTrace::zeros(&s);
            let lateral = LateralCondition::Potential {
                phi0: bd.phi0_trace.clone().unwrap_or_else(zero),
                phi1: bd.phi1_trace.clone().unwrap_or_else(zero),
                phi2: sol.solution.profiles.phi2.trace(),
            };
            Ok(Solved { solution: sol.solution, derived: dm, resultants: sol.resultants, lateral, extras, design })
        }
    }
}

pub fn stations(cfg: &RunConfig) -> Vec<f64> {
    cfg.output.z_stations.clone().unwrap_or_else(|| default_stations(cfg.section.half_length))
}

pub fn solve_report(solved: &Solved) -> Report {
    let mut r = Report::default();
    r.section("derived", solved.derived.entries().iter().map(|(k, v)| (k.to_string(), *v)).collect());
    let c = &solved.solution.constants;
    let mut constants = vec![
        ("v1_x".to_string(), c.v1.x),
        ("v1_y".into(), c.v1.y),
        ("v2_x".into(), c.v2.x),
        ("v2_y".into(), c.v2.y),
        ("b1".into(), c.b1),
        ("b2".into(), c.b2),
        ("phi1_tilde0".into(), c.phi1_tilde0),
        ("phi2_tilde0".into(), c.phi2_tilde0),
        ("mu1_0".into(), c.mu1_0),
        ("mu2_0".into(), c.mu2_0),
        ("k0".into(), c.k0),
        ("k_x".into(), c.k.x),
        ("k_y".into(), c.k.y),
        ("L".into(), solved.solution.half_length),
    ];
    constants.extend(solved.extras.iter().cloned());
    r.section("constants", constants);
    let res = &solved.resultants;
    let mut out = vec![
        ("axial_force".to_string(), res.axial_force),
        ("axial_force_quadrature".into(), res.axial_force_quadrature),
        ("d_flux".into(), res.d_flux),
        ("d_flux_quadrature".into(), res.d_flux_quadrature),
        ("potential_difference".into(), res.potential_difference),
        ("shear_x".into(), res.shear.x),
        ("shear_y".into(), res.shear.y),
        ("shear_quadrature_x".into(), res.shear_quadrature.x),
        ("shear_quadrature_y".into(), res.shear_quadrature.y),
        ("max_u_pi0".into(), solved.solution.u_pi0.max_norm()),
        ("max_u_pi1".into(), solved.solution.u_pi1.max_norm()),
    ];
    if let Some((q, back)) = solved.design {
        out.push(("design_q_x".into(), q.x));
        out.push(("design_q_y".into(), q.y));
        out.push(("design_roundtrip_q_x".into(), back.x));
        out.push(("design_roundtrip_q_y".into(), back.y));
        out.push(("design_roundtrip_error".into(), (back - q).norm() / q.norm().max(f64::MIN_POSITIVE)));
    }
    r.section("resultants", out);
    r
}

pub fn residual_report(cfg: &RunConfig, solved: &Solved, execution: Execution) -> Result<ResidualReport, CliError> {
    let opts = VerifyOptions { corner_fraction: cfg.verify.corner_fraction, execution };
    Ok(residuals_with(&solved.solution, &cfg.material, &stations(cfg), &solved.lateral, &opts)?)
}

pub fn add_residuals(r: &mut Report, rr: &ResidualReport) {
    let mut entries = vec![("h".to_string(), rr.h), ("corner_radius".into(), rr.corner_radius)];
    for (name, full, core, scale) in rr.families() {
        entries.push((format!("max_{name}"), full));
        entries.push((format!("core_max_{name}"), core));
        entries.push((format!("scale_{name}"), scale));
    }
    r.section("residuals", entries);
    r.text("residuals", "z_stations", &crate::report::format_array(&rr.z_stations));
}

/// Families whose core residual exceeds `threshold * scale`.
pub fn threshold_failures(rr: &ResidualReport, threshold: f64) -> Vec<String> {
    rr.families()
        .into_iter()
        .filter(|(_, _, core, scale)| !(*core <= threshold * scale))
        .map(|(name, _, core, scale)| format!("{name}: {core:e} > {threshold:e} x {scale:e}"))
        .collect()
}

/// One CSV row per (z station, node).
pub fn write_fields(path: &Path, cfg: &RunConfig, sol: &Solution3D, execution: Execution) -> Result<(), CliError> {
    let s = sol.section();
    let file = std::fs::File::create(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let mut w = csv::Writer::from_writer(std::io::BufWriter::new(file));
    let io = |e: csv::Error| CliError::Io(format!("{}: {e}", path.display()));
    w.write_record(["x", "y", "z", "ux", "uy", "uz", "phi", "sigma_zz", "dz"]).map_err(io)?;
    for z in stations(cfg) {
        let (t, d) = constitutive_fields(sol, &cfg.material, z, execution);
        let up = sol.u_pi(z);
        let uz = sol.uz(z);
        let phi = sol.phi(z);
        for j in 0..s.ny {
            for i in 0..s.nx {
                let k = s.idx(i, j);
                let p = s.point(i, j);
                let row = [p.x, p.y, z, up.values[k].x, up.values[k].y, uz.values[k], phi.values[k], t[k].axial, d[k].axial];
                if row.iter().any(|v| !v.is_finite()) {
                    return Err(CliError::Solve(format!("non-finite field value at node ({i}, {j}), z = {z}")));
                }
                w.write_record(row.iter().map(|v| format!("{v:.16e}"))).map_err(io)?;
            }
        }
    }
    let mut inner = w.into_inner().map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    inner.flush().map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}
