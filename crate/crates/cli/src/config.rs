//! INI run configuration.
//!
//! ```ini
//! [material]
//! mu = 1.0
//! ...
//! [section]
//! x0 = 1.0
//! y0 = 0.8
//! nx = 65
//! ny = 65
//! L = 2.0
//! [case]
//! mode = almansi
//! v2 = [0.4, -0.3]
//! k0 = 0.1
//! k1 = 0.6
//! ```
//!
//! Arrays are comma-separated values in brackets. Relative file paths are
//! resolved against the directory of the config file.

use crate::CliError;
use ini::{Ini, Properties};
use piezosv::case_almansi::FluxSign;
use piezosv::elliptic::{LinearSolver, SolverConfig};
use piezosv::section::Edge;
use piezosv::{EdgeTrace, MaterialTip, Section, Vec2};
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    FluxFree,
    Almansi,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SectionSpec {
    pub x0: f64,
    pub y0: f64,
    pub nx: usize,
    pub ny: usize,
    pub half_length: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CaseSpec {
    pub mode: Mode,
    pub v1: Vec2,
    pub v2: Vec2,
    pub b1: f64,
    pub phi1_tilde0: f64,
    pub mu1_0: f64,
    pub mu2_0: f64,
    pub k0: f64,
    pub k1: f64,
    pub phi0_trace: Option<PathBuf>,
    pub phi1_trace: Option<PathBuf>,
    pub phi2_trace: Option<PathBuf>,
    pub poisson_cancel: bool,
    pub design_q: Option<Vec2>,
    pub flux_sign: FluxSign,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputSpec {
    pub fields: PathBuf,
    pub report: PathBuf,
    pub z_stations: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifySpec {
    /// Largest accepted `core residual / scale` per family.
    pub threshold: Option<f64>,
    pub corner_fraction: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub parameter: String,
    pub values: Vec<f64>,
    pub report: PathBuf,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub material: MaterialTip,
    pub section: SectionSpec,
    pub case: CaseSpec,
    pub solver: SolverConfig,
    pub output: OutputSpec,
    pub verify: VerifySpec,
    pub sweep: Option<SweepSpec>,
}

pub const SWEEP_PARAMETERS: [&str; 11] =
    ["k0", "k1", "b1", "phi1_tilde0", "v1_x", "v1_y", "v2_x", "v2_y", "mu1_0", "mu2_0", "L"];

const MATERIAL_KEYS: [&str; 10] =
    ["mu", "lambda", "alpha1", "alpha2", "alpha3", "beta1", "beta2", "beta3", "gamma1", "gamma2"];

fn err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

struct Reader<'a> {
    name: &'static str,
    props: Option<&'a Properties>,
}

impl<'a> Reader<'a> {
    fn new(ini: &'a Ini, name: &'static str, allowed: &[&str]) -> Result<Self, CliError> {
        let props = ini.section(Some(name));
        if let Some(p) = props {
            if let Some((k, _)) = p.iter().find(|(k, _)| !allowed.contains(k)) {
                return Err(err(format!("unknown key `{k}` in [{name}]")));
            }
        }
        Ok(Reader { name, props })
    }

    fn raw(&self, key: &str) -> Option<&'a str> {
        self.props.and_then(|p| p.get(key)).map(str::trim)
    }

    fn has(&self, key: &str) -> bool {
        self.raw(key).is_some()
    }

    fn f64_opt(&self, key: &str) -> Result<Option<f64>, CliError> {
        self.raw(key)
            .map(|v| v.parse::<f64>().map_err(|_| err(format!("[{}] {key}: not a number: `{v}`", self.name))))
            .transpose()
    }

    fn f64(&self, key: &str) -> Result<f64, CliError> {
        self.f64_opt(key)?.ok_or_else(|| err(format!("[{}] missing key `{key}`", self.name)))
    }

    fn f64_or(&self, key: &str, default: f64) -> Result<f64, CliError> {
        Ok(self.f64_opt(key)?.unwrap_or(default))
    }

    fn usize(&self, key: &str) -> Result<usize, CliError> {
        let v = self.raw(key).ok_or_else(|| err(format!("[{}] missing key `{key}`", self.name)))?;
        v.parse().map_err(|_| err(format!("[{}] {key}: not a count: `{v}`", self.name)))
    }

    fn bool_or(&self, key: &str, default: bool) -> Result<bool, CliError> {
        match self.raw(key) {
            None => Ok(default),
            Some("true") | Some("yes") | Some("1") => Ok(true),
            Some("false") | Some("no") | Some("0") => Ok(false),
            Some(v) => Err(err(format!("[{}] {key}: not a boolean: `{v}`", self.name))),
        }
    }

    fn array_opt(&self, key: &str) -> Result<Option<Vec<f64>>, CliError> {
        self.raw(key).map(|v| parse_array(v).map_err(|e| err(format!("[{}] {key}: {e}", self.name)))).transpose()
    }

    fn vec2_or(&self, key: &str, default: Vec2) -> Result<Vec2, CliError> {
        match self.array_opt(key)? {
            None => Ok(default),
            Some(a) if a.len() == 2 => Ok(Vec2::new(a[0], a[1])),
            Some(a) => Err(err(format!("[{}] {key}: expected 2 values, got {}", self.name, a.len()))),
        }
    }

    fn path_opt(&self, key: &str, base: &Path) -> Option<PathBuf> {
        self.raw(key).map(|v| base.join(v))
    }
}

/// `[a, b, c]` with optional surrounding whitespace.
pub fn parse_array(s: &str) -> Result<Vec<f64>, String> {
    let inner = s
        .trim()
        .strip_prefix('[')
        .and_then(|r| r.strip_suffix(']'))
        .ok_or_else(|| format!("expected `[v1, v2, ...]`, got `{s}`"))?;
    if inner.trim().is_empty() {
        return Ok(Vec::new());
    }
    inner.split(',').map(|t| t.trim().parse::<f64>().map_err(|_| format!("not a number: `{}`", t.trim()))).collect()
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text =
            std::fs::read_to_string(path).map_err(|e| err(format!("cannot read {}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::parse(&text, base)
    }

    /// Reads only `[material]`; the other sections may be absent.
    pub fn load_material(path: &Path) -> Result<MaterialTip, CliError> {
        let text =
            std::fs::read_to_string(path).map_err(|e| err(format!("cannot read {}: {e}", path.display())))?;
        let ini = Ini::load_from_str(&text).map_err(|e| err(format!("parse error: {e}")))?;
        parse_material(&ini)
    }

    pub fn parse(text: &str, base: &Path) -> Result<Self, CliError> {
        let ini = Ini::load_from_str(text).map_err(|e| err(format!("parse error: {e}")))?;
        for (name, _) in ini.iter() {
            match name {
                None | Some("material" | "section" | "case" | "solver" | "output" | "verify" | "sweep") => {}
                Some(other) => return Err(err(format!("unknown section [{other}]"))),
            }
        }

        let material = parse_material(&ini)?;

        let r = Reader::new(&ini, "section", &["x0", "y0", "nx", "ny", "L"])?;
        let section = SectionSpec { x0: r.f64("x0")?, y0: r.f64("y0")?, nx: r.usize("nx")?, ny: r.usize("ny")?, half_length: r.f64("L")? };

        let r = Reader::new(
            &ini,
            "case",
            &[
                "mode",
                "v1",
                "v2",
                "b1",
                "phi1_tilde0",
                "mu1_0",
                "mu2_0",
                "k0",
                "k1",
                "phi0_trace",
                "phi1_trace",
                "phi2_trace",
                "poisson_cancel",
                "design_q",
                "flux_sign_variant",
            ],
        )?;
        let mode = match r.raw("mode") {
            Some("flux-free") => Mode::FluxFree,
            Some("almansi") => Mode::Almansi,
            Some(m) => return Err(err(format!("[case] mode must be `flux-free` or `almansi`, got `{m}`"))),
            None => return Err(err("[case] missing key `mode`")),
        };
        let flux_sign = match r.raw("flux_sign_variant") {
            None | Some("minus") => FluxSign::Minus,
            Some("plus") => FluxSign::Plus,
            Some(v) => return Err(err(format!("[case] flux_sign_variant must be `minus` or `plus`, got `{v}`"))),
        };
        let case = CaseSpec {
            mode,
            v1: r.vec2_or("v1", Vec2::ZERO)?,
            v2: r.vec2_or("v2", Vec2::ZERO)?,
            b1: r.f64_or("b1", 0.0)?,
            phi1_tilde0: r.f64_or("phi1_tilde0", 0.0)?,
            mu1_0: r.f64_or("mu1_0", 0.0)?,
            mu2_0: r.f64_or("mu2_0", 0.0)?,
            k0: r.f64_or("k0", 0.0)?,
            k1: r.f64_or("k1", 0.0)?,
            phi0_trace: r.path_opt("phi0_trace", base),
            phi1_trace: r.path_opt("phi1_trace", base),
            phi2_trace: r.path_opt("phi2_trace", base),
            poisson_cancel: r.bool_or("poisson_cancel", false)?,
            design_q: match r.array_opt("design_q")? {
                None => None,
                Some(a) if a.len() == 2 => Some(Vec2::new(a[0], a[1])),
                Some(a) => return Err(err(format!("[case] design_q: expected 2 values, got {}", a.len()))),
            },
            flux_sign,
        };
        match mode {
            Mode::FluxFree => {
                for k in ["k0", "k1", "phi0_trace", "phi1_trace", "phi2_trace", "flux_sign_variant"] {
                    if r.has(k) {
                        return Err(err(format!("[case] `{k}` only applies to mode = almansi")));
                    }
                }
            }
            Mode::Almansi => {
                if case.phi2_trace.is_none() && !(r.has("k0") && r.has("k1")) {
                    return Err(err("[case] almansi mode needs `k0` and `k1` or `phi2_trace`"));
                }
                if case.phi2_trace.is_some() && (r.has("k0") || r.has("k1")) {
                    return Err(err("[case] give either `k0`/`k1` or `phi2_trace`, not both"));
                }
                if r.has("poisson_cancel") {
                    return Err(err("[case] `poisson_cancel` only applies to mode = flux-free"));
                }
            }
        }
        if case.poisson_cancel && r.has("phi1_tilde0") {
            return Err(err("[case] `poisson_cancel` sets phi1_tilde0; do not give both"));
        }
        if case.design_q.is_some() && r.has("v2") {
            return Err(err("[case] `design_q` sets v2; do not give both"));
        }
        for p in [&case.phi0_trace, &case.phi1_trace, &case.phi2_trace].into_iter().flatten() {
            if !p.is_file() {
                return Err(err(format!("trace file {} does not exist", p.display())));
            }
        }

        let r = Reader::new(&ini, "solver", &["tolerance", "max_iterations", "method", "compat_tolerance"])?;
        let defaults = SolverConfig::default();
        let solver = SolverConfig {
            method: match r.raw("method") {
                None | Some("auto") => LinearSolver::Auto,
                Some("direct") => LinearSolver::DirectBanded,
                Some("cg") => LinearSolver::ConjugateGradient,
                Some(v) => return Err(err(format!("[solver] method must be auto, direct or cg, got `{v}`"))),
            },
            tolerance: r.f64_or("tolerance", defaults.tolerance)?,
            max_iterations: if r.has("max_iterations") { r.usize("max_iterations")? } else { defaults.max_iterations },
            compat_tolerance: r.f64_or("compat_tolerance", defaults.compat_tolerance)?,
            pinning: defaults.pinning,
        };
        solver.validate().map_err(|e| err(format!("[solver] {e}")))?;

        let r = Reader::new(&ini, "output", &["fields", "report", "z_stations"])?;
        let output = OutputSpec {
            fields: PathBuf::from(r.raw("fields").unwrap_or("fields.csv")),
            report: PathBuf::from(r.raw("report").unwrap_or("report.ini")),
            z_stations: r.array_opt("z_stations")?,
        };
        if let Some(z) = &output.z_stations {
            let l = section.half_length;
            if z.is_empty() || z.iter().any(|z| !(z.abs() <= l)) {
                return Err(err(format!("[output] z_stations must be non-empty and lie in [-{l}, {l}]")));
            }
        }

        let r = Reader::new(&ini, "verify", &["threshold", "corner_fraction"])?;
        let verify = VerifySpec { threshold: r.f64_opt("threshold")?, corner_fraction: r.f64_or("corner_fraction", 0.35)? };
        if !(0.0..0.5).contains(&verify.corner_fraction) {
            return Err(err("[verify] corner_fraction must lie in [0, 0.5)"));
        }
        if verify.threshold.is_some_and(|t| !(t >= 0.0)) {
            return Err(err("[verify] threshold must be non-negative"));
        }

        let r = Reader::new(&ini, "sweep", &["parameter", "values", "report"])?;
        let sweep = match r.raw("parameter") {
            None => None,
            Some(p) => {
                if !SWEEP_PARAMETERS.contains(&p) {
                    return Err(err(format!("[sweep] unknown parameter `{p}`; one of {}", SWEEP_PARAMETERS.join(", "))));
                }
                let values = r.array_opt("values")?.ok_or_else(|| err("[sweep] missing key `values`"))?;
                if values.is_empty() {
                    return Err(err("[sweep] values must not be empty"));
                }
                Some(SweepSpec {
                    parameter: p.to_string(),
                    values,
                    report: PathBuf::from(r.raw("report").unwrap_or("sweep.csv")),
                })
            }
        };

        Ok(RunConfig { material, section, case, solver, output, verify, sweep })
    }

    pub fn build_section(&self) -> Result<Section, CliError> {
        let s = &self.section;
        Section::build(s.x0, s.y0, s.nx, s.ny).map_err(|e| err(format!("[section] {e}")))
    }

    /// A copy with one swept parameter replaced.
    pub fn with_parameter(&self, name: &str, value: f64) -> Result<RunConfig, CliError> {
        let mut c = self.clone();
        let k = &mut c.case;
        match name {
            "k0" | "k1" if k.mode != Mode::Almansi || k.phi2_trace.is_some() => {
                return Err(err(format!("[sweep] `{name}` needs mode = almansi with k0/k1 data")))
            }
            "k0" => k.k0 = value,
            "k1" => k.k1 = value,
            "b1" => k.b1 = value,
            "phi1_tilde0" if k.poisson_cancel => {
                return Err(err("[sweep] phi1_tilde0 is fixed by poisson_cancel"));
            }
            "phi1_tilde0" => k.phi1_tilde0 = value,
            "v1_x" => k.v1.x = value,
            "v1_y" => k.v1.y = value,
            "v2_x" | "v2_y" if k.design_q.is_some() => return Err(err("[sweep] v2 is fixed by design_q")),
            "v2_x" => k.v2.x = value,
            "v2_y" => k.v2.y = value,
            "mu1_0" => k.mu1_0 = value,
            "mu2_0" => k.mu2_0 = value,
            "L" => c.section.half_length = value,
            other => return Err(err(format!("[sweep] unknown parameter `{other}`"))),
        }
        Ok(c)
    }
}

fn edge_name(e: Edge) -> &'static str {
    match e {
        Edge::Bottom => "bottom",
        Edge::Right => "right",
        Edge::Top => "top",
        Edge::Left => "left",
    }
}

/// Reads a trace file with header `edge,index,value`, one row per boundary
/// node of each edge (`index` counts along the edge from its first node).
fn parse_material(ini: &Ini) -> Result<MaterialTip, CliError> {
    let r = Reader::new(ini, "material", &MATERIAL_KEYS)?;
    let mut vals = [0.0; 10];
    for (v, k) in vals.iter_mut().zip(MATERIAL_KEYS) {
        *v = r.f64(k)?;
    }
    Ok(MaterialTip::from_array(vals))
}

pub fn load_trace(path: &Path, s: &Section) -> Result<EdgeTrace, CliError> {
    let mut rdr = csv::Reader::from_path(path).map_err(|e| err(format!("{}: {e}", path.display())))?;
    let header = rdr.headers().map_err(|e| err(format!("{}: {e}", path.display())))?.clone();
    if header.iter().map(str::trim).collect::<Vec<_>>() != ["edge", "index", "value"] {
        return Err(err(format!("{}: header must be `edge,index,value`", path.display())));
    }
    let mut t = EdgeTrace::zeros(s);
    let mut seen: Vec<Vec<bool>> = Edge::ALL.iter().map(|e| vec![false; s.edge_len(*e)]).collect();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| err(format!("{}: {e}", path.display())))?;
        let at = || format!("{} row {}", path.display(), line + 2);
        let name = rec.get(0).unwrap_or("").trim();
        let ei = Edge::ALL
            .iter()
            .position(|e| edge_name(*e) == name)
            .ok_or_else(|| err(format!("{}: unknown edge `{name}`", at())))?;
        let idx: usize =
            rec.get(1).unwrap_or("").trim().parse().map_err(|_| err(format!("{}: bad index", at())))?;
        let val: f64 = rec.get(2).unwrap_or("").trim().parse().map_err(|_| err(format!("{}: bad value", at())))?;
        let e = Edge::ALL[ei];
        if idx >= s.edge_len(e) {
            return Err(err(format!("{}: index {idx} outside edge of {} nodes", at(), s.edge_len(e))));
        }
        if std::mem::replace(&mut seen[ei][idx], true) {
            return Err(err(format!("{}: duplicate node", at())));
        }
        t.edge_mut(e)[idx] = val;
    }
    if seen.iter().flatten().any(|b| !b) {
        return Err(err(format!("{}: trace does not cover every boundary node", path.display())));
    }
    Ok(t)
}

/// Writes a trace in the format read by [`load_trace`].
#[cfg(test)]
pub fn write_trace(path: &Path, t: &EdgeTrace) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path).map_err(|e| err(format!("{}: {e}", path.display())))?;
    let io = |e: csv::Error| err(format!("{}: {e}", path.display()));
    w.write_record(["edge", "index", "value"]).map_err(io)?;
    for e in Edge::ALL {
        for (i, v) in t.edge(e).iter().enumerate() {
            w.write_record([edge_name(e).to_string(), i.to_string(), format!("{v:.16e}")]).map_err(io)?;
        }
    }
    w.flush().map_err(|e| err(format!("{}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = "
[material]
mu = 1
lambda = 0
alpha1 = 2
alpha2 = 0
alpha3 = 0
beta1 = 0
beta2 = 0
beta3 = 1
gamma1 = 1
gamma2 = 1
[section]
x0 = 1
y0 = 1
nx = 9
ny = 9
L = 1
";

    fn parse(extra: &str) -> Result<RunConfig, CliError> {
        RunConfig::parse(&format!("{BASE}{extra}"), Path::new("."))
    }

    #[test]
    fn arrays() {
        assert_eq!(parse_array("[1, -2.5,3e-1]").unwrap(), vec![1.0, -2.5, 0.3]);
        assert_eq!(parse_array(" [] ").unwrap(), Vec::<f64>::new());
        assert!(parse_array("1, 2").is_err());
        assert!(parse_array("[1, x]").is_err());
    }

    #[test]
    fn minimal_fluxfree() {
        let c = parse("[case]\nmode = flux-free\nb1 = 1\n").unwrap();
        assert_eq!(c.case.mode, Mode::FluxFree);
        assert_eq!(c.case.b1, 1.0);
        assert_eq!(c.material.alpha1, 2.0);
        assert_eq!(c.output.fields, PathBuf::from("fields.csv"));
        assert!(c.sweep.is_none());
    }

    #[test]
    fn mode_specific_keys() {
        assert!(parse("[case]\nmode = almansi\n").is_err());
        assert!(parse("[case]\nmode = almansi\nk0 = 0\nk1 = 1\n").is_ok());
        assert!(parse("[case]\nmode = flux-free\nk0 = 0\n").is_err());
        assert!(parse("[case]\nmode = almansi\nk0 = 0\nk1 = 1\npoisson_cancel = true\n").is_err());
        assert!(parse("[case]\nmode = other\n").is_err());
    }

    #[test]
    fn rejects_typos_and_missing() {
        assert!(parse("[case]\nmode = flux-free\nb_1 = 1\n").is_err());
        assert!(parse("[case]\nmode = flux-free\n[extra]\na = 1\n").is_err());
        assert!(RunConfig::parse("[case]\nmode = flux-free\n", Path::new(".")).is_err());
        assert!(parse("[case]\nmode = almansi\nphi2_trace = /nonexistent/trace.csv\n").is_err());
    }

    #[test]
    fn sweep_parameters() {
        let c = parse("[case]\nmode = almansi\nk0 = 0\nk1 = 1\n[sweep]\nparameter = k1\nvalues = [0, 0.5]\n").unwrap();
        let s = c.sweep.clone().unwrap();
        assert_eq!(s.values, vec![0.0, 0.5]);
        assert_eq!(c.with_parameter("k1", 0.5).unwrap().case.k1, 0.5);
        assert!(parse("[case]\nmode = flux-free\n[sweep]\nparameter = nope\nvalues = [1]\n").is_err());
        let f = parse("[case]\nmode = flux-free\n").unwrap();
        assert!(f.with_parameter("k1", 1.0).is_err());
    }

    #[test]
    fn trace_roundtrip() {
        let s = Section::build(1.0, 1.0, 5, 4).unwrap();
        let t = EdgeTrace::from_fn(&s, |p, _| p.x + 2.0 * p.y);
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("t.csv");
        write_trace(&p, &t).unwrap();
        assert_eq!(load_trace(&p, &s).unwrap(), t);
        let other = Section::build(1.0, 1.0, 7, 4).unwrap();
        assert!(load_trace(&p, &other).is_err());
    }
}
