//! Convergence studies: configuration, built-in problems, CSV output and
//! threshold checks.

use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::assembly::{assemble, solve, AssemblyOptions, SolverKind, SolverOptions};
use crate::error::{Error, Result};
use crate::mesh::{
    generate_lshape_triangular, generate_unit_square, read_mesh, uniform_refine, MeshFamily, OrientationPolicy, Point,
    PolygonalMesh,
};
use crate::parallel::Parallelism;
use crate::polyspace::{MaterialMap, MaterialTensor, Polynomial2};
use crate::postproc::{discrete_energy, flux_report, ErrorReport, FluxReport};

pub const CSV_HEADER: [&str; 13] = [
    "level",
    "h",
    "n_elem",
    "n_face",
    "n_dof_condensed",
    "nnz",
    "err_energy",
    "eoc_energy",
    "err_l2",
    "eoc_l2",
    "err_rec_l2",
    "jump_seminorm",
    "energy",
];

#[derive(Debug, Clone, PartialEq)]
pub enum Problem {
    /// Unit square, `u = x²(1-x)²y²(1-y)²`.
    SquareManufactured,
    /// L-shaped domain `(0,1)² \ [1/2,1)²`, `f ≡ 1`.
    LShapeUniform,
    /// Mesh read from a file and refined uniformly, `f ≡ 1`.
    CustomMesh(PathBuf),
}

impl fmt::Display for Problem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Problem::SquareManufactured => write!(f, "square_manufactured"),
            Problem::LShapeUniform => write!(f, "lshape_uniform"),
            Problem::CustomMesh(p) => write!(f, "custom_mesh({})", p.display()),
        }
    }
}

/// Acceptance thresholds checked at the end of a study; unset ones are
/// skipped.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Thresholds {
    pub min_eoc_energy: Option<f64>,
    pub min_eoc_l2: Option<f64>,
    pub energy_min: Option<f64>,
    pub energy_max: Option<f64>,
    pub max_flux_residual: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct StudyConfig {
    pub problem: Problem,
    pub k: usize,
    pub family: MeshFamily,
    pub levels: usize,
    /// One value, or several for a sweep.
    pub etas: Vec<f64>,
    pub materials: MaterialMap,
    pub tol: f64,
    pub solver: SolverKind,
    pub out: Option<PathBuf>,
    pub flux_report: bool,
    pub export_matrix: Option<PathBuf>,
    pub parallelism: Parallelism,
    pub thresholds: Thresholds,
}

impl Default for StudyConfig {
    fn default() -> Self {
        StudyConfig {
            problem: Problem::SquareManufactured,
            k: 1,
            family: MeshFamily::Triangular,
            levels: 4,
            etas: vec![1.0],
            materials: MaterialMap::default(),
            tol: 1e-10,
            solver: SolverKind::Direct,
            out: None,
            flux_report: false,
            export_matrix: None,
            parallelism: Parallelism::Serial,
            thresholds: Thresholds::default(),
        }
    }
}

fn parse_num<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::Config(format!("{key}: cannot parse '{}'", value.trim())))
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value.trim() {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        v => Err(Error::Config(format!("{key}: expected true or false, got '{v}'"))),
    }
}

impl StudyConfig {
    /// Reads a `key = value` file on top of the defaults.
    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read config file {}: {e}", path.display())))?;
        let mut cfg = StudyConfig::default();
        cfg.apply_text(&text, path)?;
        Ok(cfg)
    }

    pub fn apply_text(&mut self, text: &str, path: &Path) -> Result<()> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::Parse {
                path: path.to_path_buf(),
                line: i + 1,
                message: format!("expected key = value, got '{line}'"),
            })?;
            self.set(key.trim(), value.trim()).map_err(|e| Error::Parse {
                path: path.to_path_buf(),
                line: i + 1,
                message: e.to_string(),
            })?;
        }
        Ok(())
    }

    /// Sets one option by name, as in the config file.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "problem" => {
                self.problem = match value {
                    "square_manufactured" => Problem::SquareManufactured,
                    "lshape_uniform" => Problem::LShapeUniform,
                    other => {
                        return Err(Error::Config(format!(
                            "unknown problem '{other}' (expected square_manufactured or lshape_uniform; use mesh = <path> for a mesh file)"
                        )))
                    }
                }
            }
            "mesh" => self.problem = Problem::CustomMesh(PathBuf::from(value)),
            "k" => self.k = parse_num(key, value)?,
            "family" => self.family = value.parse()?,
            "levels" => self.levels = parse_num(key, value)?,
            "eta" => self.etas = vec![parse_num(key, value)?],
            "eta_sweep" => {
                self.etas = value
                    .split(',')
                    .filter(|s| !s.trim().is_empty())
                    .map(|s| parse_num(key, s))
                    .collect::<Result<_>>()?
            }
            "tol" => self.tol = parse_num(key, value)?,
            "solver" => {
                self.solver = match value {
                    "direct" => SolverKind::Direct,
                    "cg" => SolverKind::ConjugateGradient,
                    other => return Err(Error::Config(format!("unknown solver '{other}' (expected direct or cg)"))),
                }
            }
            "out" => self.out = Some(PathBuf::from(value)),
            "flux_report" => self.flux_report = parse_bool(key, value)?,
            "export_matrix" => self.export_matrix = Some(PathBuf::from(value)),
            "threads" => {
                let n: usize = parse_num(key, value)?;
                self.parallelism = if n == 0 { Parallelism::Serial } else { Parallelism::Threads(n) };
            }
            "min_eoc_energy" => self.thresholds.min_eoc_energy = Some(parse_num(key, value)?),
            "min_eoc_l2" => self.thresholds.min_eoc_l2 = Some(parse_num(key, value)?),
            "energy_min" => self.thresholds.energy_min = Some(parse_num(key, value)?),
            "energy_max" => self.thresholds.energy_max = Some(parse_num(key, value)?),
            "max_flux_residual" => self.thresholds.max_flux_residual = Some(parse_num(key, value)?),
            _ => {
                if let Some(id) = key.strip_prefix("material.") {
                    let id: u32 = parse_num(key, id)?;
                    let v: Vec<f64> = value.split_whitespace().map(|s| parse_num(key, s)).collect::<Result<_>>()?;
                    let upper: [f64; 6] = v.try_into().map_err(|_| {
                        Error::Config(format!("{key}: expected 6 numbers V11 V12 V13 V22 V23 V33"))
                    })?;
                    self.materials.insert(id, MaterialTensor::from_upper(upper)?);
                } else {
                    return Err(Error::Config(format!("unknown option '{key}'")));
                }
            }
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::DegreeTooLow(0));
        }
        if self.levels == 0 {
            return Err(Error::Config("levels must be at least 1".into()));
        }
        if self.etas.is_empty() {
            return Err(Error::Config("eta sweep is empty".into()));
        }
        if let Some(&eta) = self.etas.iter().find(|e| !(**e > 0.0) || !e.is_finite()) {
            return Err(Error::NonPositiveEta(eta));
        }
        if !(self.tol > 0.0) {
            return Err(Error::Config(format!("tol must be positive, got {}", self.tol)));
        }
        if let Problem::CustomMesh(p) = &self.problem {
            if !p.exists() {
                return Err(Error::Config(format!("mesh file {} does not exist", p.display())));
            }
        }
        Ok(())
    }
}

/// Exact solution and load of a built-in problem.
#[derive(Debug, Clone)]
pub struct ManufacturedCase {
    pub name: &'static str,
    pub exact: Option<Polynomial2>,
    pub load: fn(&Point) -> f64,
}

fn bubble(t: f64) -> f64 {
    t * t * (1.0 - t) * (1.0 - t)
}

fn bubble_dd(t: f64) -> f64 {
    2.0 - 12.0 * t + 12.0 * t * t
}

fn square_load(p: &Point) -> f64 {
    24.0 * bubble(p.y) + 2.0 * bubble_dd(p.x) * bubble_dd(p.y) + 24.0 * bubble(p.x)
}

fn unit_load(_: &Point) -> f64 {
    1.0
}

impl ManufacturedCase {
    /// `u = p(x)p(y)` with `p(t) = t²(1-t)²` and `f = Δ²u`.
    pub fn square() -> Self {
        let px = Polynomial2::new(vec![((2, 0), 1.0), ((3, 0), -2.0), ((4, 0), 1.0)]);
        let py = Polynomial2::new(vec![((0, 2), 1.0), ((0, 3), -2.0), ((0, 4), 1.0)]);
        ManufacturedCase { name: "square_manufactured", exact: Some(px.mul(&py)), load: square_load }
    }

    /// Uniform unit load, no closed-form solution.
    pub fn uniform_load() -> Self {
        ManufacturedCase { name: "uniform_load", exact: None, load: unit_load }
    }
}

/// One computed row: the level, the η used and the measured quantities.
#[derive(Debug, Clone)]
pub struct StudyRow {
    pub eta: f64,
    pub report: ErrorReport,
    pub residual: f64,
    pub energy_mismatch: f64,
    pub flux: Option<FluxReport>,
}

#[derive(Debug, Clone)]
pub struct ThresholdCheck {
    pub name: String,
    pub value: f64,
    pub passed: bool,
}

#[derive(Debug, Clone)]
pub struct StudyReport {
    pub rows: Vec<StudyRow>,
    pub checks: Vec<ThresholdCheck>,
}

impl StudyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    /// Human-readable summary: final orders, energies, flux maxima and
    /// threshold outcomes.
    pub fn summary(&self) -> String {
        let mut s = String::new();
        let etas: Vec<f64> = {
            let mut v: Vec<f64> = Vec::new();
            for r in &self.rows {
                if !v.contains(&r.eta) {
                    v.push(r.eta);
                }
            }
            v
        };
        for eta in etas {
            let rows: Vec<&StudyRow> = self.rows.iter().filter(|r| r.eta == eta).collect();
            if let Some(last) = rows.last() {
                let r = &last.report;
                s += &format!(
                    "eta={eta:e} level={} h={:.4e}: err_energy={:.4e} (eoc {}) err_l2={:.4e} (eoc {}) energy={:.10e}\n",
                    r.level,
                    r.h,
                    r.err_energy,
                    fmt_opt(r.eoc_energy),
                    r.err_l2,
                    fmt_opt(r.eoc_l2),
                    r.energy
                );
                if let Some(f) = &last.flux {
                    s += &format!(
                        "  equilibrium: moment {:.3e} shear {:.3e} virtual work {:.3e}\n",
                        f.max_moment, f.max_shear, f.max_virtual_work
                    );
                }
            }
        }
        for c in &self.checks {
            s += &format!("{} {} ({:e})\n", if c.passed { "PASS" } else { "FAIL" }, c.name, c.value);
        }
        s
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or("nan".into(), |x| format!("{x:.3}"))
}

fn fmt_float(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else {
        format!("{v:e}")
    }
}

fn csv_record(r: &ErrorReport) -> Vec<String> {
    vec![
        r.level.to_string(),
        fmt_float(r.h),
        r.n_elem.to_string(),
        r.n_face.to_string(),
        r.n_dof_condensed.to_string(),
        r.nnz.to_string(),
        fmt_float(r.err_energy),
        fmt_float(r.eoc_energy.unwrap_or(f64::NAN)),
        fmt_float(r.err_l2),
        fmt_float(r.eoc_l2.unwrap_or(f64::NAN)),
        fmt_float(r.err_rec_l2),
        fmt_float(r.jump_seminorm),
        fmt_float(r.energy),
    ]
}

/// Mesh of refinement level `level ≥ 1`. Built-in domains use `n = 2^level`
/// subdivisions per unit length; a mesh file is refined `level - 1` times.
pub fn level_mesh(config: &StudyConfig, level: usize, previous: Option<&PolygonalMesh>) -> Result<PolygonalMesh> {
    match &config.problem {
        Problem::SquareManufactured => generate_unit_square(config.family, 1 << level),
        Problem::LShapeUniform => generate_lshape_triangular(1 << level),
        Problem::CustomMesh(path) => match previous {
            Some(m) => uniform_refine(m),
            None => read_mesh(path, OrientationPolicy::Normalize),
        },
    }
}

/// Runs every level (and every η of a sweep, inner loop), writing one CSV
/// row per solve to `csv_out` as soon as it is computed.
pub fn run_study<W: Write>(config: &StudyConfig, csv_out: Option<W>) -> Result<StudyReport> {
    config.validate()?;
    let case = match config.problem {
        Problem::SquareManufactured => ManufacturedCase::square(),
        _ => ManufacturedCase::uniform_load(),
    };
    let mut writer = csv_out.map(|w| csv::Writer::from_writer(w));
    if let Some(w) = writer.as_mut() {
        w.write_record(CSV_HEADER)?;
        w.flush()?;
    }
    let assembly = AssemblyOptions { parallelism: config.parallelism, element_order: None };
    let solver = SolverOptions { kind: config.solver, tol: config.tol, max_iterations: None };
    let mut rows: Vec<StudyRow> = Vec::new();
    let mut mesh: Option<PolygonalMesh> = None;
    for level in 1..=config.levels {
        let at_level = |e: Error| Error::AtLevel { level, source: Box::new(e) };
        let m = level_mesh(config, level, mesh.as_ref()).map_err(at_level)?;
        for &eta in &config.etas {
            let system = assemble(&m, config.k, &config.materials, eta, &case.load, &assembly).map_err(at_level)?;
            if let Some(path) = &config.export_matrix {
                if level == config.levels {
                    system.matrix.write_matrix_market(path).map_err(at_level)?;
                }
            }
            let solution = solve(&system, &solver).map_err(at_level)?;
            let exact = case.exact.as_ref().map(|u| u as &dyn crate::polyspace::ScalarField);
            let previous = rows.iter().rev().find(|r| r.eta == eta).map(|r| &r.report);
            let report = ErrorReport::compute(level, m.meshsize(), &system, &solution, exact).with_previous(previous);
            let flux = if config.flux_report { Some(flux_report(&system, &solution).map_err(at_level)?) } else { None };
            log::info!(
                "level {level} eta {eta:e}: {} faces, residual {:.2e}, energy {:.10e}",
                m.num_faces(),
                solution.residual,
                report.energy
            );
            if let Some(w) = writer.as_mut() {
                w.write_record(csv_record(&report))?;
                w.flush()?;
            }
            rows.push(StudyRow {
                eta,
                residual: solution.residual,
                energy_mismatch: discrete_energy(&system, &solution).mismatch(),
                report,
                flux,
            });
        }
        mesh = Some(m);
    }
    let checks = check_thresholds(&config.thresholds, &rows);
    Ok(StudyReport { rows, checks })
}

fn check_thresholds(t: &Thresholds, rows: &[StudyRow]) -> Vec<ThresholdCheck> {
    let final_level = rows.iter().map(|r| r.report.level).max().unwrap_or(0);
    let finals: Vec<&StudyRow> = rows.iter().filter(|r| r.report.level == final_level).collect();
    let mut checks = Vec::new();
    let mut check = |name: String, value: f64, passed: bool| checks.push(ThresholdCheck { name, value, passed });
    for r in &finals {
        let eta = r.eta;
        if let Some(min) = t.min_eoc_energy {
            let v = r.report.eoc_energy.unwrap_or(f64::NAN);
            check(format!("energy eoc >= {min} (eta {eta:e})"), v, v >= min);
        }
        if let Some(min) = t.min_eoc_l2 {
            let v = r.report.eoc_l2.unwrap_or(f64::NAN);
            check(format!("l2 eoc >= {min} (eta {eta:e})"), v, v >= min);
        }
        if let Some(lo) = t.energy_min {
            check(format!("energy >= {lo:e} (eta {eta:e})"), r.report.energy, r.report.energy >= lo);
        }
        if let Some(hi) = t.energy_max {
            check(format!("energy <= {hi:e} (eta {eta:e})"), r.report.energy, r.report.energy <= hi);
        }
    }
    if let Some(max) = t.max_flux_residual {
        for r in rows {
            let v = r.flux.as_ref().map_or(f64::NAN, |f| f.max());
            check(format!("equilibrium residual <= {max:e} (level {}, eta {:e})", r.report.level, r.eta), v, v <= max);
        }
    }
    checks
}
