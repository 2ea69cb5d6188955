//! Run configuration: a strict TOML file plus command-line overrides.

use crate::fields;
use nanoflux_core::driver::{EpsSchedule, PicardConfig, RestartPolicy};
use nanoflux_core::grid::AdvectionScheme;
use nanoflux_core::params::{rescale_cells, rescale_faces};
use nanoflux_core::verify::{EpsPolicy, MmsCase, StudyConfig, StudyKind};
use nanoflux_core::{
    BoundaryTrace, CellField, FaceField, LinearCoefficient, ModelParams, PhysicalCoefficients, TemperatureExtension,
    UniformGrid,
};
use serde::Deserialize;
use std::f64::consts::PI;
use std::fmt;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Mode {
    Solve,
    Mms,
    SweepEps,
    Check,
}

impl Mode {
    pub fn name(&self) -> &'static str {
        match self {
            Mode::Solve => "solve",
            Mode::Mms => "mms",
            Mode::SweepEps => "sweep-eps",
            Mode::Check => "check",
        }
    }
}

/// Why a configuration was rejected.
#[derive(Debug)]
pub enum ConfigError {
    Io { path: PathBuf, message: String },
    /// TOML syntax or schema error; the message carries line and column.
    Parse { path: PathBuf, message: String },
    /// A value outside its admissible range, named by its key.
    Invalid { field: String, message: String },
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigError::Io { path, message } => write!(f, "cannot read {}: {message}", path.display()),
            ConfigError::Parse { path, message } => write!(f, "{}: {message}", path.display()),
            ConfigError::Invalid { field, message } => write!(f, "invalid `{field}`: {message}"),
        }
    }
}

impl std::error::Error for ConfigError {}

fn invalid(field: &str, message: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        field: field.to_string(),
        message: message.into(),
    }
}

// ---- file schema ----

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    grid: Option<GridSection>,
    #[serde(default)]
    model: ModelSection,
    #[serde(default)]
    epsilon: EpsilonSection,
    #[serde(default)]
    picard: PicardSection,
    #[serde(default)]
    output: OutputSection,
    mms: Option<MmsSection>,
    sweep: Option<SweepSection>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct GridSection {
    n: Option<usize>,
    nx: Option<usize>,
    ny: Option<usize>,
    origin: Option<[f64; 2]>,
    extent: Option<[f64; 2]>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
enum Preset {
    Trivial,
    SmallData,
    Adversarial,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelSection {
    preset: Option<Preset>,
    /// `[c0, c1]` of `k(phi) = c0 + c1 phi`.
    conductivity: Option<[f64; 2]>,
    viscosity: Option<[f64; 2]>,
    beta: Option<f64>,
    gravity: Option<[f64; 2]>,
    t_inf: Option<f64>,
    boundary: Option<BoundarySpec>,
    heat_source: Option<SourceSpec>,
    body_force: Option<SourceSpec>,
    temperature_extension: Option<TemperatureExtension>,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum BoundarySpec {
    Constant { value: f64 },
    File { path: PathBuf },
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum SourceSpec {
    Zero,
    /// The small-data shapes rescaled to the given discrete norm.
    Sine { norm: f64 },
    File { path: PathBuf },
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct EpsilonSection {
    eps0: Option<f64>,
    factor: Option<f64>,
    steps: Option<usize>,
    min: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct PicardSection {
    /// Damping `omega`.
    omega: Option<f64>,
    tol: Option<f64>,
    max_iters: Option<usize>,
    bound_tol: Option<f64>,
    restart: Option<RestartSection>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RestartSection {
    patience: usize,
    max_restarts: usize,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct OutputSection {
    dir: Option<PathBuf>,
    #[serde(default)]
    vtk: bool,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(rename_all = "snake_case")]
enum CaseName {
    Trig,
    Constant,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct MmsSection {
    case: CaseName,
    /// Fraction for the constant case.
    value: Option<f64>,
    kind: StudyKind,
    grids: Vec<usize>,
    /// `epsilon = eps_factor * h`; exclusive with `eps_fixed`.
    eps_factor: Option<f64>,
    eps_fixed: Option<f64>,
    /// Smallest acceptable fitted order over the primary fields.
    min_order: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SweepSection {
    epsilons: Vec<f64>,
}

// ---- resolved configuration ----

#[derive(Debug, Clone)]
pub struct MmsPlan {
    pub study: StudyConfig,
    pub min_order: Option<f64>,
}

/// Everything a run needs, validated.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub mode: Mode,
    pub grid: Option<UniformGrid>,
    pub params: Option<ModelParams>,
    pub coefficients: PhysicalCoefficients,
    pub temperature_extension: TemperatureExtension,
    pub schedule: Option<EpsSchedule>,
    pub picard: PicardConfig,
    pub scheme: AdvectionScheme,
    pub out_dir: PathBuf,
    pub vtk: bool,
    pub mms: Option<MmsPlan>,
    pub sweep: Vec<f64>,
}

/// Command-line settings that override or complete the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub upwind: bool,
}

pub const DEFAULT_OUT_DIR: &str = "nanoflux-out";

/// Output directory to use when the configuration itself cannot be read.
pub fn fallback_out_dir(overrides: &Overrides) -> PathBuf {
    overrides.out.clone().unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR))
}

/// Append a "did you mean" hint to serde's unknown-field messages.
fn with_suggestion(message: String) -> String {
    let Some(start) = message.find("unknown field `") else {
        return message;
    };
    let rest = &message[start + "unknown field `".len()..];
    let Some(end) = rest.find('`') else {
        return message;
    };
    let unknown = &rest[..end];
    let expected: Vec<&str> = rest[end + 1..].split('`').skip(1).step_by(2).collect();
    let best = expected
        .iter()
        .map(|c| (strsim::levenshtein(unknown, c), *c))
        .min();
    match best {
        Some((d, candidate)) if d <= 3.max(unknown.len() / 3) => {
            format!("{}\ndid you mean `{candidate}`?", message.trim_end())
        }
        _ => message,
    }
}

pub fn parse_file(path: &Path) -> Result<FileConfigHandle, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    let file: FileConfig = toml::from_str(&text).map_err(|e| ConfigError::Parse {
        path: path.to_path_buf(),
        message: with_suggestion(e.to_string()),
    })?;
    Ok(FileConfigHandle {
        file,
        base: path.parent().map(Path::to_path_buf).unwrap_or_default(),
    })
}

/// A parsed but not yet validated file.
#[derive(Debug)]
pub struct FileConfigHandle {
    file: FileConfig,
    base: PathBuf,
}

impl FileConfigHandle {
    /// Output directory named by the file, if any.
    pub fn out_dir(&self) -> Option<PathBuf> {
        self.file.output.dir.as_ref().map(|d| self.base.join(d))
    }
}

/// Parse and validate `path` for `mode`.
pub fn load_config(path: &Path, mode: Mode, overrides: &Overrides) -> Result<RunConfig, ConfigError> {
    let handle = parse_file(path)?;
    resolve(handle, mode, overrides)
}

fn finite(field: &str, v: f64) -> Result<f64, ConfigError> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(invalid(field, format!("must be finite, got {v}")))
    }
}

fn build_grid(g: &GridSection) -> Result<UniformGrid, ConfigError> {
    let (nx, ny) = match (g.n, g.nx, g.ny) {
        (Some(n), None, None) => (n, n),
        (None, Some(nx), Some(ny)) => (nx, ny),
        _ => return Err(invalid("grid", "give either `n` or both `nx` and `ny`")),
    };
    let origin = g.origin.unwrap_or([0.0, 0.0]);
    let extent = g.extent.unwrap_or([1.0, 1.0]);
    UniformGrid::new(nx, ny, (origin[0], origin[1]), (extent[0], extent[1])).map_err(|e| invalid("grid", e.to_string()))
}

fn coefficient(field: &str, pair: [f64; 2]) -> Result<LinearCoefficient, ConfigError> {
    let c = LinearCoefficient::new(finite(field, pair[0])?, finite(field, pair[1])?);
    if c.lower_bound() <= 0.0 {
        return Err(invalid(
            field,
            format!("{field}(phi) > 0 required on [0, 1], minimum is {}", c.lower_bound()),
        ));
    }
    Ok(c)
}

fn coefficients(m: &ModelSection, preset: Option<&ModelParams>) -> Result<PhysicalCoefficients, ConfigError> {
    let base = preset.map(|p| p.coefficients);
    let required = |name: &str| invalid(&format!("model.{name}"), "required without a preset");
    let conductivity = match (m.conductivity, base) {
        (Some(pair), _) => coefficient("model.conductivity", pair)?,
        (None, Some(b)) => b.conductivity,
        (None, None) => return Err(required("conductivity")),
    };
    let viscosity = match (m.viscosity, base) {
        (Some(pair), _) => coefficient("model.viscosity", pair)?,
        (None, Some(b)) => b.viscosity,
        (None, None) => return Err(required("viscosity")),
    };
    let beta = match (m.beta, base) {
        (Some(beta), _) => beta,
        (None, Some(b)) => b.beta,
        (None, None) => return Err(required("beta")),
    };
    if !(beta.is_finite() && beta >= 0.0) {
        return Err(invalid("model.beta", format!("beta ≥ 0 required, got {beta}")));
    }
    let gravity = m.gravity.map_or(base.map_or((0.0, -1.0), |b| b.gravity), |g| (g[0], g[1]));
    let norm = gravity.0.hypot(gravity.1);
    if !((norm - 1.0).abs() <= 1e-12) {
        return Err(invalid("model.gravity", format!("must be a unit vector, |e_g| = {norm}")));
    }
    let t_inf = m.t_inf.unwrap_or(1.0);
    if !(t_inf.is_finite() && t_inf > 0.0) {
        return Err(invalid("model.t_inf", format!("t_inf > 0 required, got {t_inf}")));
    }
    Ok(PhysicalCoefficients {
        conductivity,
        viscosity,
        beta,
        gravity,
        t_inf,
    })
}

fn sine_source(grid: &UniformGrid, norm: f64) -> CellField {
    let (x0, y0) = grid.origin();
    let (lx, ly) = grid.extent();
    let f = CellField::from_fn(grid, |x, y| (PI * (x - x0) / lx).sin() * (PI * (y - y0) / ly).sin());
    rescale_cells(grid, f, norm)
}

fn sine_force(grid: &UniformGrid, norm: f64) -> FaceField {
    let (x0, y0) = grid.origin();
    let (lx, ly) = grid.extent();
    let g = FaceField::from_fns(
        grid,
        |_, y| (2.0 * PI * (y - y0) / ly).sin(),
        |x, _| -(2.0 * PI * (x - x0) / lx).sin(),
    );
    rescale_faces(grid, g, norm)
}

fn existing(base: &Path, field: &str, path: &Path) -> Result<PathBuf, ConfigError> {
    let full = base.join(path);
    if full.is_file() {
        Ok(full)
    } else {
        Err(invalid(field, format!("file {} does not exist", full.display())))
    }
}

fn model_params(m: &ModelSection, grid: &UniformGrid, base: &Path) -> Result<ModelParams, ConfigError> {
    let preset = m.preset.map(|p| match p {
        Preset::Trivial => ModelParams::trivial(grid, 0.5),
        Preset::SmallData => ModelParams::small_data(grid),
        Preset::Adversarial => ModelParams::adversarial(grid),
    });
    let coefficients = coefficients(m, preset.as_ref())?;
    let boundary = match (&m.boundary, &preset) {
        (Some(BoundarySpec::Constant { value }), _) => BoundaryTrace::constant(grid, *value),
        (Some(BoundarySpec::File { path }), _) => {
            let path = existing(base, "model.boundary", path)?;
            fields::read_boundary(&path, grid).map_err(|e| invalid("model.boundary", e))?
        }
        (None, Some(p)) => p.boundary.clone(),
        (None, None) => return Err(invalid("model.boundary", "required without a preset")),
    };
    if let Err(e) = boundary.check_unit_range() {
        return Err(invalid("model.boundary", e.to_string()));
    }
    let heat_source = match (&m.heat_source, &preset) {
        (Some(SourceSpec::Zero), _) | (None, None) => CellField::zeros(grid),
        (Some(SourceSpec::Sine { norm }), _) => sine_source(grid, finite("model.heat_source.norm", *norm)?),
        (Some(SourceSpec::File { path }), _) => {
            let path = existing(base, "model.heat_source", path)?;
            let values = fields::read_cells(&path, grid).map_err(|e| invalid("model.heat_source", e))?;
            CellField::from_values(grid, values).map_err(|e| invalid("model.heat_source", e.to_string()))?
        }
        (None, Some(p)) => p.heat_source.clone(),
    };
    let body_force = match (&m.body_force, &preset) {
        (Some(SourceSpec::Zero), _) | (None, None) => FaceField::zeros(grid),
        (Some(SourceSpec::Sine { norm }), _) => sine_force(grid, finite("model.body_force.norm", *norm)?),
        (Some(SourceSpec::File { path }), _) => {
            let path = existing(base, "model.body_force", path)?;
            fields::read_faces(&path, grid).map_err(|e| invalid("model.body_force", e))?
        }
        (None, Some(p)) => p.body_force.clone(),
    };
    let params = ModelParams {
        coefficients,
        boundary,
        heat_source,
        body_force,
        phi_source: None,
    };
    params.validate(grid).map_err(|e| invalid("model", e.to_string()))?;
    Ok(params)
}

fn schedule(e: &EpsilonSection, grid: &UniformGrid) -> Result<EpsSchedule, ConfigError> {
    let eps0 = e.eps0.unwrap_or(0.25);
    let factor = e.factor.unwrap_or(0.5);
    let steps = e.steps.unwrap_or(0);
    let min = e.min.unwrap_or(eps0 * factor.powi(steps as i32));
    EpsSchedule::new(eps0, factor, steps, min, grid).map_err(|err| invalid("epsilon", err.to_string()))
}

fn picard(p: &PicardSection) -> Result<PicardConfig, ConfigError> {
    let d = PicardConfig::default();
    let cfg = PicardConfig {
        damping: p.omega.unwrap_or(d.damping),
        tol: p.tol.unwrap_or(d.tol),
        max_iters: p.max_iters.unwrap_or(d.max_iters),
        bound_tol: p.bound_tol.unwrap_or(d.bound_tol),
        restart: p.restart.as_ref().map_or(RestartPolicy::Never, |r| RestartPolicy::HalveDamping {
            patience: r.patience,
            max_restarts: r.max_restarts,
        }),
    };
    cfg.validate().map_err(|e| invalid("picard", e.to_string()))?;
    Ok(cfg)
}

fn mms_plan(
    m: &MmsSection,
    coefficients: PhysicalCoefficients,
    picard: PicardConfig,
    extension: TemperatureExtension,
) -> Result<MmsPlan, ConfigError> {
    let case = match (m.case, m.value) {
        (CaseName::Trig, None) => MmsCase::Trig,
        (CaseName::Trig, Some(_)) => return Err(invalid("mms.value", "only the constant case takes a value")),
        (CaseName::Constant, Some(value)) => MmsCase::Constant { value },
        (CaseName::Constant, None) => return Err(invalid("mms.value", "the constant case needs a value")),
    };
    let epsilon = match (m.eps_factor, m.eps_fixed) {
        (Some(factor), None) if factor > 0.0 => EpsPolicy::Proportional { factor },
        (None, Some(epsilon)) => EpsPolicy::Fixed { epsilon },
        (None, None) => EpsPolicy::Proportional { factor: 2.0 },
        _ => return Err(invalid("mms", "give at most one of `eps_factor` (> 0) and `eps_fixed`")),
    };
    Ok(MmsPlan {
        study: StudyConfig {
            case,
            kind: m.kind,
            grids: m.grids.clone(),
            epsilon,
            coefficients,
            picard,
            temperature_extension: extension,
        },
        min_order: m.min_order,
    })
}

fn resolve(handle: FileConfigHandle, mode: Mode, overrides: &Overrides) -> Result<RunConfig, ConfigError> {
    let FileConfigHandle { file, base } = handle;
    let picard = picard(&file.picard)?;
    let out_dir = overrides
        .out
        .clone()
        .or_else(|| file.output.dir.as_ref().map(|d| base.join(d)))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR));
    let scheme = if overrides.upwind {
        AdvectionScheme::Upwind
    } else {
        AdvectionScheme::Centered
    };
    let temperature_extension = file.model.temperature_extension.unwrap_or_default();

    let needs_grid = mode != Mode::Mms;
    let grid = match (&file.grid, needs_grid) {
        (Some(g), _) => Some(build_grid(g)?),
        (None, true) => return Err(invalid("grid", format!("required in {} mode", mode.name()))),
        (None, false) => None,
    };
    let (params, coefficients) = match &grid {
        Some(g) => {
            let p = model_params(&file.model, g, &base)?;
            let c = p.coefficients;
            (Some(p), c)
        }
        None => {
            let preset = file.model.preset.map(|_| {
                let g = UniformGrid::unit_square(8).expect("8x8 grid");
                model_params(&file.model, &g, &base)
            });
            match preset {
                Some(p) => (None, p?.coefficients),
                None => (None, coefficients(&file.model, None)?),
            }
        }
    };
    let schedule = match &grid {
        Some(g) => Some(schedule(&file.epsilon, g)?),
        None => None,
    };
    let mms = match (mode, &file.mms) {
        (Mode::Mms, Some(m)) => Some(mms_plan(m, coefficients, picard, temperature_extension)?),
        (Mode::Mms, None) => return Err(invalid("mms", "section required in mms mode")),
        _ => None,
    };
    let sweep = match (mode, &file.sweep) {
        (Mode::SweepEps, Some(s)) => {
            if s.epsilons.is_empty() {
                return Err(invalid("sweep.epsilons", "must not be empty"));
            }
            let g = grid.as_ref().expect("grid checked above");
            for &e in &s.epsilons {
                EpsSchedule::single(e, g).map_err(|err| invalid("sweep.epsilons", err.to_string()))?;
            }
            s.epsilons.clone()
        }
        (Mode::SweepEps, None) => return Err(invalid("sweep", "section required in sweep-eps mode")),
        _ => Vec::new(),
    };
    Ok(RunConfig {
        mode,
        grid,
        params,
        coefficients,
        temperature_extension,
        schedule,
        picard,
        scheme,
        out_dir,
        vtk: file.output.vtk,
        mms,
        sweep,
    })
}
