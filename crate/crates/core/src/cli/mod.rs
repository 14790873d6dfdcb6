//! Command implementations behind the `knot-morse` binary.
//!
//! Each command returns its results instead of printing them, so the
//! pipeline can be driven and tested in-process. Errors map onto exit codes
//! through [`CliError::exit_code`].

pub mod config;
pub mod report;

pub use config::{ConfigError, KnotSpec, OutputConfig, RunConfig};
pub use report::{ClusterSummary, KnotSummary, RunReport, Timings, SCHEMA_VERSION};

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use thiserror::Error;

use crate::critical::{
    cluster_by_value, default_cluster_tol, find_critical_points, CriticalCluster, CriticalError,
    CriticalPoint,
};
use crate::curve::{perturb, CurveError};
use crate::field::{FieldError, FieldEvaluator};
use crate::morse::{assemble_morse_code, check_regular, extract_level, verify, LevelSurface, MorseError};
use crate::surface::{write_obj, SurfaceError, TriMesh};

pub const EXIT_OK: u8 = 0;
pub const EXIT_VERIFICATION_FAILED: u8 = 1;
pub const EXIT_CONFIG: u8 = 2;
pub const EXIT_NUMERICAL: u8 = 3;
pub const EXIT_OUTPUT: u8 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Critical(#[from] CriticalError),
    #[error(transparent)]
    Morse(#[from] MorseError),
    #[error("perturbation failed: {0}")]
    Perturb(#[source] CurveError),
    #[error("cannot write {path}: {source}")]
    Output {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot write mesh: {0}")]
    Mesh(#[source] SurfaceError),
}

impl CliError {
    /// 2 for unusable input, 3 for numerical failures, 4 for output errors.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Perturb(CurveError::InvalidAmplitude(_)) => EXIT_CONFIG,
            CliError::Morse(MorseError::NotRegular { .. } | MorseError::InvalidConfig(_)) => EXIT_CONFIG,
            CliError::Field(FieldError::InvalidRule(_)) => EXIT_CONFIG,
            CliError::Critical(CriticalError::InvalidConfig(_)) => EXIT_CONFIG,
            CliError::Output { .. } | CliError::Mesh(_) => EXIT_OUTPUT,
            _ => EXIT_NUMERICAL,
        }
    }
}

/// Field, critical points and their clusters for one configuration.
pub struct CriticalStage {
    pub field: FieldEvaluator,
    pub points: Vec<CriticalPoint>,
    pub clusters: Vec<CriticalCluster>,
    pub cluster_tol: f64,
}

pub fn critical_stage(config: &RunConfig) -> Result<CriticalStage, CliError> {
    let curve = config.knot.curve()?;
    let field = FieldEvaluator::with_config(curve, config.quadrature)?;
    let points = find_critical_points(&field, &config.search)?;
    let cluster_tol = config.morse.cluster_tol.unwrap_or_else(|| default_cluster_tol(&points));
    let clusters = cluster_by_value(&points, cluster_tol);
    Ok(CriticalStage {
        field,
        points,
        clusters,
        cluster_tol,
    })
}

/// Curve, critical points, surfaces, Morse code and verification.
pub fn run_analysis(config: &RunConfig) -> Result<(RunReport, Vec<TriMesh>), CliError> {
    let start = Instant::now();
    let stage = critical_stage(config)?;
    let critical_time = start.elapsed().as_secs_f64();
    let analysis = assemble_morse_code(
        &stage.field,
        &stage.clusters,
        &config.surface,
        &config.morse,
        stage.cluster_tol,
    )?;
    let surfaces_time = start.elapsed().as_secs_f64() - critical_time;
    let topologies: Vec<_> = analysis.surfaces.iter().map(|s| s.topology.clone()).collect();
    let verification = verify(&analysis.code, &stage.clusters, &topologies);
    let meshes = analysis.surfaces.iter().map(|s| s.mesh.clone()).collect();
    let report = RunReport {
        schema_version: SCHEMA_VERSION,
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        config: config.clone(),
        knot: KnotSummary {
            source: stage.field.curve().to_source(),
            length: stage.field.knot_length(),
            max_speed: stage.field.max_speed(),
            min_distance: stage.field.min_distance(),
        },
        critical_points: stage.points,
        cluster_tol: stage.cluster_tol,
        clusters: ClusterSummary::from_clusters(&stage.clusters),
        regular_values: analysis.code.regular_values.clone(),
        surfaces: analysis.surfaces,
        morse_code: analysis.code,
        verification,
        timings: Timings {
            critical: critical_time,
            surfaces: surfaces_time,
            total: start.elapsed().as_secs_f64(),
        },
    };
    Ok((report, meshes))
}

/// Writes `bytes` to `path` through a temporary file in the same directory.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let fail = |source| CliError::Output {
        path: path.to_path_buf(),
        source,
    };
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    std::fs::create_dir_all(dir).map_err(fail)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(fail)?;
    tmp.write_all(bytes).map_err(fail)?;
    tmp.persist(path).map_err(|e| fail(e.error))?;
    Ok(())
}

fn write_meshes(dir: &Path, named: &[(String, &TriMesh)]) -> Result<Vec<PathBuf>, CliError> {
    std::fs::create_dir_all(dir).map_err(|source| CliError::Output {
        path: dir.to_path_buf(),
        source,
    })?;
    let mut paths = Vec::new();
    for (name, mesh) in named {
        if mesh.is_empty() {
            log::warn!("{name}: empty surface, no OBJ written");
            continue;
        }
        let path = dir.join(name);
        write_obj(mesh, &path).map_err(CliError::Mesh)?;
        paths.push(path);
    }
    Ok(paths)
}

fn load(config_path: &Path, out: Option<&Path>, no_mesh: bool) -> Result<RunConfig, CliError> {
    let mut config = RunConfig::load(config_path)?;
    if let Some(dir) = out {
        config.output.redirect(dir);
    }
    if no_mesh {
        config.output.write_meshes = false;
    }
    Ok(config)
}

pub struct AnalyzeOutcome {
    pub report: RunReport,
    pub report_path: PathBuf,
    pub mesh_paths: Vec<PathBuf>,
}

impl AnalyzeOutcome {
    pub fn exit_code(&self) -> u8 {
        if self.report.verification.all_passed() {
            EXIT_OK
        } else {
            EXIT_VERIFICATION_FAILED
        }
    }
}

/// `analyze`: the full pipeline. Writes the JSON report and, unless
/// disabled, one OBJ per regular value.
pub fn cmd_analyze(config_path: &Path, out: Option<&Path>, no_mesh: bool) -> Result<AnalyzeOutcome, CliError> {
    let config = load(config_path, out, no_mesh)?;
    let (report, meshes) = run_analysis(&config)?;
    let mesh_paths = if config.output.write_meshes {
        let named: Vec<(String, &TriMesh)> = meshes
            .iter()
            .enumerate()
            .map(|(i, m)| (format!("surface_{i}.obj"), m))
            .collect();
        write_meshes(&config.output.mesh_dir, &named)?
    } else {
        Vec::new()
    };
    write_atomic(&config.output.report, report.to_json().as_bytes())?;
    Ok(AnalyzeOutcome {
        report,
        report_path: config.output.report.clone(),
        mesh_paths,
    })
}

/// `critical`: critical points and clusters only.
pub fn cmd_critical(config_path: &Path) -> Result<CriticalStage, CliError> {
    critical_stage(&RunConfig::load(config_path)?)
}

pub fn critical_table(stage: &CriticalStage) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{:>3}  {:>16}  {:>5}  {:>11} {:>11} {:>11}  {:>10} {:>10} {:>10}",
        "#", "value", "index", "x", "y", "z", "eig1", "eig2", "eig3"
    );
    for (i, p) in stage.points.iter().enumerate() {
        let [x, y, z] = p.position;
        let [a, b, c] = p.eigenvalues;
        let _ = writeln!(
            s,
            "{:>3}  {:>16.10}  {:>5}  {x:>11.6} {y:>11.6} {z:>11.6}  {a:>10.5} {b:>10.5} {c:>10.5}",
            i + 1,
            p.value,
            p.index
        );
    }
    for c in &stage.clusters {
        let _ = writeln!(
            s,
            "cluster {:.10}: {} point(s), m = {}, n = {}",
            c.value,
            c.points.len(),
            c.m,
            c.n
        );
    }
    s
}

pub struct SurfacesOutcome {
    pub surfaces: Vec<LevelSurface>,
    pub mesh_paths: Vec<PathBuf>,
}

/// `surfaces`: one surface per explicit level. Levels too close to a
/// critical value are refused before any extraction.
pub fn cmd_surfaces(
    config_path: &Path,
    levels: &[f64],
    out: Option<&Path>,
    no_mesh: bool,
) -> Result<SurfacesOutcome, CliError> {
    let config = load(config_path, out, no_mesh)?;
    let stage = critical_stage(&config)?;
    for &level in levels {
        check_regular(level, &stage.clusters, config.morse.regular_margin)?;
    }
    let surfaces = levels
        .iter()
        .map(|&level| extract_level(&stage.field, level, &stage.points, &config.surface))
        .collect::<Result<Vec<_>, _>>()?;
    let mesh_paths = if config.output.write_meshes {
        let named: Vec<(String, &TriMesh)> =
            surfaces.iter().map(|s| (format!("level_{}.obj", s.level), &s.mesh)).collect();
        write_meshes(&config.output.mesh_dir, &named)?
    } else {
        Vec::new()
    };
    Ok(SurfacesOutcome { surfaces, mesh_paths })
}

pub fn surfaces_table(surfaces: &[LevelSurface]) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{:>10}  {:>5}  {:>10}  {:>12}  {:>9}  grid",
        "level", "genus", "components", "min flux", "triangles"
    );
    for surface in surfaces {
        let t = &surface.topology;
        let min_flux = t
            .components
            .iter()
            .filter_map(|c| c.flux)
            .fold(f64::INFINITY, f64::min);
        let _ = writeln!(
            s,
            "{:>10}  {:>5}  {:>10}  {:>12.6}  {:>9}  {:?}",
            surface.level,
            t.total_genus,
            t.components.len(),
            min_flux,
            surface.triangles,
            surface.grid.cells
        );
    }
    s
}

pub struct PerturbOutcome {
    pub config: RunConfig,
    /// The new configuration file's contents.
    pub text: String,
    pub path: Option<PathBuf>,
}

/// `perturb`: a configuration whose knot is the perturbed parametrization.
/// The file goes to `<out>/<stem>_perturbed.toml` when `out` is given.
pub fn cmd_perturb(
    config_path: &Path,
    amplitude: f64,
    seed: u64,
    out: Option<&Path>,
) -> Result<PerturbOutcome, CliError> {
    let text = std::fs::read_to_string(config_path).map_err(|source| ConfigError::Read {
        path: config_path.to_path_buf(),
        source,
    })?;
    let base = RunConfig::from_toml(&text, config_path)?;
    let curve = base.knot.curve()?;
    let bumped = perturb(&curve, amplitude, seed).map_err(CliError::Perturb)?;
    let config = RunConfig {
        knot: KnotSpec::expression(&bumped.to_source()),
        ..base
    };
    let text = format!(
        "# {} perturbed with amplitude {amplitude}, seed {seed}\n{}",
        config_path.display(),
        config.to_toml()
    );
    let path = match out {
        Some(dir) => {
            let stem = config_path.file_stem().and_then(|s| s.to_str()).unwrap_or("config");
            let path = dir.join(format!("{stem}_perturbed.toml"));
            write_atomic(&path, text.as_bytes())?;
            Some(path)
        }
        None => None,
    };
    Ok(PerturbOutcome { config, text, path })
}
