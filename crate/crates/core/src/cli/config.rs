//! TOML run configuration.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::critical::{CriticalError, SearchConfig};
use crate::curve::{builtin, CurveError, KnotCurve};
use crate::field::FieldConfig;
use crate::morse::{MorseConfig, MorseError};
use crate::surface::{SurfaceConfig, SurfaceError};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Parse {
        path: PathBuf,
        #[source]
        source: Box<toml::de::Error>,
    },
    #[error("[knot]: {0}")]
    Knot(String),
    #[error("[knot]: {0}")]
    Curve(#[from] CurveError),
    #[error("[search]: {0}")]
    Search(#[from] CriticalError),
    #[error("[surface]: {0}")]
    Surface(#[from] SurfaceError),
    #[error("[morse]: {0}")]
    Morse(#[from] MorseError),
    #[error("[quadrature]: {0}")]
    Quadrature(String),
}

/// The knot, either a built-in family or a parametrization over `[0, 2π]`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KnotSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub builtin: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub params: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expression: Option<String>,
}

impl KnotSpec {
    pub fn builtin(name: &str, params: &[f64]) -> Self {
        KnotSpec {
            builtin: Some(name.to_string()),
            params: params.to_vec(),
            expression: None,
        }
    }

    pub fn expression(source: &str) -> Self {
        KnotSpec {
            builtin: None,
            params: Vec::new(),
            expression: Some(source.to_string()),
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        match (&self.builtin, &self.expression) {
            (Some(_), Some(_)) => Err(ConfigError::Knot("give either builtin or expression, not both".into())),
            (None, None) => Err(ConfigError::Knot("one of builtin or expression is required".into())),
            (None, Some(_)) if !self.params.is_empty() => {
                Err(ConfigError::Knot("params only apply to builtin knots".into()))
            }
            _ => Ok(()),
        }
    }

    pub fn curve(&self) -> Result<KnotCurve, ConfigError> {
        self.validate()?;
        Ok(match (&self.builtin, &self.expression) {
            (Some(name), _) => builtin(name, &self.params)?,
            (_, Some(source)) => KnotCurve::parse(source)?,
            _ => unreachable!("validated above"),
        })
    }
}

/// Where results go. Relative paths are taken relative to the directory of
/// the configuration file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub report: PathBuf,
    pub mesh_dir: PathBuf,
    pub write_meshes: bool,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            report: PathBuf::from("report.json"),
            mesh_dir: PathBuf::from("meshes"),
            write_meshes: true,
        }
    }
}

impl OutputConfig {
    /// Sends the report and meshes into `dir` instead.
    pub fn redirect(&mut self, dir: &Path) {
        self.report = dir.join("report.json");
        self.mesh_dir = dir.join("meshes");
    }

    fn resolve(&mut self, base: &Path) {
        if self.report.is_relative() {
            self.report = base.join(&self.report);
        }
        if self.mesh_dir.is_relative() {
            self.mesh_dir = base.join(&self.mesh_dir);
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub knot: KnotSpec,
    #[serde(default)]
    pub quadrature: FieldConfig,
    #[serde(default)]
    pub search: SearchConfig,
    #[serde(default)]
    pub surface: SurfaceConfig,
    #[serde(default)]
    pub morse: MorseConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

impl RunConfig {
    pub fn new(knot: KnotSpec) -> Self {
        RunConfig {
            knot,
            quadrature: FieldConfig::default(),
            search: SearchConfig::default(),
            surface: SurfaceConfig::default(),
            morse: MorseConfig::default(),
            output: OutputConfig::default(),
        }
    }

    /// Parses and validates a configuration. Output paths are left as written.
    pub fn from_toml(text: &str, origin: &Path) -> Result<Self, ConfigError> {
        let config: RunConfig = toml::from_str(text).map_err(|e| ConfigError::Parse {
            path: origin.to_path_buf(),
            source: Box::new(e),
        })?;
        config.validate()?;
        Ok(config)
    }

    /// Reads a configuration file and resolves its output paths against the
    /// file's directory.
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        let mut config = RunConfig::from_toml(&text, path)?;
        let base = path.parent().unwrap_or(Path::new(""));
        config.output.resolve(base);
        Ok(config)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration is always representable in TOML")
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.knot.validate()?;
        let q = &self.quadrature;
        if q.panels == 0 || q.nodes_per_panel == 0 {
            return Err(ConfigError::Quadrature("panels and nodes_per_panel must be positive".into()));
        }
        if matches!(q.min_distance, Some(d) if !(d.is_finite() && d > 0.0)) {
            return Err(ConfigError::Quadrature("min_distance must be positive".into()));
        }
        self.search.validate()?;
        self.surface.validate()?;
        self.morse.validate()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<RunConfig, ConfigError> {
        RunConfig::from_toml(text, Path::new("test.toml"))
    }

    #[test]
    fn minimal_builtin() {
        let c = parse("[knot]\nbuiltin = \"circle\"\nparams = [2.0]\n").unwrap();
        assert_eq!(c.knot, KnotSpec::builtin("circle", &[2.0]));
        assert_eq!(c.surface, SurfaceConfig::default());
        assert!(c.output.write_meshes);
    }

    #[test]
    fn sections_override_defaults() {
        let c = parse(
            "[knot]\nexpression = \"(cos(t), sin(t), 0)\"\n\
             [quadrature]\npanels = 8\n\
             [search]\nrandom_seeds = 10\n\
             [surface]\nresolution = 64\nstability_check = false\n\
             [morse]\ncluster_tol = 1e-4\n\
             [output]\nwrite_meshes = false\n",
        )
        .unwrap();
        assert_eq!(c.quadrature.panels, 8);
        assert_eq!(c.quadrature.nodes_per_panel, 16);
        assert_eq!(c.search.random_seeds, 10);
        assert_eq!(c.surface.resolution, 64);
        assert!(!c.surface.stability_check);
        assert_eq!(c.morse.cluster_tol, Some(1e-4));
        assert!(!c.output.write_meshes);
    }

    #[test]
    fn round_trip_through_toml() {
        let mut c = RunConfig::new(KnotSpec::expression("(cos(t), sin(t), 0.5*sin(2*t))"));
        c.morse.epsilon_cap = Some(0.3);
        let back = parse(&c.to_toml()).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn knot_must_be_unambiguous() {
        assert!(matches!(parse("[knot]\n"), Err(ConfigError::Knot(_))));
        assert!(matches!(
            parse("[knot]\nbuiltin = \"circle\"\nexpression = \"(cos(t), sin(t), 0)\"\n"),
            Err(ConfigError::Knot(_))
        ));
        assert!(matches!(
            parse("[knot]\nexpression = \"(cos(t), sin(t), 0)\"\nparams = [1.0]\n"),
            Err(ConfigError::Knot(_))
        ));
    }

    #[test]
    fn bad_values_are_rejected() {
        assert!(matches!(
            parse("[knot]\nbuiltin = \"circle\"\n[surface]\nresolution = 8\n"),
            Err(ConfigError::Surface(_))
        ));
        assert!(matches!(
            parse("[knot]\nbuiltin = \"circle\"\n[search]\nnewton_tol = -1.0\n"),
            Err(ConfigError::Search(_))
        ));
        assert!(matches!(
            parse("[knot]\nbuiltin = \"circle\"\n[morse]\ncluster_tol = 0.0\n"),
            Err(ConfigError::Morse(_))
        ));
        assert!(matches!(
            parse("[knot]\nbuiltin = \"circle\"\n[quadrature]\npanels = 0\n"),
            Err(ConfigError::Quadrature(_))
        ));
    }

    #[test]
    fn syntax_errors_name_the_line() {
        let err = parse("[knot]\nbuiltin = \"circle\"\n[surface\n").unwrap_err();
        assert!(err.to_string().contains("line 3"), "{err}");
        let err = parse("[knot]\nbuiltin = \"circle\"\ncolour = 1\n").unwrap_err();
        assert!(err.to_string().contains("line 3"), "{err}");
    }

    #[test]
    fn load_resolves_outputs_next_to_the_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.toml");
        std::fs::write(&path, "[knot]\nbuiltin = \"circle\"\n").unwrap();
        let c = RunConfig::load(&path).unwrap();
        assert_eq!(c.output.report, dir.path().join("report.json"));
        assert_eq!(c.output.mesh_dir, dir.path().join("meshes"));
        assert!(matches!(
            RunConfig::load(&dir.path().join("missing.toml")),
            Err(ConfigError::Read { .. })
        ));
    }
}
