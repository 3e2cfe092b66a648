//! Run configuration: the TOML file read by every command, its validation and
//! the command-line overrides applied on top of it.
//!
//! A configuration has five blocks — `spacetime`, `sector`, `grids`,
//! `contour` and `output`. Unknown keys anywhere are hard errors. Only
//! `spacetime` is mandatory; a missing contour resolves to the circle of
//! radius 0.1·√Λ around σ = 0.

use std::path::Path;

use num_complex::Complex64;
use qnm_core::geometry::{solve_horizons, SpacetimeParams};
use qnm_core::parametrix::ParametrixConfig;
use qnm_core::resonance_finder::{ContourShape, ContourSpec};
use qnm_core::spectral_family::{critical_strips, CollocationGrid, SectorConfig};
use qnm_core::QnmError;
use serde::{Deserialize, Serialize};

use crate::CliError;

/// Radius of the default contour in units of √Λ.
pub const DEFAULT_CONTOUR_RADIUS: f64 = 0.1;

fn default_n_r() -> usize {
    CollocationGrid::default().n_r
}
fn default_n_z() -> usize {
    CollocationGrid::default().n_z
}
fn default_r_max() -> usize {
    16
}
fn default_max_depth() -> usize {
    8
}
fn default_n_max() -> usize {
    1
}
fn default_sweep() -> usize {
    9
}
fn default_true() -> bool {
    true
}

/// Resolution block: collocation grid, basis truncation and search depths.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    /// Chebyshev intervals in r.
    #[serde(default = "default_n_r")]
    pub n_r: usize,
    /// Gauss–Legendre nodes in cos θ.
    #[serde(default = "default_n_z")]
    pub n_z: usize,
    /// Basis truncation R_max (lattice shell).
    #[serde(default = "default_r_max")]
    pub r_max: usize,
    /// Highest power sum S_R(Γ, n) reported by `count`.
    #[serde(default = "default_n_max")]
    pub n_max: usize,
    /// Quadrisection depth limit of `locate` and `oracle`.
    #[serde(default = "default_max_depth")]
    pub max_depth: usize,
    /// Samples along Re σ for `det-sweep`.
    #[serde(default = "default_sweep")]
    pub sweep_re: usize,
    /// Samples along Im σ for `det-sweep`.
    #[serde(default = "default_sweep")]
    pub sweep_im: usize,
    /// Spherical harmonic degree used by the radial oracle.
    #[serde(default)]
    pub l_sph: u32,
    /// Anchor and Neumann depth of the discrete parametrix.
    #[serde(default)]
    pub parametrix: ParametrixConfig,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig {
            n_r: default_n_r(),
            n_z: default_n_z(),
            r_max: default_r_max(),
            n_max: default_n_max(),
            max_depth: default_max_depth(),
            sweep_re: default_sweep(),
            sweep_im: default_sweep(),
            l_sph: 0,
            parametrix: ParametrixConfig::default(),
        }
    }
}

impl GridConfig {
    /// The collocation grid part.
    pub fn collocation(&self) -> CollocationGrid {
        CollocationGrid { n_r: self.n_r, n_z: self.n_z }
    }
}

/// Output block: artifact directory and formats.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    /// Directory receiving `<command>.json` / `<command>.csv`; stdout only if absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<String>,
    /// Whether tabular commands also write CSV.
    #[serde(default = "default_true")]
    pub csv: bool,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig { dir: None, csv: true }
    }
}

/// Complete run configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Physical parameters.
    pub spacetime: SpacetimeParams,
    /// Spectral sector and parametrix depths.
    #[serde(default)]
    pub sector: SectorConfig,
    /// Resolution.
    #[serde(default)]
    pub grids: GridConfig,
    /// Contour; `None` before resolution selects the default circle.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub contour: Option<ContourSpec>,
    /// Artifact options.
    #[serde(default)]
    pub output: OutputConfig,
}

/// Per-command overrides from the command line.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    /// Basis truncation.
    pub r_max: Option<usize>,
    /// Contour center (replaces the center of a circle, or recenters a rectangle).
    pub contour_center: Option<Complex64>,
    /// Contour radius (turns the contour into a circle).
    pub contour_radius: Option<f64>,
    /// Contour quadrature nodes.
    pub nodes: Option<usize>,
    /// Artifact directory.
    pub out: Option<String>,
}

impl RunConfig {
    /// Parses a TOML document.
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Core(QnmError::Config(e.to_string())))
    }

    /// Reads and parses a TOML file.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    /// Applies command-line overrides.
    pub fn apply(&mut self, o: &Overrides) {
        if let Some(r) = o.r_max {
            self.grids.r_max = r;
        }
        if let Some(d) = &o.out {
            self.output.dir = Some(d.clone());
        }
        let lambda = self.spacetime.lambda_cc;
        let mut contour = self.contour.unwrap_or_else(|| default_contour(lambda));
        if o.contour_center.is_some() || o.contour_radius.is_some() {
            let (center, radius) = match contour.shape {
                ContourShape::Circle { center, radius } => (center, radius),
                ContourShape::Rectangle { lower_left, upper_right } => {
                    let c = 0.5 * (lower_left + upper_right);
                    let d = upper_right - lower_left;
                    (c, 0.5 * d.re.max(d.im))
                }
            };
            let center = o.contour_center.unwrap_or(center);
            match (contour.shape, o.contour_radius) {
                (ContourShape::Rectangle { lower_left, upper_right }, None) => {
                    let half = 0.5 * (upper_right - lower_left);
                    contour.shape = ContourShape::Rectangle { lower_left: center - half, upper_right: center + half };
                }
                (_, r) => contour.shape = ContourShape::Circle { center, radius: r.unwrap_or(radius) },
            }
        }
        if let Some(n) = o.nodes {
            contour.n_nodes = n;
        }
        self.contour = Some(contour);
    }

    /// Fills every default so the result is self-describing.
    pub fn resolved(mut self) -> Self {
        if self.contour.is_none() {
            self.contour = Some(default_contour(self.spacetime.lambda_cc));
        }
        self
    }

    /// The resolved contour.
    pub fn contour(&self) -> ContourSpec {
        self.contour.unwrap_or_else(|| default_contour(self.spacetime.lambda_cc))
    }

    /// Validates every block before any computation starts.
    pub fn validate(&self) -> Result<(), CliError> {
        self.spacetime.validate()?;
        self.sector.validate()?;
        let g = &self.grids;
        if g.n_r < 4 || g.n_z < 1 {
            return Err(QnmError::invalid("grids", "need n_r ≥ 4 and n_z ≥ 1").into());
        }
        if g.r_max < 1 {
            return Err(QnmError::invalid("r_max", "need r_max ≥ 1").into());
        }
        if g.sweep_re < 1 || g.sweep_im < 1 {
            return Err(QnmError::invalid("sweep", "need at least one sample per axis").into());
        }
        let horizons = solve_horizons(&self.spacetime)?;
        let strips = critical_strips(&horizons, &self.sector);
        self.contour().validate(&strips)?;
        Ok(())
    }
}

/// Circle of radius 0.1·√Λ around σ = 0.
pub fn default_contour(lambda_cc: f64) -> ContourSpec {
    ContourSpec::circle(Complex64::new(0.0, 0.0), DEFAULT_CONTOUR_RADIUS * lambda_cc.max(0.0).sqrt())
}
