//! Experiment configuration: a sectioned TOML file. Unknown keys are
//! rejected with their location; blocks a run kind needs but the file lacks
//! are reported together.

use std::f64::consts::PI;
use std::fmt;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use selfdiff_core::potentials::{CustomConfinement, CustomInteraction};
use selfdiff_core::{ConfinementPotential, InteractionPotential};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RunKind {
    Check,
    Simulate,
    Flow,
    Analyze2d,
    PhaseDiagram,
}

impl RunKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::Check => "check",
            Self::Simulate => "simulate",
            Self::Flow => "flow",
            Self::Analyze2d => "analyze2d",
            Self::PhaseDiagram => "phase-diagram",
        }
    }

    fn required_blocks(self) -> &'static [&'static str] {
        match self {
            Self::Check => &["potential", "interaction"],
            Self::Simulate => &["potential", "interaction", "sde"],
            Self::Flow => &["potential", "interaction", "flow"],
            Self::Analyze2d => &["potential", "interaction"],
            Self::PhaseDiagram => &["potential"],
        }
    }
}

impl fmt::Display for RunKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Optional; when present it must agree with the subcommand.
    pub kind: Option<RunKind>,
    #[serde(default)]
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub potential: Option<PotentialBlock>,
    pub interaction: Option<InteractionBlock>,
    pub grid: Option<GridBlock>,
    pub sde: Option<SdeBlock>,
    pub flow: Option<FlowBlock>,
    pub analyze2d: Option<Analyze2dBlock>,
    pub phase_diagram: Option<PhaseDiagramBlock>,
    pub check: Option<CheckBlock>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum PotentialKind {
    /// `a|x|⁴ + b|x|² + c`.
    #[default]
    Quartic,
    /// `depth (|x|² − rho0²)² + c`.
    DoubleWell,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialBlock {
    #[serde(default)]
    pub kind: PotentialKind,
    #[serde(default = "one")]
    pub a: f64,
    #[serde(default)]
    pub b: f64,
    #[serde(default = "one")]
    pub c: f64,
    #[serde(default = "one")]
    pub rho0: f64,
    #[serde(default = "one")]
    pub depth: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InteractionKind {
    Zero,
    Rotation,
    SymmetricDot,
    HalfSquare,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InteractionBlock {
    pub kind: InteractionKind,
    /// Rotation angle in radians.
    pub theta: Option<f64>,
    /// Rotation angle as a multiple of π (alternative to `theta`).
    pub theta_over_pi: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridBlock {
    /// Defaults to the radius where `e^{−2V}` falls below `e^{−60}`.
    pub rho_max: Option<f64>,
    #[serde(default = "default_nodes")]
    pub n_rho: usize,
    #[serde(default = "default_nodes")]
    pub n_angle: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum SdeMode {
    #[default]
    SelfInteracting,
    Frozen,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SdeBlock {
    #[serde(default)]
    pub mode: SdeMode,
    #[serde(default = "origin")]
    pub x0: Vec<f64>,
    #[serde(default = "one")]
    pub r: f64,
    #[serde(default = "default_sde_dt")]
    pub dt: f64,
    #[serde(default = "default_sde_t")]
    pub t_end: f64,
    #[serde(default = "default_thin")]
    pub thin_max: usize,
    /// Steps between particle snapshots (0: final measure only).
    #[serde(default)]
    pub checkpoint_stride: usize,
    #[serde(default = "default_record")]
    pub record_stride: usize,
    #[serde(default = "one_usize")]
    pub replicas: usize,
    /// Atom of the fixed measure in frozen mode (defaults to `x0`).
    pub frozen_at: Option<Vec<f64>>,
    pub guard_radius: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum IntegratorKind {
    #[default]
    Etd2,
    Euler,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlowBlock {
    #[serde(default = "default_flow_t")]
    pub t_end: f64,
    #[serde(default = "default_flow_dt")]
    pub dt: f64,
    #[serde(default)]
    pub integrator: IntegratorKind,
    #[serde(default)]
    pub snapshot_stride: usize,
    /// Start measure `e^{(b, x)} γ / Z` with `b = start_tilt`.
    #[serde(default = "default_tilt")]
    pub start_tilt: Vec<f64>,
    #[serde(default = "default_slack")]
    pub energy_slack: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Analyze2dBlock {
    #[serde(default = "default_radial_nodes")]
    pub n_rho: usize,
    #[serde(default = "default_angular_nodes")]
    pub n_angle: usize,
    /// Include the polar factor `ρ` in the radial density.
    #[serde(default = "yes")]
    pub jacobian: bool,
    /// Right end of the J-curve (default: `2 α₁`, or 5 without a root).
    pub alpha_max: Option<f64>,
    #[serde(default = "default_j_points")]
    pub j_points: usize,
    #[serde(default = "default_reduced_t")]
    pub reduced_t_end: f64,
    #[serde(default = "default_flow_dt")]
    pub reduced_dt: f64,
    #[serde(default = "half")]
    pub start_alpha: f64,
    #[serde(default)]
    pub start_sigma: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhaseDiagramBlock {
    #[serde(default = "default_n_theta")]
    pub n_theta: usize,
    /// Quartic coefficients to sweep (default: the configured potential).
    pub a_values: Option<Vec<f64>>,
    #[serde(default = "default_radial_nodes")]
    pub n_rho: usize,
    #[serde(default = "default_angular_nodes")]
    pub n_angle: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckBlock {
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default = "default_half_width")]
    pub half_width: f64,
    #[serde(default = "default_check_tol")]
    pub tol: f64,
}

fn one() -> f64 {
    1.0
}
fn half() -> f64 {
    0.5
}
fn one_usize() -> usize {
    1
}
fn yes() -> bool {
    true
}
fn origin() -> Vec<f64> {
    vec![0.0, 0.0]
}
fn default_nodes() -> usize {
    128
}
fn default_sde_dt() -> f64 {
    0.01
}
fn default_sde_t() -> f64 {
    1000.0
}
fn default_thin() -> usize {
    10_000
}
fn default_record() -> usize {
    100
}
fn default_flow_t() -> f64 {
    5.0
}
fn default_flow_dt() -> f64 {
    0.01
}
fn default_tilt() -> Vec<f64> {
    vec![0.5, 0.0]
}
fn default_slack() -> f64 {
    1e-8
}
fn default_radial_nodes() -> usize {
    240
}
fn default_angular_nodes() -> usize {
    256
}
fn default_j_points() -> usize {
    101
}
fn default_reduced_t() -> f64 {
    20.0
}
fn default_n_theta() -> usize {
    32
}
fn default_samples() -> usize {
    2000
}
fn default_half_width() -> f64 {
    3.0
}
fn default_check_tol() -> f64 {
    1e-9
}

pub(crate) fn empty<T: serde::de::DeserializeOwned>() -> T {
    toml::from_str("").expect("every field of an optional block has a default")
}

impl ExperimentConfig {
    pub fn from_toml(text: &str, origin: &Path) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config {
            path: origin.to_path_buf(),
            message: e.to_string(),
        })
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml(&text, path)
    }

    /// Checks block presence and value ranges for `kind`, then fills every
    /// optional block with its defaults so the manifest echoes them.
    pub fn resolve(mut self, kind: RunKind) -> Result<Self, CliError> {
        if let Some(k) = self.kind {
            if k != kind {
                return Err(CliError::Validation(format!(
                    "`kind` is {k} but the subcommand is {kind}"
                )));
            }
        }
        self.kind = Some(kind);
        let present = |name: &str| match name {
            "potential" => self.potential.is_some(),
            "interaction" => self.interaction.is_some(),
            "sde" => self.sde.is_some(),
            "flow" => self.flow.is_some(),
            _ => true,
        };
        let missing: Vec<String> = kind
            .required_blocks()
            .iter()
            .filter(|b| !present(b))
            .map(|b| format!("[{b}]"))
            .collect();
        if !missing.is_empty() {
            return Err(CliError::Validation(format!(
                "{kind} needs the missing block(s) {}",
                missing.join(", ")
            )));
        }
        if matches!(kind, RunKind::Check | RunKind::Flow) || self.grid.is_some() {
            self.grid.get_or_insert_with(empty);
        }
        match kind {
            RunKind::Check => {
                self.check.get_or_insert_with(empty);
            }
            RunKind::Analyze2d => {
                self.analyze2d.get_or_insert_with(empty);
            }
            RunKind::PhaseDiagram => {
                self.phase_diagram.get_or_insert_with(empty);
            }
            _ => {}
        }
        self.validate(kind)?;
        Ok(self)
    }

    fn validate(&self, kind: RunKind) -> Result<(), CliError> {
        let mut problems = Vec::new();
        if let Some(p) = &self.potential {
            p.validate(&mut problems);
        }
        if let Some(i) = &self.interaction {
            if let Err(e) = i.theta() {
                problems.push(e);
            }
            if kind == RunKind::Analyze2d && i.kind != InteractionKind::Rotation {
                problems.push("analyze2d needs `interaction.kind = \"rotation\"`".into());
            }
        }
        if let Some(g) = &self.grid {
            if g.rho_max.is_some_and(|r| !(r > 0.0)) {
                problems.push("`grid.rho_max` must be positive".into());
            }
            if g.n_rho < 2 {
                problems.push("`grid.n_rho` must be at least 2".into());
            }
            if g.n_angle < 4 {
                problems.push("`grid.n_angle` must be at least 4".into());
            }
        }
        if let Some(s) = &self.sde {
            if s.replicas == 0 {
                problems.push("`sde.replicas` must be positive".into());
            }
            if s.x0.is_empty() {
                problems.push("`sde.x0` must be nonempty".into());
            }
            if s.frozen_at.as_ref().is_some_and(|f| f.len() != s.x0.len()) {
                problems.push("`sde.frozen_at` must have the dimension of `sde.x0`".into());
            }
        }
        if let Some(f) = &self.flow {
            if f.start_tilt.len() != 2 {
                problems.push("`flow.start_tilt` must have two entries".into());
            }
        }
        if let Some(a) = &self.analyze2d {
            if a.j_points < 2 {
                problems.push("`analyze2d.j_points` must be at least 2".into());
            }
        }
        if let Some(p) = &self.phase_diagram {
            if p.n_theta == 0 {
                problems.push("`phase_diagram.n_theta` must be positive".into());
            }
            if p.a_values.is_some()
                && self
                    .potential
                    .as_ref()
                    .is_some_and(|v| v.kind != PotentialKind::Quartic)
            {
                problems.push("`phase_diagram.a_values` needs a quartic potential".into());
            }
            if p.a_values
                .as_ref()
                .is_some_and(|v| v.iter().any(|a| !(*a > 0.0)))
            {
                problems.push("`phase_diagram.a_values` must be positive".into());
            }
        }
        if let Some(c) = &self.check {
            if c.samples < 100 {
                problems.push("`check.samples` must be at least 100".into());
            }
            if !(c.half_width > 0.0) {
                problems.push("`check.half_width` must be positive".into());
            }
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(CliError::Validation(problems.join("; ")))
        }
    }

    pub fn potential(&self) -> ConfinementPotential {
        self.potential
            .as_ref()
            .map(PotentialBlock::build)
            .unwrap_or_else(|| ConfinementPotential::quartic(1.0, 0.0, 1.0))
    }

    pub fn interaction(&self) -> InteractionPotential {
        self.interaction
            .as_ref()
            .map(InteractionBlock::build)
            .unwrap_or(InteractionPotential::Zero)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serializes")
    }
}

impl PotentialBlock {
    fn validate(&self, problems: &mut Vec<String>) {
        match self.kind {
            PotentialKind::Quartic => {
                if self.a < 0.0 || (self.a == 0.0 && self.b <= 0.0) {
                    problems
                        .push("`potential` must confine: need a > 0, or a = 0 and b > 0".into());
                }
            }
            PotentialKind::DoubleWell => {
                if !(self.depth > 0.0) {
                    problems.push("`potential.depth` must be positive".into());
                }
                if !(self.rho0 >= 0.0) {
                    problems.push("`potential.rho0` must be nonnegative".into());
                }
            }
        }
    }

    pub fn build(&self) -> ConfinementPotential {
        match self.kind {
            PotentialKind::Quartic => ConfinementPotential::quartic(self.a, self.b, self.c),
            PotentialKind::DoubleWell => double_well(self.depth, self.rho0, self.c),
        }
    }
}

/// `depth (|x|² − ρ₀²)² + c`.
fn double_well(depth: f64, rho0: f64, c: f64) -> ConfinementPotential {
    let r2 = rho0 * rho0;
    ConfinementPotential::Custom(CustomConfinement {
        name: format!("double-well(depth={depth}, rho0={rho0})"),
        value: Arc::new(move |x: &[f64]| {
            let s: f64 = x.iter().map(|v| v * v).sum();
            depth * (s - r2).powi(2) + c
        }),
        gradient: Arc::new(move |x: &[f64], out: &mut [f64]| {
            let s: f64 = x.iter().map(|v| v * v).sum();
            for (o, xi) in out.iter_mut().zip(x) {
                *o = 4.0 * depth * (s - r2) * xi;
            }
        }),
        hessian: Arc::new(move |x: &[f64], out: &mut [f64]| {
            let d = x.len();
            let s: f64 = x.iter().map(|v| v * v).sum();
            for i in 0..d {
                for j in 0..d {
                    let diag = if i == j { 4.0 * depth * (s - r2) } else { 0.0 };
                    out[i * d + j] = diag + 8.0 * depth * x[i] * x[j];
                }
            }
        }),
        radial: Some(Arc::new(move |rho: f64| {
            depth * (rho * rho - r2).powi(2) + c
        })),
    })
}

fn half_square_distance() -> InteractionPotential {
    InteractionPotential::Custom(CustomInteraction {
        name: "half-square".into(),
        value: Arc::new(|x, y| 0.5 * x.iter().zip(y).map(|(a, b)| (a - b).powi(2)).sum::<f64>()),
        grad_x: Arc::new(|x, y, out| {
            for ((o, a), b) in out.iter_mut().zip(x).zip(y) {
                *o = a - b;
            }
        }),
        hess_xx: Some(Arc::new(|x, _, out| {
            let d = x.len();
            for i in 0..d {
                for j in 0..d {
                    out[i * d + j] = if i == j { 1.0 } else { 0.0 };
                }
            }
        })),
        symmetric: true,
    })
}

impl InteractionBlock {
    /// Rotation angle in radians (0 for kernels without one).
    pub fn theta(&self) -> Result<f64, String> {
        match (self.kind, self.theta, self.theta_over_pi) {
            (InteractionKind::Rotation, Some(t), None) => Ok(t),
            (InteractionKind::Rotation, None, Some(t)) => Ok(t * PI),
            (InteractionKind::Rotation, None, None) => {
                Err("rotation needs `interaction.theta` or `interaction.theta_over_pi`".into())
            }
            (InteractionKind::Rotation, Some(_), Some(_)) => {
                Err("give only one of `interaction.theta` and `interaction.theta_over_pi`".into())
            }
            (_, None, None) => Ok(0.0),
            _ => Err("`interaction.theta` applies only to kind = \"rotation\"".into()),
        }
    }

    pub fn build(&self) -> InteractionPotential {
        match self.kind {
            InteractionKind::Zero => InteractionPotential::Zero,
            InteractionKind::Rotation => InteractionPotential::LinearRotation {
                theta: self.theta().unwrap_or(0.0),
            },
            InteractionKind::SymmetricDot => InteractionPotential::SymmetricDot,
            InteractionKind::HalfSquare => half_square_distance(),
        }
    }
}
