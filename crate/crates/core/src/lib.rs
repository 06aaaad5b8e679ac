//! Numerical laboratory for self-interacting diffusions.
//!
//! A self-interacting diffusion on R^d moves under the drift
//! `-(∇V + ∇ₓ W*μ_t)` where `μ_t` is its own normalized occupation measure.
//! This crate simulates the process, integrates the deterministic
//! measure-valued semiflow `μ̇ = Π(μ) − μ` that drives `μ_t` in the long run,
//! computes Gibbs maps and free energies, and analyzes the planar model
//! `W(x, y) = (x, R(θ) y)` with a radial confinement in closed-ish form.
//!
//! Module map:
//! - [`potentials`]: confinement `V`, interaction `W`, sampled hypothesis checks.
//! - [`measures`]: particle and polar-grid measures, V-norm, weak metric, thinning.
//! - [`gibbs`]: Gibbs map `Π`, free energy, differentials, fixed points, 1D spectral gap.
//! - [`semiflow`]: exponential integrators for the semiflow, Picard scheme, hull contraction.
//! - [`sde`]: Euler–Maruyama simulation of the frozen and self-interacting diffusions.
//! - [`rotation2d`]: radial reductions, bifurcation, reduced ODE, limit and orbit measures.

pub mod error;
pub mod gibbs;
pub mod measures;
pub mod potentials;
pub mod quadrature;
pub mod rotation2d;
pub mod sde;
pub mod semiflow;
pub mod stats;

pub use error::{Error, Result};
pub use gibbs::{FixedPointOutcome, GibbsModel, GibbsResult};
pub use measures::{
    FunctionDictionary, GridMeasure2D, Measure, ParticleMeasure, PolarGrid, SignedGridMeasure,
};
pub use potentials::{ConfinementPotential, InteractionPotential};
pub use rotation2d::{RadialDensity, ReducedState, RegimeClassification};
pub use sde::{SdeConfig, SdePath};
pub use semiflow::FlowTrajectory;
