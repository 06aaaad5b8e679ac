use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument `{name}`: {reason}")]
    InvalidArgument { name: &'static str, reason: String },

    #[error("potential evaluation failed at {point:?}: {reason}")]
    Evaluation { point: Vec<f64>, reason: String },

    #[error("measure invariant violated: {0}")]
    InvalidMeasure(String),

    #[error("signed measure has nonzero total mass {mass:e}")]
    NonzeroMass { mass: f64 },

    #[error("operation requires a symmetric interaction potential")]
    NotSymmetric,

    #[error("domination bound violated: |W*μ(x)| = {value:e} exceeds 2κ‖μ‖_V V(x) = {bound:e}")]
    Domination { value: f64, bound: f64 },

    #[error("explosion guard hit at t = {time}: |X| = {norm} > {guard}")]
    Explosion { time: f64, norm: f64, guard: f64 },

    #[error("energy increased by {increase:e} at t = {time} (slack {slack:e}); reduce dt")]
    EnergyIncrease {
        time: f64,
        increase: f64,
        slack: f64,
    },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("root bracketing failed after {doublings} doublings (last upper bound {upper})")]
    Bracket { doublings: usize, upper: f64 },

    #[error("degenerate hull proxy: {0}")]
    DegenerateHull(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidArgument {
            name,
            reason: reason.into(),
        }
    }
}
