use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("non-finite value {value} at (ix = {ix}, jy = {jy})")]
    NonFinite { ix: usize, jy: usize, value: f64 },

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("conjugate symmetry violated at mode {mode}, row {row}: defect {defect:e}")]
    SymmetryViolation { mode: i64, row: usize, defect: f64 },

    #[error("insufficient decay in y: weighted magnitude {value:e} at row {row}")]
    InsufficientDecay { row: usize, value: f64 },

    #[error("analyticity deficit at mode {mode} (|xi| = {xi}): amplified magnitude {value:e}")]
    AnalyticityDeficit { mode: i64, xi: f64, value: f64 },

    #[error("spectrum underresolved: {usable} usable modes, need at least {required}")]
    SpectrumUnderresolved { usable: usize, required: usize },

    #[error("phase budget exhausted at t = {t}: radius {radius} <= 0")]
    PhaseExhausted { t: f64, radius: f64 },

    #[error("compatibility violated: {0}")]
    Compatibility(String),

    #[error("temperature floor breached at t = {t}: min(theta + theta_E) = {min} < {floor}")]
    TemperatureFloor { t: f64, min: f64, floor: f64 },

    #[error("blow-up suspected at t = {t}: {reason}")]
    BlowUp { t: f64, reason: String },

    #[error("time step {dt} exceeds the stability bound {bound}")]
    CflViolation { dt: f64, bound: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("config: {0}")]
    Config(String),

    #[error("snapshot: {0}")]
    Snapshot(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Run-terminating conditions raised by the time stepper.
    pub fn is_abort(&self) -> bool {
        matches!(self, Error::TemperatureFloor { .. } | Error::BlowUp { .. })
    }
}
