use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("grids differ: {0}")]
    GridMismatch(String),

    #[error(
        "time step too coarse: dt * max rate = {product:.3e} exceeds {limit}; \
         use dt <= {suggested_dt:.3e} s"
    )]
    GridTooCoarse {
        product: f64,
        limit: f64,
        suggested_dt: f64,
    },

    /// The requested photon needs more excitation than the system can supply.
    #[error("infeasible target: population radicand reaches {radicand:.3e} at t = {time:.6e} s")]
    InfeasibleTarget { radicand: f64, time: f64 },

    #[error(
        "target carries {norm:.6} photons but at most 2C/(2C+1) = {bound:.6} can leave the cavity"
    )]
    EfficiencyBound { norm: f64, bound: f64 },

    /// The atom loses more than the coupling mirror transmits.
    #[error("impedance matching needs cooperativity C > 1/2, got C = {cooperativity:.4}")]
    BelowThreshold { cooperativity: f64 },

    /// The matched pulse would need more excitation than the atom can hold.
    #[error(
        "impedance matching impossible at cooperativity C = {cooperativity:.4}: \
         radicand reaches {radicand:.3e} at t = {time:.6e} s"
    )]
    WeakCoupling {
        cooperativity: f64,
        radicand: f64,
        time: f64,
    },

    #[error("integrator failed at t = {time:.6e} s: {reason}")]
    Integration { time: f64, reason: String },

    #[error("invalid density matrix: {0}")]
    InvalidDensityMatrix(String),

    #[error("overlapping time bins: {0}")]
    OverlappingBins(String),

    #[error("malformed data: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    /// True for errors that signal physically impossible requests rather than
    /// bad input or I/O trouble.
    pub fn is_infeasible(&self) -> bool {
        matches!(
            self,
            Error::InfeasibleTarget { .. }
                | Error::WeakCoupling { .. }
                | Error::BelowThreshold { .. }
                | Error::EfficiencyBound { .. }
        )
    }
}
