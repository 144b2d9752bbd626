use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the interval a function is defined on.
    #[error("{quantity} = {value} outside its domain [{lo}, {hi}]")]
    Domain {
        quantity: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },

    #[error("schedule infeasible at t = {time_s} s: {reason}")]
    Infeasible { time_s: f64, reason: String },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("time step {dt} s exceeds the stability limit {limit} s")]
    StepSize { dt: f64, limit: f64 },

    #[error("invariant region left at t = {time_s} s: {detail}")]
    Scheme { time_s: f64, detail: String },

    #[error("mixture is empty at t = {time_s} s")]
    EmptyMixture { time_s: f64 },

    #[error("negative concentrations at t = {time_s} s even at the minimum step")]
    Kinetics { time_s: f64 },

    #[error("stage {index} failed at t = {time_s} s: {source}")]
    Stage {
        index: usize,
        time_s: f64,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn domain(quantity: &'static str, value: f64, lo: f64, hi: f64) -> Self {
        Error::Domain {
            quantity,
            value,
            lo,
            hi,
        }
    }
}
