use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("derivative order {requested} exceeds the available order {available}")]
    OrderExceeded { requested: usize, available: usize },

    #[error("invalid cutoff geometry: plateau {plateau}, support {support}")]
    InvalidGeometry { plateau: f64, support: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("unknown catalog entry `{0}`")]
    UnknownCatalog(String),

    #[error("regulator must be positive, got y = {0}")]
    Regulator(f64),

    #[error("quadrature did not converge: partial value {partial}, error estimate {error_estimate:e}")]
    Quadrature {
        partial: num_complex::Complex64,
        error_estimate: f64,
    },

    #[error("inconclusive y -> 0 behaviour over {} schedule points", .table.len())]
    Inconclusive {
        /// `(y, I(y))` rows of the failed schedule.
        table: Vec<(f64, num_complex::Complex64)>,
    },

    #[error("no subtraction order up to {p_max} makes the product converge")]
    NotExtendable { p_max: usize },

    #[error("extension failed: {0}")]
    ExtensionFailure(String),

    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },

    #[error("unknown atom `{name}` at byte {offset}")]
    UnknownAtom { offset: usize, name: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
