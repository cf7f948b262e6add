use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("unrecognized header {found:?}; expected `t_min,irradiance_wm2` or `day,minute,irradiance_wm2`")]
    HeaderMismatch { found: Vec<String> },

    #[error("dataset contains no valid samples")]
    EmptyDataset,

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("degenerate day {day}: {reason}")]
    DegenerateDay { day: u32, reason: String },

    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    #[error("zero data range; bin width undefined")]
    ZeroRange,

    #[error("gumbel fit failed: {0}")]
    GumbelFit(String),

    #[error("grid error: {0}")]
    Grid(String),

    #[error("binning error: {0}")]
    Binning(String),

    #[error("bandwidth error: {0}")]
    Bandwidth(String),

    #[error("density never exceeds threshold {threshold}")]
    EmptySupport { threshold: f64 },

    #[error("parameter realization failed after {attempts} attempts on day {day}")]
    Realization { day: u32, attempts: usize },

    #[error("diode model extraction failed: {0}")]
    Extraction(String),

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("statistics error: {0}")]
    Statistics(String),

    #[error("model file error: {0}")]
    Model(String),

    #[error("unsupported model format version {found} (this build reads major version {supported})")]
    UnsupportedVersion { found: String, supported: u32 },
}
