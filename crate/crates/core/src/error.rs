use thiserror::Error;

pub type Result<T> = std::result::Result<T, HenonError>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HenonError {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("map is degenerate at b = 0; the inverse is undefined")]
    DegenerateMap,

    #[error("orbit escaped the box [-{radius}, {radius}]^2 after {step} iterates")]
    Escape { step: usize, radius: f64 },

    #[error("no real fixed saddles (discriminant {0})")]
    NoSaddle(f64),

    #[error("no sign change of {what} on [{lo}, {hi}]")]
    NoSignChange { what: String, lo: f64, hi: f64 },

    #[error("Newton iteration failed for word {word}: residual {residual:e}")]
    NewtonFailure { word: String, residual: f64 },

    #[error("itinerary mismatch for word {word}: got {got}")]
    ItineraryMismatch { word: String, got: String },

    #[error("no bound period: |x - x(y)| = {separation:e} is below D_n = {floor:e}")]
    NoBoundPeriod { separation: f64, floor: f64 },

    #[error("requested depth {depth} exceeds cap {cap}")]
    DepthCap { depth: usize, cap: usize },

    #[error("geometry violation: {0}")]
    Geometry(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("incomplete enumeration at n = {n}: found {found} of {expected} points")]
    IncompleteEnumeration { n: usize, found: usize, expected: usize },

    #[error("i/o error: {0}")]
    Io(String),
}

impl HenonError {
    /// Process exit status for the command line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            HenonError::Config(_) | HenonError::DepthCap { .. } => 2,
            HenonError::DegenerateMap
            | HenonError::Escape { .. }
            | HenonError::NoSaddle(_)
            | HenonError::NoSignChange { .. }
            | HenonError::NewtonFailure { .. }
            | HenonError::Numerical(_) => 3,
            HenonError::ItineraryMismatch { .. } | HenonError::NoBoundPeriod { .. } | HenonError::Geometry(_) => 4,
            HenonError::IncompleteEnumeration { .. } => 5,
            HenonError::Io(_) => 1,
        }
    }
}

impl From<std::io::Error> for HenonError {
    fn from(e: std::io::Error) -> Self {
        HenonError::Io(e.to_string())
    }
}
