use thiserror::Error;

/// Which admissibility guard rejected a value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Guard {
    /// `|cos α|` fell below its margin (pole of the defining ODE).
    CosAlpha,
    /// `|sin α|` fell below its margin (degenerate parallel).
    SinAlpha,
    /// `|α'|` fell below its margin (vanishing curvature / stationary points).
    Curvature,
}

impl std::fmt::Display for Guard {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Guard::CosAlpha => write!(f, "|cos alpha| guard"),
            Guard::SinAlpha => write!(f, "|sin alpha| guard"),
            Guard::Curvature => write!(f, "|alpha'| guard"),
        }
    }
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum GeomError {
    #[error("u = {u} lies outside the domain [{lo}, {hi}]")]
    Domain { u: f64, lo: f64, hi: f64 },

    #[error("warp factor vanishes at u = {u}")]
    SingularParallel { u: f64 },

    #[error("pole of {what} at {at}")]
    Pole { what: &'static str, at: f64 },

    #[error("{guard} violated: value {value} is below margin {margin}")]
    GuardViolation { guard: Guard, value: f64, margin: f64 },

    #[error("non-existence: {0}")]
    NonExistence(String),

    #[error("stationary point at (u, v) = ({u}, {v}): lambda = {lambda}")]
    StationaryPoint { u: f64, v: f64, lambda: f64 },

    #[error("derivative unavailable: {0}")]
    DerivativeUnavailable(String),

    #[error("power base {base} is not positive for a non-integer exponent")]
    Branch { base: f64 },

    #[error("degenerate field: {0}")]
    DegenerateField(String),

    #[error("parameterization undefined: {0}")]
    Parameterization(String),

    #[error("invalid input: {0}")]
    Validation(String),

    #[error("numeric failure: {0}")]
    Numeric(String),
}

pub type Result<T, E = GeomError> = std::result::Result<T, E>;
