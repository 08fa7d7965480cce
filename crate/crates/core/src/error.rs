use std::fmt;

/// Broad failure class, used by the command-line front end to pick an exit
/// code and a machine-readable tag.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// Bad configuration or invalid input parameters.
    Config,
    /// A numerical guard tripped (norm drift, truncation, boundary, convergence).
    Numerical,
    /// Reading or writing files failed.
    Io,
}

impl ErrorKind {
    pub fn exit_code(self) -> i32 {
        match self {
            ErrorKind::Config => 2,
            ErrorKind::Numerical => 3,
            ErrorKind::Io => 4,
        }
    }

    pub fn tag(self) -> &'static str {
        match self {
            ErrorKind::Config => "config",
            ErrorKind::Numerical => "numerical-guard",
            ErrorKind::Io => "io",
        }
    }
}

impl fmt::Display for ErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("band projectors undefined: momentum and mass both vanish (E+ = 0)")]
    DegenerateSpectrum,

    #[error("no Landau-Zener sweep without a positive potential slope (g = {0})")]
    NoSweep(f64),

    #[error("requested band has norm {norm:.3e} after projection; spinor is orthogonal to it")]
    EmptyProjection { norm: f64 },

    #[error("sweep integration not converged: halving dt moved a population by {delta:.3e}")]
    NotConverged { delta: f64 },

    #[error("norm drift {drift:.3e} exceeds guard {limit:.0e}")]
    NormDrift { drift: f64, limit: f64 },

    #[error("wave packet reached the grid edge at t = {time}: edge weight {weight:.3e}")]
    BoundaryContamination { time: f64, weight: f64 },

    #[error("Fock truncation violated at t = {time}: tail weight {tail:.3e}; increase n_fock")]
    Truncation { time: f64, tail: f64 },

    #[error("grid half-width {half_width} does not cover the required {required}")]
    GridCoverage { half_width: f64, required: f64 },

    #[error("probability {value} left [0, 1] by more than round-off")]
    Inconsistent { value: f64 },

    #[error("line {line}: key `{key}`: {reason}")]
    ConfigParse {
        line: usize,
        key: String,
        reason: String,
    },

    #[error("missing required keys: {}", .0.join(", "))]
    MissingKeys(Vec<String>),

    #[error("{0}")]
    Config(String),

    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::InvalidParameter { .. }
            | Error::DegenerateSpectrum
            | Error::NoSweep(_)
            | Error::EmptyProjection { .. }
            | Error::GridCoverage { .. }
            | Error::ConfigParse { .. }
            | Error::MissingKeys(_)
            | Error::Config(_) => ErrorKind::Config,
            Error::NotConverged { .. }
            | Error::NormDrift { .. }
            | Error::BoundaryContamination { .. }
            | Error::Truncation { .. }
            | Error::Inconsistent { .. } => ErrorKind::Numerical,
            Error::Io { .. } => ErrorKind::Io,
        }
    }

    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
