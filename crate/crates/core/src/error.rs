use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("parse error{} at offset {offset}: {message}", field_suffix(.field))]
    Parse {
        field: Option<String>,
        offset: usize,
        message: String,
    },

    #[error("variance error: {0}")]
    Variance(String),

    #[error("index error: {0}")]
    Index(String),

    #[error("degenerate metric: |det g| = {det:e}")]
    DegenerateMetric { det: f64 },

    #[error("degenerate plane: |g(X,X)g(Y,Y) - g(X,Y)^2| = {denominator:e}")]
    DegeneratePlane { denominator: f64 },

    #[error("frame construction failed: {0}")]
    Frame(String),

    #[error("velocity not normalized: g(rho,rho) = {norm}")]
    Normalization { norm: f64 },

    #[error("schema error at {location}: {message}")]
    Schema { location: String, message: String },

    #[error("signature mismatch: declared {declared:?}, found {found:?} at {location}")]
    SignatureMismatch {
        declared: [i8; 4],
        found: [i8; 4],
        location: String,
    },

    #[error("unknown metric '{0}'")]
    UnknownMetric(String),

    #[error("{0}")]
    Io(String),
}

impl Error {
    pub fn parse(offset: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            field: None,
            offset,
            message: message.into(),
        }
    }

    pub fn schema(location: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Schema {
            location: location.into(),
            message: message.into(),
        }
    }

    /// Attaches the metric-file field name to an expression parse error.
    pub fn in_field(self, name: &str) -> Self {
        match self {
            Error::Parse {
                offset, message, ..
            } => Error::Parse {
                field: Some(name.to_string()),
                offset,
                message,
            },
            other => other,
        }
    }
}

fn field_suffix(field: &Option<String>) -> String {
    match field {
        Some(name) => format!(" in {name}"),
        None => String::new(),
    }
}
