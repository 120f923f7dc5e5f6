use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parameter {z} outside curve range [{lo}, {hi}]")]
    OutOfRange { z: f64, lo: f64, hi: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid curve `{label}`: {reason}")]
    InvalidCurve { label: String, reason: String },

    #[error("direction ({0}, {1}) is evanescent in the lower medium")]
    Evanescent(f64, f64),

    #[error("direction ({0}, {1}) is grazing")]
    Grazing(f64, f64),

    #[error("transmission coefficient denominator vanishes for direction ({0}, {1})")]
    Singular(f64, f64),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("invalid scenario:\n{0}")]
    Invalid(String),

    #[error("no signal subspace: every frequency retained zero singular values")]
    NoSignalSubspace,

    #[error("multiple-scattering system is singular (condition estimate {condition:.3e})")]
    Resonance { condition: f64 },

    #[error("cannot calibrate noise on a zero matrix")]
    ZeroMatrix,

    #[error("degenerate steering vector at ({0}, {1})")]
    DegenerateSteering(f64, f64),

    #[error("frequency {index}: {source}")]
    AtFrequency {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("parse error in {file} at byte offset {offset}: {reason}")]
    Parse {
        file: String,
        offset: u64,
        reason: String,
    },

    #[error("unknown preset `{name}`; available: {available}")]
    UnknownPreset { name: String, available: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn at_frequency(self, index: usize) -> Self {
        Error::AtFrequency {
            index,
            source: Box::new(self),
        }
    }
}
