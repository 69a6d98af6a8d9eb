//! Error type shared by every module of the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum SosError {
    // --- tabular ---
    #[error("column `{0}` declared in the schema is missing from the CSV header")]
    MissingColumn(String),
    #[error("continuous column `{column}` contains a non-numeric value `{value}`")]
    NonNumericValue { column: String, value: String },
    #[error("CSV file has a header but no data rows")]
    EmptyTable,
    #[error("categorical column `{column}` contains a value `{value}` unseen at encoder fit time")]
    UnseenCategory { column: String, value: String },
    #[error("table holds a single class; oversampling needs at least two")]
    SingleClass,
    #[error("schema is invalid: {0}")]
    BadSchema(String),
    #[error("row {row} has {got} cells, schema declares {want} columns")]
    RowWidth { row: usize, got: usize, want: usize },

    // --- sde / sampling ---
    #[error("time {t} outside the valid range [{lo}, {hi}]")]
    TimeOutOfRange { t: f64, lo: f64, hi: f64 },
    #[error("perturbation std underflows at t = {0}; conditional score is undefined there")]
    DegenerateTime(f64),
    #[error("ancestral sampling is not defined for the Sub-VP family")]
    UnsupportedSampler,
    #[error("numeric failure: {0}")]
    NumericFailure(String),
    #[error("no non-target rows available to seed boundary oversampling")]
    NoSeedRows,

    // --- scorenet / training ---
    #[error("expected a vector of width {want}, got {got}")]
    DimensionMismatch { want: usize, got: usize },
    #[error("gradient cache does not match the supplied parameters")]
    StaleCache,

    // --- finetune ---
    #[error("cannot measure the angle of a zero-length gradient")]
    ZeroVector,

    // --- eval ---
    #[error("label vectors differ in length: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("training labels contain a single class")]
    SingleClassTraining,
    #[error("need at least {need} rows, got {got}")]
    TooFewRows { need: usize, got: usize },
    #[error("column `{0}` is not continuous; histograms need a continuous column")]
    NotContinuous(String),
    #[error("train and test tables use different schemas")]
    SchemaMismatch,

    // --- app / persistence ---
    #[error("model file format `{got}`, this build reads `{want}`")]
    VersionMismatch { got: String, want: String },
    #[error("missing model artifact for class `{0}`; run `train` first")]
    MissingArtifact(String),
    #[error("invalid configuration: {0}")]
    BadConfig(String),
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("json error in {path}: {source}")]
    Json {
        path: String,
        #[source]
        source: serde_json::Error,
    },
}

/// CLI exit-code category. 2 config, 3 data, 4 missing artifact, 5 numeric.
impl SosError {
    pub fn exit_code(&self) -> i32 {
        use SosError::*;
        match self {
            BadConfig(_) | BadSchema(_) | Json { .. } => 2,
            MissingColumn(_)
            | NonNumericValue { .. }
            | EmptyTable
            | UnseenCategory { .. }
            | SingleClass
            | RowWidth { .. }
            | LengthMismatch(..)
            | SingleClassTraining
            | TooFewRows { .. }
            | NotContinuous(_)
            | SchemaMismatch
            | Io { .. } => 3,
            MissingArtifact(_) | VersionMismatch { .. } => 4,
            TimeOutOfRange { .. }
            | DegenerateTime(_)
            | UnsupportedSampler
            | NumericFailure(_)
            | NoSeedRows
            | DimensionMismatch { .. }
            | StaleCache
            | ZeroVector => 5,
        }
    }
}

pub type Result<T> = std::result::Result<T, SosError>;
