use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{}:{line}: {message}", file.display())]
    Parse {
        file: PathBuf,
        /// 1-based line number, 0 when the failure is not tied to a line.
        line: usize,
        message: String,
    },

    #[error("record {record}: {message}")]
    Referential { record: String, message: String },

    #[error("no publications survive filtering ({dropped} dropped)")]
    EmptyCorpus { dropped: usize },

    #[error("publication {pub_id}: no stratum for ({year}, {sc_id})")]
    MissingStratum {
        pub_id: String,
        year: i32,
        sc_id: String,
    },

    #[error("publication {pub_id}: leave-one-out mean undefined for single-member stratum ({year}, {sc_id})")]
    LeaveOneOutUndefined {
        pub_id: String,
        year: i32,
        sc_id: String,
    },

    #[error("publication {0} has no impact record")]
    ImpactCoverage(String),

    #[error("territory {0} is inactive (zero total)")]
    InactiveTerritory(String),

    #[error("matrix is empty")]
    EmptyMatrix,

    #[error("subject category {0} has zero national total")]
    UndefinedShare(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("territory {0} has no positive population")]
    MissingPopulation(String),

    #[error("invalid spec: {0}")]
    Spec(String),

    #[error("unknown subject category {0}")]
    UnknownSc(String),

    #[error("table style {style} cannot render {got}")]
    StyleMismatch { style: String, got: String },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// Short error kind used in machine-readable diagnostics.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Parse { .. } => "ParseError",
            Error::Referential { .. } => "ReferentialError",
            Error::EmptyCorpus { .. } => "EmptyCorpusError",
            Error::MissingStratum { .. } => "MissingStratumError",
            Error::LeaveOneOutUndefined { .. } => "LeaveOneOutUndefined",
            Error::ImpactCoverage(_) => "ImpactCoverageError",
            Error::InactiveTerritory(_) => "InactiveTerritoryError",
            Error::EmptyMatrix => "EmptyMatrixError",
            Error::UndefinedShare(_) => "UndefinedShareError",
            Error::Domain(_) => "DomainError",
            Error::MissingPopulation(_) => "MissingPopulationError",
            Error::Spec(_) => "SpecError",
            Error::UnknownSc(_) => "UnknownScError",
            Error::StyleMismatch { .. } => "StyleMismatchError",
            Error::Config(_) => "ConfigError",
            Error::Io { .. } => "IoError",
        }
    }

    /// Owning module of the error, for module-qualified codes.
    pub fn module(&self) -> &'static str {
        match self {
            Error::Parse { .. } | Error::Referential { .. } | Error::EmptyCorpus { .. } => "corpus",
            Error::MissingStratum { .. } | Error::LeaveOneOutUndefined { .. } => "normalize",
            Error::ImpactCoverage(_) | Error::EmptyMatrix => "strength",
            Error::InactiveTerritory(_) | Error::UndefinedShare(_) | Error::Domain(_) => {
                "specialization"
            }
            Error::MissingPopulation(_) => "analytics",
            Error::Spec(_) => "synth",
            Error::UnknownSc(_) | Error::StyleMismatch { .. } | Error::Io { .. } => "report",
            Error::Config(_) => "cli",
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(file: impl Into<PathBuf>, line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            file: file.into(),
            line,
            message: message.into(),
        }
    }
}
