//! Instance documents, reports, the acceptance matrix and the subcommands of the `sovkit` binary.

use std::path::Path;

use thiserror::Error;

use crate::error::Error;

pub mod accept;
pub mod commands;
pub mod doc;
pub mod report;
pub mod table;

pub use accept::{run_acceptance, AcceptanceRun, Criterion, CRITERIA};
pub use commands::{
    cmd_accept, cmd_elliptic, cmd_flow, cmd_sov, cmd_spectral, cmd_theta, report_body, CurveDocument, FlowOptions, Outcome,
};
pub use doc::{
    load_json, parse_bracket, parse_json, BracketDocument, DivisorPointDocument, EllipticDocument, InstanceSource,
    LaxDocument, ThetaDocument,
};
pub use report::{digest, CheckRecord, Environment, ExperimentConfig, Report};
pub use table::{fmt_f64, read_csv, write_csv, Table};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ACCEPTANCE: i32 = 1;
pub const EXIT_SCHEMA: i32 = 2;
pub const EXIT_NON_GENERIC: i32 = 3;
pub const EXIT_NUMERIC: i32 = 4;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("schema error: {0}")]
    Schema(String),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error(transparent)]
    Numeric(#[from] Error),
    #[error("acceptance failed: {}", .0.join(", "))]
    Failed(Vec<String>),
}

impl HarnessError {
    pub fn schema(field: impl std::fmt::Display, msg: impl std::fmt::Display) -> Self {
        HarnessError::Schema(format!("field `{field}`: {msg}"))
    }

    pub fn io(path: &Path, source: std::io::Error) -> Self {
        HarnessError::Io {
            path: path.display().to_string(),
            source,
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Failed(_) => EXIT_ACCEPTANCE,
            HarnessError::Schema(_) | HarnessError::Io { .. } => EXIT_SCHEMA,
            HarnessError::Numeric(e) => numeric_exit_code(e),
        }
    }
}

/// Exit code of a library error.
pub fn numeric_exit_code(e: &Error) -> i32 {
    match e {
        Error::InvalidInput(_) | Error::IndexOutOfRange(_) | Error::Basis(_) => EXIT_SCHEMA,
        Error::NonGeneric(_) | Error::ResultantDegenerate | Error::ReductionUndefined | Error::UndefinedRoots => {
            EXIT_NON_GENERIC
        }
        _ => EXIT_NUMERIC,
    }
}
