//! Structured outcome of one relation check.

use serde::{Deserialize, Serialize};

pub const REPORT_SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub enum Mode {
    #[serde(rename = "symbolic-m")]
    SymbolicM,
    #[serde(rename = "fixed-m")]
    FixedM { m: String },
    #[serde(rename = "numeric")]
    Numeric,
    #[serde(rename = "matrix-model")]
    MatrixModel,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub enum Status {
    #[serde(rename = "exact-zero")]
    ExactZero,
    #[serde(rename = "within-tolerance")]
    WithinTolerance,
    #[serde(rename = "FAILED")]
    Failed,
}

/// Residual payload: an exact zero witness, or the maximal absolute error
/// of a numeric check. Exact scalars are serialized as strings so no float
/// corruption can occur.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub enum Residual {
    #[serde(rename = "exact")]
    Exact { witness: String },
    #[serde(rename = "max-abs-error")]
    MaxAbsError { value: f64, tolerance: f64 },
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct VerificationReport {
    pub schema_version: u32,
    pub relation: String,
    pub mode: Mode,
    pub status: Status,
    pub residual: Residual,
    /// Length of the reduction trace (number of recorded rewrite steps).
    pub reduction_trace_len: usize,
    /// Human-readable notes: intermediate forms, seeds, trial logs.
    pub notes: Vec<String>,
    /// Wall time; excluded from the serialized JSON so reports are
    /// byte-identical for identical inputs.
    #[serde(skip)]
    pub wall: std::time::Duration,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.status != Status::Failed
    }

    pub fn exact_zero(relation: &str, mode: Mode, trace_len: usize) -> VerificationReport {
        VerificationReport {
            schema_version: REPORT_SCHEMA_VERSION,
            relation: relation.into(),
            mode,
            status: Status::ExactZero,
            residual: Residual::Exact { witness: "0".into() },
            reduction_trace_len: trace_len,
            notes: Vec::new(),
            wall: std::time::Duration::ZERO,
        }
    }

    pub fn numeric(relation: &str, mode: Mode, max_err: f64, tol: f64) -> VerificationReport {
        VerificationReport {
            schema_version: REPORT_SCHEMA_VERSION,
            relation: relation.into(),
            mode,
            status: if max_err <= tol { Status::WithinTolerance } else { Status::Failed },
            residual: Residual::MaxAbsError { value: max_err, tolerance: tol },
            reduction_trace_len: 0,
            notes: Vec::new(),
            wall: std::time::Duration::ZERO,
        }
    }

    pub fn failed_exact(relation: &str, mode: Mode, witness: String) -> VerificationReport {
        VerificationReport {
            schema_version: REPORT_SCHEMA_VERSION,
            relation: relation.into(),
            mode,
            status: Status::Failed,
            residual: Residual::Exact { witness },
            reduction_trace_len: 0,
            notes: Vec::new(),
            wall: std::time::Duration::ZERO,
        }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.notes.push(note.into());
        self
    }

    pub fn merge_status(&mut self, other: &VerificationReport) {
        if !other.passed() {
            self.status = Status::Failed;
        }
    }

    pub fn text_line(&self) -> String {
        let status = match self.status {
            Status::ExactZero => "exact-zero",
            Status::WithinTolerance => "within-tolerance",
            Status::Failed => "FAILED",
        };
        let residual = match &self.residual {
            Residual::Exact { witness } => format!("residual = {}", witness),
            Residual::MaxAbsError { value, tolerance } => {
                format!("max |residual| = {:.3e} (tol {:.1e})", value, tolerance)
            }
        };
        format!(
            "{:<22} {:<18} {} [{} ms]",
            self.relation,
            status,
            residual,
            self.wall.as_millis()
        )
    }
}
