use thiserror::Error;

/// Errors shared across the whole engine.
#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum Error {
    #[error("division by zero")]
    DivisionByZero,

    #[error("residue undefined: element has negative valuation {0}")]
    NegativeValuation(i64),

    #[error("operation requires exact coefficients but an approximate element was supplied")]
    ApproximateInput,

    #[error("elements belong to different fields")]
    FieldMismatch,

    #[error("Hensel hypothesis v(f(a)) > 2 v(f'(a)) fails (v(f(a)) = {f_val}, v(f'(a)) = {df_val})")]
    HenselHypothesisFailed { f_val: String, df_val: String },

    #[error("precision budget exhausted (requested {requested}, cap {cap})")]
    PrecisionExhausted { requested: i64, cap: i64 },

    #[error("degree {degree} exceeds the root-operation cap {cap}")]
    DegreeCapExceeded { degree: usize, cap: usize },

    #[error("valuation read of an approximate element is not certified at the current precision")]
    UncertifiedValuation,

    #[error("model construction called on a repelling configuration")]
    InvalidNormalForm,

    #[error("internal inconsistency: {0}")]
    InternalInconsistency(String),

    #[error("(p, d) = ({p}, {d}) is one of the excluded exceptional pairs")]
    ExceptionalCase { p: u64, d: u32 },

    #[error("no two-term decomposition d = e0 + e1 with e_i >= 2 and p ∤ e_i exists for (p, d) = ({p}, {d})")]
    NoDecomposition { p: u64, d: u32 },

    #[error("witness search failed: {0}")]
    WitnessNotFound(String),

    #[error("unsupported residue field: p^m = {p}^{m} exceeds the table bound")]
    ResidueFieldTooLarge { p: u64, m: u32 },

    #[error("invalid field specification: {0}")]
    InvalidField(String),

    #[error("parse error at position {pos}: {msg}")]
    Parse { pos: usize, msg: String },
}

pub type Result<T> = std::result::Result<T, Error>;
