use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("x = {x} is outside the domain [{lo}, {hi}] of curve {curve}")]
    OutOfDomain { curve: String, x: f64, lo: f64, hi: f64 },

    #[error("y = {y} is outside the curve range [{lo}, {hi}]")]
    OutOfRange { y: f64, lo: f64, hi: f64 },

    #[error("invalid curve: {0}")]
    InvalidCurve(String),

    #[error("element {name}: {reason}")]
    InvalidElement { name: String, reason: String },

    #[error("line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },

    #[error("circuit failed validation: {0}")]
    Validation(String),

    #[error("formulation mismatch: {0}")]
    Formulation(String),

    #[error("element {element}: branch state {value} left the curve domain")]
    ElementDomain { element: String, value: f64 },

    #[error("unsupported element {element}: {reason}")]
    Unsupported { element: String, reason: String },

    #[error("degenerate inertia: condition number {condition:e} of the inertial block")]
    DegenerateInertia { condition: f64 },

    #[error("algebraic row unsolvable for coordinate {coord} at t = {t}")]
    AlgebraicRowUnsolvable { coord: usize, t: f64 },

    #[error("step size underflow at t = {t} (h = {h:e})")]
    StepUnderflow { t: f64, h: f64 },

    #[error("step budget of {steps} exhausted at t = {t}")]
    StepBudget { t: f64, steps: usize },

    #[error("integration left the domain at t = {t}: {source}")]
    DomainExit { t: f64, source: Box<Error> },

    #[error("evaluation failed at sample point x = {x:?}, v = {v:?}: {source}")]
    SamplePoint { x: Vec<f64>, v: Vec<f64>, source: Box<Error> },

    #[error("non-finite value: {0}")]
    NonFinite(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("mismatch: {0}")]
    Mismatch(String),
}
