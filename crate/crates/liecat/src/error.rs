//! Crate-wide error type.
//!
//! Every failure names the precondition that broke, so callers (and the CLI,
//! which maps errors onto exit codes) can report something actionable instead
//! of a bare "math went wrong".

use std::fmt;

/// All the ways an operation in this crate can fail.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// An input or intermediate value was NaN or infinite.
    NonFinite { what: String },
    /// A trajectory or probe point left the valid set.
    ///
    /// `t_reached` is the last parameter value at which the state was still
    /// valid and `state` that last valid state (integration reports the step
    /// boundary, so the exit time is resolved to one step).
    DomainExit {
        t_reached: f64,
        state: Vec<f64>,
        detail: String,
    },
    /// A dimension argument is outside the supported range.
    BadDimension { detail: String },
    /// Two buffers that must agree in length do not.
    DimensionMismatch {
        what: String,
        expected: usize,
        found: usize,
    },
    /// A spec or model file (or an inline list) failed to parse.
    Parse { detail: String },
    /// A realization description is structurally invalid (bad structure
    /// constants, broken unit laws, incompatible action, ...).
    InvalidSpec { detail: String },
    /// Coordinates do not describe a valid morphism of the realization.
    InvalidMorphism { detail: String },
    /// Coordinates do not describe a valid object of the realization.
    InvalidObject { detail: String },
    /// `compose(g, h)` was called with `source(g) != target(h)`.
    NotComposable { mismatch: f64 },
    /// An operation produced a value that violates its own postcondition
    /// (e.g. a composite that fails the validity predicate at tolerance).
    InvalidResult { detail: String },
    /// The operation is not defined for this realization family.
    UnsupportedFamily {
        op: &'static str,
        family: String,
    },
    /// No fibre sampler is implemented for this family.
    SamplerUnavailable { family: String },
    /// A core/inverse operation was applied to a non-invertible morphism.
    NotInvertible { detail: String },
    /// The tangent vector points out of the monoid at the unit, so its
    /// exponential (time-1 flow) does not exist.
    OutwardVector { detail: String },
    /// The map handed to a naturality check fails the homomorphism laws.
    NotHomomorphism { detail: String },
    /// A probability vector is not an admissible state for the operation.
    InvalidConfiguration { detail: String },
    /// The configuration sits on the simplex boundary, where the requested
    /// quantity (e.g. the entropy gradient) is undefined.
    BoundaryConfiguration,
}

impl Error {
    /// Bare variant name, used by the CLI for its `error=...` line.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::NonFinite { .. } => "NonFinite",
            Error::DomainExit { .. } => "DomainExit",
            Error::BadDimension { .. } => "BadDimension",
            Error::DimensionMismatch { .. } => "DimensionMismatch",
            Error::Parse { .. } => "Parse",
            Error::InvalidSpec { .. } => "InvalidSpec",
            Error::InvalidMorphism { .. } => "InvalidMorphism",
            Error::InvalidObject { .. } => "InvalidObject",
            Error::NotComposable { .. } => "NotComposable",
            Error::InvalidResult { .. } => "InvalidResult",
            Error::UnsupportedFamily { .. } => "UnsupportedFamily",
            Error::SamplerUnavailable { .. } => "SamplerUnavailable",
            Error::NotInvertible { .. } => "NotInvertible",
            Error::OutwardVector { .. } => "OutwardVector",
            Error::NotHomomorphism { .. } => "NotHomomorphism",
            Error::InvalidConfiguration { .. } => "InvalidConfiguration",
            Error::BoundaryConfiguration => "BoundaryConfiguration",
        }
    }

    /// True for errors caused by malformed input (files, flags, coordinate
    /// buffers) as opposed to a mathematically out-of-domain request.
    ///
    /// The CLI exits with 2 for input errors and 1 for domain errors.
    /// Coordinates that parse but fail a validity predicate (an infeasible
    /// process, a backwards order pair) are *domain* errors: the request was
    /// well-formed, the mathematics said no.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::Parse { .. }
                | Error::InvalidSpec { .. }
                | Error::BadDimension { .. }
                | Error::DimensionMismatch { .. }
                | Error::UnsupportedFamily { .. }
        )
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::NonFinite { what } => write!(f, "non-finite value in {what}"),
            Error::DomainExit {
                t_reached, detail, ..
            } => write!(f, "left the domain after t = {t_reached}: {detail}"),
            Error::BadDimension { detail } => write!(f, "unsupported dimension: {detail}"),
            Error::DimensionMismatch {
                what,
                expected,
                found,
            } => write!(f, "{what}: expected length {expected}, got {found}"),
            Error::Parse { detail } => write!(f, "parse error: {detail}"),
            Error::InvalidSpec { detail } => write!(f, "invalid realization spec: {detail}"),
            Error::InvalidMorphism { detail } => write!(f, "invalid morphism: {detail}"),
            Error::InvalidObject { detail } => write!(f, "invalid object: {detail}"),
            Error::NotComposable { mismatch } => write!(
                f,
                "not composable: source/target mismatch {mismatch:e} exceeds 1e-9"
            ),
            Error::InvalidResult { detail } => write!(f, "result fails validation: {detail}"),
            Error::UnsupportedFamily { op, family } => {
                write!(f, "operation `{op}` is not defined for family {family}")
            }
            Error::SamplerUnavailable { family } => {
                write!(f, "no fibre sampler for family {family}")
            }
            Error::NotInvertible { detail } => write!(f, "morphism is not invertible: {detail}"),
            Error::OutwardVector { detail } => {
                write!(f, "vector points out of the monoid at the unit: {detail}")
            }
            Error::NotHomomorphism { detail } => {
                write!(f, "map fails the homomorphism laws: {detail}")
            }
            Error::InvalidConfiguration { detail } => {
                write!(f, "inadmissible probability configuration: {detail}")
            }
            Error::BoundaryConfiguration => {
                write!(f, "configuration lies on the simplex boundary")
            }
        }
    }
}

impl std::error::Error for Error {}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
