//! Error type shared by all modules.

use alloc::string::String;
use core::fmt;

/// Errors produced by constructors and operations.
///
/// Values carried inside variants are pre-formatted strings so that the
/// error type stays independent of the scalar backend.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Error {
    /// A space must have at least one point.
    EmptySpace,
    /// Point labels must be pairwise distinct.
    DuplicatePoint { label: String },
    /// A vector or matrix does not match the expected shape.
    LengthMismatch { context: &'static str, expected: usize, found: usize },
    /// A distribution entry is negative.
    NegativeMass { label: String, mass: String },
    /// Distribution masses do not sum to one.
    MassNotOne { sum: String },
    /// A kernel row fails nonnegativity or the unit-sum condition.
    RowNotStochastic { row: String, detail: String },
    /// Two operands live on different spaces.
    SpaceMismatch { context: &'static str },
    /// A referenced point label does not belong to the space.
    UnknownPoint { label: String },
    /// A referenced parameter label does not belong to the family.
    UnknownTheta { label: String },
    /// An experiment needs at least one family member.
    EmptyFamily,
    /// Parameter labels must be pairwise distinct.
    DuplicateTheta { label: String },
    /// The operation needs an estimand but the experiment has none.
    NoEstimand,
    /// The conditioning kernel is not sufficient; carries the witness.
    NotSufficient {
        event_point: String,
        target_point: String,
        theta_a: String,
        theta_b: String,
        value_a: String,
        value_b: String,
    },
    /// The conditioning kernel is not complete (moment-matrix rank deficit).
    NotComplete { rank: usize, support: usize },
    /// The estimator is biased at some parameter.
    NotUnbiased { theta: String, bias: String },
    /// No statistic factors the target through the kernel; carries the
    /// conflicting source pair.
    NoFactorization {
        target_point: String,
        source_a: String,
        source_b: String,
        value_a: String,
        value_b: String,
    },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::EmptySpace => write!(f, "space must contain at least one point"),
            Error::DuplicatePoint { label } => write!(f, "duplicate point label {label:?}"),
            Error::LengthMismatch { context, expected, found } => {
                write!(f, "{context}: expected length {expected}, found {found}")
            }
            Error::NegativeMass { label, mass } => {
                write!(f, "negative mass {mass} at point {label:?}")
            }
            Error::MassNotOne { sum } => write!(f, "masses sum to {sum}, not 1"),
            Error::RowNotStochastic { row, detail } => {
                write!(f, "row {row:?} is not a probability vector: {detail}")
            }
            Error::SpaceMismatch { context } => write!(f, "space mismatch in {context}"),
            Error::UnknownPoint { label } => write!(f, "unknown point {label:?}"),
            Error::UnknownTheta { label } => write!(f, "unknown parameter {label:?}"),
            Error::EmptyFamily => write!(f, "experiment needs at least one distribution"),
            Error::DuplicateTheta { label } => write!(f, "duplicate parameter label {label:?}"),
            Error::NoEstimand => write!(f, "experiment has no estimand"),
            Error::NotSufficient { event_point, target_point, theta_a, theta_b, value_a, value_b } => {
                write!(
                    f,
                    "kernel is not sufficient: P({{{event_point}}}|M)({target_point}) is {value_a} \
                     under {theta_a} but {value_b} under {theta_b}"
                )
            }
            Error::NotComplete { rank, support } => {
                write!(f, "kernel is not complete: moment-matrix rank {rank} of {support}")
            }
            Error::NotUnbiased { theta, bias } => {
                write!(f, "estimator is biased at {theta}: bias {bias}")
            }
            Error::NoFactorization { target_point, source_a, source_b, value_a, value_b } => {
                write!(
                    f,
                    "no factorization: target point {target_point:?} is charged by {source_a:?} \
                     (value {value_a}) and {source_b:?} (value {value_b})"
                )
            }
        }
    }
}

impl core::error::Error for Error {}

pub type Result<T> = core::result::Result<T, Error>;
