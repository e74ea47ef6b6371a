// Copyright 2026 The sigscope Authors
// SPDX-License-Identifier: Apache-2.0

use alloc::string::String;

/// Errors raised while building paths or running computations.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("path has no segments")]
    EmptyPath,
    #[error("segment {index}: duration must be positive and finite, got {value}")]
    BadDuration { index: usize, value: f64 },
    #[error("segment {index}: angle must be finite, got {value}")]
    BadAngle { index: usize, value: f64 },
    #[error("invalid `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
    #[error("signature depth mismatch: {left} vs {right}")]
    DepthMismatch { left: usize, right: usize },
    #[error("no regular-cusp witness for delta = {delta}")]
    MissingWitness { delta: f64 },
    #[error("point {point} is not covered by any window")]
    Uncovered { point: f64 },
    #[error("lambda schedule is empty")]
    EmptySchedule,
}

pub type Result<T, E = Error> = core::result::Result<T, E>;

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
