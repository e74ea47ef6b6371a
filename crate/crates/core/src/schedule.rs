// Copyright 2026 The sigscope Authors
// SPDX-License-Identifier: Apache-2.0

use alloc::{format, vec::Vec};

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// A nonempty list of positive λ values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct LambdaSchedule(Vec<f64>);

impl LambdaSchedule {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptySchedule);
        }
        if let Some(bad) = values.iter().find(|v| !(**v > 0.0 && v.is_finite())) {
            return Err(Error::param("lambdas", format!("{bad} is not a positive finite value")));
        }
        Ok(Self(values))
    }

    /// `start, start·ratio, …` with `count` terms.
    pub fn geometric(start: f64, ratio: f64, count: usize) -> Result<Self> {
        if !(ratio > 0.0 && ratio.is_finite()) {
            return Err(Error::param("lambdas", "ratio must be positive"));
        }
        let mut values = Vec::with_capacity(count);
        let mut v = start;
        for _ in 0..count {
            values.push(v);
            v *= ratio;
        }
        Self::new(values)
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn max(&self) -> f64 {
        self.0.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

impl Default for LambdaSchedule {
    /// `2⁰, 2¹, …, 2¹⁴`.
    fn default() -> Self {
        Self::geometric(1.0, 2.0, 15).expect("valid default")
    }
}

impl TryFrom<Vec<f64>> for LambdaSchedule {
    type Error = Error;

    fn try_from(value: Vec<f64>) -> Result<Self> {
        Self::new(value)
    }
}

impl From<LambdaSchedule> for Vec<f64> {
    fn from(value: LambdaSchedule) -> Self {
        value.0
    }
}
