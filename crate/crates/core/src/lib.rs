// Copyright 2026 The sigscope Authors
// SPDX-License-Identifier: Apache-2.0

//! Length recovery for planar bounded-variation paths.
//!
//! A unit-speed planar path is described by its direction angle, held as a
//! piecewise-constant [`AngularPath`]. From it the crate computes
//!
//! * truncated signatures and tensor-norm proxies ([`signature`]),
//! * the Cartan development into SL₂(ℝ) under λ-scaling ([`sl2`]),
//! * the closed-form angle dynamics of the developed vector ([`dynamics`]),
//! * randomized certification suites for the quantitative estimates
//!   that drive length recovery ([`lemmas`]),
//! * the combined length estimator and window cover ([`estimator`]).
//!
//! The crate is `no_std` and only needs `alloc`.

#![no_std]
#![forbid(unsafe_code)]
#![warn(missing_debug_implementations)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod dynamics;
mod error;
pub mod estimator;
pub mod intervals;
pub mod lemmas;
mod math;
pub mod schedule;
pub mod path;
pub mod signature;
pub mod sl2;

pub use error::{Error, Result};
pub use intervals::IntervalSet;
pub use path::{AngularPath, PlanarPath, Segment};
pub use schedule::LambdaSchedule;
