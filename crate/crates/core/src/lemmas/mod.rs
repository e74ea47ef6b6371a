// Copyright 2026 The sigscope Authors
// SPDX-License-Identifier: Apache-2.0

//! Certification harness for the quantitative estimates behind length
//! recovery.
//!
//! Each check takes a [`LemmaHypothesis`], filters it against the
//! estimate's hypotheses (a violation yields [`VerdictStatus::Skip`], never a
//! failure), computes the predicted bound, measures the exact dynamics and
//! compares. Randomized suites draw hypothesis-satisfying instances from a
//! seeded ChaCha stream per `(lemma, index)`, so any single instance can be
//! regenerated from its trace id.

mod checks;
mod generate;

use alloc::{format, string::String, vec::Vec};
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::{
    dynamics::{propagate, AngleTrajectory},
    intervals::IntervalSet,
    path::{AngularPath, SingularCuspSpec},
    Error, Result,
};

pub use checks::{
    capture_time_bound, continuity_radius, entry_cells, verify, verify_bad_set_measure,
    verify_c1_convergence, verify_capture_time, verify_comparison, verify_deviation_bound,
    verify_entry_time_localized, verify_range_invariance,
};
pub use generate::generate;

/// Default suite seed.
pub const DEFAULT_SEED: u64 = 0x5EED;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum LemmaId {
    RangePhi,
    DeviPhi,
    CatTim,
    EntryTime,
    BadSet,
    Comparison,
    C1Convergence,
    SmallAngleEntry,
}

impl LemmaId {
    pub const ALL: [Self; 8] = [
        Self::RangePhi,
        Self::DeviPhi,
        Self::CatTim,
        Self::EntryTime,
        Self::BadSet,
        Self::Comparison,
        Self::C1Convergence,
        Self::SmallAngleEntry,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::RangePhi => "RangePhi",
            Self::DeviPhi => "DeviPhi",
            Self::CatTim => "CatTim",
            Self::EntryTime => "EntryTime",
            Self::BadSet => "BadSet",
            Self::Comparison => "Comparison",
            Self::C1Convergence => "C1Convergence",
            Self::SmallAngleEntry => "SmallAngleEntry",
        }
    }

    /// Case-insensitive lookup by name.
    pub fn parse(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|id| id.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::param("lemma", format!("unknown lemma id `{s}`")))
    }
}

impl fmt::Display for LemmaId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Per-lemma parameters. Angles are in radians; `f1`/`f2` are the good
/// sets of the localized estimates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "lemma")]
pub enum LemmaParams {
    /// α in `[a, a + π]`.
    RangePhi { a: f64 },
    /// Target band `[a, b]`.
    DeviPhi { a: f64, b: f64 },
    /// Range `[a, b]`, capture band `[c, d]`, enlargement ε.
    CatTim {
        a: f64,
        b: f64,
        c: f64,
        d: f64,
        epsilon: f64,
    },
    /// Range `[a, a + π]`, window `[a_δ, b_δ]` on `f2 ⊆ f1`, with
    /// `μ(f1 \ f2) ≤ η`.
    EntryTime {
        a: f64,
        a_delta: f64,
        b_delta: f64,
        epsilon: f64,
        eta: f64,
        f1: IntervalSet,
        f2: IntervalSet,
    },
    /// As `EntryTime`, plus `μ(f1ᶜ) < δ`, the cell threshold `M`, the
    /// restart time `s` and an optional override of the λ threshold.
    BadSet {
        a: f64,
        a_delta: f64,
        b_delta: f64,
        epsilon: f64,
        eta: f64,
        delta: f64,
        m: f64,
        big_lambda: Option<f64>,
        s: f64,
        f1: IntervalSet,
        f2: IntervalSet,
    },
    /// Singular cusp compared against its tree-like (`c = 1`) partner.
    Comparison {
        spec: SingularCuspSpec,
        resolution: usize,
        samples: usize,
    },
    /// α is a staircase of a function with Lipschitz constant `lipschitz`,
    /// steps at most `grid` long; aligned start.
    C1Convergence {
        epsilon: f64,
        lipschitz: f64,
        grid: f64,
    },
    /// As `C1Convergence` with a start at most κ off and the entry
    /// deadline `t0`.
    SmallAngleEntry {
        epsilon: f64,
        lipschitz: f64,
        grid: f64,
        kappa: f64,
        t0: f64,
    },
}

impl LemmaParams {
    pub fn lemma(&self) -> LemmaId {
        match self {
            Self::RangePhi { .. } => LemmaId::RangePhi,
            Self::DeviPhi { .. } => LemmaId::DeviPhi,
            Self::CatTim { .. } => LemmaId::CatTim,
            Self::EntryTime { .. } => LemmaId::EntryTime,
            Self::BadSet { .. } => LemmaId::BadSet,
            Self::Comparison { .. } => LemmaId::Comparison,
            Self::C1Convergence { .. } => LemmaId::C1Convergence,
            Self::SmallAngleEntry { .. } => LemmaId::SmallAngleEntry,
        }
    }
}

/// One instance: the driving angle α, the rate λ and the start φ₀.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LemmaHypothesis {
    pub params: LemmaParams,
    pub path: AngularPath,
    pub lambda: f64,
    pub phi0: f64,
}

impl LemmaHypothesis {
    /// Checks only that λ and φ₀ are usable numbers; the lemma-specific
    /// hypotheses are filtered by the checks themselves.
    pub fn new(params: LemmaParams, path: AngularPath, lambda: f64, phi0: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::param("lambda", format!("{lambda} is not a positive finite rate")));
        }
        if !phi0.is_finite() {
            return Err(Error::param("phi0", "must be finite"));
        }
        Ok(Self {
            params,
            path,
            lambda,
            phi0,
        })
    }

    pub fn lemma(&self) -> LemmaId {
        self.params.lemma()
    }

    /// The trajectory the check measures.
    pub fn trajectory(&self) -> AngleTrajectory {
        propagate(&self.path, self.lambda, self.phi0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VerdictStatus {
    Pass,
    Fail,
    Skip,
}

/// Outcome of one check. For skips the numeric fields are zero and
/// `detail` names the violated hypothesis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LemmaVerdict {
    pub lemma: LemmaId,
    pub status: VerdictStatus,
    pub predicted_bound: f64,
    pub observed: f64,
    /// `predicted_bound − observed`.
    pub margin: f64,
    /// The bound held only because it exceeds the horizon.
    pub vacuous: bool,
    pub trace_ref: Option<String>,
    pub detail: Option<String>,
}

impl LemmaVerdict {
    pub(crate) fn skip(lemma: LemmaId, reason: impl Into<String>) -> Self {
        Self {
            lemma,
            status: VerdictStatus::Skip,
            predicted_bound: 0.0,
            observed: 0.0,
            margin: 0.0,
            vacuous: false,
            trace_ref: None,
            detail: Some(reason.into()),
        }
    }

    /// Upper-bound verdict: pass iff `observed ≤ predicted` up to a
    /// relative 1e−9.
    pub(crate) fn upper(lemma: LemmaId, predicted: f64, observed: f64) -> Self {
        let slack = 1e-9 * predicted.abs().max(1.0);
        let pass = observed <= predicted + slack;
        Self {
            lemma,
            status: if pass {
                VerdictStatus::Pass
            } else {
                VerdictStatus::Fail
            },
            predicted_bound: predicted,
            observed,
            margin: predicted - observed,
            vacuous: false,
            trace_ref: None,
            detail: None,
        }
    }

    pub fn is_fail(&self) -> bool {
        self.status == VerdictStatus::Fail
    }

    pub(crate) fn with_detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = Some(detail.into());
        self
    }
}

/// `"<lemma>-<seed hex>-<index>"`.
pub fn trace_ref(lemma: LemmaId, seed: u64, index: u64) -> String {
    format!("{}-{seed:x}-{index}", lemma.name())
}

/// Generates and checks instance `index` of a suite.
pub fn run_instance(lemma: LemmaId, seed: u64, index: u64) -> LemmaVerdict {
    let hyp = generate(lemma, seed, index);
    let mut verdict = verify(&hyp);
    verdict.trace_ref = Some(trace_ref(lemma, seed, index));
    verdict
}

/// `count` instances in index order.
pub fn run_suite(lemma: LemmaId, count: u64, seed: u64) -> Vec<LemmaVerdict> {
    (0..count).map(|i| run_instance(lemma, seed, i)).collect()
}

/// Pass/fail/skip counts for one lemma.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SuiteSummary {
    pub lemma: LemmaId,
    pub pass: u64,
    pub fail: u64,
    pub skip: u64,
    pub vacuous: u64,
    /// Smallest margin among non-skipped verdicts.
    pub min_margin: Option<f64>,
}

impl SuiteSummary {
    pub fn of(lemma: LemmaId, verdicts: &[LemmaVerdict]) -> Self {
        let mut out = Self {
            lemma,
            pass: 0,
            fail: 0,
            skip: 0,
            vacuous: 0,
            min_margin: None,
        };
        for v in verdicts.iter().filter(|v| v.lemma == lemma) {
            match v.status {
                VerdictStatus::Pass => out.pass += 1,
                VerdictStatus::Fail => out.fail += 1,
                VerdictStatus::Skip => out.skip += 1,
            }
            out.vacuous += u64::from(v.vacuous);
            if v.status != VerdictStatus::Skip {
                out.min_margin = Some(out.min_margin.map_or(v.margin, |m: f64| m.min(v.margin)));
            }
        }
        out
    }
}
