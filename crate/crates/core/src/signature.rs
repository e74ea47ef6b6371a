// Copyright 2026 The sigscope Authors
// SPDX-License-Identifier: Apache-2.0

//! Truncated signatures of planar polylines and tensor-norm proxies.
//!
//! Level `n` is stored densely as `2ⁿ` coordinates. The word
//! `w₁w₂…wₙ` over the letters `{1, 2}` sits at index `Σ (wᵢ − 1)·2^{n−i}`,
//! so the first letter is the most significant bit and lexicographic word
//! order matches index order.

use alloc::{vec, vec::Vec};

use serde::{Deserialize, Serialize};

use crate::{
    math::{ln_factorial, PI},
    path::AngularPath,
    Error, Result,
};

/// Signature truncated at `depth`; `levels[0]` is the scalar 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TensorSeries {
    depth: usize,
    levels: Vec<Vec<f64>>,
}

impl TensorSeries {
    /// The unit series `(1, 0, 0, …)`.
    pub fn identity(depth: usize) -> Self {
        let mut levels: Vec<Vec<f64>> = (0..=depth).map(|n| vec![0.0; 1 << n]).collect();
        levels[0][0] = 1.0;
        Self { depth, levels }
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn level(&self, n: usize) -> &[f64] {
        &self.levels[n]
    }

    pub fn levels(&self) -> &[Vec<f64>] {
        &self.levels
    }

    /// Coefficient of a word given as letters in `{1, 2}`.
    pub fn coefficient(&self, word: &[u8]) -> f64 {
        let idx = word
            .iter()
            .fold(0usize, |acc, &letter| (acc << 1) | usize::from(letter == 2));
        self.levels[word.len()][idx]
    }

    /// Right-multiplies by the signature of a straight segment, in place.
    ///
    /// Level `n` of `S ⊗ exp(v)` is evaluated with the Horner scheme
    /// `((S₀·v/n + S₁)·v/(n−1) + … + S_{n−1})·v/1 + Sₙ`, from the top level
    /// down so lower levels are still the old values when read.
    pub fn extend_by_segment(&mut self, v: [f64; 2]) {
        let mut acc: Vec<f64> = Vec::with_capacity(1 << self.depth);
        let mut next: Vec<f64> = Vec::with_capacity(1 << self.depth);
        for n in (1..=self.depth).rev() {
            acc.clear();
            acc.extend_from_slice(&self.levels[0]);
            for k in 1..=n {
                let scale = 1.0 / (n - k + 1) as f64;
                next.clear();
                for &x in &acc {
                    next.push(x * v[0] * scale);
                    next.push(x * v[1] * scale);
                }
                if k < n {
                    for (dst, src) in next.iter_mut().zip(&self.levels[k]) {
                        *dst += src;
                    }
                }
                core::mem::swap(&mut acc, &mut next);
            }
            for (dst, src) in self.levels[n].iter_mut().zip(&acc) {
                *dst += src;
            }
        }
    }
}

/// Tensor exponential `Σ v^{⊗n}/n!` truncated at `depth`.
pub fn segment_signature(v: [f64; 2], depth: usize) -> TensorSeries {
    let mut levels = Vec::with_capacity(depth + 1);
    levels.push(vec![1.0]);
    for n in 1..=depth {
        let prev: &Vec<f64> = &levels[n - 1];
        let scale = 1.0 / n as f64;
        let mut level = Vec::with_capacity(1 << n);
        for &x in prev {
            level.push(x * v[0] * scale);
            level.push(x * v[1] * scale);
        }
        levels.push(level);
    }
    TensorSeries { depth, levels }
}

/// Chen product: level `n` of the result is `Σₖ aₖ ⊗ b_{n−k}`.
pub fn chen_concat(a: &TensorSeries, b: &TensorSeries) -> Result<TensorSeries> {
    if a.depth != b.depth {
        return Err(Error::DepthMismatch {
            left: a.depth,
            right: b.depth,
        });
    }
    let mut out = TensorSeries::identity(a.depth);
    for n in 0..=a.depth {
        let level = &mut out.levels[n];
        level.iter_mut().for_each(|x| *x = 0.0);
        for k in 0..=n {
            let lhs = &a.levels[k];
            let rhs = &b.levels[n - k];
            let stride = rhs.len();
            for (i, &x) in lhs.iter().enumerate() {
                if x == 0.0 {
                    continue;
                }
                for (dst, &y) in level[i * stride..(i + 1) * stride].iter_mut().zip(rhs) {
                    *dst += x * y;
                }
            }
        }
    }
    Ok(out)
}

/// Signature of the polyline traced by `path` (angles read as β).
pub fn signature(path: &AngularPath, depth: usize) -> TensorSeries {
    let mut sig = TensorSeries::identity(depth);
    for seg in path.segments() {
        sig.extend_by_segment(seg.displacement());
    }
    sig
}

/// Signature of the path rescaled to unit length, plus the scale.
///
/// Level `n` of the original signature is `Lⁿ` times level `n` of the
/// returned series, which keeps high levels in range.
pub fn unit_length_signature(path: &AngularPath, depth: usize) -> (TensorSeries, f64) {
    let scale = path.length();
    let mut sig = TensorSeries::identity(depth);
    for seg in path.segments() {
        let (s, c) = libm::sincos(seg.angle);
        let d = seg.duration / scale;
        sig.extend_by_segment([d * c, d * s]);
    }
    (sig, scale)
}

/// Euclidean (Hilbert–Schmidt) norm of a level.
pub fn hs_norm(level: &[f64]) -> f64 {
    // two-pass scaling keeps tiny levels from underflowing
    let max = level.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if max == 0.0 || !max.is_finite() {
        return max;
    }
    let sum: f64 = level.iter().map(|x| (x / max) * (x / max)).sum();
    max * libm::sqrt(sum)
}

fn level_order(level: &[f64]) -> usize {
    level.len().trailing_zeros() as usize
}

/// Sums of coefficients grouped by the number of letters `2` in the word.
fn symmetric_sums(level: &[f64]) -> Vec<f64> {
    let n = level_order(level);
    let mut sums = vec![0.0; n + 1];
    for (idx, &x) in level.iter().enumerate() {
        sums[idx.count_ones() as usize] += x;
    }
    sums
}

fn symmetric_pairing(sums: &[f64], theta: f64) -> f64 {
    let n = sums.len() - 1;
    let (s, c) = libm::sincos(theta);
    // Σ sums[k] c^{n−k} s^k
    let mut cpow = vec![1.0; n + 1];
    for i in 1..=n {
        cpow[i] = cpow[i - 1] * c;
    }
    let mut val = 0.0;
    let mut spow = 1.0;
    for (k, &sk) in sums.iter().enumerate() {
        val += sk * cpow[n - k] * spow;
        spow *= s;
    }
    val
}

fn best_symmetric_angle(level: &[f64], grid: usize) -> (f64, f64) {
    let sums = symmetric_sums(level);
    let mut best = (0.0, 0.0);
    for j in 0..grid {
        let theta = PI * j as f64 / grid as f64;
        let v = symmetric_pairing(&sums, theta).abs();
        if v > best.1 {
            best = (theta, v);
        }
    }
    best
}

/// `max |⟨level, w^{⊗n}⟩|` over unit `w` on a uniform grid of `grid`
/// angles in `[0, π)`.
///
/// The pairing is π-periodic up to sign, so the half-circle suffices. The
/// result is a lower bound for the injective norm and never decreases when
/// the grid is refined by an integer factor.
pub fn rank_one_lower_bound(level: &[f64], grid: usize) -> f64 {
    if level.len() == 1 {
        return level[0].abs();
    }
    best_symmetric_angle(level, grid.max(1)).1
}

/// Contracts `t` (order `m`, modes most significant first) with `u` on its
/// leading mode.
fn contract_leading(t: &[f64], u: [f64; 2]) -> Vec<f64> {
    let half = t.len() / 2;
    (0..half).map(|j| u[0] * t[j] + u[1] * t[j + half]).collect()
}

/// Contracts `t` with `u` on its trailing mode.
fn contract_trailing(t: &[f64], u: [f64; 2]) -> Vec<f64> {
    t.chunks_exact(2).map(|p| u[0] * p[0] + u[1] * p[1]).collect()
}

fn product_pairing(level: &[f64], factors: &[[f64; 2]]) -> f64 {
    let mut t = level.to_vec();
    for &u in factors.iter().rev() {
        t = contract_trailing(&t, u);
    }
    t[0]
}

/// One alternating-maximization sweep over the factors of `u₁⊗…⊗uₙ`.
fn als_sweep(level: &[f64], factors: &mut [[f64; 2]]) -> f64 {
    let n = factors.len();
    // right[i]: level contracted with factors i+1..n, modes 1..=i left open
    let mut right: Vec<Vec<f64>> = vec![Vec::new(); n + 1];
    right[n] = level.to_vec();
    for i in (1..n).rev() {
        right[i] = contract_trailing(&right[i + 1], factors[i]);
    }
    let mut value = 0.0;
    for i in 0..n {
        let mut t = right[i + 1].clone();
        for u in &factors[..i] {
            t = contract_leading(&t, *u);
        }
        let norm = libm::hypot(t[0], t[1]);
        if norm > 0.0 {
            factors[i] = [t[0] / norm, t[1] / norm];
        }
        value = norm;
    }
    value
}

/// Lower bound for the injective norm by maximizing `|⟨level, u₁⊗…⊗uₙ⟩|`
/// over general products of unit vectors.
///
/// Alternating maximization is started from the best symmetric direction
/// and from the two coordinate axes. Every candidate is a unit rank-one
/// functional, so the result is a valid lower bound, and it is never below
/// [`rank_one_lower_bound`] with the same grid.
pub fn rank_one_product_lower_bound(level: &[f64], grid: usize) -> f64 {
    let n = level_order(level);
    if n == 0 {
        return level[0].abs();
    }
    let (theta, sym) = best_symmetric_angle(level, grid.max(1));
    let mut best = sym;
    let starts = [theta, theta + PI / (2.0 * n as f64), 0.0, PI / 2.0];
    for start in starts {
        let (s, c) = libm::sincos(start);
        let mut factors = vec![[c, s]; n];
        let mut last = product_pairing(level, &factors).abs();
        for _ in 0..200 {
            let v = als_sweep(level, &mut factors);
            let stalled = v <= last * (1.0 + 1e-13);
            last = v;
            if stalled {
                break;
            }
        }
        // re-evaluate the final factors so the bound is a realized pairing
        best = best.max(product_pairing(level, &factors).abs());
    }
    best
}

/// `log(Lⁿ/n!)`, the triangle-inequality ceiling for level `n`.
pub fn variation_upper_bound(length: f64, n: usize) -> f64 {
    n as f64 * libm::log(length) - ln_factorial(n)
}

/// Norm proxies for one level, in log space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LevelNorms {
    pub n: usize,
    pub log_hs: f64,
    pub log_rank_one: f64,
    pub log_variation_upper: f64,
    /// `log max |coefficient|` at the original scale.
    pub log_max_abs: f64,
}

impl LevelNorms {
    /// `(n!·‖level‖)^{1/n}` for the Hilbert–Schmidt proxy.
    pub fn normalized_hs(&self) -> f64 {
        normalized(self.n, self.log_hs)
    }

    pub fn normalized_rank_one(&self) -> f64 {
        normalized(self.n, self.log_rank_one)
    }

    pub fn max_abs_coefficient(&self) -> f64 {
        libm::exp(self.log_max_abs)
    }
}

fn normalized(n: usize, log_norm: f64) -> f64 {
    if n == 0 {
        return libm::exp(log_norm);
    }
    libm::exp((ln_factorial(n) + log_norm) / n as f64)
}

fn safe_log(x: f64) -> f64 {
    if x > 0.0 {
        libm::log(x)
    } else {
        f64::NEG_INFINITY
    }
}

/// Log-space norms of levels `1..=depth`, computed on the unit-length
/// rescaling so nothing underflows.
pub fn level_norms(path: &AngularPath, depth: usize, grid: usize) -> Vec<LevelNorms> {
    let (sig, scale) = unit_length_signature(path, depth);
    let ln_scale = libm::log(scale);
    (1..=depth)
        .map(|n| {
            let level = sig.level(n);
            let shift = n as f64 * ln_scale;
            LevelNorms {
                n,
                log_hs: safe_log(hs_norm(level)) + shift,
                log_rank_one: safe_log(rank_one_product_lower_bound(level, grid)) + shift,
                log_variation_upper: variation_upper_bound(scale, n),
                log_max_abs: safe_log(level.iter().fold(0.0, |m: f64, x| m.max(x.abs()))) + shift,
            }
        })
        .collect()
}
