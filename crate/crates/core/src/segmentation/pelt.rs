//! Penalized change-point search with PELT pruning.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::cost::SegmentCost;
use super::SegmentationError;

/// Optimal change points and the penalized cost they achieve.
///
/// A change point `c` (1 ≤ c < T) ends a segment after bin `c`, so the next
/// segment starts at zero-based bin `c`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChangePointResult {
    pub changepoints: Vec<usize>,
    pub objective: f64,
    pub bins: usize,
}

impl ChangePointResult {
    /// Boundaries including 0 and `T`.
    pub fn boundaries(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.changepoints.len() + 2);
        out.push(0);
        out.extend_from_slice(&self.changepoints);
        out.push(self.bins);
        out
    }
}

struct Candidate {
    tau: usize,
    pruned_at: Option<usize>,
}

/// Exact minimizer of `Σ cost(segment) + beta · #changepoints` over segmentations
/// whose segments all span at least `min_segment_bins` bins.
///
/// Runs the optimal-partitioning recursion `F(t) = min_τ F(τ) + cost(τ+1, t) + β`
/// with `F(0) = −β`, discarding a candidate `τ` once
/// `F(τ) + cost(τ+1, t) > F(t)`. With a minimum segment length a discarded
/// candidate is still offered to the next `min_segment_bins − 1` steps, since
/// `t` itself is not yet an admissible split for them.
pub fn pelt_changepoints<R: AsRef<[f64]>>(
    rows: &[R],
    beta: f64,
    min_segment_bins: usize,
) -> Result<ChangePointResult, SegmentationError> {
    let bins = rows.len();
    if bins == 0 {
        return Err(SegmentationError::EmptySeries);
    }
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(SegmentationError::InvalidPenalty(beta));
    }
    let min_len = min_segment_bins.max(1);
    let cost = SegmentCost::new(rows);
    if bins < 2 * min_len {
        return Ok(ChangePointResult {
            changepoints: Vec::new(),
            objective: cost.cost(1, bins),
            bins,
        });
    }

    let mut best = alloc::vec![f64::INFINITY; bins + 1];
    let mut prev = alloc::vec![0_usize; bins + 1];
    best[0] = -beta;
    let mut candidates = alloc::vec![Candidate {
        tau: 0,
        pruned_at: None
    }];
    let mut trial = Vec::new();

    for t in min_len..=bins {
        candidates.retain(|c| c.pruned_at.is_none_or(|p| t < p + min_len));
        trial.clear();
        let mut f_t = f64::INFINITY;
        let mut arg = 0;
        for (idx, c) in candidates.iter().enumerate() {
            if t - c.tau < min_len || !best[c.tau].is_finite() {
                continue;
            }
            let partial = best[c.tau] + cost.cost(c.tau + 1, t);
            let value = partial + beta;
            trial.push((idx, partial));
            if value < f_t {
                f_t = value;
                arg = c.tau;
            }
        }
        best[t] = f_t;
        prev[t] = arg;
        for &(idx, partial) in &trial {
            if partial > f_t && candidates[idx].pruned_at.is_none() {
                candidates[idx].pruned_at = Some(t);
            }
        }
        if t + min_len <= bins {
            candidates.push(Candidate {
                tau: t,
                pruned_at: None,
            });
        }
    }

    let mut changepoints = Vec::new();
    let mut t = bins;
    while t > 0 {
        let tau = prev[t];
        if tau > 0 {
            changepoints.push(tau);
        }
        t = tau;
    }
    changepoints.reverse();
    Ok(ChangePointResult {
        changepoints,
        objective: best[bins],
        bins,
    })
}
