use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::chunk::DialogueChunk;
use super::embed::cosine;
use super::pelt::ChangePointResult;
use super::SegmentationError;

/// Initial change points merged with dialogue-driven ones.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RefinedChangepoints {
    /// Sorted, strictly increasing, each in `1..bins`.
    pub points: Vec<usize>,
    /// Parallel to `points`: true when inserted by refinement.
    pub refined: Vec<bool>,
    pub bins: usize,
}

/// Inserts a change point between adjacent chunks of the same initial segment
/// whose embeddings have cosine similarity below `threshold`.
///
/// The new point is the bin containing the later chunk's start (`bin_of`),
/// kept only when strictly inside its initial segment and not already present.
pub fn refine_changepoints(
    initial: &ChangePointResult,
    chunks: &[DialogueChunk],
    threshold: f64,
    bin_of: impl Fn(f64) -> usize,
) -> Result<RefinedChangepoints, SegmentationError> {
    let bounds = initial.boundaries();
    let mut added: Vec<usize> = Vec::new();
    for pair in chunks.windows(2) {
        let (a, b) = (&pair[0], &pair[1]);
        if a.segment != b.segment {
            continue;
        }
        let ea = a
            .embedding
            .as_deref()
            .ok_or_else(|| SegmentationError::MissingEmbedding(a.id.clone()))?;
        let eb = b
            .embedding
            .as_deref()
            .ok_or_else(|| SegmentationError::MissingEmbedding(b.id.clone()))?;
        if ea.len() != eb.len() {
            return Err(SegmentationError::DimensionMismatch {
                chunk_id: b.id.clone(),
                expected: ea.len(),
                got: eb.len(),
            });
        }
        let sim = cosine(ea, eb).ok_or_else(|| {
            let zero = if ea.iter().all(|x| *x == 0.0) { a } else { b };
            SegmentationError::ZeroNorm(zero.id.clone())
        })?;
        if sim < threshold {
            let lo = bounds[a.segment];
            let hi = bounds[a.segment + 1];
            let point = bin_of(b.span.start);
            if lo < point && point < hi && !added.contains(&point) {
                added.push(point);
            }
        }
    }
    let mut merged: Vec<(usize, bool)> = initial
        .changepoints
        .iter()
        .map(|c| (*c, false))
        .chain(added.into_iter().map(|c| (c, true)))
        .collect();
    merged.sort_unstable();
    merged.dedup_by_key(|(c, _)| *c);
    Ok(RefinedChangepoints {
        points: merged.iter().map(|(c, _)| *c).collect(),
        refined: merged.iter().map(|(_, r)| *r).collect(),
        bins: initial.bins,
    })
}
