//! Two-step topic segmentation.
//!
//! PELT with an L2 cost finds change points in the binned attention or
//! activity series. Inside each resulting segment the transcript is split into
//! dialogue chunks at long pauses, each chunk is embedded, and a further change
//! point is inserted wherever consecutive chunks are dissimilar.

mod chunk;
mod cost;
mod embed;
mod pelt;
mod refine;

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use chunk::{chunk_by_segments, chunk_transcript, DialogueChunk};
pub use cost::SegmentCost;
pub use embed::{cosine, embed_chunks, EmbeddingProvider, HashedBagOfWords, ProviderError};
pub use pelt::{pelt_changepoints, ChangePointResult};
pub use refine::{refine_changepoints, RefinedChangepoints};

use crate::model::{SegmentationConfig, TimeSpan};
use crate::series::MultivariateSeries;
use crate::stream::Utterance;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SegmentationError {
    #[error("series has no bins")]
    EmptySeries,
    #[error("penalty must be positive and finite, got {0}")]
    InvalidPenalty(f64),
    #[error("chunk '{0}' has no embedding")]
    MissingEmbedding(String),
    #[error("chunk '{0}' has a zero-norm embedding")]
    ZeroNorm(String),
    #[error("chunk '{chunk_id}': embedding has {got} dimensions, expected {expected}")]
    DimensionMismatch {
        chunk_id: String,
        expected: usize,
        got: usize,
    },
    #[error("embedding provider failed on chunk '{chunk_id}': {message}")]
    Provider { chunk_id: String, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SegmentOrigin {
    Initial,
    Refined,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TopicSegment {
    pub id: String,
    pub span: TimeSpan,
    pub title: String,
    pub origin: SegmentOrigin,
    #[serde(default)]
    pub marked: bool,
}

/// Segments between consecutive change points, tiling the series span.
pub fn build_segments(refined: &RefinedChangepoints, series: &MultivariateSeries) -> Vec<TopicSegment> {
    let mut starts: Vec<(usize, SegmentOrigin)> = alloc::vec![(0, SegmentOrigin::Initial)];
    for (c, r) in refined.points.iter().zip(&refined.refined) {
        starts.push((
            *c,
            if *r {
                SegmentOrigin::Refined
            } else {
                SegmentOrigin::Initial
            },
        ));
    }
    starts
        .iter()
        .enumerate()
        .map(|(i, (c, origin))| {
            let end = starts.get(i + 1).map_or(series.bins(), |s| s.0);
            TopicSegment {
                id: format!("seg-{:03}", i + 1),
                span: TimeSpan::new(series.boundary_time(*c), series.boundary_time(end)),
                title: String::new(),
                origin: *origin,
                marked: false,
            }
        })
        .collect()
}

/// Everything the segmentation pipeline produced, for export and inspection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentationOutcome {
    pub initial: ChangePointResult,
    pub chunks: Vec<DialogueChunk>,
    pub refined: RefinedChangepoints,
    pub segments: Vec<TopicSegment>,
}

pub fn segment_session(
    series: &MultivariateSeries,
    utterances: &[Utterance],
    config: &SegmentationConfig,
    provider: &dyn EmbeddingProvider,
) -> Result<SegmentationOutcome, SegmentationError> {
    let initial = pelt_changepoints(&series.values, config.penalty_beta, config.min_segment_bins)?;
    let times: Vec<f64> = initial.boundaries().iter().map(|b| series.boundary_time(*b)).collect();
    let mut chunks = chunk_by_segments(utterances, &times, config.gap_threshold);
    embed_chunks(&mut chunks, provider)?;
    let refined = refine_changepoints(&initial, &chunks, config.similarity_threshold, |t| series.bin_of(t))?;
    let segments = build_segments(&refined, series);
    Ok(SegmentationOutcome {
        initial,
        chunks,
        refined,
        segments,
    })
}
