use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::model::TimeSpan;
use crate::stream::Utterance;

/// A run of utterances without a pause longer than the gap threshold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DialogueChunk {
    pub id: String,
    /// Index of the initial segment the chunk belongs to.
    pub segment: usize,
    pub span: TimeSpan,
    pub utterance_ids: Vec<String>,
    pub text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub embedding: Option<Vec<f64>>,
}

/// Splits utterances (sorted by start) into chunks wherever the pause
/// `start_k − end_{k−1}` exceeds `gap_threshold`.
pub fn chunk_transcript(utterances: &[&Utterance], gap_threshold: f64, segment: usize) -> Vec<DialogueChunk> {
    let mut chunks: Vec<DialogueChunk> = Vec::new();
    let mut prev_end: Option<f64> = None;
    for u in utterances {
        let new_chunk = match prev_end {
            None => true,
            Some(end) => u.span.start - end > gap_threshold,
        };
        if new_chunk {
            chunks.push(DialogueChunk {
                id: format!("c{:03}-{:03}", segment, chunks.len()),
                segment,
                span: u.span,
                utterance_ids: alloc::vec![u.id.clone()],
                text: u.text.trim().into(),
                embedding: None,
            });
        } else if let Some(chunk) = chunks.last_mut() {
            chunk.span.end = chunk.span.end.max(u.span.end);
            chunk.utterance_ids.push(u.id.clone());
            chunk.text.push(' ');
            chunk.text.push_str(u.text.trim());
        }
        prev_end = Some(u.span.end);
    }
    chunks
}

/// Chunks the transcript separately inside each initial segment.
///
/// `boundaries` are segment boundary times including session start and end;
/// an utterance belongs to the segment containing its start time.
pub fn chunk_by_segments(utterances: &[Utterance], boundaries: &[f64], gap_threshold: f64) -> Vec<DialogueChunk> {
    let mut out = Vec::new();
    for (seg, w) in boundaries.windows(2).enumerate() {
        let last = seg + 2 == boundaries.len();
        let members: Vec<&Utterance> = utterances
            .iter()
            .filter(|u| u.span.start >= w[0] && (u.span.start < w[1] || (last && u.span.start <= w[1])))
            .collect();
        out.extend(chunk_transcript(&members, gap_threshold, seg));
    }
    out
}
