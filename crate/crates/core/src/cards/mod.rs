//! Topic cards: statistics, titles, authoring, filtering and compression.

mod authoring;
mod stats;
mod title;

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use authoring::{add_quote, apply_mutation, carry_over, fresh_cards, render_quote, Mutation};
pub use stats::{card_statistics, donut_shares};
pub use title::{fallback_title, generate_title, TitleOutcome, TitleProvider, TitleSource, UNTITLED};

use crate::model::{SignalKind, TimeSpan};
use crate::segmentation::TopicSegment;
use crate::stream::Utterance;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CardError {
    #[error("unknown card '{0}'")]
    UnknownCard(String),
    #[error("unknown utterance '{0}'")]
    UnknownUtterance(String),
    #[error("utterance '{utterance}' does not start inside segment '{segment}'")]
    UtteranceOutsideSegment { utterance: String, segment: String },
    #[error("segment '{0}' has zero duration")]
    ZeroDuration(String),
    #[error("empty keyword")]
    EmptyKeyword,
    #[error("no keywords given")]
    NoKeywords,
    #[error("{0} must not be empty")]
    Empty(&'static str),
    #[error("crop {x},{y} {width}x{height} exceeds the {image_width}x{image_height} image")]
    CropOutOfBounds {
        x: u32,
        y: u32,
        width: u32,
        height: u32,
        image_width: u32,
        image_height: u32,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Quote {
    pub utterance_id: String,
    pub rendered: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CropRect {
    pub x: u32,
    pub y: u32,
    pub width: u32,
    pub height: u32,
}

impl CropRect {
    pub fn is_non_empty(&self) -> bool {
        self.width > 0 && self.height > 0
    }

    pub fn fits(&self, image_width: u32, image_height: u32) -> bool {
        self.is_non_empty()
            && u64::from(self.x) + u64::from(self.width) <= u64::from(image_width)
            && u64::from(self.y) + u64::from(self.height) <= u64::from(image_height)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HeatmapOverlay {
    pub kind: SignalKind,
    pub span: TimeSpan,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Screenshot {
    /// Relative to the project directory.
    pub image_path: String,
    /// `[width, height]` of the source image in pixels.
    pub image_size: [u32; 2],
    pub crop: CropRect,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub heatmap_overlay: Option<HeatmapOverlay>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CardStats {
    /// Speaking seconds per role divided by segment duration; may exceed 1 with overlapping speech.
    pub speaking_by_role: BTreeMap<String, f64>,
    pub attention_by_aoi: BTreeMap<String, f64>,
    pub activity_by_aoi: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TopicCard {
    pub segment_id: String,
    pub title: String,
    #[serde(default)]
    pub title_edited: bool,
    #[serde(default)]
    pub quotes: Vec<Quote>,
    #[serde(default)]
    pub notes: Vec<String>,
    #[serde(default)]
    pub screenshots: Vec<Screenshot>,
    #[serde(default)]
    pub stats: CardStats,
    #[serde(default)]
    pub marked: bool,
}

impl TopicCard {
    pub fn for_segment(segment: &TopicSegment) -> Self {
        Self {
            segment_id: segment.id.clone(),
            title: segment.title.clone(),
            title_edited: false,
            quotes: Vec::new(),
            notes: Vec::new(),
            screenshots: Vec::new(),
            stats: CardStats::default(),
            marked: segment.marked,
        }
    }
}

/// Ids of segments whose overlapping utterances contain any keyword,
/// compared as case-insensitive substrings.
pub fn keyword_filter(
    segments: &[TopicSegment],
    utterances: &[Utterance],
    keywords: &[&str],
) -> Result<Vec<String>, CardError> {
    if keywords.is_empty() {
        return Err(CardError::NoKeywords);
    }
    let needles: Vec<String> = keywords.iter().map(|k| k.trim().to_lowercase()).collect();
    if needles.iter().any(String::is_empty) {
        return Err(CardError::EmptyKeyword);
    }
    let lowered: Vec<(TimeSpan, String)> = utterances.iter().map(|u| (u.span, u.text.to_lowercase())).collect();
    Ok(segments
        .iter()
        .filter(|seg| {
            lowered
                .iter()
                .filter(|(span, _)| span.intersects(&seg.span))
                .any(|(_, text)| needles.iter().any(|n| text.contains(n.as_str())))
        })
        .map(|seg| seg.id.clone())
        .collect())
}

/// Marked segments in temporal order.
pub fn compress_view(segments: &[TopicSegment]) -> Vec<&TopicSegment> {
    let mut marked: Vec<&TopicSegment> = segments.iter().filter(|s| s.marked).collect();
    marked.sort_by(|a, b| a.span.start.total_cmp(&b.span.start));
    marked
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::segmentation::SegmentOrigin;
    use alloc::format;
    use alloc::vec;

    pub(crate) fn seg(i: usize, start: f64, end: f64) -> TopicSegment {
        TopicSegment {
            id: format!("seg-{i:03}"),
            span: TimeSpan::new(start, end),
            title: format!("Title {i}"),
            origin: SegmentOrigin::Initial,
            marked: false,
        }
    }

    pub(crate) fn utt(id: &str, speaker: &str, start: f64, end: f64, text: &str) -> Utterance {
        Utterance {
            id: id.into(),
            speaker_id: speaker.into(),
            span: TimeSpan::new(start, end),
            text: text.into(),
        }
    }

    #[test]
    fn substring_match_is_case_insensitive() {
        let segs = vec![seg(1, 0.0, 10.0), seg(2, 10.0, 20.0)];
        let utts = vec![
            utt("u1", "a", 1.0, 2.0, "We discussed Segmentation today"),
            utt("u2", "a", 12.0, 13.0, "Nothing relevant"),
        ];
        assert_eq!(keyword_filter(&segs, &utts, &["segment"]).unwrap(), ["seg-001"]);
        assert!(keyword_filter(&segs, &utts, &["gaze"]).unwrap().is_empty());
        assert_eq!(
            keyword_filter(&segs, &utts, &[""]).unwrap_err(),
            CardError::EmptyKeyword
        );
        assert_eq!(keyword_filter(&segs, &utts, &[]).unwrap_err(), CardError::NoKeywords);
    }

    #[test]
    fn straddling_utterance_matches_both_segments() {
        let segs = vec![seg(1, 0.0, 10.0), seg(2, 10.0, 20.0)];
        let utts = vec![utt("u1", "a", 9.0, 11.0, "gaze")];
        assert_eq!(keyword_filter(&segs, &utts, &["GAZE"]).unwrap(), ["seg-001", "seg-002"]);
    }

    #[test]
    fn compression_keeps_marked_in_order() {
        let mut segs: Vec<_> = (1..=6).map(|i| seg(i, i as f64, i as f64 + 1.0)).collect();
        segs[4].marked = true;
        segs[1].marked = true;
        let ids: Vec<_> = compress_view(&segs).iter().map(|s| s.id.as_str()).collect();
        assert_eq!(ids, ["seg-002", "seg-005"]);
        segs.iter_mut().for_each(|s| s.marked = false);
        assert!(compress_view(&segs).is_empty());
    }

    #[test]
    fn crop_bounds() {
        let c = CropRect {
            x: 10,
            y: 10,
            width: 20,
            height: 5,
        };
        assert!(c.fits(30, 15));
        assert!(!c.fits(29, 15));
        assert!(!CropRect {
            x: 0,
            y: 0,
            width: 0,
            height: 3
        }
        .fits(10, 10));
    }
}
