//! Authoring mutations. Each one maps a snapshot to a new snapshot and is
//! appended to the log, so replaying the log from fresh cards reproduces the
//! current state.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::{CardError, Quote, Screenshot, TopicCard};
use crate::model::AuthoringState;
use crate::segmentation::TopicSegment;
use crate::stream::Utterance;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case", deny_unknown_fields)]
pub enum Mutation {
    SetTitle { card_id: String, title: String },
    AddQuote { card_id: String, utterance_id: String },
    AddNote { card_id: String, text: String },
    SetMarked { card_id: String, marked: bool },
    AddScreenshot { card_id: String, screenshot: Screenshot },
}

impl Mutation {
    pub fn card_id(&self) -> &str {
        match self {
            Self::SetTitle { card_id, .. }
            | Self::AddQuote { card_id, .. }
            | Self::AddNote { card_id, .. }
            | Self::SetMarked { card_id, .. }
            | Self::AddScreenshot { card_id, .. } => card_id,
        }
    }

    fn with_card_id(&self, id: &str) -> Self {
        let mut m = self.clone();
        match &mut m {
            Self::SetTitle { card_id, .. }
            | Self::AddQuote { card_id, .. }
            | Self::AddNote { card_id, .. }
            | Self::SetMarked { card_id, .. }
            | Self::AddScreenshot { card_id, .. } => *card_id = id.into(),
        }
        m
    }
}

/// Quote text: the utterance id followed by the verbatim text in underscores.
pub fn render_quote(utterance: &Utterance) -> String {
    format!("{}: _{}_", utterance.id, utterance.text.trim())
}

/// Appends a quote for `utterance` unless the card already has one.
pub fn add_quote(card: &TopicCard, segment: &TopicSegment, utterance: &Utterance) -> Result<TopicCard, CardError> {
    let start = utterance.span.start;
    if !(start >= segment.span.start && start < segment.span.end) {
        return Err(CardError::UtteranceOutsideSegment {
            utterance: utterance.id.clone(),
            segment: segment.id.clone(),
        });
    }
    let mut card = card.clone();
    if !card.quotes.iter().any(|q| q.utterance_id == utterance.id) {
        card.quotes.push(Quote {
            utterance_id: utterance.id.clone(),
            rendered: render_quote(utterance),
        });
    }
    Ok(card)
}

/// One card per segment, carrying the segment's title and mark.
pub fn fresh_cards(segments: &[TopicSegment]) -> Vec<TopicCard> {
    segments.iter().map(TopicCard::for_segment).collect()
}

fn apply_in_place(state: &mut AuthoringState, mutation: &Mutation, utterances: &[Utterance]) -> Result<(), CardError> {
    let card_id = mutation.card_id();
    let idx = state
        .cards
        .iter()
        .position(|c| c.segment_id == card_id)
        .ok_or_else(|| CardError::UnknownCard(card_id.into()))?;
    let seg_idx = state
        .segments
        .iter()
        .position(|s| s.id == card_id)
        .ok_or_else(|| CardError::UnknownCard(card_id.into()))?;
    match mutation {
        Mutation::SetTitle { title, .. } => {
            let title = title.trim();
            if title.is_empty() {
                return Err(CardError::Empty("title"));
            }
            state.cards[idx].title = title.into();
            state.cards[idx].title_edited = true;
        }
        Mutation::AddQuote { utterance_id, .. } => {
            let u = utterances
                .iter()
                .find(|u| &u.id == utterance_id)
                .ok_or_else(|| CardError::UnknownUtterance(utterance_id.clone()))?;
            state.cards[idx] = add_quote(&state.cards[idx], &state.segments[seg_idx], u)?;
        }
        Mutation::AddNote { text, .. } => {
            if text.trim().is_empty() {
                return Err(CardError::Empty("note"));
            }
            state.cards[idx].notes.push(text.clone());
        }
        Mutation::SetMarked { marked, .. } => {
            state.cards[idx].marked = *marked;
            state.segments[seg_idx].marked = *marked;
        }
        Mutation::AddScreenshot { screenshot, .. } => {
            let [w, h] = screenshot.image_size;
            let c = screenshot.crop;
            if !c.fits(w, h) {
                return Err(CardError::CropOutOfBounds {
                    x: c.x,
                    y: c.y,
                    width: c.width,
                    height: c.height,
                    image_width: w,
                    image_height: h,
                });
            }
            if screenshot.image_path.is_empty() {
                return Err(CardError::Empty("image_path"));
            }
            state.cards[idx].screenshots.push(screenshot.clone());
        }
    }
    Ok(())
}

/// New snapshot with `mutation` applied and logged; `state` is untouched on error.
pub fn apply_mutation(
    state: &AuthoringState,
    mutation: Mutation,
    utterances: &[Utterance],
) -> Result<AuthoringState, CardError> {
    let mut next = state.clone();
    apply_in_place(&mut next, &mutation, utterances)?;
    next.log.push(mutation);
    Ok(next)
}

impl AuthoringState {
    /// Authoring state for freshly computed segments with an empty log.
    pub fn from_segments(segments: Vec<TopicSegment>) -> Self {
        Self {
            cards: fresh_cards(&segments),
            segments,
            log: Vec::new(),
        }
    }

    /// Rebuilds the state from fresh cards by replaying the log.
    /// Card statistics are derived data and are copied over unchanged.
    pub fn replay(&self, utterances: &[Utterance]) -> Result<AuthoringState, CardError> {
        let mut segments = self.segments.clone();
        for s in &mut segments {
            s.marked = false;
        }
        let mut state = AuthoringState::from_segments(segments);
        for (card, current) in state.cards.iter_mut().zip(&self.cards) {
            card.stats = current.stats.clone();
        }
        for m in &self.log {
            state = apply_mutation(&state, m.clone(), utterances)?;
        }
        Ok(state)
    }
}

/// Authoring state for re-computed segments. Mutations aimed at an old segment
/// whose span reappears unchanged are replayed onto the matching new card;
/// the rest are dropped.
pub fn carry_over(old: &AuthoringState, segments: Vec<TopicSegment>, utterances: &[Utterance]) -> AuthoringState {
    let mut state = AuthoringState::from_segments(segments);
    for m in &old.log {
        let Some(old_seg) = old.segments.iter().find(|s| s.id == m.card_id()) else {
            continue;
        };
        let Some(new_seg) = state.segments.iter().find(|s| s.span == old_seg.span) else {
            continue;
        };
        let translated = m.with_card_id(&new_seg.id.clone());
        if let Ok(next) = apply_mutation(&state, translated, utterances) {
            state = next;
        }
    }
    state
}
