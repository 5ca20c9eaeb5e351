//! Project manifest types and their invariants.
//!
//! All times are seconds from session start. The absolute session start is
//! kept as the ISO-8601 text from the manifest; only ingest converts it.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cards::{Mutation, TopicCard};
use crate::geometry::{is_self_intersecting, Homography, Point};
use crate::segmentation::TopicSegment;

/// The only manifest version this build reads.
pub const MANIFEST_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(from = "[u8; 3]", into = "[u8; 3]")]
pub struct Rgb(pub u8, pub u8, pub u8);

impl From<[u8; 3]> for Rgb {
    fn from([r, g, b]: [u8; 3]) -> Self {
        Self(r, g, b)
    }
}

impl From<Rgb> for [u8; 3] {
    fn from(c: Rgb) -> Self {
        [c.0, c.1, c.2]
    }
}

impl Rgb {
    pub fn hex(&self) -> String {
        format!("#{:02x}{:02x}{:02x}", self.0, self.1, self.2)
    }
}

/// Half-open time interval `[start, end)` in seconds from session start.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeSpan {
    pub start: f64,
    pub end: f64,
}

impl TimeSpan {
    pub const fn new(start: f64, end: f64) -> Self {
        Self { start, end }
    }

    pub fn duration(&self) -> f64 {
        self.end - self.start
    }

    /// Length of the intersection with `other`, zero when disjoint.
    pub fn overlap(&self, other: &TimeSpan) -> f64 {
        (self.end.min(other.end) - self.start.max(other.start)).max(0.0)
    }

    pub fn intersects(&self, other: &TimeSpan) -> bool {
        self.start < other.end && other.start < self.end
    }

    pub fn contains_span(&self, other: &TimeSpan) -> bool {
        other.start >= self.start && other.end <= self.end
    }

    pub fn is_valid_within(&self, duration: f64) -> bool {
        self.start.is_finite()
            && self.end.is_finite()
            && 0.0 <= self.start
            && self.start < self.end
            && self.end <= duration
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Role {
    pub id: String,
    pub label: String,
    pub color: Rgb,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Participant {
    pub id: String,
    pub display_name: String,
    pub role_id: String,
    pub color: Rgb,
}

/// A static area of interest on the working area.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Aoi {
    pub id: String,
    pub label: String,
    pub polygon: Vec<Point>,
    pub color: Rgb,
}

impl Aoi {
    pub fn contains(&self, p: Point) -> bool {
        crate::geometry::point_in_polygon(&self.polygon, p)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SourceKind {
    Transcript,
    Gaze,
    Frames,
    Landmarks,
    Notes,
    Embeddings,
}

impl SourceKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Transcript => "transcript",
            Self::Gaze => "gaze",
            Self::Frames => "frames",
            Self::Landmarks => "landmarks",
            Self::Notes => "notes",
            Self::Embeddings => "embeddings",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceDescriptor {
    pub kind: SourceKind,
    /// Relative to the directory holding the manifest.
    pub path: String,
    pub time_offset: f64,
    /// Owner of a gaze recording.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub participant_id: Option<String>,
    /// Camera-pixel to working-area map for frame sources.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub homography: Option<Homography>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignalKind {
    #[default]
    Attention,
    Activity,
}

impl SignalKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Attention => "attention",
            Self::Activity => "activity",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SegmentationConfig {
    pub penalty_beta: f64,
    pub bin_width: f64,
    pub gap_threshold: f64,
    pub similarity_threshold: f64,
    pub min_segment_bins: usize,
    pub signal_kind: SignalKind,
}

impl Default for SegmentationConfig {
    fn default() -> Self {
        Self {
            penalty_beta: 10.0,
            bin_width: 1.0,
            gap_threshold: 1.5,
            similarity_threshold: 0.5,
            min_segment_bins: 2,
            signal_kind: SignalKind::Attention,
        }
    }
}

impl SegmentationConfig {
    pub fn validate(&self) -> Result<(), InvariantError> {
        let bad = |message: &str| Err(InvariantError::new("segmentation_config", message));
        if !(self.penalty_beta > 0.0 && self.penalty_beta.is_finite()) {
            return bad("penalty_beta must be a positive finite number");
        }
        if !(self.bin_width > 0.0 && self.bin_width.is_finite()) {
            return bad("bin_width must be positive");
        }
        if !(self.gap_threshold > 0.0 && self.gap_threshold.is_finite()) {
            return bad("gap_threshold must be positive");
        }
        if !(-1.0..=1.0).contains(&self.similarity_threshold) {
            return bad("similarity_threshold must lie in [-1, 1]");
        }
        if self.min_segment_bins == 0 {
            return bad("min_segment_bins must be at least 1");
        }
        Ok(())
    }
}

/// Gaze, heatmap and background-model parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AnalysisConfig {
    /// I-DT dispersion limit, `(max x − min x) + (max y − min y)` in normalized units.
    pub dispersion_threshold: f64,
    pub min_fixation_duration: f64,
    pub heatmap_width: u32,
    pub heatmap_height: u32,
    /// Gaussian kernel width in grid cells.
    pub heatmap_sigma: f64,
    pub background_alpha: f64,
    /// Foreground threshold in 8-bit intensity units.
    pub diff_threshold: f64,
    pub landmark_tolerance: f64,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self {
            dispersion_threshold: 0.05,
            min_fixation_duration: 0.1,
            heatmap_width: 64,
            heatmap_height: 48,
            heatmap_sigma: 2.0,
            background_alpha: 0.05,
            diff_threshold: 25.0,
            landmark_tolerance: 0.2,
        }
    }
}

impl AnalysisConfig {
    pub fn validate(&self) -> Result<(), InvariantError> {
        let bad = |message: &str| Err(InvariantError::new("analysis", message));
        if !(self.dispersion_threshold > 0.0) || !(self.min_fixation_duration > 0.0) {
            return bad("fixation thresholds must be positive");
        }
        if self.heatmap_width == 0 || self.heatmap_height == 0 || !(self.heatmap_sigma > 0.0) {
            return bad("heatmap grid and sigma must be positive");
        }
        if !(self.background_alpha > 0.0 && self.background_alpha < 1.0) {
            return bad("background_alpha must lie in (0, 1)");
        }
        if !(self.diff_threshold >= 0.0) || !(self.landmark_tolerance >= 0.0) {
            return bad("diff_threshold and landmark_tolerance must be non-negative");
        }
        Ok(())
    }
}

/// Topic segments, their cards and the log of authoring mutations.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AuthoringState {
    pub segments: Vec<TopicSegment>,
    pub cards: Vec<TopicCard>,
    pub log: Vec<Mutation>,
}

impl AuthoringState {
    /// Monotone version: the number of applied mutations.
    pub fn version(&self) -> u64 {
        self.log.len() as u64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WorkshopProject {
    pub version: u32,
    pub id: String,
    pub title: String,
    /// ISO-8601 wall-clock start of the session.
    pub session_start: String,
    pub duration: f64,
    /// Physical width / height of the working area; metadata only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub aspect_ratio: Option<f64>,
    pub participants: Vec<Participant>,
    pub roles: Vec<Role>,
    pub aois: Vec<Aoi>,
    pub sources: Vec<SourceDescriptor>,
    #[serde(default)]
    pub segmentation_config: SegmentationConfig,
    #[serde(default)]
    pub analysis: AnalysisConfig,
    #[serde(default)]
    pub authoring: AuthoringState,
}

/// A violated type invariant, naming the offending entity.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{entity}: {message}")]
pub struct InvariantError {
    pub entity: String,
    pub message: String,
}

impl InvariantError {
    pub fn new(entity: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            entity: entity.into(),
            message: message.into(),
        }
    }
}

fn check_unique<'a>(kind: &str, ids: impl IntoIterator<Item = &'a str>) -> Result<(), InvariantError> {
    let mut seen = BTreeSet::new();
    for id in ids {
        if id.is_empty() {
            return Err(InvariantError::new(kind, "empty id"));
        }
        if !seen.insert(id) {
            return Err(InvariantError::new(format!("{kind} '{id}'"), "duplicate id"));
        }
    }
    Ok(())
}

impl WorkshopProject {
    pub fn session_span(&self) -> TimeSpan {
        TimeSpan::new(0.0, self.duration)
    }

    pub fn role_of(&self, participant_id: &str) -> Option<&str> {
        self.participants
            .iter()
            .find(|p| p.id == participant_id)
            .map(|p| p.role_id.as_str())
    }

    pub fn sources_of(&self, kind: SourceKind) -> impl Iterator<Item = &SourceDescriptor> {
        self.sources.iter().filter(move |s| s.kind == kind)
    }

    /// Checks every type invariant; the first violation is reported.
    pub fn validate(&self) -> Result<(), InvariantError> {
        if self.version != MANIFEST_VERSION {
            return Err(InvariantError::new(
                "version",
                format!(
                    "unsupported manifest version {} (expected {MANIFEST_VERSION})",
                    self.version
                ),
            ));
        }
        if !(self.duration > 0.0 && self.duration.is_finite()) {
            return Err(InvariantError::new(
                "duration",
                "must be a positive finite number of seconds",
            ));
        }
        if let Some(ratio) = self.aspect_ratio {
            if !(ratio > 0.0 && ratio.is_finite()) {
                return Err(InvariantError::new("aspect_ratio", "must be positive"));
            }
        }
        check_unique("role", self.roles.iter().map(|r| r.id.as_str()))?;
        for role in &self.roles {
            if role.label.trim().is_empty() {
                return Err(InvariantError::new(format!("role '{}'", role.id), "empty label"));
            }
        }
        check_unique("participant", self.participants.iter().map(|p| p.id.as_str()))?;
        for p in &self.participants {
            if !self.roles.iter().any(|r| r.id == p.role_id) {
                return Err(InvariantError::new(
                    format!("participant '{}'", p.id),
                    format!("unknown role '{}'", p.role_id),
                ));
            }
        }
        check_unique("aoi", self.aois.iter().map(|a| a.id.as_str()))?;
        for aoi in &self.aois {
            validate_aoi(aoi)?;
        }
        for (i, src) in self.sources.iter().enumerate() {
            let entity = || format!("sources[{i}] ({})", src.path);
            if !src.time_offset.is_finite() {
                return Err(InvariantError::new(entity(), "time_offset must be finite"));
            }
            if src.path.is_empty() {
                return Err(InvariantError::new(entity(), "empty path"));
            }
            if src.kind == SourceKind::Gaze {
                match &src.participant_id {
                    Some(pid) if self.participants.iter().any(|p| &p.id == pid) => {}
                    Some(pid) => return Err(InvariantError::new(entity(), format!("unknown participant '{pid}'"))),
                    None => return Err(InvariantError::new(entity(), "gaze source needs participant_id")),
                }
            }
        }
        self.segmentation_config.validate()?;
        self.analysis.validate()?;
        self.validate_authoring()
    }

    fn validate_authoring(&self) -> Result<(), InvariantError> {
        let state = &self.authoring;
        check_unique("segment", state.segments.iter().map(|s| s.id.as_str()))?;
        let mut cursor = 0.0;
        for seg in &state.segments {
            let entity = || format!("segment '{}'", seg.id);
            if !seg.span.is_valid_within(self.duration) {
                return Err(InvariantError::new(entity(), "span outside the session"));
            }
            if seg.span.start != cursor {
                return Err(InvariantError::new(
                    entity(),
                    "segments must tile the session without gaps",
                ));
            }
            cursor = seg.span.end;
        }
        if !state.segments.is_empty() && cursor != self.duration {
            return Err(InvariantError::new(
                "authoring.segments",
                "segments do not reach the session end",
            ));
        }
        for card in &state.cards {
            let Some(seg) = state.segments.iter().find(|s| s.id == card.segment_id) else {
                return Err(InvariantError::new(
                    format!("card '{}'", card.segment_id),
                    "segment id does not resolve",
                ));
            };
            for q in &card.quotes {
                if !q.rendered.starts_with(q.utterance_id.as_str()) {
                    return Err(InvariantError::new(
                        format!("card '{}'", seg.id),
                        format!("quote for '{}' lacks its identifier prefix", q.utterance_id),
                    ));
                }
            }
            for shot in &card.screenshots {
                if !shot.crop.is_non_empty() {
                    return Err(InvariantError::new(
                        format!("card '{}'", seg.id),
                        "empty screenshot crop",
                    ));
                }
            }
        }
        Ok(())
    }
}

fn validate_aoi(aoi: &Aoi) -> Result<(), InvariantError> {
    let entity = || format!("aoi '{}'", aoi.id);
    if aoi.polygon.len() < 3 {
        return Err(InvariantError::new(entity(), "polygon needs at least 3 vertices"));
    }
    for v in &aoi.polygon {
        if !(v.is_finite() && (0.0..=1.0).contains(&v.x) && (0.0..=1.0).contains(&v.y)) {
            return Err(InvariantError::new(
                entity(),
                format!("vertex ({}, {}) outside the unit square", v.x, v.y),
            ));
        }
    }
    if is_self_intersecting(&aoi.polygon) {
        return Err(InvariantError::new(entity(), "polygon is self-intersecting"));
    }
    if aoi.label.is_empty() {
        return Err(InvariantError::new(entity(), "empty label".to_string()));
    }
    Ok(())
}
