//! Synchronized per-modality streams, already on the session time base.

use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::geometry::Point;
use crate::model::TimeSpan;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Utterance {
    pub id: String,
    pub speaker_id: String,
    pub span: TimeSpan,
    pub text: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GazeSample {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub valid: bool,
}

impl GazeSample {
    pub fn point(&self) -> Point {
        Point::new(self.x, self.y)
    }
}

/// Gaze samples of one participant, sorted by time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GazeTrack {
    pub participant_id: String,
    pub samples: Vec<GazeSample>,
}

/// Hand-landmark positions detected in one video frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LandmarkFrame {
    pub t: f64,
    pub points: Vec<Point>,
}

/// 8-bit grayscale frame, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayFrame {
    pub width: u32,
    pub height: u32,
    pub pixels: Vec<u8>,
}

impl GrayFrame {
    pub fn new(width: u32, height: u32, pixels: Vec<u8>) -> Option<Self> {
        (pixels.len() == width as usize * height as usize).then_some(Self { width, height, pixels })
    }

    pub fn filled(width: u32, height: u32, value: u8) -> Self {
        Self {
            width,
            height,
            pixels: alloc::vec![value; width as usize * height as usize],
        }
    }

    pub fn len(&self) -> usize {
        self.pixels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pixels.is_empty()
    }
}

/// A grayscale frame with its session timestamp.
#[derive(Debug, Clone, PartialEq)]
pub struct TimedFrame {
    pub t: f64,
    pub frame: GrayFrame,
}

/// One stored copy of an author's note document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoteSnapshot {
    pub author: String,
    pub t: f64,
    pub text: String,
}

/// Utterances whose span overlaps `span` (positive-length overlap).
pub fn utterances_in<'a>(utterances: &'a [Utterance], span: &'a TimeSpan) -> impl Iterator<Item = &'a Utterance> + 'a {
    utterances.iter().filter(move |u| u.span.intersects(span))
}
