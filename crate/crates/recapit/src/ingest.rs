//! Parsers for raw source files. Every parser applies its source's time offset
//! so that all returned times are seconds from session start.

use std::collections::{BTreeMap, HashSet};
use std::fs;
use std::path::{Path, PathBuf};

use chrono::{DateTime, NaiveDateTime, Utc};
use recapit_core::model::{Participant, TimeSpan};
use recapit_core::stream::{GazeSample, GazeTrack, GrayFrame, LandmarkFrame, NoteSnapshot, Utterance};
use recapit_core::Point;
use serde::Deserialize;

use crate::error::{Error, Result};

/// Timestamps may step back by this much before a file counts as unsorted.
pub const JITTER_TOLERANCE: f64 = 0.001;

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

/// Non-blank lines with their 1-based line numbers.
fn records(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty())
}

fn finite(path: &Path, line: usize, name: &str, v: f64) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::parse(path, line, format!("{name} is not finite")))
    }
}

/// Stable sort by time after checking that no value steps back by more than the jitter tolerance.
fn sort_with_jitter<T>(path: &Path, items: &mut [(usize, T)], time: impl Fn(&T) -> f64) -> Result<()> {
    for w in items.windows(2) {
        if time(&w[1].1) < time(&w[0].1) - JITTER_TOLERANCE {
            return Err(Error::parse(
                path,
                w[1].0,
                format!("timestamp {} goes back in time from {}", time(&w[1].1), time(&w[0].1)),
            ));
        }
    }
    items.sort_by(|a, b| time(&a.1).total_cmp(&time(&b.1)));
    Ok(())
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TranscriptRecord {
    id: String,
    speaker: String,
    start: f64,
    end: f64,
    text: String,
}

/// Line-delimited JSON utterances: `{"id", "speaker", "start", "end", "text"}`.
pub fn parse_transcript(path: &Path, offset: f64, participants: &[Participant]) -> Result<Vec<Utterance>> {
    let text = read_text(path)?;
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for (line, raw) in records(&text) {
        let r: TranscriptRecord = serde_json::from_str(raw).map_err(|e| Error::parse(path, line, e.to_string()))?;
        let start = finite(path, line, "start", r.start)? + offset;
        let end = finite(path, line, "end", r.end)? + offset;
        if end <= start {
            return Err(Error::parse(
                path,
                line,
                format!("utterance '{}' ends before it starts", r.id),
            ));
        }
        if r.text.trim().is_empty() {
            return Err(Error::parse(path, line, format!("utterance '{}' has empty text", r.id)));
        }
        if !participants.iter().any(|p| p.id == r.speaker) {
            return Err(Error::parse(path, line, format!("unknown speaker '{}'", r.speaker)));
        }
        if !seen.insert(r.id.clone()) {
            return Err(Error::parse(path, line, format!("duplicate utterance id '{}'", r.id)));
        }
        out.push(Utterance {
            id: r.id,
            speaker_id: r.speaker,
            span: TimeSpan::new(start, end),
            text: r.text,
        });
    }
    out.sort_by(|a, b| a.span.start.total_cmp(&b.span.start).then_with(|| a.id.cmp(&b.id)));
    Ok(out)
}

fn parse_flag(value: &str) -> Option<bool> {
    match value.trim().to_ascii_lowercase().as_str() {
        "1" | "true" | "t" | "yes" => Some(true),
        "0" | "false" | "f" | "no" => Some(false),
        _ => None,
    }
}

fn parse_coord(value: &str) -> Option<f64> {
    let v = value.trim();
    if v.is_empty() {
        return Some(f64::NAN);
    }
    v.parse().ok()
}

/// Gaze CSV with header `t,x,y,valid`. Rows with non-finite coordinates are
/// kept but marked invalid.
pub fn parse_gaze(path: &Path, participant_id: &str, offset: f64) -> Result<GazeTrack> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| csv_error(path, e))?;
    let headers = reader.headers().map_err(|e| csv_error(path, e))?.clone();
    if headers.iter().collect::<Vec<_>>() != ["t", "x", "y", "valid"] {
        return Err(Error::parse(path, 1, "expected header 't,x,y,valid'"));
    }
    let mut rows = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| csv_error(path, e))?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        let bad = |what: &str| Error::parse(path, line, format!("malformed {what}"));
        let t: f64 = rec[0].parse().map_err(|_| bad("t"))?;
        let t = finite(path, line, "t", t)? + offset;
        let x = parse_coord(&rec[1]).ok_or_else(|| bad("x"))?;
        let y = parse_coord(&rec[2]).ok_or_else(|| bad("y"))?;
        let valid = parse_flag(&rec[3]).ok_or_else(|| bad("valid"))?;
        let valid = valid && x.is_finite() && y.is_finite();
        rows.push((line, GazeSample { t, x, y, valid }));
    }
    sort_with_jitter(path, &mut rows, |s| s.t)?;
    Ok(GazeTrack {
        participant_id: participant_id.into(),
        samples: rows.into_iter().map(|(_, s)| s).collect(),
    })
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line() as usize);
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::parse(path, line, format!("{other:?}")),
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct LandmarkRecord {
    t: f64,
    points: Vec<Point>,
}

/// Line-delimited JSON hand landmarks: `{"t": 1.5, "points": [[x, y], ...]}`.
pub fn parse_landmarks(path: &Path, offset: f64) -> Result<Vec<LandmarkFrame>> {
    let text = read_text(path)?;
    let mut rows = Vec::new();
    for (line, raw) in records(&text) {
        let r: LandmarkRecord = serde_json::from_str(raw).map_err(|e| Error::parse(path, line, e.to_string()))?;
        let t = finite(path, line, "t", r.t)? + offset;
        if let Some(p) = r
            .points
            .iter()
            .find(|p| !(p.x >= -0.5 && p.x <= 1.5 && p.y >= -0.5 && p.y <= 1.5))
        {
            return Err(Error::parse(
                path,
                line,
                format!("landmark ({}, {}) far outside the working area", p.x, p.y),
            ));
        }
        rows.push((line, LandmarkFrame { t, points: r.points }));
    }
    sort_with_jitter(path, &mut rows, |f| f.t)?;
    Ok(rows.into_iter().map(|(_, f)| f).collect())
}

/// One entry of a frame index: where the image lives and when it was taken.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameRef {
    pub t: f64,
    pub path: PathBuf,
}

/// Frame index CSV with header `file,t`; files are resolved next to the index.
pub fn parse_frame_index(path: &Path, offset: f64) -> Result<Vec<FrameRef>> {
    let base = path.parent().unwrap_or(Path::new("."));
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| csv_error(path, e))?;
    let headers = reader.headers().map_err(|e| csv_error(path, e))?.clone();
    if headers.iter().collect::<Vec<_>>() != ["file", "t"] {
        return Err(Error::parse(path, 1, "expected header 'file,t'"));
    }
    let mut rows = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| csv_error(path, e))?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        let t: f64 = rec[1].parse().map_err(|_| Error::parse(path, line, "malformed t"))?;
        let t = finite(path, line, "t", t)? + offset;
        rows.push((
            line,
            FrameRef {
                t,
                path: base.join(&rec[0]),
            },
        ));
    }
    sort_with_jitter(path, &mut rows, |f| f.t)?;
    Ok(rows.into_iter().map(|(_, f)| f).collect())
}

pub fn read_gray_image(path: &Path) -> Result<GrayFrame> {
    let img = image::open(path).map_err(|e| match e {
        image::ImageError::IoError(io) => Error::io(path, io),
        other => Error::Image {
            path: path.to_path_buf(),
            message: other.to_string(),
        },
    })?;
    let luma = img.to_luma8();
    let (w, h) = luma.dimensions();
    Ok(GrayFrame::new(w, h, luma.into_raw()).expect("buffer matches dimensions"))
}

/// Loads indexed frames one at a time, checking that all share one size.
pub fn frames(index: &[FrameRef]) -> impl Iterator<Item = Result<(f64, GrayFrame)>> + '_ {
    let mut dims: Option<(u32, u32)> = None;
    index.iter().map(move |r| {
        let frame = read_gray_image(&r.path)?;
        match dims {
            None => dims = Some((frame.width, frame.height)),
            Some(d) if d != (frame.width, frame.height) => {
                return Err(Error::Image {
                    path: r.path.clone(),
                    message: format!(
                        "{}x{} differs from the first frame's {}x{}",
                        frame.width, frame.height, d.0, d.1
                    ),
                })
            }
            Some(_) => {}
        }
        Ok((r.t, frame))
    })
}

fn parse_snapshot_time(stamp: &str) -> Option<DateTime<Utc>> {
    if let Ok(t) = DateTime::parse_from_rfc3339(stamp) {
        return Some(t.with_timezone(&Utc));
    }
    // Colons are awkward in filenames, so compact and dashed variants are accepted.
    [
        "%Y%m%dT%H%M%SZ",
        "%Y%m%dT%H%M%S%.fZ",
        "%Y-%m-%dT%H-%M-%SZ",
        "%Y-%m-%dT%H-%M-%S%.fZ",
    ]
    .iter()
    .find_map(|f| NaiveDateTime::parse_from_str(stamp, f).ok())
    .map(|n| n.and_utc())
}

/// Snapshots from files named `<author>__<timestamp>.txt`, sorted by author then time.
pub fn load_note_snapshots(dir: &Path, session_start: DateTime<Utc>, offset: f64) -> Result<Vec<NoteSnapshot>> {
    let entries = fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    let mut out = Vec::new();
    for entry in entries {
        let entry = entry.map_err(|e| Error::io(dir, e))?;
        let path = entry.path();
        let name = entry.file_name().to_string_lossy().into_owned();
        if name.starts_with('.') || !path.is_file() {
            continue;
        }
        let bad = |why: &str| Error::invalid(format!("note snapshot '{name}': {why}"));
        let stem = name.strip_suffix(".txt").ok_or_else(|| bad("expected a .txt file"))?;
        let (author, stamp) = stem
            .rsplit_once("__")
            .ok_or_else(|| bad("missing '__' between author and timestamp"))?;
        if author.is_empty() {
            return Err(bad("empty author"));
        }
        let at = parse_snapshot_time(stamp).ok_or_else(|| bad("unparseable timestamp"))?;
        let delta = at.signed_duration_since(session_start);
        if delta < chrono::TimeDelta::zero() {
            return Err(bad("timestamp before session start"));
        }
        let t = delta.num_microseconds().map_or(f64::MAX, |us| us as f64 / 1e6) + offset;
        out.push(NoteSnapshot {
            author: author.into(),
            t,
            text: read_text(&path)?,
        });
    }
    out.sort_by(|a, b| a.author.cmp(&b.author).then(a.t.total_cmp(&b.t)));
    Ok(out)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct EmbeddingRecord {
    chunk_id: String,
    vector: Vec<f64>,
}

/// Precomputed chunk embeddings: `{"chunk_id": "...", "vector": [...]}` per line.
pub fn parse_embeddings(path: &Path) -> Result<BTreeMap<String, Vec<f64>>> {
    let text = read_text(path)?;
    let mut out = BTreeMap::new();
    for (line, raw) in records(&text) {
        let r: EmbeddingRecord = serde_json::from_str(raw).map_err(|e| Error::parse(path, line, e.to_string()))?;
        if r.vector.is_empty() || r.vector.iter().any(|v| !v.is_finite()) {
            return Err(Error::parse(path, line, "vector must be non-empty and finite"));
        }
        if out.insert(r.chunk_id.clone(), r.vector).is_some() {
            return Err(Error::parse(path, line, format!("duplicate chunk id '{}'", r.chunk_id)));
        }
    }
    Ok(out)
}
