//! Derived artifacts written under `<project>/derived/`.

use std::fs;
use std::path::{Path, PathBuf};

use image::codecs::pnm::{PnmEncoder, PnmSubtype, SampleEncoding};
use image::{ExtendedColorType, ImageEncoder};
use recapit_core::model::SignalKind;
use recapit_core::series::bin_count;
use recapit_core::{HeatGrid, MultivariateSeries};
use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::project::write_atomic;

pub const DIR: &str = "derived";
pub const UTTERANCES: &str = "utterances.jsonl";
pub const FIXATIONS: &str = "fixations.jsonl";
pub const SCARF: &str = "scarf.jsonl";
pub const SHARED_ATTENTION: &str = "shared_attention.jsonl";
pub const NOTE_EVENTS: &str = "note_events.jsonl";
pub const CHUNKS: &str = "chunks.jsonl";
pub const SEGMENTATION: &str = "segmentation.json";
pub const SEGMENTS: &str = "segments.json";
pub const TITLES: &str = "titles.json";
pub const CARD_STATS: &str = "card_stats.json";
pub const HEATMAPS: &str = "heatmaps";

/// Paths of derived artifacts for one project directory.
#[derive(Debug, Clone)]
pub struct Derived {
    root: PathBuf,
}

impl Derived {
    pub fn new(project_dir: &Path) -> Self {
        Self {
            root: project_dir.join(DIR),
        }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }

    pub fn series_path(&self, kind: SignalKind) -> PathBuf {
        self.root.join(format!("{}.csv", kind.as_str()))
    }

    pub fn heatmap_path(&self, segment_id: &str, kind: SignalKind) -> PathBuf {
        self.root
            .join(HEATMAPS)
            .join(format!("{segment_id}-{}.pgm", kind.as_str()))
    }

    /// Reads an artifact an earlier stage should have produced.
    pub fn require(&self, name: &str, stage: &str) -> Result<PathBuf> {
        let p = self.path(name);
        if p.exists() {
            Ok(p)
        } else {
            Err(Error::invalid(format!(
                "{} is missing; run `{stage}` first",
                p.display()
            )))
        }
    }
}

pub fn write_jsonl<T: Serialize>(path: &Path, items: &[T]) -> Result<()> {
    let mut out = Vec::new();
    for item in items {
        serde_json::to_writer(&mut out, item).expect("in-memory values serialize");
        out.push(b'\n');
    }
    write_atomic(path, &out)
}

pub fn read_jsonl<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| serde_json::from_str(l).map_err(|e| Error::parse(path, i + 1, e.to_string())))
        .collect()
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_slice(&bytes).map_err(|e| Error::parse(path, e.line(), e.to_string()))
}

/// Series as CSV: header `t,<aoi1>,...`, one row per bin keyed by its start time.
pub fn series_csv(series: &MultivariateSeries) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["t".to_string()];
    header.extend(series.aoi_ids.iter().cloned());
    w.write_record(&header).expect("writing to memory");
    for (b, row) in series.values.iter().enumerate() {
        let mut rec = vec![series.bin_span(b).start.to_string()];
        rec.extend(row.iter().map(f64::to_string));
        w.write_record(&rec).expect("writing to memory");
    }
    w.into_inner().expect("writing to memory")
}

pub fn write_series(path: &Path, series: &MultivariateSeries) -> Result<()> {
    write_atomic(path, &series_csv(series))
}

/// Reads a series CSV back; the bin layout comes from the project configuration.
pub fn read_series(path: &Path, kind: SignalKind, start: f64, end: f64, bin_width: f64) -> Result<MultivariateSeries> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| Error::parse(path, 0, e.to_string()))?;
    let headers = reader
        .headers()
        .map_err(|e| Error::parse(path, 1, e.to_string()))?
        .clone();
    if headers.get(0) != Some("t") {
        return Err(Error::parse(path, 1, "first column must be 't'"));
    }
    let aoi_ids: Vec<String> = headers.iter().skip(1).map(String::from).collect();
    let mut values = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| Error::parse(path, i + 2, e.to_string()))?;
        let row: std::result::Result<Vec<f64>, _> = rec.iter().skip(1).map(str::parse).collect();
        values.push(row.map_err(|_| Error::parse(path, i + 2, "malformed value"))?);
    }
    let expected = bin_count(start, end, bin_width);
    if values.len() != expected {
        return Err(Error::invalid(format!(
            "{}: {} bins, expected {expected} for the configured bin width",
            path.display(),
            values.len()
        )));
    }
    Ok(MultivariateSeries {
        kind,
        bin_width,
        start,
        end,
        aoi_ids,
        values,
    })
}

/// Heat grid as 8-bit binary PGM, each value scaled by 255 and rounded.
pub fn heatmap_pgm(grid: &HeatGrid) -> Vec<u8> {
    let pixels: Vec<u8> = grid
        .values
        .iter()
        .map(|v| (v.clamp(0.0, 1.0) * 255.0).round() as u8)
        .collect();
    let mut out = Vec::new();
    PnmEncoder::new(&mut out)
        .with_subtype(PnmSubtype::Graymap(SampleEncoding::Binary))
        .write_image(&pixels, grid.width, grid.height, ExtendedColorType::L8)
        .expect("encoding to memory");
    out
}

pub fn write_heatmap(path: &Path, grid: &HeatGrid) -> Result<()> {
    write_atomic(path, &heatmap_pgm(grid))
}

/// Reads a PGM heatmap back into [0, 1] values.
pub fn read_heatmap(path: &Path) -> Result<(u32, u32, Vec<f64>)> {
    let frame = crate::ingest::read_gray_image(path)?;
    Ok((
        frame.width,
        frame.height,
        frame.pixels.iter().map(|p| f64::from(*p) / 255.0).collect(),
    ))
}
