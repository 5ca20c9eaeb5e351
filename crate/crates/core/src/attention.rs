//! Gaze fixations, AOI hits, scarf intervals, attention series and heatmaps.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::Point;
use crate::model::{Aoi, TimeSpan};
use crate::series::{bin_count, bin_span, HeatGrid, MultivariateSeries};
use crate::stream::GazeSample;
use crate::SignalKind;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fixation {
    pub participant_id: String,
    pub span: TimeSpan,
    pub centroid: Point,
    /// `(max x − min x) + (max y − min y)` over the member samples.
    pub dispersion: f64,
    pub samples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScarfInterval {
    pub participant_id: String,
    pub span: TimeSpan,
    pub aoi_id: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SharedAttention {
    pub span: TimeSpan,
    pub aoi_id: String,
    /// Peak number of participants on the AOI during the interval.
    pub participants: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AttentionError {
    #[error("k = {k} must lie in 1..={participants}")]
    InvalidK { k: usize, participants: usize },
    #[error("no participants with gaze data")]
    NoParticipants,
}

#[derive(Clone, Copy)]
struct Extent {
    min_x: f64,
    max_x: f64,
    min_y: f64,
    max_y: f64,
}

impl Extent {
    fn new(s: &GazeSample) -> Self {
        Self {
            min_x: s.x,
            max_x: s.x,
            min_y: s.y,
            max_y: s.y,
        }
    }

    fn with(self, s: &GazeSample) -> Self {
        Self {
            min_x: self.min_x.min(s.x),
            max_x: self.max_x.max(s.x),
            min_y: self.min_y.min(s.y),
            max_y: self.max_y.max(s.y),
        }
    }

    fn dispersion(&self) -> f64 {
        (self.max_x - self.min_x) + (self.max_y - self.min_y)
    }
}

fn usable(s: &GazeSample) -> bool {
    s.valid && s.x.is_finite() && s.y.is_finite() && s.t.is_finite()
}

/// Dispersion-threshold (I-DT) fixation filter.
///
/// From each start sample the window grows while the next sample is valid and
/// the dispersion stays within `dispersion_threshold`. A window lasting at
/// least `min_duration` becomes a fixation and scanning resumes after it;
/// otherwise the start advances by one sample.
pub fn detect_fixations(
    participant_id: &str,
    samples: &[GazeSample],
    dispersion_threshold: f64,
    min_duration: f64,
) -> Vec<Fixation> {
    let mut out = Vec::new();
    let n = samples.len();
    let mut i = 0;
    while i < n {
        if !usable(&samples[i]) {
            i += 1;
            continue;
        }
        let mut extent = Extent::new(&samples[i]);
        let mut j = i;
        while j + 1 < n && usable(&samples[j + 1]) {
            let grown = extent.with(&samples[j + 1]);
            if grown.dispersion() > dispersion_threshold {
                break;
            }
            extent = grown;
            j += 1;
        }
        let span = TimeSpan::new(samples[i].t, samples[j].t);
        if j > i && span.duration() >= min_duration {
            let members = &samples[i..=j];
            let count = members.len() as f64;
            let cx = members.iter().map(|s| s.x).sum::<f64>() / count;
            let cy = members.iter().map(|s| s.y).sum::<f64>() / count;
            out.push(Fixation {
                participant_id: participant_id.into(),
                span,
                centroid: Point::new(cx, cy),
                dispersion: extent.dispersion(),
                samples: members.len(),
            });
            i = j + 1;
        } else {
            i += 1;
        }
    }
    out
}

/// First AOI in manifest order containing `p` (edges inclusive).
pub fn aoi_hit(aois: &[Aoi], p: Point) -> Option<&Aoi> {
    aois.iter().find(|a| a.contains(p))
}

/// Tiles `session` with one interval per fixation and `None` gaps between them.
pub fn scarf_sequence(
    participant_id: &str,
    fixations: &[Fixation],
    aois: &[Aoi],
    session: TimeSpan,
) -> Vec<ScarfInterval> {
    let mut out = Vec::new();
    let mut cursor = session.start;
    let mut push = |start: f64, end: f64, aoi_id: Option<String>| {
        if end > start {
            out.push(ScarfInterval {
                participant_id: participant_id.into(),
                span: TimeSpan::new(start, end),
                aoi_id,
            });
        }
    };
    for fix in fixations {
        let start = fix.span.start.max(cursor);
        let end = fix.span.end.min(session.end);
        if end <= start {
            continue;
        }
        push(cursor, start, None);
        push(start, end, aoi_hit(aois, fix.centroid).map(|a| a.id.clone()));
        cursor = end;
    }
    push(cursor, session.end, None);
    out
}

fn participant_count(scarfs: &[ScarfInterval]) -> usize {
    let mut ids: Vec<&str> = scarfs.iter().map(|s| s.participant_id.as_str()).collect();
    ids.sort_unstable();
    ids.dedup();
    ids.len()
}

/// Per bin and AOI, the time-weighted share of participants fixating that AOI.
pub fn attention_series(
    scarfs: &[ScarfInterval],
    aois: &[Aoi],
    session: TimeSpan,
    bin_width: f64,
) -> Result<MultivariateSeries, AttentionError> {
    let participants = participant_count(scarfs);
    if participants == 0 {
        return Err(AttentionError::NoParticipants);
    }
    let bins = bin_count(session.start, session.end, bin_width);
    let aoi_index: BTreeMap<&str, usize> = aois.iter().enumerate().map(|(i, a)| (a.id.as_str(), i)).collect();
    let mut dwell = alloc::vec![alloc::vec![0.0_f64; aois.len()]; bins];
    for s in scarfs {
        let Some(&col) = s.aoi_id.as_deref().and_then(|id| aoi_index.get(id)) else {
            continue;
        };
        let first = libm::floor((s.span.start - session.start) / bin_width).max(0.0) as usize;
        for (b, row) in dwell.iter_mut().enumerate().skip(first) {
            let span = bin_span(session.start, session.end, bin_width, b);
            if span.start >= s.span.end {
                break;
            }
            row[col] += span.overlap(&s.span);
        }
    }
    let p = participants as f64;
    let values = dwell
        .into_iter()
        .enumerate()
        .map(|(b, row)| {
            let len = bin_span(session.start, session.end, bin_width, b).duration();
            row.into_iter().map(|d| (d / (len * p)).clamp(0.0, 1.0)).collect()
        })
        .collect();
    Ok(MultivariateSeries {
        kind: SignalKind::Attention,
        bin_width,
        start: session.start,
        end: session.end,
        aoi_ids: aois.iter().map(|a| a.id.clone()).collect(),
        values,
    })
}

/// Duration-weighted Gaussian splats of fixation centroids, max-normalized.
///
/// `sigma` is in grid cells; the kernel is truncated at 3σ. Each fixation is
/// weighted by the part of its duration that falls inside `span`.
pub fn attention_heatmap(fixations: &[Fixation], span: TimeSpan, width: u32, height: u32, sigma: f64) -> HeatGrid {
    let mut grid = HeatGrid::zeros(width, height, span);
    let reach = 3.0 * sigma;
    let two_var = 2.0 * sigma * sigma;
    for fix in fixations {
        let weight = fix.span.overlap(&span);
        if !(weight > 0.0) {
            continue;
        }
        let cx = fix.centroid.x * f64::from(width);
        let cy = fix.centroid.y * f64::from(height);
        let x_lo = libm::floor(cx - reach - 0.5).max(0.0) as u32;
        let y_lo = libm::floor(cy - reach - 0.5).max(0.0) as u32;
        let x_hi = (libm::ceil(cx + reach).max(0.0) as u32).min(width);
        let y_hi = (libm::ceil(cy + reach).max(0.0) as u32).min(height);
        for gy in y_lo..y_hi {
            let dy = f64::from(gy) + 0.5 - cy;
            for gx in x_lo..x_hi {
                let dx = f64::from(gx) + 0.5 - cx;
                let d2 = dx * dx + dy * dy;
                if d2 <= reach * reach {
                    grid.values[gy as usize * width as usize + gx as usize] += weight * libm::exp(-d2 / two_var);
                }
            }
        }
    }
    grid.normalize();
    grid
}

/// Maximal intervals during which at least `k` participants fixate the same AOI.
pub fn shared_attention_intervals(scarfs: &[ScarfInterval], k: usize) -> Result<Vec<SharedAttention>, AttentionError> {
    let participants = participant_count(scarfs);
    if k == 0 || k > participants {
        return Err(AttentionError::InvalidK { k, participants });
    }
    let mut events: BTreeMap<&str, Vec<(f64, i32)>> = BTreeMap::new();
    for s in scarfs {
        if let Some(aoi) = s.aoi_id.as_deref() {
            let e = events.entry(aoi).or_default();
            e.push((s.span.start, 1));
            e.push((s.span.end, -1));
        }
    }
    let mut out = Vec::new();
    for (aoi, mut ev) in events {
        ev.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut count = 0_i32;
        let mut open: Option<(f64, usize)> = None;
        let mut idx = 0;
        while idx < ev.len() {
            let t = ev[idx].0;
            while idx < ev.len() && ev[idx].0 == t {
                count += ev[idx].1;
                idx += 1;
            }
            let active = count >= k as i32;
            match (&mut open, active) {
                (None, true) => open = Some((t, count as usize)),
                (Some((_, peak)), true) => *peak = (*peak).max(count as usize),
                (Some((start, peak)), false) => {
                    out.push(SharedAttention {
                        span: TimeSpan::new(*start, t),
                        aoi_id: aoi.into(),
                        participants: *peak,
                    });
                    open = None;
                }
                (None, false) => {}
            }
        }
    }
    out.sort_by(|a, b| {
        a.span
            .start
            .total_cmp(&b.span.start)
            .then_with(|| a.aoi_id.cmp(&b.aoi_id))
    });
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::tests::square_aoi;
    use alloc::vec;

    fn sample(t: f64, x: f64, y: f64) -> GazeSample {
        GazeSample { t, x, y, valid: true }
    }

    fn scarf(pid: &str, s: f64, e: f64, aoi: Option<&str>) -> ScarfInterval {
        ScarfInterval {
            participant_id: pid.into(),
            span: TimeSpan::new(s, e),
            aoi_id: aoi.map(Into::into),
        }
    }

    #[test]
    fn identical_points_form_one_fixation() {
        let samples: Vec<_> = (0..20).map(|i| sample(i as f64 * 0.02, 0.4, 0.6)).collect();
        let fx = detect_fixations("p", &samples, 0.05, 0.1);
        assert_eq!(fx.len(), 1);
        assert!((fx[0].centroid.x - 0.4).abs() < 1e-12 && (fx[0].centroid.y - 0.6).abs() < 1e-12);
        assert_eq!(fx[0].samples, 20);
        assert_eq!(fx[0].dispersion, 0.0);
    }

    #[test]
    fn alternating_points_never_fixate() {
        let samples: Vec<_> = (0..40)
            .map(|i| sample(i as f64 * 0.02, if i % 2 == 0 { 0.2 } else { 0.7 }, 0.5))
            .collect();
        assert!(detect_fixations("p", &samples, 0.05, 0.1).is_empty());
    }

    #[test]
    fn invalid_samples_break_windows() {
        let mut samples: Vec<_> = (0..10).map(|i| sample(i as f64 * 0.02, 0.5, 0.5)).collect();
        samples[5].valid = false;
        // Each half lasts 0.08 s, below the 0.1 s minimum.
        assert!(detect_fixations("p", &samples, 0.05, 0.1).is_empty());
        assert_eq!(detect_fixations("p", &samples, 0.05, 0.06).len(), 2);
    }

    #[test]
    fn empty_input() {
        assert!(detect_fixations("p", &[], 0.05, 0.1).is_empty());
    }

    #[test]
    fn aoi_hit_interior_boundary_and_order() {
        let aois = vec![square_aoi("a", 0.0, 0.0, 1.0, 1.0), square_aoi("b", 0.0, 0.0, 0.5, 0.5)];
        assert_eq!(aoi_hit(&aois, Point::new(0.5, 0.5)).unwrap().id, "a");
        assert_eq!(aoi_hit(&aois, Point::new(1.0, 0.5)).unwrap().id, "a");
        assert_eq!(aoi_hit(&aois[1..], Point::new(0.25, 0.25)).unwrap().id, "b");
        assert!(aoi_hit(&aois, Point::new(1.5, 0.5)).is_none());
    }

    #[test]
    fn scarf_fills_gaps() {
        let aois = vec![square_aoi("a", 0.0, 0.0, 0.5, 0.5)];
        let fix = Fixation {
            participant_id: "p".into(),
            span: TimeSpan::new(2.0, 4.0),
            centroid: Point::new(0.25, 0.25),
            dispersion: 0.0,
            samples: 10,
        };
        let s = scarf_sequence("p", &[fix], &aois, TimeSpan::new(0.0, 10.0));
        assert_eq!(
            s,
            vec![
                scarf("p", 0.0, 2.0, None),
                scarf("p", 2.0, 4.0, Some("a")),
                scarf("p", 4.0, 10.0, None)
            ]
        );
        let empty = scarf_sequence("p", &[], &aois, TimeSpan::new(0.0, 10.0));
        assert_eq!(empty, vec![scarf("p", 0.0, 10.0, None)]);
    }

    #[test]
    fn attention_is_share_of_participants() {
        let aois = vec![square_aoi("a", 0.0, 0.0, 0.5, 0.5), square_aoi("b", 0.5, 0.5, 1.0, 1.0)];
        let scarfs = vec![
            scarf("p1", 0.0, 2.0, Some("a")),
            scarf("p2", 0.0, 2.0, Some("a")),
            scarf("p3", 0.0, 2.0, None),
            scarf("p4", 0.0, 1.0, Some("b")),
            scarf("p4", 1.0, 2.0, Some("a")),
        ];
        let series = attention_series(&scarfs, &aois, TimeSpan::new(0.0, 2.0), 1.0).unwrap();
        assert_eq!(series.values, vec![vec![0.5, 0.25], vec![0.75, 0.0]]);
    }

    #[test]
    fn everyone_on_one_aoi_reads_one() {
        let aois = vec![square_aoi("a", 0.0, 0.0, 0.5, 0.5)];
        let scarfs: Vec<_> = (0..6)
            .map(|i| scarf(&alloc::format!("p{i}"), 0.0, 3.0, Some("a")))
            .collect();
        let series = attention_series(&scarfs, &aois, TimeSpan::new(0.0, 3.0), 1.0).unwrap();
        assert!(series.values.iter().all(|r| r[0] == 1.0));
    }

    #[test]
    fn heatmap_peaks_at_single_fixation() {
        let fix = Fixation {
            participant_id: "p".into(),
            span: TimeSpan::new(0.0, 1.0),
            centroid: Point::new(0.5, 0.5),
            dispersion: 0.0,
            samples: 3,
        };
        let grid = attention_heatmap(&[fix], TimeSpan::new(0.0, 10.0), 9, 9, 1.5);
        assert_eq!(grid.argmax(), (4, 4));
        assert_eq!(grid.max(), 1.0);
        let none = attention_heatmap(&[], TimeSpan::new(0.0, 10.0), 9, 9, 1.5);
        assert!(none.values.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn shared_attention_basic_and_bad_k() {
        let scarfs = vec![
            scarf("p1", 0.0, 3.0, None),
            scarf("p1", 3.0, 5.0, Some("a")),
            scarf("p1", 5.0, 9.0, None),
            scarf("p2", 0.0, 2.0, Some("a")),
            scarf("p2", 2.0, 6.0, Some("a")),
            scarf("p2", 6.0, 9.0, None),
        ];
        let shared = shared_attention_intervals(&scarfs, 2).unwrap();
        assert_eq!(shared.len(), 1);
        assert_eq!(shared[0].span, TimeSpan::new(3.0, 5.0));
        assert_eq!(shared[0].aoi_id, "a");
        assert_eq!(
            shared_attention_intervals(&scarfs, 3).unwrap_err(),
            AttentionError::InvalidK { k: 3, participants: 2 }
        );
        // A touching hand-over between fixations on the same AOI stays one interval.
        let single = shared_attention_intervals(&scarfs, 1).unwrap();
        assert_eq!(single.len(), 1);
        assert_eq!(single[0].span, TimeSpan::new(0.0, 6.0));
    }
}
