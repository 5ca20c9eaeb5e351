//! Per-AOI activity: share of foreground pixels, gated by hand landmarks.

use alloc::vec;
use alloc::vec::Vec;

use thiserror::Error;

use crate::geometry::{Homography, Point};
use crate::model::{Aoi, TimeSpan};
use crate::series::{bin_count, HeatGrid, MultivariateSeries};
use crate::stream::{GrayFrame, LandmarkFrame};
use crate::SignalKind;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ActivityError {
    #[error("frame is {got_w}x{got_h}, expected {want_w}x{want_h}")]
    DimensionMismatch {
        want_w: u32,
        want_h: u32,
        got_w: u32,
        got_h: u32,
    },
    #[error("no frames inside the session span")]
    NoFrames,
    #[error("frames out of time order at t = {0}")]
    Unsorted(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ActivityParams {
    pub alpha: f64,
    /// 8-bit intensity units.
    pub diff_threshold: f64,
    /// Largest time distance for matching a landmark frame to a video frame.
    pub landmark_tolerance: f64,
}

impl Default for ActivityParams {
    fn default() -> Self {
        Self {
            alpha: 0.05,
            diff_threshold: 25.0,
            landmark_tolerance: 0.2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ForegroundMask {
    pub width: u32,
    pub height: u32,
    pub bits: Vec<bool>,
}

impl ForegroundMask {
    pub fn count(&self) -> usize {
        self.bits.iter().filter(|b| **b).count()
    }
}

/// Exponential running-mean background model.
#[derive(Debug, Clone, PartialEq)]
pub struct BackgroundModel {
    pub width: u32,
    pub height: u32,
    pub mean: Vec<f64>,
    pub alpha: f64,
    pub diff_threshold: f64,
}

impl BackgroundModel {
    /// Seeds the mean with the first frame.
    pub fn from_frame(frame: &GrayFrame, alpha: f64, diff_threshold: f64) -> Self {
        Self {
            width: frame.width,
            height: frame.height,
            mean: frame.pixels.iter().map(|p| f64::from(*p)).collect(),
            alpha,
            diff_threshold,
        }
    }

    /// Classifies `frame` against the current mean, then blends it in.
    pub fn update(&mut self, frame: &GrayFrame) -> Result<ForegroundMask, ActivityError> {
        if frame.width != self.width || frame.height != self.height {
            return Err(ActivityError::DimensionMismatch {
                want_w: self.width,
                want_h: self.height,
                got_w: frame.width,
                got_h: frame.height,
            });
        }
        let keep = 1.0 - self.alpha;
        let bits = self
            .mean
            .iter_mut()
            .zip(&frame.pixels)
            .map(|(mean, px)| {
                let v = f64::from(*px);
                let fg = (v - *mean).abs() > self.diff_threshold;
                *mean = keep * *mean + self.alpha * v;
                fg
            })
            .collect();
        Ok(ForegroundMask {
            width: self.width,
            height: self.height,
            bits,
        })
    }
}

/// Working-area position of every pixel centre.
#[derive(Debug, Clone)]
pub struct PixelLayout {
    pub width: u32,
    pub height: u32,
    positions: Vec<Option<Point>>,
}

impl PixelLayout {
    /// `homography` maps camera pixels to the unit working area; without one
    /// the frame itself is taken as the working area.
    pub fn new(width: u32, height: u32, homography: Option<&Homography>) -> Self {
        let normalizer = Homography::pixel_normalizer(width, height);
        let h = homography.copied().unwrap_or(normalizer);
        let mut positions = Vec::with_capacity(width as usize * height as usize);
        for py in 0..height {
            for px in 0..width {
                let centre = Point::new(f64::from(px) + 0.5, f64::from(py) + 0.5);
                positions.push(h.apply(centre).ok());
            }
        }
        Self {
            width,
            height,
            positions,
        }
    }

    pub fn position(&self, pixel: usize) -> Option<Point> {
        self.positions[pixel]
    }

    /// Pixel indices whose centre lies inside the AOI.
    pub fn aoi_pixels(&self, aoi: &Aoi) -> Vec<u32> {
        self.positions
            .iter()
            .enumerate()
            .filter(|(_, p)| p.is_some_and(|p| aoi.contains(p)))
            .map(|(i, _)| i as u32)
            .collect()
    }
}

/// Landmark frame nearest to `t`, if within `tolerance`. Ties go to the earlier frame.
pub fn nearest_landmarks(landmarks: &[LandmarkFrame], t: f64, tolerance: f64) -> Option<&LandmarkFrame> {
    let idx = landmarks.partition_point(|l| l.t < t);
    let before = idx.checked_sub(1).map(|i| &landmarks[i]);
    let after = landmarks.get(idx);
    let best = match (before, after) {
        (Some(b), Some(a)) => {
            if t - b.t <= a.t - t {
                b
            } else {
                a
            }
        }
        (Some(b), None) => b,
        (None, Some(a)) => a,
        (None, None) => return None,
    };
    ((best.t - t).abs() <= tolerance).then_some(best)
}

/// Streaming computation of the activity series; frames are pushed in time order.
#[derive(Debug)]
pub struct ActivityAccumulator<'a> {
    aois: &'a [Aoi],
    landmarks: &'a [LandmarkFrame],
    session: TimeSpan,
    bin_width: f64,
    params: ActivityParams,
    homography: Option<Homography>,
    model: Option<BackgroundModel>,
    aoi_pixels: Vec<Vec<u32>>,
    sums: Vec<Vec<f64>>,
    frames_per_bin: Vec<usize>,
    last_t: f64,
    in_session: usize,
}

impl<'a> ActivityAccumulator<'a> {
    pub fn new(
        aois: &'a [Aoi],
        landmarks: &'a [LandmarkFrame],
        session: TimeSpan,
        bin_width: f64,
        params: ActivityParams,
        homography: Option<Homography>,
    ) -> Self {
        let bins = bin_count(session.start, session.end, bin_width);
        Self {
            aois,
            landmarks,
            session,
            bin_width,
            params,
            homography,
            model: None,
            aoi_pixels: Vec::new(),
            sums: vec![vec![0.0; aois.len()]; bins],
            frames_per_bin: vec![0; bins],
            last_t: f64::NEG_INFINITY,
            in_session: 0,
        }
    }

    /// Per-AOI activity of a single frame given its foreground mask.
    pub fn frame_activity(&self, t: f64, mask: &ForegroundMask) -> Vec<f64> {
        let hands = nearest_landmarks(self.landmarks, t, self.params.landmark_tolerance);
        self.aois
            .iter()
            .zip(&self.aoi_pixels)
            .map(|(aoi, pixels)| {
                let gated = hands.is_some_and(|h| h.points.iter().any(|p| aoi.contains(*p)));
                if !gated || pixels.is_empty() {
                    return 0.0;
                }
                let fg = pixels.iter().filter(|i| mask.bits[**i as usize]).count();
                fg as f64 / pixels.len() as f64
            })
            .collect()
    }

    /// Updates the background model and returns the frame's foreground mask.
    pub fn push(&mut self, t: f64, frame: &GrayFrame) -> Result<ForegroundMask, ActivityError> {
        if t < self.last_t {
            return Err(ActivityError::Unsorted(t));
        }
        self.last_t = t;
        let mask = match &mut self.model {
            Some(model) => model.update(frame)?,
            None => {
                let model = BackgroundModel::from_frame(frame, self.params.alpha, self.params.diff_threshold);
                let layout = PixelLayout::new(frame.width, frame.height, self.homography.as_ref());
                self.aoi_pixels = self.aois.iter().map(|a| layout.aoi_pixels(a)).collect();
                self.model = Some(model);
                ForegroundMask {
                    width: frame.width,
                    height: frame.height,
                    bits: vec![false; frame.len()],
                }
            }
        };
        if t >= self.session.start && t < self.session.end {
            let bin = (libm::floor((t - self.session.start) / self.bin_width) as usize).min(self.sums.len() - 1);
            let activity = self.frame_activity(t, &mask);
            for (acc, v) in self.sums[bin].iter_mut().zip(activity) {
                *acc += v;
            }
            self.frames_per_bin[bin] += 1;
            self.in_session += 1;
        }
        Ok(mask)
    }

    pub fn finish(self) -> Result<MultivariateSeries, ActivityError> {
        if self.in_session == 0 {
            return Err(ActivityError::NoFrames);
        }
        let values = self
            .sums
            .into_iter()
            .zip(&self.frames_per_bin)
            .map(|(row, &n)| {
                if n == 0 {
                    row.into_iter().map(|_| 0.0).collect()
                } else {
                    row.into_iter().map(|s| (s / n as f64).clamp(0.0, 1.0)).collect()
                }
            })
            .collect();
        Ok(MultivariateSeries {
            kind: SignalKind::Activity,
            bin_width: self.bin_width,
            start: self.session.start,
            end: self.session.end,
            aoi_ids: self.aois.iter().map(|a| a.id.clone()).collect(),
            values,
        })
    }
}

/// Activity series over in-memory frames `(t, frame)`, sorted by time.
pub fn activity_series(
    frames: &[(f64, GrayFrame)],
    landmarks: &[LandmarkFrame],
    aois: &[Aoi],
    session: TimeSpan,
    bin_width: f64,
    params: ActivityParams,
    homography: Option<Homography>,
) -> Result<MultivariateSeries, ActivityError> {
    let mut acc = ActivityAccumulator::new(aois, landmarks, session, bin_width, params, homography);
    for (t, frame) in frames {
        acc.push(*t, frame)?;
    }
    acc.finish()
}

/// Accumulates per-cell foreground rates for an activity heatmap.
#[derive(Debug, Clone)]
pub struct HeatAccumulator {
    width: u32,
    height: u32,
    cell_of: Vec<Option<u32>>,
    cell_pixels: Vec<u64>,
    counts: Vec<u64>,
    frames: usize,
}

impl HeatAccumulator {
    pub fn new(layout: &PixelLayout, width: u32, height: u32) -> Self {
        let cells = width as usize * height as usize;
        let mut cell_pixels = vec![0_u64; cells];
        let cell_of: Vec<Option<u32>> = (0..layout.width as usize * layout.height as usize)
            .map(|i| {
                let p = layout.position(i)?;
                if !(0.0..=1.0).contains(&p.x) || !(0.0..=1.0).contains(&p.y) {
                    return None;
                }
                let cx = ((p.x * f64::from(width)) as u32).min(width - 1);
                let cy = ((p.y * f64::from(height)) as u32).min(height - 1);
                let cell = cy * width + cx;
                cell_pixels[cell as usize] += 1;
                Some(cell)
            })
            .collect();
        Self {
            width,
            height,
            cell_of,
            cell_pixels,
            counts: vec![0; cells],
            frames: 0,
        }
    }

    pub fn push(&mut self, mask: &ForegroundMask) {
        for (bit, cell) in mask.bits.iter().zip(&self.cell_of) {
            if let (true, Some(c)) = (*bit, cell) {
                self.counts[*c as usize] += 1;
            }
        }
        self.frames += 1;
    }

    pub fn frames(&self) -> usize {
        self.frames
    }

    pub fn finish(self, span: TimeSpan) -> Result<HeatGrid, ActivityError> {
        if self.frames == 0 {
            return Err(ActivityError::NoFrames);
        }
        let mut grid = HeatGrid::zeros(self.width, self.height, span);
        for (i, v) in grid.values.iter_mut().enumerate() {
            if self.cell_pixels[i] > 0 {
                *v = self.counts[i] as f64 / (self.cell_pixels[i] as f64 * self.frames as f64);
            }
        }
        grid.normalize();
        Ok(grid)
    }
}

/// Mean foreground rate per grid cell over `masks`, max-normalized.
pub fn activity_heatmap(
    masks: &[ForegroundMask],
    layout: &PixelLayout,
    width: u32,
    height: u32,
    span: TimeSpan,
) -> Result<HeatGrid, ActivityError> {
    let mut acc = HeatAccumulator::new(layout, width, height);
    for m in masks {
        acc.push(m);
    }
    acc.finish(span)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::tests::square_aoi;

    fn frame(w: u32, h: u32, f: impl Fn(u32, u32) -> u8) -> GrayFrame {
        let mut px = Vec::new();
        for y in 0..h {
            for x in 0..w {
                px.push(f(x, y));
            }
        }
        GrayFrame::new(w, h, px).unwrap()
    }

    #[test]
    fn static_scene_has_no_foreground() {
        let f = GrayFrame::filled(8, 8, 90);
        let mut model = BackgroundModel::from_frame(&f, 0.05, 25.0);
        for _ in 0..10 {
            assert_eq!(model.update(&f).unwrap().count(), 0);
        }
    }

    #[test]
    fn bright_square_on_dark_background() {
        let dark = GrayFrame::filled(32, 32, 10);
        let mut model = BackgroundModel::from_frame(&dark, 0.05, 25.0);
        for _ in 0..50 {
            model.update(&dark).unwrap();
        }
        let lit = frame(32, 32, |x, y| {
            if (5..15).contains(&x) && (7..17).contains(&y) {
                240
            } else {
                10
            }
        });
        let mask = model.update(&lit).unwrap();
        assert_eq!(mask.count(), 100);
        assert!(mask.bits[7 * 32 + 5]);
        assert!(!mask.bits[7 * 32 + 15]);
    }

    #[test]
    fn dimension_mismatch() {
        let mut model = BackgroundModel::from_frame(&GrayFrame::filled(4, 4, 0), 0.05, 25.0);
        assert!(matches!(
            model.update(&GrayFrame::filled(4, 5, 0)),
            Err(ActivityError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn nearest_landmark_respects_tolerance() {
        let lm = [
            LandmarkFrame { t: 1.0, points: vec![] },
            LandmarkFrame { t: 2.0, points: vec![] },
        ];
        assert_eq!(nearest_landmarks(&lm, 1.4, 0.5).unwrap().t, 1.0);
        assert_eq!(nearest_landmarks(&lm, 1.6, 0.5).unwrap().t, 2.0);
        assert_eq!(nearest_landmarks(&lm, 1.5, 0.5).unwrap().t, 1.0);
        assert!(nearest_landmarks(&lm, 2.3, 0.2).is_none());
        assert!(nearest_landmarks(&[], 0.0, 1.0).is_none());
    }

    #[test]
    fn fully_covered_gated_aoi_reads_one() {
        let aois = vec![square_aoi("a", 0.0, 0.0, 0.5, 0.5), square_aoi("b", 0.5, 0.5, 1.0, 1.0)];
        let dark = GrayFrame::filled(10, 10, 0);
        let lit = frame(10, 10, |x, y| if x < 5 && y < 5 { 255 } else { 0 });
        // Frames at 0.0 (seed), then a bright AOI-a region for the whole of bin 1.
        let mut frames = vec![(0.0, dark.clone()), (0.5, dark.clone())];
        for i in 0..4 {
            frames.push((1.0 + i as f64 * 0.25, lit.clone()));
        }
        let hand = vec![Point::new(0.2, 0.2)];
        let landmarks: Vec<_> = (0..8)
            .map(|i| LandmarkFrame {
                t: i as f64 * 0.25,
                points: hand.clone(),
            })
            .collect();
        let params = ActivityParams {
            alpha: 0.001,
            ..ActivityParams::default()
        };
        let series = activity_series(&frames, &landmarks, &aois, TimeSpan::new(0.0, 2.0), 1.0, params, None).unwrap();
        assert_eq!(series.values[0], vec![0.0, 0.0]);
        assert_eq!(series.values[1], vec![1.0, 0.0]);
    }

    #[test]
    fn no_landmarks_means_no_activity() {
        let aois = vec![square_aoi("a", 0.0, 0.0, 1.0, 1.0)];
        let frames: Vec<_> = (0..10)
            .map(|i| {
                (
                    i as f64 * 0.1,
                    GrayFrame::filled(6, 6, if i % 2 == 0 { 0 } else { 255 }),
                )
            })
            .collect();
        let series = activity_series(
            &frames,
            &[],
            &aois,
            TimeSpan::new(0.0, 1.0),
            1.0,
            ActivityParams::default(),
            None,
        )
        .unwrap();
        assert_eq!(series.values, vec![vec![0.0]]);
    }

    #[test]
    fn frames_outside_session_error() {
        let aois = vec![square_aoi("a", 0.0, 0.0, 1.0, 1.0)];
        let frames = vec![(5.0, GrayFrame::filled(2, 2, 0))];
        let err = activity_series(
            &frames,
            &[],
            &aois,
            TimeSpan::new(0.0, 1.0),
            1.0,
            ActivityParams::default(),
            None,
        );
        assert_eq!(err.unwrap_err(), ActivityError::NoFrames);
    }

    #[test]
    fn heatmap_finds_active_region() {
        let layout = PixelLayout::new(8, 8, None);
        let mut bits = vec![false; 64];
        for y in 4..8 {
            for x in 0..2 {
                bits[y * 8 + x] = true;
            }
        }
        let mask = ForegroundMask {
            width: 8,
            height: 8,
            bits,
        };
        let grid = activity_heatmap(&[mask], &layout, 4, 4, TimeSpan::new(0.0, 1.0)).unwrap();
        let (x, y) = grid.argmax();
        assert_eq!(x, 0);
        assert!(y >= 2);
        let still = ForegroundMask {
            width: 8,
            height: 8,
            bits: vec![false; 64],
        };
        let zero = activity_heatmap(&[still], &layout, 4, 4, TimeSpan::new(0.0, 1.0)).unwrap();
        assert_eq!(zero.max(), 0.0);
        assert!(activity_heatmap(&[], &layout, 4, 4, TimeSpan::new(0.0, 1.0)).is_err());
    }
}
