//! Binned multivariate series and spatial heat grids.

use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::model::{SignalKind, TimeSpan};

/// `T × M` matrix of per-AOI values, one row per time bin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultivariateSeries {
    pub kind: SignalKind,
    pub bin_width: f64,
    pub start: f64,
    /// Session end; the last bin may be shorter than `bin_width`.
    pub end: f64,
    pub aoi_ids: Vec<String>,
    pub values: Vec<Vec<f64>>,
}

impl MultivariateSeries {
    pub fn bins(&self) -> usize {
        self.values.len()
    }

    pub fn dims(&self) -> usize {
        self.aoi_ids.len()
    }

    pub fn bin_span(&self, bin: usize) -> TimeSpan {
        bin_span(self.start, self.end, self.bin_width, bin)
    }

    /// Session time where a bin boundary lies; `boundary == bins()` is the end.
    pub fn boundary_time(&self, boundary: usize) -> f64 {
        if boundary >= self.bins() {
            self.end
        } else {
            self.start + boundary as f64 * self.bin_width
        }
    }

    /// Index of the bin containing `t`, clamped into range.
    pub fn bin_of(&self, t: f64) -> usize {
        let raw = libm::floor((t - self.start) / self.bin_width);
        if raw <= 0.0 {
            0
        } else {
            (raw as usize).min(self.bins().saturating_sub(1))
        }
    }

    pub fn column(&self, aoi: usize) -> impl Iterator<Item = f64> + '_ {
        self.values.iter().map(move |row| row[aoi])
    }
}

/// Number of bins of width `bin_width` needed to cover `[start, end)`.
pub fn bin_count(start: f64, end: f64, bin_width: f64) -> usize {
    let length = end - start;
    if !(length > 0.0) {
        return 0;
    }
    let mut n = libm::ceil(length / bin_width) as usize;
    while n > 1 && start + (n - 1) as f64 * bin_width >= end {
        n -= 1;
    }
    n.max(1)
}

pub fn bin_span(start: f64, end: f64, bin_width: f64, bin: usize) -> TimeSpan {
    let s = start + bin as f64 * bin_width;
    TimeSpan::new(s, (s + bin_width).min(end))
}

/// Row-major spatial grid over the unit working area.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeatGrid {
    pub width: u32,
    pub height: u32,
    pub values: Vec<f64>,
    pub span: TimeSpan,
}

impl HeatGrid {
    pub fn zeros(width: u32, height: u32, span: TimeSpan) -> Self {
        Self {
            width,
            height,
            values: alloc::vec![0.0; width as usize * height as usize],
            span,
        }
    }

    pub fn get(&self, x: u32, y: u32) -> f64 {
        self.values[y as usize * self.width as usize + x as usize]
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    /// Cell with the largest value; first in row-major order on ties.
    pub fn argmax(&self) -> (u32, u32) {
        let mut best = 0;
        for (i, v) in self.values.iter().enumerate() {
            if *v > self.values[best] {
                best = i;
            }
        }
        ((best % self.width as usize) as u32, (best / self.width as usize) as u32)
    }

    /// Scales so the maximum becomes 1; an all-zero grid is left alone.
    pub fn normalize(&mut self) {
        let max = self.max();
        if max > 0.0 {
            for v in &mut self.values {
                *v /= max;
            }
        }
    }

    /// Value looked up at a normalized working-area position.
    pub fn sample(&self, x: f64, y: f64) -> f64 {
        if !(0.0..=1.0).contains(&x) || !(0.0..=1.0).contains(&y) {
            return 0.0;
        }
        let cx = ((x * f64::from(self.width)) as u32).min(self.width - 1);
        let cy = ((y * f64::from(self.height)) as u32).min(self.height - 1);
        self.get(cx, cy)
    }
}
