use alloc::vec::Vec;

/// Prefix sums of `x` and `x²` per dimension for O(M) L2 segment costs.
#[derive(Debug, Clone)]
pub struct SegmentCost {
    dims: usize,
    len: usize,
    sum: Vec<f64>,
    sum_sq: Vec<f64>,
}

impl SegmentCost {
    pub fn new<R: AsRef<[f64]>>(rows: &[R]) -> Self {
        let dims = rows.first().map_or(0, |r| r.as_ref().len());
        let len = rows.len();
        let mut sum = alloc::vec![0.0; (len + 1) * dims];
        let mut sum_sq = alloc::vec![0.0; (len + 1) * dims];
        for (t, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            for d in 0..dims {
                let v = row[d];
                sum[(t + 1) * dims + d] = sum[t * dims + d] + v;
                sum_sq[(t + 1) * dims + d] = sum_sq[t * dims + d] + v * v;
            }
        }
        Self { dims, len, sum, sum_sq }
    }

    /// Number of time steps `T`.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Sum of squared deviations from the segment mean over bins `a..=b` (1-based).
    pub fn cost(&self, a: usize, b: usize) -> f64 {
        debug_assert!(1 <= a && a <= b && b <= self.len);
        let n = (b - a + 1) as f64;
        let (lo, hi) = ((a - 1) * self.dims, b * self.dims);
        let mut total = 0.0;
        for d in 0..self.dims {
            let s = self.sum[hi + d] - self.sum[lo + d];
            let s2 = self.sum_sq[hi + d] - self.sum_sq[lo + d];
            total += s2 - s * s / n;
        }
        total.max(0.0)
    }
}
