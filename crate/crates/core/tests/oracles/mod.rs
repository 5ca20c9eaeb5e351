//! Independent reference implementations used as test oracles.
//!
//! These are deliberately naive: quadratic scans and from-scratch recomputation
//! that share no code with the library paths they check.
#![allow(dead_code)]

use recapit_core::attention::ScarfInterval;
use recapit_core::stream::GazeSample;

/// Two-pass sum of squared deviations from the mean over `rows[a-1..b]`.
pub fn naive_cost(rows: &[Vec<f64>], a: usize, b: usize) -> f64 {
    let seg = &rows[a - 1..b];
    let dims = seg[0].len();
    let n = seg.len() as f64;
    let mut total = 0.0;
    for d in 0..dims {
        let mean = seg.iter().map(|r| r[d]).sum::<f64>() / n;
        total += seg.iter().map(|r| (r[d] - mean).powi(2)).sum::<f64>();
    }
    total
}

/// Unpruned O(T²) optimal partitioning with minimum segment length.
/// Returns (objective, change points).
pub fn optimal_partitioning(rows: &[Vec<f64>], beta: f64, min_len: usize) -> (f64, Vec<usize>) {
    let t_max = rows.len();
    let m = min_len.max(1);
    if t_max < 2 * m {
        return (naive_cost(rows, 1, t_max), vec![]);
    }
    let mut f = vec![f64::INFINITY; t_max + 1];
    let mut arg = vec![0usize; t_max + 1];
    f[0] = -beta;
    for t in 1..=t_max {
        for tau in 0..t {
            if t - tau < m || (tau > 0 && tau < m) || !f[tau].is_finite() {
                continue;
            }
            let v = f[tau] + naive_cost(rows, tau + 1, t) + beta;
            if v < f[t] {
                f[t] = v;
                arg[t] = tau;
            }
        }
    }
    let mut cps = vec![];
    let mut t = t_max;
    while t > 0 {
        if arg[t] > 0 {
            cps.push(arg[t]);
        }
        t = arg[t];
    }
    cps.reverse();
    (f[t_max], cps)
}

/// Greedy maximal-window I-DT with dispersion recomputed from scratch for every window.
/// Returns `(first, last)` sample indices of each fixation.
pub fn brute_force_fixations(samples: &[GazeSample], threshold: f64, min_duration: f64) -> Vec<(usize, usize)> {
    let ok = |s: &GazeSample| s.valid && s.x.is_finite() && s.y.is_finite();
    let dispersion = |w: &[GazeSample]| {
        let xs: Vec<f64> = w.iter().map(|s| s.x).collect();
        let ys: Vec<f64> = w.iter().map(|s| s.y).collect();
        let ext = |v: &[f64]| v.iter().cloned().fold(f64::MIN, f64::max) - v.iter().cloned().fold(f64::MAX, f64::min);
        ext(&xs) + ext(&ys)
    };
    let mut out = vec![];
    let mut i = 0;
    while i < samples.len() {
        if !ok(&samples[i]) {
            i += 1;
            continue;
        }
        let mut best = i;
        for j in i + 1..samples.len() {
            if !samples[i..=j].iter().all(ok) || dispersion(&samples[i..=j]) > threshold {
                break;
            }
            best = j;
        }
        if best > i && samples[best].t - samples[i].t >= min_duration {
            out.push((i, best));
            i = best + 1;
        } else {
            i += 1;
        }
    }
    out
}

/// Point inside a counter-clockwise convex polygon iff on the left of (or on) every edge.
pub fn convex_contains(poly: &[(f64, f64)], p: (f64, f64)) -> bool {
    (0..poly.len()).all(|i| {
        let a = poly[i];
        let b = poly[(i + 1) % poly.len()];
        (b.0 - a.0) * (p.1 - a.1) - (b.1 - a.1) * (p.0 - a.0) >= 0.0
    })
}

/// Shared-attention intervals from a 1 ms dense scan; boundaries must lie on whole milliseconds.
pub fn dense_shared_attention(scarfs: &[ScarfInterval], k: usize, end_ms: u64) -> Vec<(u64, u64, String)> {
    let mut aois: Vec<String> = scarfs.iter().filter_map(|s| s.aoi_id.clone()).collect();
    aois.sort();
    aois.dedup();
    let mut out = vec![];
    for aoi in &aois {
        let mut open: Option<u64> = None;
        for ms in 0..=end_ms {
            let mid = (ms as f64 + 0.5) / 1000.0;
            let count = if ms == end_ms {
                0
            } else {
                scarfs
                    .iter()
                    .filter(|s| s.aoi_id.as_deref() == Some(aoi.as_str()) && s.span.start <= mid && mid < s.span.end)
                    .count()
            };
            match (open, count >= k) {
                (None, true) => open = Some(ms),
                (Some(s), false) => {
                    out.push((s, ms, aoi.clone()));
                    open = None;
                }
                _ => {}
            }
        }
    }
    out.sort_by(|a, b| a.0.cmp(&b.0).then(a.2.cmp(&b.2)));
    out
}

/// Length of the longest common subsequence, by full quadratic table.
pub fn lcs_len(a: &[&str], b: &[&str]) -> usize {
    let mut t = vec![vec![0usize; b.len() + 1]; a.len() + 1];
    for i in 1..=a.len() {
        for j in 1..=b.len() {
            t[i][j] = if a[i - 1] == b[j - 1] {
                t[i - 1][j - 1] + 1
            } else {
                t[i - 1][j].max(t[i][j - 1])
            };
        }
    }
    t[a.len()][b.len()]
}

/// True when `sub` can be obtained from `full` by deleting elements.
pub fn is_subsequence<T: PartialEq>(sub: &[T], full: &[T]) -> bool {
    let mut it = full.iter();
    sub.iter().all(|x| it.any(|y| y == x))
}
