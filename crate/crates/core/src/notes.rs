//! Note events derived from periodic document snapshots.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::stream::NoteSnapshot;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoteEventKind {
    Added,
    Removed,
    Mixed,
}

/// One step of a line edit script.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LineOp {
    /// Copy this many lines from the previous version.
    Keep(usize),
    Remove(String),
    Add(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct LineDiff {
    pub added: Vec<String>,
    pub removed: Vec<String>,
    pub script: Vec<LineOp>,
}

impl LineDiff {
    pub fn is_empty(&self) -> bool {
        self.added.is_empty() && self.removed.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoteEvent {
    pub author: String,
    pub t: f64,
    pub kind: NoteEventKind,
    pub added_lines: Vec<String>,
    pub removed_lines: Vec<String>,
    pub script: Vec<LineOp>,
}

/// Lines with trailing whitespace removed; the unit of comparison.
pub fn note_lines(text: &str) -> Vec<&str> {
    text.lines().map(str::trim_end).collect()
}

/// Line-level LCS diff of two snapshots.
pub fn diff_snapshots(prev: &str, next: &str) -> LineDiff {
    let a = note_lines(prev);
    let b = note_lines(next);
    let prefix = a.iter().zip(&b).take_while(|(x, y)| x == y).count();
    let suffix = a[prefix..]
        .iter()
        .rev()
        .zip(b[prefix..].iter().rev())
        .take_while(|(x, y)| x == y)
        .count();
    let am = &a[prefix..a.len() - suffix];
    let bm = &b[prefix..b.len() - suffix];

    // lcs[i][j]: LCS length of am[i..] and bm[j..].
    let w = bm.len() + 1;
    let mut lcs = alloc::vec![0_u32; (am.len() + 1) * w];
    for i in (0..am.len()).rev() {
        for j in (0..bm.len()).rev() {
            lcs[i * w + j] = if am[i] == bm[j] {
                lcs[(i + 1) * w + j + 1] + 1
            } else {
                lcs[(i + 1) * w + j].max(lcs[i * w + j + 1])
            };
        }
    }

    let mut diff = LineDiff::default();
    let mut keep = prefix;
    let flush = |keep: &mut usize, script: &mut Vec<LineOp>| {
        if *keep > 0 {
            script.push(LineOp::Keep(*keep));
            *keep = 0;
        }
    };
    let (mut i, mut j) = (0, 0);
    while i < am.len() || j < bm.len() {
        if i < am.len() && j < bm.len() && am[i] == bm[j] {
            keep += 1;
            i += 1;
            j += 1;
        } else if j == bm.len() || (i < am.len() && lcs[(i + 1) * w + j] >= lcs[i * w + j + 1]) {
            flush(&mut keep, &mut diff.script);
            diff.removed.push(am[i].into());
            diff.script.push(LineOp::Remove(am[i].into()));
            i += 1;
        } else {
            flush(&mut keep, &mut diff.script);
            diff.added.push(bm[j].into());
            diff.script.push(LineOp::Add(bm[j].into()));
            j += 1;
        }
    }
    keep += suffix;
    flush(&mut keep, &mut diff.script);
    diff
}

/// Applies an edit script to the lines of a previous version.
///
/// Returns `None` when the script does not fit the input.
pub fn apply_script(prev: &[&str], script: &[LineOp]) -> Option<Vec<String>> {
    let mut out = Vec::new();
    let mut pos = 0;
    for op in script {
        match op {
            LineOp::Keep(n) => {
                out.extend(prev.get(pos..pos + n)?.iter().map(|s| String::from(*s)));
                pos += n;
            }
            LineOp::Remove(line) => {
                if prev.get(pos)? != line {
                    return None;
                }
                pos += 1;
            }
            LineOp::Add(line) => out.push(line.clone()),
        }
    }
    (pos == prev.len()).then_some(out)
}

/// One event per consecutive pair of an author's snapshots that differ.
///
/// Snapshots are grouped by author and ordered by time within each author;
/// the result is ordered by time, then author.
pub fn note_events(snapshots: &[NoteSnapshot]) -> Vec<NoteEvent> {
    let mut by_author: BTreeMap<&str, Vec<&NoteSnapshot>> = BTreeMap::new();
    for s in snapshots {
        by_author.entry(s.author.as_str()).or_default().push(s);
    }
    let mut events = Vec::new();
    for (author, mut snaps) in by_author {
        snaps.sort_by(|a, b| a.t.total_cmp(&b.t));
        for pair in snaps.windows(2) {
            let diff = diff_snapshots(&pair[0].text, &pair[1].text);
            let kind = match (diff.added.is_empty(), diff.removed.is_empty()) {
                (true, true) => continue,
                (false, true) => NoteEventKind::Added,
                (true, false) => NoteEventKind::Removed,
                (false, false) => NoteEventKind::Mixed,
            };
            events.push(NoteEvent {
                author: author.into(),
                t: pair[1].t,
                kind,
                added_lines: diff.added,
                removed_lines: diff.removed,
                script: diff.script,
            });
        }
    }
    events.sort_by(|a, b| a.t.total_cmp(&b.t).then_with(|| a.author.cmp(&b.author)));
    events
}
