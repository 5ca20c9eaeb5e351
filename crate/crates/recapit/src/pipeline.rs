//! Batch stages over a project directory: ingest, segment, stats, export.
//! Each stage reads the manifest and the artifacts of earlier stages and writes
//! its own outputs under `derived/`.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use recapit_core::activity::{ActivityAccumulator, ActivityParams, BackgroundModel, HeatAccumulator, PixelLayout};
use recapit_core::attention::{
    attention_heatmap, attention_series, detect_fixations, scarf_sequence, shared_attention_intervals, Fixation,
    ScarfInterval,
};
use recapit_core::cards::{card_statistics, carry_over, generate_title, CardStats, TitleOutcome, TitleProvider};
use recapit_core::model::{SignalKind, SourceKind, TimeSpan, WorkshopProject};
use recapit_core::notes::{note_events, NoteEvent};
use recapit_core::segmentation::{segment_session, SegmentationOutcome, TopicSegment};
use recapit_core::stream::{LandmarkFrame, Utterance};
use recapit_core::{HeatGrid, MultivariateSeries};
use serde::{Deserialize, Serialize};

use crate::derived::{self, read_jsonl, write_heatmap, write_jsonl, write_series, Derived};
use crate::error::{Error, Result};
use crate::ingest;
use crate::project::{load_project, parse_session_start, project_dir, save_project, to_pretty_json, write_atomic};
use crate::providers::{embedding_provider, title_provider, FileEmbeddings, ProviderConfig};

/// A loaded project together with the directory its paths are relative to.
#[derive(Debug, Clone)]
pub struct Workspace {
    pub dir: PathBuf,
    pub project: WorkshopProject,
}

impl Workspace {
    pub fn open(path: &Path) -> Result<Self> {
        Ok(Self {
            project: load_project(path)?,
            dir: project_dir(path),
        })
    }

    pub fn derived(&self) -> Derived {
        Derived::new(&self.dir)
    }

    pub fn save(&self) -> Result<()> {
        save_project(&self.project, &self.dir)
    }

    fn source_path(&self, rel: &str) -> PathBuf {
        self.dir.join(rel)
    }

    pub fn utterances(&self) -> Result<Vec<Utterance>> {
        read_jsonl(&self.derived().require(derived::UTTERANCES, "ingest")?)
    }

    pub fn scarfs(&self) -> Result<Vec<ScarfInterval>> {
        read_jsonl(&self.derived().require(derived::SCARF, "ingest")?)
    }

    pub fn fixations(&self) -> Result<Vec<Fixation>> {
        read_jsonl(&self.derived().require(derived::FIXATIONS, "ingest")?)
    }

    pub fn note_events(&self) -> Result<Vec<NoteEvent>> {
        read_jsonl(&self.derived().require(derived::NOTE_EVENTS, "ingest")?)
    }

    /// The stored series of `kind`, or `None` when ingest had no data for it.
    pub fn series(&self, kind: SignalKind) -> Result<Option<MultivariateSeries>> {
        let path = self.derived().series_path(kind);
        if !path.exists() {
            return Ok(None);
        }
        let p = &self.project;
        derived::read_series(&path, kind, 0.0, p.duration, p.segmentation_config.bin_width).map(Some)
    }

    fn activity_params(&self) -> ActivityParams {
        let a = &self.project.analysis;
        ActivityParams {
            alpha: a.background_alpha,
            diff_threshold: a.diff_threshold,
            landmark_tolerance: a.landmark_tolerance,
        }
    }

    fn landmarks(&self) -> Result<Vec<LandmarkFrame>> {
        let mut all = Vec::new();
        for src in self.project.sources_of(SourceKind::Landmarks) {
            all.extend(ingest::parse_landmarks(&self.source_path(&src.path), src.time_offset)?);
        }
        all.sort_by(|a, b| a.t.total_cmp(&b.t));
        Ok(all)
    }

    fn frame_source(&self) -> Result<Option<(Vec<ingest::FrameRef>, Option<recapit_core::Homography>)>> {
        let mut sources = self.project.sources_of(SourceKind::Frames);
        let Some(src) = sources.next() else {
            return Ok(None);
        };
        if sources.next().is_some() {
            return Err(Error::invalid("only one frames source is supported"));
        }
        let index = ingest::parse_frame_index(&self.source_path(&src.path), src.time_offset)?;
        Ok(Some((index, src.homography)))
    }

    /// Foreground-rate heatmaps for each span, from one pass over the frames.
    /// Entries are `None` when no frame falls inside the span.
    pub fn activity_heatmaps(&self, spans: &[TimeSpan]) -> Result<Vec<Option<HeatGrid>>> {
        let Some((index, homography)) = self.frame_source()? else {
            return Ok(vec![None; spans.len()]);
        };
        let a = &self.project.analysis;
        let mut model: Option<BackgroundModel> = None;
        let mut accs: Vec<HeatAccumulator> = Vec::new();
        for item in ingest::frames(&index) {
            let (t, frame) = item?;
            let mask = match &mut model {
                Some(m) => m.update(&frame).map_err(|e| Error::invalid(e.to_string()))?,
                None => {
                    let layout = PixelLayout::new(frame.width, frame.height, homography.as_ref());
                    accs = spans
                        .iter()
                        .map(|_| HeatAccumulator::new(&layout, a.heatmap_width, a.heatmap_height))
                        .collect();
                    model = Some(BackgroundModel::from_frame(
                        &frame,
                        a.background_alpha,
                        a.diff_threshold,
                    ));
                    continue;
                }
            };
            for (span, acc) in spans.iter().zip(&mut accs) {
                if t >= span.start && t < span.end {
                    acc.push(&mask);
                }
            }
        }
        if accs.is_empty() {
            return Ok(vec![None; spans.len()]);
        }
        Ok(accs
            .into_iter()
            .zip(spans)
            .map(|(acc, span)| acc.finish(*span).ok())
            .collect())
    }

    pub fn attention_heatmap(&self, fixations: &[Fixation], span: TimeSpan) -> HeatGrid {
        let a = &self.project.analysis;
        attention_heatmap(fixations, span, a.heatmap_width, a.heatmap_height, a.heatmap_sigma)
    }
}

/// Counts of what ingest produced.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct IngestSummary {
    pub utterances: usize,
    pub gaze_participants: usize,
    pub fixations: usize,
    pub frames: usize,
    pub note_events: usize,
}

/// Parses every source and writes synchronized streams and series.
pub fn ingest(path: &Path) -> Result<IngestSummary> {
    let ws = Workspace::open(path)?;
    let p = &ws.project;
    let out = ws.derived();
    let session = p.session_span();
    let bin_width = p.segmentation_config.bin_width;
    let mut summary = IngestSummary::default();

    let mut utterances = Vec::new();
    for src in p.sources_of(SourceKind::Transcript) {
        utterances.extend(ingest::parse_transcript(
            &ws.source_path(&src.path),
            src.time_offset,
            &p.participants,
        )?);
    }
    utterances.sort_by(|a, b| a.span.start.total_cmp(&b.span.start).then_with(|| a.id.cmp(&b.id)));
    if let Some(u) = utterances.iter().find(|u| !u.span.is_valid_within(p.duration)) {
        return Err(Error::invalid(format!(
            "utterance '{}' [{}, {}] lies outside the session [0, {}]",
            u.id, u.span.start, u.span.end, p.duration
        )));
    }
    let mut ids: Vec<&str> = utterances.iter().map(|u| u.id.as_str()).collect();
    ids.sort_unstable();
    if let Some(w) = ids.windows(2).find(|w| w[0] == w[1]) {
        return Err(Error::invalid(format!(
            "utterance id '{}' appears in more than one transcript",
            w[0]
        )));
    }
    summary.utterances = utterances.len();

    let mut fixations = Vec::new();
    let mut scarfs = Vec::new();
    for src in p.sources_of(SourceKind::Gaze) {
        let pid = src.participant_id.as_deref().expect("validated gaze source");
        let track = ingest::parse_gaze(&ws.source_path(&src.path), pid, src.time_offset)?;
        let fx = detect_fixations(
            pid,
            &track.samples,
            p.analysis.dispersion_threshold,
            p.analysis.min_fixation_duration,
        );
        scarfs.extend(scarf_sequence(pid, &fx, &p.aois, session));
        fixations.extend(fx);
        summary.gaze_participants += 1;
    }
    summary.fixations = fixations.len();
    let attention_path = out.series_path(SignalKind::Attention);
    let mut shared = Vec::new();
    if summary.gaze_participants > 0 {
        let series =
            attention_series(&scarfs, &p.aois, session, bin_width).map_err(|e| Error::invalid(e.to_string()))?;
        write_series(&attention_path, &series)?;
        if summary.gaze_participants >= 2 {
            shared = shared_attention_intervals(&scarfs, 2).map_err(|e| Error::invalid(e.to_string()))?;
        }
    } else {
        remove_stale(&attention_path)?;
    }

    let activity_path = out.series_path(SignalKind::Activity);
    match ws.frame_source()? {
        Some((index, homography)) => {
            let landmarks = ws.landmarks()?;
            let params = ws.activity_params();
            let mut acc = ActivityAccumulator::new(&p.aois, &landmarks, session, bin_width, params, homography);
            for item in ingest::frames(&index) {
                let (t, frame) = item?;
                acc.push(t, &frame).map_err(|e| Error::invalid(e.to_string()))?;
                summary.frames += 1;
            }
            let series = acc.finish().map_err(|e| Error::invalid(format!("activity: {e}")))?;
            write_series(&activity_path, &series)?;
        }
        None => remove_stale(&activity_path)?,
    }

    let mut events = Vec::new();
    if p.sources_of(SourceKind::Notes).next().is_some() {
        let start = parse_session_start(&p.session_start).expect("validated session start");
        for src in p.sources_of(SourceKind::Notes) {
            let snaps = ingest::load_note_snapshots(&ws.source_path(&src.path), start, src.time_offset)?;
            events.extend(note_events(&snaps));
        }
    }
    events.sort_by(|a, b| a.t.total_cmp(&b.t).then_with(|| a.author.cmp(&b.author)));
    summary.note_events = events.len();

    write_jsonl(&out.path(derived::UTTERANCES), &utterances)?;
    write_jsonl(&out.path(derived::FIXATIONS), &fixations)?;
    write_jsonl(&out.path(derived::SCARF), &scarfs)?;
    write_jsonl(&out.path(derived::SHARED_ATTENTION), &shared)?;
    write_jsonl(&out.path(derived::NOTE_EVENTS), &events)?;
    Ok(summary)
}

fn remove_stale(path: &Path) -> Result<()> {
    match std::fs::remove_file(path) {
        Err(e) if e.kind() != std::io::ErrorKind::NotFound => Err(Error::io(path, e)),
        _ => Ok(()),
    }
}

/// Command-line overrides of the stored segmentation configuration.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SegmentOverrides {
    pub beta: Option<f64>,
    pub signal: Option<SignalKind>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TitleRecord {
    pub segment_id: String,
    #[serde(flatten)]
    pub outcome: TitleOutcome,
}

/// Dialogue of a segment: utterances starting inside it, in order.
pub fn segment_dialogue(segment: &TopicSegment, utterances: &[Utterance]) -> String {
    utterances
        .iter()
        .filter(|u| u.span.start >= segment.span.start && u.span.start < segment.span.end)
        .map(|u| u.text.trim())
        .collect::<Vec<_>>()
        .join("\n")
}

/// Runs PELT and dialogue refinement, titles the segments and carries
/// authoring over to segments whose span did not change.
pub fn segment(path: &Path, overrides: SegmentOverrides, providers: &ProviderConfig) -> Result<Vec<TopicSegment>> {
    let mut ws = Workspace::open(path)?;
    let cfg = &mut ws.project.segmentation_config;
    if let Some(b) = overrides.beta {
        cfg.penalty_beta = b;
    }
    if let Some(s) = overrides.signal {
        cfg.signal_kind = s;
    }
    cfg.validate()?;
    let cfg = *cfg;

    let utterances = ws.utterances()?;
    let series = ws.series(cfg.signal_kind)?.ok_or_else(|| {
        Error::invalid(format!(
            "no {} series: the project has no data for this signal",
            cfg.signal_kind.as_str()
        ))
    })?;
    let file = match ws.project.sources_of(SourceKind::Embeddings).next() {
        Some(src) => Some(FileEmbeddings(ingest::parse_embeddings(&ws.source_path(&src.path))?)),
        None => None,
    };
    let embedder = embedding_provider(providers, file);
    let outcome =
        segment_session(&series, &utterances, &cfg, embedder.as_ref()).map_err(|e| Error::invalid(e.to_string()))?;
    let SegmentationOutcome {
        initial,
        chunks,
        refined,
        mut segments,
    } = outcome;

    let dialogues: Vec<String> = segments.iter().map(|s| segment_dialogue(s, &utterances)).collect();
    let corpus: Vec<&str> = dialogues.iter().map(String::as_str).collect();
    let titler = title_provider(providers);
    let mut titles = Vec::new();
    for (i, seg) in segments.iter_mut().enumerate() {
        let outcome = generate_title(&corpus, i, titler.as_ref().map(|t| t as &dyn TitleProvider));
        seg.title = outcome.title.clone();
        titles.push(TitleRecord {
            segment_id: seg.id.clone(),
            outcome,
        });
    }

    ws.project.authoring = carry_over(&ws.project.authoring, segments.clone(), &utterances);
    let out = ws.derived();
    #[derive(Serialize)]
    struct Changepoints<'a> {
        initial: &'a recapit_core::segmentation::ChangePointResult,
        refined: &'a recapit_core::segmentation::RefinedChangepoints,
    }
    write_atomic(
        &out.path(derived::SEGMENTATION),
        &to_pretty_json(&Changepoints {
            initial: &initial,
            refined: &refined,
        }),
    )?;
    write_jsonl(&out.path(derived::CHUNKS), &chunks)?;
    write_atomic(&out.path(derived::SEGMENTS), &to_pretty_json(&segments))?;
    write_atomic(&out.path(derived::TITLES), &to_pretty_json(&titles))?;
    ws.save()?;
    Ok(segments)
}

/// Computes card statistics and per-segment heatmaps for the current segments.
pub fn stats(path: &Path) -> Result<BTreeMap<String, CardStats>> {
    let mut ws = Workspace::open(path)?;
    let segments = ws.project.authoring.segments.clone();
    if segments.is_empty() {
        return Err(Error::invalid("project has no segments; run `segment` first"));
    }
    let utterances = ws.utterances()?;
    let scarfs = ws.scarfs()?;
    let fixations = ws.fixations()?;
    let activity = ws.series(SignalKind::Activity)?;
    let p = &ws.project;
    let mut all = BTreeMap::new();
    for seg in &segments {
        let s = card_statistics(
            seg,
            &utterances,
            &p.participants,
            &p.roles,
            &p.aois,
            &scarfs,
            activity.as_ref(),
        )
        .map_err(|e| Error::invalid(e.to_string()))?;
        all.insert(seg.id.clone(), s);
    }

    let out = ws.derived();
    let heat_dir = out.path(derived::HEATMAPS);
    if heat_dir.exists() {
        std::fs::remove_dir_all(&heat_dir).map_err(|e| Error::io(&heat_dir, e))?;
    }
    for seg in &segments {
        if !fixations.is_empty() {
            let grid = ws.attention_heatmap(&fixations, seg.span);
            write_heatmap(&out.heatmap_path(&seg.id, SignalKind::Attention), &grid)?;
        }
    }
    let spans: Vec<TimeSpan> = segments.iter().map(|s| s.span).collect();
    for (seg, grid) in segments.iter().zip(ws.activity_heatmaps(&spans)?) {
        if let Some(grid) = grid {
            write_heatmap(&out.heatmap_path(&seg.id, SignalKind::Activity), &grid)?;
        }
    }

    for card in &mut ws.project.authoring.cards {
        if let Some(s) = all.get(&card.segment_id) {
            card.stats = s.clone();
        }
    }
    write_atomic(&out.path(derived::CARD_STATS), &to_pretty_json(&all))?;
    ws.save()?;
    Ok(all)
}

/// Writes the report for marked cards; `out` defaults to `<project>/report.html`.
pub fn export(path: &Path, out: Option<&Path>) -> Result<PathBuf> {
    let ws = Workspace::open(path)?;
    let dest = out.map(Path::to_path_buf).unwrap_or_else(|| ws.dir.join("report.html"));
    let generated = chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true);
    let html = crate::report::render(&ws, &generated)?;
    write_atomic(&dest, html.as_bytes())?;
    Ok(dest)
}
