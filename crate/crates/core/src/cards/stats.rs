use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;

use super::{CardError, CardStats};
use crate::attention::ScarfInterval;
use crate::model::{Aoi, Participant, Role, TimeSpan};
use crate::segmentation::TopicSegment;
use crate::series::MultivariateSeries;
use crate::stream::Utterance;

/// Speaking, attention and activity shares within a segment, all normalized
/// by the segment duration.
pub fn card_statistics(
    segment: &TopicSegment,
    utterances: &[Utterance],
    participants: &[Participant],
    roles: &[Role],
    aois: &[Aoi],
    scarfs: &[ScarfInterval],
    activity: Option<&MultivariateSeries>,
) -> Result<CardStats, CardError> {
    let span = segment.span;
    let duration = span.duration();
    if !(duration > 0.0) {
        return Err(CardError::ZeroDuration(segment.id.clone()));
    }

    let mut speaking: BTreeMap<String, f64> = roles.iter().map(|r| (r.id.clone(), 0.0)).collect();
    for u in utterances {
        let Some(role) = participants.iter().find(|p| p.id == u.speaker_id).map(|p| &p.role_id) else {
            continue;
        };
        if let Some(acc) = speaking.get_mut(role) {
            *acc += u.span.overlap(&span);
        }
    }
    for v in speaking.values_mut() {
        *v /= duration;
    }

    let viewers: BTreeSet<&str> = scarfs.iter().map(|s| s.participant_id.as_str()).collect();
    let mut attention: BTreeMap<String, f64> = aois.iter().map(|a| (a.id.clone(), 0.0)).collect();
    for s in scarfs {
        if let Some(acc) = s.aoi_id.as_ref().and_then(|id| attention.get_mut(id)) {
            *acc += s.span.overlap(&span);
        }
    }
    for v in attention.values_mut() {
        *v = if viewers.is_empty() {
            0.0
        } else {
            (*v / (duration * viewers.len() as f64)).clamp(0.0, 1.0)
        };
    }

    let mut activity_by_aoi: BTreeMap<String, f64> = aois.iter().map(|a| (a.id.clone(), 0.0)).collect();
    if let Some(series) = activity {
        for (col, id) in series.aoi_ids.iter().enumerate() {
            let Some(acc) = activity_by_aoi.get_mut(id) else {
                continue;
            };
            *acc = weighted_mean(series, col, &span);
        }
    }

    Ok(CardStats {
        speaking_by_role: speaking,
        attention_by_aoi: attention,
        activity_by_aoi,
    })
}

/// Time-weighted mean of one series column over `span`.
fn weighted_mean(series: &MultivariateSeries, col: usize, span: &TimeSpan) -> f64 {
    let mut total = 0.0;
    let mut weight = 0.0;
    for (b, row) in series.values.iter().enumerate() {
        let w = series.bin_span(b).overlap(span);
        if w > 0.0 {
            total += row[col] * w;
            weight += w;
        }
    }
    if weight > 0.0 {
        (total / weight).clamp(0.0, 1.0)
    } else {
        0.0
    }
}

/// Shares summing to 1 over the non-zero entries, for donut charts.
pub fn donut_shares(values: &BTreeMap<String, f64>) -> BTreeMap<String, f64> {
    let total: f64 = values.values().filter(|v| **v > 0.0).sum();
    values
        .iter()
        .filter(|(_, v)| **v > 0.0)
        .map(|(k, v)| (k.clone(), v / total))
        .collect()
}
