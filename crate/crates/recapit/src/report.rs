//! Self-contained HTML report of the marked topic cards.

use std::fmt::Write as _;

use base64::Engine as _;
use image::codecs::png::PngEncoder;
use image::{ImageEncoder, RgbImage};
use recapit_core::cards::{compress_view, donut_shares, Screenshot, TopicCard};
use recapit_core::model::{SignalKind, TimeSpan};
use recapit_core::notes::NoteEvent;
use recapit_core::HeatGrid;

use crate::derived;
use crate::error::{Error, Result};
use crate::pipeline::Workspace;

/// Marks the single line that differs between otherwise identical exports.
pub const GENERATED_PREFIX: &str = "<meta name=\"generated\"";

const STYLE: &str = "body{font-family:system-ui,sans-serif;max-width:60rem;margin:2rem auto;color:#222}\
table{border-collapse:collapse;margin:.5rem 0}td,th{border:1px solid #ccc;padding:.2rem .6rem;text-align:left}\
.card{border:1px solid #bbb;border-radius:6px;padding:1rem;margin:1.5rem 0}.quote{font-style:italic}\
.swatch{display:inline-block;width:.8rem;height:.8rem;margin-right:.3rem;vertical-align:middle}\
img{max-width:100%;border:1px solid #ccc}";

pub fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&#39;"),
            _ => out.push(c),
        }
    }
    out
}

/// `m:ss` for a session time in seconds.
pub fn clock(t: f64) -> String {
    let total = t.max(0.0).round() as u64;
    format!("{}:{:02}", total / 60, total % 60)
}

fn span_label(span: &TimeSpan) -> String {
    format!("{}–{}", clock(span.start), clock(span.end))
}

fn table(out: &mut String, heading: &str, rows: &[(String, f64)]) {
    let _ = write!(out, "<table><tr><th>{}</th><th>share</th></tr>", escape(heading));
    for (label, v) in rows {
        let _ = write!(out, "<tr><td>{label}</td><td>{v:.3}</td></tr>");
    }
    out.push_str("</table>\n");
}

fn encode_png(img: &RgbImage) -> String {
    let mut bytes = Vec::new();
    PngEncoder::new(&mut bytes)
        .write_image(img.as_raw(), img.width(), img.height(), image::ExtendedColorType::Rgb8)
        .expect("encoding to memory");
    base64::engine::general_purpose::STANDARD.encode(bytes)
}

/// Crops the screenshot and optionally tints it red by heatmap intensity.
/// The source image is taken to cover the whole working area.
fn render_screenshot(ws: &Workspace, shot: &Screenshot, heat: Option<&HeatGrid>) -> Result<String> {
    let path = ws.dir.join(&shot.image_path);
    let img = image::open(&path)
        .map_err(|e| match e {
            image::ImageError::IoError(io) => Error::io(&path, io),
            other => Error::Image {
                path: path.clone(),
                message: other.to_string(),
            },
        })?
        .to_rgb8();
    let (w, h) = img.dimensions();
    let c = shot.crop;
    if !c.fits(w, h) {
        return Err(Error::Image {
            path,
            message: format!(
                "crop {}x{} at {},{} does not fit the {w}x{h} image",
                c.width, c.height, c.x, c.y
            ),
        });
    }
    let mut out = image::imageops::crop_imm(&img, c.x, c.y, c.width, c.height).to_image();
    if let Some(grid) = heat {
        for (x, y, px) in out.enumerate_pixels_mut() {
            let nx = (f64::from(c.x + x) + 0.5) / f64::from(w);
            let ny = (f64::from(c.y + y) + 0.5) / f64::from(h);
            let a = 0.6 * grid.sample(nx, ny);
            let tint = [255.0, 0.0, 0.0];
            for (ch, t) in px.0.iter_mut().zip(tint) {
                *ch = (f64::from(*ch) * (1.0 - a) + t * a).round() as u8;
            }
        }
    }
    Ok(encode_png(&out))
}

fn overlay_grid(
    ws: &Workspace,
    shot: &Screenshot,
    fixations: &[recapit_core::attention::Fixation],
) -> Result<Option<HeatGrid>> {
    let Some(overlay) = &shot.heatmap_overlay else {
        return Ok(None);
    };
    Ok(match overlay.kind {
        SignalKind::Attention => Some(ws.attention_heatmap(fixations, overlay.span)),
        SignalKind::Activity => ws.activity_heatmaps(&[overlay.span])?.pop().flatten(),
    })
}

fn render_card(
    ws: &Workspace,
    card: &TopicCard,
    span: &TimeSpan,
    events: &[NoteEvent],
    out: &mut String,
) -> Result<()> {
    let p = &ws.project;
    let _ = writeln!(
        out,
        "<section class=\"card\" id=\"{}\">\n<h2>{}</h2>\n<p>{} · {}</p>",
        escape(&card.segment_id),
        escape(&card.title),
        escape(&card.segment_id),
        span_label(span)
    );
    if !card.quotes.is_empty() {
        out.push_str("<h3>Quotes</h3>\n");
        for q in &card.quotes {
            let _ = writeln!(out, "<p class=\"quote\">{}</p>", escape(&q.rendered));
        }
    }
    if !card.notes.is_empty() {
        out.push_str("<h3>Notes</h3>\n<ul>");
        for n in &card.notes {
            let _ = write!(out, "<li>{}</li>", escape(n));
        }
        out.push_str("</ul>\n");
    }
    let in_span: Vec<&NoteEvent> = events.iter().filter(|e| e.t >= span.start && e.t < span.end).collect();
    if !in_span.is_empty() {
        out.push_str("<h3>Note changes</h3>\n<ul>");
        for e in in_span {
            let _ = write!(
                out,
                "<li>{} {} ({:?}): +{} / −{} lines</li>",
                clock(e.t),
                escape(&e.author),
                e.kind,
                e.added_lines.len(),
                e.removed_lines.len()
            );
        }
        out.push_str("</ul>\n");
    }
    if !card.screenshots.is_empty() {
        let fixations = if card.screenshots.iter().any(|s| s.heatmap_overlay.is_some()) {
            ws.fixations()?
        } else {
            Vec::new()
        };
        out.push_str("<h3>Screenshots</h3>\n");
        for shot in &card.screenshots {
            let grid = overlay_grid(ws, shot, &fixations)?;
            let data = render_screenshot(ws, shot, grid.as_ref())?;
            let _ = writeln!(
                out,
                "<figure><img alt=\"{}\" src=\"data:image/png;base64,{data}\"><figcaption>{}{}</figcaption></figure>",
                escape(&shot.image_path),
                escape(&shot.image_path),
                shot.heatmap_overlay
                    .map(|o| format!(" with {} heatmap {}", o.kind.as_str(), span_label(&o.span)))
                    .unwrap_or_default()
            );
        }
    }
    let s = &card.stats;
    let role_label = |id: &str| {
        p.roles
            .iter()
            .find(|r| r.id == id)
            .map(|r| {
                format!(
                    "<span class=\"swatch\" style=\"background:{}\"></span>{}",
                    r.color.hex(),
                    escape(&r.label)
                )
            })
            .unwrap_or_else(|| escape(id))
    };
    let aoi_label = |id: &str| {
        p.aois
            .iter()
            .find(|a| a.id == id)
            .map(|a| {
                format!(
                    "<span class=\"swatch\" style=\"background:{}\"></span>{}",
                    a.color.hex(),
                    escape(&a.label)
                )
            })
            .unwrap_or_else(|| escape(id))
    };
    out.push_str("<h3>Statistics</h3>\n");
    let rows = |m: &std::collections::BTreeMap<String, f64>, label: &dyn Fn(&str) -> String| {
        m.iter().map(|(k, v)| (label(k), *v)).collect::<Vec<_>>()
    };
    table(out, "Speaking time by role", &rows(&s.speaking_by_role, &role_label));
    table(
        out,
        "Speaking share by role",
        &rows(&donut_shares(&s.speaking_by_role), &role_label),
    );
    table(out, "Attention by AOI", &rows(&s.attention_by_aoi, &aoi_label));
    if !s.activity_by_aoi.is_empty() {
        table(out, "Activity by AOI", &rows(&s.activity_by_aoi, &aoi_label));
    }
    out.push_str("</section>\n");
    Ok(())
}

/// Full report; `generated` is written on its own line and is the only
/// time-dependent content.
pub fn render(ws: &Workspace, generated: &str) -> Result<String> {
    let p = &ws.project;
    let state = &p.authoring;
    let marked = compress_view(&state.segments);
    if marked.is_empty() {
        return Err(Error::invalid(
            "no marked cards to export; mark at least one card first",
        ));
    }
    let events: Vec<NoteEvent> = if ws.derived().path(derived::NOTE_EVENTS).exists() {
        ws.note_events()?
    } else {
        Vec::new()
    };

    let mut out = String::new();
    let _ = writeln!(
        out,
        "<!DOCTYPE html>\n<html lang=\"en\">\n<head>\n<meta charset=\"utf-8\">"
    );
    let _ = writeln!(out, "{GENERATED_PREFIX} content=\"{}\">", escape(generated));
    let _ = writeln!(
        out,
        "<title>{}</title>\n<style>{STYLE}</style>\n</head>\n<body>",
        escape(&p.title)
    );
    let _ = writeln!(out, "<h1>{}</h1>", escape(&p.title));
    let _ = writeln!(
        out,
        "<p>Project {} · session start {} · duration {}</p>",
        escape(&p.id),
        escape(&p.session_start),
        clock(p.duration)
    );
    out.push_str("<table><tr><th>Participant</th><th>Role</th></tr>");
    for part in &p.participants {
        let role = p
            .roles
            .iter()
            .find(|r| r.id == part.role_id)
            .map_or("", |r| r.label.as_str());
        let _ = write!(
            out,
            "<tr><td><span class=\"swatch\" style=\"background:{}\"></span>{}</td><td>{}</td></tr>",
            part.color.hex(),
            escape(&part.display_name),
            escape(role)
        );
    }
    out.push_str("</table>\n");
    let cfg = &p.segmentation_config;
    let _ = writeln!(
        out,
        "<p>Segmentation: {} signal, β = {}, bins of {} s, gap {} s, similarity {}</p>",
        cfg.signal_kind.as_str(),
        cfg.penalty_beta,
        cfg.bin_width,
        cfg.gap_threshold,
        cfg.similarity_threshold
    );
    out.push_str("<h2>Timeline</h2>\n<table><tr><th>Segment</th><th>Span</th><th>Title</th><th>Marked</th></tr>");
    for (seg, card) in state.segments.iter().zip(&state.cards) {
        let _ = write!(
            out,
            "<tr><td>{}</td><td>{}</td><td>{}</td><td>{}</td></tr>",
            escape(&seg.id),
            span_label(&seg.span),
            escape(&card.title),
            if seg.marked { "✓" } else { "" }
        );
    }
    out.push_str("</table>\n");
    for seg in marked {
        let card = state
            .cards
            .iter()
            .find(|c| c.segment_id == seg.id)
            .ok_or_else(|| Error::invalid(format!("segment '{}' has no card", seg.id)))?;
        render_card(ws, card, &seg.span, &events, &mut out)?;
    }
    out.push_str("</body>\n</html>\n");
    Ok(out)
}
