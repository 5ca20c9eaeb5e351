//! Regenerates the synthetic workshop under `fixtures/workshop`.
//!
//! Three participants work through three phases at a shared board: sketching
//! (0–40 s), data (40–80 s, with a change of conversation topic at 60 s) and
//! ideas (80–120 s). Gaze, a 32×24 overhead camera at 2 fps, hand landmarks,
//! a transcript and two authors' note snapshots are generated from a fixed
//! seed, then the pipeline runs once and the first card is authored so the
//! committed manifest carries a marked card.
//!
//! ```text
//! cargo run -p recapit --example make_fixture
//! ```

use std::fmt::Write;
use std::fs;
use std::path::{Path, PathBuf};

use image::codecs::pnm::{PnmEncoder, PnmSubtype, SampleEncoding};
use image::{ExtendedColorType, ImageEncoder, Rgb, RgbImage};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use recapit::pipeline::{self, SegmentOverrides};
use recapit::providers::ProviderConfig;
use recapit_core::cards::{apply_mutation, CropRect, HeatmapOverlay, Mutation, Screenshot};
use recapit_core::model::{
    Aoi, AuthoringState, Participant, Rgb as Color, Role, SegmentationConfig, SignalKind, SourceDescriptor, SourceKind,
    TimeSpan, WorkshopProject, MANIFEST_VERSION,
};
use recapit_core::{Homography, Point};

const DURATION: f64 = 120.0;
const W: u32 = 32;
const H: u32 = 24;

/// AOI rectangles in working-area coordinates.
const SKETCH: [f64; 4] = [0.05, 0.10, 0.45, 0.90];
const DATA: [f64; 4] = [0.55, 0.10, 0.95, 0.45];
const IDEAS: [f64; 4] = [0.55, 0.55, 0.95, 0.90];

fn phase(t: f64) -> usize {
    match t {
        t if t < 40.0 => 0,
        t if t < 80.0 => 1,
        _ => 2,
    }
}

fn rect_of(phase: usize) -> [f64; 4] {
    [SKETCH, DATA, IDEAS][phase]
}

fn aoi(id: &str, label: &str, r: [f64; 4], color: Color) -> Aoi {
    Aoi {
        id: id.into(),
        label: label.into(),
        polygon: vec![
            Point::new(r[0], r[1]),
            Point::new(r[2], r[1]),
            Point::new(r[2], r[3]),
            Point::new(r[0], r[3]),
        ],
        color,
    }
}

fn inside(rng: &mut ChaCha8Rng, r: [f64; 4], margin: f64) -> (f64, f64) {
    (
        rng.gen_range(r[0] + margin..r[2] - margin),
        rng.gen_range(r[1] + margin..r[3] - margin),
    )
}

fn write(path: &Path, bytes: &[u8]) {
    fs::create_dir_all(path.parent().unwrap()).unwrap();
    fs::write(path, bytes).unwrap();
}

/// 30 Hz gaze; the file's clock runs `offset` seconds behind the session.
fn gaze_csv(rng: &mut ChaCha8Rng, offset: f64) -> String {
    let mut out = String::from("t,x,y,valid\n");
    let mut target = (0.5, 0.5);
    let mut until = 0.0;
    let n = (DURATION * 30.0) as usize;
    for i in 0..n {
        let t = i as f64 / 30.0;
        if t >= until {
            let r = if rng.gen_bool(0.8) {
                rect_of(phase(t))
            } else {
                [SKETCH, DATA, IDEAS][rng.gen_range(0..3)]
            };
            target = if rng.gen_bool(0.1) {
                (rng.gen_range(0.46..0.54), rng.gen())
            } else {
                inside(rng, r, 0.03)
            };
            until = t + rng.gen_range(0.3..1.2);
        }
        if rng.gen_bool(0.02) {
            let _ = writeln!(out, "{:.4},NaN,NaN,0", t - offset);
            continue;
        }
        let x = target.0 + rng.gen_range(-0.006..0.006);
        let y = target.1 + rng.gen_range(-0.006..0.006);
        let _ = writeln!(out, "{:.4},{x:.5},{y:.5},1", t - offset);
    }
    out
}

fn pgm(pixels: &[u8]) -> Vec<u8> {
    let mut out = Vec::new();
    PnmEncoder::new(&mut out)
        .with_subtype(PnmSubtype::Graymap(SampleEncoding::Binary))
        .write_image(pixels, W, H, ExtendedColorType::L8)
        .unwrap();
    out
}

/// Overhead frames with a bright hand blob moving inside the active area,
/// plus matching landmarks. The hand leaves the board from 62 s to 70 s.
fn frames_and_landmarks(rng: &mut ChaCha8Rng, dir: &Path) -> String {
    let mut index = String::from("file,t\n");
    let mut landmarks = String::new();
    let mut hand = (0.25, 0.5);
    for i in 0..(DURATION * 2.0) as usize {
        let t = i as f64 * 0.5;
        let away = (62.0..70.0).contains(&t);
        if i % 3 == 0 {
            hand = inside(rng, rect_of(phase(t)), 0.08);
        }
        let px: Vec<u8> = (0..H)
            .flat_map(|y| (0..W).map(move |x| (x, y)))
            .map(|(x, y)| {
                let nx = (f64::from(x) + 0.5) / f64::from(W);
                let ny = (f64::from(y) + 0.5) / f64::from(H);
                let near = (nx - hand.0).abs() < 0.08 && (ny - hand.1).abs() < 0.1;
                if near && !away {
                    230
                } else {
                    60 + ((x * 3 + y * 5) % 11) as u8
                }
            })
            .collect();
        let name = format!("f{i:04}.pgm");
        write(&dir.join("frames").join(&name), &pgm(&px));
        let _ = writeln!(index, "{name},{t}");
        if !away {
            let jitter = rng.gen_range(-0.01..0.01);
            let _ = writeln!(
                landmarks,
                "{{\"t\":{:.3},\"points\":[[{:.4},{:.4}],[{:.4},{:.4}]]}}",
                t + 0.04,
                hand.0 + jitter,
                hand.1,
                hand.0 - 0.03,
                hand.1 + 0.04 + jitter
            );
        }
    }
    write(&dir.join("frames/index.csv"), index.as_bytes());
    landmarks
}

const TOPICS: [&[&str]; 4] = [
    &[
        "sketch",
        "layout",
        "storyboard",
        "draw",
        "panel",
        "arrows",
        "segmentation",
        "outline",
    ],
    &[
        "dataset",
        "columns",
        "values",
        "measurements",
        "table",
        "missing",
        "units",
        "sensor",
    ],
    &[
        "timeline",
        "river",
        "chronology",
        "events",
        "streams",
        "history",
        "ordering",
        "milestones",
    ],
    &[
        "ideas",
        "brainstorm",
        "sticky",
        "cluster",
        "vote",
        "opportunities",
        "priorities",
        "wishlist",
    ],
];
const FILLER: &[&str] = &[
    "we", "could", "maybe", "this", "here", "the", "think", "about", "really", "and",
];

fn topic_at(t: f64) -> usize {
    match t {
        t if t < 40.0 => 0,
        t if t < 60.0 => 1,
        t if t < 80.0 => 2,
        _ => 3,
    }
}

fn transcript(rng: &mut ChaCha8Rng) -> String {
    let speakers = ["mod1", "exp1", "exp2"];
    let mut out = String::new();
    let mut t = 0.8;
    let mut k = 0;
    while t < DURATION - 3.0 {
        let len = rng.gen_range(1.5..4.0_f64).min(DURATION - t - 0.5);
        let topic = topic_at(t);
        let words: Vec<&str> = (0..rng.gen_range(5..10))
            .map(|_| {
                if rng.gen_bool(0.8) {
                    TOPICS[topic][rng.gen_range(0..TOPICS[topic].len())]
                } else {
                    FILLER[rng.gen_range(0..FILLER.len())]
                }
            })
            .collect();
        let mut text = words.join(" ");
        text[..1].make_ascii_uppercase();
        let _ = writeln!(
            out,
            "{}",
            serde_json::json!({
                "id": format!("u{k:03}"),
                "speaker": speakers[rng.gen_range(0..3)],
                "start": (t * 100.0_f64).round() / 100.0,
                "end": ((t + len) * 100.0_f64).round() / 100.0,
                "text": format!("{text}."),
            })
        );
        k += 1;
        let next = t + len;
        // Long pauses break dialogue chunks; one always falls on the topic change at 60 s.
        let gap = if topic_at(next + 2.5) != topic || rng.gen_bool(0.15) {
            rng.gen_range(2.0..3.0)
        } else {
            rng.gen_range(0.2..1.0)
        };
        t = next + gap;
    }
    out
}

fn notes(dir: &Path) {
    let snaps = [
        ("mod1__20260312T090030Z.txt", "Agenda\n- sketch the layout\n"),
        (
            "mod1__20260312T090100Z.txt",
            "Agenda\n- sketch the layout\n- look at the dataset\n",
        ),
        (
            "mod1__20260312T090130Z.txt",
            "Agenda\n- sketch the layout\n- look at the dataset\n- timeline idea\n",
        ),
        (
            "mod1__20260312T090155Z.txt",
            "Agenda\n- look at the dataset\n- timeline idea: river\n- vote on ideas\n",
        ),
        ("exp2__2026-03-12T09-00-50Z.txt", "units missing in sensor table\n"),
        (
            "exp2__2026-03-12T09-01-40Z.txt",
            "units missing in sensor table\ncluster stickies by theme\n",
        ),
    ];
    for (name, text) in snaps {
        write(&dir.join("notes").join(name), text.as_bytes());
    }
}

fn board_image(dir: &Path) {
    let mut img = RgbImage::from_pixel(320, 240, Rgb([245, 245, 240]));
    for (r, c) in [(SKETCH, [230, 120, 60]), (DATA, [60, 140, 220]), (IDEAS, [90, 180, 90])] {
        let (x0, y0) = ((r[0] * 320.0) as u32, (r[1] * 240.0) as u32);
        let (x1, y1) = ((r[2] * 320.0) as u32, (r[3] * 240.0) as u32);
        for y in y0..y1 {
            for x in x0..x1 {
                let edge = x == x0 || y == y0 || x == x1 - 1 || y == y1 - 1;
                img.put_pixel(x, y, if edge { Rgb([40, 40, 40]) } else { Rgb(c) });
            }
        }
    }
    let path = dir.join("screens/board.png");
    fs::create_dir_all(path.parent().unwrap()).unwrap();
    img.save(path).unwrap();
}

fn source(kind: SourceKind, path: &str, offset: f64) -> SourceDescriptor {
    SourceDescriptor {
        kind,
        path: path.into(),
        time_offset: offset,
        participant_id: None,
        homography: None,
    }
}

fn main() {
    let dir: PathBuf = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/workshop");
    if dir.exists() {
        fs::remove_dir_all(&dir).unwrap();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(2024);

    let gaze_offsets = [("mod1", 0.0), ("exp1", 0.5), ("exp2", -0.25)];
    for (pid, offset) in gaze_offsets {
        write(
            &dir.join(format!("gaze/{pid}.csv")),
            gaze_csv(&mut rng, offset).as_bytes(),
        );
    }
    let landmarks = frames_and_landmarks(&mut rng, &dir);
    write(&dir.join("landmarks.jsonl"), landmarks.as_bytes());
    write(&dir.join("transcript.jsonl"), transcript(&mut rng).as_bytes());
    notes(&dir);
    board_image(&dir);

    let mut sources = vec![source(SourceKind::Transcript, "transcript.jsonl", 0.0)];
    for (pid, offset) in gaze_offsets {
        let mut s = source(SourceKind::Gaze, &format!("gaze/{pid}.csv"), offset);
        s.participant_id = Some(pid.into());
        sources.push(s);
    }
    let mut frames = source(SourceKind::Frames, "frames/index.csv", 0.0);
    frames.homography = Some(Homography::pixel_normalizer(W, H));
    sources.push(frames);
    sources.push(source(SourceKind::Landmarks, "landmarks.jsonl", 0.0));
    sources.push(source(SourceKind::Notes, "notes", 0.0));

    let project = WorkshopProject {
        version: MANIFEST_VERSION,
        id: "cvo-synthetic-01".into(),
        title: "Synthetic visualization-opportunities workshop".into(),
        session_start: "2026-03-12T09:00:00Z".into(),
        duration: DURATION,
        aspect_ratio: Some(1.5),
        participants: vec![
            Participant {
                id: "mod1".into(),
                display_name: "Moderator".into(),
                role_id: "moderator".into(),
                color: Color(200, 80, 40),
            },
            Participant {
                id: "exp1".into(),
                display_name: "Expert A".into(),
                role_id: "expert".into(),
                color: Color(40, 90, 200),
            },
            Participant {
                id: "exp2".into(),
                display_name: "Expert B".into(),
                role_id: "expert".into(),
                color: Color(60, 160, 220),
            },
        ],
        roles: vec![
            Role {
                id: "moderator".into(),
                label: "Moderator".into(),
                color: Color(220, 90, 40),
            },
            Role {
                id: "expert".into(),
                label: "Domain expert".into(),
                color: Color(50, 110, 210),
            },
        ],
        aois: vec![
            aoi("sketch", "Sketch area", SKETCH, Color(230, 120, 60)),
            aoi("data", "Data sheet", DATA, Color(60, 140, 220)),
            aoi("ideas", "Idea wall", IDEAS, Color(90, 180, 90)),
        ],
        sources,
        segmentation_config: SegmentationConfig::default(),
        analysis: Default::default(),
        authoring: AuthoringState::default(),
    };
    recapit::save_project(&project, &dir).unwrap();

    pipeline::ingest(&dir).unwrap();
    let segments = pipeline::segment(&dir, SegmentOverrides::default(), &ProviderConfig::offline()).unwrap();
    let mut ws = recapit::Workspace::open(&dir).unwrap();
    let utterances = ws.utterances().unwrap();
    let first = &segments[0];
    let quote = utterances
        .iter()
        .find(|u| u.span.start >= first.span.start && u.span.start < first.span.end)
        .unwrap();
    let mutations = [
        Mutation::SetMarked {
            card_id: first.id.clone(),
            marked: true,
        },
        Mutation::SetTitle {
            card_id: first.id.clone(),
            title: "Sketching the storyboard".into(),
        },
        Mutation::AddQuote {
            card_id: first.id.clone(),
            utterance_id: quote.id.clone(),
        },
        Mutation::AddNote {
            card_id: first.id.clone(),
            text: "Everyone converges on the sketch area early.".into(),
        },
        Mutation::AddScreenshot {
            card_id: first.id.clone(),
            screenshot: Screenshot {
                image_path: "screens/board.png".into(),
                image_size: [320, 240],
                crop: CropRect {
                    x: 0,
                    y: 0,
                    width: 160,
                    height: 240,
                },
                heatmap_overlay: Some(HeatmapOverlay {
                    kind: SignalKind::Attention,
                    span: TimeSpan::new(first.span.start, first.span.end),
                }),
            },
        },
    ];
    for m in mutations {
        ws.project.authoring = apply_mutation(&ws.project.authoring, m, &utterances).unwrap();
    }
    ws.save().unwrap();
    fs::remove_dir_all(dir.join("derived")).unwrap();
    println!("{} segments; fixture written to {}", segments.len(), dir.display());
    for s in &segments {
        println!(
            "  {} {:>6.1}-{:<6.1} {:?} {}",
            s.id, s.span.start, s.span.end, s.origin, s.title
        );
    }
}
