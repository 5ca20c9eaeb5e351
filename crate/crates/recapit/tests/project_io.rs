mod common;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use recapit::project::{load_project, save_project};
use recapit::Error;
use recapit_core::cards::{apply_mutation, Mutation};
use recapit_core::model::{AuthoringState, TimeSpan};
use recapit_core::segmentation::{SegmentOrigin, TopicSegment};

#[test]
fn fixture_loads_and_resaves_byte_identically() {
    let (_tmp, dir) = common::fixture_copy();
    let before = std::fs::read(dir.join("project.json")).unwrap();
    let project = load_project(&dir).unwrap();
    save_project(&project, &dir).unwrap();
    assert_eq!(std::fs::read(dir.join("project.json")).unwrap(), before);
}

#[test]
fn random_authoring_states_round_trip() {
    let (_tmp, dir) = common::fixture_copy();
    let base = load_project(&dir).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..20 {
        let mut cuts: Vec<f64> = (0..4).map(|_| rng.gen_range(1.0..119.0)).collect();
        cuts.sort_by(f64::total_cmp);
        let bounds: Vec<f64> = std::iter::once(0.0).chain(cuts).chain([base.duration]).collect();
        let segments: Vec<TopicSegment> = bounds
            .windows(2)
            .enumerate()
            .map(|(i, w)| TopicSegment {
                id: format!("seg-{:03}", i + 1),
                span: TimeSpan::new(w[0], w[1]),
                title: format!("Topic {}", rng.gen_range(0..1000)),
                origin: if rng.gen_bool(0.5) {
                    SegmentOrigin::Initial
                } else {
                    SegmentOrigin::Refined
                },
                marked: false,
            })
            .collect();
        let mut state = AuthoringState::from_segments(segments);
        for _ in 0..rng.gen_range(0..8) {
            let card_id = format!("seg-{:03}", rng.gen_range(1..=5));
            let m = match rng.gen_range(0..3) {
                0 => Mutation::SetTitle {
                    card_id,
                    title: format!("Retitled \"{}\" ✓", rng.gen::<u16>()),
                },
                1 => Mutation::AddNote {
                    card_id,
                    text: "line one\nline two".into(),
                },
                _ => Mutation::SetMarked {
                    card_id,
                    marked: rng.gen_bool(0.5),
                },
            };
            state = apply_mutation(&state, m, &[]).unwrap();
        }
        let mut project = base.clone();
        project.authoring = state;
        save_project(&project, &dir).unwrap();
        assert_eq!(load_project(&dir).unwrap(), project);
    }
}

#[test]
fn schema_errors_name_the_field() {
    let (_tmp, dir) = common::fixture_copy();
    common::edit_manifest(&dir, |v| v["participants"][1]["role_id"] = serde_json::json!(7));
    match load_project(&dir) {
        Err(Error::Schema { field, .. }) => assert_eq!(field, "participants[1].role_id"),
        other => panic!("expected a schema error, got {other:?}"),
    }
}

#[test]
fn aoi_vertex_outside_unit_square_is_an_invariant_error() {
    let (_tmp, dir) = common::fixture_copy();
    common::edit_manifest(&dir, |v| v["aois"][0]["polygon"][1] = serde_json::json!([1.2, 0.5]));
    let err = load_project(&dir).unwrap_err();
    assert!(matches!(err, Error::Invariant(_)), "{err}");
    assert!(err.to_string().contains("sketch"), "{err}");
    assert_eq!(err.exit_code(), 1);
}

#[test]
fn missing_source_file_is_reported() {
    let (_tmp, dir) = common::fixture_copy();
    std::fs::remove_file(dir.join("gaze/exp1.csv")).unwrap();
    let err = load_project(&dir).unwrap_err();
    match &err {
        Error::MissingFile { path } => assert!(path.ends_with("gaze/exp1.csv")),
        other => panic!("expected a missing-file error, got {other:?}"),
    }
    assert_eq!(err.exit_code(), 2);
}

#[test]
fn unknown_manifest_fields_are_rejected() {
    let (_tmp, dir) = common::fixture_copy();
    common::edit_manifest(&dir, |v| v["colour_scheme"] = serde_json::json!("dark"));
    assert!(matches!(load_project(&dir), Err(Error::Schema { .. })));
}
