use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use recapit_core::activity::{
    activity_heatmap, activity_series, ActivityParams, BackgroundModel, ForegroundMask, PixelLayout,
};
use recapit_core::model::{Aoi, Rgb, TimeSpan};
use recapit_core::stream::{GrayFrame, LandmarkFrame};
use recapit_core::Point;

fn random_frame(rng: &mut ChaCha8Rng, w: u32, h: u32) -> GrayFrame {
    // Mostly static background with a moving bright blob.
    let (bx, by) = (rng.gen_range(0..w), rng.gen_range(0..h));
    let r = rng.gen_range(1..4) as i64;
    let px = (0..h)
        .flat_map(|y| (0..w).map(move |x| (x, y)))
        .map(|(x, y)| {
            let inside = (x as i64 - bx as i64).abs() <= r && (y as i64 - by as i64).abs() <= r;
            if inside {
                220
            } else {
                40 + ((x + y) % 7) as u8
            }
        })
        .collect();
    GrayFrame::new(w, h, px).unwrap()
}

#[test]
fn background_mask_matches_scalar_recomputation() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let frames: Vec<_> = (0..40).map(|_| random_frame(&mut rng, 12, 9)).collect();
    let mut model = BackgroundModel::from_frame(&frames[0], 0.05, 25.0);
    let mut mean: Vec<f64> = frames[0].pixels.iter().map(|p| *p as f64).collect();
    for f in &frames[1..] {
        let mask = model.update(f).unwrap();
        for (i, px) in f.pixels.iter().enumerate() {
            let v = *px as f64;
            assert_eq!(mask.bits[i], (v - mean[i]).abs() > 25.0);
            mean[i] = (1.0 - 0.05) * mean[i] + 0.05 * v;
        }
    }
}

fn quad(id: &str, x0: f64, y0: f64, x1: f64, y1: f64) -> Aoi {
    Aoi {
        id: id.into(),
        label: id.into(),
        polygon: vec![
            Point::new(x0, y0),
            Point::new(x1, y0),
            Point::new(x1, y1),
            Point::new(x0, y1),
        ],
        color: Rgb(0, 0, 0),
    }
}

#[test]
fn activity_matches_dense_pixel_scan() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (w, h) = (16u32, 12u32);
    let aois = vec![quad("a", 0.0, 0.0, 0.5, 0.5), quad("b", 0.4, 0.3, 1.0, 1.0)];
    for _ in 0..10 {
        let frames: Vec<(f64, GrayFrame)> = (0..60)
            .map(|i| (i as f64 * 0.1, random_frame(&mut rng, w, h)))
            .collect();
        let mut landmarks: Vec<LandmarkFrame> = vec![];
        for i in 0..30 {
            if rng.gen_bool(0.7) {
                let n = rng.gen_range(0..3);
                landmarks.push(LandmarkFrame {
                    t: i as f64 * 0.2 + 0.03,
                    points: (0..n).map(|_| Point::new(rng.gen(), rng.gen())).collect(),
                });
            }
        }
        let session = TimeSpan::new(0.0, 6.0);
        let params = ActivityParams::default();
        let series = activity_series(&frames, &landmarks, &aois, session, 1.0, params, None).unwrap();

        // Oracle: replay the background by hand, classify every pixel centre against each AOI.
        let mut mean: Vec<f64> = frames[0].1.pixels.iter().map(|p| *p as f64).collect();
        let mut sums = vec![vec![0.0; aois.len()]; 6];
        let mut counts = [0usize; 6];
        for (idx, (t, f)) in frames.iter().enumerate() {
            let mask: Vec<bool> = if idx == 0 {
                vec![false; f.pixels.len()]
            } else {
                f.pixels
                    .iter()
                    .enumerate()
                    .map(|(i, p)| {
                        let fg = (*p as f64 - mean[i]).abs() > params.diff_threshold;
                        mean[i] = (1.0 - params.alpha) * mean[i] + params.alpha * *p as f64;
                        fg
                    })
                    .collect()
            };
            let nearest = landmarks
                .iter()
                .filter(|l| (l.t - t).abs() <= params.landmark_tolerance)
                .min_by(|a, b| (a.t - t).abs().total_cmp(&(b.t - t).abs()));
            let bin = (*t as usize).min(5);
            for (k, aoi) in aois.iter().enumerate() {
                let gated = nearest.is_some_and(|l| l.points.iter().any(|p| aoi.contains(*p)));
                let mut inside = 0;
                let mut fg = 0;
                for y in 0..h {
                    for x in 0..w {
                        let p = Point::new((x as f64 + 0.5) / w as f64, (y as f64 + 0.5) / h as f64);
                        if aoi.contains(p) {
                            inside += 1;
                            fg += mask[(y * w + x) as usize] as usize;
                        }
                    }
                }
                if gated {
                    sums[bin][k] += fg as f64 / inside as f64;
                }
            }
            counts[bin] += 1;
        }
        for b in 0..6 {
            #[allow(clippy::needless_range_loop)]
            for k in 0..aois.len() {
                let want = sums[b][k] / counts[b] as f64;
                assert!((series.values[b][k] - want).abs() < 1e-12, "bin {b} aoi {k}");
                assert!((0.0..=1.0).contains(&series.values[b][k]));
            }
        }
    }
}

#[test]
fn landmark_free_aoi_reads_zero_whatever_the_foreground() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let aois = vec![quad("left", 0.0, 0.0, 0.5, 1.0), quad("right", 0.5, 0.0, 1.0, 1.0)];
    let frames: Vec<(f64, GrayFrame)> = (0..50)
        .map(|i| {
            (
                i as f64 * 0.1,
                GrayFrame::filled(10, 10, if i % 2 == 0 { 0 } else { 255 }),
            )
        })
        .collect();
    // Hands only ever on the left half.
    let landmarks: Vec<_> = (0..50)
        .map(|i| LandmarkFrame {
            t: i as f64 * 0.1,
            points: vec![Point::new(rng.gen_range(0.0..0.45), rng.gen())],
        })
        .collect();
    let series = activity_series(
        &frames,
        &landmarks,
        &aois,
        TimeSpan::new(0.0, 5.0),
        1.0,
        ActivityParams::default(),
        None,
    )
    .unwrap();
    assert!(series.values.iter().all(|r| r[1] == 0.0));
    assert!(series.values.iter().skip(1).all(|r| r[0] > 0.5));
}

#[test]
fn identical_inputs_bit_identical_series() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let aois = vec![quad("a", 0.0, 0.0, 1.0, 1.0)];
    let frames: Vec<(f64, GrayFrame)> = (0..30)
        .map(|i| (i as f64 * 0.1, random_frame(&mut rng, 8, 8)))
        .collect();
    let landmarks = vec![LandmarkFrame {
        t: 1.0,
        points: vec![Point::new(0.5, 0.5)],
    }];
    let run = || {
        activity_series(
            &frames,
            &landmarks,
            &aois,
            TimeSpan::new(0.0, 3.0),
            0.5,
            ActivityParams::default(),
            None,
        )
        .unwrap()
    };
    let (a, b) = (run(), run());
    let bits =
        |s: &recapit_core::MultivariateSeries| s.values.iter().flatten().map(|v| v.to_bits()).collect::<Vec<_>>();
    assert_eq!(bits(&a), bits(&b));
}

#[test]
fn heatmap_matches_accumulation_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (w, h) = (20u32, 10u32);
    let layout = PixelLayout::new(w, h, None);
    let masks: Vec<ForegroundMask> = (0..15)
        .map(|_| ForegroundMask {
            width: w,
            height: h,
            bits: (0..w * h).map(|_| rng.gen_bool(0.2)).collect(),
        })
        .collect();
    let grid = activity_heatmap(&masks, &layout, 5, 5, TimeSpan::new(0.0, 1.0)).unwrap();
    // Each 5x5 grid cell covers a 4x2 pixel block.
    let mut rate = vec![0.0; 25];
    for m in &masks {
        for y in 0..h {
            for x in 0..w {
                if m.bits[(y * w + x) as usize] {
                    rate[((y / 2) * 5 + x / 4) as usize] += 1.0 / (8.0 * masks.len() as f64);
                }
            }
        }
    }
    let max = rate.iter().cloned().fold(0.0, f64::max);
    for (g, r) in grid.values.iter().zip(&rate) {
        assert!((g - r / max).abs() < 1e-9);
    }
}
