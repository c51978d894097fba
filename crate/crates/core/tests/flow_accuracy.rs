mod common;

use afv_core::flow::{estimate_flow, estimate_video_flow, FlowParams};
use afv_core::tensor::{FlowField, Frame, FrameSequence, PixelLayout};
use common::{interior_epe, mean_magnitude, Lcg, PeriodicTexture};

#[test]
fn identical_frames_give_near_zero_flow() {
    let tex = PeriodicTexture::new(128, 11);
    let f = tex.frame(0.0, 0.0);
    let flow = estimate_flow(&f, &f, &FlowParams::default()).unwrap();
    assert!(mean_magnitude(&flow) < 0.05, "{}", mean_magnitude(&flow));
}

#[test]
fn recovers_translations() {
    let params = FlowParams::default();
    for (i, &t) in [(3.0, 0.0), (-2.0, 1.0), (1.5, -2.5), (0.0, 4.0)].iter().enumerate() {
        let tex = PeriodicTexture::new(128, 100 + i as u64);
        let flow = estimate_flow(&tex.frame(0.0, 0.0), &tex.frame(t.0, t.1), &params).unwrap();
        let epe = interior_epe(&flow, t, 16);
        assert!(epe < 0.3, "translation {t:?}: epe {epe}");
    }
}

#[test]
fn swapping_frames_negates_flow() {
    let params = FlowParams::default();
    let tex = PeriodicTexture::new(128, 7);
    let (a, b) = (tex.frame(0.0, 0.0), tex.frame(2.5, -1.0));
    let fwd = estimate_flow(&a, &b, &params).unwrap();
    let bwd = estimate_flow(&b, &a, &params).unwrap();
    let sum = FlowField::from_fn(128, 128, |x, y| {
        let (u0, v0) = fwd.get(x, y);
        let (u1, v1) = bwd.get(x, y);
        (u0 + u1, v0 + v1)
    });
    let err = interior_epe(&sum, (0.0, 0.0), 16);
    assert!(err < 0.5, "{err}");
}

#[test]
fn deterministic_output() {
    let params = FlowParams::default();
    let tex = PeriodicTexture::new(64, 3);
    let (a, b) = (tex.frame(0.0, 0.0), tex.frame(1.0, 1.0));
    assert_eq!(
        estimate_flow(&a, &b, &params).unwrap(),
        estimate_flow(&a, &b, &params).unwrap()
    );
}

#[test]
fn video_flow_counts_and_static_video() {
    let tex = PeriodicTexture::new(64, 5);
    let frames = vec![tex.frame(0.0, 0.0); 5];
    let video = FrameSequence::new(frames, 25.0).unwrap();
    let flows = estimate_video_flow(&video, &FlowParams::default()).unwrap();
    assert_eq!(flows.len(), 4);
    for f in &flows {
        assert!(mean_magnitude(f) < 0.05);
    }
}

/// Textured square moving right 2 px/frame over a static textured
/// background.
#[test]
fn moving_square_over_static_background() {
    let n = 128;
    let bg = PeriodicTexture::new(n, 21);
    let fg = PeriodicTexture::new(n, 22);
    let (side, y0) = (48usize, 40usize);
    let frame = |t: usize| {
        let x0 = 20 + 2 * t;
        let data = (0..n * n)
            .map(|i| {
                let (x, y) = (i % n, i / n);
                let inside = x >= x0 && x < x0 + side && y >= y0 && y < y0 + side;
                if inside {
                    fg.value((x - 2 * t) as f64, y as f64) as f32
                } else {
                    bg.value(x as f64, y as f64) as f32
                }
            })
            .collect();
        Frame::new(n, n, PixelLayout::Gray, data).unwrap()
    };
    let video = FrameSequence::new((0..4).map(frame).collect(), 25.0).unwrap();
    let flows = estimate_video_flow(&video, &FlowParams::default()).unwrap();
    assert_eq!(flows.len(), 3);
    for (t, flow) in flows.iter().enumerate() {
        let x0 = 20 + 2 * t;
        // Interior of the square, away from its edges.
        let mut inner = (0.0, 0usize);
        let mut outer = (0.0, 0usize);
        for y in 0..n {
            for x in 0..n {
                let (u, v) = flow.get(x, y);
                let in_core = x >= x0 + 12 && x < x0 + side - 12 && y >= y0 + 12 && y < y0 + side - 12;
                let far = x + 12 < x0 || x >= x0 + side + 14 || y + 12 < y0 || y >= y0 + side + 12;
                let border = x < 12 || y < 12 || x >= n - 12 || y >= n - 12;
                if in_core {
                    inner.0 += (u as f64 - 2.0).hypot(v as f64);
                    inner.1 += 1;
                } else if far && !border {
                    outer.0 += (u as f64).hypot(v as f64);
                    outer.1 += 1;
                }
            }
        }
        let (ei, eo) = (inner.0 / inner.1 as f64, outer.0 / outer.1 as f64);
        assert!(ei < 0.5, "frame {t}: square epe {ei}");
        assert!(eo < 0.5, "frame {t}: background epe {eo}");
    }
}

#[test]
fn no_nan_on_random_noise() {
    let mut rng = Lcg(9);
    let mk = |rng: &mut Lcg| {
        let data = (0..64 * 64).map(|_| rng.next_f64() as f32).collect();
        Frame::new(64, 64, PixelLayout::Gray, data).unwrap()
    };
    let (a, b) = (mk(&mut rng), mk(&mut rng));
    let flow = estimate_flow(&a, &b, &FlowParams::default()).unwrap();
    assert!(flow.u().iter().chain(flow.v()).all(|x| x.is_finite()));
}
