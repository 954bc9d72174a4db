mod common;

use skintrack::skin_mlp::REFERENCE_SKIN;
use skintrack::{classify, detect, region_stats, segment, DetectConfig, Eta, Frame};

use common::{blocky_frame, trained_net};

#[test]
fn centred_block_with_trained_net() {
    let net = trained_net();
    let mut f = Frame::filled(320, 240, [196, 64, 40]);
    for y in 115..=124 {
        for x in 155..=164 {
            f.set(x, y, REFERENCE_SKIN[0]);
        }
    }
    let d = detect(&f, &net, &DetectConfig::default());
    assert_eq!(d.skin_pixel_count, 100);
    assert_eq!(d.centroid, Some((159.5, 119.5)));
}

#[test]
fn detection_recomposes_from_components() {
    let net = trained_net();
    for seed in 0..10 {
        let frame = blocky_frame(48, 32, seed);
        for (eta, rho) in [(28u16, 0.5), (10, 0.3), (64, 0.05)] {
            let cfg = DetectConfig {
                eta: Eta::new(eta).unwrap(),
                rho,
                min_region: 1,
            };
            let d = detect(&frame, &net, &cfg);
            let seg = segment(&frame, cfg.eta);
            let stats = region_stats(&seg, &frame).unwrap();
            let skin: Vec<u32> = stats
                .iter()
                .filter(|s| classify(&net, s.mean_rgb, rho))
                .map(|s| s.label)
                .collect();
            assert_eq!(d.skin_labels, skin);

            // Brute-force mask and centroid.
            let (mut sx, mut sy, mut n) = (0.0, 0.0, 0usize);
            for y in 0..frame.height() {
                for x in 0..frame.width() {
                    let member = skin.contains(&seg.label_at(x, y));
                    assert_eq!(d.mask.get(x, y), member);
                    if member {
                        sx += x as f64;
                        sy += y as f64;
                        n += 1;
                    }
                }
            }
            assert_eq!(d.skin_pixel_count, n);
            match d.centroid {
                None => assert_eq!(n, 0),
                Some((cx, cy)) => {
                    assert!((cx - sx / n as f64).abs() < 1e-9);
                    assert!((cy - sy / n as f64).abs() < 1e-9);
                    assert!(cx >= 0.0 && cx <= (frame.width() - 1) as f64);
                    assert!(cy >= 0.0 && cy <= (frame.height() - 1) as f64);
                }
            }
        }
    }
}

#[test]
fn raising_rho_never_adds_labels() {
    let net = trained_net();
    let frame = blocky_frame(64, 48, 3);
    let mut prev: Option<Vec<u32>> = None;
    for i in 1..100 {
        let cfg = DetectConfig {
            rho: i as f64 / 100.0,
            eta: Eta::new(20).unwrap(),
            ..Default::default()
        };
        let labels = detect(&frame, &net, &cfg).skin_labels;
        if let Some(p) = &prev {
            assert!(labels.iter().all(|l| p.contains(l)));
        }
        prev = Some(labels);
    }
}

#[test]
fn detection_is_deterministic() {
    let net = trained_net();
    let frame = blocky_frame(64, 48, 9);
    let cfg = DetectConfig::default();
    assert_eq!(detect(&frame, &net, &cfg), detect(&frame, &net, &cfg));
}
