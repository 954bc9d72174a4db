#![allow(dead_code)]

use skintrack::rng::SplitMix64;
use skintrack::scene::clutter;
use skintrack::skin_mlp::{
    generate_negatives, interleave_classes, reference_skin_samples, train, Mlp, SkinSample,
    TrainConfig, REFERENCE_SKIN,
};
use skintrack::{Frame, PanTiltState, Shape, Target, Waypoint, World};

/// Seed used wherever a trained network is needed. It is the smallest seed
/// whose default-configuration run reaches 95% training accuracy.
pub const TRAIN_SEED: u64 = 3;

pub fn training_dataset(seed: u64) -> Vec<SkinSample> {
    let mut samples = reference_skin_samples();
    let negatives = generate_negatives(&samples, 42, seed);
    samples.extend(negatives);
    interleave_classes(&samples)
}

pub fn trained_net() -> Mlp {
    let cfg = TrainConfig {
        seed: TRAIN_SEED,
        ..Default::default()
    };
    train(&Mlp::init(TRAIN_SEED), &training_dataset(TRAIN_SEED), &cfg)
        .unwrap()
        .net
}

pub fn random_frame(width: usize, height: usize, seed: u64) -> Frame {
    let mut rng = SplitMix64::new(seed);
    Frame::from_fn(width, height, |_, _| {
        [rng.next_u8(), rng.next_u8(), rng.next_u8()]
    })
}

/// Random frame built from a few colours so regions are larger than a pixel.
pub fn blocky_frame(width: usize, height: usize, seed: u64) -> Frame {
    let mut rng = SplitMix64::new(seed);
    let palette: Vec<[u8; 3]> = (0..4)
        .map(|_| [rng.next_u8(), rng.next_u8(), rng.next_u8()])
        .collect();
    Frame::from_fn(width, height, |_, _| {
        let base = palette[(rng.next_u8() % 4) as usize];
        let n = rng.next_u8() % 16;
        base.map(|c| c.saturating_add(n))
    })
}

pub fn skin_disc() -> Shape {
    Shape::Disc { radius: 12 }
}

/// 960x720 clutter world with the default 320x240 view centred in it.
pub fn world_with(targets: Vec<Target>) -> World {
    World::new(clutter(960, 720, 40, 11), targets).unwrap()
}

/// World coordinates of the view centre at zero steps.
pub fn view_centre(world: &World) -> (f64, f64) {
    (
        (world.home.0 + world.view_w / 2) as f64,
        (world.home.1 + world.view_h / 2) as f64,
    )
}

pub fn static_target_at_offset(dx: f64, dy: f64) -> World {
    let mut world = world_with(vec![]);
    let (cx, cy) = view_centre(&world);
    world.targets.push(Target::stationary(
        1,
        skin_disc(),
        REFERENCE_SKIN[0],
        cx + dx,
        cy + dy,
    ));
    world
}

pub fn moving_target(waypoints: &[(usize, f64, f64)]) -> World {
    let mut world = world_with(vec![]);
    let (cx, cy) = view_centre(&world);
    world.targets.push(Target {
        id: 1,
        shape: skin_disc(),
        colour: REFERENCE_SKIN[0],
        waypoints: waypoints
            .iter()
            .map(|&(frame, x, y)| Waypoint {
                frame,
                x: cx + x,
                y: cy + y,
            })
            .collect(),
    });
    world
}

pub fn default_state(world: &World) -> PanTiltState {
    let (pan, tilt) = world.max_limits(4);
    PanTiltState::new(pan, tilt)
}

/// Depth-first recursive flood fill with the same scan order and predicate.
pub fn naive_labels(frame: &Frame, eta: u16) -> Vec<u32> {
    fn fill(
        frame: &Frame,
        labels: &mut [u32],
        x: usize,
        y: usize,
        seed: [u8; 3],
        eta: u16,
        l: u32,
    ) {
        labels[y * frame.width() + x] = l;
        let mut neighbours = Vec::with_capacity(4);
        if x > 0 {
            neighbours.push((x - 1, y));
        }
        if x + 1 < frame.width() {
            neighbours.push((x + 1, y));
        }
        if y > 0 {
            neighbours.push((x, y - 1));
        }
        if y + 1 < frame.height() {
            neighbours.push((x, y + 1));
        }
        for (u, v) in neighbours {
            if labels[v * frame.width() + u] != 0 {
                continue;
            }
            let p = frame.get(u, v);
            let diff = (0..3)
                .map(|c| (i32::from(p[c]) - i32::from(seed[c])).abs())
                .max()
                .unwrap();
            if diff < i32::from(eta) {
                fill(frame, labels, u, v, seed, eta, l);
            }
        }
    }

    let frame = frame.clone();
    std::thread::Builder::new()
        .stack_size(256 << 20)
        .spawn(move || {
            let mut labels = vec![0u32; frame.len()];
            let mut next = 0;
            for y in 0..frame.height() {
                for x in 0..frame.width() {
                    if labels[y * frame.width() + x] == 0 {
                        next += 1;
                        let seed = frame.get(x, y);
                        fill(&frame, &mut labels, x, y, seed, eta, next);
                    }
                }
            }
            labels
        })
        .unwrap()
        .join()
        .unwrap()
}
