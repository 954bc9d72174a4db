//! Simulated pan/tilt camera closing the loop on the skin centroid.
//!
//! The camera sees a `view_w` x `view_h` window of a larger world image. Its
//! top-left corner sits at `home + (pan_steps * s, tilt_steps * s)` where `s`
//! is the step-to-pixel gain:
//!
//! ```text
//!   world x ──────────────────────────────▶
//!   │   home            home + (s, 0)
//!   │   ┌────────────┐  ┌────────────┐
//!   │   │   view     │  │  pan + 1   │   target appears s px further left
//!   ▼   └────────────┘  └────────────┘
//!   world y
//! ```
//!
//! A positive pan step moves the window right, so a target right of centre
//! (`dx > 0`) is brought toward the centre by stepping pan in the sign of
//! `dx`. Tilt and `dy` behave the same way downward.
//!
//! Each frame moves each axis by at most one step, and only when the
//! displacement on that axis exceeds the deadband.

use std::collections::BTreeMap;
use std::io;

use serde::Deserialize;
use thiserror::Error;

use crate::detector::{detect, DetectConfig};
use crate::frame_io::{Frame, Rgb};
use crate::skin_mlp::Mlp;

pub const DEFAULT_VIEW_W: usize = 320;
pub const DEFAULT_VIEW_H: usize = 240;
pub const DEFAULT_GAIN: u32 = 4;
pub const DEFAULT_DEADBAND: u32 = 4;

#[derive(Debug, Error, PartialEq)]
pub enum SimError {
    #[error("step-to-pixel gain must be at least 1")]
    ZeroGain,
    #[error("{axis} limits are inverted: min {min} > max {max}")]
    InvertedLimits {
        axis: &'static str,
        min: i32,
        max: i32,
    },
    #[error("{axis} position {steps} outside limits [{min}, {max}]")]
    OutOfLimits {
        axis: &'static str,
        steps: i32,
        min: i32,
        max: i32,
    },
    #[error("view {view_w}x{view_h} does not fit in {world_w}x{world_h} world")]
    ViewTooLarge {
        view_w: usize,
        view_h: usize,
        world_w: usize,
        world_h: usize,
    },
    #[error(
        "{axis} envelope [{lo}, {hi}) in world pixels exceeds world extent {extent}; \
         enlarge the world or narrow the step limits"
    )]
    Envelope {
        axis: &'static str,
        lo: i64,
        hi: i64,
        extent: usize,
    },
    #[error("target {0} has no waypoints")]
    NoWaypoints(u32),
    #[error("motion script: {0}")]
    Script(String),
    #[error("frame count must be at least 1")]
    NoFrames,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StepLimits {
    pub min: i32,
    pub max: i32,
}

impl StepLimits {
    pub fn new(min: i32, max: i32) -> Self {
        Self { min, max }
    }

    pub fn contains(&self, steps: i32) -> bool {
        (self.min..=self.max).contains(&steps)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PanTiltState {
    pub pan_steps: i32,
    pub tilt_steps: i32,
    pub pan_limits: StepLimits,
    pub tilt_limits: StepLimits,
    pub pixels_per_step: u32,
    pub deadband: u32,
}

impl PanTiltState {
    /// Centred state with the given limits, default gain and deadband.
    pub fn new(pan_limits: StepLimits, tilt_limits: StepLimits) -> Self {
        Self {
            pan_steps: 0,
            tilt_steps: 0,
            pan_limits,
            tilt_limits,
            pixels_per_step: DEFAULT_GAIN,
            deadband: DEFAULT_DEADBAND,
        }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        if self.pixels_per_step == 0 {
            return Err(SimError::ZeroGain);
        }
        for (axis, steps, lim) in [
            ("pan", self.pan_steps, self.pan_limits),
            ("tilt", self.tilt_steps, self.tilt_limits),
        ] {
            if lim.min > lim.max {
                return Err(SimError::InvertedLimits {
                    axis,
                    min: lim.min,
                    max: lim.max,
                });
            }
            if !lim.contains(steps) {
                return Err(SimError::OutOfLimits {
                    axis,
                    steps,
                    min: lim.min,
                    max: lim.max,
                });
            }
        }
        Ok(())
    }

    /// One control tick: each axis moves one step toward the sign of its
    /// displacement when the magnitude exceeds the deadband, clamped to its
    /// limits.
    pub fn step(&self, (dx, dy): (f64, f64)) -> Self {
        let band = f64::from(self.deadband);
        let tick = |steps: i32, d: f64, lim: StepLimits| -> i32 {
            if d.abs() > band {
                (steps + if d > 0.0 { 1 } else { -1 }).clamp(lim.min, lim.max)
            } else {
                steps
            }
        };
        Self {
            pan_steps: tick(self.pan_steps, dx, self.pan_limits),
            tilt_steps: tick(self.tilt_steps, dy, self.tilt_limits),
            ..*self
        }
    }
}

/// Signed offset of `centroid` from the view centre `(view_w / 2, view_h / 2)`.
pub fn displacement(centroid: (f64, f64), view_w: usize, view_h: usize) -> (f64, f64) {
    (
        centroid.0 - view_w as f64 / 2.0,
        centroid.1 - view_h as f64 / 2.0,
    )
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Shape {
    /// Filled rectangle covering `[cx - half_w, cx + half_w]` x
    /// `[cy - half_h, cy + half_h]`.
    Rect { half_w: u32, half_h: u32 },
    /// Filled disc: `(x - cx)^2 + (y - cy)^2 <= radius^2`.
    Disc { radius: u32 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Waypoint {
    pub frame: usize,
    pub x: f64,
    pub y: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Target {
    pub id: u32,
    pub shape: Shape,
    pub colour: Rgb,
    /// Sorted by frame.
    pub waypoints: Vec<Waypoint>,
}

impl Target {
    pub fn stationary(id: u32, shape: Shape, colour: Rgb, x: f64, y: f64) -> Self {
        Self {
            id,
            shape,
            colour,
            waypoints: vec![Waypoint { frame: 0, x, y }],
        }
    }

    /// World position at `frame`, linearly interpolated between waypoints and
    /// held constant before the first and after the last.
    pub fn position(&self, frame: usize) -> (f64, f64) {
        let wps = &self.waypoints;
        let first = wps[0];
        if frame <= first.frame {
            return (first.x, first.y);
        }
        for pair in wps.windows(2) {
            let (a, b) = (pair[0], pair[1]);
            if frame <= b.frame {
                let t = (frame - a.frame) as f64 / (b.frame - a.frame) as f64;
                return (a.x + t * (b.x - a.x), a.y + t * (b.y - a.y));
            }
        }
        let last = wps[wps.len() - 1];
        (last.x, last.y)
    }

    /// Paints the target into `canvas`, whose top-left corner is at world
    /// position `origin`. Positions are rounded to the nearest pixel.
    fn paint(&self, canvas: &mut Frame, origin: (usize, usize), frame: usize) {
        let (px, py) = self.position(frame);
        let cx = px.round() as i64 - origin.0 as i64;
        let cy = py.round() as i64 - origin.1 as i64;
        let (rx, ry) = match self.shape {
            Shape::Rect { half_w, half_h } => (i64::from(half_w), i64::from(half_h)),
            Shape::Disc { radius } => (i64::from(radius), i64::from(radius)),
        };
        let (w, h) = (canvas.width() as i64, canvas.height() as i64);
        for y in (cy - ry).max(0)..=(cy + ry).min(h - 1) {
            for x in (cx - rx).max(0)..=(cx + rx).min(w - 1) {
                let inside = match self.shape {
                    Shape::Rect { .. } => true,
                    Shape::Disc { radius } => {
                        let (ddx, ddy) = (x - cx, y - cy);
                        ddx * ddx + ddy * ddy <= i64::from(radius) * i64::from(radius)
                    }
                };
                if inside {
                    canvas.set(x as usize, y as usize, self.colour);
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct World {
    pub image: Frame,
    pub view_w: usize,
    pub view_h: usize,
    /// Top-left corner of the view window at zero steps.
    pub home: (usize, usize),
    pub targets: Vec<Target>,
}

impl World {
    /// World with the default 320x240 view centred in `image`.
    pub fn new(image: Frame, targets: Vec<Target>) -> Result<Self, SimError> {
        Self::with_view(image, DEFAULT_VIEW_W, DEFAULT_VIEW_H, targets)
    }

    pub fn with_view(
        image: Frame,
        view_w: usize,
        view_h: usize,
        targets: Vec<Target>,
    ) -> Result<Self, SimError> {
        if view_w == 0 || view_h == 0 || view_w > image.width() || view_h > image.height() {
            return Err(SimError::ViewTooLarge {
                view_w,
                view_h,
                world_w: image.width(),
                world_h: image.height(),
            });
        }
        if let Some(t) = targets.iter().find(|t| t.waypoints.is_empty()) {
            return Err(SimError::NoWaypoints(t.id));
        }
        let home = ((image.width() - view_w) / 2, (image.height() - view_h) / 2);
        Ok(Self {
            image,
            view_w,
            view_h,
            home,
            targets,
        })
    }

    /// Widest step limits whose windows stay inside the image at `gain`.
    pub fn max_limits(&self, gain: u32) -> (StepLimits, StepLimits) {
        let s = gain.max(1) as usize;
        let axis = |home: usize, view: usize, extent: usize| {
            StepLimits::new(-((home / s) as i32), ((extent - view - home) / s) as i32)
        };
        (
            axis(self.home.0, self.view_w, self.image.width()),
            axis(self.home.1, self.view_h, self.image.height()),
        )
    }

    /// Checks that every window reachable from `state`'s limits lies inside
    /// the image.
    pub fn check_envelope(&self, state: &PanTiltState) -> Result<(), SimError> {
        state.validate()?;
        let s = i64::from(state.pixels_per_step);
        for (axis, home, view, extent, lim) in [
            (
                "pan",
                self.home.0,
                self.view_w,
                self.image.width(),
                state.pan_limits,
            ),
            (
                "tilt",
                self.home.1,
                self.view_h,
                self.image.height(),
                state.tilt_limits,
            ),
        ] {
            let lo = home as i64 + i64::from(lim.min) * s;
            let hi = home as i64 + i64::from(lim.max) * s + view as i64;
            if lo < 0 || hi > extent as i64 {
                return Err(SimError::Envelope {
                    axis,
                    lo,
                    hi,
                    extent,
                });
            }
        }
        Ok(())
    }

    /// Top-left world coordinate of the view window for `state`.
    pub fn window_origin(&self, state: &PanTiltState) -> (usize, usize) {
        let s = i64::from(state.pixels_per_step);
        let x = self.home.0 as i64 + i64::from(state.pan_steps) * s;
        let y = self.home.1 as i64 + i64::from(state.tilt_steps) * s;
        (x as usize, y as usize)
    }
}

/// The camera image at `frame_index`: targets composited over the world,
/// cropped to the window selected by `state`.
///
/// # Panics
/// If the window falls outside the world; [`World::check_envelope`] rules
/// that out for every state within the limits.
pub fn render_view(world: &World, state: &PanTiltState, frame_index: usize) -> Frame {
    let origin = world.window_origin(state);
    // Painting after the crop gives the same pixels as painting the whole
    // world first.
    let mut view = world
        .image
        .crop(origin.0, origin.1, world.view_w, world.view_h);
    for t in &world.targets {
        t.paint(&mut view, origin, frame_index);
    }
    view
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow {
    pub frame_index: usize,
    /// Position after this frame's actuation.
    pub pan_steps: i32,
    pub tilt_steps: i32,
    pub centroid: Option<(f64, f64)>,
    /// Displacement that drove this frame's actuation; absent with the
    /// centroid.
    pub displacement: Option<(f64, f64)>,
    pub skin_pixel_count: usize,
}

/// Runs the sense, decide, actuate loop for `frames` frames.
pub fn run_tracking(
    world: &World,
    net: &Mlp,
    detect_cfg: &DetectConfig,
    state0: PanTiltState,
    frames: usize,
) -> Result<Vec<TraceRow>, SimError> {
    if frames == 0 {
        return Err(SimError::NoFrames);
    }
    world.check_envelope(&state0)?;
    let mut state = state0;
    let mut trace = Vec::with_capacity(frames);
    for t in 0..frames {
        let view = render_view(world, &state, t);
        let det = detect(&view, net, detect_cfg);
        let d = det
            .centroid
            .map(|c| displacement(c, world.view_w, world.view_h));
        if let Some(d) = d {
            state = state.step(d);
        }
        trace.push(TraceRow {
            frame_index: t,
            pan_steps: state.pan_steps,
            tilt_steps: state.tilt_steps,
            centroid: det.centroid,
            displacement: d,
            skin_pixel_count: det.skin_pixel_count,
        });
    }
    Ok(trace)
}

/// First frame from which no actuation happens through the end of the run,
/// or `None` if the last frame still stepped.
pub fn converged_at(state0: &PanTiltState, trace: &[TraceRow]) -> Option<usize> {
    let mut prev = (state0.pan_steps, state0.tilt_steps);
    let mut last_step = None;
    for row in trace {
        let cur = (row.pan_steps, row.tilt_steps);
        if cur != prev {
            last_step = Some(row.frame_index);
        }
        prev = cur;
    }
    match last_step {
        None => Some(0),
        Some(f) if f + 1 < trace.len() => Some(f + 1),
        Some(_) => None,
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

/// `frame,pan_steps,tilt_steps,mu_x,mu_y,dx,dy,skin_pixels`; absent values
/// are empty fields.
pub fn write_trace_csv<W: io::Write>(out: W, trace: &[TraceRow]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "frame",
        "pan_steps",
        "tilt_steps",
        "mu_x",
        "mu_y",
        "dx",
        "dy",
        "skin_pixels",
    ])?;
    for r in trace {
        w.write_record([
            r.frame_index.to_string(),
            r.pan_steps.to_string(),
            r.tilt_steps.to_string(),
            opt(r.centroid.map(|c| c.0)),
            opt(r.centroid.map(|c| c.1)),
            opt(r.displacement.map(|d| d.0)),
            opt(r.displacement.map(|d| d.1)),
            r.skin_pixel_count.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Deserialize)]
struct ScriptRecord {
    frame: usize,
    target_id: u32,
    x: f64,
    y: f64,
}

/// Reads a `frame,target_id,x,y` motion script into per-target waypoint
/// lists, ordered by target id, each sorted by frame.
pub fn read_script<R: io::Read>(input: R) -> Result<BTreeMap<u32, Vec<Waypoint>>, SimError> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(input);
    let mut out: BTreeMap<u32, Vec<Waypoint>> = BTreeMap::new();
    for rec in rdr.deserialize() {
        let rec: ScriptRecord = rec.map_err(|e| SimError::Script(e.to_string()))?;
        if !(rec.x.is_finite() && rec.y.is_finite()) {
            return Err(SimError::Script(format!(
                "target {} frame {}: non-finite position",
                rec.target_id, rec.frame
            )));
        }
        out.entry(rec.target_id).or_default().push(Waypoint {
            frame: rec.frame,
            x: rec.x,
            y: rec.y,
        });
    }
    for (id, wps) in &mut out {
        wps.sort_by_key(|w| w.frame);
        if wps.windows(2).any(|p| p[0].frame == p[1].frame) {
            return Err(SimError::Script(format!(
                "target {id} has two waypoints for the same frame"
            )));
        }
    }
    Ok(out)
}
