//! Skin-colour region tracking.
//!
//! The pipeline runs per frame:
//!
//! 1. [`segmentation::segment`] splits an RGB frame into 4-connected regions
//!    whose pixels stay within a threshold `eta` of the region's seed colour.
//! 2. [`segmentation::region_stats`] averages each region's colour.
//! 3. A 3-3-1 perceptron ([`skin_mlp`]) scores every region mean; regions
//!    scoring above `rho` are skin.
//! 4. [`detector::detect`] returns the skin mask and the centroid of all skin
//!    pixels.
//!
//! [`pantilt_sim`] closes the loop: a simulated pan/tilt camera looks at a
//! window of a larger world image and steps one unit per axis per frame to
//! bring the centroid to the middle of the view.

pub mod cli;
pub mod detector;
pub mod frame_io;
pub mod pantilt_sim;
pub mod rng;
pub mod scene;
pub mod segmentation;
pub mod skin_mlp;

pub use detector::{centroid, detect, DetectConfig, Detection, Mask};
pub use frame_io::{false_colour, load_ppm, save_ppm, Frame, PpmError, Rgb};
pub use pantilt_sim::{
    converged_at, displacement, render_view, run_tracking, PanTiltState, Shape, SimError,
    StepLimits, Target, TraceRow, Waypoint, World,
};
pub use segmentation::{region_stats, segment, segment_counted, Eta, RegionStats, Segmentation};
pub use skin_mlp::{
    classify, train, Mlp, Params, SkinModel, SkinSample, TrainConfig, TrainOutcome,
};
