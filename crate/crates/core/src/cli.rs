//! `skintrack` command-line interface.
//!
//! Every subcommand prints machine-readable `key=value` lines on standard
//! output and writes files only to the paths it is given.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{ensure, Context, Result};
use clap::{Args, Parser, Subcommand};

use crate::detector::{detect, DetectConfig};
use crate::frame_io::{false_colour, load_ppm, save_ppm, Frame, Rgb};
use crate::pantilt_sim::{
    converged_at, read_script, render_view, run_tracking, write_trace_csv, PanTiltState, Shape,
    StepLimits, Target, World, DEFAULT_DEADBAND, DEFAULT_GAIN,
};
use crate::segmentation::{segment, Eta};
use crate::skin_mlp::{
    generate_negatives, interleave_classes, read_samples, train, Mlp, Provenance, SkinModel,
    TrainConfig, DEFAULT_EPOCHS, DEFAULT_LEARNING_RATE, DEFAULT_MOMENTUM, DEFAULT_RHO,
};

#[derive(Debug, Parser)]
#[command(
    name = "skintrack",
    version,
    about = "Skin-colour segmentation, detection and pan/tilt tracking"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Segment a frame into 4-connected regions and report the region count.
    Segment(SegmentArgs),
    /// Train the 3-3-1 skin classifier and write a model file.
    Train(TrainArgs),
    /// Detect skin regions in a frame and report their centroid.
    Detect(DetectArgs),
    /// Simulate closed-loop pan/tilt tracking over a scripted world.
    Track(TrackArgs),
}

fn parse_eta(s: &str) -> Result<Eta, String> {
    let v: u16 = s.parse().map_err(|e| format!("{e}"))?;
    Eta::new(v).map_err(|e| e.to_string())
}

fn parse_rho(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if v > 0.0 && v < 1.0 {
        Ok(v)
    } else {
        Err(format!("rho must be in (0, 1), got {v}"))
    }
}

fn parse_positive<T: FromStr + PartialOrd + Default + std::fmt::Display>(
    s: &str,
) -> Result<T, String>
where
    T::Err: std::fmt::Display,
{
    let v: T = s.parse().map_err(|e: T::Err| e.to_string())?;
    if v > T::default() {
        Ok(v)
    } else {
        Err(format!("must be positive, got {v}"))
    }
}

fn parse_learning_rate(s: &str) -> Result<f64, String> {
    let v: f64 = parse_positive(s)?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err("must be finite".into())
    }
}

fn parse_momentum(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if (0.0..1.0).contains(&v) {
        Ok(v)
    } else {
        Err(format!("momentum must be in [0, 1), got {v}"))
    }
}

fn parse_rgb(s: &str) -> Result<Rgb, String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 3 {
        return Err(format!("expected R,G,B, got {s:?}"));
    }
    let mut out = [0u8; 3];
    for (o, p) in out.iter_mut().zip(parts) {
        *o = p.parse().map_err(|e| format!("channel {p:?}: {e}"))?;
    }
    Ok(out)
}

fn parse_view(s: &str) -> Result<(usize, usize), String> {
    let (w, h) = s
        .split_once('x')
        .ok_or_else(|| format!("expected WxH, got {s:?}"))?;
    Ok((parse_positive(w)?, parse_positive(h)?))
}

/// Step limits as `PAN_MIN:PAN_MAX,TILT_MIN:TILT_MAX`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LimitsArg(pub StepLimits, pub StepLimits);

impl FromStr for LimitsArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let axis = |a: &str| -> Result<StepLimits, String> {
            let (lo, hi) = a
                .split_once(':')
                .ok_or_else(|| format!("expected MIN:MAX, got {a:?}"))?;
            let lo: i32 = lo.trim().parse().map_err(|e| format!("{lo:?}: {e}"))?;
            let hi: i32 = hi.trim().parse().map_err(|e| format!("{hi:?}: {e}"))?;
            if lo > hi {
                return Err(format!("min {lo} greater than max {hi}"));
            }
            if lo > 0 || hi < 0 {
                return Err(format!("limits {lo}:{hi} must include the home position 0"));
            }
            Ok(StepLimits::new(lo, hi))
        };
        let (pan, tilt) = s
            .split_once(',')
            .ok_or_else(|| format!("expected PAN_MIN:PAN_MAX,TILT_MIN:TILT_MAX, got {s:?}"))?;
        Ok(Self(axis(pan)?, axis(tilt)?))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum ShapeArg {
    Disc,
    Rect,
}

#[derive(Debug, Args)]
pub struct SegmentArgs {
    /// Input frame (binary PPM, P6).
    #[arg(long)]
    pub input: PathBuf,
    /// Region threshold in [0, 256]; a neighbour joins when its largest
    /// channel difference from the seed is below it.
    #[arg(long, default_value = "28", value_parser = parse_eta)]
    pub eta: Eta,
    /// Write the label map as `x,y,label` CSV.
    #[arg(long)]
    pub labels: Option<PathBuf>,
    /// Write a false-colour rendering of the regions (PPM).
    #[arg(long)]
    pub falsecolor: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Skin samples, CSV `r,g,b,label`.
    #[arg(long)]
    pub samples: PathBuf,
    /// Extra non-skin samples, CSV `r,g,b,label`.
    #[arg(long, conflicts_with = "gen_negatives")]
    pub negatives: Option<PathBuf>,
    /// Generate this many random non-skin samples from the seed.
    #[arg(long)]
    pub gen_negatives: Option<usize>,
    /// Output model (JSON).
    #[arg(long)]
    pub model: PathBuf,
    /// Learning rate. Default 0.6.
    #[arg(long, default_value_t = DEFAULT_LEARNING_RATE, value_parser = parse_learning_rate)]
    pub lr: f64,
    /// Momentum ("acceleration factor"). Default 0.7.
    #[arg(long, default_value_t = DEFAULT_MOMENTUM, value_parser = parse_momentum)]
    pub momentum: f64,
    /// Full passes over the samples. Default 200.
    #[arg(long, default_value_t = DEFAULT_EPOCHS, value_parser = parse_positive::<usize>)]
    pub epochs: usize,
    /// Seed for weight initialization and negative generation.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Skin threshold stored in the model. Default 0.5.
    #[arg(long, default_value_t = DEFAULT_RHO, value_parser = parse_rho)]
    pub rho: f64,
}

#[derive(Debug, Args)]
pub struct DetectArgs {
    /// Input frame (binary PPM, P6).
    #[arg(long)]
    pub input: PathBuf,
    /// Trained model (JSON).
    #[arg(long)]
    pub model: PathBuf,
    /// Segmentation threshold. Default 28.
    #[arg(long, default_value = "28", value_parser = parse_eta)]
    pub eta: Eta,
    /// Skin threshold; overrides the model's stored value.
    #[arg(long, value_parser = parse_rho)]
    pub rho: Option<f64>,
    /// Write the skin mask (PPM, white = skin).
    #[arg(long)]
    pub mask: Option<PathBuf>,
    /// Write per-region scores as CSV.
    #[arg(long)]
    pub scores: Option<PathBuf>,
    /// Smallest region, in pixels, that may be classified as skin. Default 1 (no filter).
    #[arg(long, default_value_t = 1)]
    pub min_region: usize,
}

#[derive(Debug, Args)]
pub struct TrackArgs {
    /// World image the camera looks into (PPM).
    #[arg(long)]
    pub world: PathBuf,
    /// Motion script, CSV `frame,target_id,x,y` in world pixels.
    #[arg(long)]
    pub script: PathBuf,
    /// Trained model (JSON).
    #[arg(long)]
    pub model: PathBuf,
    /// Number of frames to simulate.
    #[arg(long, value_parser = parse_positive::<usize>)]
    pub frames: usize,
    /// Output trace CSV.
    #[arg(long)]
    pub trace: PathBuf,
    /// Segmentation threshold. Default 28.
    #[arg(long, default_value = "28", value_parser = parse_eta)]
    pub eta: Eta,
    /// Skin threshold; overrides the model's stored value.
    #[arg(long, value_parser = parse_rho)]
    pub rho: Option<f64>,
    /// View size. Default 320x240.
    #[arg(long, default_value = "320x240", value_parser = parse_view)]
    pub view: (usize, usize),
    /// Pixels of view translation per motor step (simulation parameter).
    #[arg(long, default_value_t = DEFAULT_GAIN, value_parser = parse_positive::<u32>)]
    pub gain: u32,
    /// Displacement, in pixels, below which no step is taken (simulation parameter).
    #[arg(long, default_value_t = DEFAULT_DEADBAND)]
    pub deadband: u32,
    /// Step limits `PAN_MIN:PAN_MAX,TILT_MIN:TILT_MAX`. Default: the widest
    /// range that keeps the view inside the world.
    #[arg(long, allow_hyphen_values = true)]
    pub limits: Option<LimitsArg>,
    /// Write every rendered view as `frame_NNNNN.ppm` into this directory.
    #[arg(long)]
    pub dump_frames: Option<PathBuf>,
    /// Shape drawn for each scripted target.
    #[arg(long, value_enum, default_value_t = ShapeArg::Disc)]
    pub target_shape: ShapeArg,
    /// Disc radius or rectangle half-size, in pixels.
    #[arg(long, default_value_t = 12)]
    pub target_size: u32,
    /// Target colour `R,G,B`. Default 35,126,183, the first skin database sample.
    #[arg(long, default_value = "35,126,183", value_parser = parse_rgb)]
    pub target_rgb: Rgb,
}

fn read_file(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).with_context(|| format!("reading {}", path.display()))
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))
}

fn read_frame(path: &Path) -> Result<Frame> {
    load_ppm(&read_file(path)?).with_context(|| format!("decoding {}", path.display()))
}

fn read_model(path: &Path) -> Result<SkinModel> {
    let text = String::from_utf8(read_file(path)?)
        .with_context(|| format!("{} is not UTF-8", path.display()))?;
    SkinModel::from_json(&text).with_context(|| format!("loading model {}", path.display()))
}

fn csv_bytes(f: impl FnOnce(&mut Vec<u8>) -> csv::Result<()>) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    f(&mut buf)?;
    Ok(buf)
}

pub fn cmd_segment(args: &SegmentArgs, out: &mut dyn Write) -> Result<()> {
    let frame = read_frame(&args.input)?;
    let seg = segment(&frame, args.eta);
    if let Some(path) = &args.labels {
        write_file(path, &csv_bytes(|b| seg.write_csv(b))?)?;
    }
    if let Some(path) = &args.falsecolor {
        write_file(path, &save_ppm(&false_colour(&seg)))?;
    }
    writeln!(out, "regions={}", seg.region_count())?;
    Ok(())
}

pub fn cmd_train(args: &TrainArgs, out: &mut dyn Write) -> Result<()> {
    let cfg = TrainConfig {
        learning_rate: args.lr,
        momentum: args.momentum,
        epochs: args.epochs,
        seed: args.seed,
    };
    cfg.validate()?;
    let file = fs::File::open(&args.samples)
        .with_context(|| format!("reading {}", args.samples.display()))?;
    let mut samples =
        read_samples(file).with_context(|| format!("parsing {}", args.samples.display()))?;
    let mut generated = 0;
    if let Some(path) = &args.negatives {
        let file = fs::File::open(path).with_context(|| format!("reading {}", path.display()))?;
        samples.extend(read_samples(file).with_context(|| format!("parsing {}", path.display()))?);
    }
    if let Some(n) = args.gen_negatives {
        let negatives = generate_negatives(&samples, n, args.seed);
        generated = negatives.len();
        samples.extend(negatives);
    }

    let samples = interleave_classes(&samples);
    let outcome = train(&Mlp::init(args.seed), &samples, &cfg)?;
    let positives = samples.iter().filter(|s| s.skin).count();
    let model = SkinModel {
        net: outcome.net.clone(),
        rho: args.rho,
        provenance: Some(Provenance {
            samples: samples.len(),
            positives,
            negatives: samples.len() - positives,
            generated_negatives: generated,
            epochs: cfg.epochs,
            learning_rate: cfg.learning_rate,
            momentum: cfg.momentum,
            seed: cfg.seed,
            initial_mse: outcome.initial_mse,
            final_mse: outcome.final_mse(),
        }),
    };
    write_file(&args.model, model.to_json().as_bytes())?;
    writeln!(out, "samples={}", samples.len())?;
    writeln!(out, "mse_first={}", outcome.history[0])?;
    writeln!(out, "mse_last={}", outcome.final_mse())?;
    writeln!(out, "accuracy={}", outcome.net.accuracy(&samples, args.rho))?;
    Ok(())
}

pub fn cmd_detect(args: &DetectArgs, out: &mut dyn Write) -> Result<()> {
    let model = read_model(&args.model)?;
    let frame = read_frame(&args.input)?;
    let cfg = DetectConfig {
        eta: args.eta,
        rho: args.rho.unwrap_or(model.rho),
        min_region: args.min_region,
    };
    let det = detect(&frame, &model.net, &cfg);
    if let Some(path) = &args.mask {
        write_file(path, &save_ppm(&det.mask.to_frame()))?;
    }
    if let Some(path) = &args.scores {
        write_file(path, &csv_bytes(|b| det.write_scores_csv(b))?)?;
    }
    match det.centroid {
        Some((x, y)) => writeln!(out, "centroid={x},{y}")?,
        None => writeln!(out, "centroid=none")?,
    }
    Ok(())
}

pub fn cmd_track(args: &TrackArgs, out: &mut dyn Write) -> Result<()> {
    let model = read_model(&args.model)?;
    let image = read_frame(&args.world)?;
    let file = fs::File::open(&args.script)
        .with_context(|| format!("reading {}", args.script.display()))?;
    let script = read_script(file).with_context(|| format!("parsing {}", args.script.display()))?;
    ensure!(
        !script.is_empty(),
        "{} lists no targets",
        args.script.display()
    );

    let shape = match args.target_shape {
        ShapeArg::Disc => Shape::Disc {
            radius: args.target_size,
        },
        ShapeArg::Rect => Shape::Rect {
            half_w: args.target_size,
            half_h: args.target_size,
        },
    };
    let targets = script
        .into_iter()
        .map(|(id, waypoints)| Target {
            id,
            shape,
            colour: args.target_rgb,
            waypoints,
        })
        .collect();
    let (view_w, view_h) = args.view;
    let world = World::with_view(image, view_w, view_h, targets)?;
    let LimitsArg(pan, tilt) = args.limits.unwrap_or_else(|| {
        let (p, t) = world.max_limits(args.gain);
        LimitsArg(p, t)
    });
    let state0 = PanTiltState {
        pixels_per_step: args.gain,
        deadband: args.deadband,
        ..PanTiltState::new(pan, tilt)
    };
    world
        .check_envelope(&state0)
        .context("world smaller than the reachable view envelope")?;
    let cfg = DetectConfig {
        eta: args.eta,
        rho: args.rho.unwrap_or(model.rho),
        min_region: 1,
    };

    let trace = run_tracking(&world, &model.net, &cfg, state0, args.frames)?;
    write_file(&args.trace, &csv_bytes(|b| write_trace_csv(b, &trace))?)?;

    if let Some(dir) = &args.dump_frames {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        // Replay the poses: the view for frame t was taken at the pose left
        // by frame t - 1.
        let mut pose = state0;
        for row in &trace {
            let view = render_view(&world, &pose, row.frame_index);
            write_file(
                &dir.join(format!("frame_{:05}.ppm", row.frame_index)),
                &save_ppm(&view),
            )?;
            pose.pan_steps = row.pan_steps;
            pose.tilt_steps = row.tilt_steps;
        }
    }

    match converged_at(&state0, &trace) {
        Some(f) => writeln!(out, "converged_at={f}")?,
        None => writeln!(out, "converged_at=never")?,
    }
    if let Some(last) = trace.last() {
        writeln!(out, "final_pan={}", last.pan_steps)?;
        writeln!(out, "final_tilt={}", last.tilt_steps)?;
    }
    Ok(())
}

pub fn run(cli: &Cli, out: &mut dyn Write) -> Result<()> {
    match &cli.command {
        Command::Segment(a) => cmd_segment(a, out),
        Command::Train(a) => cmd_train(a, out),
        Command::Detect(a) => cmd_detect(a, out),
        Command::Track(a) => cmd_track(a, out),
    }
}
