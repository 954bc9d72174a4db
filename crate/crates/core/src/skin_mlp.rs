//! The 3-3-1 skin-colour perceptron.
//!
//! Inputs are the three colour channels divided by 255. Both layers use the
//! logistic sigmoid. Training minimises the per-sample squared error
//! `E = (target - output)^2 / 2` with online backpropagation and classical
//! momentum:
//!
//! ```text
//! delta(t) = -learning_rate * dE/dw + momentum * delta(t - 1)
//! w       += delta(t)
//! ```
//!
//! Samples are visited in dataset order; one epoch is one full pass.
//!
//! Weights are initialised from [`SplitMix64`] seeded with the caller's seed.
//! Sixteen draws `u - 0.5` (with `u` from `next_f64`) fill, in order, the
//! input-to-hidden matrix row by row (`w_ih[hidden][input]`), the hidden
//! biases, the hidden-to-output weights and the output bias.

use std::io;

use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};
use thiserror::Error;

use crate::frame_io::Rgb;
use crate::rng::SplitMix64;
use crate::segmentation::channel_distance;

pub const DEFAULT_LEARNING_RATE: f64 = 0.6;
pub const DEFAULT_MOMENTUM: f64 = 0.7;
pub const DEFAULT_EPOCHS: usize = 200;
pub const DEFAULT_RHO: f64 = 0.5;

/// Tag stored in model files for the `channel / 255` input scaling.
pub const NORMALIZATION: &str = "div255";

/// Candidates closer than this (Chebyshev, inclusive) to any positive are
/// rejected by [`generate_negatives`].
pub const NEGATIVE_EXCLUSION: u8 = 20;

/// Reference skin colours, as RGB.
pub const REFERENCE_SKIN: [Rgb; 8] = [
    [35, 126, 183],
    [85, 144, 190],
    [64, 128, 178],
    [80, 128, 160],
    [38, 106, 132],
    [38, 121, 152],
    [18, 108, 144],
    [0, 63, 102],
];

#[derive(Debug, Error)]
pub enum TrainError {
    #[error("training set is empty")]
    EmptyDataset,
    #[error(
        "training set contains only {0} samples; both skin and non-skin samples are required \
         (add negatives or generate them)"
    )]
    SingleClass(&'static str),
    #[error("learning rate must be positive and finite, got {0}")]
    LearningRate(f64),
    #[error("momentum must be in [0, 1), got {0}")]
    Momentum(f64),
    #[error("epochs must be at least 1")]
    ZeroEpochs,
}

#[derive(Debug, Error)]
pub enum SampleError {
    #[error("sample csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("sample csv line {line}: label must be 0 or 1, got {label}")]
    Label { line: u64, label: u8 },
}

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("model json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("model must be a JSON object")]
    NotAnObject,
    #[error("missing field `{0}`")]
    MissingField(&'static str),
    #[error("field `{field}` has wrong shape: expected {expected}, found {found}")]
    Shape {
        field: &'static str,
        expected: &'static str,
        found: String,
    },
    #[error("field `{0}` must be a finite number")]
    NonFinite(String),
    #[error("field `normalization` must be \"{NORMALIZATION}\", got {0:?}")]
    Normalization(String),
    #[error("field `rho` must be in (0, 1), got {0}")]
    Rho(f64),
    #[error("field `metadata`: {0}")]
    Metadata(serde_json::Error),
}

#[inline]
pub fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

#[inline]
pub fn normalize(rgb: [f64; 3]) -> [f64; 3] {
    rgb.map(|c| c / 255.0)
}

/// Every trainable value of the network. Also used for gradients and
/// momentum buffers, which share its shape.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Params {
    /// `w_ih[j][i]` connects input `i` to hidden unit `j`.
    pub w_ih: [[f64; 3]; 3],
    pub b_h: [f64; 3],
    pub w_ho: [f64; 3],
    pub b_o: f64,
}

impl Params {
    pub const LEN: usize = 16;

    pub fn zeros() -> Self {
        Self::default()
    }

    /// Flattened in initialization order.
    pub fn to_vec(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(Self::LEN);
        self.w_ih.iter().for_each(|row| v.extend_from_slice(row));
        v.extend_from_slice(&self.b_h);
        v.extend_from_slice(&self.w_ho);
        v.push(self.b_o);
        v
    }

    /// Inverse of [`Params::to_vec`].
    ///
    /// # Panics
    /// If `v.len() != Params::LEN`.
    pub fn from_slice(v: &[f64]) -> Self {
        assert_eq!(v.len(), Self::LEN);
        let mut p = Self::zeros();
        for j in 0..3 {
            p.w_ih[j].copy_from_slice(&v[3 * j..3 * j + 3]);
        }
        p.b_h.copy_from_slice(&v[9..12]);
        p.w_ho.copy_from_slice(&v[12..15]);
        p.b_o = v[15];
        p
    }

    fn values_mut(&mut self) -> impl Iterator<Item = &mut f64> {
        self.w_ih
            .iter_mut()
            .flatten()
            .chain(self.b_h.iter_mut())
            .chain(self.w_ho.iter_mut())
            .chain(std::iter::once(&mut self.b_o))
    }

    fn values(&self) -> impl Iterator<Item = &f64> {
        self.w_ih
            .iter()
            .flatten()
            .chain(self.b_h.iter())
            .chain(self.w_ho.iter())
            .chain(std::iter::once(&self.b_o))
    }

    pub fn is_finite(&self) -> bool {
        self.values().all(|v| v.is_finite())
    }

    /// Hidden activations and output for an already normalized input.
    pub fn activations(&self, x: [f64; 3]) -> ([f64; 3], f64) {
        let mut h = [0.0; 3];
        for j in 0..3 {
            let z = self.w_ih[j][0] * x[0]
                + self.w_ih[j][1] * x[1]
                + self.w_ih[j][2] * x[2]
                + self.b_h[j];
            h[j] = sigmoid(z);
        }
        let z = self.w_ho[0] * h[0] + self.w_ho[1] * h[1] + self.w_ho[2] * h[2] + self.b_o;
        (h, sigmoid(z))
    }

    /// Gradient of `(target - output)^2 / 2` for a normalized input.
    pub fn gradient(&self, x: [f64; 3], target: f64) -> Params {
        let (h, o) = self.activations(x);
        let delta_o = (o - target) * o * (1.0 - o);
        let mut g = Params::zeros();
        for j in 0..3 {
            g.w_ho[j] = delta_o * h[j];
            let delta_h = delta_o * self.w_ho[j] * h[j] * (1.0 - h[j]);
            g.b_h[j] = delta_h;
            for i in 0..3 {
                g.w_ih[j][i] = delta_h * x[i];
            }
        }
        g.b_o = delta_o;
        g
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SkinSample {
    pub rgb: Rgb,
    pub skin: bool,
}

impl SkinSample {
    pub fn new(rgb: Rgb, skin: bool) -> Self {
        Self { rgb, skin }
    }

    pub fn target(&self) -> f64 {
        if self.skin {
            1.0
        } else {
            0.0
        }
    }

    pub fn input(&self) -> [f64; 3] {
        normalize(self.rgb.map(f64::from))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub momentum: f64,
    pub epochs: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: DEFAULT_LEARNING_RATE,
            momentum: DEFAULT_MOMENTUM,
            epochs: DEFAULT_EPOCHS,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), TrainError> {
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return Err(TrainError::LearningRate(self.learning_rate));
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return Err(TrainError::Momentum(self.momentum));
        }
        if self.epochs == 0 {
            return Err(TrainError::ZeroEpochs);
        }
        Ok(())
    }
}

/// Network parameters plus the previous update of every parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    pub params: Params,
    velocity: Params,
}

impl Mlp {
    pub fn from_params(params: Params) -> Self {
        Self {
            params,
            velocity: Params::zeros(),
        }
    }

    pub fn init(seed: u64) -> Self {
        let mut rng = SplitMix64::new(seed);
        let mut params = Params::zeros();
        for v in params.values_mut() {
            *v = rng.next_f64() - 0.5;
        }
        Self::from_params(params)
    }

    /// Momentum buffers: the last update applied to each parameter.
    pub fn velocity(&self) -> &Params {
        &self.velocity
    }

    /// Network output for raw channel values in `[0, 255]`.
    pub fn forward(&self, rgb: [f64; 3]) -> f64 {
        self.params.activations(normalize(rgb)).1
    }

    pub fn forward_rgb(&self, rgb: Rgb) -> f64 {
        self.forward(rgb.map(f64::from))
    }

    pub fn gradient(&self, sample: &SkinSample) -> Params {
        self.params.gradient(sample.input(), sample.target())
    }

    /// Mean of `(target - output)^2` over `samples`.
    pub fn mse(&self, samples: &[SkinSample]) -> f64 {
        let sum: f64 = samples
            .iter()
            .map(|s| {
                let e = s.target() - self.forward_rgb(s.rgb);
                e * e
            })
            .sum();
        sum / samples.len() as f64
    }

    /// Fraction of samples on the correct side of `rho`.
    pub fn accuracy(&self, samples: &[SkinSample], rho: f64) -> f64 {
        let correct = samples
            .iter()
            .filter(|s| classify(self, s.rgb.map(f64::from), rho) == s.skin)
            .count();
        correct as f64 / samples.len() as f64
    }

    /// One online update with momentum.
    fn update(&mut self, sample: &SkinSample, learning_rate: f64, momentum: f64) {
        let g = self.gradient(sample);
        for ((w, v), g) in self
            .params
            .values_mut()
            .zip(self.velocity.values_mut())
            .zip(g.values())
        {
            *v = -learning_rate * g + momentum * *v;
            *w += *v;
        }
    }
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub net: Mlp,
    /// MSE of the network before the first update.
    pub initial_mse: f64,
    /// MSE over the whole dataset after each epoch.
    pub history: Vec<f64>,
}

impl TrainOutcome {
    pub fn final_mse(&self) -> f64 {
        *self.history.last().expect("at least one epoch")
    }
}

pub fn train(
    net: &Mlp,
    samples: &[SkinSample],
    cfg: &TrainConfig,
) -> Result<TrainOutcome, TrainError> {
    cfg.validate()?;
    if samples.is_empty() {
        return Err(TrainError::EmptyDataset);
    }
    if samples.iter().all(|s| s.skin) {
        return Err(TrainError::SingleClass("skin"));
    }
    if samples.iter().all(|s| !s.skin) {
        return Err(TrainError::SingleClass("non-skin"));
    }

    let mut net = net.clone();
    let initial_mse = net.mse(samples);
    let mut history = Vec::with_capacity(cfg.epochs);
    for _ in 0..cfg.epochs {
        for s in samples {
            net.update(s, cfg.learning_rate, cfg.momentum);
        }
        history.push(net.mse(samples));
    }
    Ok(TrainOutcome {
        net,
        initial_mse,
        history,
    })
}

/// Skin iff the network output is strictly greater than `rho`.
pub fn classify(net: &Mlp, mean_rgb: [f64; 3], rho: f64) -> bool {
    net.forward(mean_rgb) > rho
}

/// Draws `count` non-skin samples: uniform RGB triples (three `next_u8`
/// draws from [`SplitMix64`] seeded with `seed`, in r, g, b order), skipping
/// any within Chebyshev distance [`NEGATIVE_EXCLUSION`] of a positive.
pub fn generate_negatives(positives: &[SkinSample], count: usize, seed: u64) -> Vec<SkinSample> {
    let skin: Vec<Rgb> = positives.iter().filter(|s| s.skin).map(|s| s.rgb).collect();
    let mut rng = SplitMix64::new(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let rgb = [rng.next_u8(), rng.next_u8(), rng.next_u8()];
        if skin
            .iter()
            .all(|&p| channel_distance(p, rgb) > NEGATIVE_EXCLUSION)
        {
            out.push(SkinSample::new(rgb, false));
        }
    }
    out
}

/// Reorders `samples` so skin samples are spread evenly through the
/// non-skin ones, each class keeping its relative order. With `p` skin
/// samples out of `n`, skin sample `k` goes to the first slot `i` where
/// `(2k + 1) * n <= (2i + 1) * p`. The CLI trains on this order.
pub fn interleave_classes(samples: &[SkinSample]) -> Vec<SkinSample> {
    let (skin, other): (Vec<SkinSample>, Vec<SkinSample>) = samples.iter().partition(|s| s.skin);
    let (n, p) = (samples.len(), skin.len());
    let mut out = Vec::with_capacity(n);
    let (mut si, mut oi) = (0, 0);
    for i in 0..n {
        let due = si < p && (2 * si + 1) * n <= (2 * i + 1) * p;
        if due || oi == other.len() {
            out.push(skin[si]);
            si += 1;
        } else {
            out.push(other[oi]);
            oi += 1;
        }
    }
    out
}

pub fn reference_skin_samples() -> Vec<SkinSample> {
    REFERENCE_SKIN
        .iter()
        .map(|&rgb| SkinSample::new(rgb, true))
        .collect()
}

#[derive(Debug, Serialize, Deserialize)]
struct SampleRecord {
    r: u8,
    g: u8,
    b: u8,
    label: u8,
}

/// Reads `r,g,b,label` CSV with a header row.
pub fn read_samples<R: io::Read>(input: R) -> Result<Vec<SkinSample>, SampleError> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(input);
    let mut out = Vec::new();
    for rec in rdr.deserialize() {
        let rec: SampleRecord = rec?;
        let skin = match rec.label {
            0 => false,
            1 => true,
            label => {
                return Err(SampleError::Label {
                    line: out.len() as u64 + 2,
                    label,
                })
            }
        };
        out.push(SkinSample::new([rec.r, rec.g, rec.b], skin));
    }
    Ok(out)
}

pub fn write_samples<W: io::Write>(out: W, samples: &[SkinSample]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for s in samples {
        w.serialize(SampleRecord {
            r: s.rgb[0],
            g: s.rgb[1],
            b: s.rgb[2],
            label: u8::from(s.skin),
        })?;
    }
    w.flush()?;
    Ok(())
}

/// How a model was trained, recorded alongside the weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub samples: usize,
    pub positives: usize,
    pub negatives: usize,
    pub generated_negatives: usize,
    pub epochs: usize,
    pub learning_rate: f64,
    pub momentum: f64,
    pub seed: u64,
    pub initial_mse: f64,
    pub final_mse: f64,
}

/// A trained network together with its decision threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct SkinModel {
    pub net: Mlp,
    pub rho: f64,
    pub provenance: Option<Provenance>,
}

impl SkinModel {
    pub fn classify(&self, mean_rgb: [f64; 3]) -> bool {
        classify(&self.net, mean_rgb, self.rho)
    }

    /// Serializes to the JSON model document. Floats are written in shortest
    /// round-trip form, so loading reproduces every parameter exactly.
    pub fn to_json(&self) -> String {
        let p = &self.net.params;
        let mut doc = json!({
            "w_ih": p.w_ih,
            "b_h": p.b_h,
            "w_ho": p.w_ho,
            "b_o": p.b_o,
            "rho": self.rho,
            "normalization": NORMALIZATION,
        });
        if let Some(prov) = &self.provenance {
            doc["metadata"] = serde_json::to_value(prov).expect("provenance serializes");
        }
        let mut s = serde_json::to_string_pretty(&doc).expect("model serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self, ModelError> {
        let doc: Value = serde_json::from_str(text)?;
        let obj = doc.as_object().ok_or(ModelError::NotAnObject)?;

        let w_ih = matrix3(obj, "w_ih")?;
        let b_h = vector3(obj, "b_h")?;
        let w_ho = vector3(obj, "w_ho")?;
        let b_o = scalar(obj, "b_o")?;
        let rho = scalar(obj, "rho")?;
        if !(rho > 0.0 && rho < 1.0) {
            return Err(ModelError::Rho(rho));
        }
        match obj.get("normalization") {
            None => return Err(ModelError::MissingField("normalization")),
            Some(Value::String(s)) if s == NORMALIZATION => {}
            Some(other) => return Err(ModelError::Normalization(other.to_string())),
        }
        let provenance = match obj.get("metadata") {
            None | Some(Value::Null) => None,
            Some(v) => Some(Provenance::deserialize(v).map_err(ModelError::Metadata)?),
        };
        Ok(Self {
            net: Mlp::from_params(Params {
                w_ih,
                b_h,
                w_ho,
                b_o,
            }),
            rho,
            provenance,
        })
    }
}

fn field<'a>(obj: &'a Map<String, Value>, name: &'static str) -> Result<&'a Value, ModelError> {
    obj.get(name).ok_or(ModelError::MissingField(name))
}

fn finite(v: &Value, path: impl FnOnce() -> String) -> Result<f64, ModelError> {
    match v.as_f64() {
        Some(x) if x.is_finite() => Ok(x),
        _ => Err(ModelError::NonFinite(path())),
    }
}

fn scalar(obj: &Map<String, Value>, name: &'static str) -> Result<f64, ModelError> {
    finite(field(obj, name)?, || name.to_string())
}

fn shape_of(v: &Value) -> String {
    match v {
        Value::Array(items) => match items.first() {
            Some(Value::Array(inner)) => format!("{}x{}", items.len(), inner.len()),
            _ => format!("array of {}", items.len()),
        },
        Value::Null => "null".into(),
        Value::Bool(_) => "boolean".into(),
        Value::Number(_) => "number".into(),
        Value::String(_) => "string".into(),
        Value::Object(_) => "object".into(),
    }
}

fn array3<'a>(
    v: &'a Value,
    field: &'static str,
    expected: &'static str,
) -> Result<&'a [Value], ModelError> {
    match v.as_array() {
        Some(items) if items.len() == 3 => Ok(items),
        _ => Err(ModelError::Shape {
            field,
            expected,
            found: shape_of(v),
        }),
    }
}

fn vector3(obj: &Map<String, Value>, name: &'static str) -> Result<[f64; 3], ModelError> {
    let items = array3(field(obj, name)?, name, "array of 3")?;
    let mut out = [0.0; 3];
    for (i, item) in items.iter().enumerate() {
        out[i] = finite(item, || format!("{name}[{i}]"))?;
    }
    Ok(out)
}

fn matrix3(obj: &Map<String, Value>, name: &'static str) -> Result<[[f64; 3]; 3], ModelError> {
    let v = field(obj, name)?;
    let rows = array3(v, name, "3x3")?;
    let mut out = [[0.0; 3]; 3];
    for (j, row) in rows.iter().enumerate() {
        let cols = array3(row, name, "3x3").map_err(|_| ModelError::Shape {
            field: name,
            expected: "3x3",
            found: shape_of(v),
        })?;
        for (i, item) in cols.iter().enumerate() {
            out[j][i] = finite(item, || format!("{name}[{j}][{i}]"))?;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn zero_net() -> Mlp {
        Mlp::from_params(Params::zeros())
    }

    #[test]
    fn init_is_deterministic_and_bounded() {
        let a = Mlp::init(42);
        assert_eq!(a, Mlp::init(42));
        assert!(a.params.to_vec().iter().all(|v| (-0.5..=0.5).contains(v)));
        assert_eq!(a.velocity(), &Params::zeros());
    }

    #[test]
    fn init_uses_documented_draw_order() {
        let mut rng = SplitMix64::new(1);
        let expected: Vec<f64> = (0..Params::LEN).map(|_| rng.next_f64() - 0.5).collect();
        assert_eq!(Mlp::init(1).params.to_vec(), expected);
        assert_ne!(Mlp::init(1).params, Mlp::init(2).params);
    }

    #[test]
    fn zero_network_outputs_one_half() {
        let net = zero_net();
        for rgb in [[0, 0, 0], [255, 255, 255], [35, 126, 183]] {
            assert_eq!(net.forward_rgb(rgb), 0.5);
        }
    }

    #[test]
    fn output_bias_alone() {
        let mut p = Params::zeros();
        p.b_o = 10.0;
        let out = Mlp::from_params(p).forward_rgb([1, 2, 3]);
        assert!((out - 0.999_954_602_131_297_6).abs() < 1e-15);
    }

    #[test]
    fn zero_error_gives_zero_gradient() {
        let mut p = Mlp::init(3).params;
        // Saturate the output to exactly 1.0.
        p.b_o = 800.0;
        let g = Mlp::from_params(p).gradient(&SkinSample::new([35, 126, 183], true));
        assert!(g.to_vec().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn flipping_target_at_half_negates_output_gradient() {
        let net = zero_net();
        let up = net.gradient(&SkinSample::new([10, 20, 30], true));
        let down = net.gradient(&SkinSample::new([10, 20, 30], false));
        assert_eq!(up.b_o, -down.b_o);
        assert_eq!(up.w_ho.map(|v| -v), down.w_ho);
        assert!(up.b_o < 0.0);
    }

    #[test]
    fn params_flatten_round_trip() {
        let p = Mlp::init(9).params;
        assert_eq!(Params::from_slice(&p.to_vec()), p);
    }

    #[test]
    fn classify_is_strict() {
        let net = zero_net();
        assert!(!classify(&net, [0.0; 3], 0.5));
        assert!(classify(&net, [0.0; 3], 0.4999));
        let mut p = Params::zeros();
        p.b_o = (0.7f64 / 0.3).ln();
        let net = Mlp::from_params(p);
        assert!(classify(&net, [0.0; 3], 0.5));
    }

    #[test]
    fn train_rejects_bad_datasets() {
        let net = Mlp::init(0);
        let cfg = TrainConfig::default();
        assert!(matches!(
            train(&net, &[], &cfg),
            Err(TrainError::EmptyDataset)
        ));
        assert!(matches!(
            train(&net, &reference_skin_samples(), &cfg),
            Err(TrainError::SingleClass("skin"))
        ));
        let neg = vec![SkinSample::new([255, 0, 0], false)];
        assert!(matches!(
            train(&net, &neg, &cfg),
            Err(TrainError::SingleClass("non-skin"))
        ));
    }

    #[test]
    fn train_rejects_bad_config() {
        let data = [
            SkinSample::new([0; 3], true),
            SkinSample::new([255; 3], false),
        ];
        let net = Mlp::init(0);
        for cfg in [
            TrainConfig {
                epochs: 0,
                ..Default::default()
            },
            TrainConfig {
                momentum: 1.0,
                ..Default::default()
            },
            TrainConfig {
                learning_rate: 0.0,
                ..Default::default()
            },
        ] {
            assert!(train(&net, &data, &cfg).is_err());
        }
    }

    #[test]
    fn history_has_one_entry_per_epoch() {
        let data = [
            SkinSample::new([0; 3], true),
            SkinSample::new([255; 3], false),
        ];
        let cfg = TrainConfig {
            epochs: 17,
            ..Default::default()
        };
        let out = train(&Mlp::init(5), &data, &cfg).unwrap();
        assert_eq!(out.history.len(), 17);
        assert!(out.net.params.is_finite());
    }

    #[test]
    fn negatives_respect_exclusion_zone() {
        let pos = reference_skin_samples();
        let neg = generate_negatives(&pos, 500, 7);
        assert_eq!(neg.len(), 500);
        for n in &neg {
            assert!(!n.skin);
            assert!(pos
                .iter()
                .all(|p| channel_distance(p.rgb, n.rgb) > NEGATIVE_EXCLUSION));
        }
        assert_eq!(neg, generate_negatives(&pos, 500, 7));
    }

    #[test]
    fn interleave_spreads_skin_samples() {
        let mut data = reference_skin_samples();
        data.extend(generate_negatives(&data, 42, 0));
        let mixed = interleave_classes(&data);
        assert_eq!(mixed.len(), 50);
        let slots: Vec<usize> = mixed
            .iter()
            .enumerate()
            .filter(|(_, s)| s.skin)
            .map(|(i, _)| i)
            .collect();
        assert_eq!(slots, vec![3, 9, 16, 22, 28, 34, 41, 47]);
        // Relative order inside each class is preserved.
        let skin: Vec<_> = mixed.iter().filter(|s| s.skin).copied().collect();
        assert_eq!(skin, reference_skin_samples());
        let other: Vec<_> = mixed.iter().filter(|s| !s.skin).copied().collect();
        assert_eq!(other, data[8..].to_vec());
    }

    #[test]
    fn interleave_handles_single_class() {
        let only = reference_skin_samples();
        assert_eq!(interleave_classes(&only), only);
        assert!(interleave_classes(&[]).is_empty());
    }

    #[test]
    fn reads_sample_csv() {
        let text = "r,g,b,label\n35,126,183,1\n 200, 10, 10 ,0\n";
        let s = read_samples(text.as_bytes()).unwrap();
        assert_eq!(
            s,
            vec![
                SkinSample::new([35, 126, 183], true),
                SkinSample::new([200, 10, 10], false)
            ]
        );
        let err = read_samples("r,g,b,label\n1,2,3,2\n".as_bytes()).unwrap_err();
        assert!(matches!(err, SampleError::Label { line: 2, label: 2 }));
        assert!(read_samples("r,g,b,label\n1,2,300,1\n".as_bytes()).is_err());
    }

    #[test]
    fn model_round_trip_is_exact() {
        let m = SkinModel {
            net: Mlp::init(42),
            rho: 0.5,
            provenance: None,
        };
        let back = SkinModel::from_json(&m.to_json()).unwrap();
        assert_eq!(back.net.params, m.net.params);
        assert_eq!(back.rho, 0.5);
    }

    fn doc_with(key: &str, value: Value) -> String {
        let mut doc: Value = serde_json::from_str(
            &SkinModel {
                net: Mlp::init(1),
                rho: 0.5,
                provenance: None,
            }
            .to_json(),
        )
        .unwrap();
        if value.is_null() && key != "b_o" {
            doc.as_object_mut().unwrap().remove(key);
        } else {
            doc[key] = value;
        }
        doc.to_string()
    }

    #[test]
    fn model_schema_errors_name_the_field() {
        let err =
            SkinModel::from_json(&doc_with("w_ih", json!([[0, 0, 0], [0, 0, 0]]))).unwrap_err();
        assert!(
            matches!(err, ModelError::Shape { field: "w_ih", .. }),
            "{err}"
        );
        assert!(err.to_string().contains("2x3"));

        let err = SkinModel::from_json(&doc_with("w_ho", Value::Null)).unwrap_err();
        assert!(matches!(err, ModelError::MissingField("w_ho")));

        let err = SkinModel::from_json(&doc_with("b_o", Value::Null)).unwrap_err();
        assert!(matches!(err, ModelError::NonFinite(ref f) if f == "b_o"));

        let err = SkinModel::from_json(&doc_with("b_h", json!([0, "x", 0]))).unwrap_err();
        assert!(matches!(err, ModelError::NonFinite(ref f) if f == "b_h[1]"));

        let err = SkinModel::from_json(&doc_with("normalization", json!("zscore"))).unwrap_err();
        assert!(matches!(err, ModelError::Normalization(_)));

        let err = SkinModel::from_json(&doc_with("rho", json!(1.0))).unwrap_err();
        assert!(matches!(err, ModelError::Rho(_)));

        assert!(SkinModel::from_json("[1, 2]").is_err());
        assert!(SkinModel::from_json("{ not json").is_err());
    }
}
