//! Feed-forward ReLU networks with a scalar linear head.
//!
//! A network with widths `[d, n_2, ..., n_K, 1]` has `K - 1` hidden layers,
//! each an affine map followed by ReLU, and a head vector `a` of length
//! `n_K`, so that `f(x) = a · x_K`.

use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Default magnitude below which a pre-activation counts as "on the
/// switching hyperplane".
pub const DEFAULT_EPS_BOUNDARY: f64 = 1e-6;

/// One hidden layer: `weights` is `n_out × n_in`, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    #[serde(rename = "W")]
    pub weights: Vec<Vec<f64>>,
    pub b: Vec<f64>,
}

impl Layer {
    pub fn outputs(&self) -> usize {
        self.b.len()
    }

    pub fn inputs(&self) -> usize {
        self.weights.first().map_or(0, Vec::len)
    }

    pub fn preactivation(&self, input: &[f64]) -> Vec<f64> {
        self.weights
            .iter()
            .zip(&self.b)
            .map(|(row, b)| row.iter().zip(input).map(|(w, x)| w * x).sum::<f64>() + b)
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReluNetwork {
    layers: Vec<Layer>,
    head: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct NetworkFile {
    widths: Vec<usize>,
    layers: Vec<Layer>,
    a: Vec<f64>,
}

/// Value and per-layer pre-activations of one forward pass.
#[derive(Debug, Clone, PartialEq)]
pub struct Forward {
    pub value: f64,
    pub preacts: Vec<Vec<f64>>,
}

/// Which hidden neurons fire at a point, and which sit on their switching
/// hyperplane.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ActivationPattern {
    pub bits: Vec<Vec<bool>>,
    pub boundary: Vec<Vec<usize>>,
}

impl ActivationPattern {
    pub fn num_boundary(&self) -> usize {
        self.boundary.iter().map(Vec::len).sum()
    }

    /// Key identifying the linear region, ignoring boundary annotations.
    pub fn key(&self) -> Vec<u64> {
        let mut words = Vec::new();
        let mut word = 0u64;
        let mut used = 0;
        for bit in self.bits.iter().flatten() {
            word |= (*bit as u64) << used;
            used += 1;
            if used == 64 {
                words.push(word);
                word = 0;
                used = 0;
            }
        }
        if used > 0 {
            words.push(word);
        }
        words
    }
}

fn relu(v: f64) -> f64 {
    if v > 0.0 {
        v
    } else {
        0.0
    }
}

impl ReluNetwork {
    /// Builds a network, checking that layer shapes chain and all weights
    /// are finite.
    pub fn new(layers: Vec<Layer>, head: Vec<f64>) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::Invariant("a network needs at least one hidden layer".into()));
        }
        let mut fan_in = layers[0].inputs();
        if fan_in == 0 {
            return Err(Error::Invariant("input dimension must be positive".into()));
        }
        for (k, layer) in layers.iter().enumerate() {
            if layer.outputs() == 0 || layer.weights.len() != layer.outputs() {
                return Err(Error::Invariant(format!(
                    "layer {k}: weight matrix has {} rows but bias has {} entries",
                    layer.weights.len(),
                    layer.outputs()
                )));
            }
            if let Some(bad) = layer.weights.iter().position(|row| row.len() != fan_in) {
                return Err(Error::Invariant(format!(
                    "layer {k}: row {bad} has {} columns, expected {fan_in}",
                    layer.weights[bad].len()
                )));
            }
            if layer.weights.iter().flatten().chain(&layer.b).any(|v| !v.is_finite()) {
                return Err(Error::Invariant(format!("layer {k} has a non-finite weight")));
            }
            fan_in = layer.outputs();
        }
        if head.len() != fan_in {
            return Err(Error::Invariant(format!(
                "head has {} entries but the last hidden layer has {fan_in} neurons",
                head.len()
            )));
        }
        if head.iter().any(|v| !v.is_finite()) {
            return Err(Error::Invariant("head has a non-finite weight".into()));
        }
        Ok(Self { layers, head })
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn head(&self) -> &[f64] {
        &self.head
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].inputs()
    }

    pub fn hidden_widths(&self) -> Vec<usize> {
        self.layers.iter().map(Layer::outputs).collect()
    }

    /// `[d, n_2, ..., n_K, 1]`.
    pub fn widths(&self) -> Vec<usize> {
        let mut w = vec![self.input_dim()];
        w.extend(self.hidden_widths());
        w.push(1);
        w
    }

    pub fn total_hidden(&self) -> usize {
        self.layers.iter().map(Layer::outputs).sum()
    }

    fn check_input(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.input_dim() {
            return Err(Error::Input(format!(
                "input has length {}, network expects {}",
                x.len(),
                self.input_dim()
            )));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::Input("input has a non-finite entry".into()));
        }
        Ok(())
    }

    pub fn forward(&self, x: &[f64]) -> Result<Forward> {
        self.check_input(x)?;
        let mut preacts = Vec::with_capacity(self.layers.len());
        let mut current = x.to_vec();
        for layer in &self.layers {
            let pre = layer.preactivation(&current);
            current = pre.iter().copied().map(relu).collect();
            preacts.push(pre);
        }
        let value = self.head.iter().zip(&current).map(|(a, v)| a * v).sum();
        Ok(Forward { value, preacts })
    }

    pub fn value(&self, x: &[f64]) -> Result<f64> {
        Ok(self.forward(x)?.value)
    }

    /// A neuron is active iff its pre-activation is strictly positive; it is
    /// on the boundary iff `|pre| <= eps_boundary`.
    pub fn activation_pattern(&self, x: &[f64], eps_boundary: f64) -> Result<ActivationPattern> {
        if !(eps_boundary >= 0.0) {
            return Err(Error::Input(format!("eps_boundary must be >= 0, got {eps_boundary}")));
        }
        let fwd = self.forward(x)?;
        Ok(pattern_from_preacts(&fwd.preacts, eps_boundary))
    }

    /// Hash of the weights, used to tag sample provenance.
    pub fn fingerprint(&self) -> String {
        let mut hasher = Sha256::new();
        for layer in &self.layers {
            for v in layer.weights.iter().flatten().chain(&layer.b) {
                hasher.update(v.to_le_bytes());
            }
        }
        for v in &self.head {
            hasher.update(v.to_le_bytes());
        }
        hasher.finalize()[..8].iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn to_json(&self) -> String {
        let file = NetworkFile { widths: self.widths(), layers: self.layers.clone(), a: self.head.clone() };
        serde_json::to_string_pretty(&file).expect("network serializes")
    }

    pub fn from_json(text: &str) -> std::result::Result<Self, JsonLoadError> {
        let file: NetworkFile = serde_json::from_str(text).map_err(JsonLoadError::Parse)?;
        let net = Self::new(file.layers, file.a).map_err(JsonLoadError::Invalid)?;
        if net.widths() != file.widths {
            return Err(JsonLoadError::Invalid(Error::Invariant(format!(
                "declared widths {:?} do not match the layer shapes {:?}",
                file.widths,
                net.widths()
            ))));
        }
        Ok(net)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_json()).map_err(|source| Error::Io { path: path.to_path_buf(), source })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|source| Error::Io { path: path.to_path_buf(), source })?;
        Self::from_json(&text).map_err(|e| e.at(path))
    }
}

/// Failure while decoding a JSON artifact, before a path is attached.
#[derive(Debug)]
pub enum JsonLoadError {
    Parse(serde_json::Error),
    Invalid(Error),
}

impl JsonLoadError {
    pub fn at(self, path: &Path) -> Error {
        match self {
            JsonLoadError::Parse(source) => Error::Parse { path: path.to_path_buf(), source },
            JsonLoadError::Invalid(e) => e,
        }
    }
}

impl std::fmt::Display for JsonLoadError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            JsonLoadError::Parse(e) => write!(f, "parse error: {e}"),
            JsonLoadError::Invalid(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for JsonLoadError {}

pub(crate) fn pattern_from_preacts(preacts: &[Vec<f64>], eps_boundary: f64) -> ActivationPattern {
    let bits = preacts.iter().map(|layer| layer.iter().map(|&v| v > 0.0).collect()).collect();
    let boundary = preacts
        .iter()
        .map(|layer| {
            layer
                .iter()
                .enumerate()
                .filter(|(_, v)| v.abs() <= eps_boundary)
                .map(|(i, _)| i)
                .collect()
        })
        .collect();
    ActivationPattern { bits, boundary }
}

/// Uniform Xavier initialization: weights uniform on `±sqrt(6/(fan_in+fan_out))`,
/// zero biases, head drawn the same way with `fan_out = 1`.
pub fn xavier_init(widths: &[usize], seed: u64) -> Result<ReluNetwork> {
    if widths.len() < 3 {
        return Err(Error::Input(format!(
            "widths {widths:?} need an input size, at least one hidden layer and an output size"
        )));
    }
    if widths.contains(&0) {
        return Err(Error::Input(format!("widths {widths:?} contain a zero")));
    }
    if *widths.last().unwrap() != 1 {
        return Err(Error::Input(format!("the output width must be 1, got {widths:?}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut layers = Vec::with_capacity(widths.len() - 2);
    for pair in widths[..widths.len() - 1].windows(2) {
        let (fan_in, fan_out) = (pair[0], pair[1]);
        let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
        let weights = (0..fan_out)
            .map(|_| (0..fan_in).map(|_| rng.random_range(-limit..=limit)).collect())
            .collect();
        layers.push(Layer { weights, b: vec![0.0; fan_out] });
    }
    let last = widths[widths.len() - 2];
    let limit = (6.0 / (last + 1) as f64).sqrt();
    let head = (0..last).map(|_| rng.random_range(-limit..=limit)).collect();
    ReluNetwork::new(layers, head)
}

/// Independent RNG stream for iteration `index` of a run seeded with `seed`.
pub fn iteration_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}
