//! Encoder-head CLS: a small ReLU network is trained on the union of both
//! domains, then linear softmax heads are fit per domain on the frozen
//! embeddings and cross-evaluated.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::dataset::{make_folds, mean_loss, Dataset, LossKind, TaskKind};
use crate::error::{Error, Result};
use crate::math::{log_sum_exp, sqrt};
use crate::models::{cv_error, fit, Algorithm, FittedModel, ModelSpec};
use crate::rng;
use crate::zone::{classify, thresholds, Zone, DEFAULT_GAMMA1, DEFAULT_GAMMA2};

pub const HEAD_L2: f64 = 1e-4;
pub const HEAD_FOLDS: usize = 5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EncoderConfig {
    pub widths: Vec<usize>,
    pub epochs: usize,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub seed: u64,
}

impl Default for EncoderConfig {
    fn default() -> Self {
        EncoderConfig { widths: vec![32, 16], epochs: 100, learning_rate: 0.01, batch_size: 32, seed: 0 }
    }
}

impl EncoderConfig {
    pub fn validate(&self) -> Result<()> {
        if self.widths.is_empty() || self.widths.contains(&0) {
            return Err(Error::invalid(format!("layer widths must be non-empty and positive, got {:?}", self.widths)));
        }
        if self.epochs == 0 || self.batch_size == 0 {
            return Err(Error::invalid("epochs and batch size must be at least 1"));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::invalid(format!("step size must be positive, got {}", self.learning_rate)));
        }
        Ok(())
    }
}

/// Fully connected network with ReLU hidden layers and a linear last layer.
/// Parameters are stored flat, layer by layer, each as a row-major
/// `out x in` weight block followed by `out` biases.
#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    sizes: Vec<usize>,
    params: Vec<f64>,
}

impl Mlp {
    /// He-initialised weights and zero biases.
    pub fn new(sizes: &[usize], seed: u64) -> Result<Self> {
        if sizes.len() < 2 || sizes.contains(&0) {
            return Err(Error::invalid(format!("bad layer sizes {sizes:?}")));
        }
        let mut r = rng::stream(seed, 0xE4C0);
        let mut params = Vec::with_capacity(param_count(sizes));
        for l in 0..sizes.len() - 1 {
            let (fan_in, out) = (sizes[l], sizes[l + 1]);
            let scale = sqrt(2.0 / fan_in as f64);
            params.extend((0..fan_in * out).map(|_| scale * rng::normal(&mut r)));
            params.extend(core::iter::repeat_n(0.0, out));
        }
        Ok(Mlp { sizes: sizes.to_vec(), params })
    }

    pub fn from_params(sizes: &[usize], params: Vec<f64>) -> Result<Self> {
        if sizes.len() < 2 || sizes.contains(&0) {
            return Err(Error::invalid(format!("bad layer sizes {sizes:?}")));
        }
        if params.len() != param_count(sizes) {
            return Err(Error::LengthMismatch { left: param_count(sizes), right: params.len() });
        }
        Ok(Mlp { sizes: sizes.to_vec(), params })
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn output_dim(&self) -> usize {
        *self.sizes.last().expect("at least two sizes")
    }

    /// Layer outputs: ReLU activations for hidden layers, raw values for the last.
    fn activations(&self, params: &[f64], x: &[f64]) -> Vec<Vec<f64>> {
        let layers = self.sizes.len() - 1;
        let mut acts: Vec<Vec<f64>> = Vec::with_capacity(layers);
        let mut off = 0;
        for l in 0..layers {
            let (fan_in, out) = (self.sizes[l], self.sizes[l + 1]);
            let input = if l == 0 { x } else { &acts[l - 1] };
            let w = &params[off..off + fan_in * out];
            let b = &params[off + fan_in * out..off + fan_in * out + out];
            let mut z: Vec<f64> = (0..out).map(|j| b[j] + crate::math::dot(&w[j * fan_in..(j + 1) * fan_in], input)).collect();
            if l + 1 < layers {
                z.iter_mut().for_each(|v| *v = v.max(0.0));
            }
            acts.push(z);
            off += fan_in * out + out;
        }
        acts
    }

    pub fn forward(&self, x: &[f64]) -> Vec<f64> {
        self.activations(&self.params, x).pop().expect("at least one layer")
    }

    /// Mean softmax cross-entropy over `batch` and its gradient, treating the
    /// last layer as class logits.
    pub fn loss_and_grad(&self, params: &[f64], x: &[f64], classes: &[usize], batch: &[usize]) -> (f64, Vec<f64>) {
        let p = self.sizes[0];
        let layers = self.sizes.len() - 1;
        let mut grad = vec![0.0; params.len()];
        let mut loss = 0.0;
        for &i in batch {
            let xi = &x[i * p..(i + 1) * p];
            let acts = self.activations(params, xi);
            let logits = &acts[layers - 1];
            let lse = log_sum_exp(logits);
            loss += lse - logits[classes[i]];
            let mut delta: Vec<f64> = logits.iter().map(|z| crate::math::exp(z - lse)).collect();
            delta[classes[i]] -= 1.0;
            let mut off = params.len();
            for l in (0..layers).rev() {
                let (fan_in, out) = (self.sizes[l], self.sizes[l + 1]);
                off -= fan_in * out + out;
                let input = if l == 0 { xi } else { &acts[l - 1] };
                for j in 0..out {
                    let row = &mut grad[off + j * fan_in..off + (j + 1) * fan_in];
                    for (g, a) in row.iter_mut().zip(input) {
                        *g += delta[j] * a;
                    }
                    grad[off + fan_in * out + j] += delta[j];
                }
                if l > 0 {
                    let w = &params[off..off + fan_in * out];
                    delta = (0..fan_in)
                        .map(|c| if input[c] > 0.0 { (0..out).map(|j| w[j * fan_in + c] * delta[j]).sum() } else { 0.0 })
                        .collect();
                }
            }
        }
        let m = batch.len() as f64;
        grad.iter_mut().for_each(|g| *g /= m);
        (loss / m, grad)
    }
}

fn param_count(sizes: &[usize]) -> usize {
    sizes.windows(2).map(|w| w[0] * w[1] + w[1]).sum()
}

/// Trained encoder: every layer of the joint network except the temporary head.
#[derive(Debug, Clone, PartialEq)]
pub struct Encoder {
    net: Mlp,
    /// Full-data cross-entropy after each epoch.
    pub loss_history: Vec<f64>,
}

impl Encoder {
    pub fn input_dim(&self) -> usize {
        self.net.sizes[0]
    }

    pub fn output_dim(&self) -> usize {
        self.net.output_dim()
    }

    pub fn params(&self) -> &[f64] {
        self.net.params()
    }

    pub fn embed_row(&self, row: &[f64]) -> Vec<f64> {
        // The last encoder layer is hidden in the joint network, so it keeps its ReLU.
        let mut z = self.net.forward(row);
        z.iter_mut().for_each(|v| *v = v.max(0.0));
        z
    }

    /// Replaces the features of `data` with their embeddings; labels are kept.
    pub fn embed(&self, data: &Dataset) -> Result<Dataset> {
        if data.p() != self.input_dim() {
            return Err(Error::DimensionMismatch { expected: self.input_dim(), got: data.p() });
        }
        let x: Vec<f64> = data.rows().flat_map(|r| self.embed_row(r)).collect();
        data.with_features(x, self.output_dim())
    }
}

fn class_count(task: TaskKind) -> Result<usize> {
    task.classes().ok_or_else(|| Error::UnsupportedTask(format!("encoder-head scoring needs classification, got {task}")))
}

/// Trains the encoder jointly with a softmax head over the union of both
/// training sets by mini-batch gradient descent, then drops the head.
pub fn train_joint_encoder(config: &EncoderConfig, target_train: &Dataset, source_train: &Dataset) -> Result<Encoder> {
    config.validate()?;
    target_train.check_compatible(source_train)?;
    let k = class_count(target_train.task())?;
    let union = target_train.concat(source_train)?;
    let p = union.p();
    let mut sizes = vec![p];
    sizes.extend(&config.widths);
    sizes.push(k);
    let mut net = Mlp::new(&sizes, config.seed)?;
    let classes = union.class_ids();
    let x = union.raw();
    let n = union.n();
    let all: Vec<usize> = (0..n).collect();
    let mut order = all.clone();
    let mut r = rng::stream(config.seed, 0xE4C1);
    let mut history = Vec::with_capacity(config.epochs);
    for epoch in 1..=config.epochs {
        rng::shuffle(&mut r, &mut order);
        for batch in order.chunks(config.batch_size) {
            let (_, grad) = net.loss_and_grad(&net.params, x, &classes, batch);
            for (w, g) in net.params.iter_mut().zip(&grad) {
                *w -= config.learning_rate * g;
            }
        }
        let (loss, _) = net.loss_and_grad(&net.params, x, &classes, &all);
        if !loss.is_finite() || net.params.iter().any(|w| !w.is_finite()) {
            return Err(Error::Diverged { epoch });
        }
        history.push(loss);
    }
    let head = config.widths.last().expect("validated") * k + k;
    let enc_sizes = sizes[..sizes.len() - 1].to_vec();
    let enc_params = net.params[..net.params.len() - head].to_vec();
    Ok(Encoder { net: Mlp::from_params(&enc_sizes, enc_params)?, loss_history: history })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EncHeadResult {
    pub cls_enc_head: f64,
    /// Error of the source head on target test embeddings.
    pub e_t: f64,
    /// Error of the target head on source test embeddings.
    pub e_s: f64,
    pub e0: f64,
    pub se_e0: f64,
    pub zone: Zone,
}

/// Softmax regression used for every head.
pub fn head_spec() -> ModelSpec {
    let mut spec = ModelSpec::new(Algorithm::MultinomLogReg);
    spec.hyper.l2 = HEAD_L2;
    spec
}

fn fit_head(data: &Dataset, k: usize, which: &str) -> Result<FittedModel> {
    let counts = data.class_counts();
    if let Some(c) = (0..k).find(|c| counts.get(*c).is_none_or(|n| *n == 0)) {
        return Err(Error::invalid(format!("class {c} is missing from the {which} head's training set")));
    }
    fit(&head_spec(), data)
}

/// Encoder-head CLS with the baseline from 5-fold cross-validation of the
/// target head on frozen target-train embeddings.
pub fn cls_enc_head(
    config: &EncoderConfig,
    target_train: &Dataset,
    target_test: &Dataset,
    source_train: &Dataset,
    source_test: &Dataset,
) -> Result<EncHeadResult> {
    for d in [target_test, source_train, source_test] {
        target_train.check_compatible(d)?;
    }
    let k = class_count(target_train.task())?;
    let encoder = train_joint_encoder(config, target_train, source_train)?;
    let zt_train = encoder.embed(target_train)?;
    let zs_train = encoder.embed(source_train)?;
    let h_t = fit_head(&zt_train, k, "target")?;
    let h_s = fit_head(&zs_train, k, "source")?;
    let zt_test = encoder.embed(target_test)?;
    let zs_test = encoder.embed(source_test)?;
    let loss = LossKind::ZeroOne;
    let e_t = mean_loss(&h_s.predict(&zt_test)?, zt_test.labels(), loss)?;
    let e_s = mean_loss(&h_t.predict(&zs_test)?, zs_test.labels(), loss)?;
    let folds = make_folds(&zt_train, HEAD_FOLDS, config.seed)?;
    let cv = cv_error(&head_spec(), &zt_train, &folds, loss)?;
    let score = 0.5 * (e_t + e_s);
    let t = thresholds(cv.mean, cv.se, DEFAULT_GAMMA1, DEFAULT_GAMMA2)?;
    Ok(EncHeadResult { cls_enc_head: score, e_t, e_s, e0: cv.mean, se_e0: cv.se, zone: classify(score, &t) })
}
