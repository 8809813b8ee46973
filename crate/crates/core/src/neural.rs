//! A neural network with one hidden layer of `D` units,
//! `G(x) = s_out(sum_i w_i s(w_i . x + w_i0) + w_0)`,
//! trained by full-batch gradient descent on the mean squared loss.
//!
//! Classification thresholds the output at `theta`: 0 for an identity
//! output (targets -1/+1), 1/2 for a sigmoid output (targets 0/1). An output
//! exactly at `theta` is classified +1.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::classifier::DecisionFunction;
use crate::data::{Label, LabeledDataset, Seed};
use crate::error::{check_dim, Error, Result};
use crate::linalg::{dot, sigmoid};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HiddenActivation {
    LogisticSigmoid,
    Relu,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputActivation {
    Identity,
    LogisticSigmoid,
}

impl HiddenActivation {
    fn apply(self, a: f64) -> f64 {
        match self {
            HiddenActivation::LogisticSigmoid => sigmoid(a),
            HiddenActivation::Relu => a.max(0.0),
        }
    }

    /// Derivative given the pre-activation `a` and output `h`; relu uses 0 at 0.
    fn slope(self, a: f64, h: f64) -> f64 {
        match self {
            HiddenActivation::LogisticSigmoid => h * (1.0 - h),
            HiddenActivation::Relu => {
                if a > 0.0 { 1.0 } else { 0.0 }
            }
        }
    }
}

impl OutputActivation {
    fn apply(self, z: f64) -> f64 {
        match self {
            OutputActivation::Identity => z,
            OutputActivation::LogisticSigmoid => sigmoid(z),
        }
    }

    fn slope(self, o: f64) -> f64 {
        match self {
            OutputActivation::Identity => 1.0,
            OutputActivation::LogisticSigmoid => o * (1.0 - o),
        }
    }

    pub fn threshold(self) -> f64 {
        match self {
            OutputActivation::Identity => 0.0,
            OutputActivation::LogisticSigmoid => 0.5,
        }
    }

    pub fn target(self, y: Label) -> f64 {
        match (self, y) {
            (OutputActivation::Identity, y) => y.sign(),
            (OutputActivation::LogisticSigmoid, Label::Pos) => 1.0,
            (OutputActivation::LogisticSigmoid, Label::Neg) => 0.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OneHiddenLayerNet {
    /// `D` rows of length `d`.
    pub hidden_weights: Vec<Vec<f64>>,
    pub hidden_biases: Vec<f64>,
    pub output_weights: Vec<f64>,
    pub output_bias: f64,
    pub hidden_activation: HiddenActivation,
    pub output_activation: OutputActivation,
    /// Classification threshold on the output, fixed by the output activation.
    pub threshold: f64,
}

/// Same shape as the network's parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct NetGradient {
    pub hidden_weights: Vec<Vec<f64>>,
    pub hidden_biases: Vec<f64>,
    pub output_weights: Vec<f64>,
    pub output_bias: f64,
}

impl NetGradient {
    pub fn flatten(&self) -> Vec<f64> {
        let mut out: Vec<f64> = self.hidden_weights.iter().flatten().copied().collect();
        out.extend(&self.hidden_biases);
        out.extend(&self.output_weights);
        out.push(self.output_bias);
        out
    }
}

impl OneHiddenLayerNet {
    pub fn new(
        hidden_weights: Vec<Vec<f64>>,
        hidden_biases: Vec<f64>,
        output_weights: Vec<f64>,
        output_bias: f64,
        hidden_activation: HiddenActivation,
        output_activation: OutputActivation,
    ) -> Result<OneHiddenLayerNet> {
        let units = hidden_weights.len();
        if units == 0 {
            return Err(Error::Argument("a network needs at least one hidden unit".into()));
        }
        let d = hidden_weights[0].len();
        if d == 0 || hidden_weights.iter().any(|r| r.len() != d) {
            return Err(Error::Argument("hidden weight rows must share one positive length".into()));
        }
        if hidden_biases.len() != units || output_weights.len() != units {
            return Err(Error::Argument("bias and output weight lengths must equal the unit count".into()));
        }
        let net = OneHiddenLayerNet {
            hidden_weights,
            hidden_biases,
            output_weights,
            output_bias,
            hidden_activation,
            output_activation,
            threshold: output_activation.threshold(),
        };
        if net.params().iter().any(|v| !v.is_finite()) {
            return Err(Error::Argument("network parameters must be finite".into()));
        }
        Ok(net)
    }

    pub fn units(&self) -> usize {
        self.hidden_weights.len()
    }

    pub fn input_dim(&self) -> usize {
        self.hidden_weights[0].len()
    }

    /// Hidden weights row by row, hidden biases, output weights, output bias.
    pub fn params(&self) -> Vec<f64> {
        let mut out: Vec<f64> = self.hidden_weights.iter().flatten().copied().collect();
        out.extend(&self.hidden_biases);
        out.extend(&self.output_weights);
        out.push(self.output_bias);
        out
    }

    pub fn set_params(&mut self, p: &[f64]) {
        let d = self.input_dim();
        let units = self.units();
        assert_eq!(p.len(), units * (d + 2) + 1, "parameter vector has the wrong length");
        for (i, row) in self.hidden_weights.iter_mut().enumerate() {
            row.copy_from_slice(&p[i * d..(i + 1) * d]);
        }
        let off = units * d;
        self.hidden_biases.copy_from_slice(&p[off..off + units]);
        self.output_weights.copy_from_slice(&p[off + units..off + 2 * units]);
        self.output_bias = p[off + 2 * units];
    }

    fn hidden(&self, x: &[f64], pre: &mut Vec<f64>, post: &mut Vec<f64>) {
        pre.clear();
        post.clear();
        for (w, b) in self.hidden_weights.iter().zip(&self.hidden_biases) {
            let a = dot(w, x) + b;
            pre.push(a);
            post.push(self.hidden_activation.apply(a));
        }
    }
}

pub fn net_forward(net: &OneHiddenLayerNet, x: &[f64]) -> Result<f64> {
    check_dim(net.input_dim(), x.len())?;
    let (mut pre, mut post) = (Vec::new(), Vec::new());
    net.hidden(x, &mut pre, &mut post);
    Ok(net.output_activation.apply(dot(&net.output_weights, &post) + net.output_bias))
}

impl DecisionFunction for OneHiddenLayerNet {
    fn dim(&self) -> usize {
        self.input_dim()
    }
    fn score(&self, x: &[f64]) -> Result<f64> {
        Ok(net_forward(self, x)? - self.threshold)
    }
}

/// Mean over the batch of `(G(x) - t(y))^2`.
pub fn net_objective(net: &OneHiddenLayerNet, batch: &LabeledDataset) -> Result<f64> {
    check_dim(net.input_dim(), batch.dim())?;
    let mut total = 0.0;
    for (x, &y) in batch.rows().zip(batch.labels()) {
        let e = net_forward(net, x)? - net.output_activation.target(y);
        total += e * e;
    }
    Ok(total / batch.len() as f64)
}

/// Exact gradient of [`net_objective`] by backpropagation, together with the
/// objective value.
pub fn net_gradient(net: &OneHiddenLayerNet, batch: &LabeledDataset) -> Result<(f64, NetGradient)> {
    check_dim(net.input_dim(), batch.dim())?;
    let units = net.units();
    let d = net.input_dim();
    let n = batch.len() as f64;
    let mut g = NetGradient {
        hidden_weights: vec![vec![0.0; d]; units],
        hidden_biases: vec![0.0; units],
        output_weights: vec![0.0; units],
        output_bias: 0.0,
    };
    let (mut pre, mut post) = (Vec::with_capacity(units), Vec::with_capacity(units));
    let mut total = 0.0;
    for (x, &y) in batch.rows().zip(batch.labels()) {
        net.hidden(x, &mut pre, &mut post);
        let o = net.output_activation.apply(dot(&net.output_weights, &post) + net.output_bias);
        let e = o - net.output_activation.target(y);
        total += e * e;
        let dz = 2.0 * e / n * net.output_activation.slope(o);
        g.output_bias += dz;
        for i in 0..units {
            g.output_weights[i] += dz * post[i];
            let da = dz * net.output_weights[i] * net.hidden_activation.slope(pre[i], post[i]);
            g.hidden_biases[i] += da;
            for (gw, xv) in g.hidden_weights[i].iter_mut().zip(x) {
                *gw += da * xv;
            }
        }
    }
    Ok((total / n, g))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NetLoss {
    #[default]
    Squared,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NetTrainConfig {
    pub hidden_units: usize,
    pub loss: NetLoss,
    pub learning_rate: f64,
    pub max_iters: usize,
    /// Initial parameters are uniform on `[-init_scale, init_scale]`.
    pub init_scale: f64,
    pub seed: Seed,
    pub hidden_activation: HiddenActivation,
    pub output_activation: OutputActivation,
}

impl Default for NetTrainConfig {
    fn default() -> NetTrainConfig {
        NetTrainConfig {
            hidden_units: 4,
            loss: NetLoss::Squared,
            learning_rate: 0.5,
            max_iters: 4000,
            init_scale: 1.0,
            seed: Seed(0),
            hidden_activation: HiddenActivation::LogisticSigmoid,
            output_activation: OutputActivation::Identity,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NetTrainReport {
    pub initial_objective: f64,
    pub best_objective: f64,
    /// Number of gradient steps taken before the returned parameters.
    pub best_iteration: usize,
    pub iterations: usize,
}

/// Full-batch gradient descent with a fixed learning rate; returns the
/// parameters with the lowest objective seen, including the initial ones.
pub fn train_net(ds: &LabeledDataset, config: &NetTrainConfig) -> Result<(OneHiddenLayerNet, NetTrainReport)> {
    if config.hidden_units == 0 {
        return Err(Error::Argument("hidden_units must be >= 1".into()));
    }
    if !(config.learning_rate > 0.0 && config.learning_rate.is_finite()) {
        return Err(Error::Argument("learning_rate must be positive".into()));
    }
    if !(config.init_scale >= 0.0 && config.init_scale.is_finite()) {
        return Err(Error::Argument("init_scale must be >= 0".into()));
    }
    let d = ds.dim();
    let units = config.hidden_units;
    let mut rng = config.seed.rng();
    let s = config.init_scale;
    let mut draw = || if s > 0.0 { rng.random_range(-s..=s) } else { 0.0 };
    let hidden_weights = (0..units).map(|_| (0..d).map(|_| draw()).collect()).collect();
    let hidden_biases = (0..units).map(|_| draw()).collect();
    let output_weights = (0..units).map(|_| draw()).collect();
    let output_bias = draw();
    let mut net = OneHiddenLayerNet::new(
        hidden_weights,
        hidden_biases,
        output_weights,
        output_bias,
        config.hidden_activation,
        config.output_activation,
    )?;

    let mut params = net.params();
    let (mut f, mut g) = net_gradient(&net, ds)?;
    let initial_objective = f;
    let mut best = (f, params.clone(), 0usize);
    for it in 1..=config.max_iters {
        for (p, gv) in params.iter_mut().zip(g.flatten()) {
            *p -= config.learning_rate * gv;
        }
        net.set_params(&params);
        (f, g) = net_gradient(&net, ds)?;
        if !f.is_finite() || params.iter().any(|v| !v.is_finite()) {
            return Err(Error::Optimization(format!("network training diverged at iteration {it}")));
        }
        if f < best.0 {
            best = (f, params.clone(), it);
        }
    }
    net.set_params(&best.1);
    let report = NetTrainReport {
        initial_objective,
        best_objective: best.0,
        best_iteration: best.2,
        iterations: config.max_iters,
    };
    Ok((net, report))
}
