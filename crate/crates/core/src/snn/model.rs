//! Two-layer spiking classifier: input -> LIF hidden -> LIF output, read out
//! as time-averaged output activity.

use rand::Rng;

use super::lif::{LifConfig, LifState};
use crate::encode::OneHotTensor;
use crate::error::{Error, Result};
use crate::rng;
use crate::train::softmax_cross_entropy;

/// How class scores are read from the output layer.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Readout {
    /// Mean output spike count over the time steps.
    SpikeRate,
    /// Mean pre-reset output membrane potential over the time steps.
    MembraneMean,
}

/// Which paths the backward pass differentiates through.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GradientFlow {
    /// Only the within-step path current -> membrane -> spike. The membrane
    /// carry-over and the reset term are treated as constants.
    Isolated,
    /// Full backpropagation through time, including carry-over and reset.
    ThroughTime,
}

/// Weights and biases. `w1` is `input_dim x hidden`, `w2` is
/// `hidden x classes`, both row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Parameters {
    pub w1: Vec<f64>,
    pub b1: Vec<f64>,
    pub w2: Vec<f64>,
    pub b2: Vec<f64>,
}

impl Parameters {
    pub fn zeros(input_dim: usize, hidden: usize, classes: usize) -> Self {
        Self {
            w1: vec![0.0; input_dim * hidden],
            b1: vec![0.0; hidden],
            w2: vec![0.0; hidden * classes],
            b2: vec![0.0; classes],
        }
    }

    pub fn zeros_like(other: &Self) -> Self {
        Self {
            w1: vec![0.0; other.w1.len()],
            b1: vec![0.0; other.b1.len()],
            w2: vec![0.0; other.w2.len()],
            b2: vec![0.0; other.b2.len()],
        }
    }

    pub fn tensors(&self) -> [(&'static str, &[f64]); 4] {
        [
            ("w1", &self.w1),
            ("b1", &self.b1),
            ("w2", &self.w2),
            ("b2", &self.b2),
        ]
    }

    pub fn tensors_mut(&mut self) -> [(&'static str, &mut Vec<f64>); 4] {
        [
            ("w1", &mut self.w1),
            ("b1", &mut self.b1),
            ("w2", &mut self.w2),
            ("b2", &mut self.b2),
        ]
    }

    pub fn len(&self) -> usize {
        self.w1.len() + self.b1.len() + self.w2.len() + self.b2.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn scale(&mut self, factor: f64) {
        for (_, t) in self.tensors_mut() {
            t.iter_mut().for_each(|v| *v *= factor);
        }
    }

    pub fn is_finite(&self) -> bool {
        self.tensors().iter().all(|(_, t)| t.iter().all(|v| v.is_finite()))
    }
}

/// Network input: a one-hot tensor (sparse) or an arbitrary dense vector.
#[derive(Clone, Copy, Debug)]
pub enum Input<'a> {
    OneHot(&'a OneHotTensor),
    Dense(&'a [f64]),
}

impl<'a> From<&'a OneHotTensor> for Input<'a> {
    fn from(t: &'a OneHotTensor) -> Self {
        Input::OneHot(t)
    }
}

impl<'a> From<&'a [f64]> for Input<'a> {
    fn from(x: &'a [f64]) -> Self {
        Input::Dense(x)
    }
}

impl Input<'_> {
    fn dim(&self) -> usize {
        match self {
            Input::OneHot(t) => t.rows() * t.cols(),
            Input::Dense(x) => x.len(),
        }
    }

    /// Non-zero `(index, value)` pairs in ascending index order.
    fn entries(&self) -> Vec<(usize, f64)> {
        match self {
            Input::OneHot(t) => t.nonzero_indices().map(|i| (i, 1.0)).collect(),
            Input::Dense(x) => x
                .iter()
                .enumerate()
                .filter(|(_, v)| **v != 0.0)
                .map(|(i, &v)| (i, v))
                .collect(),
        }
    }
}

/// Per-step activity of both layers.
#[derive(Clone, Debug, PartialEq)]
pub struct SpikeRecord {
    /// `[t][neuron]` pre-reset hidden membrane.
    pub hidden_membrane: Vec<Vec<f64>>,
    pub hidden_spikes: Vec<Vec<f64>>,
    pub output_membrane: Vec<Vec<f64>>,
    pub output_spikes: Vec<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ForwardOutput {
    pub class_scores: Vec<f64>,
    pub record: Option<SpikeRecord>,
}

/// Gradient contribution of a single example in compact form. The layer-1
/// weight gradient is the outer product of the input with `hidden_delta`
/// because the input current is the same at every step.
#[derive(Clone, Debug)]
pub struct ExampleGradient {
    pub loss: f64,
    pub class_scores: Vec<f64>,
    input: Vec<(usize, f64)>,
    hidden_delta: Vec<f64>,
    w2: Vec<f64>,
    b2: Vec<f64>,
}

impl ExampleGradient {
    /// `acc += scale * gradient`.
    pub fn add_to(&self, acc: &mut Parameters, scale: f64) {
        let hidden = self.hidden_delta.len();
        for &(i, x) in &self.input {
            let row = &mut acc.w1[i * hidden..(i + 1) * hidden];
            for (g, &d) in row.iter_mut().zip(&self.hidden_delta) {
                *g += scale * x * d;
            }
        }
        for (g, &d) in acc.b1.iter_mut().zip(&self.hidden_delta) {
            *g += scale * d;
        }
        for (g, &d) in acc.w2.iter_mut().zip(&self.w2) {
            *g += scale * d;
        }
        for (g, &d) in acc.b2.iter_mut().zip(&self.b2) {
            *g += scale * d;
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SnnModel {
    pub input_dim: usize,
    pub hidden: usize,
    pub classes: usize,
    pub params: Parameters,
    pub lif: LifConfig,
    pub readout: Readout,
    pub gradient_flow: GradientFlow,
}

struct Trace {
    hidden_pre: Vec<Vec<f64>>,
    hidden_spikes: Vec<Vec<f64>>,
    output_pre: Vec<Vec<f64>>,
    output_spikes: Vec<Vec<f64>>,
    scores: Vec<f64>,
}

impl SnnModel {
    /// Fresh model with weights uniform in `±sqrt(1 / fan_in)` and zero biases.
    pub fn new(input_dim: usize, hidden: usize, classes: usize, lif: LifConfig, seed: u64) -> Result<Self> {
        lif.validate()?;
        if input_dim == 0 || hidden == 0 || classes == 0 {
            return Err(Error::param("model dimensions must be >= 1"));
        }
        let mut params = Parameters::zeros(input_dim, hidden, classes);
        let mut rng = rng::stream(seed, "init", &[]);
        let bound1 = (1.0 / input_dim as f64).sqrt();
        params.w1.iter_mut().for_each(|w| *w = rng.gen_range(-bound1..bound1));
        let bound2 = (1.0 / hidden as f64).sqrt();
        params.w2.iter_mut().for_each(|w| *w = rng.gen_range(-bound2..bound2));
        Ok(Self {
            input_dim,
            hidden,
            classes,
            params,
            lif,
            readout: Readout::SpikeRate,
            gradient_flow: GradientFlow::Isolated,
        })
    }

    fn check_input(&self, input: &Input<'_>) -> Result<()> {
        if input.dim() != self.input_dim {
            return Err(Error::DimensionMismatch {
                expected: self.input_dim,
                actual: input.dim(),
            });
        }
        if let Input::Dense(x) = input {
            if x.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite("model input".into()));
            }
        }
        Ok(())
    }

    fn hidden_current(&self, entries: &[(usize, f64)]) -> Vec<f64> {
        let mut current = self.params.b1.clone();
        for &(i, x) in entries {
            let row = &self.params.w1[i * self.hidden..(i + 1) * self.hidden];
            for (c, &w) in current.iter_mut().zip(row) {
                *c += x * w;
            }
        }
        current
    }

    fn simulate(&self, entries: &[(usize, f64)]) -> Trace {
        let steps = self.lif.time_steps;
        let hidden_current = self.hidden_current(entries);
        let mut hidden = LifState::new(self.hidden);
        let mut output = LifState::new(self.classes);
        let mut trace = Trace {
            hidden_pre: Vec::with_capacity(steps),
            hidden_spikes: Vec::with_capacity(steps),
            output_pre: Vec::with_capacity(steps),
            output_spikes: Vec::with_capacity(steps),
            scores: vec![0.0; self.classes],
        };
        let mut out_current = vec![0.0; self.classes];
        for _ in 0..steps {
            let mut pre = vec![0.0; self.hidden];
            hidden.advance(&hidden_current, &self.lif, &mut pre);
            trace.hidden_pre.push(pre);

            out_current.copy_from_slice(&self.params.b2);
            for (h, &s) in hidden.spikes.iter().enumerate() {
                if s != 0.0 {
                    let row = &self.params.w2[h * self.classes..(h + 1) * self.classes];
                    for (c, &w) in out_current.iter_mut().zip(row) {
                        *c += s * w;
                    }
                }
            }
            trace.hidden_spikes.push(hidden.spikes.clone());

            let mut pre = vec![0.0; self.classes];
            output.advance(&out_current, &self.lif, &mut pre);
            let contribution = match self.readout {
                Readout::SpikeRate => &output.spikes,
                Readout::MembraneMean => &pre,
            };
            for (acc, &v) in trace.scores.iter_mut().zip(contribution) {
                *acc += v;
            }
            trace.output_pre.push(pre);
            trace.output_spikes.push(output.spikes.clone());
        }
        let inv = 1.0 / steps as f64;
        trace.scores.iter_mut().for_each(|v| *v *= inv);
        trace
    }

    /// Class scores for one input, optionally with the full spike record.
    pub fn forward<'a>(&self, input: impl Into<Input<'a>>, record: bool) -> Result<ForwardOutput> {
        let input = input.into();
        self.check_input(&input)?;
        let trace = self.simulate(&input.entries());
        let record = record.then(|| SpikeRecord {
            hidden_membrane: trace.hidden_pre,
            hidden_spikes: trace.hidden_spikes,
            output_membrane: trace.output_pre,
            output_spikes: trace.output_spikes,
        });
        Ok(ForwardOutput {
            class_scores: trace.scores,
            record,
        })
    }

    pub fn predict<'a>(&self, input: impl Into<Input<'a>>) -> Result<usize> {
        let scores = self.forward(input, false)?.class_scores;
        Ok(argmax(&scores))
    }

    /// Loss and compact gradient of softmax cross-entropy on the class
    /// scores for one example.
    pub fn example_gradient<'a>(&self, input: impl Into<Input<'a>>, target: usize) -> Result<ExampleGradient> {
        let input = input.into();
        self.check_input(&input)?;
        if target >= self.classes {
            return Err(Error::param(format!(
                "target {target} out of range for {} classes",
                self.classes
            )));
        }
        let entries = input.entries();
        let trace = self.simulate(&entries);
        let (loss, score_grad) = softmax_cross_entropy(&trace.scores, target)?;

        let steps = self.lif.time_steps;
        let inv = 1.0 / steps as f64;
        let through_time = self.gradient_flow == GradientFlow::ThroughTime;

        // Output layer: external gradient w.r.t. spikes (rate readout) or
        // directly w.r.t. the pre-reset membrane (membrane readout).
        let ext: Vec<f64> = score_grad.iter().map(|g| g * inv).collect();
        let (ext_spike, ext_membrane) = match self.readout {
            Readout::SpikeRate => (Some(ext.as_slice()), None),
            Readout::MembraneMean => (None, Some(ext.as_slice())),
        };
        let output_delta = self.layer_backward(
            &trace.output_pre,
            &trace.output_spikes,
            |_| ext_spike,
            ext_membrane,
            through_time,
        );

        let mut w2 = vec![0.0; self.hidden * self.classes];
        let mut b2 = vec![0.0; self.classes];
        let mut hidden_ext = vec![vec![0.0; self.hidden]; steps];
        for t in 0..steps {
            let delta = &output_delta[t];
            for (g, &d) in b2.iter_mut().zip(delta) {
                *g += d;
            }
            for h in 0..self.hidden {
                let s = trace.hidden_spikes[t][h];
                let row = &self.params.w2[h * self.classes..(h + 1) * self.classes];
                let grow = &mut w2[h * self.classes..(h + 1) * self.classes];
                let mut back = 0.0;
                for c in 0..self.classes {
                    grow[c] += s * delta[c];
                    back += row[c] * delta[c];
                }
                hidden_ext[t][h] = back;
            }
        }

        let hidden_delta_steps = self.layer_backward(
            &trace.hidden_pre,
            &trace.hidden_spikes,
            |t| Some(hidden_ext[t].as_slice()),
            None,
            through_time,
        );
        let mut hidden_delta = vec![0.0; self.hidden];
        for delta in &hidden_delta_steps {
            for (acc, &d) in hidden_delta.iter_mut().zip(delta) {
                *acc += d;
            }
        }

        Ok(ExampleGradient {
            loss,
            class_scores: trace.scores,
            input: entries,
            hidden_delta,
            w2,
            b2,
        })
    }

    /// Gradients of the loss w.r.t. every parameter, same shapes as
    /// [`Parameters`].
    pub fn backward<'a>(&self, input: impl Into<Input<'a>>, target: usize) -> Result<(f64, Parameters)> {
        let g = self.example_gradient(input, target)?;
        let mut grads = Parameters::zeros_like(&self.params);
        g.add_to(&mut grads, 1.0);
        Ok((g.loss, grads))
    }

    /// Returns dL/d(input current) per step for one LIF layer.
    ///
    /// `ext_spike(t)` is the gradient arriving at the step-`t` spikes from
    /// downstream; `ext_membrane` is a per-step gradient on the pre-reset
    /// membrane (same for every step). With `through_time` the carry-over
    /// `u_{t+1} = decay * reset(u_t, s_t) + I_{t+1}` is differentiated too.
    fn layer_backward<'e>(
        &self,
        pre: &[Vec<f64>],
        spikes: &[Vec<f64>],
        ext_spike: impl Fn(usize) -> Option<&'e [f64]>,
        ext_membrane: Option<&[f64]>,
        through_time: bool,
    ) -> Vec<Vec<f64>> {
        let steps = pre.len();
        let n = pre.first().map_or(0, Vec::len);
        let cfg = &self.lif;
        let mut deltas = vec![vec![0.0; n]; steps];
        // dL/d(post-reset membrane) flowing back from step t + 1.
        let mut carry = vec![0.0; n];
        for t in (0..steps).rev() {
            let es = ext_spike(t);
            for k in 0..n {
                let u = pre[t][k];
                let s = spikes[t][k];
                let ds_du = cfg.spike_derivative(u);
                let mut grad_s = es.map_or(0.0, |e| e[k]);
                let mut grad_u = ext_membrane.map_or(0.0, |e| e[k]);
                if through_time {
                    let (dpost_du, dpost_ds) = match cfg.reset {
                        super::ResetMode::Subtract => (1.0, -cfg.threshold),
                        super::ResetMode::Zero => (1.0 - s, -u),
                    };
                    grad_u += carry[k] * dpost_du;
                    grad_s += carry[k] * dpost_ds;
                }
                let delta = grad_u + grad_s * ds_du;
                deltas[t][k] = delta;
                carry[k] = if through_time {
                    delta * cfg.decay_multiplier
                } else {
                    0.0
                };
            }
        }
        deltas
    }
}

/// Index of the largest score; ties go to the lowest index.
pub fn argmax(scores: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in scores.iter().enumerate() {
        if v > scores[best] {
            best = i;
        }
    }
    best
}
