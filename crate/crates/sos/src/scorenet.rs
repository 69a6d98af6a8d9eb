//! Time-conditioned score network for tabular vectors.
//!
//! The net is a stack of hidden blocks with a residual concatenation:
//!
//! ```text
//! h_0 = x
//! h_i = act( block_i(h_{i-1}, t) ++ h_{i-1} )      i = 1..=N
//! out = fc_out(h_N)                                 width = input width
//! ```
//!
//! `block_i` comes in three flavours, selected once for the whole net:
//! * `Squash`:       fc_i(h) * sigmoid(fc_t_i(t))          (elementwise)
//! * `Concat`:       fc_i(t ++ h)
//! * `Concatsquash`: fc_i(h) * sigmoid(fc_gate_i(t) + fc_bias_i(t))
//!
//! The activation is applied to the whole concatenated vector, skip path
//! included. Time enters as the raw scalar; there is no embedding.
//!
//! Parameters live in one flat `f64` array with a deterministic layout
//! (per layer: main weights, main bias, then any time-branch weights and
//! biases, finally the output layer), so models serialize as a plain array
//! and gradients are congruent by construction.

use rand::Rng;
use rand::SeedableRng;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SosError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LayerType {
    Squash,
    Concat,
    Concatsquash,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Activation {
    ReLU,
    /// Negative slope fixed at 0.2.
    LeakyReLU,
    SoftPlus,
}

impl Activation {
    fn apply(&self, x: f64) -> f64 {
        match self {
            Activation::ReLU => x.max(0.0),
            Activation::LeakyReLU => {
                if x > 0.0 {
                    x
                } else {
                    0.2 * x
                }
            }
            Activation::SoftPlus => softplus(x),
        }
    }

    fn derivative(&self, x: f64) -> f64 {
        match self {
            Activation::ReLU => {
                if x > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::LeakyReLU => {
                if x > 0.0 {
                    1.0
                } else {
                    0.2
                }
            }
            Activation::SoftPlus => sigmoid(x),
        }
    }
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetSpec {
    pub layer_type: LayerType,
    pub hidden_dims: Vec<usize>,
    pub activation: Activation,
    pub input_dim: usize,
}

impl NetSpec {
    pub fn new(
        layer_type: LayerType,
        hidden_dims: Vec<usize>,
        activation: Activation,
        input_dim: usize,
    ) -> Result<Self> {
        if hidden_dims.is_empty() || hidden_dims.contains(&0) || input_dim == 0 {
            return Err(SosError::BadConfig("net dims must all be >= 1".into()));
        }
        Ok(NetSpec { layer_type, hidden_dims, activation, input_dim })
    }
}

/// Flat parameter store; offsets are fixed by [`layout`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Params(pub Vec<f64>);

impl Params {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// One dense layer inside the flat array: row-major weights then biases.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Dense {
    pub w: usize,
    pub b: usize,
    pub in_dim: usize,
    pub out_dim: usize,
}

impl Dense {
    fn apply(&self, params: &[f64], input: &[f64], out: &mut Vec<f64>) {
        out.clear();
        for o in 0..self.out_dim {
            let row = &params[self.w + o * self.in_dim..self.w + (o + 1) * self.in_dim];
            let mut acc = params[self.b + o];
            for (w, x) in row.iter().zip(input) {
                acc += w * x;
            }
            out.push(acc);
        }
    }

    /// Accumulate dL/dW, dL/db from dL/dout, and add dL/dinput into `d_input`.
    fn backward(
        &self,
        params: &[f64],
        input: &[f64],
        d_out: &[f64],
        grads: &mut [f64],
        d_input: Option<&mut [f64]>,
    ) {
        for (o, g) in d_out.iter().enumerate() {
            grads[self.b + o] += g;
            let row = self.w + o * self.in_dim;
            for (i, x) in input.iter().enumerate() {
                grads[row + i] += g * x;
            }
        }
        if let Some(d_input) = d_input {
            for (o, g) in d_out.iter().enumerate() {
                let row = self.w + o * self.in_dim;
                for (i, d) in d_input.iter_mut().enumerate() {
                    *d += g * params[row + i];
                }
            }
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct LayerLayout {
    pub main: Dense,
    /// `Squash` time branch.
    pub time: Option<Dense>,
    /// `Concatsquash` branches.
    pub gate: Option<Dense>,
    pub shift: Option<Dense>,
    /// Width of h_{i-1} and of the concatenated output.
    pub in_width: usize,
    pub cat_width: usize,
    pub block_width: usize,
}

#[derive(Debug, Clone)]
pub(crate) struct Layout {
    pub layers: Vec<LayerLayout>,
    pub out: Dense,
    pub total: usize,
}

pub(crate) fn layout(spec: &NetSpec) -> Layout {
    let mut off = 0;
    let mut dense = |in_dim: usize, out_dim: usize| {
        let d = Dense { w: off, b: off + in_dim * out_dim, in_dim, out_dim };
        off += in_dim * out_dim + out_dim;
        d
    };
    let mut layers = Vec::with_capacity(spec.hidden_dims.len());
    let mut width = spec.input_dim;
    for &hidden in &spec.hidden_dims {
        let (main, time, gate, shift) = match spec.layer_type {
            LayerType::Squash => {
                (dense(width, hidden), Some(dense(1, hidden)), None, None)
            }
            LayerType::Concat => (dense(width + 1, hidden), None, None, None),
            LayerType::Concatsquash => (
                dense(width, hidden),
                None,
                Some(dense(1, hidden)),
                Some(dense(1, hidden)),
            ),
        };
        layers.push(LayerLayout {
            main,
            time,
            gate,
            shift,
            in_width: width,
            cat_width: hidden + width,
            block_width: hidden,
        });
        width += hidden;
    }
    let out = dense(width, spec.input_dim);
    Layout { layers, out, total: off }
}

pub fn param_count(spec: &NetSpec) -> usize {
    layout(spec).total
}

/// Glorot-uniform weights, zero biases, deterministic for a given seed.
pub fn init(spec: &NetSpec, seed: u64) -> Params {
    let lay = layout(spec);
    let mut values = vec![0.0; lay.total];
    let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
    let fill = |d: &Dense, values: &mut [f64], rng: &mut rand::rngs::StdRng| {
        let a = (6.0 / (d.in_dim + d.out_dim) as f64).sqrt();
        for w in &mut values[d.w..d.w + d.in_dim * d.out_dim] {
            *w = rng.gen_range(-a..a);
        }
    };
    for layer in &lay.layers {
        fill(&layer.main, &mut values, &mut rng);
        if let Some(d) = &layer.time {
            fill(d, &mut values, &mut rng);
        }
        if let Some(d) = &layer.gate {
            fill(d, &mut values, &mut rng);
        }
        if let Some(d) = &layer.shift {
            fill(d, &mut values, &mut rng);
        }
    }
    fill(&lay.out, &mut values, &mut rng);
    Params(values)
}

/// Per-layer intermediates kept for the backward pass.
#[derive(Debug, Clone)]
pub(crate) struct LayerTrace {
    input: Vec<f64>,
    /// Main dense output before any gating (Concat: the whole block output).
    main_out: Vec<f64>,
    /// sigmoid of the time-branch preactivation, when the block gates.
    gate_sig: Option<Vec<f64>>,
    /// Concatenated pre-activation the activation was applied to.
    concat_pre: Vec<f64>,
}

#[derive(Debug, Clone)]
pub(crate) struct Trace {
    pub layers: Vec<LayerTrace>,
    pub top: Vec<f64>,
    pub output: Vec<f64>,
    pub t: f64,
}

pub(crate) fn forward_trace(spec: &NetSpec, params: &Params, x: &[f64], t: f64) -> Result<Trace> {
    if x.len() != spec.input_dim {
        return Err(SosError::DimensionMismatch { want: spec.input_dim, got: x.len() });
    }
    let lay = layout(spec);
    if params.len() != lay.total {
        return Err(SosError::DimensionMismatch { want: lay.total, got: params.len() });
    }
    let p = &params.0;
    let mut h = x.to_vec();
    let mut traces = Vec::with_capacity(lay.layers.len());
    let mut scratch = Vec::new();
    for layer in &lay.layers {
        let (main_out, gate_sig) = match spec.layer_type {
            LayerType::Squash => {
                let mut a = Vec::new();
                layer.main.apply(p, &h, &mut a);
                layer.time.as_ref().unwrap().apply(p, &[t], &mut scratch);
                let s: Vec<f64> = scratch.iter().map(|u| sigmoid(*u)).collect();
                (a, Some(s))
            }
            LayerType::Concat => {
                let mut cat_in = Vec::with_capacity(1 + h.len());
                cat_in.push(t);
                cat_in.extend_from_slice(&h);
                let mut z = Vec::new();
                layer.main.apply(p, &cat_in, &mut z);
                (z, None)
            }
            LayerType::Concatsquash => {
                let mut a = Vec::new();
                layer.main.apply(p, &h, &mut a);
                layer.gate.as_ref().unwrap().apply(p, &[t], &mut scratch);
                let mut u = scratch.clone();
                layer.shift.as_ref().unwrap().apply(p, &[t], &mut scratch);
                for (u, v) in u.iter_mut().zip(&scratch) {
                    *u += v;
                }
                let s: Vec<f64> = u.iter().map(|u| sigmoid(*u)).collect();
                (a, Some(s))
            }
        };
        let block: Vec<f64> = match &gate_sig {
            Some(s) => main_out.iter().zip(s).map(|(a, s)| a * s).collect(),
            None => main_out.clone(),
        };
        let mut concat_pre = Vec::with_capacity(layer.cat_width);
        concat_pre.extend_from_slice(&block);
        concat_pre.extend_from_slice(&h);
        let next: Vec<f64> = concat_pre.iter().map(|c| spec.activation.apply(*c)).collect();
        traces.push(LayerTrace { input: std::mem::replace(&mut h, next), main_out, gate_sig, concat_pre });
    }
    let mut output = Vec::new();
    lay.out.apply(p, &h, &mut output);
    Ok(Trace { layers: traces, top: h, output, t })
}

/// Score estimate S(x, t); same shape as x.
pub fn forward(spec: &NetSpec, params: &Params, x: &[f64], t: f64) -> Result<Vec<f64>> {
    Ok(forward_trace(spec, params, x, t)?.output)
}

/// Accumulate dL/dparams into `grads` given dL/doutput for one sample.
pub(crate) fn backward(
    spec: &NetSpec,
    params: &Params,
    trace: &Trace,
    d_output: &[f64],
    grads: &mut [f64],
) {
    debug_assert_eq!(grads.len(), params.len());
    let lay = layout(spec);
    let p = &params.0;
    let t = trace.t;

    let mut d_h = vec![0.0; trace.top.len()];
    lay.out.backward(p, &trace.top, d_output, grads, Some(&mut d_h));

    for (layer, tr) in lay.layers.iter().zip(&trace.layers).rev() {
        // through the activation over the concatenated vector
        let d_cat: Vec<f64> = trace_activation_grad(spec, &tr.concat_pre, &d_h);
        let (d_block, d_skip) = d_cat.split_at(layer.block_width);

        let mut d_input = vec![0.0; layer.in_width];
        d_input.copy_from_slice(d_skip);

        match spec.layer_type {
            LayerType::Concat => {
                let mut cat_in = Vec::with_capacity(1 + tr.input.len());
                cat_in.push(t);
                cat_in.extend_from_slice(&tr.input);
                let mut d_cat_in = vec![0.0; cat_in.len()];
                layer.main.backward(p, &cat_in, d_block, grads, Some(&mut d_cat_in));
                for (d, g) in d_input.iter_mut().zip(&d_cat_in[1..]) {
                    *d += g;
                }
            }
            LayerType::Squash | LayerType::Concatsquash => {
                let s = tr.gate_sig.as_ref().unwrap();
                let d_main: Vec<f64> = d_block.iter().zip(s).map(|(d, s)| d * s).collect();
                let d_gate_pre: Vec<f64> = d_block
                    .iter()
                    .zip(&tr.main_out)
                    .zip(s)
                    .map(|((d, a), s)| d * a * s * (1.0 - s))
                    .collect();
                layer.main.backward(p, &tr.input, &d_main, grads, Some(&mut d_input));
                match spec.layer_type {
                    LayerType::Squash => {
                        layer.time.as_ref().unwrap().backward(p, &[t], &d_gate_pre, grads, None);
                    }
                    LayerType::Concatsquash => {
                        // the two branches share the preactivation sum
                        layer.gate.as_ref().unwrap().backward(p, &[t], &d_gate_pre, grads, None);
                        layer.shift.as_ref().unwrap().backward(p, &[t], &d_gate_pre, grads, None);
                    }
                    LayerType::Concat => unreachable!(),
                }
            }
        }
        d_h = d_input;
    }
}

fn trace_activation_grad(spec: &NetSpec, pre: &[f64], d_post: &[f64]) -> Vec<f64> {
    pre.iter().zip(d_post).map(|(c, d)| d * spec.activation.derivative(*c)).collect()
}

/// Anything that can evaluate a score estimate; lets the samplers run on a
/// trained network or on an analytic stand-in.
pub trait Score {
    fn eval(&self, x: &[f64], t: f64) -> Vec<f64>;
}

pub struct NetScore<'a> {
    pub spec: &'a NetSpec,
    pub params: &'a Params,
}

impl Score for NetScore<'_> {
    fn eval(&self, x: &[f64], t: f64) -> Vec<f64> {
        forward(self.spec, self.params, x, t).expect("net and sampler dims agree")
    }
}

impl<F> Score for F
where
    F: Fn(&[f64], f64) -> Vec<f64>,
{
    fn eval(&self, x: &[f64], t: f64) -> Vec<f64> {
        self(x, t)
    }
}
