//! Denoising score matching: perturb clean rows with the forward kernel,
//! regress the network onto the analytic conditional score, and descend with
//! Adam. The per-row weight is the kernel variance, which collapses each term
//! to ||std * S(x_t, t) + z||^2.

use std::time::Instant;

use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SosError};
use crate::scorenet::{self, NetScore, NetSpec, Params, Score};
use crate::sde::{perturbation_kernel, SdeConfig, T_MAX};

pub const ADAM_BETA1: f64 = 0.9;
pub const ADAM_BETA2: f64 = 0.999;
pub const ADAM_EPS: f64 = 1e-8;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrainConfig {
    pub batch_size: usize,
    pub epochs: usize,
    pub learning_rate: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig { batch_size: 256, epochs: 100, learning_rate: 1e-3, seed: 0 }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.batch_size == 0 {
            return Err(SosError::BadConfig("batch_size must be >= 1".into()));
        }
        if !self.learning_rate.is_finite() || self.learning_rate <= 0.0 {
            return Err(SosError::BadConfig("learning_rate must be > 0".into()));
        }
        Ok(())
    }
}

/// Gradient array congruent to the parameters plus Adam moments.
#[derive(Debug, Clone)]
pub struct GradBuffer {
    pub grads: Vec<f64>,
    m: Vec<f64>,
    v: Vec<f64>,
    step: u64,
}

impl GradBuffer {
    pub fn new(len: usize) -> Self {
        GradBuffer { grads: vec![0.0; len], m: vec![0.0; len], v: vec![0.0; len], step: 0 }
    }

    pub fn zero_grads(&mut self) {
        self.grads.iter_mut().for_each(|g| *g = 0.0);
    }
}

/// One noised training row: x_t = mean_coeff * x0 + std * z.
#[derive(Debug, Clone)]
pub struct PerturbedRow {
    pub x_t: Vec<f64>,
    pub t: f64,
    pub std: f64,
    pub z: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct DsmBatch {
    pub rows: Vec<PerturbedRow>,
}

/// Draw one (t, z) pair per row, t uniform on (t_min, 1].
pub fn perturb_batch<R: Rng>(cfg: &SdeConfig, rows: &[Vec<f64>], rng: &mut R) -> Result<DsmBatch> {
    let mut out = Vec::with_capacity(rows.len());
    for x0 in rows {
        let u: f64 = 1.0 - rng.gen::<f64>(); // (0, 1]
        let t = cfg.t_min + (T_MAX - cfg.t_min) * u;
        let kp = perturbation_kernel(cfg, t)?;
        let z: Vec<f64> = (0..x0.len()).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        let x_t: Vec<f64> =
            x0.iter().zip(&z).map(|(x, z)| kp.mean_coeff * x + kp.std * z).collect();
        out.push(PerturbedRow { x_t, t, std: kp.std, z });
    }
    Ok(DsmBatch { rows: out })
}

/// Weighted score-matching loss of any score evaluator on a perturbed batch.
/// Forward-only; the finite-difference oracle in the tests differentiates this.
pub fn batch_loss<S: Score>(batch: &DsmBatch, score: &S) -> f64 {
    let mut acc = 0.0;
    for row in &batch.rows {
        let s = score.eval(&row.x_t, row.t);
        for (s, z) in s.iter().zip(&row.z) {
            let r = row.std * s + z;
            acc += r * r;
        }
    }
    acc / batch.rows.len() as f64
}

/// Ties a loss evaluation to the exact parameters it saw.
#[derive(Debug, Clone)]
pub struct DsmCache {
    pub batch: DsmBatch,
    fingerprint: u64,
}

fn fingerprint(params: &Params) -> u64 {
    let mut h: u64 = 0xcbf29ce484222325;
    for v in &params.0 {
        h ^= v.to_bits();
        h = h.wrapping_mul(0x100000001b3);
    }
    h ^ params.len() as u64
}

/// Sample perturbations for `rows` and evaluate the loss; the cache feeds [`grad`].
pub fn dsm_loss<R: Rng>(
    spec: &NetSpec,
    params: &Params,
    cfg: &SdeConfig,
    rows: &[Vec<f64>],
    rng: &mut R,
) -> Result<(f64, DsmCache)> {
    if rows.is_empty() {
        return Err(SosError::TooFewRows { need: 1, got: 0 });
    }
    let batch = perturb_batch(cfg, rows, rng)?;
    let loss = batch_loss(&batch, &NetScore { spec, params });
    Ok((loss, DsmCache { batch, fingerprint: fingerprint(params) }))
}

/// Exact loss gradient for the cached batch, accumulated into `buf.grads`.
pub fn grad(spec: &NetSpec, params: &Params, cache: &DsmCache, buf: &mut GradBuffer) -> Result<()> {
    if cache.fingerprint != fingerprint(params) {
        return Err(SosError::StaleCache);
    }
    buf.zero_grads();
    accumulate_grad(spec, params, &cache.batch, &mut buf.grads)?;
    Ok(())
}

/// Fused loss + gradient over a perturbed batch (training hot path).
pub(crate) fn accumulate_grad(
    spec: &NetSpec,
    params: &Params,
    batch: &DsmBatch,
    grads: &mut [f64],
) -> Result<f64> {
    let n = batch.rows.len() as f64;
    let mut loss = 0.0;
    for row in &batch.rows {
        let trace = scorenet::forward_trace(spec, params, &row.x_t, row.t)?;
        let mut d_out = Vec::with_capacity(trace.output.len());
        for (s, z) in trace.output.iter().zip(&row.z) {
            let r = row.std * s + z;
            loss += r * r;
            d_out.push(2.0 * row.std * r / n);
        }
        scorenet::backward(spec, params, &trace, &d_out, grads);
    }
    Ok(loss / n)
}

/// One Adam update with bias correction; `buf.grads` holds the gradient.
pub fn adam_step(params: &mut Params, buf: &mut GradBuffer, lr: f64) {
    debug_assert_eq!(params.len(), buf.grads.len());
    buf.step += 1;
    let bc1 = 1.0 - ADAM_BETA1.powi(buf.step as i32);
    let bc2 = 1.0 - ADAM_BETA2.powi(buf.step as i32);
    for i in 0..params.len() {
        let g = buf.grads[i];
        buf.m[i] = ADAM_BETA1 * buf.m[i] + (1.0 - ADAM_BETA1) * g;
        buf.v[i] = ADAM_BETA2 * buf.v[i] + (1.0 - ADAM_BETA2) * g * g;
        let m_hat = buf.m[i] / bc1;
        let v_hat = buf.v[i] / bc2;
        params.0[i] -= lr * m_hat / (v_hat.sqrt() + ADAM_EPS);
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct EpochStat {
    pub epoch: usize,
    pub mean_loss: f64,
    pub wall_seconds: f64,
}

/// Train one class's network from scratch over shuffled minibatches.
pub fn train_class(
    class_rows: &[Vec<f64>],
    spec: &NetSpec,
    sde_cfg: &SdeConfig,
    train_cfg: &TrainConfig,
) -> Result<(Params, Vec<EpochStat>)> {
    train_cfg.validate()?;
    if class_rows.is_empty() {
        return Err(SosError::TooFewRows { need: 1, got: 0 });
    }
    let mut params = scorenet::init(spec, train_cfg.seed);
    let mut buf = GradBuffer::new(params.len());
    let mut rng = rand::rngs::StdRng::seed_from_u64(train_cfg.seed.wrapping_add(1));
    let mut order: Vec<usize> = (0..class_rows.len()).collect();
    let mut stats = Vec::with_capacity(train_cfg.epochs);
    for epoch in 0..train_cfg.epochs {
        let started = Instant::now();
        order.shuffle(&mut rng);
        let mut loss_sum = 0.0;
        for chunk in order.chunks(train_cfg.batch_size) {
            let rows: Vec<Vec<f64>> = chunk.iter().map(|i| class_rows[*i].clone()).collect();
            let batch = perturb_batch(sde_cfg, &rows, &mut rng)?;
            buf.zero_grads();
            let loss = accumulate_grad(spec, &params, &batch, &mut buf.grads)?;
            adam_step(&mut params, &mut buf, train_cfg.learning_rate);
            loss_sum += loss * chunk.len() as f64;
        }
        stats.push(EpochStat {
            epoch: epoch + 1,
            mean_loss: loss_sum / class_rows.len() as f64,
            wall_seconds: started.elapsed().as_secs_f64(),
        });
    }
    Ok((params, stats))
}
