//! Post-training pass over the whole table: wherever a minor class's score
//! and the major class's score point in nearly the same direction (angle
//! below a threshold), the minor network is nudged to shrink its own score
//! by a factor w at that point, pulling the reverse process away from the
//! region where the classes overlap. The major network is never touched.

use rand::Rng;
use rand::SeedableRng;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SosError};
use crate::pipeline::{derive_seed, ModelSet};
use crate::sampling::forward_perturb;
use crate::scorenet::{self, NetSpec, Params};
use crate::sde::SdeConfig;
use crate::tabular::{encode, ClassId, Encoder, Table};
use crate::training::{adam_step, GradBuffer};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FinetuneConfig {
    /// Angle threshold in degrees, 0 < xi < 180.
    pub xi_degrees: f64,
    /// Damping factor in (0, 1).
    pub w: f64,
    /// Evaluation time. A value below 1 is a raw time; an integer k >= 1 is
    /// shorthand for the k-th grid step, i.e. t = k / steps.
    pub eps_t: f64,
    pub epochs: usize,
    pub learning_rate: f64,
    pub seed: u64,
}

impl Default for FinetuneConfig {
    fn default() -> Self {
        FinetuneConfig {
            xi_degrees: 90.0,
            w: 0.95,
            eps_t: 5e-4,
            epochs: 1,
            learning_rate: 2e-6,
            seed: 0,
        }
    }
}

impl FinetuneConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.xi_degrees >= 0.0 && self.xi_degrees < 180.0) {
            return Err(SosError::BadConfig(format!(
                "xi must lie in [0, 180), got {}",
                self.xi_degrees
            )));
        }
        if !(self.w > 0.0 && self.w < 1.0) {
            return Err(SosError::BadConfig(format!("w must lie in (0, 1), got {}", self.w)));
        }
        if !self.learning_rate.is_finite() || self.learning_rate <= 0.0 {
            return Err(SosError::BadConfig("learning_rate must be > 0".into()));
        }
        Ok(())
    }
}

/// Map a raw eps_t to a concrete time: integers >= 1 index the sampler grid.
pub fn resolve_eps_t(raw: f64, sampler_steps: usize, t_min: f64) -> f64 {
    let t = if raw >= 1.0 { raw.round() / sampler_steps.max(1) as f64 } else { raw };
    t.clamp(t_min, 1.0)
}

/// Angle between two gradients in degrees, scale-invariant.
pub fn angle_degrees(g1: &[f64], g2: &[f64]) -> Result<f64> {
    let n1 = g1.iter().map(|v| v * v).sum::<f64>().sqrt();
    let n2 = g2.iter().map(|v| v * v).sum::<f64>().sqrt();
    if n1 == 0.0 || n2 == 0.0 {
        return Err(SosError::ZeroVector);
    }
    let dot: f64 = g1.iter().zip(g2).map(|(a, b)| a * b).sum();
    let cos = (dot / (n1 * n2)).clamp(-1.0, 1.0);
    Ok(cos.acos().to_degrees())
}

/// Noise a record to (x_t, eps_t) and evaluate one network's score there.
pub fn score_at<R: Rng>(
    spec: &NetSpec,
    params: &Params,
    sde: &SdeConfig,
    x: &[f64],
    eps_t: f64,
    rng: &mut R,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let x_t = forward_perturb(sde, x, eps_t, rng)?;
    let g = scorenet::forward(spec, params, &x_t, eps_t)?;
    Ok((x_t, g))
}

/// One damping update: freeze the target w * S(x_t, eps_t), take one Adam
/// step on || S(x_t, eps_t) - target ||^2. Returns the entry loss, which is
/// (1-w)^2 ||S||^2 by construction.
pub fn finetune_step(
    spec: &NetSpec,
    params: &mut Params,
    adam: &mut GradBuffer,
    x_t: &[f64],
    eps_t: f64,
    w: f64,
    lr: f64,
) -> Result<f64> {
    let trace = scorenet::forward_trace(spec, params, x_t, eps_t)?;
    let mut loss = 0.0;
    let mut d_out = Vec::with_capacity(trace.output.len());
    for s in &trace.output {
        let r = s - w * s; // residual against the frozen target
        loss += r * r;
        d_out.push(2.0 * r);
    }
    adam.zero_grads();
    scorenet::backward(spec, params, &trace, &d_out, &mut adam.grads);
    adam_step(params, adam, lr);
    Ok(loss)
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct FinetuneReport {
    /// (record, minor class) pairs examined.
    pub comparisons: usize,
    /// Pairs whose angle fell below xi and triggered an update.
    pub triggers: usize,
    /// Pairs skipped because one score vanished.
    pub zero_score_skips: usize,
    pub per_class_triggers: Vec<(ClassId, usize)>,
}

impl FinetuneReport {
    pub fn trigger_rate(&self) -> f64 {
        if self.comparisons == 0 {
            0.0
        } else {
            self.triggers as f64 / self.comparisons as f64
        }
    }
}

/// Fine-tune every minor class network against the major one over all
/// records of the table, class labels ignored.
pub fn finetune_all(
    modelset: &mut ModelSet,
    table: &Table,
    encoder: &Encoder,
    cfg: &FinetuneConfig,
) -> Result<FinetuneReport> {
    cfg.validate()?;
    let eps_t = resolve_eps_t(cfg.eps_t, 50, modelset.sde.t_min);
    finetune_all_at(modelset, table, encoder, cfg, eps_t)
}

/// Same with the evaluation time already resolved against the sampler grid.
pub fn finetune_all_at(
    modelset: &mut ModelSet,
    table: &Table,
    encoder: &Encoder,
    cfg: &FinetuneConfig,
    eps_t: f64,
) -> Result<FinetuneReport> {
    cfg.validate()?;
    let (features, _) = encode(encoder, table)?;
    let major = modelset.major_class;
    let minors: Vec<ClassId> =
        modelset.models.keys().copied().filter(|c| *c != major).collect();
    let spec = modelset.spec.clone();
    let sde = modelset.sde;
    let major_params = modelset.params(major)?.clone();

    let mut adam: std::collections::BTreeMap<ClassId, GradBuffer> = minors
        .iter()
        .map(|c| (*c, GradBuffer::new(major_params.len())))
        .collect();
    let mut report = FinetuneReport {
        per_class_triggers: minors.iter().map(|c| (*c, 0)).collect(),
        ..FinetuneReport::default()
    };
    let mut rng = rand::rngs::StdRng::seed_from_u64(derive_seed(cfg.seed, 0xf17e));

    for _epoch in 0..cfg.epochs {
        for x in &features {
            // one shared noise draw per record so every network sees the same x_t
            let x_t = forward_perturb(&sde, x, eps_t, &mut rng)?;
            let g_major = scorenet::forward(&spec, &major_params, &x_t, eps_t)?;
            for (slot, minor) in minors.iter().enumerate() {
                report.comparisons += 1;
                let params = modelset.models.get_mut(minor).expect("minor model present");
                let g_minor = scorenet::forward(&spec, params, &x_t, eps_t)?;
                match angle_degrees(&g_minor, &g_major) {
                    Ok(angle) if angle < cfg.xi_degrees => {
                        let buf = adam.get_mut(minor).expect("adam state per minor");
                        finetune_step(&spec, params, buf, &x_t, eps_t, cfg.w, cfg.learning_rate)?;
                        report.triggers += 1;
                        report.per_class_triggers[slot].1 += 1;
                    }
                    Ok(_) => {}
                    Err(SosError::ZeroVector) => report.zero_score_skips += 1,
                    Err(e) => return Err(e),
                }
            }
        }
    }
    modelset.finetuned = modelset.finetuned || report.triggers > 0;
    Ok(report)
}
