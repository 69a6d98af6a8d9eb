//! Reverse-time generation: four predictors (Euler-Maruyama, ancestral
//! sampling, reverse diffusion, probability flow), the Langevin corrector,
//! forward perturbation for boundary-style seeding, and the solver loop that
//! walks a uniform time grid from t_start down to t_min.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SosError};
use crate::scorenet::Score;
use crate::sde::{drift_diffusion, perturbation_kernel, SdeConfig, SdeFamily, T_MAX};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Predictor {
    #[serde(rename = "EM")]
    EulerMaruyama,
    AncestralSampling,
    ReverseDiffusion,
    ProbabilityFlow,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Corrector {
    None,
    Langevin,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SamplerConfig {
    pub predictor: Predictor,
    #[serde(default = "default_corrector")]
    pub corrector: Corrector,
    /// Signal-to-noise ratio of the corrector step.
    #[serde(default = "default_snr")]
    pub snr: f64,
    /// Number of predictor steps on the time grid.
    #[serde(default = "default_steps")]
    pub steps: usize,
    #[serde(default = "default_corrector_steps")]
    pub corrector_steps: usize,
    /// Noising horizon for boundary seeding; the reverse solve starts here.
    #[serde(default = "default_t_end")]
    pub t_end: f64,
    #[serde(default)]
    pub seed: u64,
}

fn default_corrector() -> Corrector {
    Corrector::None
}
fn default_snr() -> f64 {
    0.16
}
fn default_steps() -> usize {
    50
}
fn default_corrector_steps() -> usize {
    1
}
fn default_t_end() -> f64 {
    1.0
}

impl Default for SamplerConfig {
    fn default() -> Self {
        SamplerConfig {
            predictor: Predictor::EulerMaruyama,
            corrector: Corrector::None,
            snr: default_snr(),
            steps: default_steps(),
            corrector_steps: default_corrector_steps(),
            t_end: default_t_end(),
            seed: 0,
        }
    }
}

impl SamplerConfig {
    pub fn validate(&self, family: SdeFamily) -> Result<()> {
        if self.steps == 0 {
            return Err(SosError::BadConfig("sampler steps must be >= 1".into()));
        }
        if !self.snr.is_finite() || self.snr <= 0.0 {
            return Err(SosError::BadConfig("snr must be > 0".into()));
        }
        if !(self.t_end > 0.0 && self.t_end <= T_MAX) {
            return Err(SosError::BadConfig(format!("t_end must lie in (0, 1], got {}", self.t_end)));
        }
        if self.predictor == Predictor::AncestralSampling && family == SdeFamily::SubVP {
            return Err(SosError::UnsupportedSampler);
        }
        Ok(())
    }

    /// Corrector actually in effect: probability flow is an ODE and Sub-VP
    /// skips correction; both demote Langevin with a notice.
    pub fn effective_corrector(&self, family: SdeFamily) -> (Corrector, Option<String>) {
        if self.corrector == Corrector::None {
            return (Corrector::None, None);
        }
        if self.predictor == Predictor::ProbabilityFlow {
            return (
                Corrector::None,
                Some("corrector ignored: probability flow is deterministic".into()),
            );
        }
        if family == SdeFamily::SubVP {
            return (Corrector::None, Some("corrector ignored: Sub-VP never corrects".into()));
        }
        (Corrector::Langevin, None)
    }
}

fn draw_normal<R: Rng>(rng: &mut R, dim: usize) -> Vec<f64> {
    (0..dim).map(|_| rng.sample::<f64, _>(StandardNormal)).collect()
}

/// Noise a clean encoded row up to `t_end` with the closed-form kernel.
pub fn forward_perturb<R: Rng>(
    cfg: &SdeConfig,
    x0: &[f64],
    t_end: f64,
    rng: &mut R,
) -> Result<Vec<f64>> {
    let kp = perturbation_kernel(cfg, t_end)?;
    let z = draw_normal(rng, x0.len());
    Ok(x0.iter().zip(&z).map(|(x, z)| kp.mean_coeff * x + kp.std * z).collect())
}

/// One reverse step from t_i down to t_prev (t_i > t_prev).
pub fn predictor_step<S: Score, R: Rng>(
    kind: Predictor,
    cfg: &SdeConfig,
    score: &S,
    x: &[f64],
    t_i: f64,
    t_prev: f64,
    rng: &mut R,
) -> Result<Vec<f64>> {
    if !(t_i > t_prev && t_prev >= cfg.t_min - 1e-12) {
        return Err(SosError::TimeOutOfRange { t: t_prev, lo: cfg.t_min, hi: t_i });
    }
    let dt = t_i - t_prev;
    let s = score.eval(x, t_i);
    match kind {
        Predictor::EulerMaruyama => {
            let (f, g) = drift_diffusion(cfg, x, t_i)?;
            let z = draw_normal(rng, x.len());
            Ok((0..x.len())
                .map(|k| x[k] - (f[k] - g * g * s[k]) * dt + g * dt.sqrt() * z[k])
                .collect())
        }
        Predictor::ProbabilityFlow => {
            let (f, g) = drift_diffusion(cfg, x, t_i)?;
            Ok((0..x.len()).map(|k| x[k] - (f[k] - 0.5 * g * g * s[k]) * dt).collect())
        }
        Predictor::ReverseDiffusion => {
            // Discrete view of the same SDE: the per-step mean ratio comes from
            // the kernel mean coefficients and the per-step variance from the
            // kernel std difference, so continuous and discrete stay consistent.
            let kp_i = perturbation_kernel(cfg, t_i)?;
            let kp_prev = perturbation_kernel(cfg, t_prev)?;
            let mean_ratio = kp_i.mean_coeff / kp_prev.mean_coeff;
            let var = (kp_i.std * kp_i.std - kp_prev.std * kp_prev.std).max(0.0);
            let g_i = var.sqrt();
            let z = draw_normal(rng, x.len());
            Ok((0..x.len())
                .map(|k| x[k] - (mean_ratio - 1.0) * x[k] + var * s[k] + g_i * z[k])
                .collect())
        }
        Predictor::AncestralSampling => match cfg.family {
            SdeFamily::VE => {
                let s_i2 = cfg.sigma(t_i).powi(2);
                let s_prev2 = cfg.sigma(t_prev).powi(2);
                let dv = (s_i2 - s_prev2).max(0.0);
                let noise_var = dv * s_prev2 / s_i2;
                let z = draw_normal(rng, x.len());
                Ok((0..x.len())
                    .map(|k| x[k] + dv * s[k] + noise_var.sqrt() * z[k])
                    .collect())
            }
            SdeFamily::VP => {
                let beta_i = cfg.beta(t_i) * dt;
                if beta_i >= 1.0 {
                    return Err(SosError::NumericFailure(format!(
                        "ancestral VP step needs beta(t)*dt < 1, got {beta_i}; increase steps"
                    )));
                }
                let z = draw_normal(rng, x.len());
                Ok((0..x.len())
                    .map(|k| (x[k] + beta_i * s[k]) / (1.0 - beta_i).sqrt() + beta_i.sqrt() * z[k])
                    .collect())
            }
            SdeFamily::SubVP => Err(SosError::UnsupportedSampler),
        },
    }
}

/// Langevin step size from the signal-to-noise ratio.
pub fn corrector_epsilon(alpha: f64, snr: f64, z_norm: f64, s_norm: f64) -> f64 {
    2.0 * alpha * (snr * z_norm / s_norm).powi(2)
}

/// One Langevin correction at time t. Returns the new point and whether the
/// step ran (a zero score skips it).
pub fn corrector_step<S: Score, R: Rng>(
    cfg: &SdeConfig,
    score: &S,
    x: &[f64],
    t: f64,
    snr: f64,
    dt: f64,
    rng: &mut R,
) -> Result<(Vec<f64>, bool)> {
    let alpha = match cfg.family {
        SdeFamily::VE => 1.0,
        SdeFamily::VP => 1.0 - cfg.beta(t) * dt,
        SdeFamily::SubVP => return Err(SosError::UnsupportedSampler),
    };
    if alpha <= 0.0 {
        return Err(SosError::NumericFailure(format!(
            "corrector alpha nonpositive at t={t}; increase steps"
        )));
    }
    let s = score.eval(x, t);
    let s_norm = s.iter().map(|v| v * v).sum::<f64>().sqrt();
    if s_norm == 0.0 {
        return Ok((x.to_vec(), false));
    }
    let z = draw_normal(rng, x.len());
    let z_norm = z.iter().map(|v| v * v).sum::<f64>().sqrt();
    let eps = corrector_epsilon(alpha, snr, z_norm, s_norm);
    let step = (2.0 * eps).sqrt();
    Ok(((0..x.len()).map(|k| x[k] + eps * s[k] + step * z[k]).collect(), true))
}

#[derive(Debug, Clone, Default)]
pub struct SolveStats {
    pub predictor_steps: usize,
    pub corrector_steps: usize,
    /// Corrector invocations skipped because the score vanished.
    pub zero_score_skips: usize,
    pub corrector_notice: Option<String>,
}

/// Integrate the reverse process from `t_start` down to t_min on a uniform
/// grid of `sampler.steps` predictor steps, with optional Langevin
/// corrections after each.
pub fn reverse_solve<S: Score, R: Rng>(
    cfg: &SdeConfig,
    score: &S,
    x_end: &[f64],
    sampler: &SamplerConfig,
    t_start: f64,
    rng: &mut R,
) -> Result<Vec<f64>> {
    Ok(reverse_solve_traced(cfg, score, x_end, sampler, t_start, rng)?.0)
}

pub fn reverse_solve_traced<S: Score, R: Rng>(
    cfg: &SdeConfig,
    score: &S,
    x_end: &[f64],
    sampler: &SamplerConfig,
    t_start: f64,
    rng: &mut R,
) -> Result<(Vec<f64>, SolveStats)> {
    sampler.validate(cfg.family)?;
    if !(t_start > cfg.t_min && t_start <= T_MAX + 1e-12) {
        return Err(SosError::TimeOutOfRange { t: t_start, lo: cfg.t_min, hi: T_MAX });
    }
    let n = sampler.steps;
    let dt = (t_start - cfg.t_min) / n as f64;
    let (corrector, notice) = sampler.effective_corrector(cfg.family);
    let mut stats = SolveStats { corrector_notice: notice, ..SolveStats::default() };
    let mut x = x_end.to_vec();
    for k in 0..n {
        let t_i = t_start - k as f64 * dt;
        let t_prev = if k + 1 == n { cfg.t_min } else { t_start - (k + 1) as f64 * dt };
        x = predictor_step(sampler.predictor, cfg, score, &x, t_i, t_prev, rng)?;
        stats.predictor_steps += 1;
        if corrector == Corrector::Langevin {
            for _ in 0..sampler.corrector_steps {
                let (next, stepped) = corrector_step(cfg, score, &x, t_prev, sampler.snr, dt, rng)?;
                x = next;
                if stepped {
                    stats.corrector_steps += 1;
                } else {
                    stats.zero_score_skips += 1;
                }
            }
        }
    }
    Ok((x, stats))
}
