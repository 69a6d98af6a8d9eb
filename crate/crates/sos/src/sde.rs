//! The three diffusion families (VE, VP, Sub-VP): noise schedules, drift and
//! diffusion coefficients, closed-form Gaussian perturbation kernels, the
//! analytic conditional score, and prior sampling.
//!
//! Schedules are the standard ones: linear `beta(t) = beta_min +
//! t*(beta_max - beta_min)` for VP/Sub-VP and geometric `sigma(t) =
//! sigma_min*(sigma_max/sigma_min)^t` for VE. Time is continuous on
//! [t_min, 1]; `t_min` keeps the kernel std away from zero so `1/std^2`
//! terms stay finite.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SosError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SdeFamily {
    VE,
    VP,
    SubVP,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SdeConfig {
    pub family: SdeFamily,
    #[serde(default = "default_beta_min")]
    pub beta_min: f64,
    #[serde(default = "default_beta_max")]
    pub beta_max: f64,
    #[serde(default = "default_sigma_min")]
    pub sigma_min: f64,
    #[serde(default = "default_sigma_max")]
    pub sigma_max: f64,
    #[serde(default = "default_t_min")]
    pub t_min: f64,
}

fn default_beta_min() -> f64 {
    0.01
}
fn default_beta_max() -> f64 {
    5.0
}
fn default_sigma_min() -> f64 {
    0.01
}
fn default_sigma_max() -> f64 {
    10.0
}
fn default_t_min() -> f64 {
    1e-5
}

pub const T_MAX: f64 = 1.0;

impl SdeConfig {
    pub fn new(family: SdeFamily) -> Self {
        SdeConfig {
            family,
            beta_min: default_beta_min(),
            beta_max: default_beta_max(),
            sigma_min: default_sigma_min(),
            sigma_max: default_sigma_max(),
            t_min: default_t_min(),
        }
    }

    pub fn vp(beta_min: f64, beta_max: f64) -> Self {
        SdeConfig { beta_min, beta_max, ..SdeConfig::new(SdeFamily::VP) }
    }

    pub fn sub_vp(beta_min: f64, beta_max: f64) -> Self {
        SdeConfig { beta_min, beta_max, ..SdeConfig::new(SdeFamily::SubVP) }
    }

    pub fn ve(sigma_min: f64, sigma_max: f64) -> Self {
        SdeConfig { sigma_min, sigma_max, ..SdeConfig::new(SdeFamily::VE) }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.beta_min > 0.0 && self.beta_min < self.beta_max) {
            return Err(SosError::BadConfig(format!(
                "need 0 < beta_min < beta_max, got ({}, {})",
                self.beta_min, self.beta_max
            )));
        }
        if !(self.sigma_min > 0.0 && self.sigma_min < self.sigma_max) {
            return Err(SosError::BadConfig(format!(
                "need 0 < sigma_min < sigma_max, got ({}, {})",
                self.sigma_min, self.sigma_max
            )));
        }
        if !(self.t_min > 0.0 && self.t_min < T_MAX) {
            return Err(SosError::BadConfig(format!("need 0 < t_min < 1, got {}", self.t_min)));
        }
        Ok(())
    }

    fn check_time(&self, t: f64) -> Result<()> {
        if t < self.t_min - 1e-12 || t > T_MAX + 1e-12 || !t.is_finite() {
            return Err(SosError::TimeOutOfRange { t, lo: self.t_min, hi: T_MAX });
        }
        Ok(())
    }

    pub fn beta(&self, t: f64) -> f64 {
        self.beta_min + t * (self.beta_max - self.beta_min)
    }

    /// Integral of beta over [0, t].
    pub fn beta_integral(&self, t: f64) -> f64 {
        self.beta_min * t + 0.5 * (self.beta_max - self.beta_min) * t * t
    }

    pub fn sigma(&self, t: f64) -> f64 {
        self.sigma_min * (self.sigma_max / self.sigma_min).powf(t)
    }
}

/// Mean multiplier and std of the Gaussian kernel mapping x0 to x_t.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelParams {
    pub mean_coeff: f64,
    pub std: f64,
}

/// Drift vector and scalar diffusion of the forward process at (x, t).
pub fn drift_diffusion(cfg: &SdeConfig, x: &[f64], t: f64) -> Result<(Vec<f64>, f64)> {
    cfg.check_time(t)?;
    match cfg.family {
        SdeFamily::VE => {
            let g = cfg.sigma(t) * (2.0 * (cfg.sigma_max / cfg.sigma_min).ln()).sqrt();
            Ok((vec![0.0; x.len()], g))
        }
        SdeFamily::VP => {
            let b = cfg.beta(t);
            let f = x.iter().map(|v| -0.5 * b * v).collect();
            Ok((f, b.sqrt()))
        }
        SdeFamily::SubVP => {
            let b = cfg.beta(t);
            let f = x.iter().map(|v| -0.5 * b * v).collect();
            let g = (b * (1.0 - (-2.0 * cfg.beta_integral(t)).exp())).sqrt();
            Ok((f, g))
        }
    }
}

/// Closed form of the transition density p(x_t | x0).
pub fn perturbation_kernel(cfg: &SdeConfig, t: f64) -> Result<KernelParams> {
    cfg.check_time(t)?;
    Ok(match cfg.family {
        SdeFamily::VE => {
            let s2 = cfg.sigma(t).powi(2) - cfg.sigma_min.powi(2);
            KernelParams { mean_coeff: 1.0, std: s2.max(0.0).sqrt() }
        }
        SdeFamily::VP => {
            let b = cfg.beta_integral(t);
            KernelParams { mean_coeff: (-0.5 * b).exp(), std: (1.0 - (-b).exp()).sqrt() }
        }
        SdeFamily::SubVP => {
            let b = cfg.beta_integral(t);
            KernelParams { mean_coeff: (-0.5 * b).exp(), std: 1.0 - (-b).exp() }
        }
    })
}

/// Gradient of log p(x_t | x0) with respect to x_t:
/// -(x_t - mean_coeff * x0) / std^2.
pub fn analytic_conditional_score(
    cfg: &SdeConfig,
    x_t: &[f64],
    x0: &[f64],
    t: f64,
) -> Result<Vec<f64>> {
    let kp = perturbation_kernel(cfg, t)?;
    if kp.std < 1e-7 {
        return Err(SosError::DegenerateTime(t));
    }
    let var = kp.std * kp.std;
    Ok(x_t.iter().zip(x0).map(|(xt, x0)| -(xt - kp.mean_coeff * x0) / var).collect())
}

/// Draw n prior vectors: N(0, sigma_max^2 I) for VE, N(0, I) for VP/Sub-VP.
pub fn sample_prior<R: Rng>(cfg: &SdeConfig, dim: usize, n: usize, rng: &mut R) -> Vec<Vec<f64>> {
    let scale = match cfg.family {
        SdeFamily::VE => cfg.sigma_max,
        SdeFamily::VP | SdeFamily::SubVP => 1.0,
    };
    (0..n)
        .map(|_| (0..dim).map(|_| scale * rng.sample::<f64, _>(StandardNormal)).collect())
        .collect()
}
