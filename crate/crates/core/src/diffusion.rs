//! DDPM schedules, forward noising and the deterministic reverse step, plus
//! the interleaved radar/shape token layout with its causal mask.

use ndarray::{Array2, Zip};
use serde::{Deserialize, Serialize};

use crate::rng::CounterRng;
use crate::{Error, Result};

/// Diffusion state, `L × Z`.
pub type LatentVector = Array2<f64>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScheduleKind {
    Linear,
    Cosine,
}

/// Offset of the squared-cosine profile.
pub const COSINE_OFFSET: f64 = 0.008;
/// Upper clamp on cosine-schedule betas.
pub const COSINE_MAX_BETA: f64 = 0.999;

/// Per-timestep noise schedule; timesteps are 1-based, `t ∈ 1..=T`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiffusionSchedule {
    beta: Vec<f64>,
    alpha: Vec<f64>,
    alpha_bar: Vec<f64>,
}

impl DiffusionSchedule {
    /// Any betas in `[0, 1)`. Zero betas are allowed here so degenerate
    /// schedules can be built for testing; `make_schedule` never yields them.
    pub fn from_betas(beta: Vec<f64>) -> Result<Self> {
        if beta.is_empty() {
            return Err(Error::invalid("schedule needs at least one timestep"));
        }
        if !beta.iter().all(|b| (0.0..1.0).contains(b)) {
            return Err(Error::invalid("betas must lie in [0, 1)"));
        }
        let alpha: Vec<f64> = beta.iter().map(|b| 1.0 - b).collect();
        let alpha_bar = alpha
            .iter()
            .scan(1.0, |acc, a| {
                *acc *= a;
                Some(*acc)
            })
            .collect();
        Ok(Self { beta, alpha, alpha_bar })
    }

    pub fn len(&self) -> usize {
        self.beta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.beta.is_empty()
    }

    fn check(&self, t: usize) -> Result<()> {
        if t == 0 || t > self.len() {
            Err(Error::invalid(format!("timestep {t} outside 1..={}", self.len())))
        } else {
            Ok(())
        }
    }

    pub fn beta(&self, t: usize) -> f64 {
        self.beta[t - 1]
    }

    pub fn alpha(&self, t: usize) -> f64 {
        self.alpha[t - 1]
    }

    /// `ᾱ_t`, with `ᾱ_0 = 1`.
    pub fn alpha_bar(&self, t: usize) -> f64 {
        if t == 0 {
            1.0
        } else {
            self.alpha_bar[t - 1]
        }
    }

    pub fn betas(&self) -> &[f64] {
        &self.beta
    }

    pub fn alpha_bars(&self) -> &[f64] {
        &self.alpha_bar
    }

    /// Variance of the true posterior `q(x_{t-1} | x_t, x_0)`.
    pub fn posterior_variance(&self, t: usize) -> f64 {
        (1.0 - self.alpha_bar(t - 1)) / (1.0 - self.alpha_bar(t)) * self.beta(t)
    }
}

impl Default for DiffusionSchedule {
    /// Linear, `T = 1000`, `β ∈ [1e-4, 0.02]`.
    fn default() -> Self {
        make_schedule(1000, ScheduleKind::Linear, (1e-4, 0.02)).expect("valid default schedule")
    }
}

/// Linear betas between the bounds, or the squared-cosine `ᾱ` profile.
/// The cosine profile fixes its own betas (clamped at 0.999); the bounds
/// are still validated.
pub fn make_schedule(t: usize, kind: ScheduleKind, beta_bounds: (f64, f64)) -> Result<DiffusionSchedule> {
    let (lo, hi) = beta_bounds;
    if t == 0 {
        return Err(Error::invalid("schedule needs T ≥ 1"));
    }
    if !(lo > 0.0 && lo <= hi && hi < 1.0) {
        return Err(Error::invalid(format!("beta bounds ({lo}, {hi}) must satisfy 0 < min ≤ max < 1")));
    }
    let beta = match kind {
        ScheduleKind::Linear if t == 1 => vec![lo],
        ScheduleKind::Linear => (0..t).map(|i| lo + (hi - lo) * i as f64 / (t - 1) as f64).collect(),
        ScheduleKind::Cosine => {
            let f = |s: usize| {
                let x = (s as f64 / t as f64 + COSINE_OFFSET) / (1.0 + COSINE_OFFSET);
                (x * std::f64::consts::FRAC_PI_2).cos().powi(2)
            };
            (1..=t).map(|s| (1.0 - f(s) / f(s - 1)).clamp(f64::MIN_POSITIVE, COSINE_MAX_BETA)).collect()
        }
    };
    DiffusionSchedule::from_betas(beta)
}

fn same_shape(a: &LatentVector, b: &LatentVector) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(Error::ShapeMismatch(format!("{:?} vs {:?}", a.dim(), b.dim())));
    }
    Ok(())
}

/// `√ᾱ_t·x0 + √(1−ᾱ_t)·ε`.
pub fn q_sample(x0: &LatentVector, t: usize, eps: &LatentVector, sched: &DiffusionSchedule) -> Result<LatentVector> {
    same_shape(x0, eps)?;
    sched.check(t)?;
    let ab = sched.alpha_bar(t);
    let (a, b) = (ab.sqrt(), (1.0 - ab).sqrt());
    Ok(Zip::from(x0).and(eps).map_collect(|x, e| a * x + b * e))
}

/// One reverse step, `(x_t − √(1−α_t)/√(1−ᾱ_t)·ε̂)/√α_t`, with no noise
/// term.
pub fn p_step(x_t: &LatentVector, eps_hat: &LatentVector, t: usize, sched: &DiffusionSchedule) -> Result<LatentVector> {
    same_shape(x_t, eps_hat)?;
    sched.check(t)?;
    let (a, ab) = (sched.alpha(t), sched.alpha_bar(t));
    let coef = if a == 1.0 { 0.0 } else { (1.0 - a).sqrt() / (1.0 - ab).sqrt() };
    let inv = 1.0 / a.sqrt();
    Ok(Zip::from(x_t).and(eps_hat).map_collect(|x, e| inv * (x - coef * e)))
}

/// Predicts the noise in `x_t`.
pub trait Denoiser {
    fn predict(&self, x_t: &LatentVector, t: usize) -> LatentVector;
}

impl<F: Fn(&LatentVector, usize) -> LatentVector> Denoiser for F {
    fn predict(&self, x_t: &LatentVector, t: usize) -> LatentVector {
        self(x_t, t)
    }
}

/// Runs `t = T..1` reverse steps from `x_T`. With `posterior_noise =
/// Some(seed)` each step except the last adds `σ_t·z`, `σ_t²` the posterior
/// variance; `None` keeps the sampler deterministic.
pub fn sample(
    denoiser: &impl Denoiser,
    x_t: LatentVector,
    sched: &DiffusionSchedule,
    posterior_noise: Option<u64>,
) -> Result<LatentVector> {
    let mut x = x_t;
    for t in (1..=sched.len()).rev() {
        let eps = denoiser.predict(&x, t);
        x = p_step(&x, &eps, t, sched)?;
        if let (Some(seed), true) = (posterior_noise, t > 1) {
            let sigma = sched.posterior_variance(t).sqrt();
            let rng = CounterRng::new(seed, &format!("posterior-{t}"));
            for (n, v) in x.iter_mut().enumerate() {
                let (z0, z1) = rng.normal_pair_at((n / 2) as u64);
                *v += sigma * if n % 2 == 0 { z0 } else { z1 };
            }
        }
    }
    Ok(x)
}

/// Token in the interleaved sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Token {
    Radar(usize),
    Shape(usize),
}

/// Layout `r_0, h_0, …, r_{L−1}, h_{L−1}` and the `2L × 2L`
/// lower-triangular mask (`mask[[i, j]]` means `i` may attend to `j`).
pub fn build_interleaved_mask(levels: usize) -> Result<(Vec<Token>, Array2<bool>)> {
    if levels == 0 {
        return Err(Error::invalid("need at least one level"));
    }
    let layout = (0..levels).flat_map(|l| [Token::Radar(l), Token::Shape(l)]).collect();
    let n = 2 * levels;
    Ok((layout, Array2::from_shape_fn((n, n), |(i, j)| j <= i)))
}
