//! Samplers for random telegraph and Ornstein-Uhlenbeck coupling noise.
//!
//! Both processes are stationary with mean zero and autocorrelation
//! `sigma^2 exp(-|tau| / tau_c)`. Each trajectory draws from its own
//! ChaCha stream selected by `(seed, stream)`, so ensembles are
//! reproducible regardless of scheduling.

use std::fmt::Write as _;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, StandardNormal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NoiseError {
    #[error("tau_c must be positive and finite, got {0}")]
    InvalidTauC(f64),
    #[error("sigma must be non-negative and finite, got {0}")]
    InvalidSigma(f64),
    #[error("sampler expects {expected:?} noise")]
    WrongKind { expected: NoiseKind },
    #[error("time grid must be finite and strictly increasing")]
    InvalidGrid,
    #[error("grid spacing {spacing} exceeds tau_c/10 = {limit}")]
    GridTooCoarse { spacing: f64, limit: f64 },
    #[error("window [{lo}, {hi}] is empty or not finite")]
    EmptyWindow { lo: f64, hi: f64 },
}

pub type Result<T> = std::result::Result<T, NoiseError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NoiseKind {
    Telegraph,
    GaussianOu,
}

impl std::fmt::Display for NoiseKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            NoiseKind::Telegraph => "telegraph",
            NoiseKind::GaussianOu => "gaussian-ou",
        })
    }
}

impl std::str::FromStr for NoiseKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "telegraph" => Ok(NoiseKind::Telegraph),
            "gaussian-ou" | "ou" => Ok(NoiseKind::GaussianOu),
            other => Err(format!(
                "unknown noise kind `{other}` (expected telegraph|gaussian-ou)"
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub kind: NoiseKind,
    pub tau_c: f64,
    /// Standard deviation; the telegraph amplitude.
    pub sigma: f64,
    pub seed: u64,
}

impl NoiseSpec {
    pub fn new(kind: NoiseKind, tau_c: f64, sigma: f64, seed: u64) -> Result<Self> {
        let s = Self {
            kind,
            tau_c,
            sigma,
            seed,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tau_c > 0.0 && self.tau_c.is_finite()) {
            return Err(NoiseError::InvalidTauC(self.tau_c));
        }
        if !(self.sigma >= 0.0 && self.sigma.is_finite()) {
            return Err(NoiseError::InvalidSigma(self.sigma));
        }
        Ok(())
    }

    /// Generator for trajectory `stream`.
    pub fn rng(&self, stream: u64) -> ChaCha8Rng {
        trajectory_rng(self.seed, stream)
    }
}

pub fn trajectory_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoisePath {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    pub spec: NoiseSpec,
}

impl NoisePath {
    /// `t,value` table.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,value\n");
        for (t, v) in self.times.iter().zip(&self.values) {
            let _ = writeln!(out, "{t:.16e},{v:.16e}");
        }
        out
    }
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty()
        || !grid.iter().all(|t| t.is_finite())
        || !grid.windows(2).all(|w| w[0] < w[1])
    {
        return Err(NoiseError::InvalidGrid);
    }
    Ok(())
}

fn random_sign<R: Rng>(rng: &mut R) -> f64 {
    if rng.random::<bool>() {
        1.0
    } else {
        -1.0
    }
}

/// Telegraph path on `grid`, drawn with `rng`.
///
/// Each grid step flips the sign with probability
/// `(1 - exp(-dt/tau_c)) / 2`, the exact odd-flip probability of a
/// process flipping at rate `1/(2 tau_c)`.
pub fn sample_telegraph_path_with<R: Rng>(
    spec: &NoiseSpec,
    grid: &[f64],
    rng: &mut R,
) -> Result<NoisePath> {
    spec.validate()?;
    if spec.kind != NoiseKind::Telegraph {
        return Err(NoiseError::WrongKind {
            expected: NoiseKind::Telegraph,
        });
    }
    check_grid(grid)?;
    let limit = spec.tau_c / 10.0;
    if let Some(spacing) = grid
        .windows(2)
        .map(|w| w[1] - w[0])
        .find(|&d| d > limit * (1.0 + 1e-9))
    {
        return Err(NoiseError::GridTooCoarse { spacing, limit });
    }
    let mut sign = random_sign(rng);
    let mut values = Vec::with_capacity(grid.len());
    values.push(sign * spec.sigma);
    for w in grid.windows(2) {
        let p_flip = -0.5 * (-(w[1] - w[0]) / spec.tau_c).exp_m1();
        if rng.random::<f64>() < p_flip {
            sign = -sign;
        }
        values.push(sign * spec.sigma);
    }
    Ok(NoisePath {
        times: grid.to_vec(),
        values,
        spec: *spec,
    })
}

pub fn sample_telegraph_path(spec: &NoiseSpec, grid: &[f64]) -> Result<NoisePath> {
    sample_telegraph_path_with(spec, grid, &mut spec.rng(0))
}

/// Telegraph realisation on `[t_lo, t_hi]` as its switch times.
///
/// Returns the piecewise values (`switch_times.len() + 1` of them) and the
/// switch times; waiting times are exponential with mean `2 tau_c`.
pub fn sample_telegraph_switches<R: Rng>(
    spec: &NoiseSpec,
    t_lo: f64,
    t_hi: f64,
    rng: &mut R,
) -> Result<(Vec<f64>, Vec<f64>)> {
    spec.validate()?;
    if !(t_lo.is_finite() && t_hi.is_finite() && t_lo <= t_hi) {
        return Err(NoiseError::EmptyWindow { lo: t_lo, hi: t_hi });
    }
    let wait =
        Exp::new(1.0 / (2.0 * spec.tau_c)).map_err(|_| NoiseError::InvalidTauC(spec.tau_c))?;
    let mut sign = random_sign(rng);
    let mut values = vec![sign * spec.sigma];
    let mut times = Vec::new();
    let mut t = t_lo;
    loop {
        t += wait.sample(rng);
        if t >= t_hi {
            break;
        }
        sign = -sign;
        times.push(t);
        values.push(sign * spec.sigma);
    }
    Ok((values, times))
}

/// Stationary Ornstein-Uhlenbeck path on `grid`, exact at any spacing.
pub fn sample_ou_path_with<R: Rng>(
    spec: &NoiseSpec,
    grid: &[f64],
    rng: &mut R,
) -> Result<NoisePath> {
    spec.validate()?;
    if spec.kind != NoiseKind::GaussianOu {
        return Err(NoiseError::WrongKind {
            expected: NoiseKind::GaussianOu,
        });
    }
    check_grid(grid)?;
    let mut normal = || -> f64 { StandardNormal.sample(rng) };
    let mut x = spec.sigma * normal();
    let mut values = Vec::with_capacity(grid.len());
    values.push(x);
    for w in grid.windows(2) {
        let dt = w[1] - w[0];
        let decay = (-dt / spec.tau_c).exp();
        let spread = (-(-2.0 * dt / spec.tau_c).exp_m1()).sqrt();
        x = x * decay + spec.sigma * spread * normal();
        values.push(x);
    }
    Ok(NoisePath {
        times: grid.to_vec(),
        values,
        spec: *spec,
    })
}

pub fn sample_ou_path(spec: &NoiseSpec, grid: &[f64]) -> Result<NoisePath> {
    sample_ou_path_with(spec, grid, &mut spec.rng(0))
}

/// Uniform switch time over `[lo, hi]`.
pub fn sample_flip_time_with<R: Rng>(window: (f64, f64), rng: &mut R) -> Result<f64> {
    let (lo, hi) = window;
    if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
        return Err(NoiseError::EmptyWindow { lo, hi });
    }
    if lo == hi {
        return Ok(lo);
    }
    Ok(lo + (hi - lo) * rng.random::<f64>())
}

pub fn sample_flip_time(spec: &NoiseSpec, window: (f64, f64)) -> Result<f64> {
    spec.validate()?;
    sample_flip_time_with(window, &mut spec.rng(0))
}

/// `n + 1` evenly spaced points on `[lo, hi]`.
pub fn uniform_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let n = n.max(1);
    let h = (hi - lo) / n as f64;
    (0..=n)
        .map(|k| if k == n { hi } else { lo + h * k as f64 })
        .collect()
}
