//! Seeded simulation of Simon's text-generation process.
//!
//! The first step always introduces a new token. At every later step `t` a
//! new token appears with probability `p_t`; otherwise a uniformly random
//! earlier position of the history is copied, which reuses each existing
//! token with probability proportional to its current count.
//!
//! Random stream (part of the output contract): the generator is
//! `Xoshiro256++` seeded through SplitMix64 (`seed_from_u64`). Each step
//! `t >= 2` draws one `u64` for the innovation test, `u = (x >> 11) * 2^-53`,
//! innovating iff `u < p_t`. A copy step draws one more `u64` and picks
//! position `(x * (t - 1)) >> 64` of the history.

use rand_xoshiro::rand_core::{RngCore, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::freq_stats::{
    count_tokens, fit_cumulative_gamma, fit_spectrum_gamma, spectrum, DEFAULT_N_MAX,
};
use crate::scalar::Real;
use crate::simon_fit::{fit_nu, SimonFit};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum SimMode {
    /// New tokens at a fixed rate `alpha`.
    #[serde(rename = "constant")]
    ConstantRate { alpha: f64 },
    /// `p_t = min(1, nu t^(nu - 1))`, so the lexicon grows like `T^nu`.
    Sublinear { nu: f64 },
}

impl SimMode {
    pub fn innovation_probability(&self, t: u64) -> f64 {
        match *self {
            SimMode::ConstantRate { alpha } => alpha,
            SimMode::Sublinear { nu } => (nu * (t as f64).powf(nu - 1.0)).min(1.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SimConfig {
    #[serde(flatten)]
    pub mode: SimMode,
    pub steps: u64,
    pub seed: u64,
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        match self.mode {
            SimMode::ConstantRate { alpha } if !(alpha > 0.0 && alpha <= 1.0) => {
                return Err(Error::InvalidConfig(format!(
                    "alpha {alpha} outside (0, 1]"
                )))
            }
            SimMode::Sublinear { nu } if !(nu > 0.0 && nu < 1.0) => {
                return Err(Error::InvalidConfig(format!("nu {nu} outside (0, 1)")))
            }
            _ => {}
        }
        if self.steps == 0 {
            return Err(Error::InvalidConfig("steps must be >= 1".into()));
        }
        if self.steps > u64::from(u32::MAX) {
            return Err(Error::InvalidConfig("steps must fit in 32 bits".into()));
        }
        Ok(())
    }
}

/// Generated stream. Token ids are `1..=distinct`, numbered in order of
/// first appearance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SimResult {
    pub tokens: Vec<u32>,
    pub distinct: u32,
    pub steps: u64,
}

/// What happens at one step after the first.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepChoice {
    Innovate,
    /// Copy the token at this 0-based history position.
    Copy(usize),
}

/// Deterministic core of the process; randomness is supplied per step.
#[derive(Debug, Clone, Default)]
pub struct SimonProcess {
    history: Vec<u32>,
    distinct: u32,
}

impl SimonProcess {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.history.len()
    }

    pub fn is_empty(&self) -> bool {
        self.history.is_empty()
    }

    pub fn history(&self) -> &[u32] {
        &self.history
    }

    /// Applies one step and returns the emitted token. The first step always
    /// innovates regardless of `choice`.
    pub fn advance(&mut self, choice: StepChoice) -> u32 {
        let token = match choice {
            StepChoice::Copy(i) if !self.history.is_empty() => self.history[i],
            _ => {
                self.distinct += 1;
                self.distinct
            }
        };
        self.history.push(token);
        token
    }

    pub fn finish(self) -> SimResult {
        SimResult {
            steps: self.history.len() as u64,
            distinct: self.distinct,
            tokens: self.history,
        }
    }
}

fn unit_f64(x: u64) -> f64 {
    (x >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

fn index_below(x: u64, n: u64) -> usize {
    ((u128::from(x) * u128::from(n)) >> 64) as usize
}

/// Runs the process for `steps` steps with innovation schedule `p(t)`.
pub fn simulate_with<P: Fn(u64) -> f64>(steps: u64, seed: u64, p: P) -> SimResult {
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(seed);
    let mut process = SimonProcess::new();
    process.history.reserve(steps as usize);
    if steps > 0 {
        process.advance(StepChoice::Innovate);
    }
    for t in 2..=steps {
        let choice = if unit_f64(rng.next_u64()) < p(t) {
            StepChoice::Innovate
        } else {
            StepChoice::Copy(index_below(rng.next_u64(), t - 1))
        };
        process.advance(choice);
    }
    process.finish()
}

pub fn simulate(config: &SimConfig) -> Result<SimResult> {
    config.validate()?;
    let mode = config.mode;
    Ok(simulate_with(config.steps, config.seed, |t| {
        mode.innovation_probability(t)
    }))
}

/// Zipf statistics of a simulated stream.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ZipfReport<T> {
    pub distinct: u64,
    pub steps: u64,
    /// Spectrum exponent from the cumulative spectrum, `n <= 50`.
    pub gamma_hat: T,
    pub gamma_stderr: T,
    /// Direct log-log fit of `w(n)`, `n <= 50`, when it has enough support.
    pub gamma_hat_direct: Option<T>,
    pub nu_hat: T,
    pub z_hat: T,
    pub fit: SimonFit<T>,
}

/// Runs a stream through the rank table, spectrum and rank-law fit.
pub fn verify_zipf<T: Real>(result: &SimResult) -> Result<ZipfReport<T>> {
    if result.distinct < 50 {
        return Err(Error::InsufficientSupport {
            needed: 50,
            got: result.distinct as usize,
        });
    }
    let table = count_tokens(result.tokens.iter().copied())?;
    let spec = spectrum(&table);
    let gamma = fit_cumulative_gamma::<T>(&spec, DEFAULT_N_MAX)?;
    let direct = fit_spectrum_gamma::<T>(&spec, DEFAULT_N_MAX).ok();
    let fit: SimonFit<T> = fit_nu(&table)?;
    Ok(ZipfReport {
        distinct: table.distinct() as u64,
        steps: result.steps,
        gamma_hat: gamma.gamma,
        gamma_stderr: gamma.stderr,
        gamma_hat_direct: direct.map(|g| g.gamma),
        nu_hat: fit.nu,
        z_hat: fit.z,
        fit,
    })
}
