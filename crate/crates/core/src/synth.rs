//! Deterministic synthetic real datasets and generation runs.
//!
//! Real series are phase-shifted sinusoids with amplitude jitter. Runs emulate
//! three generator behaviors: converging to the real distribution, collapsing
//! onto a single real series, and emitting pure noise.
//!
//! Random numbers come from xoshiro256++ seeded through SplitMix64. Uniform
//! doubles take the top 53 bits of each output; normal deviates use the
//! cosine branch of Box-Muller, one deviate per two uniforms. The real data
//! draws from the seeded stream, the run from the same stream after one
//! xoshiro jump, so both are fixed by the seed alone.

use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;

use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::{GenerationRun, RealDataset, SeriesMatrix, Snapshot};

/// Spacing between consecutive synthetic iteration numbers.
pub const ITERATION_STEP: u64 = 50;
/// Standard deviation of the generator noise at the first iteration.
pub const INITIAL_NOISE: f64 = 1.0;
/// Relative amplitude jitter of real series.
pub const AMPLITUDE_JITTER: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    Converging,
    Collapse,
    Noise,
}

impl Regime {
    pub fn as_str(self) -> &'static str {
        match self {
            Regime::Converging => "converging",
            Regime::Collapse => "collapse",
            Regime::Noise => "noise",
        }
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Regime {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "converging" => Ok(Regime::Converging),
            "collapse" => Ok(Regime::Collapse),
            "noise" => Ok(Regime::Noise),
            other => Err(Error::InvalidInput(format!(
                "unknown regime '{other}', expected converging, collapse or noise"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub seed: u64,
    pub regime: Regime,
    pub n_real: usize,
    pub m_gen: usize,
    pub t_len: usize,
    pub n_iters: usize,
    pub noise_floor: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            seed: 42,
            regime: Regime::Converging,
            n_real: 50,
            m_gen: 64,
            t_len: 30,
            n_iters: 20,
            noise_floor: 0.05,
        }
    }
}

impl SynthConfig {
    pub fn with_regime(regime: Regime) -> Self {
        Self {
            regime,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.t_len < 2 {
            return Err(Error::InvalidInput(format!("t_len must be >= 2, got {}", self.t_len)));
        }
        if self.n_real < 2 {
            return Err(Error::InvalidInput(format!("n_real must be >= 2, got {}", self.n_real)));
        }
        if self.m_gen < 1 || self.n_iters < 1 {
            return Err(Error::InvalidInput("m_gen and n_iters must be >= 1".into()));
        }
        if !(self.noise_floor >= 0.0 && self.noise_floor.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "noise_floor must be a non-negative finite number, got {}",
                self.noise_floor
            )));
        }
        Ok(())
    }
}

/// The portable random stream used for every synthetic artifact.
#[derive(Debug, Clone)]
pub struct SynthRng(Xoshiro256PlusPlus);

impl SynthRng {
    pub fn new(seed: u64) -> Self {
        Self(Xoshiro256PlusPlus::seed_from_u64(seed))
    }

    fn jumped(seed: u64) -> Self {
        let mut rng = Xoshiro256PlusPlus::seed_from_u64(seed);
        rng.jump();
        Self(rng)
    }

    /// Uniform in `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        (self.0.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Standard normal deviate.
    pub fn normal(&mut self) -> f64 {
        let u1 = 1.0 - self.uniform();
        let u2 = self.uniform();
        (-2.0 * u1.ln()).sqrt() * (TAU * u2).cos()
    }

    /// Uniform integer in `0..n` by multiply-shift.
    pub fn index(&mut self, n: usize) -> usize {
        ((self.0.next_u64() as u128 * n as u128) >> 64) as usize
    }
}

/// Phase-shifted sinusoids, one full period over `t_len` points.
pub fn generate_real(config: &SynthConfig) -> Result<RealDataset> {
    config.validate()?;
    let mut rng = SynthRng::new(config.seed);
    let t_len = config.t_len;
    let mut data = Vec::with_capacity(config.n_real * t_len);
    for _ in 0..config.n_real {
        let phase = TAU * rng.uniform();
        let amp = 1.0 + AMPLITUDE_JITTER * (2.0 * rng.uniform() - 1.0);
        data.extend((0..t_len).map(|t| amp * (TAU * t as f64 / t_len as f64 + phase).sin()));
    }
    RealDataset::new(SeriesMatrix::new(config.n_real, t_len, data)?)
}

/// Iteration numbers of a synthetic run.
pub fn iteration_numbers(n_iters: usize) -> Vec<u64> {
    (0..n_iters as u64).map(|k| k * ITERATION_STEP).collect()
}

/// Noise standard deviation at iteration index `k` of a converging run,
/// decaying geometrically from [`INITIAL_NOISE`] to `noise_floor`.
pub fn converging_noise(k: usize, n_iters: usize, noise_floor: f64) -> f64 {
    let frac = if n_iters > 1 {
        k as f64 / (n_iters - 1) as f64
    } else {
        1.0
    };
    INITIAL_NOISE * (noise_floor / INITIAL_NOISE).powf(frac)
}

pub fn generate_run(config: &SynthConfig, real: &RealDataset) -> Result<GenerationRun> {
    config.validate()?;
    if real.series_len() != config.t_len {
        return Err(Error::ShapeMismatch(format!(
            "config t_len {} does not match real series length {}",
            config.t_len,
            real.series_len()
        )));
    }
    let mut rng = SynthRng::jumped(config.seed);
    let (m, t_len) = (config.m_gen, config.t_len);
    let reals = real.matrix();
    let mode = match config.regime {
        Regime::Collapse => Some(rng.index(reals.rows())),
        _ => None,
    };

    let mut snapshots = Vec::with_capacity(config.n_iters);
    for (k, iteration) in iteration_numbers(config.n_iters).into_iter().enumerate() {
        let mut data = Vec::with_capacity(m * t_len);
        for _ in 0..m {
            match config.regime {
                Regime::Converging => {
                    let sigma = converging_noise(k, config.n_iters, config.noise_floor);
                    let src = reals.row(rng.index(reals.rows()));
                    data.extend(src.iter().map(|v| v + sigma * rng.normal()));
                }
                Regime::Collapse => {
                    let src = reals.row(mode.expect("collapse mode chosen"));
                    data.extend(src.iter().map(|v| v + config.noise_floor * rng.normal()));
                }
                Regime::Noise => {
                    data.extend((0..t_len).map(|_| INITIAL_NOISE * rng.normal()));
                }
            }
        }
        snapshots.push(Snapshot {
            iteration,
            series: SeriesMatrix::new(m, t_len, data)?,
        });
    }
    GenerationRun::new(config.regime.as_str(), snapshots)
}
