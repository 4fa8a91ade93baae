//! BPSK over AWGN.
//!
//! Eb/N0 is per information bit: `sigma^2 = 1 / (2 R 10^(Eb/N0 / 10))` with
//! `R = K / N`. Noise for trial `t` comes from a ChaCha8 generator seeded with
//! the master seed and switched to stream `t`; Gaussian samples use the
//! `rand_distr::StandardNormal` ziggurat sampler scaled by `sigma`.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::gf2::BitVec;

/// LLR magnitude used when `sigma == 0` (noiseless test hook).
pub const NOISELESS_LLR: f64 = 1.0e3;

#[derive(Clone, Copy, PartialEq, Debug)]
pub struct ChannelConfig {
    ebn0_db: f64,
    rate: f64,
    sigma: f64,
}

impl ChannelConfig {
    pub fn new(ebn0_db: f64, rate: f64) -> Result<Self> {
        if !(rate > 0.0 && rate <= 1.0) {
            return Err(Error::Config(format!("rate {rate} outside (0, 1]")));
        }
        if !ebn0_db.is_finite() {
            return Err(Error::Config(format!("Eb/N0 {ebn0_db} dB is not finite")));
        }
        let sigma = (1.0 / (2.0 * rate * 10f64.powf(ebn0_db / 10.0))).sqrt();
        Ok(Self {
            ebn0_db,
            rate,
            sigma,
        })
    }

    /// Channel that adds no noise; LLRs saturate at [`NOISELESS_LLR`].
    pub fn noiseless(rate: f64) -> Result<Self> {
        let mut cfg = Self::new(0.0, rate)?;
        cfg.ebn0_db = f64::INFINITY;
        cfg.sigma = 0.0;
        Ok(cfg)
    }

    pub fn ebn0_db(&self) -> f64 {
        self.ebn0_db
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }
}

/// Identifies one reproducible random stream.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct RngStream {
    pub master_seed: u64,
    pub stream_index: u64,
}

impl RngStream {
    pub fn new(master_seed: u64, stream_index: u64) -> Self {
        Self {
            master_seed,
            stream_index,
        }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master_seed);
        rng.set_stream(self.stream_index);
        rng
    }
}

/// `s_i = 1 - 2 x_i`.
pub fn modulate(x: &BitVec) -> Vec<f64> {
    (1..=x.len())
        .map(|p| if x.get(p) { -1.0 } else { 1.0 })
        .collect()
}

/// `y_i = s_i + sigma n_i`.
pub fn transmit(s: &[f64], cfg: &ChannelConfig, rng: &mut impl Rng) -> Vec<f64> {
    s.iter()
        .map(|&si| {
            let n: f64 = rng.sample(StandardNormal);
            si + cfg.sigma * n
        })
        .collect()
}

/// `lambda_i = 2 y_i / sigma^2`; positive favours bit 0.
pub fn llr(y: &[f64], cfg: &ChannelConfig) -> Vec<f64> {
    if cfg.sigma == 0.0 {
        return y.iter().map(|&v| v * NOISELESS_LLR).collect();
    }
    let scale = 2.0 / (cfg.sigma * cfg.sigma);
    y.iter().map(|&v| v * scale).collect()
}
