//! Synthetic `S -> X -> Y` data and additive-noise release channels.
//!
//! `S` and `X` share the same normal marginal and are coupled coordinate-wise
//! with correlation `rho_sx`. The release is `Y = X + noise` (or
//! `encoder(X) + noise` inside the trade-off loop), so `S` and `Y` are
//! conditionally independent given `X` by construction.

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::batch::SampleBatch;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseKind {
    Gaussian,
    Laplacian,
}

impl NoiseKind {
    pub fn as_str(self) -> &'static str {
        match self {
            NoiseKind::Gaussian => "gaussian",
            NoiseKind::Laplacian => "laplacian",
        }
    }
}

impl std::str::FromStr for NoiseKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gaussian" => Ok(NoiseKind::Gaussian),
            "laplacian" | "laplace" => Ok(NoiseKind::Laplacian),
            other => Err(Error::InvalidArgument(format!("unknown noise kind {other:?}"))),
        }
    }
}

/// Additive noise parameterized by its per-dimension standard deviation.
///
/// Laplacian noise uses scale `b = std / sqrt(2)` so that both kinds are
/// variance-matched at the same `std`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseChannel {
    pub kind: NoiseKind,
    pub std: Vec<f64>,
    pub mean: Vec<f64>,
}

impl NoiseChannel {
    pub fn new(kind: NoiseKind, std: Vec<f64>, mean: Vec<f64>) -> Result<Self> {
        let channel = Self { kind, std, mean };
        channel.validate()?;
        Ok(channel)
    }

    /// One-dimensional zero-mean channel.
    pub fn scalar(kind: NoiseKind, std: f64) -> Result<Self> {
        Self::new(kind, vec![std], vec![0.0])
    }

    pub fn gaussian(std: f64) -> Result<Self> {
        Self::scalar(NoiseKind::Gaussian, std)
    }

    pub fn laplacian(std: f64) -> Result<Self> {
        Self::scalar(NoiseKind::Laplacian, std)
    }

    pub fn validate(&self) -> Result<()> {
        if self.std.is_empty() || self.std.len() != self.mean.len() {
            return Err(Error::InvalidArgument(format!(
                "noise channel needs matching nonempty std/mean vectors ({} vs {})",
                self.std.len(),
                self.mean.len()
            )));
        }
        if let Some(s) = self.std.iter().find(|s| !(**s > 0.0 && s.is_finite())) {
            return Err(Error::InvalidArgument(format!("noise std must be > 0, got {s}")));
        }
        if self.mean.iter().any(|m| !m.is_finite()) {
            return Err(Error::InvalidArgument("noise mean must be finite".into()));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.std.len()
    }

    /// Laplace scale `b` for dimension `i`.
    pub fn laplace_scale(&self, i: usize) -> f64 {
        self.std[i] / std::f64::consts::SQRT_2
    }

    /// `n` i.i.d. noise rows.
    pub fn draw<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<Array2<f64>> {
        self.validate()?;
        if n == 0 {
            return Err(Error::InvalidArgument("noise needs n >= 1 rows".into()));
        }
        let dim = self.dim();
        let mut out = Array2::zeros((n, dim));
        for mut row in out.rows_mut() {
            for j in 0..dim {
                row[j] = match self.kind {
                    NoiseKind::Gaussian => {
                        let z: f64 = rng.sample(StandardNormal);
                        self.mean[j] + self.std[j] * z
                    }
                    NoiseKind::Laplacian => {
                        // inverse CDF on u in (-1/2, 1/2)
                        let u: f64 = rng.random::<f64>() - 0.5;
                        let b = self.laplace_scale(j);
                        self.mean[j] - b * u.signum() * (-2.0 * u.abs()).ln_1p()
                    }
                };
            }
        }
        Ok(out)
    }
}

/// Seeded convenience wrapper around [`NoiseChannel::draw`].
pub fn draw_noise(channel: &NoiseChannel, n: usize, seed: u64) -> Result<Array2<f64>> {
    channel.draw(n, &mut ChaCha8Rng::seed_from_u64(seed))
}

/// Joint law of `(S, X)`: per-coordinate normal marginals shared by both,
/// coupled with correlation `rho_sx`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainSpec {
    pub dim: usize,
    pub rho_sx: f64,
    pub mean: f64,
    pub std: f64,
}

impl Default for ChainSpec {
    fn default() -> Self {
        Self {
            dim: 1,
            rho_sx: 0.8,
            mean: 0.0,
            std: 1.0,
        }
    }
}

impl ChainSpec {
    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 {
            return Err(Error::InvalidArgument("chain dimension must be >= 1".into()));
        }
        if !(self.rho_sx.abs() < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "|rho_sx| must be < 1, got {}",
                self.rho_sx
            )));
        }
        if !(self.std > 0.0 && self.std.is_finite() && self.mean.is_finite()) {
            return Err(Error::InvalidArgument(
                "marginal std must be > 0 and mean finite".into(),
            ));
        }
        Ok(())
    }

    /// Draws `n` rows of `(S, X)`.
    pub fn sample_sx<R: Rng + ?Sized>(
        &self,
        n: usize,
        rng: &mut R,
    ) -> Result<(Array2<f64>, Array2<f64>)> {
        self.validate()?;
        if n == 0 {
            return Err(Error::InvalidArgument("chain needs n >= 1 rows".into()));
        }
        let coupling = (1.0 - self.rho_sx * self.rho_sx).sqrt();
        let mut s = Array2::zeros((n, self.dim));
        let mut x = Array2::zeros((n, self.dim));
        for i in 0..n {
            for j in 0..self.dim {
                let a: f64 = rng.sample(StandardNormal);
                let b: f64 = rng.sample(StandardNormal);
                s[[i, j]] = self.mean + self.std * a;
                x[[i, j]] = self.mean + self.std * (self.rho_sx * a + coupling * b);
            }
        }
        Ok((s, x))
    }
}

/// `n` draws of `(s, x, y)` with `y = x + noise`.
pub fn sample_chain_with<R: Rng + ?Sized>(
    spec: &ChainSpec,
    channel: &NoiseChannel,
    n: usize,
    rng: &mut R,
) -> Result<SampleBatch> {
    if channel.dim() != spec.dim {
        return Err(Error::DimensionMismatch(format!(
            "channel has {} dims, chain has {}",
            channel.dim(),
            spec.dim
        )));
    }
    let (s, x) = spec.sample_sx(n, rng)?;
    let y = &x + &channel.draw(n, rng)?;
    SampleBatch::from_blocks(vec![("s", s.view()), ("x", x.view()), ("y", y.view())])
}

pub fn sample_chain(
    spec: &ChainSpec,
    channel: &NoiseChannel,
    n: usize,
    seed: u64,
) -> Result<SampleBatch> {
    sample_chain_with(spec, channel, n, &mut ChaCha8Rng::seed_from_u64(seed))
}
