//! Neural mutual information estimation and privacy-utility trade-off
//! optimization for additive-noise data releases.
//!
//! The crate is organised bottom-up:
//!
//! - [`nn`] and [`adam`]: a small dense feed-forward network with manual
//!   backpropagation and the Adam optimizer.
//! - [`oracle`]: exact information quantities (entropy, KL divergence,
//!   discrete and Gaussian mutual information, the Donsker-Varadhan bound)
//!   used as ground truth.
//! - [`batch`] and [`mine`]: paired sample batches and the neural
//!   Donsker-Varadhan mutual information estimator with a moving-average
//!   corrected gradient.
//! - [`channel`]: the synthetic `S -> X -> Y` chain and Gaussian / Laplacian
//!   release noise.
//! - [`funnel`]: alternating estimator / encoder / decoder training that
//!   maximizes utility `I(X;Y)` subject to a leakage budget on `I(S;Y)`.
//! - [`experiment`]: configuration loading, CSV/JSON persistence and SVG
//!   charts for the experiments driven by the `mifunnel` binary.
//!
//! All internal estimator arithmetic is done in nats; values are converted to
//! bits at reporting boundaries.

use thiserror::Error;

pub mod adam;
pub mod batch;
pub mod channel;
pub mod experiment;
pub mod funnel;
pub mod mine;
pub mod nn;
pub mod oracle;

pub use adam::AdamState;
pub use batch::SampleBatch;
pub use channel::{ChainSpec, NoiseChannel, NoiseKind};
pub use funnel::{DecoderMode, TradeoffConfig, TradeoffRun};
pub use mine::{MineConfig, MineEstimator, MineTrace};
pub use nn::{Activation, MlpNetwork, OutputActivation};
pub use oracle::{DiscreteJoint, GaussianPairSpec};

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("non-finite value encountered in {0}")]
    NonFinite(String),

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("KL divergence undefined: q[{index}] = 0 but p[{index}] = {p_val} > 0")]
    SupportViolation { index: usize, p_val: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("config error at line {line}, column {column}: {message}")]
    Config {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

/// Nats to bits.
pub fn nats_to_bits(nats: f64) -> f64 {
    nats / std::f64::consts::LN_2
}
