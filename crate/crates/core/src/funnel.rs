//! Privacy-utility trade-off by alternating estimator, encoder and decoder
//! training.
//!
//! The release is `Y = encoder(X) + noise`. Each outer iteration
//!
//! 1. trains the critic and the encoder jointly by ascent on the
//!    Donsker-Varadhan objective between `encoder(X)` and `Y` (the utility),
//! 2. trains a decoder that recovers `X` from `Y`,
//! 3. re-measures the leakage `I(S;Y)` with a freshly trained monitor
//!    estimator and stops once it exceeds the budget.
//!
//! Iterations whose leakage stays within the budget are compliant; the run
//! reports the largest compliant utility.

use ndarray::{s, Array2, ArrayView2};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::adam::AdamState;
use crate::batch::SampleBatch;
use crate::channel::{ChainSpec, NoiseChannel};
use crate::mine::{estimate_mi, CorrectedGradient, MineConfig, MineEstimator};
use crate::nn::{Activation, Gradients, MlpNetwork, OutputActivation};
use crate::{nats_to_bits, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecoderMode {
    /// Softmax over equal-probability bins of `X`, trained with cross-entropy.
    BinnedCrossEntropy,
    /// Direct regression of `X`, trained with mean squared error.
    SquaredError,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TradeoffSeeds {
    pub estimator: u64,
    pub encoder: u64,
    pub decoder: u64,
    pub data: u64,
    pub monitor: u64,
}

impl TradeoffSeeds {
    /// Distinct per-network seeds derived from one base seed.
    pub fn from_base(base: u64) -> Self {
        let mix = |k: u64| base.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(k);
        Self {
            estimator: mix(1),
            encoder: mix(2),
            decoder: mix(3),
            data: mix(4),
            monitor: mix(5),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TradeoffConfig {
    /// Leakage budget on `I(S;Y)`, in bits.
    pub epsilon: f64,
    pub learning_rate: f64,
    /// Encoder learning rate; `None` uses `learning_rate`.
    pub encoder_learning_rate: Option<f64>,
    pub batch_size: usize,
    pub encoding_epochs: usize,
    pub decoding_epochs: usize,
    /// Training epochs of the fresh leakage monitor in every outer iteration.
    pub monitor_epochs: usize,
    pub max_outer_iterations: usize,
    pub ema_rate: f64,
    pub critic_hidden: Vec<usize>,
    pub encoder_hidden: usize,
    pub decoder_hidden: Vec<usize>,
    pub channel: NoiseChannel,
    pub chain: ChainSpec,
    pub decoder_mode: DecoderMode,
    pub bins: usize,
    /// Trailing encoding epochs averaged into an iteration's utility.
    pub utility_window: usize,
    pub seeds: TradeoffSeeds,
}

impl Default for TradeoffConfig {
    fn default() -> Self {
        Self {
            epsilon: 0.75,
            learning_rate: 0.0005,
            encoder_learning_rate: None,
            batch_size: 20_000,
            encoding_epochs: 500,
            decoding_epochs: 500,
            monitor_epochs: 200,
            max_outer_iterations: 100,
            ema_rate: 0.01,
            critic_hidden: vec![100, 100],
            encoder_hidden: 16,
            decoder_hidden: vec![100, 100],
            channel: NoiseChannel::gaussian(1.0).expect("valid default channel"),
            chain: ChainSpec::default(),
            decoder_mode: DecoderMode::BinnedCrossEntropy,
            bins: 32,
            utility_window: 10,
            seeds: TradeoffSeeds::from_base(0),
        }
    }
}

impl TradeoffConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "privacy budget must be >= 0, got {}",
                self.epsilon
            )));
        }
        if self.decoder_mode == DecoderMode::BinnedCrossEntropy {
            if self.bins < 2 {
                return Err(Error::InvalidArgument(format!(
                    "binned decoder needs at least 2 bins, got {}",
                    self.bins
                )));
            }
            if self.chain.dim != 1 {
                return Err(Error::InvalidArgument(
                    "binned decoding supports one-dimensional data only".into(),
                ));
            }
        }
        if self.batch_size < 2 {
            return Err(Error::InvalidArgument("minibatch size must be >= 2".into()));
        }
        if self.encoding_epochs == 0 || self.monitor_epochs == 0 || self.utility_window == 0 {
            return Err(Error::InvalidArgument(
                "encoding epochs, monitor epochs and utility window must be >= 1".into(),
            ));
        }
        if self.channel.dim() != self.chain.dim {
            return Err(Error::DimensionMismatch(format!(
                "channel has {} dims, chain has {}",
                self.channel.dim(),
                self.chain.dim
            )));
        }
        self.chain.validate()?;
        self.channel.validate()?;
        self.mine_config(0, 1).validate()
    }

    /// Estimator settings shared by the encoding critic and the monitor.
    pub fn mine_config(&self, seed: u64, epochs: usize) -> MineConfig {
        MineConfig {
            epochs,
            batch_size: self.batch_size,
            learning_rate: self.learning_rate,
            ema_rate: self.ema_rate,
            seed,
            hidden_layers: self.critic_hidden.clone(),
            activation: Activation::Elu,
            smoothing_window: 50,
        }
    }
}

/// One outer iteration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: usize,
    /// Critic estimate of `I(encoder(X); Y)` at the end of the encoding phase.
    pub mi_xy_bits: f64,
    /// Monitor estimate of `I(S;Y)` for the encoder this iteration produced.
    pub mi_sy_bits: f64,
    /// Final decoder loss (bits for cross-entropy, squared units otherwise).
    pub decoder_loss: f64,
    /// Mean entropy of the decoder's output distribution (binned mode only).
    /// Diagnostic; never optimized.
    pub decoder_output_entropy_bits: Option<f64>,
    pub compliant: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TradeoffRun {
    pub config: TradeoffConfig,
    /// Leakage of the initial release, measured before any training.
    pub initial_leakage_bits: f64,
    pub iterations: Vec<IterationRecord>,
    /// Critic objective of every encoding epoch across all phases, in bits.
    pub encoding_trace_bits: Vec<f64>,
    pub max_utility_bits: Option<f64>,
    pub last_compliant_utility_bits: Option<f64>,
    /// The loop stopped because the monitor exceeded the budget.
    pub budget_exceeded: bool,
    /// The loop stopped at the outer-iteration cap.
    pub cap_reached: bool,
    /// Utility values come from the jointly trained critic, not a held-out
    /// estimator.
    pub utility_source: String,
}

impl TradeoffRun {
    pub fn compliant_iterations(&self) -> usize {
        self.iterations.iter().filter(|r| r.compliant).count()
    }

    /// Whether the budget held when the run ended.
    pub fn compliant_at_termination(&self) -> bool {
        !self.budget_exceeded
    }

    /// Max compliant utility, with zero standing in for "nothing released".
    pub fn max_utility_or_zero(&self) -> f64 {
        self.max_utility_bits.unwrap_or(0.0)
    }
}

/// Applies the encoder to a batch of `X`.
pub fn encode(encoder: &MlpNetwork, x: ArrayView2<f64>) -> Result<Array2<f64>> {
    let out = encoder.forward(x)?;
    if !out.iter().all(|v| v.is_finite()) {
        return Err(Error::NonFinite("encoder output".into()));
    }
    Ok(out)
}

/// Equal-probability bin edges for `N(mean, std^2)`.
pub fn normal_bin_edges(mean: f64, std: f64, bins: usize) -> Result<Vec<f64>> {
    let normal = Normal::new(mean, std).map_err(|e| Error::InvalidArgument(e.to_string()))?;
    Ok((1..bins)
        .map(|j| normal.inverse_cdf(j as f64 / bins as f64))
        .collect())
}

/// Index of the bin containing `v`.
pub fn bin_index(edges: &[f64], v: f64) -> usize {
    edges.partition_point(|&e| e <= v)
}

/// Mean cross-entropy in bits of `probs` against the one-hot `targets`.
pub fn binned_cross_entropy(probs: &Array2<f64>, targets: &[usize]) -> f64 {
    let n = targets.len() as f64;
    targets
        .iter()
        .enumerate()
        .map(|(i, &t)| -probs[[i, t]].max(f64::MIN_POSITIVE).log2())
        .sum::<f64>()
        / n
}

/// Mean entropy of the rows of `probs`, in bits.
pub fn output_self_entropy(probs: &Array2<f64>) -> f64 {
    let n = probs.nrows() as f64;
    probs
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| -p * p.log2())
        .sum::<f64>()
        / n
}

/// Mean over rows and columns of the squared difference.
pub fn mean_squared_error(pred: &Array2<f64>, target: ArrayView2<f64>) -> f64 {
    let diff = pred - &target;
    diff.mapv(|v| v * v).mean().unwrap_or(0.0)
}

/// Z-scores every column with its own batch statistics. Mutual information
/// is invariant under per-variable affine maps, and a fresh critic trains far
/// more reliably on unit-scale inputs than on a release whose scale the
/// encoder has inflated.
pub fn standardize(mut m: Array2<f64>) -> Array2<f64> {
    for mut col in m.columns_mut() {
        let n = col.len() as f64;
        let mean = col.sum() / n;
        let var = col.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        let std = var.sqrt();
        if std > 0.0 {
            col.mapv_inplace(|v| (v - mean) / std);
        } else {
            col.fill(0.0);
        }
    }
    m
}

/// Trains a dedicated estimator on fresh `(s, y)` batches from `sampler` and
/// returns its smoothed final estimate of `I(S;Y)` in bits.
pub fn privacy_monitor<F>(sampler: F, config: &MineConfig) -> Result<f64>
where
    F: FnMut(usize, &mut ChaCha8Rng) -> Result<SampleBatch>,
{
    estimate_mi(sampler, config).map(|t| t.final_bits)
}

/// Mutable training state of one trade-off run.
#[derive(Debug, Clone)]
pub struct FunnelState {
    config: TradeoffConfig,
    critic: MineEstimator,
    encoder: MlpNetwork,
    encoder_adam: AdamState,
    decoder: MlpNetwork,
    decoder_adam: AdamState,
    data_rng: ChaCha8Rng,
    bin_edges: Vec<f64>,
}

impl FunnelState {
    pub fn new(config: TradeoffConfig) -> Result<Self> {
        config.validate()?;
        let dim = config.chain.dim;
        let critic = MineEstimator::new(
            dim,
            dim,
            config.mine_config(config.seeds.estimator, config.encoding_epochs),
        )?;
        let mut enc_rng = ChaCha8Rng::seed_from_u64(config.seeds.encoder);
        let encoder = MlpNetwork::identity_relu(dim, config.encoder_hidden.max(2 * dim), &mut enc_rng)?;
        let encoder_adam = AdamState::new(
            &encoder,
            config.encoder_learning_rate.unwrap_or(config.learning_rate),
        );

        let mut dec_rng = ChaCha8Rng::seed_from_u64(config.seeds.decoder);
        let (out_dim, out_act) = match config.decoder_mode {
            DecoderMode::BinnedCrossEntropy => (config.bins, OutputActivation::Softmax),
            DecoderMode::SquaredError => (dim, OutputActivation::Identity),
        };
        let mut dims = vec![dim];
        dims.extend(&config.decoder_hidden);
        dims.push(out_dim);
        let decoder = MlpNetwork::new(&dims, Activation::Elu, out_act, &mut dec_rng)?;
        let decoder_adam = AdamState::new(&decoder, config.learning_rate);

        let bin_edges = match config.decoder_mode {
            DecoderMode::BinnedCrossEntropy => {
                normal_bin_edges(config.chain.mean, config.chain.std, config.bins)?
            }
            DecoderMode::SquaredError => Vec::new(),
        };
        let data_rng = ChaCha8Rng::seed_from_u64(config.seeds.data);
        Ok(Self {
            config,
            critic,
            encoder,
            encoder_adam,
            decoder,
            decoder_adam,
            data_rng,
            bin_edges,
        })
    }

    pub fn config(&self) -> &TradeoffConfig {
        &self.config
    }

    pub fn critic(&self) -> &MineEstimator {
        &self.critic
    }

    pub fn encoder(&self) -> &MlpNetwork {
        &self.encoder
    }

    pub fn decoder(&self) -> &MlpNetwork {
        &self.decoder
    }

    pub fn set_decoder(&mut self, decoder: MlpNetwork) -> Result<()> {
        let expected = self.decoder.layer_dims();
        if decoder.input_dim() != expected[0] || decoder.output_dim() != expected[expected.len() - 1] {
            return Err(Error::DimensionMismatch("decoder shape does not fit the run".into()));
        }
        self.decoder_adam = AdamState::new(&decoder, self.config.learning_rate);
        self.decoder = decoder;
        Ok(())
    }

    /// Draws `(s, x, encoder(x) + noise)` from the training stream.
    fn draw_release(&mut self) -> Result<(Array2<f64>, Array2<f64>, Array2<f64>)> {
        let k = self.config.batch_size;
        let (s, x) = self.config.chain.sample_sx(k, &mut self.data_rng)?;
        let noise = self.config.channel.draw(k, &mut self.data_rng)?;
        let y = encode(&self.encoder, x.view())? + &noise;
        Ok((s, x, y))
    }

    /// Joint ascent of critic and encoder on the Donsker-Varadhan objective
    /// between `encoder(X)` and `Y = encoder(X) + noise`. Returns the
    /// per-epoch objective in bits.
    pub fn encoding_phase(&mut self) -> Result<Vec<f64>> {
        let k = self.config.batch_size;
        let mut trace = Vec::with_capacity(self.config.encoding_epochs);
        for _ in 0..self.config.encoding_epochs {
            let (_s, x) = self.config.chain.sample_sx(k, &mut self.data_rng)?;
            let noise = self.config.channel.draw(k, &mut self.data_rng)?;
            let mut perm: Vec<usize> = (0..k).collect();
            perm.shuffle(self.critic.rng_mut());
            let (grad, enc_grad) =
                encoder_gradient(&mut self.critic, &self.encoder, x.view(), noise.view(), &perm)?;

            self.critic.apply_ascent(&grad.params)?;
            let mut descent = enc_grad;
            descent.scale(-1.0);
            self.encoder_adam.step(&mut self.encoder, &descent)?;
            trace.push(nats_to_bits(grad.objective));
        }
        Ok(trace)
    }

    /// Trains the decoder on fresh releases with the encoder frozen. Returns
    /// the per-epoch loss and the output-entropy diagnostic of the last epoch.
    pub fn decoding_phase(&mut self) -> Result<(Vec<f64>, Option<f64>)> {
        let mut losses = Vec::with_capacity(self.config.decoding_epochs);
        let mut last_entropy = None;
        for _ in 0..self.config.decoding_epochs {
            let (_s, x, y) = self.draw_release()?;
            let (loss, entropy) = self.decoder_step(x.view(), y.view())?;
            losses.push(loss);
            last_entropy = entropy;
        }
        Ok((losses, last_entropy))
    }

    /// Bin targets for a batch of `X`.
    pub fn bin_targets(&self, x: ArrayView2<f64>) -> Vec<usize> {
        x.column(0).iter().map(|&v| bin_index(&self.bin_edges, v)).collect()
    }

    /// Decoder loss on `(x, y)` without training.
    pub fn decoder_loss(&self, x: ArrayView2<f64>, y: ArrayView2<f64>) -> Result<f64> {
        let out = self.decoder.forward(y)?;
        Ok(match self.config.decoder_mode {
            DecoderMode::BinnedCrossEntropy => binned_cross_entropy(&out, &self.bin_targets(x)),
            DecoderMode::SquaredError => mean_squared_error(&out, x),
        })
    }

    fn decoder_step(&mut self, x: ArrayView2<f64>, y: ArrayView2<f64>) -> Result<(f64, Option<f64>)> {
        let trace = self.decoder.forward_trace(y)?;
        let out = trace.output();
        let n = out.nrows() as f64;
        let (loss, entropy, upstream) = match self.config.decoder_mode {
            DecoderMode::BinnedCrossEntropy => {
                let targets = self.bin_targets(x);
                let loss = binned_cross_entropy(out, &targets);
                let mut up = Array2::zeros(out.raw_dim());
                for (i, &t) in targets.iter().enumerate() {
                    let p = out[[i, t]].max(f64::MIN_POSITIVE);
                    up[[i, t]] = -1.0 / (p * n * std::f64::consts::LN_2);
                }
                (loss, Some(output_self_entropy(out)), up)
            }
            DecoderMode::SquaredError => {
                let loss = mean_squared_error(out, x);
                let scale = 2.0 / (n * out.ncols() as f64);
                (loss, None, (out - &x) * scale)
            }
        };
        if !loss.is_finite() {
            return Err(Error::NonFinite("decoder loss".into()));
        }
        let back = self.decoder.backward(&trace, upstream.view())?;
        self.decoder_adam.step(&mut self.decoder, &back.params)?;
        Ok((loss, entropy))
    }

    /// Fresh monitor estimate of `I(S;Y)` for the current encoder.
    pub fn monitor_leakage(&self, iteration: usize) -> Result<f64> {
        let seed = self.config.seeds.monitor.wrapping_add(iteration as u64);
        let config = self.config.mine_config(seed, self.config.monitor_epochs);
        let chain = &self.config.chain;
        let channel = &self.config.channel;
        let encoder = &self.encoder;
        privacy_monitor(
            |n, rng| {
                let (s, x) = chain.sample_sx(n, rng)?;
                let y = encode(encoder, x.view())? + &channel.draw(n, rng)?;
                SampleBatch::pair(standardize(s).view(), standardize(y).view())
            },
            &config,
        )
    }
}

/// One corrected critic gradient on `(x_enc, x_enc + noise)` with product
/// rows `perm`, together with the matching ascent direction for the encoder
/// parameters. Updates the critic's moving average but no parameters.
pub fn encoder_gradient(
    critic: &mut MineEstimator,
    encoder: &MlpNetwork,
    x: ArrayView2<f64>,
    noise: ArrayView2<f64>,
    perm: &[usize],
) -> Result<(CorrectedGradient, Gradients)> {
    let dim = x.ncols();
    let enc_trace = encoder.forward_trace(x)?;
    let x_enc = enc_trace.output();
    if !x_enc.iter().all(|v| v.is_finite()) {
        return Err(Error::NonFinite("encoder output".into()));
    }
    let y = x_enc + &noise;
    let joint = SampleBatch::pair(x_enc.view(), y.view())?;
    let product = joint.permute_second(perm)?;
    let grad = critic.corrected_gradient(&joint, &product)?;

    // Encoder output i enters the critic four times: as the first input of
    // joint row i and product row i, and through y_i as the second input of
    // joint row i and of the product row it was shuffled into.
    let mut d_enc = grad.joint_input.slice(s![.., ..dim]).to_owned();
    d_enc += &grad.joint_input.slice(s![.., dim..]);
    d_enc += &grad.product_input.slice(s![.., ..dim]);
    for (row, &src) in perm.iter().enumerate() {
        let mut target = d_enc.row_mut(src);
        target += &grad.product_input.slice(s![row, dim..]);
    }
    let back = encoder.backward(&enc_trace, d_enc.view())?;
    Ok((grad, back.params))
}

/// Runs the alternating optimization until the leakage monitor exceeds the
/// budget or the outer-iteration cap is reached.
pub fn run_tradeoff(config: &TradeoffConfig) -> Result<TradeoffRun> {
    run_tradeoff_observed(config, |_| {})
}

/// [`run_tradeoff`] that also hands every finished outer iteration to
/// `observe`.
pub fn run_tradeoff_observed<O>(config: &TradeoffConfig, mut observe: O) -> Result<TradeoffRun>
where
    O: FnMut(&IterationRecord),
{
    let mut state = FunnelState::new(config.clone())?;
    let initial = state.monitor_leakage(0)?;
    let mut iterations = Vec::new();
    let mut encoding_trace = Vec::new();
    let mut budget_exceeded = initial > config.epsilon;

    if !budget_exceeded {
        for it in 1..=config.max_outer_iterations {
            let phase = state.encoding_phase()?;
            let window = config.utility_window.min(phase.len());
            let utility = phase[phase.len() - window..].iter().sum::<f64>() / window as f64;
            encoding_trace.extend_from_slice(&phase);

            let (losses, entropy) = state.decoding_phase()?;
            let leakage = state.monitor_leakage(it)?;
            let compliant = leakage <= config.epsilon;
            iterations.push(IterationRecord {
                iteration: it,
                mi_xy_bits: utility,
                mi_sy_bits: leakage,
                decoder_loss: losses.last().copied().unwrap_or(f64::NAN),
                decoder_output_entropy_bits: entropy,
                compliant,
            });
            observe(iterations.last().expect("just pushed"));
            if !compliant {
                budget_exceeded = true;
                break;
            }
        }
    }

    let compliant: Vec<f64> = iterations
        .iter()
        .filter(|r| r.compliant)
        .map(|r| r.mi_xy_bits)
        .collect();
    let max_utility_bits = compliant.iter().copied().reduce(f64::max);
    let last_compliant_utility_bits = compliant.last().copied();
    Ok(TradeoffRun {
        config: config.clone(),
        initial_leakage_bits: initial,
        cap_reached: !budget_exceeded,
        budget_exceeded,
        iterations,
        encoding_trace_bits: encoding_trace,
        max_utility_bits,
        last_compliant_utility_bits,
        utility_source: "encoding_critic".into(),
    })
}

/// Runs every configuration independently, keeping order. A failing run
/// does not abort its siblings.
pub fn sweep(configs: &[TradeoffConfig]) -> Result<Vec<Result<TradeoffRun>>> {
    if configs.is_empty() {
        return Err(Error::InvalidArgument("sweep needs at least one configuration".into()));
    }
    Ok(configs.iter().map(run_tradeoff).collect())
}

/// Median of a nonempty slice.
pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}
