//! Neural Donsker-Varadhan mutual information estimator.
//!
//! A critic network `T(s, y)` is trained by gradient ascent on
//!
//! ```text
//! mean_joint T - log mean_product exp(T)
//! ```
//!
//! where the product-of-marginals batch is the joint batch with its second
//! variable shuffled along the batch axis. The plug-in gradient of the log
//! term divides by the minibatch mean of `exp(T)`, which is a biased estimate
//! of the gradient; the corrected gradient divides by an exponential moving
//! average of that mean instead. The average is tracked in log space so large
//! critic outputs cannot overflow it.

use ndarray::Array2;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::adam::AdamState;
use crate::batch::SampleBatch;
use crate::nn::{Activation, ForwardTrace, Gradients, MlpNetwork, OutputActivation};
use crate::oracle::log_mean_exp;
use crate::{nats_to_bits, Error, Result};

/// Factor applied to the He-initialized output layer of a fresh critic.
pub const CRITIC_OUTPUT_INIT_SCALE: f64 = 0.1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MineConfig {
    /// Optimizer steps; one fresh minibatch per epoch.
    pub epochs: usize,
    /// Minibatch size `k`.
    pub batch_size: usize,
    pub learning_rate: f64,
    /// Moving-average rate for the log-term denominator, in `(0, 1]`.
    pub ema_rate: f64,
    pub seed: u64,
    pub hidden_layers: Vec<usize>,
    pub activation: Activation,
    /// Number of trailing epochs averaged into the reported estimate.
    pub smoothing_window: usize,
}

impl Default for MineConfig {
    fn default() -> Self {
        Self {
            epochs: 500,
            batch_size: 20_000,
            learning_rate: 0.0005,
            ema_rate: 0.01,
            seed: 0,
            hidden_layers: vec![100, 100],
            activation: Activation::Elu,
            smoothing_window: 50,
        }
    }
}

impl MineConfig {
    pub fn validate(&self) -> Result<()> {
        if self.batch_size < 2 {
            return Err(Error::InvalidArgument(format!(
                "minibatch size must be >= 2, got {}",
                self.batch_size
            )));
        }
        if !(self.ema_rate > 0.0 && self.ema_rate <= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "ema rate must be in (0, 1], got {}",
                self.ema_rate
            )));
        }
        if !(self.learning_rate >= 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "learning rate must be finite and >= 0, got {}",
                self.learning_rate
            )));
        }
        if self.smoothing_window == 0 {
            return Err(Error::InvalidArgument("smoothing window must be >= 1".into()));
        }
        Ok(())
    }
}

/// Critic values and traces from one evaluation of the objective.
#[derive(Debug, Clone)]
pub struct DvEvaluation {
    /// Objective in nats.
    pub value: f64,
    pub t_joint: Vec<f64>,
    pub t_product: Vec<f64>,
    /// `log(mean(exp(T)))` over the product batch.
    pub log_mean_exp_product: f64,
    joint_trace: ForwardTrace,
    product_trace: ForwardTrace,
}

/// Ascent-direction gradient of the objective with respect to the critic
/// parameters and inputs.
#[derive(Debug, Clone)]
pub struct CorrectedGradient {
    /// Objective in nats, evaluated before any update.
    pub objective: f64,
    pub params: Gradients,
    /// `d objective / d input` for each joint row.
    pub joint_input: Array2<f64>,
    /// `d objective / d input` for each product row.
    pub product_input: Array2<f64>,
}

#[derive(Debug, Clone)]
pub struct MineEstimator {
    critic: MlpNetwork,
    adam: AdamState,
    log_ema: Option<f64>,
    config: MineConfig,
    rng: ChaCha8Rng,
}

impl MineEstimator {
    /// Fresh estimator with a He-initialized critic for inputs of the given
    /// widths.
    pub fn new(left_dim: usize, right_dim: usize, config: MineConfig) -> Result<Self> {
        config.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let mut dims = vec![left_dim + right_dim];
        dims.extend(&config.hidden_layers);
        dims.push(1);
        let mut critic =
            MlpNetwork::new(&dims, config.activation, OutputActivation::Identity, &mut rng)?;
        // A near-constant initial critic keeps the first e^T weights close
        // to 1; a full-scale output layer occasionally stalls training.
        if let Some(last) = critic.layers_mut().last_mut() {
            last.weights *= CRITIC_OUTPUT_INIT_SCALE;
        }
        Self::assemble(critic, config, rng)
    }

    /// Estimator around an existing scalar critic.
    pub fn with_critic(critic: MlpNetwork, config: MineConfig) -> Result<Self> {
        config.validate()?;
        if critic.output_dim() != 1 {
            return Err(Error::DimensionMismatch(format!(
                "critic must have a scalar output, got {}",
                critic.output_dim()
            )));
        }
        let rng = ChaCha8Rng::seed_from_u64(config.seed);
        Self::assemble(critic, config, rng)
    }

    fn assemble(critic: MlpNetwork, config: MineConfig, rng: ChaCha8Rng) -> Result<Self> {
        let adam = AdamState::new(&critic, config.learning_rate);
        Ok(Self {
            critic,
            adam,
            log_ema: None,
            config,
            rng,
        })
    }

    pub fn critic(&self) -> &MlpNetwork {
        &self.critic
    }

    pub fn adam(&self) -> &AdamState {
        &self.adam
    }

    pub fn config(&self) -> &MineConfig {
        &self.config
    }

    /// Moving average of `mean(exp(T))` on product batches; `None` before
    /// the first update.
    pub fn ema_denominator(&self) -> Option<f64> {
        self.log_ema.map(f64::exp)
    }

    pub fn log_ema_denominator(&self) -> Option<f64> {
        self.log_ema
    }

    /// Random stream used for marginal shuffles.
    pub fn rng_mut(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }

    fn check_batches(&self, joint: &SampleBatch, product: &SampleBatch) -> Result<()> {
        if joint.is_empty() || product.is_empty() {
            return Err(Error::InvalidArgument("batches must be nonempty".into()));
        }
        for b in [joint, product] {
            if b.width() != self.critic.input_dim() {
                return Err(Error::DimensionMismatch(format!(
                    "batch has {} columns, critic expects {}",
                    b.width(),
                    self.critic.input_dim()
                )));
            }
        }
        Ok(())
    }

    /// `mean_joint T - log mean_product exp(T)` in nats.
    pub fn dv_objective(&self, joint: &SampleBatch, product: &SampleBatch) -> Result<DvEvaluation> {
        self.check_batches(joint, product)?;
        let joint_trace = self.critic.forward_trace(joint.data().view())?;
        let product_trace = self.critic.forward_trace(product.data().view())?;
        let t_joint: Vec<f64> = joint_trace.output().column(0).to_vec();
        let t_product: Vec<f64> = product_trace.output().column(0).to_vec();
        if t_joint.iter().chain(&t_product).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("critic output".into()));
        }
        let mean_joint = t_joint.iter().sum::<f64>() / t_joint.len() as f64;
        let lme = log_mean_exp(&t_product);
        let value = mean_joint - lme;
        if !value.is_finite() {
            return Err(Error::NonFinite("Donsker-Varadhan objective".into()));
        }
        Ok(DvEvaluation {
            value,
            t_joint,
            t_product,
            log_mean_exp_product: lme,
            joint_trace,
            product_trace,
        })
    }

    fn update_ema(&mut self, log_batch_mean: f64) -> f64 {
        let alpha = self.config.ema_rate;
        let next = match self.log_ema {
            None => log_batch_mean,
            Some(_) if alpha >= 1.0 => log_batch_mean,
            Some(prev) => {
                let a = (1.0 - alpha).ln() + prev;
                let b = alpha.ln() + log_batch_mean;
                let m = a.max(b);
                m + ((a - m).exp() + (b - m).exp()).ln()
            }
        };
        self.log_ema = Some(next);
        next
    }

    /// Evaluates the objective, folds the product batch into the moving
    /// average and returns the corrected ascent gradient
    /// `mean(grad T on joint) - mean(exp(T) grad T on product) / ema`.
    pub fn corrected_gradient(
        &mut self,
        joint: &SampleBatch,
        product: &SampleBatch,
    ) -> Result<CorrectedGradient> {
        let eval = self.dv_objective(joint, product)?;
        let log_ema = self.update_ema(eval.log_mean_exp_product);

        let n_joint = eval.t_joint.len() as f64;
        let n_product = eval.t_product.len() as f64;
        let up_joint = Array2::from_elem((eval.t_joint.len(), 1), 1.0 / n_joint);
        let up_product = Array2::from_shape_fn((eval.t_product.len(), 1), |(i, _)| {
            -(eval.t_product[i] - log_ema).exp() / n_product
        });

        let back_joint = self.critic.backward(&eval.joint_trace, up_joint.view())?;
        let back_product = self.critic.backward(&eval.product_trace, up_product.view())?;
        let mut params = back_joint.params;
        for (g, p) in params.layers.iter_mut().zip(&back_product.params.layers) {
            g.weights += &p.weights;
            g.biases += &p.biases;
        }
        if !params.is_finite() {
            return Err(Error::NonFinite("critic gradients".into()));
        }
        Ok(CorrectedGradient {
            objective: eval.value,
            params,
            joint_input: back_joint.input,
            product_input: back_product.input,
        })
    }

    /// Applies an ascent-direction gradient with Adam.
    pub fn apply_ascent(&mut self, ascent: &Gradients) -> Result<()> {
        let mut descent = ascent.clone();
        descent.scale(-1.0);
        self.adam.step(&mut self.critic, &descent)
    }

    /// One corrected-gradient ascent step. Returns the objective (nats)
    /// evaluated before the update.
    pub fn bias_corrected_step(&mut self, joint: &SampleBatch, product: &SampleBatch) -> Result<f64> {
        let grad = self.corrected_gradient(joint, product)?;
        self.apply_ascent(&grad.params)?;
        Ok(grad.objective)
    }

    /// Shuffles `joint` with the estimator's own stream and takes one step.
    pub fn train_on(&mut self, joint: &SampleBatch) -> Result<f64> {
        let product = joint.marginal_shuffle(&mut self.rng)?;
        self.bias_corrected_step(joint, &product)
    }
}

/// Per-epoch objectives of one training run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MineTrace {
    /// Minibatch objective of every epoch, in bits.
    pub epoch_bits: Vec<f64>,
    /// Mean of the trailing smoothing window, in bits.
    pub final_bits: f64,
}

impl MineTrace {
    pub fn from_epochs(epoch_bits: Vec<f64>, window: usize) -> Self {
        let final_bits = trailing_mean(&epoch_bits, epoch_bits.len(), window);
        Self {
            epoch_bits,
            final_bits,
        }
    }

    /// Mean of the `window` epochs ending at (1-based) epoch `epoch`.
    pub fn smoothed_at(&self, epoch: usize, window: usize) -> f64 {
        trailing_mean(&self.epoch_bits, epoch.min(self.epoch_bits.len()), window)
    }
}

fn trailing_mean(values: &[f64], end: usize, window: usize) -> f64 {
    let start = end.saturating_sub(window.max(1));
    let slice = &values[start..end];
    if slice.is_empty() {
        return 0.0;
    }
    slice.iter().sum::<f64>() / slice.len() as f64
}

/// Random stream for data drawn on behalf of an estimator seeded with `seed`.
pub fn data_stream(seed: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1);
    rng
}

/// Trains a fresh estimator for `config.epochs` epochs, drawing a fresh
/// minibatch of `config.batch_size` joint rows from `sampler` every epoch.
///
/// The sampler receives the requested row count and a data stream derived
/// from `config.seed`.
pub fn estimate_mi<F>(sampler: F, config: &MineConfig) -> Result<MineTrace>
where
    F: FnMut(usize, &mut ChaCha8Rng) -> Result<SampleBatch>,
{
    estimate_mi_observed(sampler, config, |_, _| {})
}

/// [`estimate_mi`] that also reports `(epoch, bits)` after every epoch
/// (1-based).
pub fn estimate_mi_observed<F, O>(mut sampler: F, config: &MineConfig, mut observe: O) -> Result<MineTrace>
where
    F: FnMut(usize, &mut ChaCha8Rng) -> Result<SampleBatch>,
    O: FnMut(usize, f64),
{
    config.validate()?;
    let mut data_rng = data_stream(config.seed);
    let first = sampler(config.batch_size, &mut data_rng)?;
    check_sampled(&first, config.batch_size)?;
    let mut est = MineEstimator::new(first.vars()[0].dim, first.vars()[1].dim, config.clone())?;

    let mut epoch_bits = Vec::with_capacity(config.epochs);
    let mut batch = Some(first);
    for _ in 0..config.epochs {
        let joint = match batch.take() {
            Some(b) => b,
            None => {
                let b = sampler(config.batch_size, &mut data_rng)?;
                check_sampled(&b, config.batch_size)?;
                b
            }
        };
        let bits = nats_to_bits(est.train_on(&joint)?);
        epoch_bits.push(bits);
        observe(epoch_bits.len(), bits);
    }
    Ok(MineTrace::from_epochs(epoch_bits, config.smoothing_window))
}

fn check_sampled(batch: &SampleBatch, k: usize) -> Result<()> {
    if batch.vars().len() != 2 {
        return Err(Error::InvalidArgument(
            "sampler must yield two-variable batches".into(),
        ));
    }
    if batch.len() < k {
        return Err(Error::InvalidArgument(format!(
            "sampler yielded {} rows, minibatch needs {k}",
            batch.len()
        )));
    }
    Ok(())
}

/// Sample Pearson correlation of two equally long columns.
pub fn sample_correlation(a: ndarray::ArrayView1<f64>, b: ndarray::ArrayView1<f64>) -> f64 {
    let n = a.len() as f64;
    let ma = a.sum() / n;
    let mb = b.sum() / n;
    let mut cov = 0.0;
    let mut va = 0.0;
    let mut vb = 0.0;
    for (x, y) in a.iter().zip(b.iter()) {
        cov += (x - ma) * (y - mb);
        va += (x - ma) * (x - ma);
        vb += (y - mb) * (y - mb);
    }
    cov / (va * vb).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::Dense;
    use ndarray::{array, Array1};
    use rand::Rng;
    use rand_distr::StandardNormal;

    fn tiny_config(ema_rate: f64) -> MineConfig {
        MineConfig {
            epochs: 10,
            batch_size: 4,
            learning_rate: 0.01,
            ema_rate,
            seed: 5,
            hidden_layers: vec![8],
            activation: Activation::Elu,
            smoothing_window: 5,
        }
    }

    fn gaussian_pair(n: usize, rho: f64, rng: &mut ChaCha8Rng) -> SampleBatch {
        let mut s = Array2::zeros((n, 1));
        let mut y = Array2::zeros((n, 1));
        for i in 0..n {
            let a: f64 = rng.sample(StandardNormal);
            let b: f64 = rng.sample(StandardNormal);
            s[[i, 0]] = a;
            y[[i, 0]] = rho * a + (1.0 - rho * rho).sqrt() * b;
        }
        SampleBatch::pair(s.view(), y.view()).unwrap()
    }

    fn linear_critic(w: [f64; 3], b: f64) -> MlpNetwork {
        MlpNetwork::from_layers(
            vec![Dense {
                weights: array![[w[0], w[1], w[2]]],
                biases: array![b],
            }],
            Activation::Identity,
            OutputActivation::Identity,
        )
        .unwrap()
    }

    fn three_column_batches() -> (SampleBatch, SampleBatch) {
        let joint = SampleBatch::from_blocks(vec![
            ("s", array![[0.5, -1.0], [1.5, 0.25], [-0.75, 2.0]].view()),
            ("y", array![[0.3], [-1.2], [0.9]].view()),
        ])
        .unwrap();
        let product = joint.permute_second(&[2, 0, 1]).unwrap();
        (joint, product)
    }

    #[test]
    fn zero_critic_objective_is_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let joint = gaussian_pair(64, 0.8, &mut rng);
        let product = joint.marginal_shuffle(&mut rng).unwrap();
        let zero = MlpNetwork::zeros(&[2, 8, 1], Activation::Elu, OutputActivation::Identity).unwrap();
        let est = MineEstimator::with_critic(zero, tiny_config(0.01)).unwrap();
        assert_eq!(est.dv_objective(&joint, &product).unwrap().value, 0.0);
    }

    #[test]
    fn constant_critic_objective_is_zero() {
        let (joint, product) = three_column_batches();
        for c in [-25.0, 3.0, 400.0] {
            let est = MineEstimator::with_critic(linear_critic([0.0; 3], c), tiny_config(0.01)).unwrap();
            assert!(est.dv_objective(&joint, &product).unwrap().value.abs() < 1e-9);
        }
    }

    #[test]
    fn shift_invariance_of_objective() {
        let (joint, product) = three_column_batches();
        let base = MineEstimator::with_critic(linear_critic([0.3, -0.2, 0.7], 0.1), tiny_config(0.01))
            .unwrap();
        let shifted =
            MineEstimator::with_critic(linear_critic([0.3, -0.2, 0.7], 50.1), tiny_config(0.01))
                .unwrap();
        let a = base.dv_objective(&joint, &product).unwrap().value;
        let b = shifted.dv_objective(&joint, &product).unwrap().value;
        assert!((a - b).abs() < 1e-9);
    }

    #[test]
    fn corrected_gradient_matches_hand_formula() {
        // T(v) = w . v + b, so grad_w T = v and grad_b T = 1.
        let (joint, product) = three_column_batches();
        let w = [0.3, -0.2, 0.7];
        let b = 0.1;
        let alpha = 0.25;
        let mut est = MineEstimator::with_critic(linear_critic(w, b), tiny_config(alpha)).unwrap();

        let t = |v: ndarray::ArrayView1<f64>| w[0] * v[0] + w[1] * v[1] + w[2] * v[2] + b;
        let mean_exp = |batch: &SampleBatch| {
            batch.data().rows().into_iter().map(|r| t(r).exp()).sum::<f64>() / batch.len() as f64
        };

        // first call initializes the average to the batch mean
        let first = est.corrected_gradient(&joint, &product).unwrap();
        let mut ema = mean_exp(&product);
        assert!((est.ema_denominator().unwrap() - ema).abs() < 1e-12);
        let expected = hand_gradient(&joint, &product, ema, &t);
        assert_close(&first.params.to_flat(), &expected, 1e-8);

        // second call blends a different product batch into the average
        let product2 = joint.permute_second(&[1, 2, 0]).unwrap();
        let second = est.corrected_gradient(&joint, &product2).unwrap();
        ema = (1.0 - alpha) * ema + alpha * mean_exp(&product2);
        assert!((est.ema_denominator().unwrap() - ema).abs() < 1e-12);
        let expected = hand_gradient(&joint, &product2, ema, &t);
        assert_close(&second.params.to_flat(), &expected, 1e-8);
    }

    fn hand_gradient(
        joint: &SampleBatch,
        product: &SampleBatch,
        ema: f64,
        t: &dyn Fn(ndarray::ArrayView1<f64>) -> f64,
    ) -> Vec<f64> {
        let mut g = vec![0.0; 4];
        let nj = joint.len() as f64;
        let np = product.len() as f64;
        for r in joint.data().rows() {
            for k in 0..3 {
                g[k] += r[k] / nj;
            }
            g[3] += 1.0 / nj;
        }
        for r in product.data().rows() {
            let e = t(r).exp();
            for k in 0..3 {
                g[k] -= e * r[k] / (np * ema);
            }
            g[3] -= e / (np * ema);
        }
        g
    }

    fn assert_close(a: &[f64], b: &[f64], tol: f64) {
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(b) {
            assert!((x - y).abs() < tol, "{x} vs {y}");
        }
    }

    #[test]
    fn unit_ema_rate_gives_plug_in_gradient() {
        // With alpha = 1 the corrected gradient is the exact gradient of the
        // minibatch objective; compare against central differences of it.
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let joint = gaussian_pair(32, 0.6, &mut rng);
        let product = joint.marginal_shuffle(&mut rng).unwrap();
        let mut est = MineEstimator::new(1, 1, tiny_config(1.0)).unwrap();
        // make the average stale first so alpha = 1 has something to discard
        let other = joint.marginal_shuffle(&mut rng).unwrap();
        est.corrected_gradient(&joint, &other).unwrap();

        let grad = est.corrected_gradient(&joint, &product).unwrap().params.to_flat();
        let params = est.critic().flat_params();
        let h = 1e-6;
        for i in 0..params.len() {
            let mut probe = est.critic().clone();
            let mut p = params.clone();
            p[i] += h;
            probe.set_flat_params(&p).unwrap();
            let up = MineEstimator::with_critic(probe.clone(), tiny_config(1.0))
                .unwrap()
                .dv_objective(&joint, &product)
                .unwrap()
                .value;
            p[i] -= 2.0 * h;
            probe.set_flat_params(&p).unwrap();
            let down = MineEstimator::with_critic(probe, tiny_config(1.0))
                .unwrap()
                .dv_objective(&joint, &product)
                .unwrap()
                .value;
            let fd = (up - down) / (2.0 * h);
            assert!((fd - grad[i]).abs() < 1e-6 * (1.0 + fd.abs()), "param {i}: {fd} vs {}", grad[i]);
        }
    }

    #[test]
    fn zero_variance_critic_corrected_equals_uncorrected() {
        // A critic that ignores its input yields the same exp(T) on every
        // batch, so the moving average equals the batch mean.
        let (joint, product) = three_column_batches();
        let critic = linear_critic([0.0; 3], 0.7);
        let mut slow = MineEstimator::with_critic(critic.clone(), tiny_config(0.01)).unwrap();
        let mut plug_in = MineEstimator::with_critic(critic, tiny_config(1.0)).unwrap();
        let product2 = joint.permute_second(&[1, 2, 0]).unwrap();
        for p in [&product, &product2] {
            let a = slow.corrected_gradient(&joint, p).unwrap().params.to_flat();
            let b = plug_in.corrected_gradient(&joint, p).unwrap().params.to_flat();
            assert_close(&a, &b, 1e-12);
        }
    }

    #[test]
    fn ema_is_positive_after_first_update() {
        let (joint, product) = three_column_batches();
        let mut est = MineEstimator::with_critic(linear_critic([0.3, -0.2, 0.7], 0.1), tiny_config(0.01))
            .unwrap();
        assert!(est.ema_denominator().is_none());
        est.bias_corrected_step(&joint, &product).unwrap();
        assert!(est.ema_denominator().unwrap() > 0.0);
        assert_eq!(est.adam().step_count(), 1);
    }

    #[test]
    fn config_validation() {
        let mut c = tiny_config(0.01);
        c.batch_size = 1;
        assert!(MineEstimator::new(1, 1, c.clone()).is_err());
        c.batch_size = 4;
        c.ema_rate = 0.0;
        assert!(MineEstimator::new(1, 1, c).is_err());
    }

    #[test]
    fn estimate_mi_reports_trace_and_window_mean() {
        let config = MineConfig {
            epochs: 30,
            batch_size: 256,
            learning_rate: 0.005,
            ema_rate: 0.01,
            seed: 4,
            hidden_layers: vec![16, 16],
            activation: Activation::Elu,
            smoothing_window: 10,
        };
        let trace = estimate_mi(|n, rng| Ok(gaussian_pair(n, 0.9, rng)), &config).unwrap();
        assert_eq!(trace.epoch_bits.len(), 30);
        let tail: f64 = trace.epoch_bits[20..].iter().sum::<f64>() / 10.0;
        assert!((trace.final_bits - tail).abs() < 1e-12);
        let again = estimate_mi(|n, rng| Ok(gaussian_pair(n, 0.9, rng)), &config).unwrap();
        assert_eq!(trace, again);
    }

    #[test]
    fn estimate_mi_rejects_short_batches() {
        let config = MineConfig {
            batch_size: 100,
            ..tiny_config(0.01)
        };
        let err = estimate_mi(|_, rng| Ok(gaussian_pair(10, 0.5, rng)), &config);
        assert!(err.is_err());
    }

    #[test]
    fn sample_correlation_of_identical_columns_is_one() {
        let a = Array1::linspace(-1.0, 3.0, 50);
        assert!((sample_correlation(a.view(), a.view()) - 1.0).abs() < 1e-12);
    }
}
