//! Adam optimizer state for an [`MlpNetwork`].

use crate::nn::{Gradients, MlpNetwork};
use crate::{Error, Result};

/// Adam with bias correction. Steps follow the minimization convention
/// `theta <- theta - lr * m_hat / (sqrt(v_hat) + eps)`; callers doing ascent
/// pass negated gradients.
#[derive(Debug, Clone)]
pub struct AdamState {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    step: u64,
    first_moment: Gradients,
    second_moment: Gradients,
}

impl AdamState {
    pub const DEFAULT_BETA1: f64 = 0.9;
    pub const DEFAULT_BETA2: f64 = 0.999;
    pub const DEFAULT_EPSILON: f64 = 1e-8;

    pub fn new(net: &MlpNetwork, learning_rate: f64) -> Self {
        Self::with_params(
            net,
            learning_rate,
            Self::DEFAULT_BETA1,
            Self::DEFAULT_BETA2,
            Self::DEFAULT_EPSILON,
        )
    }

    pub fn with_params(
        net: &MlpNetwork,
        learning_rate: f64,
        beta1: f64,
        beta2: f64,
        epsilon: f64,
    ) -> Self {
        Self {
            learning_rate,
            beta1,
            beta2,
            epsilon,
            step: 0,
            first_moment: Gradients::zeros_for(net),
            second_moment: Gradients::zeros_for(net),
        }
    }

    pub fn step_count(&self) -> u64 {
        self.step
    }

    pub fn first_moment(&self) -> &Gradients {
        &self.first_moment
    }

    pub fn second_moment(&self) -> &Gradients {
        &self.second_moment
    }

    /// Applies one Adam update to `net`.
    pub fn step(&mut self, net: &mut MlpNetwork, grads: &Gradients) -> Result<()> {
        net.check_gradients(grads)?;
        if !self.first_moment.layers.iter().zip(net.layers()).all(|(m, l)| {
            m.weights.dim() == l.weights.dim() && m.biases.len() == l.biases.len()
        }) || self.first_moment.layers.len() != net.layers().len()
        {
            return Err(Error::DimensionMismatch(
                "optimizer state belongs to a different network".into(),
            ));
        }
        if !grads.is_finite() {
            return Err(Error::NonFinite("gradients".into()));
        }

        self.step += 1;
        let t = self.step as i32;
        let (b1, b2, eps) = (self.beta1, self.beta2, self.epsilon);
        let correction1 = 1.0 - b1.powi(t);
        let correction2 = 1.0 - b2.powi(t);
        let lr = self.learning_rate;

        let update = |p: &mut f64, m: &mut f64, v: &mut f64, g: f64| {
            *m = b1 * *m + (1.0 - b1) * g;
            *v = b2 * *v + (1.0 - b2) * g * g;
            let m_hat = *m / correction1;
            let v_hat = *v / correction2;
            *p -= lr * m_hat / (v_hat.sqrt() + eps);
        };

        for (((layer, g), m), v) in net
            .layers_mut()
            .iter_mut()
            .zip(&grads.layers)
            .zip(&mut self.first_moment.layers)
            .zip(&mut self.second_moment.layers)
        {
            ndarray::Zip::from(&mut layer.weights)
                .and(&mut m.weights)
                .and(&mut v.weights)
                .and(&g.weights)
                .for_each(|p, m, v, &g| update(p, m, v, g));
            ndarray::Zip::from(&mut layer.biases)
                .and(&mut m.biases)
                .and(&mut v.biases)
                .and(&g.biases)
                .for_each(|p, m, v, &g| update(p, m, v, g));
        }

        if !net.is_finite() {
            return Err(Error::NonFinite("parameters after Adam step".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::{Activation, OutputActivation};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn net() -> MlpNetwork {
        MlpNetwork::new(
            &[2, 4, 1],
            Activation::Elu,
            OutputActivation::Identity,
            &mut ChaCha8Rng::seed_from_u64(3),
        )
        .unwrap()
    }

    fn constant_grads(net: &MlpNetwork, value: f64) -> Gradients {
        let mut g = Gradients::zeros_for(net);
        for l in &mut g.layers {
            l.weights.fill(value);
            l.biases.fill(value);
        }
        g
    }

    #[test]
    fn zero_gradients_leave_parameters_unchanged() {
        let mut n = net();
        let before = n.flat_params();
        let mut adam = AdamState::new(&n, 0.0005);
        for _ in 0..3 {
            let g = Gradients::zeros_for(&n);
            adam.step(&mut n, &g).unwrap();
        }
        assert_eq!(n.flat_params(), before);
        assert_eq!(adam.step_count(), 3);
    }

    #[test]
    fn constant_gradient_matches_closed_form_recurrence() {
        // With a constant gradient g both bias-corrected moments are exact:
        // m_hat = g and v_hat = g^2, so every step moves by lr * g / (|g| + eps).
        let mut n = net();
        let before = n.flat_params();
        let lr = 0.01;
        let g = 0.37;
        let mut adam = AdamState::new(&n, lr);
        let grads = constant_grads(&n, g);
        let mut previous = before.clone();
        for t in 1..=200 {
            adam.step(&mut n, &grads).unwrap();
            let now = n.flat_params();
            for ((p, q), p0) in now.iter().zip(&previous).zip(&before) {
                assert!(p < q, "parameter must move against the gradient");
                assert!(q - p <= lr * (1.0 + 1e-9));
                let expected = p0 - t as f64 * lr * g / (g + 1e-8);
                assert!((p - expected).abs() < 1e-10);
            }
            previous = now;
        }
    }

    #[test]
    fn zero_betas_reduce_to_sign_steps() {
        let mut n = net();
        let before = n.flat_params();
        let lr = 0.001;
        let mut adam = AdamState::with_params(&n, lr, 0.0, 0.0, 1e-8);
        let mut grads = Gradients::zeros_for(&n);
        let mut k = 0.0;
        for l in &mut grads.layers {
            for w in l.weights.iter_mut().chain(l.biases.iter_mut()) {
                k += 1.0;
                *w = if (k as i64) % 2 == 0 { 1e-3 * k } else { -5.0 * k };
            }
        }
        adam.step(&mut n, &grads).unwrap();
        for ((p, p0), g) in n.flat_params().iter().zip(&before).zip(grads.to_flat()) {
            let expected = p0 - lr * g.signum();
            assert!((p - expected).abs() <= lr * 1e-5 + 1e-15);
        }
    }

    #[test]
    fn rejects_non_finite_gradients() {
        let mut n = net();
        let mut adam = AdamState::new(&n, 0.1);
        let grads = constant_grads(&n, f64::NAN);
        assert!(matches!(adam.step(&mut n, &grads), Err(Error::NonFinite(_))));
        assert_eq!(adam.step_count(), 0);
    }

    #[test]
    fn rejects_foreign_state() {
        let mut n = net();
        let other = MlpNetwork::zeros(&[3, 1], Activation::Identity, OutputActivation::Identity)
            .unwrap();
        let mut adam = AdamState::new(&other, 0.1);
        let g = Gradients::zeros_for(&n);
        assert!(adam.step(&mut n, &g).is_err());
    }
}
