//! Exact information quantities used as ground truth.
//!
//! Discrete quantities are in bits with the `0 log 0 = 0` convention. The
//! Donsker-Varadhan bound takes critic values in nats (as a network would
//! produce them) and reports bits.

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use crate::{nats_to_bits, Error, Result};

const MASS_TOLERANCE: f64 = 1e-12;

fn validate_distribution(p: &[f64]) -> Result<()> {
    if p.is_empty() {
        return Err(Error::InvalidDistribution("empty distribution".into()));
    }
    if let Some(v) = p.iter().find(|v| !v.is_finite() || **v < 0.0) {
        return Err(Error::InvalidDistribution(format!("invalid probability {v}")));
    }
    let total: f64 = p.iter().sum();
    if (total - 1.0).abs() > MASS_TOLERANCE {
        return Err(Error::InvalidDistribution(format!(
            "total mass {total} is not 1"
        )));
    }
    Ok(())
}

/// `-p log2 p` with `0 log 0 = 0`.
fn surprisal_term(p: f64) -> f64 {
    if p > 0.0 {
        -p * p.log2()
    } else {
        0.0
    }
}

/// Shannon entropy in bits.
pub fn entropy(p: &[f64]) -> Result<f64> {
    validate_distribution(p)?;
    Ok(p.iter().map(|&v| surprisal_term(v)).sum())
}

/// `KL(p || q)` in bits.
pub fn kl_divergence(p: &[f64], q: &[f64]) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::DimensionMismatch(format!(
            "distributions have different lengths: {} vs {}",
            p.len(),
            q.len()
        )));
    }
    validate_distribution(p)?;
    validate_distribution(q)?;
    let mut kl = 0.0;
    for (index, (&pv, &qv)) in p.iter().zip(q).enumerate() {
        if pv > 0.0 {
            if qv <= 0.0 {
                return Err(Error::SupportViolation { index, p_val: pv });
            }
            kl += pv * (pv / qv).log2();
        }
    }
    // Rounding can leave a tiny negative residue when p == q.
    Ok(kl.max(0.0))
}

/// Joint probability table `p(s, y)`: rows index `s`, columns index `y`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteJoint {
    table: Array2<f64>,
}

impl DiscreteJoint {
    pub fn new(table: Array2<f64>) -> Result<Self> {
        if table.is_empty() {
            return Err(Error::InvalidDistribution("empty joint table".into()));
        }
        validate_distribution(table.as_slice().ok_or_else(|| {
            Error::InvalidDistribution("joint table must be contiguous".into())
        })?)?;
        Ok(Self {
            table: table.as_standard_layout().to_owned(),
        })
    }

    /// Builds a joint from nonnegative weights, normalizing them.
    pub fn from_weights(weights: Array2<f64>) -> Result<Self> {
        let total = weights.sum();
        if !(total > 0.0) || weights.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::InvalidDistribution(
                "weights must be nonnegative with positive total".into(),
            ));
        }
        Self::new(weights / total)
    }

    /// Product of two marginals.
    pub fn independent(ps: &[f64], py: &[f64]) -> Result<Self> {
        validate_distribution(ps)?;
        validate_distribution(py)?;
        let table = Array2::from_shape_fn((ps.len(), py.len()), |(i, j)| ps[i] * py[j]);
        Self::from_weights(table)
    }

    pub fn table(&self) -> &Array2<f64> {
        &self.table
    }

    /// Alphabet sizes `(|S|, |Y|)`.
    pub fn alphabet_sizes(&self) -> (usize, usize) {
        self.table.dim()
    }

    pub fn marginal_s(&self) -> Array1<f64> {
        self.table.sum_axis(ndarray::Axis(1))
    }

    pub fn marginal_y(&self) -> Array1<f64> {
        self.table.sum_axis(ndarray::Axis(0))
    }

    /// Flattened product of marginals `p(s) p(y)`, same layout as the table.
    pub fn product_of_marginals(&self) -> Array2<f64> {
        let ps = self.marginal_s();
        let py = self.marginal_y();
        Array2::from_shape_fn(self.table.dim(), |(i, j)| ps[i] * py[j])
    }

    /// Log-loss optimal belief before observing `Y`: the prior `p(s)`.
    pub fn prior_belief(&self) -> Array1<f64> {
        self.marginal_s()
    }

    /// Log-loss optimal belief after observing `Y = y`: the posterior
    /// `p(s | y)`. `None` when `p(y) = 0`.
    pub fn posterior_belief(&self, y: usize) -> Option<Array1<f64>> {
        let column = self.table.column(y);
        let py = column.sum();
        (py > 0.0).then(|| column.mapv(|v| v / py))
    }

    /// `H(S)` as the expected log-loss of the prior belief.
    pub fn entropy_s(&self) -> f64 {
        let q0 = self.prior_belief();
        q0.iter().map(|&p| surprisal_term(p)).sum()
    }

    /// `H(S | Y)` as the expected log-loss of the posterior beliefs.
    pub fn conditional_entropy_s_given_y(&self) -> f64 {
        let mut h = 0.0;
        for y in 0..self.table.ncols() {
            if let Some(qy) = self.posterior_belief(y) {
                for (s, &p) in self.table.column(y).iter().enumerate() {
                    if p > 0.0 {
                        h -= p * qy[s].log2();
                    }
                }
            }
        }
        h
    }
}

/// Expected inference cost gain `H(S) - H(S|Y)` under log-loss, in bits.
pub fn inference_cost_gain(joint: &DiscreteJoint) -> f64 {
    (joint.entropy_s() - joint.conditional_entropy_s_given_y()).max(0.0)
}

/// `I(S;Y) = KL(p(s,y) || p(s) p(y))` in bits.
pub fn discrete_mi(joint: &DiscreteJoint) -> f64 {
    let product = joint.product_of_marginals();
    let p = joint.table().as_slice().expect("standard layout");
    let q = product.as_slice().expect("standard layout");
    kl_divergence(p, q).expect("a joint is absolutely continuous w.r.t. its marginals' product")
}

/// A bivariate normal pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianPairSpec {
    pub rho: f64,
    pub means: (f64, f64),
    pub stds: (f64, f64),
}

impl GaussianPairSpec {
    /// Standardized pair with correlation `rho`.
    pub fn standard(rho: f64) -> Result<Self> {
        let spec = Self {
            rho,
            means: (0.0, 0.0),
            stds: (1.0, 1.0),
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rho.abs() < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "correlation must satisfy |rho| < 1, got {}",
                self.rho
            )));
        }
        if !(self.stds.0 > 0.0 && self.stds.1 > 0.0) {
            return Err(Error::InvalidArgument(
                "standard deviations must be positive".into(),
            ));
        }
        if !(self.means.0.is_finite() && self.means.1.is_finite()) {
            return Err(Error::InvalidArgument("means must be finite".into()));
        }
        Ok(())
    }

    /// Nonnegative correlation whose pair carries `bits` of mutual
    /// information, found by bisection on `gaussian_mi`.
    pub fn correlation_for_mi(bits: f64) -> Result<f64> {
        if !(bits >= 0.0 && bits.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "target mutual information must be finite and >= 0, got {bits}"
            )));
        }
        if bits == 0.0 {
            return Ok(0.0);
        }
        let mi = |rho: f64| -0.5 * (1.0 - rho * rho).log2();
        let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if mi(mid) < bits {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let rho = 0.5 * (lo + hi);
        if rho >= 1.0 {
            return Err(Error::InvalidArgument(format!(
                "{bits} bits is beyond the representable correlation range"
            )));
        }
        Ok(rho)
    }
}

/// Closed-form `I(S;Y) = -1/2 log2(1 - rho^2)` for a bivariate normal.
pub fn gaussian_mi(spec: &GaussianPairSpec) -> Result<f64> {
    spec.validate()?;
    Ok(-0.5 * (1.0 - spec.rho * spec.rho).log2())
}

/// `log(mean(exp(values)))` with max-shift stabilization.
pub fn log_mean_exp(values: &[f64]) -> f64 {
    let max = values.iter().fold(f64::NEG_INFINITY, |m, &v| m.max(v));
    if !max.is_finite() {
        return max;
    }
    let sum: f64 = values.iter().map(|&v| (v - max).exp()).sum();
    max + (sum / values.len() as f64).ln()
}

/// Donsker-Varadhan bound in nats: `mean(T_joint) - log(mean(exp(T_product)))`.
pub fn dv_bound_nats(t_joint: &[f64], t_product: &[f64]) -> Result<f64> {
    if t_joint.is_empty() || t_product.is_empty() {
        return Err(Error::InvalidArgument("critic value sets must be nonempty".into()));
    }
    if t_joint.iter().chain(t_product).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("critic values".into()));
    }
    let mean_joint = t_joint.iter().sum::<f64>() / t_joint.len() as f64;
    let bound = mean_joint - log_mean_exp(t_product);
    if !bound.is_finite() {
        return Err(Error::NonFinite("Donsker-Varadhan bound".into()));
    }
    Ok(bound)
}

/// Donsker-Varadhan bound converted to bits.
pub fn dv_bound(t_joint: &[f64], t_product: &[f64]) -> Result<f64> {
    dv_bound_nats(t_joint, t_product).map(nats_to_bits)
}

/// Exact Donsker-Varadhan bound in nats for a critic on a finite support:
/// `E_P[T] - log E_Q[exp T]`.
pub fn dv_bound_exact_nats(p: &[f64], q: &[f64], critic: &[f64]) -> Result<f64> {
    if p.len() != q.len() || p.len() != critic.len() {
        return Err(Error::DimensionMismatch(
            "p, q and critic must have the same length".into(),
        ));
    }
    validate_distribution(p)?;
    validate_distribution(q)?;
    let expect_p: f64 = p.iter().zip(critic).map(|(pv, t)| pv * t).sum();
    let max = critic
        .iter()
        .zip(q)
        .filter(|(_, &qv)| qv > 0.0)
        .fold(f64::NEG_INFINITY, |m, (&t, _)| m.max(t));
    let z: f64 = critic
        .iter()
        .zip(q)
        .map(|(t, qv)| qv * (t - max).exp())
        .sum();
    Ok(expect_p - (max + z.ln()))
}
