//! Reference computations shared by the integration tests. Everything here
//! is written independently of the library code it is used to check.

#![allow(dead_code)]

use mifunnel::nn::MlpNetwork;
use ndarray::{Array2, ArrayView2};

pub const LN2: f64 = std::f64::consts::LN_2;

/// `sum(upstream * net(batch))`, the scalar whose parameter gradient
/// `backward(.., upstream)` returns.
pub fn weighted_output(net: &MlpNetwork, batch: ArrayView2<f64>, upstream: &Array2<f64>) -> f64 {
    let out = net.forward(batch).unwrap();
    out.iter().zip(upstream.iter()).map(|(o, u)| o * u).sum()
}

/// Central finite differences of `f` over every entry of `params`.
pub fn central_differences(params: &[f64], step: f64, mut f: impl FnMut(&[f64]) -> f64) -> Vec<f64> {
    let mut p = params.to_vec();
    (0..p.len())
        .map(|i| {
            let orig = p[i];
            p[i] = orig + step;
            let up = f(&p);
            p[i] = orig - step;
            let down = f(&p);
            p[i] = orig;
            (up - down) / (2.0 * step)
        })
        .collect()
}

/// Largest `|a - b| / max(|a|, |b|, floor)` over paired entries.
pub fn max_relative_error(a: &[f64], b: &[f64], floor: f64) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs() / x.abs().max(y.abs()).max(floor))
        .fold(0.0, f64::max)
}

/// Mutual information in bits by summing `p log2(p / (ps py))` cell by cell.
pub fn brute_mi(table: &[Vec<f64>]) -> f64 {
    let ps: Vec<f64> = table.iter().map(|r| r.iter().sum()).collect();
    let cols = table[0].len();
    let py: Vec<f64> = (0..cols).map(|j| table.iter().map(|r| r[j]).sum()).collect();
    let mut mi = 0.0;
    for (i, row) in table.iter().enumerate() {
        for (j, &p) in row.iter().enumerate() {
            if p > 0.0 {
                mi += p * (p / (ps[i] * py[j])).log2();
            }
        }
    }
    mi
}

/// KL divergence in bits between two flat distributions.
pub fn brute_kl(p: &[f64], q: &[f64]) -> f64 {
    p.iter()
        .zip(q)
        .filter(|(pi, _)| **pi > 0.0)
        .map(|(pi, qi)| pi * (pi / qi).log2())
        .sum()
}

/// Correlation of a standard Gaussian pair whose mutual information is
/// `bits`, found by bisection on `-1/2 log2(1 - rho^2)`.
pub fn bisect_rho(bits: f64) -> f64 {
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if -0.5 * (1.0 - mid * mid).log2() < bits {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn bvn_density(s: f64, y: f64, rho: f64) -> f64 {
    let det = 1.0 - rho * rho;
    (-(s * s - 2.0 * rho * s * y + y * y) / (2.0 * det)).exp() / (2.0 * std::f64::consts::PI * det.sqrt())
}

fn std_normal(v: f64) -> f64 {
    (-0.5 * v * v).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

fn midpoint_mi(rho: f64, cells: usize) -> f64 {
    let (a, b) = (-8.0, 8.0);
    let h = (b - a) / cells as f64;
    let mut total = 0.0;
    for i in 0..cells {
        let s = a + (i as f64 + 0.5) * h;
        for j in 0..cells {
            let y = a + (j as f64 + 0.5) * h;
            let p = bvn_density(s, y, rho);
            if p > 0.0 {
                total += p * (p / (std_normal(s) * std_normal(y))).log2();
            }
        }
    }
    total * h * h
}

/// Mutual information of a standard Gaussian pair by 2-D midpoint
/// quadrature over +-8 standard deviations, refined until two successive
/// grids agree to 1e-6 bits.
pub fn quadrature_gaussian_mi(rho: f64) -> f64 {
    let mut cells = 100;
    let mut prev = midpoint_mi(rho, cells);
    loop {
        cells *= 2;
        let next = midpoint_mi(rho, cells);
        if (next - prev).abs() < 1e-6 || cells >= 3200 {
            return next;
        }
        prev = next;
    }
}

/// Pearson correlation of two slices.
pub fn correlation(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let cov: f64 = a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum();
    let va: f64 = a.iter().map(|x| (x - ma).powi(2)).sum();
    let vb: f64 = b.iter().map(|y| (y - mb).powi(2)).sum();
    cov / (va * vb).sqrt()
}

pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Max relative error between `backward` and central differences of
/// `sum(upstream * net(batch))` over every parameter, at step 1e-5.
pub fn network_gradient_error(net: &MlpNetwork, batch: &Array2<f64>, upstream: &Array2<f64>) -> f64 {
    let trace = net.forward_trace(batch.view()).unwrap();
    let analytic = net.backward(&trace, upstream.view()).unwrap().params.to_flat();
    let mut probe = net.clone();
    let numeric = central_differences(&net.flat_params(), 1e-5, |p| {
        probe.set_flat_params(p).unwrap();
        weighted_output(&probe, batch.view(), upstream)
    });
    max_relative_error(&analytic, &numeric, 1e-6)
}

/// Every network shape the trade-off loop and the estimator train, with a
/// random batch and upstream gradient for each.
pub fn training_shapes(seed: u64) -> Vec<(&'static str, MlpNetwork, Array2<f64>, Array2<f64>)> {
    use mifunnel::nn::{Activation, OutputActivation};
    use rand::SeedableRng;
    use rand_distr::{Distribution, StandardNormal};

    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let random = |rows: usize, cols: usize, rng: &mut rand_chacha::ChaCha8Rng| {
        Array2::from_shape_fn((rows, cols), |_| StandardNormal.sample(rng))
    };
    let n = 6;
    let mut shapes = Vec::new();

    let critic = MlpNetwork::new(&[2, 100, 100, 1], Activation::Elu, OutputActivation::Identity, &mut rng).unwrap();
    shapes.push(("estimator 2-100-100-1 elu", critic, random(n, 2, &mut rng), random(n, 1, &mut rng)));

    let encoder = MlpNetwork::identity_relu(1, 16, &mut rng).unwrap();
    shapes.push(("encoder 1-16-1 relu (identity init)", encoder, random(n, 1, &mut rng), random(n, 1, &mut rng)));

    let encoder = MlpNetwork::new(&[1, 16, 1], Activation::Relu, OutputActivation::Identity, &mut rng).unwrap();
    shapes.push(("encoder 1-16-1 relu (random init)", encoder, random(n, 1, &mut rng), random(n, 1, &mut rng)));

    let decoder = MlpNetwork::new(&[1, 100, 100, 32], Activation::Elu, OutputActivation::Softmax, &mut rng).unwrap();
    shapes.push(("decoder 1-100-100-32 elu softmax", decoder, random(n, 1, &mut rng), random(n, 32, &mut rng)));

    let decoder = MlpNetwork::new(&[1, 100, 100, 1], Activation::Elu, OutputActivation::Identity, &mut rng).unwrap();
    shapes.push(("decoder 1-100-100-1 elu", decoder, random(n, 1, &mut rng), random(n, 1, &mut rng)));

    shapes
}
