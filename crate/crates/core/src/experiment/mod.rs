//! Reproduction experiments: specs, execution and result files.
//!
//! [`run_experiment`] writes three kinds of artifacts into the spec's output
//! directory: `runs.csv` (one [`RunRecord`] per run and epoch),
//! `summary.json` (per-run final metrics, per-group medians and the resolved
//! spec) and one SVG chart named after the experiment.

pub mod config;
pub mod records;
pub mod svg;

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use ndarray::Array2;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::batch::SampleBatch;
use crate::channel::{ChainSpec, NoiseChannel, NoiseKind};
use crate::funnel::{median, run_tradeoff_observed, DecoderMode, TradeoffConfig, TradeoffRun, TradeoffSeeds};
use crate::mine::{estimate_mi_observed, MineConfig};
use crate::nn::Activation;
use crate::oracle::GaussianPairSpec;
use crate::{Error, Result};

pub use config::{load_config, parse_config, parse_seed_list};
pub use records::{read_records, read_records_file, write_records, write_records_file, RunRecord, CSV_HEADER};

use config::{parse_list, parse_scalar, SetError};
use svg::{BarChart, BarGroup, LineChart, Series};

/// Environment variable that replaces the default seed.
pub const SEED_ENV: &str = "MIFUNNEL_SEED";

/// Epoch at which the convergence experiment reports its intermediate
/// estimate.
pub const CHECKPOINT_EPOCH: usize = 250;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentId {
    /// MINE on a Gaussian pair with known mutual information.
    Fig4Convergence,
    /// Utility traces of the trade-off loop for each privacy budget.
    Fig5BudgetTraces,
    /// Max utility against privacy budget.
    Fig6BudgetCurve,
    /// Max utility against noise level, Gaussian and Laplacian.
    Fig7NoiseTraces,
    /// Max utility per budget, Gaussian and Laplacian side by side.
    Fig8NoiseBars,
    /// Utility traces for different Gaussian noise parameters.
    Fig9GaussParams,
}

impl ExperimentId {
    pub const ALL: [ExperimentId; 6] = [
        ExperimentId::Fig4Convergence,
        ExperimentId::Fig5BudgetTraces,
        ExperimentId::Fig6BudgetCurve,
        ExperimentId::Fig7NoiseTraces,
        ExperimentId::Fig8NoiseBars,
        ExperimentId::Fig9GaussParams,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ExperimentId::Fig4Convergence => "fig4_convergence",
            ExperimentId::Fig5BudgetTraces => "fig5_budget_traces",
            ExperimentId::Fig6BudgetCurve => "fig6_budget_curve",
            ExperimentId::Fig7NoiseTraces => "fig7_noise_traces",
            ExperimentId::Fig8NoiseBars => "fig8_noise_bars",
            ExperimentId::Fig9GaussParams => "fig9_gauss_params",
        }
    }
}

impl fmt::Display for ExperimentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ExperimentId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ExperimentId::ALL
            .into_iter()
            .find(|id| id.as_str() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown experiment id {s:?}")))
    }
}

/// Fully resolved experiment settings. Fields that an experiment does not
/// use are carried along unchanged.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub id: ExperimentId,
    pub output_dir: PathBuf,
    pub seeds: Vec<u64>,
    pub learning_rate: f64,
    /// Network depth counted in weight layers; every critic and decoder has
    /// `layers - 1` hidden layers.
    pub layers: usize,
    pub hidden_width: usize,
    /// Estimator epochs for the convergence run, encoding epochs per outer
    /// iteration for the trade-off runs.
    pub epochs: usize,
    pub batch_size: usize,
    pub ema_rate: f64,
    pub smoothing_window: usize,
    /// Mutual information of the convergence experiment's Gaussian pair.
    pub target_mi_bits: f64,
    /// Budgets swept by the budget experiments.
    pub epsilons: Vec<f64>,
    /// Budget of the noise experiments.
    pub epsilon: f64,
    pub decoding_epochs: usize,
    pub monitor_epochs: usize,
    pub outer_iterations: usize,
    pub noise_kind: NoiseKind,
    pub noise_std: f64,
    /// Noise levels swept by the noise-trace experiment.
    pub noise_stds: Vec<f64>,
    /// Gaussian standard deviations compared by the noise-parameter experiment.
    pub gauss_stds: Vec<f64>,
    pub rho_sx: f64,
    pub decoder_mode: DecoderMode,
    pub bins: usize,
    pub encoder_hidden: usize,
    pub utility_window: usize,
}

/// Seed from [`SEED_ENV`], if set.
pub fn env_seed() -> Result<Option<u64>> {
    match std::env::var(SEED_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| Error::InvalidArgument(format!("{SEED_ENV}={v:?} is not a seed"))),
        Err(_) => Ok(None),
    }
}

impl ExperimentSpec {
    /// Defaults: learning rate 0.0005, three layers, 500 epochs, minibatch
    /// 20000 and budgets 0.5 to 1.25.
    pub fn defaults(id: ExperimentId) -> Self {
        Self {
            id,
            output_dir: PathBuf::from("results").join(id.as_str()),
            seeds: vec![env_seed().ok().flatten().unwrap_or(0)],
            learning_rate: 0.0005,
            layers: 3,
            hidden_width: 100,
            epochs: 500,
            batch_size: 20_000,
            ema_rate: 0.01,
            smoothing_window: 50,
            target_mi_bits: 0.6586,
            epsilons: vec![0.5, 0.75, 1.0, 1.25],
            epsilon: 0.75,
            decoding_epochs: 500,
            monitor_epochs: 200,
            outer_iterations: 100,
            noise_kind: NoiseKind::Gaussian,
            noise_std: 1.0,
            noise_stds: vec![0.25, 0.5, 1.0, 2.0],
            gauss_stds: vec![0.1117, 1.0],
            rho_sx: 0.8,
            decoder_mode: DecoderMode::BinnedCrossEntropy,
            bins: 32,
            encoder_hidden: 16,
            utility_window: 10,
        }
    }

    pub(crate) fn set(&mut self, key: &str, value: &str) -> std::result::Result<(), SetError> {
        match key {
            "output_dir" => self.output_dir = PathBuf::from(value.trim().trim_matches('"')),
            "seeds" => self.seeds = parse_list(value)?,
            "learning_rate" => self.learning_rate = parse_scalar(value)?,
            "layers" => self.layers = parse_scalar(value)?,
            "hidden_width" => self.hidden_width = parse_scalar(value)?,
            "epochs" => self.epochs = parse_scalar(value)?,
            "batch_size" => self.batch_size = parse_scalar(value)?,
            "ema_rate" => self.ema_rate = parse_scalar(value)?,
            "smoothing_window" => self.smoothing_window = parse_scalar(value)?,
            "target_mi_bits" => self.target_mi_bits = parse_scalar(value)?,
            "epsilons" => self.epsilons = parse_list(value)?,
            "epsilon" => self.epsilon = parse_scalar(value)?,
            "decoding_epochs" => self.decoding_epochs = parse_scalar(value)?,
            "monitor_epochs" => self.monitor_epochs = parse_scalar(value)?,
            "outer_iterations" => self.outer_iterations = parse_scalar(value)?,
            "noise_kind" => {
                self.noise_kind = value
                    .trim()
                    .trim_matches('"')
                    .parse()
                    .map_err(|e: Error| SetError::BadValue(e.to_string()))?
            }
            "noise_std" => self.noise_std = parse_scalar(value)?,
            "noise_stds" => self.noise_stds = parse_list(value)?,
            "gauss_stds" => self.gauss_stds = parse_list(value)?,
            "rho_sx" => self.rho_sx = parse_scalar(value)?,
            "decoder_mode" => {
                self.decoder_mode = match value.trim().trim_matches('"') {
                    "binned_cross_entropy" => DecoderMode::BinnedCrossEntropy,
                    "squared_error" => DecoderMode::SquaredError,
                    other => return Err(SetError::BadValue(format!("unknown decoder mode {other:?}"))),
                }
            }
            "bins" => self.bins = parse_scalar(value)?,
            "encoder_hidden" => self.encoder_hidden = parse_scalar(value)?,
            "utility_window" => self.utility_window = parse_scalar(value)?,
            _ => return Err(SetError::UnknownKey),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidArgument(msg.to_string()));
        if self.seeds.is_empty() {
            return bad("seed list must not be empty");
        }
        if self.layers < 2 || self.hidden_width == 0 {
            return bad("networks need at least 2 layers and a positive hidden width");
        }
        if self.epochs == 0 || self.smoothing_window == 0 {
            return bad("epochs and smoothing window must be >= 1");
        }
        if !(self.target_mi_bits >= 0.0 && self.target_mi_bits.is_finite()) {
            return bad("target mutual information must be finite and >= 0");
        }
        if self.epsilons.is_empty() || self.noise_stds.is_empty() || self.gauss_stds.is_empty() {
            return bad("budget and noise lists must not be empty");
        }
        if self.epsilons.iter().chain([&self.epsilon]).any(|e| !(*e >= 0.0 && e.is_finite())) {
            return bad("privacy budgets must be finite and >= 0");
        }
        let stds = self.noise_stds.iter().chain(&self.gauss_stds).chain([&self.noise_std]);
        for &std in stds {
            NoiseChannel::scalar(self.noise_kind, std)?;
        }
        self.mine_config(0).validate()?;
        self.tradeoff_config(self.epsilon, self.noise_kind, self.noise_std, 0)?
            .validate()
    }

    fn hidden(&self) -> Vec<usize> {
        vec![self.hidden_width; self.layers - 1]
    }

    pub fn mine_config(&self, seed: u64) -> MineConfig {
        MineConfig {
            epochs: self.epochs,
            batch_size: self.batch_size,
            learning_rate: self.learning_rate,
            ema_rate: self.ema_rate,
            seed,
            hidden_layers: self.hidden(),
            activation: Activation::Elu,
            smoothing_window: self.smoothing_window,
        }
    }

    pub fn tradeoff_config(
        &self,
        epsilon: f64,
        kind: NoiseKind,
        std: f64,
        seed: u64,
    ) -> Result<TradeoffConfig> {
        Ok(TradeoffConfig {
            epsilon,
            learning_rate: self.learning_rate,
            encoder_learning_rate: None,
            batch_size: self.batch_size,
            encoding_epochs: self.epochs,
            decoding_epochs: self.decoding_epochs,
            monitor_epochs: self.monitor_epochs,
            max_outer_iterations: self.outer_iterations,
            ema_rate: self.ema_rate,
            critic_hidden: self.hidden(),
            encoder_hidden: self.encoder_hidden,
            decoder_hidden: self.hidden(),
            channel: NoiseChannel::scalar(kind, std)?,
            chain: ChainSpec {
                rho_sx: self.rho_sx,
                ..ChainSpec::default()
            },
            decoder_mode: self.decoder_mode,
            bins: self.bins,
            utility_window: self.utility_window,
            seeds: TradeoffSeeds::from_base(seed),
        })
    }
}

/// Final metrics of one run. Estimation runs fill the `*_bits` estimate
/// fields; trade-off runs fill the utility and termination fields.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub run_id: String,
    pub seed: u64,
    pub epsilon: Option<f64>,
    pub noise_kind: NoiseKind,
    pub noise_std: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub true_bits: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub final_bits: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub checkpoint_bits: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_leakage_bits: Option<f64>,
    pub iterations: usize,
    pub compliant_iterations: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_utility_bits: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub last_compliant_utility_bits: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub budget_exceeded: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cap_reached: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub utility_source: Option<String>,
}

/// Seed median of one metric for runs sharing budget and channel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupSummary {
    pub epsilon: Option<f64>,
    pub noise_kind: NoiseKind,
    pub noise_std: f64,
    /// `final_bits` for estimation runs, `max_utility_bits` (zero when no
    /// iteration was compliant) for trade-off runs.
    pub metric: String,
    pub seeds: Vec<u64>,
    pub values: Vec<f64>,
    pub median: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub experiment: ExperimentId,
    pub spec: ExperimentSpec,
    pub runs: Vec<RunSummary>,
    pub groups: Vec<GroupSummary>,
}

impl Summary {
    pub fn group(&self, epsilon: Option<f64>, kind: NoiseKind, std: f64) -> Option<&GroupSummary> {
        self.groups
            .iter()
            .find(|g| g.epsilon == epsilon && g.noise_kind == kind && g.noise_std == std)
    }
}

/// Everything [`run_experiment`] produced, with the paths it wrote.
#[derive(Debug, Clone)]
pub struct ExperimentOutput {
    pub records: Vec<RunRecord>,
    pub summary: Summary,
    pub csv_path: PathBuf,
    pub summary_path: PathBuf,
    pub svg_path: PathBuf,
}

/// Runs the experiment and writes `runs.csv`, `summary.json` and
/// `<experiment>.svg` into `spec.output_dir`.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentOutput> {
    spec.validate()?;
    std::fs::create_dir_all(&spec.output_dir)?;

    let (mut records, runs, chart) = match spec.id {
        ExperimentId::Fig4Convergence => convergence(spec)?,
        _ => tradeoff_experiment(spec)?,
    };
    records::sort_records(&mut records);
    let groups = group_runs(spec.id, &runs);
    let summary = Summary {
        experiment: spec.id,
        spec: spec.clone(),
        runs,
        groups,
    };
    let svg_text = match chart {
        Chart::Line(c) => svg::render_line_chart(&c),
        Chart::FromSummary if spec.id == ExperimentId::Fig8NoiseBars => {
            svg::render_bar_chart(&noise_bar_chart(&summary))
        }
        Chart::FromSummary => svg::render_line_chart(&curve_chart(spec, &summary)),
    };

    let dir = &spec.output_dir;
    let csv_path = dir.join("runs.csv");
    if records.is_empty() {
        std::fs::write(&csv_path, format!("{CSV_HEADER}\n"))?;
    } else {
        write_records_file(&csv_path, &records)?;
    }
    let summary_path = dir.join("summary.json");
    std::fs::write(&summary_path, serde_json::to_string_pretty(&summary)? + "\n")?;
    let svg_path = dir.join(format!("{}.svg", spec.id));
    std::fs::write(&svg_path, svg_text)?;

    Ok(ExperimentOutput {
        records,
        summary,
        csv_path,
        summary_path,
        svg_path,
    })
}

/// Charts of seed medians can only be drawn once runs are grouped.
enum Chart {
    Line(LineChart),
    FromSummary,
}

type Produced = (Vec<RunRecord>, Vec<RunSummary>, Chart);

fn convergence(spec: &ExperimentSpec) -> Result<Produced> {
    let rho = GaussianPairSpec::correlation_for_mi(spec.target_mi_bits)?;
    let noise_std = (1.0 - rho * rho).sqrt();
    let mut records = Vec::new();
    let mut runs = Vec::new();
    let mut series = Vec::new();

    for &seed in &spec.seeds {
        let run_id = format!("{}-seed{seed}", spec.id);
        let config = spec.mine_config(seed);
        let start = Instant::now();
        let mut rows = Vec::with_capacity(config.epochs);
        let trace = estimate_mi_observed(
            |n, rng| gaussian_pair(rho, n, rng),
            &config,
            |epoch, bits| {
                rows.push(RunRecord {
                    run_id: run_id.clone(),
                    experiment: spec.id.to_string(),
                    epoch,
                    mi_xy_bits: bits,
                    mi_sy_bits: bits,
                    epsilon: None,
                    noise_kind: NoiseKind::Gaussian.as_str().into(),
                    noise_std,
                    seed,
                    wall_ms: start.elapsed().as_millis() as u64,
                })
            },
        )?;
        series.push(Series {
            name: format!("seed {seed}"),
            points: rows.iter().map(|r| (r.epoch as f64, r.mi_xy_bits)).collect(),
        });
        records.extend(rows);
        runs.push(RunSummary {
            run_id,
            seed,
            epsilon: None,
            noise_kind: NoiseKind::Gaussian,
            noise_std,
            true_bits: Some(spec.target_mi_bits),
            final_bits: Some(trace.final_bits),
            checkpoint_bits: Some(trace.smoothed_at(CHECKPOINT_EPOCH, spec.smoothing_window)),
            initial_leakage_bits: None,
            iterations: trace.epoch_bits.len(),
            compliant_iterations: 0,
            max_utility_bits: None,
            last_compliant_utility_bits: None,
            budget_exceeded: None,
            cap_reached: None,
            utility_source: None,
        });
    }
    let chart = LineChart {
        title: "MINE estimate on a Gaussian pair".into(),
        x_label: "epoch".into(),
        y_label: "estimated I(S;Y) (bits)".into(),
        series,
        references: vec![("true MI".into(), spec.target_mi_bits)],
    };
    Ok((records, runs, Chart::Line(chart)))
}

/// `n` draws of a standard bivariate normal pair with correlation `rho`.
pub fn gaussian_pair<R: rand::Rng + ?Sized>(rho: f64, n: usize, rng: &mut R) -> Result<SampleBatch> {
    let coupling = (1.0 - rho * rho).sqrt();
    let mut s = Array2::zeros((n, 1));
    let mut y = Array2::zeros((n, 1));
    for i in 0..n {
        let a: f64 = StandardNormal.sample(rng);
        let b: f64 = StandardNormal.sample(rng);
        s[[i, 0]] = a;
        y[[i, 0]] = rho * a + coupling * b;
    }
    SampleBatch::pair(s.view(), y.view())
}

/// The `(epsilon, kind, std)` cells an experiment sweeps, in output order.
fn tradeoff_cells(spec: &ExperimentSpec) -> Vec<(f64, NoiseKind, f64)> {
    let both = [NoiseKind::Gaussian, NoiseKind::Laplacian];
    match spec.id {
        ExperimentId::Fig4Convergence => Vec::new(),
        ExperimentId::Fig5BudgetTraces | ExperimentId::Fig6BudgetCurve => spec
            .epsilons
            .iter()
            .map(|&e| (e, spec.noise_kind, spec.noise_std))
            .collect(),
        ExperimentId::Fig7NoiseTraces => both
            .iter()
            .flat_map(|&k| spec.noise_stds.iter().map(move |&s| (spec.epsilon, k, s)))
            .collect(),
        ExperimentId::Fig8NoiseBars => spec
            .epsilons
            .iter()
            .flat_map(|&e| both.iter().map(move |&k| (e, k, spec.noise_std)))
            .collect(),
        ExperimentId::Fig9GaussParams => spec
            .gauss_stds
            .iter()
            .map(|&s| (spec.epsilon, NoiseKind::Gaussian, s))
            .collect(),
    }
}

fn tradeoff_experiment(spec: &ExperimentSpec) -> Result<Produced> {
    let mut records = Vec::new();
    let mut runs = Vec::new();
    let mut traces = Vec::new();

    for (epsilon, kind, std) in tradeoff_cells(spec) {
        for &seed in &spec.seeds {
            let run_id = format!("{}-eps{epsilon}-{}-std{std}-seed{seed}", spec.id, kind.as_str());
            let config = spec.tradeoff_config(epsilon, kind, std, seed)?;
            let start = Instant::now();
            let mut rows = Vec::new();
            let run = run_tradeoff_observed(&config, |it| {
                rows.push(RunRecord {
                    run_id: run_id.clone(),
                    experiment: spec.id.to_string(),
                    epoch: it.iteration,
                    mi_xy_bits: it.mi_xy_bits,
                    mi_sy_bits: it.mi_sy_bits,
                    epsilon: Some(epsilon),
                    noise_kind: kind.as_str().into(),
                    noise_std: std,
                    seed,
                    wall_ms: start.elapsed().as_millis() as u64,
                })
            })?;
            traces.push(Series {
                name: trace_label(spec.id, epsilon, kind, std, seed),
                points: rows.iter().map(|r| (r.epoch as f64, r.mi_xy_bits)).collect(),
            });
            records.extend(rows);
            runs.push(tradeoff_summary(run_id, seed, kind, std, &run));
        }
    }

    let chart = match spec.id {
        ExperimentId::Fig5BudgetTraces | ExperimentId::Fig9GaussParams => Chart::Line(LineChart {
            title: if spec.id == ExperimentId::Fig5BudgetTraces {
                "Utility per outer iteration for each privacy budget".into()
            } else {
                "Utility per outer iteration for each Gaussian noise std".into()
            },
            x_label: "outer iteration".into(),
            y_label: "estimated I(X;Y) (bits)".into(),
            series: traces,
            references: Vec::new(),
        }),
        _ => Chart::FromSummary,
    };
    Ok((records, runs, chart))
}

fn trace_label(id: ExperimentId, epsilon: f64, kind: NoiseKind, std: f64, seed: u64) -> String {
    match id {
        ExperimentId::Fig9GaussParams => format!("std={std} seed {seed}"),
        ExperimentId::Fig7NoiseTraces | ExperimentId::Fig8NoiseBars => {
            format!("{} eps={epsilon} std={std} seed {seed}", kind.as_str())
        }
        _ => format!("eps={epsilon} seed {seed}"),
    }
}

fn tradeoff_summary(run_id: String, seed: u64, kind: NoiseKind, std: f64, run: &TradeoffRun) -> RunSummary {
    RunSummary {
        run_id,
        seed,
        epsilon: Some(run.config.epsilon),
        noise_kind: kind,
        noise_std: std,
        true_bits: None,
        final_bits: None,
        checkpoint_bits: None,
        initial_leakage_bits: Some(run.initial_leakage_bits),
        iterations: run.iterations.len(),
        compliant_iterations: run.compliant_iterations(),
        max_utility_bits: run.max_utility_bits,
        last_compliant_utility_bits: run.last_compliant_utility_bits,
        budget_exceeded: Some(run.budget_exceeded),
        cap_reached: Some(run.cap_reached),
        utility_source: Some(run.utility_source.clone()),
    }
}

fn group_runs(id: ExperimentId, runs: &[RunSummary]) -> Vec<GroupSummary> {
    // Keyed by first appearance so groups follow the sweep order.
    let mut order: Vec<(Option<u64>, NoiseKind, u64)> = Vec::new();
    let mut members: BTreeMap<usize, Vec<&RunSummary>> = BTreeMap::new();
    for run in runs {
        let key = (run.epsilon.map(f64::to_bits), run.noise_kind, run.noise_std.to_bits());
        let index = match order.iter().position(|k| *k == key) {
            Some(i) => i,
            None => {
                order.push(key);
                order.len() - 1
            }
        };
        members.entry(index).or_default().push(run);
    }
    members
        .into_values()
        .map(|group| {
            let (metric, values): (&str, Vec<f64>) = if id == ExperimentId::Fig4Convergence {
                ("final_bits", group.iter().map(|r| r.final_bits.unwrap_or(f64::NAN)).collect())
            } else {
                (
                    "max_utility_bits",
                    group.iter().map(|r| r.max_utility_bits.unwrap_or(0.0)).collect(),
                )
            };
            GroupSummary {
                epsilon: group[0].epsilon,
                noise_kind: group[0].noise_kind,
                noise_std: group[0].noise_std,
                metric: metric.into(),
                seeds: group.iter().map(|r| r.seed).collect(),
                median: median(&values),
                values,
            }
        })
        .collect()
}

fn curve_chart(spec: &ExperimentSpec, summary: &Summary) -> LineChart {
    let y_label = "median max I(X;Y) (bits)".to_string();
    match spec.id {
        ExperimentId::Fig7NoiseTraces => {
            let series = [NoiseKind::Gaussian, NoiseKind::Laplacian]
                .into_iter()
                .map(|kind| Series {
                    name: kind.as_str().into(),
                    points: summary
                        .groups
                        .iter()
                        .filter(|g| g.noise_kind == kind)
                        .map(|g| (g.noise_std, g.median))
                        .collect(),
                })
                .collect();
            LineChart {
                title: format!("Max utility against noise level (eps = {})", spec.epsilon),
                x_label: "noise std".into(),
                y_label,
                series,
                references: Vec::new(),
            }
        }
        _ => LineChart {
            title: "Max utility against privacy budget".into(),
            x_label: "privacy budget eps (bits)".into(),
            y_label,
            series: vec![Series {
                name: format!("{} std={}", spec.noise_kind.as_str(), spec.noise_std),
                points: summary
                    .groups
                    .iter()
                    .map(|g| (g.epsilon.unwrap_or(0.0), g.median))
                    .collect(),
            }],
            references: Vec::new(),
        },
    }
}

/// Grouped bar chart of a noise-comparison summary: one group per budget,
/// one bar per noise kind.
pub fn noise_bar_chart(summary: &Summary) -> BarChart {
    let mut groups: Vec<BarGroup> = Vec::new();
    for g in &summary.groups {
        let label = g.epsilon.map(|e| format!("eps={e}")).unwrap_or_default();
        let bar = (g.noise_kind.as_str().to_string(), g.median);
        match groups.iter_mut().find(|b| b.label == label) {
            Some(group) => group.bars.push(bar),
            None => groups.push(BarGroup {
                label,
                bars: vec![bar],
            }),
        }
    }
    BarChart {
        title: "Max utility per privacy budget and noise kind".into(),
        x_label: "privacy budget".into(),
        y_label: "median max I(X;Y) (bits)".into(),
        groups,
    }
}

/// Reads a `summary.json` written by [`run_experiment`].
pub fn read_summary(path: &Path) -> Result<Summary> {
    Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
}
