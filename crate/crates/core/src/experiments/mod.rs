//! Monte Carlo benchmarks of the three estimation routes:
//!
//! * M1: estimator on the first `M` noisy samples,
//! * M2: estimator on all `N` noisy samples,
//! * M3: extrapolate samples `M + 1 ..= N` from the first `M`, then run the
//!   estimator on the concatenation.
//!
//! Every trial draws one noisy length-`N` realization; all methods, and all
//! values of the swept variable, see the same frequencies and the same
//! underlying standard-normal noise draw (scaled to the target SNR), so
//! comparisons are paired. Estimator failures are counted per cell and left
//! out of the mean.

mod config;
mod emit;

use std::collections::BTreeMap;
use std::sync::Arc;

use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hrse::Estimator;
use crate::linear_predictor::{extrapolate, fit_lp};
use crate::metrics::{nmse, nmse_db, FrequencyEstimate};
use crate::neural::{predict_window, PredictorParams};
use crate::rng;
use crate::signal::{add_noise, concat, split, synthesize, NoiseSpec, SampleWindow, SinusoidSpec};

pub use config::{load_config, run_config, BenchConfig, MethodConfig, PredictorConfig, SweepConfig};
pub use emit::{aggregates_csv, emit, plot_svg, trials_csv};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum MethodId {
    #[serde(rename = "m1")]
    M1TrueM,
    #[serde(rename = "m2")]
    M2TrueN,
    #[serde(rename = "m3")]
    M3PredictThenEstimate,
}

impl MethodId {
    pub fn short(self) -> &'static str {
        match self {
            MethodId::M1TrueM => "M1",
            MethodId::M2TrueN => "M2",
            MethodId::M3PredictThenEstimate => "M3",
        }
    }
}

/// Source of the `N - M` extrapolated samples for M3.
#[derive(Debug, Clone)]
pub enum Extrapolator {
    Neural(Arc<PredictorParams>),
    /// Least-squares linear prediction fit on the observed prefix, order
    /// `2L` unless given.
    LinearPrediction { order: Option<usize>, stabilize: bool },
}

impl Extrapolator {
    pub fn extrapolate(&self, x_a: &SampleWindow, horizon: usize, l: usize) -> Result<SampleWindow> {
        match self {
            Extrapolator::Neural(params) => {
                let out = params.architecture().output_len();
                if out != horizon {
                    return Err(Error::Config(format!("predictor emits {out} samples, scenario needs {horizon}")));
                }
                predict_window(params, x_a)
            }
            Extrapolator::LinearPrediction { order, stabilize } => {
                let mut model = fit_lp(x_a, order.unwrap_or(2 * l))?.model;
                if *stabilize {
                    model = model.stabilized()?;
                }
                extrapolate(&model, x_a, horizon)
            }
        }
    }

    fn tag(&self) -> &'static str {
        match self {
            Extrapolator::Neural(_) => "nn",
            Extrapolator::LinearPrediction { .. } => "lp",
        }
    }
}

#[derive(Debug, Clone)]
pub struct MethodSpec {
    pub id: MethodId,
    pub estimator: Estimator,
    /// Required for M3, ignored otherwise.
    pub predictor: Option<Extrapolator>,
    label: Option<String>,
}

impl MethodSpec {
    pub fn m1(estimator: Estimator) -> Self {
        Self { id: MethodId::M1TrueM, estimator, predictor: None, label: None }
    }

    pub fn m2(estimator: Estimator) -> Self {
        Self { id: MethodId::M2TrueN, estimator, predictor: None, label: None }
    }

    pub fn m3(estimator: Estimator, predictor: Extrapolator) -> Self {
        Self { id: MethodId::M3PredictThenEstimate, estimator, predictor: Some(predictor), label: None }
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    /// Label used in result tables, e.g. `M1-esprit` or `M3-nn-esprit`.
    pub fn label(&self) -> String {
        if let Some(l) = &self.label {
            return l.clone();
        }
        match &self.predictor {
            Some(p) if self.id == MethodId::M3PredictThenEstimate => {
                format!("{}-{}-{}", self.id.short(), p.tag(), self.estimator.tag())
            }
            _ => format!("{}-{}", self.id.short(), self.estimator.tag()),
        }
    }

    /// Check the method can run on an `(N, M)` scenario with `l` components.
    pub fn validate(&self, scenario: Scenario, l: usize) -> Result<()> {
        scenario.validate()?;
        if self.id != MethodId::M3PredictThenEstimate {
            return Ok(());
        }
        match &self.predictor {
            None => Err(Error::Config(format!("{} needs a predictor", self.label()))),
            Some(Extrapolator::Neural(p)) => {
                let a = p.architecture();
                if a.input_len() != scenario.m || a.input_len() + a.output_len() != scenario.n {
                    return Err(Error::Config(format!(
                        "predictor maps {} -> {} samples, scenario has M = {}, N = {}",
                        a.input_len(),
                        a.output_len(),
                        scenario.m,
                        scenario.n
                    )));
                }
                match p.components {
                    Some(c) if c != l => Err(Error::Config(format!(
                        "predictor was trained on {c}-component signals, scenario has {l}"
                    ))),
                    _ => Ok(()),
                }
            }
            Some(Extrapolator::LinearPrediction { .. }) => Ok(()),
        }
    }
}

/// Total length `N` and observed prefix `M`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Scenario {
    pub n: usize,
    pub m: usize,
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        if !(self.n > self.m && self.m >= 1) {
            return Err(Error::param(format!("need N > M >= 1, got N = {}, M = {}", self.n, self.m)));
        }
        Ok(())
    }
}

/// Estimate from an already-noisy length-`N` realization.
pub fn run_on_realization(method: &MethodSpec, noisy: &SampleWindow, m: usize, l: usize) -> Result<FrequencyEstimate> {
    let est = match method.id {
        MethodId::M2TrueN => method.estimator.estimate(noisy, l)?,
        MethodId::M1TrueM => method.estimator.estimate(&split(noisy, m)?.0, l)?,
        MethodId::M3PredictThenEstimate => {
            let predictor = method
                .predictor
                .as_ref()
                .ok_or_else(|| Error::Config("M3 needs a predictor".into()))?;
            let (x_a, _) = split(noisy, m)?;
            let predicted = predictor.extrapolate(&x_a, noisy.len() - m, l)?;
            method.estimator.estimate(&concat(&x_a, &predicted)?, l)?
        }
    };
    Ok(FrequencyEstimate { method_tag: method.label(), ..est })
}

/// Synthesize `truth` over `n` samples, add noise at `snr_db` with `seed`,
/// and estimate with `method`.
pub fn run_method(
    method: &MethodSpec,
    truth: &SinusoidSpec,
    n: usize,
    m: usize,
    snr_db: f64,
    seed: u64,
) -> Result<FrequencyEstimate> {
    let scenario = Scenario { n, m };
    method.validate(scenario, truth.count())?;
    let clean = synthesize(truth, n)?;
    let (noisy, _) = add_noise(&clean, &NoiseSpec::snr_db(snr_db, seed))?;
    run_on_realization(method, &noisy, m, truth.count())
}

/// Test-signal frequency generators.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum FrequencySampler {
    /// `l` frequencies uniform on `[min_sep, 0.5 - min_sep]` with pairwise
    /// separation at least `min_sep` (rejection sampling).
    Uniform { l: usize, min_sep: f64 },
    /// `l` distinct points of `{k / n : k = 1 .. ceil(n/2) - 1}`.
    FineGrid { l: usize, n: usize },
    /// `l` distinct points of `{0.1, 0.2, 0.3, 0.4}`.
    CoarseGrid { l: usize },
}

impl FrequencySampler {
    pub fn components(&self) -> usize {
        match *self {
            FrequencySampler::Uniform { l, .. }
            | FrequencySampler::FineGrid { l, .. }
            | FrequencySampler::CoarseGrid { l } => l,
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match *self {
            FrequencySampler::Uniform { l, min_sep } => l >= 1 && min_sep >= 0.0 && (l as f64 + 1.0) * min_sep < 0.45,
            FrequencySampler::FineGrid { l, n } => l >= 1 && l < n.div_ceil(2),
            FrequencySampler::CoarseGrid { l } => (1..=4).contains(&l),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::param(format!("unsatisfiable frequency sampler {self:?}")))
        }
    }

    pub fn sample(&self, rng: &mut rng::Rng) -> Vec<f64> {
        let mut f: Vec<f64> = match *self {
            FrequencySampler::Uniform { l, min_sep } => loop {
                let mut f: Vec<f64> = (0..l).map(|_| rng.random_range(min_sep..=0.5 - min_sep)).collect();
                f.sort_by(f64::total_cmp);
                if f.windows(2).all(|p| p[1] - p[0] >= min_sep) && f[0] > 0.0 && f[l - 1] < 0.5 {
                    break f;
                }
            },
            FrequencySampler::FineGrid { l, n } => {
                let top = n.div_ceil(2) - 1;
                let ks = rand::seq::index::sample(rng, top, l);
                ks.into_iter().map(|k| (k + 1) as f64 / n as f64).collect()
            }
            FrequencySampler::CoarseGrid { l } => {
                let ks = rand::seq::index::sample(rng, 4, l);
                ks.into_iter().map(|k| (k + 1) as f64 / 10.0).collect()
            }
        };
        f.sort_by(f64::total_cmp);
        f
    }
}

/// One method on one trial at one sweep value.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialRow {
    pub method: String,
    pub value: f64,
    pub trial: usize,
    pub snr_db: f64,
    pub delta: Option<f64>,
    /// `Ok(linear NMSE)` or the estimator's failure message.
    pub outcome: std::result::Result<f64, String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AggregateRow {
    pub method: String,
    pub value: f64,
    /// `10 log10` of the mean NMSE over successful trials; NaN if none.
    pub mean_nmse_db: f64,
    pub trials: usize,
    pub failures: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentResult {
    pub name: String,
    /// `snr_db` or `delta`.
    pub sweep_var: String,
    pub trials: Vec<TrialRow>,
    pub aggregates: Vec<AggregateRow>,
}

impl ExperimentResult {
    pub fn aggregate(&self, method: &str, value: f64) -> Option<&AggregateRow> {
        self.aggregates.iter().find(|a| a.method == method && a.value == value)
    }
}

/// Group trial rows by (method, value), preserving first-appearance order.
pub fn aggregate(trials: &[TrialRow]) -> Vec<AggregateRow> {
    let mut order: Vec<(String, u64)> = Vec::new();
    let mut cells: BTreeMap<(String, u64), (Vec<f64>, usize, usize)> = BTreeMap::new();
    for t in trials {
        let key = (t.method.clone(), t.value.to_bits());
        let cell = cells.entry(key.clone()).or_insert_with(|| {
            order.push(key);
            (Vec::new(), 0, 0)
        });
        cell.1 += 1;
        match t.outcome {
            Ok(v) => cell.0.push(v),
            Err(_) => cell.2 += 1,
        }
    }
    order
        .into_iter()
        .map(|key| {
            let (values, count, failures) = &cells[&key];
            AggregateRow {
                method: key.0.clone(),
                value: f64::from_bits(key.1),
                mean_nmse_db: if values.is_empty() { f64::NAN } else { nmse_db(values).unwrap_or(f64::NAN) },
                trials: *count,
                failures: *failures,
            }
        })
        .collect()
}

/// What varies across the sweep for a given trial.
#[derive(Clone, Copy)]
enum Axis {
    Snr,
    Delta { snr_db: f64 },
}

struct SweepPlan<'a> {
    name: String,
    methods: &'a [MethodSpec],
    scenario: Scenario,
    values: &'a [f64],
    trials: usize,
    seed: u64,
    axis: Axis,
}

impl SweepPlan<'_> {
    fn run(&self, draw: impl Fn(usize, f64) -> Result<SinusoidSpec> + Sync) -> Result<ExperimentResult> {
        if self.methods.is_empty() || self.values.is_empty() {
            return Err(Error::param("a sweep needs at least one method and one value"));
        }
        if self.trials == 0 {
            return Err(Error::param("a sweep needs at least one trial"));
        }
        self.scenario.validate()?;
        let probe = draw(0, self.values[0])?;
        for m in self.methods {
            m.validate(self.scenario, probe.count())?;
        }
        let labels: Vec<String> = self.methods.iter().map(MethodSpec::label).collect();
        let mut uniq = labels.clone();
        uniq.sort();
        uniq.dedup();
        if uniq.len() != labels.len() {
            return Err(Error::Config(format!("duplicate method labels in {labels:?}")));
        }

        let (n, m) = (self.scenario.n, self.scenario.m);
        let cells: Vec<(usize, usize)> = (0..self.values.len())
            .flat_map(|v| (0..self.trials).map(move |t| (v, t)))
            .collect();
        let rows: Vec<Result<Vec<TrialRow>>> = cells
            .par_iter()
            .map(|&(vi, trial)| {
                let value = self.values[vi];
                let truth = draw(trial, value)?;
                let (snr_db, delta) = match self.axis {
                    Axis::Snr => (value, None),
                    Axis::Delta { snr_db } => (snr_db, Some(value)),
                };
                let clean = synthesize(&truth, n)?;
                let noise_seed = rng::derive_seed(self.seed, &[rng::tag("noise"), trial as u64]);
                let (noisy, _) = add_noise(&clean, &NoiseSpec::snr_db(snr_db, noise_seed))?;
                Ok(self
                    .methods
                    .iter()
                    .zip(&labels)
                    .map(|(method, label)| TrialRow {
                        method: label.clone(),
                        value,
                        trial,
                        snr_db,
                        delta,
                        outcome: run_on_realization(method, &noisy, m, truth.count())
                            .and_then(|e| nmse(truth.frequencies(), &e.frequencies))
                            .map_err(|e| e.to_string()),
                    })
                    .collect())
            })
            .collect();

        // Rows ordered by value, then method, then trial.
        let mut flat: Vec<TrialRow> = Vec::with_capacity(cells.len() * self.methods.len());
        let mut per_value: Vec<Vec<Vec<TrialRow>>> = vec![Vec::new(); self.values.len()];
        for (r, &(vi, _)) in rows.into_iter().zip(&cells) {
            per_value[vi].push(r?);
        }
        for block in per_value {
            for mi in 0..self.methods.len() {
                flat.extend(block.iter().map(|trial_rows| trial_rows[mi].clone()));
            }
        }
        let aggregates = aggregate(&flat);
        Ok(ExperimentResult {
            name: self.name.clone(),
            sweep_var: match self.axis {
                Axis::Snr => "snr_db".into(),
                Axis::Delta { .. } => "delta".into(),
            },
            trials: flat,
            aggregates,
        })
    }
}

/// NMSE versus SNR. Each trial's frequencies come from `sampler` and are
/// shared by every SNR value and method.
pub fn snr_sweep(
    methods: &[MethodSpec],
    scenario: Scenario,
    snr_list: &[f64],
    trials: usize,
    sampler: FrequencySampler,
    seed: u64,
) -> Result<ExperimentResult> {
    sampler.validate()?;
    if let Some(s) = snr_list.iter().find(|s| s.is_nan()) {
        return Err(Error::param(format!("invalid SNR {s}")));
    }
    SweepPlan { name: "snr_sweep".into(), methods, scenario, values: snr_list, trials, seed, axis: Axis::Snr }
        .run(|trial, _| {
            SinusoidSpec::unit(sampler.sample(&mut rng::stream(seed, &[rng::tag("freq"), trial as u64])))
        })
}

/// NMSE versus separation `delta` for two unit sinusoids `f1`, `f1 + delta`,
/// with `f1` uniform on `[1/N, 0.5 - delta - 1/N]` so neither tone sits
/// within `2/N` of its own mirror image.
pub fn resolution_sweep(
    methods: &[MethodSpec],
    scenario: Scenario,
    delta_list: &[f64],
    snr_db: f64,
    trials: usize,
    seed: u64,
) -> Result<ExperimentResult> {
    let guard = 1.0 / scenario.n.max(1) as f64;
    if let Some(d) = delta_list.iter().find(|d| !(**d > 0.0 && **d < 0.5 - 2.0 * guard)) {
        return Err(Error::param(format!("separation {d} outside (0, 0.5 - 2/N)")));
    }
    SweepPlan {
        name: "resolution_sweep".into(),
        methods,
        scenario,
        values: delta_list,
        trials,
        seed,
        axis: Axis::Delta { snr_db },
    }
    .run(|trial, delta| {
        let u: f64 = rng::stream(seed, &[rng::tag("freq"), trial as u64]).random_range(0.0..1.0);
        let f1 = guard + (0.5 - delta - 2.0 * guard) * u;
        SinusoidSpec::unit(vec![f1, f1 + delta])
    })
}

/// Four-sinusoid comparison, on the 0.1 grid or off it (uniform with
/// pairwise separation at least `1 / N`).
pub fn grid_experiment_l4(
    methods: &[MethodSpec],
    scenario: Scenario,
    snr_list: &[f64],
    on_grid: bool,
    trials: usize,
    seed: u64,
) -> Result<ExperimentResult> {
    let sampler = if on_grid {
        FrequencySampler::CoarseGrid { l: 4 }
    } else {
        FrequencySampler::Uniform { l: 4, min_sep: 1.0 / scenario.n as f64 }
    };
    let mut r = snr_sweep(methods, scenario, snr_list, trials, sampler, seed)?;
    r.name = if on_grid { "l4_on_grid" } else { "l4_off_grid" }.into();
    Ok(r)
}

#[cfg(test)]
mod tests;
