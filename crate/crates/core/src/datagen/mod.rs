//! Training and test data: noisy sinusoid mixtures split into the observed
//! prefix `x_a` (first `M` samples) and the continuation `x_m`.
//!
//! Grid recipes enumerate every frequency combination; randomized recipes
//! draw `set_size` pairs. Each signal is replicated with
//! `noise_instances` independent noise draws. All randomness is derived from
//! the recipe seed and the signal/instance index, so serial and parallel
//! generation agree.

mod io;

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::Rng as _;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;
use crate::signal::{add_noise, split, synthesize, NoiseSpec, SinusoidSpec};

pub use io::{read_dataset, write_dataset, Manifest, DATASET_FORMAT_VERSION};

/// The coarse grid used by the grid recipes.
pub const COARSE_GRID: [f64; 5] = [0.1, 0.2, 0.3, 0.4, 0.5];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RecipeId {
    /// `f1` on the coarse grid, `f2` on `{k / N}`.
    GridL2,
    /// Four frequencies, each on the coarse grid.
    GridL4,
    /// `f2 = f1 + 0.5 / N`.
    Set1,
    /// `f2 = f1 + 1/N + eps`, with `|f2 - f1| >= 1/N`.
    Set2,
    /// Both frequencies on `{k / N}`, every combination.
    Set3,
    /// `f2 = f1 + k / N` for a random integer `k`.
    Set4,
    /// Both uniform on `(0, 0.5]`.
    Set5,
    /// `f1` Gaussian(0.25, 0.25) restricted to `(0, 0.5]`, `f2` uniform.
    Set6,
}

impl RecipeId {
    pub const ALL: [RecipeId; 8] = [
        RecipeId::GridL2,
        RecipeId::GridL4,
        RecipeId::Set1,
        RecipeId::Set2,
        RecipeId::Set3,
        RecipeId::Set4,
        RecipeId::Set5,
        RecipeId::Set6,
    ];

    pub fn name(self) -> &'static str {
        match self {
            RecipeId::GridL2 => "grid-l2",
            RecipeId::GridL4 => "grid-l4",
            RecipeId::Set1 => "set1",
            RecipeId::Set2 => "set2",
            RecipeId::Set3 => "set3",
            RecipeId::Set4 => "set4",
            RecipeId::Set5 => "set5",
            RecipeId::Set6 => "set6",
        }
    }

    pub(crate) fn code(self) -> u8 {
        Self::ALL.iter().position(|r| *r == self).unwrap() as u8
    }

    pub(crate) fn from_code(code: u8) -> Option<Self> {
        Self::ALL.get(code as usize).copied()
    }

    /// Number of sinusoids per signal.
    pub fn components(self) -> usize {
        match self {
            RecipeId::GridL4 => 4,
            _ => 2,
        }
    }

    fn is_randomized(self) -> bool {
        !matches!(self, RecipeId::GridL2 | RecipeId::GridL4 | RecipeId::Set3)
    }
}

impl std::str::FromStr for RecipeId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.to_ascii_lowercase().replace(['_', '-'], "");
        RecipeId::ALL
            .into_iter()
            .find(|r| r.name().replace('-', "") == key)
            .ok_or_else(|| Error::param(format!("unknown recipe '{s}'")))
    }
}

impl std::fmt::Display for RecipeId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetRecipe {
    pub id: RecipeId,
    pub n: usize,
    pub m: usize,
    pub snr_db: f64,
    pub noise_instances: usize,
    /// Signals drawn by the randomized recipes (ignored by the grids).
    pub set_size: usize,
    /// Half-width of a uniform amplitude perturbation around 1 (0 = unit amplitudes).
    #[serde(default)]
    pub amplitude_jitter: f64,
    pub seed: u64,
}

impl DatasetRecipe {
    /// Defaults: SNR 15 dB, 50 noise draws per grid signal, 3 per randomized
    /// signal, 20000 randomized signals.
    pub fn new(id: RecipeId, n: usize, m: usize, seed: u64) -> Self {
        let noise_instances = if id.is_randomized() || id == RecipeId::Set3 { 3 } else { 50 };
        Self { id, n, m, snr_db: 15.0, noise_instances, set_size: 20_000, amplitude_jitter: 0.0, seed }
    }

    /// Grid spacing `1 / N`.
    pub fn delta_f(&self) -> f64 {
        1.0 / self.n as f64
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.n > self.m && self.m >= 1) {
            return Err(Error::param(format!("need N > M >= 1, got N = {}, M = {}", self.n, self.m)));
        }
        if self.n < 3 {
            return Err(Error::param("N must be at least 3 so that 1/N < 0.5"));
        }
        if !self.snr_db.is_finite() {
            return Err(Error::param("SNR must be finite"));
        }
        if self.noise_instances == 0 {
            return Err(Error::param("at least one noise instance per signal is required"));
        }
        if self.id.is_randomized() && self.set_size == 0 {
            return Err(Error::param("set size must be positive"));
        }
        if !(0.0..1.0).contains(&self.amplitude_jitter) {
            return Err(Error::param("amplitude jitter must lie in [0, 1)"));
        }
        Ok(())
    }

    /// Number of distinct noiseless signals the recipe produces.
    pub fn signal_count(&self) -> usize {
        let fine = self.n / 2;
        match self.id {
            RecipeId::GridL2 => COARSE_GRID.len() * fine,
            RecipeId::GridL4 => COARSE_GRID.len().pow(4),
            RecipeId::Set3 => fine * fine,
            _ => self.set_size,
        }
    }

    /// Frequencies of signal `index`.
    fn frequencies(&self, index: usize) -> Vec<f64> {
        let df = self.delta_f();
        let fine = self.n / 2;
        let mut r = rng::stream(self.seed, &[rng::tag("freq"), index as u64]);
        // Uniform on (0, hi].
        let open_uniform = |r: &mut rng::Rng, hi: f64| hi - r.random_range(0.0..hi);
        match self.id {
            RecipeId::GridL2 => vec![COARSE_GRID[index / fine], ((index % fine) + 1) as f64 * df],
            RecipeId::GridL4 => (0..4)
                .map(|d| COARSE_GRID[(index / 5usize.pow(3 - d)) % 5])
                .collect(),
            RecipeId::Set3 => vec![((index / fine) + 1) as f64 * df, ((index % fine) + 1) as f64 * df],
            RecipeId::Set1 => {
                let f1 = open_uniform(&mut r, 0.5 - df);
                vec![f1, f1 + 0.5 * df]
            }
            RecipeId::Set2 => loop {
                let f1 = open_uniform(&mut r, 0.5 - df);
                let eps = r.random_range(-(f1 + df)..=(0.5 - f1 - df));
                let f2 = f1 + df + eps;
                if f2 > 0.0 && f2 <= 0.5 && (f2 - f1).abs() >= df {
                    break vec![f1, f2];
                }
            },
            RecipeId::Set4 => loop {
                let f1 = open_uniform(&mut r, 0.5 - df);
                let lo = (-f1 / df).ceil() as i64;
                let hi = ((0.5 - f1) / df).floor() as i64;
                let k = r.random_range(lo..=hi);
                let f2 = f1 + k as f64 * df;
                if f2 > 0.0 && f2 <= 0.5 {
                    break vec![f1, f2];
                }
            },
            RecipeId::Set5 => vec![open_uniform(&mut r, 0.5), open_uniform(&mut r, 0.5)],
            RecipeId::Set6 => {
                let gauss = Normal::new(0.25, 0.25).expect("valid normal");
                let f1 = loop {
                    let f: f64 = gauss.sample(&mut r);
                    if f > 0.0 && f <= 0.5 {
                        break f;
                    }
                };
                vec![f1, open_uniform(&mut r, 0.5)]
            }
        }
    }

    fn amplitudes(&self, index: usize, count: usize) -> Vec<f64> {
        if self.amplitude_jitter == 0.0 {
            return vec![1.0; count];
        }
        let j = self.amplitude_jitter;
        let mut r = rng::stream(self.seed, &[rng::tag("amp"), index as u64]);
        (0..count).map(|_| 1.0 + r.random_range(-j..=j)).collect()
    }

    pub fn noise_seed(&self, signal: usize, instance: usize) -> u64 {
        rng::derive_seed(self.seed, &[rng::tag("noise"), signal as u64, instance as u64])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExampleMeta {
    pub recipe_id: RecipeId,
    pub noise_seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Example {
    pub x_a: Vec<f64>,
    pub x_m: Vec<f64>,
    pub truth: SinusoidSpec,
    pub meta: ExampleMeta,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    /// Recipes that contributed examples, in order of first appearance.
    pub recipes: Vec<DatasetRecipe>,
    pub examples: Vec<Example>,
    n: usize,
    m: usize,
}

impl Dataset {
    pub fn new(recipes: Vec<DatasetRecipe>, examples: Vec<Example>, n: usize, m: usize) -> Result<Self> {
        if !(n > m && m >= 1) {
            return Err(Error::param(format!("need N > M >= 1, got N = {n}, M = {m}")));
        }
        if let Some(e) = examples.iter().find(|e| e.x_a.len() != m || e.x_m.len() != n - m) {
            return Err(Error::Shape(format!(
                "example lengths ({}, {}) do not match M = {m}, N = {n}",
                e.x_a.len(),
                e.x_m.len()
            )));
        }
        Ok(Self { recipes, examples, n, m })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn len(&self) -> usize {
        self.examples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.examples.is_empty()
    }

    /// `(x_a, x_m)` views for training.
    pub fn pairs(&self) -> Vec<(&[f64], &[f64])> {
        self.examples.iter().map(|e| (&e.x_a[..], &e.x_m[..])).collect()
    }

    /// Append another dataset with the same `(N, M)`.
    pub fn merge(mut self, other: Dataset) -> Result<Self> {
        if (self.n, self.m) != (other.n, other.m) {
            return Err(Error::param(format!(
                "cannot merge (N={}, M={}) with (N={}, M={})",
                self.n, self.m, other.n, other.m
            )));
        }
        for r in other.recipes {
            if !self.recipes.contains(&r) {
                self.recipes.push(r);
            }
        }
        self.examples.extend(other.examples);
        Ok(self)
    }

    /// Example counts per recipe id.
    pub fn counts(&self) -> BTreeMap<RecipeId, usize> {
        let mut counts = BTreeMap::new();
        for e in &self.examples {
            *counts.entry(e.meta.recipe_id).or_insert(0) += 1;
        }
        counts
    }
}

/// Generate every example of `recipe`.
pub fn generate(recipe: &DatasetRecipe) -> Result<Dataset> {
    recipe.validate()?;
    let signals = recipe.signal_count();
    let per_signal: Vec<Result<Vec<Example>>> = (0..signals)
        .into_par_iter()
        .map(|s| {
            let freqs = recipe.frequencies(s);
            let truth = SinusoidSpec::new(recipe.amplitudes(s, freqs.len()), freqs)?;
            let clean = synthesize(&truth, recipe.n)?;
            (0..recipe.noise_instances)
                .map(|i| {
                    let noise_seed = recipe.noise_seed(s, i);
                    let (noisy, _) = add_noise(&clean, &NoiseSpec::snr_db(recipe.snr_db, noise_seed))?;
                    let (x_a, x_m) = split(&noisy, recipe.m)?;
                    Ok(Example {
                        x_a: x_a.into_samples(),
                        x_m: x_m.into_samples(),
                        truth: truth.clone(),
                        meta: ExampleMeta { recipe_id: recipe.id, noise_seed },
                    })
                })
                .collect()
        })
        .collect();
    let mut examples = Vec::with_capacity(signals * recipe.noise_instances);
    for chunk in per_signal {
        examples.extend(chunk?);
    }
    Dataset::new(vec![recipe.clone()], examples, recipe.n, recipe.m)
}

/// Shuffle-and-cut split into `(train, test)`, stratified by recipe.
///
/// Each recipe's examples are shuffled independently and the first
/// `round(ratio * count)` go to training. Both parts keep the original
/// example order.
pub fn train_test_split(ds: &Dataset, ratio: f64, seed: u64) -> Result<(Dataset, Dataset)> {
    if ds.is_empty() {
        return Err(Error::param("cannot split an empty dataset"));
    }
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(Error::param(format!("split ratio {ratio} outside (0, 1)")));
    }
    let mut groups: BTreeMap<RecipeId, Vec<usize>> = BTreeMap::new();
    for (i, e) in ds.examples.iter().enumerate() {
        groups.entry(e.meta.recipe_id).or_default().push(i);
    }
    let mut in_train = vec![false; ds.len()];
    for (id, mut idx) in groups {
        idx.shuffle(&mut rng::stream(seed, &[rng::tag("split"), id.code() as u64]));
        let cut = (ratio * idx.len() as f64).round() as usize;
        for &i in &idx[..cut] {
            in_train[i] = true;
        }
    }
    let (train, test): (Vec<_>, Vec<_>) = ds
        .examples
        .iter()
        .cloned()
        .zip(in_train)
        .partition(|(_, t)| *t);
    if train.is_empty() || test.is_empty() {
        return Err(Error::param(format!(
            "ratio {ratio} leaves one side of a {}-example split empty",
            ds.len()
        )));
    }
    let strip = |v: Vec<(Example, bool)>| v.into_iter().map(|(e, _)| e).collect();
    Ok((
        Dataset::new(ds.recipes.clone(), strip(train), ds.n, ds.m)?,
        Dataset::new(ds.recipes.clone(), strip(test), ds.n, ds.m)?,
    ))
}

#[cfg(test)]
mod tests;
