//! Genetic-algorithm feature selection.
//!
//! Individuals are bit masks over the feature columns. Fitness is the
//! cross-validated (or out-of-bag) accuracy of a random forest trained on the
//! selected columns. Every random draw comes from a seeded substream, and
//! fitness values are memoized per mask, so a run is reproducible and does
//! not depend on the thread count.

use std::collections::HashMap;
use std::io::Write;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::eval::{stratified_folds, Folds};
use crate::forest::{self, ForestConfig};
use crate::rng::{derive_seed, hash_bits, substream};

/// Selected feature columns.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FeatureMask(Vec<bool>);

impl FeatureMask {
    pub fn new(bits: Vec<bool>) -> Self {
        FeatureMask(bits)
    }

    pub fn all(n: usize) -> Self {
        FeatureMask(vec![true; n])
    }

    /// Parses a string of `0` and `1` characters.
    pub fn parse(text: &str) -> Result<Self> {
        text.chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::Config(format!("bad mask character `{other}`"))),
            })
            .collect::<Result<Vec<_>>>()
            .map(FeatureMask)
    }

    pub fn bits(&self) -> &[bool] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn count_selected(&self) -> usize {
        self.0.iter().filter(|&&b| b).count()
    }

    pub fn selected_indices(&self) -> Vec<usize> {
        (0..self.0.len()).filter(|&j| self.0[j]).collect()
    }

    pub fn selected_names(&self, names: &[String]) -> Vec<String> {
        self.selected_indices()
            .into_iter()
            .map(|j| names[j].clone())
            .collect()
    }

    /// Sets one uniformly chosen bit if none is set.
    pub fn repair<R: Rng>(&mut self, rng: &mut R) {
        if !self.0.is_empty() && self.count_selected() == 0 {
            let j = rng.random_range(0..self.0.len());
            self.0[j] = true;
        }
    }
}

impl std::fmt::Display for FeatureMask {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for &b in &self.0 {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Selection {
    Tournament,
    /// Fitness-proportional selection.
    Roulette,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GaConfig {
    pub population_size: usize,
    pub generations: usize,
    pub crossover_rate: f64,
    /// Independent flip probability per bit.
    pub mutation_rate: f64,
    pub tournament_size: usize,
    pub elitism_count: usize,
    pub init_bit_probability: f64,
    pub selection: Selection,
    pub seed: u64,
}

impl Default for GaConfig {
    fn default() -> Self {
        GaConfig {
            population_size: 100,
            generations: 50,
            crossover_rate: 0.8,
            mutation_rate: 0.1,
            tournament_size: 3,
            elitism_count: 2,
            init_bit_probability: 0.5,
            selection: Selection::Tournament,
            seed: 0,
        }
    }
}

impl GaConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.population_size < 2 {
            return bad(format!(
                "population_size must be >= 2, got {}",
                self.population_size
            ));
        }
        if self.elitism_count >= self.population_size {
            return bad(format!(
                "elitism_count {} must be below population_size {}",
                self.elitism_count, self.population_size
            ));
        }
        if self.tournament_size < 1 || self.tournament_size > self.population_size {
            return bad(format!(
                "tournament_size {} outside 1..={}",
                self.tournament_size, self.population_size
            ));
        }
        if !(0.0..=1.0).contains(&self.crossover_rate) {
            return bad(format!(
                "crossover_rate {} outside [0, 1]",
                self.crossover_rate
            ));
        }
        if !(0.0..=1.0).contains(&self.mutation_rate) {
            return bad(format!(
                "mutation_rate {} outside [0, 1]",
                self.mutation_rate
            ));
        }
        if !(self.init_bit_probability > 0.0 && self.init_bit_probability <= 1.0) {
            return bad(format!(
                "init_bit_probability {} outside (0, 1]",
                self.init_bit_probability
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FitnessMode {
    /// Mean accuracy over stratified folds fixed for the whole run.
    CvAccuracy { folds: usize },
    /// One minus the out-of-bag error of a single forest.
    OobAccuracy,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FitnessSpec {
    pub mode: FitnessMode,
    /// Forest used inside the fitness function. Its seed is replaced by one
    /// derived from `fitness_seed` and the mask.
    pub rf_config: ForestConfig,
    pub fitness_seed: u64,
}

impl Default for FitnessSpec {
    fn default() -> Self {
        FitnessSpec {
            mode: FitnessMode::CvAccuracy { folds: 3 },
            rf_config: ForestConfig {
                n_trees: 50,
                ..ForestConfig::default()
            },
            fitness_seed: 0,
        }
    }
}

/// Scores masks against one dataset. Folds are drawn once at construction.
pub struct FitnessEvaluator<'a> {
    ds: &'a Dataset,
    spec: FitnessSpec,
    folds: Option<Folds>,
}

const FOLD_TAG: u64 = 0x666f_6c64;

impl<'a> FitnessEvaluator<'a> {
    pub fn new(ds: &'a Dataset, spec: &FitnessSpec) -> Result<Self> {
        spec.rf_config.validate()?;
        if ds.has_missing() {
            return Err(Error::Data("fitness data contains missing values".into()));
        }
        let counts = ds.class_counts();
        let present: Vec<usize> = counts.iter().copied().filter(|&c| c > 0).collect();
        if present.len() < 2 {
            return Err(Error::Data("fitness needs at least two classes".into()));
        }
        let smallest = *present.iter().min().unwrap();
        if smallest < 2 {
            return Err(Error::Data(
                "fitness needs at least two rows of every class".into(),
            ));
        }
        let folds = match spec.mode {
            FitnessMode::CvAccuracy { folds } => {
                if folds < 2 || folds > smallest {
                    return Err(Error::Config(format!(
                        "fitness folds must lie in 2..={smallest} (smallest class size), got {folds}"
                    )));
                }
                Some(stratified_folds(
                    ds,
                    folds,
                    derive_seed(spec.fitness_seed, FOLD_TAG),
                )?)
            }
            FitnessMode::OobAccuracy => {
                if !spec.rf_config.bootstrap {
                    return Err(Error::Config(
                        "out-of-bag fitness needs bootstrap sampling".into(),
                    ));
                }
                None
            }
        };
        Ok(FitnessEvaluator {
            ds,
            spec: spec.clone(),
            folds,
        })
    }

    pub fn folds(&self) -> Option<&Folds> {
        self.folds.as_ref()
    }

    pub fn evaluate(&self, mask: &FeatureMask) -> Result<f64> {
        if mask.len() != self.ds.n_features() {
            return Err(Error::Config(format!(
                "mask has {} bits for {} features",
                mask.len(),
                self.ds.n_features()
            )));
        }
        if mask.count_selected() == 0 {
            return Err(Error::Config("mask selects no features".into()));
        }
        let data = self.ds.select_columns(&mask.selected_indices());
        let rf_seed = hash_bits(self.spec.fitness_seed, mask.bits());
        match &self.folds {
            None => {
                let cfg = ForestConfig {
                    seed: rf_seed,
                    ..self.spec.rf_config.clone()
                };
                let rf = forest::fit(&data, &cfg)?;
                let oob = forest::oob_error(&rf, &data)?;
                Ok(1.0 - oob.error)
            }
            Some(folds) => {
                let mut total = 0.0;
                for (f, test) in folds.test_sets.iter().enumerate() {
                    let train = data.select_rows(&folds.train_indices(f));
                    let cfg = ForestConfig {
                        seed: derive_seed(rf_seed, f as u64),
                        ..self.spec.rf_config.clone()
                    };
                    let rf = forest::fit(&train, &cfg)?;
                    let correct = test
                        .iter()
                        .filter(|&&i| rf.predict(data.row(i)).ok() == Some(data.labels()[i]))
                        .count();
                    total += correct as f64 / test.len() as f64;
                }
                Ok(total / folds.k() as f64)
            }
        }
    }
}

/// Fitness of one mask. Builds the folds from `spec.fitness_seed`, so
/// repeated calls with the same arguments agree.
pub fn evaluate_fitness(mask: &FeatureMask, ds: &Dataset, spec: &FitnessSpec) -> Result<f64> {
    FitnessEvaluator::new(ds, spec)?.evaluate(mask)
}

/// Random masks with each bit set independently; empty masks are repaired.
pub fn init_population(cfg: &GaConfig, n_features: usize) -> Result<Vec<FeatureMask>> {
    cfg.validate()?;
    if n_features == 0 {
        return Err(Error::Data("no features to select from".into()));
    }
    let mut rng = substream(cfg.seed, 0);
    Ok((0..cfg.population_size)
        .map(|_| {
            let mut m = FeatureMask(
                (0..n_features)
                    .map(|_| rng.random::<f64>() < cfg.init_bit_probability)
                    .collect(),
            );
            m.repair(&mut rng);
            m
        })
        .collect())
}

/// Orders `a` before `b` when it is fitter, then when it selects fewer
/// features, then when it comes first in the population.
fn better(pop: &[FeatureMask], fitness: &[f64], a: usize, b: usize) -> bool {
    match fitness[a].total_cmp(&fitness[b]) {
        std::cmp::Ordering::Greater => true,
        std::cmp::Ordering::Less => false,
        std::cmp::Ordering::Equal => {
            let (ca, cb) = (pop[a].count_selected(), pop[b].count_selected());
            ca < cb || (ca == cb && a < b)
        }
    }
}

/// Best of `tournament_size` uniform draws with replacement.
pub fn tournament_select<R: Rng>(
    pop: &[FeatureMask],
    fitness: &[f64],
    tournament_size: usize,
    rng: &mut R,
) -> usize {
    let mut best = rng.random_range(0..pop.len());
    for _ in 1..tournament_size {
        let c = rng.random_range(0..pop.len());
        if better(pop, fitness, c, best) {
            best = c;
        }
    }
    best
}

/// Fitness-proportional draw; uniform when every fitness is zero.
pub fn roulette_select<R: Rng>(fitness: &[f64], rng: &mut R) -> usize {
    let total: f64 = fitness.iter().map(|f| f.max(0.0)).sum();
    if total <= 0.0 {
        return rng.random_range(0..fitness.len());
    }
    let mut target = rng.random::<f64>() * total;
    for (i, f) in fitness.iter().enumerate() {
        target -= f.max(0.0);
        if target < 0.0 {
            return i;
        }
    }
    fitness.len() - 1
}

/// Swaps the tails of `a` and `b` after position `cut`.
pub fn crossover_at(a: &FeatureMask, b: &FeatureMask, cut: usize) -> (FeatureMask, FeatureMask) {
    let mut c1 = a.0[..cut].to_vec();
    c1.extend_from_slice(&b.0[cut..]);
    let mut c2 = b.0[..cut].to_vec();
    c2.extend_from_slice(&a.0[cut..]);
    (FeatureMask(c1), FeatureMask(c2))
}

/// Single-point crossover with probability `rate`, cut uniform in
/// `1..len`. Children that select nothing are repaired.
pub fn crossover<R: Rng>(
    a: &FeatureMask,
    b: &FeatureMask,
    rate: f64,
    rng: &mut R,
) -> Result<(FeatureMask, FeatureMask)> {
    if a.len() != b.len() {
        return Err(Error::Config(format!(
            "cannot cross masks of length {} and {}",
            a.len(),
            b.len()
        )));
    }
    let (mut c1, mut c2) = if a.len() >= 2 && rng.random::<f64>() < rate {
        let cut = rng.random_range(1..a.len());
        crossover_at(a, b, cut)
    } else {
        (a.clone(), b.clone())
    };
    c1.repair(rng);
    c2.repair(rng);
    Ok((c1, c2))
}

/// Flips each bit independently with probability `rate`, then repairs.
pub fn mutate<R: Rng>(mask: &FeatureMask, rate: f64, rng: &mut R) -> FeatureMask {
    let mut out = FeatureMask(
        mask.0
            .iter()
            .map(|&b| if rng.random::<f64>() < rate { !b } else { b })
            .collect(),
    );
    out.repair(rng);
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationStats {
    pub generation: usize,
    pub best_fitness: f64,
    pub mean_fitness: f64,
    pub best_mask: FeatureMask,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaResult {
    /// Best mask seen in any generation.
    pub best_mask: FeatureMask,
    pub best_fitness: f64,
    /// Generation 0 is the initial population.
    pub history: Vec<GenerationStats>,
    /// Distinct masks whose fitness was computed.
    pub evaluations: usize,
}

/// Writes one `generation,best,mean` row per generation.
pub fn write_history_csv<W: Write>(history: &[GenerationStats], writer: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(["generation", "best", "mean"])?;
    for g in history {
        wtr.write_record([
            g.generation.to_string(),
            format!("{}", g.best_fitness),
            format!("{}", g.mean_fitness),
        ])?;
    }
    wtr.flush().map_err(|e| Error::io("<history output>", e))?;
    Ok(())
}

/// Runs the GA against an arbitrary fitness function over `n_features` bits.
///
/// The initial population comes from stream 0 of `cfg.seed` and generation
/// `g` draws from stream `g`. Distinct masks are scored in parallel and
/// cached, so each is evaluated once.
pub fn run_ga_with<F>(n_features: usize, cfg: &GaConfig, fitness: F) -> Result<GaResult>
where
    F: Fn(&FeatureMask) -> Result<f64> + Sync,
{
    run_ga_observed(n_features, cfg, fitness, |_, _, _| {})
}

/// [`run_ga_with`], calling `observe(generation, population, fitness)` once
/// per generation after scoring.
pub fn run_ga_observed<F, O>(
    n_features: usize,
    cfg: &GaConfig,
    fitness: F,
    mut observe: O,
) -> Result<GaResult>
where
    F: Fn(&FeatureMask) -> Result<f64> + Sync,
    O: FnMut(usize, &[FeatureMask], &[f64]),
{
    let mut pop = init_population(cfg, n_features)?;
    let mut cache: HashMap<FeatureMask, f64> = HashMap::new();
    let mut history = Vec::with_capacity(cfg.generations + 1);
    let mut scores = score(&pop, &mut cache, &fitness)?;
    observe(0, &pop, &scores);
    let mut order = ranking(&pop, &scores);
    let (mut best_mask, mut best_fitness) = (pop[order[0]].clone(), scores[order[0]]);
    history.push(stats(0, &pop, &scores, &order));

    for g in 1..=cfg.generations {
        let mut rng = substream(cfg.seed, g as u64);
        let mut next: Vec<FeatureMask> = order[..cfg.elitism_count]
            .iter()
            .map(|&i| pop[i].clone())
            .collect();
        while next.len() < cfg.population_size {
            let pick = |rng: &mut _| match cfg.selection {
                Selection::Tournament => tournament_select(&pop, &scores, cfg.tournament_size, rng),
                Selection::Roulette => roulette_select(&scores, rng),
            };
            let p1 = pick(&mut rng);
            let p2 = pick(&mut rng);
            let (c1, c2) = crossover(&pop[p1], &pop[p2], cfg.crossover_rate, &mut rng)?;
            next.push(mutate(&c1, cfg.mutation_rate, &mut rng));
            if next.len() < cfg.population_size {
                next.push(mutate(&c2, cfg.mutation_rate, &mut rng));
            }
        }
        pop = next;
        scores = score(&pop, &mut cache, &fitness)?;
        observe(g, &pop, &scores);
        order = ranking(&pop, &scores);
        let top = order[0];
        let fewer = pop[top].count_selected() < best_mask.count_selected();
        if scores[top] > best_fitness || (scores[top] == best_fitness && fewer) {
            best_mask = pop[top].clone();
            best_fitness = scores[top];
        }
        history.push(stats(g, &pop, &scores, &order));
    }
    Ok(GaResult {
        best_mask,
        best_fitness,
        history,
        evaluations: cache.len(),
    })
}

/// Runs the GA with forest accuracy on `ds` as fitness.
pub fn run_ga(ds: &Dataset, cfg: &GaConfig, spec: &FitnessSpec) -> Result<GaResult> {
    cfg.validate()?;
    let evaluator = FitnessEvaluator::new(ds, spec)?;
    run_ga_with(ds.n_features(), cfg, |m| evaluator.evaluate(m))
}

fn score<F>(
    pop: &[FeatureMask],
    cache: &mut HashMap<FeatureMask, f64>,
    fitness: &F,
) -> Result<Vec<f64>>
where
    F: Fn(&FeatureMask) -> Result<f64> + Sync,
{
    let mut fresh: Vec<&FeatureMask> = Vec::new();
    for m in pop {
        if !cache.contains_key(m) && !fresh.contains(&m) {
            fresh.push(m);
        }
    }
    let values: Vec<f64> = fresh
        .par_iter()
        .map(|m| fitness(m))
        .collect::<Result<_>>()?;
    for (m, v) in fresh.into_iter().zip(values) {
        cache.insert(m.clone(), v);
    }
    Ok(pop.iter().map(|m| cache[m]).collect())
}

fn ranking(pop: &[FeatureMask], scores: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..pop.len()).collect();
    order.sort_by(|&a, &b| {
        scores[b]
            .total_cmp(&scores[a])
            .then(pop[a].count_selected().cmp(&pop[b].count_selected()))
            .then(a.cmp(&b))
    });
    order
}

fn stats(
    generation: usize,
    pop: &[FeatureMask],
    scores: &[f64],
    order: &[usize],
) -> GenerationStats {
    GenerationStats {
        generation,
        best_fitness: scores[order[0]],
        mean_fitness: scores.iter().sum::<f64>() / scores.len() as f64,
        best_mask: pop[order[0]].clone(),
    }
}
