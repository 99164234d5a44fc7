//! Sequential online defect prediction with defect overlooking.
//!
//! Modules of the test version are visited in a shuffled order. Before each
//! module is tested, a model is rebuilt from the modules tested so far and
//! predicts it. The test result that enters the learning set is the actual
//! label, except that a defective module predicted clean is observed as
//! clean with the configured overlook probability. Metrics are always
//! computed against the actual labels.

use alloc::string::String;
use alloc::vec::Vec;

use crate::dataset::{ModuleRecord, ProjectDataset};
use crate::logistic::{decide, fit_logistic_ridge, FitOptions, LogisticModel, Standardizer};
use crate::metrics::{auc, closest_topleft_cutoff, confusion, f1_score};
use crate::rng::{shuffle, SplitMix64};
use crate::select::{best_first_search, build_correlation_tables, DEFAULT_STALL_LIMIT};
use crate::{Error, Result};

/// Cutoff used when no ROC-based cutoff can be chosen.
pub const FALLBACK_CUTOFF: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LearningMode {
    /// The learning set starts empty.
    #[default]
    ColdStart,
    /// The learning set starts with the prior version's modules and their
    /// actual labels.
    SeededWithPrior,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CutoffSource {
    /// Closest-to-top-left cutoff on the prior version scored by the
    /// current model.
    #[default]
    PriorVersion,
    /// Closest-to-top-left cutoff on the learning set's own scores against
    /// its observed labels.
    Accumulated,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FsCadence {
    #[default]
    PerRebuild,
    /// Select features once, at the first successful rebuild, then reuse.
    OnceAfterWarmup,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScenarioConfig {
    /// Probability in `[0, 1]` that a defect in a negatively predicted
    /// module is overlooked.
    pub overlook_probability: f64,
    pub repetitions: usize,
    pub base_seed: u64,
    pub learning_mode: LearningMode,
    pub cutoff_source: CutoffSource,
    pub fs_cadence: FsCadence,
    /// Predictions are forced defective until the learning set holds this
    /// many records (and both classes).
    pub warmup_min_size: usize,
    pub stall_limit: usize,
    pub fit: FitOptions,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            overlook_probability: 0.0,
            repetitions: 10,
            base_seed: 42,
            learning_mode: LearningMode::default(),
            cutoff_source: CutoffSource::default(),
            fs_cadence: FsCadence::default(),
            warmup_min_size: 5,
            stall_limit: DEFAULT_STALL_LIMIT,
            fit: FitOptions::default(),
        }
    }
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if !(0.0..=1.0).contains(&self.overlook_probability) {
            return bad(alloc::format!("overlook probability {} outside [0, 1]", self.overlook_probability));
        }
        if self.repetitions == 0 {
            return bad("repetitions must be at least 1".into());
        }
        if self.warmup_min_size < 2 {
            return bad(alloc::format!("warmup_min_size {} is below 2", self.warmup_min_size));
        }
        if self.stall_limit == 0 {
            return bad("stall_limit must be at least 1".into());
        }
        if self.fit.lambda.is_nan() || self.fit.lambda <= 0.0 {
            return bad(alloc::format!("ridge lambda {} must be positive", self.fit.lambda));
        }
        Ok(())
    }

    /// Seed of repetition `rep`.
    pub fn rep_seed(&self, rep: usize) -> u64 {
        self.base_seed.wrapping_add(rep as u64)
    }
}

/// The test result fed back to the learner.
///
/// Clean modules test clean and positively predicted modules are tested
/// thoroughly. A defective module predicted clean is observed clean with
/// probability `overlook_probability`; only this branch draws from `rng`.
pub fn observe_test_result(
    actual: bool,
    predicted_defective: bool,
    overlook_probability: f64,
    rng: &mut SplitMix64,
) -> bool {
    if !actual {
        return false;
    }
    if predicted_defective {
        return true;
    }
    rng.next_uniform() >= overlook_probability
}

/// Modules tested so far, with their observed labels.
#[derive(Debug, Clone, Default)]
pub struct LearningSet<'a> {
    rows: Vec<&'a [f64]>,
    labels: Vec<bool>,
}

impl<'a> LearningSet<'a> {
    pub fn new() -> Self {
        Self::default()
    }

    /// Seeds the set with every record of `ds` under its actual label.
    pub fn from_dataset(ds: &'a ProjectDataset) -> Self {
        let mut set = Self::new();
        for r in ds.records() {
            set.push(&r.features, r.actual_defective());
        }
        set
    }

    pub fn push(&mut self, features: &'a [f64], observed: bool) {
        self.rows.push(features);
        self.labels.push(observed);
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn rows(&self) -> &[&'a [f64]] {
        &self.rows
    }

    pub fn labels(&self) -> &[bool] {
        &self.labels
    }

    pub fn has_both_classes(&self) -> bool {
        self.labels.iter().any(|&l| l) && self.labels.iter().any(|&l| !l)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ForcedReason {
    TooFewRecords,
    SingleClass,
    NoUsableFeatures,
}

/// A rebuilt model: selected features, their standardizer, the fitted
/// logistic regression, and the decision cutoff.
#[derive(Debug, Clone, PartialEq)]
pub struct FittedModel {
    pub features: Vec<usize>,
    pub standardizer: Standardizer,
    pub model: LogisticModel,
    pub cutoff: f64,
    /// Set when the cutoff is [`FALLBACK_CUTOFF`] because no ROC cutoff was
    /// available.
    pub cutoff_fallback: bool,
}

impl FittedModel {
    fn project(&self, x: &[f64]) -> Result<Vec<f64>> {
        let z: Vec<f64> = self
            .features
            .iter()
            .map(|&j| x.get(j).copied().ok_or(Error::DimensionMismatch { expected: j + 1, got: x.len() }))
            .collect::<Result<_>>()?;
        self.standardizer.apply(&z)
    }

    /// Predicted defect probability for a full metric vector.
    pub fn score(&self, x: &[f64]) -> Result<f64> {
        self.model.probability(&self.project(x)?)
    }

    pub fn predict(&self, x: &[f64]) -> Result<(f64, bool)> {
        let p = self.score(x)?;
        Ok((p, decide(p, self.cutoff)))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ModelBundle {
    /// No model can be built; the module is predicted defective.
    ForcedDefective(ForcedReason),
    Fitted(FittedModel),
}

/// Rebuilds the prediction model from the current learning set.
///
/// `cached_features`, when given, replaces feature selection.
pub fn rebuild_model(
    learning: &LearningSet<'_>,
    prior: Option<&ProjectDataset>,
    cfg: &ScenarioConfig,
    cached_features: Option<&[usize]>,
) -> Result<ModelBundle> {
    if learning.len() < cfg.warmup_min_size.max(2) {
        return Ok(ModelBundle::ForcedDefective(ForcedReason::TooFewRecords));
    }
    if !learning.has_both_classes() {
        return Ok(ModelBundle::ForcedDefective(ForcedReason::SingleClass));
    }

    let features = match cached_features {
        Some(f) => f.to_vec(),
        None => {
            let tables = build_correlation_tables(learning.rows(), learning.labels())?;
            match best_first_search(&tables, cfg.stall_limit) {
                Ok(subset) => subset.indices,
                Err(Error::NoUsableFeatures) => {
                    return Ok(ModelBundle::ForcedDefective(ForcedReason::NoUsableFeatures))
                }
                Err(e) => return Err(e),
            }
        }
    };

    let selected: Vec<Vec<f64>> = learning.rows().iter().map(|r| features.iter().map(|&j| r[j]).collect()).collect();
    let standardizer = Standardizer::fit(&selected);
    let standardized: Vec<Vec<f64>> = selected.iter().map(|r| standardizer.apply(r)).collect::<Result<_>>()?;
    let model = fit_logistic_ridge(&standardized, learning.labels(), &cfg.fit)?;

    let mut fitted = FittedModel { features, standardizer, model, cutoff: FALLBACK_CUTOFF, cutoff_fallback: true };

    let cutoff = match cfg.cutoff_source {
        CutoffSource::PriorVersion => match prior {
            Some(p) => {
                let scores: Vec<f64> = p.records().iter().map(|r| fitted.score(&r.features)).collect::<Result<_>>()?;
                closest_topleft_cutoff(&scores, &p.labels()).ok()
            }
            None => None,
        },
        CutoffSource::Accumulated => {
            let scores: Vec<f64> = standardized.iter().map(|z| fitted.model.probability(z)).collect::<Result<_>>()?;
            closest_topleft_cutoff(&scores, learning.labels()).ok()
        }
    };
    if let Some(c) = cutoff {
        fitted.cutoff = c.threshold;
        fitted.cutoff_fallback = false;
    }
    Ok(ModelBundle::Fitted(fitted))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prediction {
    pub score: f64,
    pub predicted_defective: bool,
    pub forced: bool,
    pub cutoff_fallback: bool,
    pub converged: bool,
}

impl Prediction {
    /// The cold-start prediction: defective with score 1.
    pub fn forced() -> Self {
        Self { score: 1.0, predicted_defective: true, forced: true, cutoff_fallback: false, converged: true }
    }
}

/// Something that predicts the next module from the learning set so far.
pub trait Predictor {
    fn predict(&mut self, learning: &LearningSet<'_>, features: &[f64]) -> Result<Prediction>;
}

/// Rebuilds a CFS + ridge logistic model before every prediction.
#[derive(Debug, Clone)]
pub struct OnlineLogistic<'p> {
    prior: Option<&'p ProjectDataset>,
    cfg: ScenarioConfig,
    cached_features: Option<Vec<usize>>,
}

impl<'p> OnlineLogistic<'p> {
    pub fn new(prior: Option<&'p ProjectDataset>, cfg: ScenarioConfig) -> Self {
        Self { prior, cfg, cached_features: None }
    }
}

impl Predictor for OnlineLogistic<'_> {
    fn predict(&mut self, learning: &LearningSet<'_>, features: &[f64]) -> Result<Prediction> {
        let cache = match self.cfg.fs_cadence {
            FsCadence::PerRebuild => None,
            FsCadence::OnceAfterWarmup => self.cached_features.as_deref(),
        };
        match rebuild_model(learning, self.prior, &self.cfg, cache)? {
            ModelBundle::ForcedDefective(_) => Ok(Prediction::forced()),
            ModelBundle::Fitted(m) => {
                if self.cfg.fs_cadence == FsCadence::OnceAfterWarmup && self.cached_features.is_none() {
                    self.cached_features = Some(m.features.clone());
                }
                let (score, predicted_defective) = m.predict(features)?;
                Ok(Prediction {
                    score,
                    predicted_defective,
                    forced: false,
                    cutoff_fallback: m.cutoff_fallback,
                    converged: m.model.converged,
                })
            }
        }
    }
}

/// One step of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictionOutcome {
    pub position: usize,
    /// Index of the module in the test dataset.
    pub record_index: usize,
    pub module_id: String,
    pub score: f64,
    pub predicted_defective: bool,
    pub forced: bool,
    /// The test result fed back to the learner, possibly corrupted.
    pub observed_defective: bool,
    pub actual_defective: bool,
    pub cutoff_fallback: bool,
    pub converged: bool,
}

impl PredictionOutcome {
    /// True when the observation consumed a random draw.
    pub fn in_overlook_branch(&self) -> bool {
        self.actual_defective && !self.predicted_defective
    }
}

/// Tests `records` in `order`, predicting each from everything tested
/// before it and appending its observed result to `learning`.
pub fn replay<'a, P: Predictor>(
    records: &'a [ModuleRecord],
    order: &[usize],
    learning: &mut LearningSet<'a>,
    predictor: &mut P,
    overlook_probability: f64,
    rng: &mut SplitMix64,
) -> Result<Vec<PredictionOutcome>> {
    let mut outcomes = Vec::with_capacity(order.len());
    for (position, &idx) in order.iter().enumerate() {
        let record = records
            .get(idx)
            .ok_or_else(|| Error::InvalidConfig(alloc::format!("order refers to module {idx} of {}", records.len())))?;
        let prediction = predictor.predict(learning, &record.features)?;
        let actual = record.actual_defective();
        let observed = observe_test_result(actual, prediction.predicted_defective, overlook_probability, rng);
        learning.push(&record.features, observed);
        outcomes.push(PredictionOutcome {
            position,
            record_index: idx,
            module_id: record.id.clone(),
            score: prediction.score,
            predicted_defective: prediction.predicted_defective,
            forced: prediction.forced,
            observed_defective: observed,
            actual_defective: actual,
            cutoff_fallback: prediction.cutoff_fallback,
            converged: prediction.converged,
        });
    }
    Ok(outcomes)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunTrace {
    pub config: ScenarioConfig,
    pub dataset: String,
    pub rep_seed: u64,
    pub permutation: Vec<usize>,
    pub outcomes: Vec<PredictionOutcome>,
    pub auc: f64,
    pub f1: f64,
    /// Generator state after the run, for checking the draw discipline.
    pub rng_state: u64,
}

/// Scores outcomes against their actual labels.
pub fn score_outcomes(outcomes: &[PredictionOutcome]) -> Result<(f64, f64)> {
    let scores: Vec<f64> = outcomes.iter().map(|o| o.score).collect();
    let actual: Vec<bool> = outcomes.iter().map(|o| o.actual_defective).collect();
    let predicted: Vec<bool> = outcomes.iter().map(|o| o.predicted_defective).collect();
    let auc = auc(&scores, &actual)?;
    let f1 = f1_score(&confusion(&predicted, &actual)?);
    Ok((auc, f1))
}

fn check_inputs(test: &ProjectDataset, prior: Option<&ProjectDataset>, cfg: &ScenarioConfig) -> Result<()> {
    cfg.validate()?;
    if let Some(p) = prior {
        if p.dimension() != test.dimension() {
            return Err(Error::DimensionMismatch { expected: test.dimension(), got: p.dimension() });
        }
    }
    if cfg.learning_mode == LearningMode::SeededWithPrior && prior.is_none() {
        return Err(Error::InvalidConfig("seeded learning mode needs a prior dataset".into()));
    }
    let positives = test.records().iter().filter(|r| r.actual_defective()).count();
    if positives == 0 || positives == test.len() {
        return Err(Error::SingleClassTestSet(test.name.clone()));
    }
    Ok(())
}

/// One online-learning run over a shuffled order of `test`.
pub fn simulate_run(
    test: &ProjectDataset,
    prior: Option<&ProjectDataset>,
    cfg: &ScenarioConfig,
    rep_seed: u64,
) -> Result<RunTrace> {
    check_inputs(test, prior, cfg)?;
    let mut rng = SplitMix64::new(rep_seed);
    let permutation = shuffle(test.len(), &mut rng);
    let mut learning = match (cfg.learning_mode, prior) {
        (LearningMode::SeededWithPrior, Some(p)) => LearningSet::from_dataset(p),
        _ => LearningSet::new(),
    };
    let mut predictor = OnlineLogistic::new(prior, *cfg);
    let outcomes =
        replay(test.records(), &permutation, &mut learning, &mut predictor, cfg.overlook_probability, &mut rng)?;
    let (auc, f1) = score_outcomes(&outcomes)?;
    Ok(RunTrace {
        config: *cfg,
        dataset: test.name.clone(),
        rep_seed,
        permutation,
        outcomes,
        auc,
        f1,
        rng_state: rng.state(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct RepetitionRow {
    pub dataset: String,
    pub overlook_probability: f64,
    pub rep: usize,
    pub seed: u64,
    pub auc: f64,
    pub f1: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RejectedRun {
    pub rep: usize,
    pub seed: u64,
    pub error: Error,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aggregate {
    pub reps_used: usize,
    pub mean_auc: f64,
    pub sd_auc: f64,
    pub mean_f1: f64,
    pub sd_f1: f64,
}

/// Arithmetic means and sample standard deviations (0 for a single row).
pub fn aggregate(rows: &[RepetitionRow]) -> Option<Aggregate> {
    if rows.is_empty() {
        return None;
    }
    let (mean_auc, sd_auc) = mean_sd(rows.iter().map(|r| r.auc));
    let (mean_f1, sd_f1) = mean_sd(rows.iter().map(|r| r.f1));
    Some(Aggregate { reps_used: rows.len(), mean_auc, sd_auc, mean_f1, sd_f1 })
}

fn mean_sd(values: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let n = values.clone().count();
    let mean = values.clone().sum::<f64>() / n as f64;
    if n < 2 {
        return (mean, 0.0);
    }
    let ss: f64 = values.map(|v| (v - mean) * (v - mean)).sum();
    (mean, libm::sqrt(ss / (n - 1) as f64))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentReport {
    pub dataset: String,
    pub config: ScenarioConfig,
    /// Successful repetitions, ordered by `rep`.
    pub rows: Vec<RepetitionRow>,
    pub rejected: Vec<RejectedRun>,
    /// `None` when every repetition was rejected.
    pub aggregate: Option<Aggregate>,
    pub traces: Vec<RunTrace>,
}

/// Runs `cfg.repetitions` independent runs; repetition `r` uses seed
/// `base_seed + r` (wrapping).
pub fn run_repetitions(
    test: &ProjectDataset,
    prior: Option<&ProjectDataset>,
    cfg: &ScenarioConfig,
) -> Result<ExperimentReport> {
    cfg.validate()?;
    let mut rows = Vec::new();
    let mut rejected = Vec::new();
    let mut traces = Vec::new();
    for rep in 0..cfg.repetitions {
        let seed = cfg.rep_seed(rep);
        match simulate_run(test, prior, cfg, seed) {
            Ok(trace) => {
                rows.push(RepetitionRow {
                    dataset: test.name.clone(),
                    overlook_probability: cfg.overlook_probability,
                    rep,
                    seed,
                    auc: trace.auc,
                    f1: trace.f1,
                });
                traces.push(trace);
            }
            Err(error) => rejected.push(RejectedRun { rep, seed, error }),
        }
    }
    let aggregate = aggregate(&rows);
    Ok(ExperimentReport { dataset: test.name.clone(), config: *cfg, rows, rejected, aggregate, traces })
}
