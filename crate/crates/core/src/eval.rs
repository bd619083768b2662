//! Repeated random-split evaluation.
//!
//! Each fold splits the labeled utterances per category (shuffle, then the
//! first `ceil(ratio * k)` go to training), trains a fresh recognizer on the
//! training side and reports category accuracy on the rest. The report
//! averages the folds.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::classifier::Hyperparams;
use crate::corpus::{CategoryId, Corpus, GazetteerEntry, Interaction, DEFAULT_PREFIX};
use crate::error::{NluError, Result};
use crate::pipeline::Recognizer;

pub type Labeled = (String, CategoryId);

#[derive(Debug, Clone, PartialEq)]
pub struct SplitConfig {
    pub train_ratio: f64,
    pub seeds: Vec<u64>,
}

impl Default for SplitConfig {
    fn default() -> Self {
        SplitConfig::new(0.7, 5, 1)
    }
}

impl SplitConfig {
    /// `folds` folds seeded `first_seed, first_seed + 1, ...`.
    pub fn new(train_ratio: f64, folds: usize, first_seed: u64) -> Self {
        SplitConfig {
            train_ratio,
            seeds: (0..folds as u64).map(|i| first_seed + i).collect(),
        }
    }

    pub fn folds(&self) -> usize {
        self.seeds.len()
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.train_ratio > 0.0 && self.train_ratio < 1.0) {
            return Err(NluError::Eval(format!(
                "train ratio must be in (0, 1), got {}",
                self.train_ratio
            )));
        }
        if self.seeds.is_empty() {
            return Err(NluError::Eval("at least one fold is required".into()));
        }
        Ok(())
    }
}

/// Number of a category's `k` utterances that go to training.
pub fn train_share(k: usize, ratio: f64) -> usize {
    // the epsilon keeps e.g. 0.7 * 10 = 7.000000000000001 from rounding up to 8
    let n = (ratio * k as f64 - 1e-9).ceil() as usize;
    n.clamp(1, k)
}

/// Per-category seeded split. Categories with a single utterance go entirely
/// to training.
pub fn stratified_split(
    labeled: &[Labeled],
    ratio: f64,
    seed: u64,
) -> Result<(Vec<Labeled>, Vec<Labeled>)> {
    if labeled.is_empty() {
        return Err(NluError::Eval("nothing to split".into()));
    }
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(NluError::Eval(format!(
            "train ratio must be in (0, 1), got {ratio}"
        )));
    }
    let mut order: Vec<&CategoryId> = Vec::new();
    let mut groups: BTreeMap<&CategoryId, Vec<&Labeled>> = BTreeMap::new();
    for item in labeled {
        let group = groups.entry(&item.1).or_default();
        if group.is_empty() {
            order.push(&item.1);
        }
        group.push(item);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut train, mut test) = (Vec::new(), Vec::new());
    for cat in order {
        let group = groups.get_mut(cat).expect("grouped above");
        group.shuffle(&mut rng);
        let n = train_share(group.len(), ratio);
        train.extend(group[..n].iter().map(|&l| l.clone()));
        test.extend(group[n..].iter().map(|&l| l.clone()));
    }
    Ok((train, test))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Misclassification {
    pub fold: usize,
    pub utterance: String,
    pub gold: CategoryId,
    pub predicted: CategoryId,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub train_ratio: f64,
    pub seeds: Vec<u64>,
    pub fold_accuracies: Vec<f64>,
    pub average: f64,
    /// Counts keyed by (gold, predicted), summed over folds.
    pub confusion: BTreeMap<(CategoryId, CategoryId), usize>,
    pub misclassified: Vec<Misclassification>,
}

impl EvalReport {
    /// Report over already computed fold accuracies.
    pub fn from_fold_accuracies(fold_accuracies: Vec<f64>) -> Self {
        let average = mean(&fold_accuracies);
        EvalReport {
            train_ratio: 0.7,
            seeds: Vec::new(),
            fold_accuracies,
            average,
            confusion: BTreeMap::new(),
            misclassified: Vec::new(),
        }
    }

    /// Accuracy table: one header row, one row with fold columns and the
    /// average, two decimals.
    pub fn to_table(&self, name: &str) -> String {
        let mut out = String::new();
        let pct = (self.train_ratio * 100.0).round();
        let _ = writeln!(
            out,
            "# stratified {pct}/{} split per category, {} fold(s)",
            100.0 - pct,
            self.fold_accuracies.len()
        );
        out.push_str("corpus");
        for i in 1..=self.fold_accuracies.len() {
            let _ = write!(out, "\tfold {i}");
        }
        out.push_str("\taverage\n");
        out.push_str(name);
        for a in &self.fold_accuracies {
            let _ = write!(out, "\t{a:.2}");
        }
        let _ = writeln!(out, "\t{:.2}", self.average);
        out
    }

    /// `fold_i accuracy` lines and a final `average` line, full precision.
    pub fn to_key_values(&self) -> String {
        let mut out = String::new();
        for (i, a) in self.fold_accuracies.iter().enumerate() {
            let _ = writeln!(out, "fold_{} {a}", i + 1);
        }
        let _ = writeln!(out, "average {}", self.average);
        out
    }

    /// One `fold<TAB>gold<TAB>predicted<TAB>utterance` line per error.
    pub fn misclassification_report(&self) -> String {
        let mut out = String::new();
        for m in &self.misclassified {
            let _ = writeln!(
                out,
                "{}\t{}\t{}\t{}",
                m.fold + 1,
                m.gold,
                m.predicted,
                m.utterance
            );
        }
        out
    }
}

fn mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    values.iter().sum::<f64>() / values.len() as f64
}

struct FoldOutcome {
    correct: usize,
    total: usize,
    predictions: Vec<(Labeled, CategoryId)>,
}

/// Runs the protocol with any train/classify pair. `fit` gets the training
/// side of a fold and returns a classifier for the test side.
pub fn run_folds_with<F, C>(labeled: &[Labeled], cfg: &SplitConfig, fit: F) -> Result<EvalReport>
where
    F: Fn(&[Labeled]) -> Result<C> + Sync,
    C: Fn(&str) -> Result<CategoryId>,
{
    cfg.validate()?;
    let outcomes: Vec<Result<FoldOutcome>> = cfg
        .seeds
        .par_iter()
        .enumerate()
        .map(|(fold, &seed)| {
            let (train, test) = stratified_split(labeled, cfg.train_ratio, seed)?;
            if test.is_empty() {
                return Err(NluError::Eval(format!(
                    "fold {} has an empty test set; every category has too few utterances \
                     for a {} split, use a larger corpus",
                    fold + 1,
                    cfg.train_ratio
                )));
            }
            let classify = fit(&train)?;
            let mut predictions = Vec::with_capacity(test.len());
            let mut correct = 0;
            for item in test {
                let predicted = classify(&item.0)?;
                if predicted == item.1 {
                    correct += 1;
                }
                predictions.push((item, predicted));
            }
            Ok(FoldOutcome {
                correct,
                total: predictions.len(),
                predictions,
            })
        })
        .collect();

    let mut fold_accuracies = Vec::with_capacity(outcomes.len());
    let mut confusion = BTreeMap::new();
    let mut misclassified = Vec::new();
    for (fold, outcome) in outcomes.into_iter().enumerate() {
        let outcome = outcome?;
        fold_accuracies.push(outcome.correct as f64 / outcome.total as f64);
        for ((utterance, gold), predicted) in outcome.predictions {
            *confusion
                .entry((gold.clone(), predicted.clone()))
                .or_insert(0) += 1;
            if gold != predicted {
                misclassified.push(Misclassification {
                    fold,
                    utterance,
                    gold,
                    predicted,
                });
            }
        }
    }
    let average = mean(&fold_accuracies);
    Ok(EvalReport {
        train_ratio: cfg.train_ratio,
        seeds: cfg.seeds.clone(),
        fold_accuracies,
        average,
        confusion,
        misclassified,
    })
}

/// The standard protocol: a fresh recognizer per fold.
pub fn run_folds(
    corpus: &Corpus,
    dictionary: Option<&[GazetteerEntry]>,
    hp: &Hyperparams,
    cfg: &SplitConfig,
    prefix: &str,
) -> Result<EvalReport> {
    let labeled = corpus.assign_categories(prefix);
    run_folds_with(&labeled, cfg, |train| {
        let recognizer = Recognizer::train(train, dictionary, hp)?;
        Ok(move |u: &str| recognizer.understand(u).map(|p| p.category))
    })
}

/// Shape of a generated corpus.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SyntheticSpec {
    pub categories: usize,
    pub paraphrases_per: usize,
    pub core_tokens_per: usize,
    pub distractor_vocab: usize,
}

/// Chance that a paraphrase uses a given core word of its category.
pub const CORE_KEEP: f64 = 0.5;

/// Most distractor words added to one paraphrase.
pub const MAX_DISTRACTORS: usize = 3;

/// Generates a corpus where category `c` owns the private words
/// `c{c}w0 ..` and every paraphrase mixes a random non-empty subset of them
/// (each kept with probability [`CORE_KEEP`])
/// with up to [`MAX_DISTRACTORS`] shared words `d0 ..`, in random order.
pub fn generate_synthetic_corpus(spec: SyntheticSpec, seed: u64) -> Result<Corpus> {
    if spec.categories == 0 || spec.paraphrases_per == 0 || spec.core_tokens_per == 0 {
        return Err(NluError::Corpus(
            "categories, paraphrases and core tokens must all be at least 1".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut interactions = Vec::with_capacity(spec.categories);
    for c in 0..spec.categories {
        let core: Vec<String> = (0..spec.core_tokens_per)
            .map(|j| format!("c{c}w{j}"))
            .collect();
        let mut utterances = Vec::with_capacity(spec.paraphrases_per);
        for _ in 0..spec.paraphrases_per {
            let mut words: Vec<String> = core
                .iter()
                .filter(|_| rng.gen_bool(CORE_KEEP))
                .cloned()
                .collect();
            if words.is_empty() {
                words.push(core[rng.gen_range(0..core.len())].clone());
            }
            if spec.distractor_vocab > 0 {
                let n = rng.gen_range(1..=MAX_DISTRACTORS.min(spec.distractor_vocab));
                for _ in 0..n {
                    words.push(format!("d{}", rng.gen_range(0..spec.distractor_vocab)));
                }
            }
            words.shuffle(&mut rng);
            utterances.push(words.join(" "));
        }
        let answer = format!("ans_{}", CategoryId::new(DEFAULT_PREFIX, c));
        interactions.push(Interaction::new(utterances, [answer]).map_err(NluError::Corpus)?);
    }
    Corpus::new(interactions)
}
