//! One-vs-rest linear max-margin classifier.
//!
//! Each category gets a binary separator trained with seeded stochastic
//! subgradient descent on the L2-regularized hinge loss
//!
//! ```text
//! F(w) = λ/2 ‖w‖² + 1/n Σ max(0, 1 − y ⟨w, x⟩)
//! ```
//!
//! with step size `1/(λ t)` at update `t`. The bias is an always-on feature
//! stored in the last weight slot and regularized like the others.

use log::warn;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::corpus::CategoryId;
use crate::error::{NluError, Result};
use crate::features::{FeatureVector, Vocabulary};

pub mod model_io;

pub use model_io::{load_model, save_model, FORMAT_VERSION, MAGIC};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hyperparams {
    pub lambda: f64,
    pub epochs: usize,
    pub seed: u64,
}

/// `lambda` 1e-2: with 50 epochs over a few hundred utterances, smaller
/// values leave the stochastic steps far from converged.
impl Default for Hyperparams {
    fn default() -> Self {
        Hyperparams {
            lambda: 1e-2,
            epochs: 50,
            seed: 1,
        }
    }
}

impl Hyperparams {
    pub fn validate(&self) -> Result<()> {
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return Err(NluError::Hyperparams(format!(
                "lambda must be positive, got {}",
                self.lambda
            )));
        }
        if self.epochs == 0 {
            return Err(NluError::Hyperparams("epochs must be at least 1".into()));
        }
        Ok(())
    }
}

/// Weight vector stored as `scale * raw` so the shrink step of every update
/// is O(1) and only the active features are touched.
#[derive(Debug, Clone)]
pub struct BinarySvm {
    raw: Vec<f64>,
    scale: f64,
}

impl BinarySvm {
    /// Zero weights over `features` inputs plus the bias slot.
    pub fn new(features: usize) -> Self {
        BinarySvm {
            raw: vec![0.0; features + 1],
            scale: 1.0,
        }
    }

    pub fn decision(&self, x: &FeatureVector) -> f64 {
        let bias = self.raw.len() - 1;
        let sum: f64 = x.active().iter().map(|&i| self.raw[i]).sum::<f64>() + self.raw[bias];
        self.scale * sum
    }

    /// One update on example `(x, y)` at step `t >= 1`.
    pub fn step(&mut self, x: &FeatureVector, y: f64, t: u64, lambda: f64) {
        let eta = 1.0 / (lambda * t as f64);
        let violated = y * self.decision(x) < 1.0;
        // 1 - ηλ, computed exactly
        let shrink = 1.0 - 1.0 / t as f64;
        if shrink <= 0.0 {
            self.raw.iter_mut().for_each(|w| *w = 0.0);
            self.scale = 1.0;
        } else {
            self.scale *= shrink;
        }
        if violated {
            let delta = eta * y / self.scale;
            let bias = self.raw.len() - 1;
            for &i in x.active() {
                self.raw[i] += delta;
            }
            self.raw[bias] += delta;
        }
        if self.scale < 1e-9 {
            self.fold_scale();
        }
    }

    fn fold_scale(&mut self) {
        let s = self.scale;
        self.raw.iter_mut().for_each(|w| *w *= s);
        self.scale = 1.0;
    }

    /// Dense weights, bias last.
    pub fn weights(&self) -> Vec<f64> {
        self.raw.iter().map(|w| w * self.scale).collect()
    }
}

/// Dot product of dense weights (bias last) with a binary input.
pub fn dense_decision(weights: &[f64], x: &FeatureVector) -> f64 {
    x.active().iter().map(|&i| weights[i]).sum::<f64>() + weights[weights.len() - 1]
}

/// Regularized hinge objective of one binary problem; labels are ±1.
pub fn hinge_objective(weights: &[f64], data: &[(FeatureVector, f64)], lambda: f64) -> f64 {
    let reg = 0.5 * lambda * weights.iter().map(|w| w * w).sum::<f64>();
    if data.is_empty() {
        return reg;
    }
    let loss: f64 = data
        .iter()
        .map(|(x, y)| (1.0 - y * dense_decision(weights, x)).max(0.0))
        .sum();
    reg + loss / data.len() as f64
}

/// Subgradient of [`hinge_objective`], taking the zero branch at the kink.
pub fn hinge_subgradient(weights: &[f64], data: &[(FeatureVector, f64)], lambda: f64) -> Vec<f64> {
    let mut grad: Vec<f64> = weights.iter().map(|w| lambda * w).collect();
    if data.is_empty() {
        return grad;
    }
    let n = data.len() as f64;
    let bias = grad.len() - 1;
    for (x, y) in data {
        if y * dense_decision(weights, x) < 1.0 {
            for &i in x.active() {
                grad[i] -= y / n;
            }
            grad[bias] -= y / n;
        }
    }
    grad
}

/// Per-category scores aligned with [`Model::categories`].
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreVector(pub Vec<f64>);

impl ScoreVector {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    /// Difference between the two highest scores; infinite with one class.
    pub fn margin(&self) -> f64 {
        let mut top = f64::NEG_INFINITY;
        let mut second = f64::NEG_INFINITY;
        for &s in &self.0 {
            if s > top {
                second = top;
                top = s;
            } else if s > second {
                second = s;
            }
        }
        if second == f64::NEG_INFINITY {
            f64::INFINITY
        } else {
            top - second
        }
    }
}

/// A trained classifier together with its vocabulary.
#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    categories: Vec<CategoryId>,
    weights: Vec<Vec<f64>>,
    vocabulary: Vocabulary,
    gazetteer_fingerprint: String,
}

impl Model {
    /// Assembles a model, checking shapes and finiteness.
    pub fn new(
        categories: Vec<CategoryId>,
        weights: Vec<Vec<f64>>,
        vocabulary: Vocabulary,
        gazetteer_fingerprint: String,
    ) -> Result<Self> {
        if categories.is_empty() {
            return Err(NluError::ModelFormat("model has no categories".into()));
        }
        if categories.len() != weights.len() {
            return Err(NluError::ModelFormat(format!(
                "{} categories but {} weight vectors",
                categories.len(),
                weights.len()
            )));
        }
        let dim = vocabulary.len() + 1;
        if let Some(w) = weights.iter().find(|w| w.len() != dim) {
            return Err(NluError::DimensionMismatch {
                expected: dim,
                actual: w.len(),
            });
        }
        if weights.iter().flatten().any(|w| !w.is_finite()) {
            return Err(NluError::ModelFormat("non-finite weight".into()));
        }
        Ok(Model {
            categories,
            weights,
            vocabulary,
            gazetteer_fingerprint,
        })
    }

    pub fn format_version(&self) -> u32 {
        FORMAT_VERSION
    }

    pub fn categories(&self) -> &[CategoryId] {
        &self.categories
    }

    /// Weight vectors, one per category, bias last.
    pub fn weights(&self) -> &[Vec<f64>] {
        &self.weights
    }

    pub fn vocabulary(&self) -> &Vocabulary {
        &self.vocabulary
    }

    pub fn gazetteer_fingerprint(&self) -> &str {
        &self.gazetteer_fingerprint
    }

    pub fn with_gazetteer_fingerprint(mut self, fingerprint: impl Into<String>) -> Self {
        self.gazetteer_fingerprint = fingerprint.into();
        self
    }

    pub fn score(&self, x: &FeatureVector) -> Result<ScoreVector> {
        if x.dimension() != self.vocabulary.len() {
            return Err(NluError::DimensionMismatch {
                expected: self.vocabulary.len(),
                actual: x.dimension(),
            });
        }
        Ok(ScoreVector(
            self.weights.iter().map(|w| dense_decision(w, x)).collect(),
        ))
    }

    /// Argmax category; exact ties go to the lexicographically smallest id.
    pub fn predict(&self, x: &FeatureVector) -> Result<(CategoryId, ScoreVector)> {
        let scores = self.score(x)?;
        let best = argmax(&self.categories, &scores);
        Ok((self.categories[best].clone(), scores))
    }
}

pub(crate) fn argmax(categories: &[CategoryId], scores: &ScoreVector) -> usize {
    let mut best = 0;
    for (i, &s) in scores.0.iter().enumerate().skip(1) {
        let b = scores.0[best];
        if s > b || (s == b && categories[i] < categories[best]) {
            best = i;
        }
    }
    best
}

/// Trains one binary separator per category over `data`.
///
/// Categories are ordered by first appearance in `data`. Examples are visited
/// in a fresh seeded permutation each epoch; every category sees the same
/// order and the same step counter.
pub fn train(
    data: &[(FeatureVector, CategoryId)],
    vocabulary: Vocabulary,
    hp: &Hyperparams,
) -> Result<Model> {
    hp.validate()?;
    if data.is_empty() {
        return Err(NluError::EmptyTrainingSet);
    }
    let dim = vocabulary.len();
    if let Some((x, _)) = data.iter().find(|(x, _)| x.dimension() != dim) {
        return Err(NluError::DimensionMismatch {
            expected: dim,
            actual: x.dimension(),
        });
    }

    let mut categories: Vec<CategoryId> = Vec::new();
    let labels: Vec<usize> = data
        .iter()
        .map(|(_, c)| match categories.iter().position(|k| k == c) {
            Some(i) => i,
            None => {
                categories.push(c.clone());
                categories.len() - 1
            }
        })
        .collect();
    if categories.len() == 1 {
        warn!(
            "only one category ({}); every prediction will be that category",
            categories[0]
        );
    }

    let mut machines = vec![BinarySvm::new(dim); categories.len()];
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(hp.seed);
    let mut t: u64 = 0;
    for _ in 0..hp.epochs {
        order.shuffle(&mut rng);
        for &i in &order {
            t += 1;
            let x = &data[i].0;
            for (c, svm) in machines.iter_mut().enumerate() {
                let y = if labels[i] == c { 1.0 } else { -1.0 };
                svm.step(x, y, t, hp.lambda);
            }
        }
    }

    let weights = machines.iter().map(BinarySvm::weights).collect();
    Model::new(categories, weights, vocabulary, String::new())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn cat(s: &str) -> CategoryId {
        CategoryId::from_raw(s)
    }

    fn vocab(n: usize) -> Vocabulary {
        Vocabulary::from_tokens((0..n).map(|i| format!("f{i}")).collect()).unwrap()
    }

    fn fv(active: &[usize], dim: usize) -> FeatureVector {
        FeatureVector::new(active.to_vec(), dim).unwrap()
    }

    #[test]
    fn separable_pair() {
        let data = vec![(fv(&[0], 2), cat("A")), (fv(&[1], 2), cat("B"))];
        let model = train(&data, vocab(2), &Hyperparams::default()).unwrap();
        for (x, c) in &data {
            assert_eq!(&model.predict(x).unwrap().0, c);
        }
    }

    #[test]
    fn xor_completes() {
        let data = vec![
            (fv(&[], 2), cat("A")),
            (fv(&[0, 1], 2), cat("A")),
            (fv(&[0], 2), cat("B")),
            (fv(&[1], 2), cat("B")),
        ];
        let model = train(&data, vocab(2), &Hyperparams::default()).unwrap();
        let correct = data
            .iter()
            .filter(|(x, c)| &model.predict(x).unwrap().0 == c)
            .count();
        assert!(correct < 4);
    }

    #[test]
    fn empty_data_and_bad_hyperparams() {
        assert!(matches!(
            train(&[], vocab(1), &Hyperparams::default()),
            Err(NluError::EmptyTrainingSet)
        ));
        let data = vec![(fv(&[0], 1), cat("A"))];
        let hp = Hyperparams {
            lambda: 0.0,
            ..Hyperparams::default()
        };
        assert!(train(&data, vocab(1), &hp).is_err());
        let hp = Hyperparams {
            epochs: 0,
            ..Hyperparams::default()
        };
        assert!(train(&data, vocab(1), &hp).is_err());
    }

    #[test]
    fn single_category_is_constant() {
        let data = vec![(fv(&[0], 2), cat("A")), (fv(&[1], 2), cat("A"))];
        let model = train(&data, vocab(2), &Hyperparams::default()).unwrap();
        assert_eq!(model.predict(&fv(&[], 2)).unwrap().0, cat("A"));
        assert!(model
            .predict(&fv(&[0], 2))
            .unwrap()
            .1
            .margin()
            .is_infinite());
    }

    #[test]
    fn scores_are_dot_products() {
        let zero = Model::new(
            vec![cat("A"), cat("B")],
            vec![vec![0.0; 2]; 2],
            vocab(1),
            String::new(),
        )
        .unwrap();
        assert_eq!(zero.score(&fv(&[0], 1)).unwrap().0, [0.0, 0.0]);

        let m = Model::new(
            vec![cat("A"), cat("B")],
            vec![vec![1.0, 0.5], vec![-1.0, -0.25]],
            vocab(1),
            String::new(),
        )
        .unwrap();
        assert_eq!(m.score(&fv(&[], 1)).unwrap().0, [0.5, -0.25]);

        let m = Model::new(
            vec![cat("A"), cat("B")],
            vec![vec![1.0, 0.0], vec![-1.0, 0.0]],
            vocab(1),
            String::new(),
        )
        .unwrap();
        let (c, s) = m.predict(&fv(&[0], 1)).unwrap();
        assert_eq!(s.0, [1.0, -1.0]);
        assert_eq!(c, cat("A"));
        assert_eq!(s.margin(), 2.0);
    }

    #[test]
    fn dimension_mismatch() {
        let m = Model::new(vec![cat("A")], vec![vec![0.0; 3]], vocab(2), String::new()).unwrap();
        assert!(matches!(
            m.score(&fv(&[0], 5)),
            Err(NluError::DimensionMismatch { .. })
        ));
        assert!(Model::new(vec![cat("A")], vec![vec![0.0; 2]], vocab(2), String::new()).is_err());
        assert!(Model::new(
            vec![cat("A")],
            vec![vec![f64::NAN; 3]],
            vocab(2),
            String::new()
        )
        .is_err());
    }

    #[test]
    fn ties_go_to_smallest_string() {
        let m = Model::new(
            vec![cat("agent_2"), cat("agent_10")],
            vec![vec![0.0, 1.0], vec![0.0, 1.0]],
            vocab(1),
            String::new(),
        )
        .unwrap();
        assert_eq!(m.predict(&fv(&[], 1)).unwrap().0, cat("agent_10"));
    }

    #[test]
    fn three_class_argmax_matches_brute_force() {
        let w = vec![
            vec![0.3, -1.0, 0.2],
            vec![1.5, 0.1, -0.4],
            vec![-0.2, 0.9, 0.0],
        ];
        let m = Model::new(
            vec![cat("A"), cat("B"), cat("C")],
            w.clone(),
            vocab(2),
            String::new(),
        )
        .unwrap();
        for active in [&[][..], &[0], &[1], &[0, 1]] {
            let x = fv(active, 2);
            let dots: Vec<f64> = w
                .iter()
                .map(|wc| active.iter().map(|&i| wc[i]).sum::<f64>() + wc[2])
                .collect();
            let best = (0..3)
                .max_by(|&a, &b| dots[a].partial_cmp(&dots[b]).unwrap())
                .unwrap();
            assert_eq!(m.predict(&x).unwrap().0, m.categories()[best]);
        }
    }

    #[test]
    fn scaled_step_matches_dense_update() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let lambda = 0.1;
        let mut svm = BinarySvm::new(4);
        for t in 1..=200u64 {
            let active: Vec<usize> = (0..4).filter(|_| rng.gen_bool(0.5)).collect();
            let x = fv(&active, 4);
            let y = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
            let before = svm.weights();
            // single-example objective: λ/2‖w‖² + hinge
            let g = hinge_subgradient(&before, &[(x.clone(), y)], lambda);
            let eta = 1.0 / (lambda * t as f64);
            svm.step(&x, y, t, lambda);
            for (after, (w, gi)) in svm.weights().iter().zip(before.iter().zip(&g)) {
                let expected = w - eta * gi;
                assert!(
                    (after - expected).abs() <= 1e-9 * (1.0 + expected.abs()),
                    "t={t}"
                );
            }
        }
    }

    #[test]
    fn deterministic_training() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let data: Vec<_> = (0..40)
            .map(|i| {
                let active: Vec<usize> = (0..6).filter(|_| rng.gen_bool(0.4)).collect();
                (fv(&active, 6), cat(&format!("c{}", i % 3)))
            })
            .collect();
        let a = train(&data, vocab(6), &Hyperparams::default()).unwrap();
        let b = train(&data, vocab(6), &Hyperparams::default()).unwrap();
        assert_eq!(a, b);
        let c = train(
            &data,
            vocab(6),
            &Hyperparams {
                seed: 2,
                ..Hyperparams::default()
            },
        )
        .unwrap();
        assert_ne!(a.weights(), c.weights());
    }
}
