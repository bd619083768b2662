//! Paraphrase-grouped intent classification.
//!
//! A corpus groups paraphrases into interactions; every interaction becomes a
//! category and a one-vs-rest linear SVM over unigram features learns to map
//! utterances to categories. An optional gazetteer replaces dictionary
//! entities with their tags before featurization and records the original
//! text, which fills logical-form templates such as
//! `WHO_ACTS_WITH_IN($ACTOR, $MOVIE)`.
//!
//! ```
//! use rapid_nlu::{Corpus, Hyperparams, Interaction, Pipeline};
//!
//! let corpus = Corpus::new(vec![
//!     Interaction::new(["olá", "bom dia"], ["Olá!"]).unwrap(),
//!     Interaction::new(["como te chamas", "qual é o teu nome"], ["Edgar."]).unwrap(),
//! ])
//! .unwrap();
//! let nlu = Pipeline::train(&corpus, None, None, &Hyperparams::default(), "agent").unwrap();
//! let pred = nlu.understand("Qual é o teu nome?").unwrap();
//! assert_eq!(pred.category.as_str(), "agent_1");
//! assert_eq!(nlu.select_answer_seeded(&pred, Some(1)).to_string(), "Edgar.");
//! ```

pub mod classifier;
pub mod cli;
pub mod corpus;
pub mod error;
pub mod eval;
pub mod features;
pub mod gazetteer;
pub mod pipeline;

pub use classifier::{load_model, save_model, Hyperparams, Model, ScoreVector};
pub use corpus::{
    parse_answers, parse_corpus, parse_dictionary, AnswerTable, CategoryId, Corpus, GazetteerEntry,
    Interaction, DEFAULT_PREFIX,
};
pub use error::{NluError, Result};
pub use eval::{generate_synthetic_corpus, run_folds, EvalReport, SplitConfig, SyntheticSpec};
pub use features::{tokenize, FeatureVector, Vocabulary};
pub use gazetteer::{Automaton, Binding, EntityMatch};
pub use pipeline::{LogicalForm, Pipeline, Prediction, Recognizer, Response};
