//! Training and inference flows.
//!
//! Training: assign categories, optionally tag entities in every training
//! utterance, build the vocabulary, train the classifier. Inference: tag,
//! vectorize, classify, then pick one of the category's answers or fill its
//! logical-form template.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use log::warn;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::classifier::{self, Hyperparams, Model, ScoreVector};
use crate::corpus::{AnswerTable, CategoryId, Corpus, GazetteerEntry};
use crate::error::{NluError, Result};
use crate::features::{tokenize, FeatureVector, Vocabulary};
use crate::gazetteer::{dictionary_fingerprint, Automaton, Binding, TaggedToken};

pub mod logical_form;

pub use logical_form::{instantiate_logical_form, LogicalForm, Template, TemplateArg};

/// Raw words that spell a dictionary tag get this prefix so user text cannot
/// forge an entity. The prefix is not a word character, so `tokenize` never
/// produces it.
pub const TAG_ESCAPE: char = '~';

/// Feature tokens of an utterance after optional entity tagging.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Featurized {
    pub tokens: Vec<String>,
    pub bindings: Vec<Binding>,
    pub tagged_utterance: String,
}

fn feature_tokens(tagged: &[TaggedToken], tags: &BTreeSet<String>) -> Vec<String> {
    tagged
        .iter()
        .map(|t| match t {
            TaggedToken::Tag(tag) => tag.clone(),
            TaggedToken::Word(w) if tags.contains(w) => format!("{TAG_ESCAPE}{w}"),
            TaggedToken::Word(w) => w.clone(),
        })
        .collect()
}

/// Tokenizes `text`, tagging entities first when an automaton is given.
pub fn featurize(text: &str, automaton: Option<&Automaton>) -> Featurized {
    match automaton {
        Some(a) => {
            let tagged = a.tag_text(text);
            Featurized {
                tokens: feature_tokens(&tagged.tokens, a.tags()),
                bindings: tagged.bindings,
                tagged_utterance: tagged.rendered,
            }
        }
        None => Featurized {
            tokens: tokenize(text),
            bindings: Vec::new(),
            tagged_utterance: text.to_string(),
        },
    }
}

/// Outcome of classifying one utterance.
#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub category: CategoryId,
    pub scores: ScoreVector,
    pub bindings: Vec<Binding>,
    pub tagged_utterance: String,
    /// Top score minus runner-up score.
    pub margin: f64,
    /// Set when no token of the utterance is in the vocabulary; the category
    /// then comes from the biases alone.
    pub no_known_tokens: bool,
}

/// Classifier plus the optional entity tagger it was trained with.
#[derive(Debug, Clone)]
pub struct Recognizer {
    model: Model,
    automaton: Option<Automaton>,
}

impl Recognizer {
    /// Trains on labeled utterances. `dictionary` set means the NE flag is on.
    pub fn train(
        labeled: &[(String, CategoryId)],
        dictionary: Option<&[GazetteerEntry]>,
        hp: &Hyperparams,
    ) -> Result<Self> {
        if labeled.is_empty() {
            return Err(NluError::EmptyTrainingSet);
        }
        let automaton = dictionary.map(Automaton::new);
        let token_lists: Vec<Vec<String>> = labeled
            .iter()
            .map(|(u, _)| featurize(u, automaton.as_ref()).tokens)
            .collect();
        let vocabulary = Vocabulary::build(token_lists.iter().map(Vec::as_slice))?;
        let data: Vec<(FeatureVector, CategoryId)> = token_lists
            .iter()
            .zip(labeled)
            .map(|(tokens, (_, c))| (vocabulary.vectorize(tokens), c.clone()))
            .collect();
        let fingerprint = dictionary.map(dictionary_fingerprint).unwrap_or_default();
        let model =
            classifier::train(&data, vocabulary, hp)?.with_gazetteer_fingerprint(fingerprint);
        Ok(Recognizer { model, automaton })
    }

    /// Pairs a loaded model with its dictionary, checking the fingerprint.
    pub fn from_parts(model: Model, dictionary: Option<&[GazetteerEntry]>) -> Result<Self> {
        let expected = model.gazetteer_fingerprint();
        match dictionary {
            None if !expected.is_empty() => Err(NluError::Gazetteer(
                "model was trained with a dictionary; supply the same dictionary".into(),
            )),
            Some(_) if expected.is_empty() => Err(NluError::Gazetteer(
                "model was trained without a dictionary".into(),
            )),
            Some(entries) if dictionary_fingerprint(entries) != expected => Err(
                NluError::Gazetteer("dictionary differs from the one used at training time".into()),
            ),
            _ => Ok(Recognizer {
                model,
                automaton: dictionary.map(Automaton::new),
            }),
        }
    }

    pub fn model(&self) -> &Model {
        &self.model
    }

    pub fn automaton(&self) -> Option<&Automaton> {
        self.automaton.as_ref()
    }

    pub fn understand(&self, utterance: &str) -> Result<Prediction> {
        let f = featurize(utterance, self.automaton.as_ref());
        let x = self.model.vocabulary().vectorize(&f.tokens);
        let (category, scores) = self.model.predict(&x)?;
        Ok(Prediction {
            margin: scores.margin(),
            category,
            scores,
            bindings: f.bindings,
            tagged_utterance: f.tagged_utterance,
            no_known_tokens: x.is_empty(),
        })
    }

    /// Fraction of `labeled` classified as its own category.
    pub fn accuracy(&self, labeled: &[(String, CategoryId)]) -> Result<f64> {
        if labeled.is_empty() {
            return Ok(0.0);
        }
        let mut correct = 0usize;
        for (u, c) in labeled {
            if &self.understand(u)?.category == c {
                correct += 1;
            }
        }
        Ok(correct as f64 / labeled.len() as f64)
    }
}

/// A category's answer: canned text or a logical-form template.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Answer {
    Text(String),
    Template(Template),
}

impl Answer {
    pub fn parse(text: &str) -> Result<Self> {
        Ok(match Template::parse(text)? {
            Some(t) => Answer::Template(t),
            None => Answer::Text(text.to_string()),
        })
    }
}

/// What the pipeline returns to the user.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Response {
    Text(String),
    LogicalForm(LogicalForm),
}

impl fmt::Display for Response {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Response::Text(t) => f.write_str(t),
            Response::LogicalForm(lf) => lf.fmt(f),
        }
    }
}

/// A trained recognizer together with every category's answers.
#[derive(Debug, Clone)]
pub struct Pipeline {
    recognizer: Recognizer,
    answers: BTreeMap<CategoryId, Vec<Answer>>,
    prefix: String,
}

impl Pipeline {
    /// Trains from a corpus. Answers from `answers` replace the corpus's own
    /// answers for the categories they cover.
    pub fn train(
        corpus: &Corpus,
        dictionary: Option<&[GazetteerEntry]>,
        answers: Option<AnswerTable>,
        hp: &Hyperparams,
        prefix: &str,
    ) -> Result<Self> {
        let labeled = corpus.assign_categories(prefix);
        let recognizer = Recognizer::train(&labeled, dictionary, hp)?;
        let table = merge_answers(corpus, answers, prefix);
        Pipeline::assemble(recognizer, &table, prefix)
    }

    /// Builds a pipeline around an already trained recognizer.
    pub fn assemble(recognizer: Recognizer, answers: &AnswerTable, prefix: &str) -> Result<Self> {
        let mut parsed = BTreeMap::new();
        for (cat, list) in answers.iter() {
            let list = list
                .iter()
                .map(|a| Answer::parse(a))
                .collect::<Result<Vec<_>>>()?;
            parsed.insert(cat.clone(), list);
        }
        for cat in recognizer.model().categories() {
            if parsed.get(cat).is_none_or(Vec::is_empty) {
                return Err(NluError::MissingAnswers(cat.to_string()));
            }
        }
        Ok(Pipeline {
            recognizer,
            answers: parsed,
            prefix: prefix.to_string(),
        })
    }

    pub fn recognizer(&self) -> &Recognizer {
        &self.recognizer
    }

    pub fn model(&self) -> &Model {
        self.recognizer.model()
    }

    pub fn automaton(&self) -> Option<&Automaton> {
        self.recognizer.automaton()
    }

    pub fn prefix(&self) -> &str {
        &self.prefix
    }

    pub fn answers(&self, category: &CategoryId) -> &[Answer] {
        self.answers.get(category).map_or(&[], Vec::as_slice)
    }

    pub fn understand(&self, utterance: &str) -> Result<Prediction> {
        let p = self.recognizer.understand(utterance)?;
        if p.no_known_tokens {
            warn!("no known tokens in `{utterance}`; category chosen from biases only");
        }
        Ok(p)
    }

    /// Picks one of the predicted category's answers uniformly at random and
    /// fills it if it is a template.
    pub fn select_answer<R: Rng + ?Sized>(&self, pred: &Prediction, rng: &mut R) -> Response {
        let options = self.answers(&pred.category);
        assert!(
            !options.is_empty(),
            "category {} has no answers",
            pred.category
        );
        match &options[rng.gen_range(0..options.len())] {
            Answer::Text(t) => Response::Text(t.clone()),
            Answer::Template(t) => Response::LogicalForm(t.instantiate(&pred.bindings)),
        }
    }

    /// [`select_answer`](Self::select_answer) with a fresh generator, seeded
    /// when `seed` is given.
    pub fn select_answer_seeded(&self, pred: &Prediction, seed: Option<u64>) -> Response {
        match seed {
            Some(s) => self.select_answer(pred, &mut ChaCha8Rng::seed_from_u64(s)),
            None => self.select_answer(pred, &mut rand::thread_rng()),
        }
    }
}

/// Corpus answers overridden per category by `file` answers.
pub fn merge_answers(corpus: &Corpus, file: Option<AnswerTable>, prefix: &str) -> AnswerTable {
    let embedded = AnswerTable::from_corpus(corpus, prefix);
    match file {
        Some(table) => table.merged_over(&embedded),
        None => embedded,
    }
}
