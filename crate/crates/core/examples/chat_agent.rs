//! Trains the small art-domain agent and answers a few visitor questions.
//!
//! Run with `cargo run --example chat_agent`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rapid_nlu::{parse_answers, parse_corpus, Hyperparams, Pipeline, DEFAULT_PREFIX};

const CORPUS: &str = include_str!("../data/art/corpus.xml");
const ANSWERS: &str = include_str!("../data/art/answers.txt");

/// Returns `(question, category, answer)` for each question asked.
pub fn run_example() -> rapid_nlu::Result<Vec<(String, String, String)>> {
    let corpus = parse_corpus(CORPUS)?;
    let answers = parse_answers(ANSWERS, &corpus, DEFAULT_PREFIX)?;
    let agent = Pipeline::train(
        &corpus,
        None,
        Some(answers),
        &Hyperparams::default(),
        DEFAULT_PREFIX,
    )?;

    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut transcript = Vec::new();
    for question in [
        "Bom dia!",
        "As obras vão acabar quando?",
        "Como é o teu nome?",
        "Quanto custa entrar no palácio?",
        "Adeus",
    ] {
        let pred = agent.understand(question)?;
        let answer = agent.select_answer(&pred, &mut rng).to_string();
        println!(
            "> {question}\n  [{} margin {:.3}] {answer}",
            pred.category, pred.margin
        );
        transcript.push((question.to_string(), pred.category.to_string(), answer));
    }
    Ok(transcript)
}

#[allow(dead_code)]
fn main() -> rapid_nlu::Result<()> {
    run_example().map(|_| ())
}
