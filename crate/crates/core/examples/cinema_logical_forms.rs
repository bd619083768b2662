//! Maps cinema questions to logical forms using a dictionary of actors and
//! movies.
//!
//! Run with `cargo run --example cinema_logical_forms`.

use rapid_nlu::{
    parse_answers, parse_corpus, parse_dictionary, Hyperparams, Pipeline, Response, DEFAULT_PREFIX,
};

const CORPUS: &str = include_str!("../data/cinema/corpus.xml");
const DICTIONARY: &str = include_str!("../data/cinema/dictionary.txt");
const ANSWERS: &str = include_str!("../data/cinema/answers.txt");

pub const QUESTIONS: [&str; 4] = [
    "Que actriz contracena com Viggo Mortensen no Senhor dos Anéis?",
    "Quem realizou o Pulp Fiction?",
    "Onde nasceu Meryl Streep?",
    "Em que filmes entram Tom Hanks e Meryl Streep juntos?",
];

/// Returns `(question, tagged question, logical form)` per question.
pub fn run_example() -> rapid_nlu::Result<Vec<(String, String, String)>> {
    let corpus = parse_corpus(CORPUS)?;
    let dictionary = parse_dictionary(DICTIONARY)?;
    let answers = parse_answers(ANSWERS, &corpus, DEFAULT_PREFIX)?;
    let nlu = Pipeline::train(
        &corpus,
        Some(&dictionary),
        Some(answers),
        &Hyperparams::default(),
        DEFAULT_PREFIX,
    )?;

    let mut out = Vec::new();
    for question in QUESTIONS {
        let pred = nlu.understand(question)?;
        let form = match nlu.select_answer_seeded(&pred, Some(1)) {
            Response::LogicalForm(lf) => {
                if !lf.unresolved.is_empty() {
                    println!("  unresolved: {}", lf.unresolved.join(", "));
                }
                lf.to_string()
            }
            Response::Text(t) => t,
        };
        println!(
            "{question}\n  {}\n  {} -> {form}",
            pred.tagged_utterance, pred.category
        );
        out.push((question.to_string(), pred.tagged_utterance, form));
    }
    Ok(out)
}

#[allow(dead_code)]
fn main() -> rapid_nlu::Result<()> {
    run_example().map(|_| ())
}
