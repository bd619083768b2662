//! Saves a trained model, loads it back and checks that predictions agree.
//!
//! Run with `cargo run --example model_file`.

use rapid_nlu::{
    load_model, parse_corpus, parse_dictionary, save_model, Hyperparams, Recognizer, DEFAULT_PREFIX,
};

const CORPUS: &str = include_str!("../data/cinema/corpus.xml");
const DICTIONARY: &str = include_str!("../data/cinema/dictionary.txt");

/// Returns the serialized model.
pub fn run_example() -> rapid_nlu::Result<Vec<u8>> {
    let corpus = parse_corpus(CORPUS)?;
    let dictionary = parse_dictionary(DICTIONARY)?;
    let labeled = corpus.assign_categories(DEFAULT_PREFIX);
    let trained = Recognizer::train(&labeled, Some(&dictionary), &Hyperparams::default())?;

    let mut bytes = Vec::new();
    let written = save_model(trained.model(), &mut bytes)?;
    println!(
        "model: {written} bytes, {} categories, {} features",
        trained.model().categories().len(),
        trained.model().vocabulary().len()
    );
    println!(
        "dictionary fingerprint: {}",
        trained.model().gazetteer_fingerprint()
    );

    let loaded = Recognizer::from_parts(load_model(bytes.as_slice())?, Some(&dictionary))?;
    for (utterance, _) in &labeled {
        assert_eq!(
            trained.understand(utterance)?,
            loaded.understand(utterance)?
        );
    }
    println!("{} predictions identical after reload", labeled.len());
    Ok(bytes)
}

#[allow(dead_code)]
fn main() -> rapid_nlu::Result<()> {
    run_example().map(|_| ())
}
