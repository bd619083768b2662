//! Runs the repeated 70/30 split protocol on a synthetic corpus shaped like a
//! 52-interaction art-domain corpus.
//!
//! Run with `cargo run --release --example evaluate_protocol`.

use rapid_nlu::{
    generate_synthetic_corpus, run_folds, EvalReport, Hyperparams, SplitConfig, SyntheticSpec,
    DEFAULT_PREFIX,
};

pub const ART_MIRROR: SyntheticSpec = SyntheticSpec {
    categories: 52,
    paraphrases_per: 5,
    core_tokens_per: 3,
    distractor_vocab: 40,
};

pub fn run_example() -> rapid_nlu::Result<EvalReport> {
    let corpus = generate_synthetic_corpus(ART_MIRROR, 1)?;
    let report = run_folds(
        &corpus,
        None,
        &Hyperparams::default(),
        &SplitConfig::default(),
        DEFAULT_PREFIX,
    )?;
    print!("{}", report.to_table("synthetic"));
    println!(
        "{} misclassified test utterances",
        report.misclassified.len()
    );
    Ok(report)
}

#[allow(dead_code)]
fn main() -> rapid_nlu::Result<()> {
    run_example().map(|_| ())
}
