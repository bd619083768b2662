//! Tags dictionary entities in free text with the token-level automaton.
//!
//! Run with `cargo run --example gazetteer_tagging`.

use rapid_nlu::gazetteer::TaggedText;
use rapid_nlu::{parse_dictionary, Automaton};

pub fn run_example() -> rapid_nlu::Result<Vec<TaggedText>> {
    let dictionary = parse_dictionary(
        "ACTOR Robert de Niro\n\
         ACTOR Viggo Mortensen\n\
         MOVIE Senhor dos Anéis\n\
         MOVIE Senhor dos Anéis O Regresso do Rei\n",
    )?;
    let automaton = Automaton::new(&dictionary);

    let mut results = Vec::new();
    for text in [
        "gosto de Robert de Niro",
        "Que actriz contracena com Viggo Mortensen no Senhor dos Anéis?",
        "Vi o Senhor dos Anéis O Regresso do Rei com o ROBERT DE NIRO",
        "nenhuma entidade aqui",
    ] {
        let tagged = automaton.tag_text(text);
        println!("{}", tagged.rendered);
        for m in &tagged.matches {
            println!("  {}\t{}\t[{}, {})", m.tag, m.surface, m.start, m.end);
        }
        results.push(tagged);
    }
    Ok(results)
}

#[allow(dead_code)]
fn main() -> rapid_nlu::Result<()> {
    run_example().map(|_| ())
}
