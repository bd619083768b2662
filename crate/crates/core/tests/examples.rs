//! Runs every example's `run_example` so the examples cannot rot.

#[path = "../examples/chat_agent.rs"]
mod chat_agent;
#[path = "../examples/cinema_logical_forms.rs"]
mod cinema_logical_forms;
#[path = "../examples/evaluate_protocol.rs"]
mod evaluate_protocol;
#[path = "../examples/gazetteer_tagging.rs"]
mod gazetteer_tagging;
#[path = "../examples/model_file.rs"]
mod model_file;

#[test]
fn chat_agent_answers_paraphrase() {
    let transcript = chat_agent::run_example().unwrap();
    let obras = transcript
        .iter()
        .find(|(q, _, _)| q.contains("obras"))
        .unwrap();
    assert_eq!(obras.1, "agent_7");
}

#[test]
fn cinema_logical_forms_resolve() {
    let forms = cinema_logical_forms::run_example().unwrap();
    assert_eq!(forms[0].1, "Que actriz contracena com ACTOR no MOVIE?");
    assert_eq!(
        forms[0].2,
        "WHO_ACTS_WITH_IN(Viggo Mortensen, Senhor dos Anéis)"
    );
    assert_eq!(forms[3].2, "ACTED_TOGETHER(Tom Hanks, Meryl Streep)");
}

#[test]
fn evaluate_protocol_reports_five_folds() {
    let report = evaluate_protocol::run_example().unwrap();
    assert_eq!(report.fold_accuracies.len(), 5);
    assert!(report.average >= 0.80);
}

#[test]
fn gazetteer_tagging_prefers_longest() {
    let tagged = gazetteer_tagging::run_example().unwrap();
    assert_eq!(tagged[2].rendered, "Vi o MOVIE com o ACTOR");
    assert!(tagged[3].matches.is_empty());
}

#[test]
fn model_file_round_trips() {
    let bytes = model_file::run_example().unwrap();
    assert_eq!(&bytes[..4], b"RNLU");
}
