//! Training corpus, gazetteer dictionary, and answer table parsing.
//!
//! The corpus is an XML document:
//!
//! ```xml
//! <corpus>
//!   <interaction>
//!     <utterances><u>olá</u><u>bom dia</u></utterances>
//!     <answers><a>Olá!</a></answers>
//!   </interaction>
//! </corpus>
//! ```
//!
//! Every interaction becomes one category, named `<prefix>_<index>` with a
//! zero-based index in file order.

use std::collections::{BTreeMap, HashSet};
use std::fmt;

use roxmltree::{Document, Node, NodeType, ParsingOptions};

use crate::error::{NluError, Result};

pub const DEFAULT_PREFIX: &str = "agent";

/// Trims and collapses internal whitespace runs to single spaces.
pub fn normalize_whitespace(text: &str) -> String {
    text.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// A group of paraphrases together with the answers they share.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Interaction {
    utterances: Vec<String>,
    answers: Vec<String>,
}

impl Interaction {
    /// Normalizes whitespace and checks that both lists are non-empty and no
    /// utterance is blank.
    pub fn new<U, A>(utterances: U, answers: A) -> std::result::Result<Self, String>
    where
        U: IntoIterator,
        U::Item: AsRef<str>,
        A: IntoIterator,
        A::Item: AsRef<str>,
    {
        let utterances: Vec<String> = utterances
            .into_iter()
            .map(|u| normalize_whitespace(u.as_ref()))
            .collect();
        let answers: Vec<String> = answers
            .into_iter()
            .map(|a| normalize_whitespace(a.as_ref()))
            .collect();
        if utterances.is_empty() {
            return Err("no utterances".into());
        }
        if answers.is_empty() {
            return Err("no answers".into());
        }
        if let Some(i) = utterances.iter().position(String::is_empty) {
            return Err(format!("utterance {i} is empty"));
        }
        if let Some(i) = answers.iter().position(String::is_empty) {
            return Err(format!("answer {i} is empty"));
        }
        Ok(Interaction {
            utterances,
            answers,
        })
    }

    pub fn utterances(&self) -> &[String] {
        &self.utterances
    }

    pub fn answers(&self) -> &[String] {
        &self.answers
    }
}

/// An ordered, non-empty list of interactions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Corpus {
    interactions: Vec<Interaction>,
}

impl Corpus {
    pub fn new(interactions: Vec<Interaction>) -> Result<Self> {
        if interactions.is_empty() {
            return Err(NluError::Corpus("corpus has no interactions".into()));
        }
        Ok(Corpus { interactions })
    }

    pub fn interactions(&self) -> &[Interaction] {
        &self.interactions
    }

    pub fn len(&self) -> usize {
        self.interactions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.interactions.is_empty()
    }

    pub fn utterance_count(&self) -> usize {
        self.interactions.iter().map(|i| i.utterances.len()).sum()
    }

    /// Category ids of every interaction, in file order.
    pub fn categories(&self, prefix: &str) -> Vec<CategoryId> {
        (0..self.len())
            .map(|i| CategoryId::new(prefix, i))
            .collect()
    }

    /// Pairs every utterance with the category of its interaction.
    pub fn assign_categories(&self, prefix: &str) -> Vec<(String, CategoryId)> {
        self.interactions
            .iter()
            .enumerate()
            .flat_map(|(i, inter)| {
                let cat = CategoryId::new(prefix, i);
                inter
                    .utterances
                    .iter()
                    .map(move |u| (u.clone(), cat.clone()))
            })
            .collect()
    }

    /// Canonical XML serialization; `parse_corpus` reads it back unchanged.
    pub fn to_xml(&self) -> String {
        let mut out = String::from("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<corpus>\n");
        for inter in &self.interactions {
            out.push_str("  <interaction>\n    <utterances>\n");
            for u in &inter.utterances {
                out.push_str(&format!("      <u>{}</u>\n", escape_xml(u)));
            }
            out.push_str("    </utterances>\n    <answers>\n");
            for a in &inter.answers {
                out.push_str(&format!("      <a>{}</a>\n", escape_xml(a)));
            }
            out.push_str("    </answers>\n  </interaction>\n");
        }
        out.push_str("</corpus>\n");
        out
    }
}

fn escape_xml(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            _ => out.push(c),
        }
    }
    out
}

/// Category label assigned to an interaction, e.g. `agent_7`.
///
/// Ordering is plain string ordering, so `agent_10 < agent_2`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CategoryId(String);

impl CategoryId {
    pub fn new(prefix: &str, index: usize) -> Self {
        CategoryId(format!("{prefix}_{index}"))
    }

    pub fn from_raw(raw: impl Into<String>) -> Self {
        CategoryId(raw.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for CategoryId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

fn line_of(doc: &Document, node: Node) -> u32 {
    doc.text_pos_at(node.range().start).row
}

fn element_children<'a, 'input>(
    doc: &Document,
    node: Node<'a, 'input>,
    context: &str,
) -> std::result::Result<Vec<Node<'a, 'input>>, String> {
    let mut out = Vec::new();
    for child in node.children() {
        match child.node_type() {
            NodeType::Element => out.push(child),
            NodeType::Text if !child.text().unwrap_or("").trim().is_empty() => {
                return Err(format!(
                    "unexpected text inside <{context}> at line {}",
                    line_of(doc, child)
                ));
            }
            _ => {}
        }
    }
    Ok(out)
}

fn text_items(doc: &Document, list: Node, item: &str) -> std::result::Result<Vec<String>, String> {
    let parent = list.tag_name().name().to_string();
    let mut items = Vec::new();
    for child in element_children(doc, list, &parent)? {
        let name = child.tag_name().name();
        if name != item {
            return Err(format!(
                "unknown element <{name}> inside <{parent}> at line {}",
                line_of(doc, child)
            ));
        }
        let mut text = String::new();
        for part in child.children() {
            match part.node_type() {
                NodeType::Text => text.push_str(part.text().unwrap_or("")),
                NodeType::Element => {
                    return Err(format!(
                        "unknown element <{}> inside <{item}> at line {}",
                        part.tag_name().name(),
                        line_of(doc, part)
                    ))
                }
                _ => {}
            }
        }
        items.push(text);
    }
    Ok(items)
}

fn parse_interaction(doc: &Document, node: Node) -> std::result::Result<Interaction, String> {
    let mut utterances = None;
    let mut answers = None;
    for child in element_children(doc, node, "interaction")? {
        match child.tag_name().name() {
            "utterances" if utterances.is_none() && answers.is_none() => {
                utterances = Some(text_items(doc, child, "u")?)
            }
            "answers" if utterances.is_some() && answers.is_none() => {
                answers = Some(text_items(doc, child, "a")?)
            }
            "utterances" | "answers" => {
                return Err(format!(
                    "expected <utterances> then <answers>, found misplaced <{}> at line {}",
                    child.tag_name().name(),
                    line_of(doc, child)
                ))
            }
            other => {
                return Err(format!(
                    "unknown element <{other}> at line {}",
                    line_of(doc, child)
                ))
            }
        }
    }
    let utterances = utterances.ok_or("missing <utterances>")?;
    let answers = answers.ok_or("missing <answers>")?;
    Interaction::new(utterances, answers)
}

/// Parses a corpus document.
pub fn parse_corpus(xml_text: &str) -> Result<Corpus> {
    let options = ParsingOptions {
        allow_dtd: true,
        ..ParsingOptions::default()
    };
    let doc = Document::parse_with_options(xml_text, options).map_err(|e| NluError::Xml {
        line: e.pos().row,
        message: e.to_string(),
    })?;
    let root = doc.root_element();
    if root.tag_name().name() != "corpus" {
        return Err(NluError::Corpus(format!(
            "root element must be <corpus>, found <{}>",
            root.tag_name().name()
        )));
    }
    let children = element_children(&doc, root, "corpus").map_err(NluError::Corpus)?;
    let mut interactions = Vec::with_capacity(children.len());
    for (index, child) in children.into_iter().enumerate() {
        if child.tag_name().name() != "interaction" {
            return Err(NluError::Corpus(format!(
                "unknown element <{}> at line {}",
                child.tag_name().name(),
                line_of(&doc, child)
            )));
        }
        let interaction = parse_interaction(&doc, child)
            .map_err(|message| NluError::Interaction { index, message })?;
        interactions.push(interaction);
    }
    Corpus::new(interactions)
}

/// A dictionary row: an entity class label and the words naming the entity.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GazetteerEntry {
    tag: String,
    surface: Vec<String>,
}

impl GazetteerEntry {
    pub fn new<S: AsRef<str>>(tag: &str, surface: &[S]) -> std::result::Result<Self, String> {
        let tag = tag.to_uppercase();
        if tag.is_empty() {
            return Err("empty tag".into());
        }
        if !tag.chars().all(|c| c.is_alphanumeric() || c == '_')
            || !tag.chars().any(char::is_alphabetic)
        {
            return Err(format!("tag `{tag}` must be letters, digits or `_`"));
        }
        let surface: Vec<String> = surface.iter().map(|s| s.as_ref().to_string()).collect();
        if surface.is_empty() {
            return Err(format!("tag `{tag}` has no surface words"));
        }
        if surface.iter().any(|s| s.trim().is_empty()) {
            return Err("empty surface term".into());
        }
        if crate::features::split_words(&surface.join(" ")).is_empty() {
            return Err(format!("surface `{}` contains no words", surface.join(" ")));
        }
        Ok(GazetteerEntry { tag, surface })
    }

    pub fn tag(&self) -> &str {
        &self.tag
    }

    pub fn surface(&self) -> &[String] {
        &self.surface
    }
}

impl fmt::Display for GazetteerEntry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.tag, self.surface.join(" "))
    }
}

/// Parses `TAG w1 ... wn` lines. Blank lines and `#` comments are skipped and
/// exact duplicate entries are kept once.
pub fn parse_dictionary(text: &str) -> Result<Vec<GazetteerEntry>> {
    let mut seen = HashSet::new();
    let mut entries = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let mut parts = trimmed.split_whitespace();
        let tag = parts.next().unwrap_or_default();
        let surface: Vec<&str> = parts.collect();
        if surface.is_empty() {
            return Err(NluError::Dictionary {
                line: line_no,
                message: format!("expected `TAG word...`, found `{trimmed}`"),
            });
        }
        let entry = GazetteerEntry::new(tag, &surface).map_err(|message| NluError::Dictionary {
            line: line_no,
            message,
        })?;
        if seen.insert(entry.clone()) {
            entries.push(entry);
        }
    }
    Ok(entries)
}

/// Answers per category, in file order.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct AnswerTable {
    rows: BTreeMap<CategoryId, Vec<String>>,
}

impl AnswerTable {
    /// Answers embedded in the corpus `<answers>` elements.
    pub fn from_corpus(corpus: &Corpus, prefix: &str) -> Self {
        let rows = corpus
            .interactions()
            .iter()
            .enumerate()
            .map(|(i, inter)| (CategoryId::new(prefix, i), inter.answers.clone()))
            .collect();
        AnswerTable { rows }
    }

    pub fn get(&self, category: &CategoryId) -> Option<&[String]> {
        self.rows.get(category).map(Vec::as_slice)
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&CategoryId, &[String])> {
        self.rows.iter().map(|(k, v)| (k, v.as_slice()))
    }

    /// Per category, rows of `self` win; categories missing here are taken
    /// from `fallback`.
    pub fn merged_over(mut self, fallback: &AnswerTable) -> AnswerTable {
        for (cat, answers) in &fallback.rows {
            self.rows
                .entry(cat.clone())
                .or_insert_with(|| answers.clone());
        }
        self
    }

    pub(crate) fn insert(&mut self, category: CategoryId, answer: String) {
        self.rows.entry(category).or_default().push(answer);
    }
}

/// Parses `category answer` lines against the categories of `corpus`.
///
/// The line is split at the first whitespace run, so answers may contain
/// spaces. Repeated categories accumulate answers.
pub fn parse_answers(text: &str, corpus: &Corpus, prefix: &str) -> Result<AnswerTable> {
    parse_answers_for(text, &corpus.categories(prefix))
}

/// Like [`parse_answers`], validating against an explicit category list.
pub fn parse_answers_for(text: &str, categories: &[CategoryId]) -> Result<AnswerTable> {
    let known: HashSet<&CategoryId> = categories.iter().collect();
    let mut table = AnswerTable::default();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let (category, answer) = match trimmed.split_once(char::is_whitespace) {
            Some((c, rest)) if !rest.trim().is_empty() => (c, normalize_whitespace(rest)),
            _ => {
                return Err(NluError::Answers {
                    line: line_no,
                    message: format!("expected `category answer`, found `{trimmed}`"),
                })
            }
        };
        let category = CategoryId::from_raw(category);
        if !known.contains(&category) {
            return Err(NluError::UnknownCategory(category.to_string()));
        }
        table.insert(category, answer);
    }
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn xml(interactions: &[(&[&str], &[&str])]) -> String {
        let mut s = String::from("<corpus>");
        for (us, as_) in interactions {
            s.push_str("<interaction><utterances>");
            for u in *us {
                s.push_str(&format!("<u>{u}</u>"));
            }
            s.push_str("</utterances><answers>");
            for a in *as_ {
                s.push_str(&format!("<a>{a}</a>"));
            }
            s.push_str("</answers></interaction>");
        }
        s.push_str("</corpus>");
        s
    }

    #[test]
    fn parses_minimal_document() {
        let c = parse_corpus("<corpus><interaction><utterances><u>olá</u></utterances><answers><a>bom dia</a></answers></interaction></corpus>").unwrap();
        assert_eq!(c.len(), 1);
        assert_eq!(c.interactions()[0].utterances(), ["olá"]);
        assert_eq!(c.interactions()[0].answers(), ["bom dia"]);
    }

    #[test]
    fn normalizes_whitespace() {
        let c = parse_corpus(&xml(&[(&["  As   obras\n vão  "], &["\tsim "])])).unwrap();
        assert_eq!(c.interactions()[0].utterances(), ["As obras vão"]);
        assert_eq!(c.interactions()[0].answers(), ["sim"]);
    }

    #[test]
    fn empty_answers_names_interaction_index() {
        let text = "<corpus>\
            <interaction><utterances><u>a</u></utterances><answers><a>x</a></answers></interaction>\
            <interaction><utterances><u>b</u></utterances><answers></answers></interaction>\
            </corpus>";
        match parse_corpus(text) {
            Err(NluError::Interaction { index, .. }) => assert_eq!(index, 1),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn blank_utterance_rejected() {
        assert!(matches!(
            parse_corpus(&xml(&[(&["  "], &["x"])])),
            Err(NluError::Interaction { index: 0, .. })
        ));
    }

    #[test]
    fn malformed_xml_reports_line() {
        let text = "<corpus>\n<interaction>\n<utterances><u>a</utterances>\n</corpus>";
        match parse_corpus(text) {
            Err(NluError::Xml { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unknown_elements_rejected() {
        let text = "<corpus><interaction><utterances><u>a</u><x>b</x></utterances>\
                    <answers><a>x</a></answers></interaction></corpus>";
        assert!(matches!(
            parse_corpus(text),
            Err(NluError::Interaction { index: 0, .. })
        ));
        let text = "<corpus><foo/></corpus>";
        assert!(matches!(parse_corpus(text), Err(NluError::Corpus(_))));
        // the misspelled DTD element name is not accepted
        let text = "<corpus><interaction><uterances><u>a</u></uterances>\
                    <answers><a>x</a></answers></interaction></corpus>";
        assert!(parse_corpus(text).is_err());
    }

    #[test]
    fn accepts_inline_dtd() {
        let text = "<?xml version=\"1.0\"?>\n<!DOCTYPE corpus [\n\
            <!ELEMENT corpus (interaction+)>\n<!ELEMENT u (#PCDATA)>\n]>\n\
            <corpus><interaction><utterances><u>a &amp; b</u></utterances>\
            <answers><a>x</a></answers></interaction></corpus>";
        let c = parse_corpus(text).unwrap();
        assert_eq!(c.interactions()[0].utterances(), ["a & b"]);
    }

    #[test]
    fn art_shaped_corpus_counts() {
        let mut inters = Vec::new();
        for i in 0..52 {
            let n = if i < 23 { 6 } else { 5 };
            let us: Vec<String> = (0..n)
                .map(|j| format!("pergunta {i} variante {j}"))
                .collect();
            inters.push(Interaction::new(us, [format!("resposta {i}")]).unwrap());
        }
        let corpus = parse_corpus(&Corpus::new(inters).unwrap().to_xml()).unwrap();
        assert_eq!(corpus.len(), 52);
        assert_eq!(corpus.utterance_count(), 283);
        let labeled = corpus.assign_categories(DEFAULT_PREFIX);
        assert_eq!(labeled.len(), 283);
        let distinct: HashSet<_> = labeled.iter().map(|(_, c)| c.clone()).collect();
        assert_eq!(distinct.len(), 52);
    }

    #[test]
    fn categories_follow_interaction_index() {
        let c = parse_corpus(&xml(&[(&["a", "b", "c"], &["x"])])).unwrap();
        let labeled = c.assign_categories("agent");
        assert_eq!(labeled.len(), 3);
        assert!(labeled.iter().all(|(_, cat)| cat.as_str() == "agent_0"));

        let mut inters: Vec<(&[&str], &[&str])> = vec![(&["filler"], &["x"]); 7];
        inters.push((
            &[
                "Há alguma data prevista para a conclusão das obras?",
                "As obras vão acabar quando?",
            ],
            &["Em breve."],
        ));
        let c = parse_corpus(&xml(&inters)).unwrap();
        let labeled = c.assign_categories("agent");
        let (_, cat) = labeled
            .iter()
            .find(|(u, _)| u == "As obras vão acabar quando?")
            .unwrap();
        assert_eq!(cat.as_str(), "agent_7");
    }

    #[test]
    fn dictionary_lines() {
        let entries = parse_dictionary("ACTOR Robert de Niro").unwrap();
        assert_eq!(entries.len(), 1);
        assert_eq!(entries[0].tag(), "ACTOR");
        assert_eq!(entries[0].surface(), ["Robert", "de", "Niro"]);

        assert!(parse_dictionary("").unwrap().is_empty());
        assert!(parse_dictionary("# comment\n\n   \n").unwrap().is_empty());

        match parse_dictionary("MOVIE") {
            Err(NluError::Dictionary { line, .. }) => assert_eq!(line, 1),
            other => panic!("unexpected {other:?}"),
        }
        match parse_dictionary("ACTOR a b\n\nMOVIE") {
            Err(NluError::Dictionary { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
        let entries = parse_dictionary("actor Viggo Mortensen").unwrap();
        assert_eq!(entries[0].tag(), "ACTOR");
    }

    #[test]
    fn dictionary_duplicates_collapse() {
        let once = parse_dictionary("ACTOR a b\nMOVIE c\n").unwrap();
        let twice = parse_dictionary("ACTOR a b\nMOVIE c\nACTOR  a   b\nMOVIE c\n").unwrap();
        assert_eq!(once, twice);
    }

    #[test]
    fn answers_append_and_validate() {
        let rows: Vec<(&[&str], &[&str])> = vec![(&["olá"], &["x"]); 52];
        let corpus = parse_corpus(&xml(&rows)).unwrap();
        let t = parse_answers("agent_0 Olá!\nagent_0 Bom dia!\n", &corpus, "agent").unwrap();
        assert_eq!(t.len(), 1);
        assert_eq!(
            t.get(&CategoryId::new("agent", 0)).unwrap(),
            ["Olá!", "Bom dia!"]
        );

        assert!(matches!(
            parse_answers("agent_99 x", &corpus, "agent"),
            Err(NluError::UnknownCategory(c)) if c == "agent_99"
        ));
        assert!(matches!(
            parse_answers("agent_1\n", &corpus, "agent"),
            Err(NluError::Answers { line: 1, .. })
        ));

        let t =
            parse_answers("agent_3 WHO_ACTS_WITH_IN($ACTOR, $MOVIE)", &corpus, "agent").unwrap();
        assert_eq!(
            t.get(&CategoryId::new("agent", 3)).unwrap(),
            ["WHO_ACTS_WITH_IN($ACTOR, $MOVIE)"]
        );
    }

    #[test]
    fn file_answers_take_precedence() {
        let corpus = parse_corpus(&xml(&[(&["a"], &["x"]), (&["b"], &["y"])])).unwrap();
        let file = parse_answers("agent_1 z", &corpus, "agent").unwrap();
        let merged = file.merged_over(&AnswerTable::from_corpus(&corpus, "agent"));
        assert_eq!(merged.get(&CategoryId::new("agent", 0)).unwrap(), ["x"]);
        assert_eq!(merged.get(&CategoryId::new("agent", 1)).unwrap(), ["z"]);
    }

    fn text_strategy() -> impl Strategy<Value = String> {
        "[a-zA-Zçãéí&<>\"' ]{0,12}[a-zçã]{1,6}"
    }

    proptest! {
        #[test]
        fn xml_round_trip(
            shape in proptest::collection::vec(
                (proptest::collection::vec(text_strategy(), 1..4),
                 proptest::collection::vec(text_strategy(), 1..3)),
                1..6)
        ) {
            let inters: Vec<Interaction> =
                shape.iter().map(|(u, a)| Interaction::new(u, a).unwrap()).collect();
            let corpus = Corpus::new(inters).unwrap();
            prop_assert_eq!(parse_corpus(&corpus.to_xml()).unwrap(), corpus);
        }

        #[test]
        fn category_ignores_utterance_order(
            shape in proptest::collection::vec(proptest::collection::vec("[a-z]{1,5}", 1..5), 1..5),
            rot in 0usize..5,
        ) {
            let corpus = Corpus::new(shape.iter().map(|u| Interaction::new(u, ["x"]).unwrap()).collect()).unwrap();
            let rotated = Corpus::new(shape.iter().map(|u| {
                let mut u = u.clone();
                let k = rot % u.len();
                u.rotate_left(k);
                Interaction::new(u, ["x"]).unwrap()
            }).collect()).unwrap();
            let mut a = corpus.assign_categories("agent");
            let mut b = rotated.assign_categories("agent");
            prop_assert_eq!(a.len(), corpus.utterance_count());
            a.sort();
            b.sort();
            prop_assert_eq!(a, b);
        }
    }
}
