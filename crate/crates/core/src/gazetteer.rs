//! Dictionary-based entity tagging over a token-level Aho-Corasick automaton.
//!
//! Patterns are sequences of lowercased words, so matches always start and end
//! on word boundaries. Text is scanned once; each token costs one goto step
//! plus an amortized constant number of failure-link steps.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt;

use sha2::{Digest, Sha256};

use crate::corpus::GazetteerEntry;
use crate::features::{normalize_word, split_words};

const ROOT: usize = 0;

/// Content hash of a dictionary, as lowercase hex SHA-256 over one
/// `TAG<TAB>surface` line per entry in order.
pub fn dictionary_fingerprint(entries: &[GazetteerEntry]) -> String {
    let mut hasher = Sha256::new();
    for e in entries {
        hasher.update(e.tag().as_bytes());
        hasher.update(b"\t");
        hasher.update(e.surface().join(" ").as_bytes());
        hasher.update(b"\n");
    }
    hasher
        .finalize()
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

/// Matching key for a single word.
pub fn match_key(word: &str) -> String {
    word.to_lowercase()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Output {
    entry: usize,
    len: usize,
}

#[derive(Debug, Clone, Default)]
struct State {
    goto: BTreeMap<u32, usize>,
    fail: usize,
    outputs: Vec<Output>,
}

/// Multi-pattern matcher built from gazetteer entries.
#[derive(Debug, Clone)]
pub struct Automaton {
    entries: Vec<GazetteerEntry>,
    symbols: HashMap<String, u32>,
    states: Vec<State>,
    tags: BTreeSet<String>,
}

/// One dictionary hit over the half-open token span `[start, end)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct EntityMatch {
    pub tag: String,
    pub start: usize,
    pub end: usize,
    pub surface: String,
}

impl EntityMatch {
    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end == self.start
    }
}

/// A tag and the original text it replaced.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Binding {
    pub tag: String,
    pub surface: String,
}

/// A token after tagging: either a word that passed through or an entity tag.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum TaggedToken {
    Word(String),
    Tag(String),
}

impl TaggedToken {
    pub fn as_str(&self) -> &str {
        match self {
            TaggedToken::Word(w) | TaggedToken::Tag(w) => w,
        }
    }
}

impl fmt::Display for TaggedToken {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl Automaton {
    /// Builds the goto trie, failure links, and merged output sets.
    pub fn new(entries: &[GazetteerEntry]) -> Self {
        let mut automaton = Automaton {
            entries: entries.to_vec(),
            symbols: HashMap::new(),
            states: vec![State::default()],
            tags: entries.iter().map(|e| e.tag().to_string()).collect(),
        };
        for (idx, entry) in entries.iter().enumerate() {
            let words: Vec<String> = split_words(&entry.surface().join(" "))
                .into_iter()
                .map(|w| match_key(w.text))
                .collect();
            automaton.insert(idx, &words);
        }
        automaton.link();
        automaton
    }

    fn symbol(&mut self, word: &str) -> u32 {
        let next = self.symbols.len() as u32;
        *self.symbols.entry(word.to_string()).or_insert(next)
    }

    fn insert(&mut self, entry: usize, words: &[String]) {
        let mut state = ROOT;
        for word in words {
            let sym = self.symbol(word);
            state = match self.states[state].goto.get(&sym) {
                Some(&s) => s,
                None => {
                    self.states.push(State::default());
                    let s = self.states.len() - 1;
                    self.states[state].goto.insert(sym, s);
                    s
                }
            };
        }
        let tag = self.entries[entry].tag();
        let outputs = &mut self.states[state].outputs;
        // case variants of one surface under the same tag are one pattern
        if !outputs.iter().any(|o| self.entries[o.entry].tag() == tag) {
            outputs.push(Output {
                entry,
                len: words.len(),
            });
        }
    }

    fn link(&mut self) {
        let mut queue = VecDeque::new();
        let root_children: Vec<usize> = self.states[ROOT].goto.values().copied().collect();
        for s in root_children {
            self.states[s].fail = ROOT;
            queue.push_back(s);
        }
        while let Some(state) = queue.pop_front() {
            let edges: Vec<(u32, usize)> = self.states[state]
                .goto
                .iter()
                .map(|(&k, &v)| (k, v))
                .collect();
            for (sym, child) in edges {
                queue.push_back(child);
                let mut f = self.states[state].fail;
                let fail = loop {
                    if let Some(&t) = self.states[f].goto.get(&sym) {
                        break t;
                    }
                    if f == ROOT {
                        break ROOT;
                    }
                    f = self.states[f].fail;
                };
                self.states[child].fail = fail;
                let inherited = self.states[fail].outputs.clone();
                let outputs = &mut self.states[child].outputs;
                for o in inherited {
                    let tag = self.entries[o.entry].tag();
                    if !outputs
                        .iter()
                        .any(|p| p.len == o.len && self.entries[p.entry].tag() == tag)
                    {
                        outputs.push(o);
                    }
                }
            }
        }
    }

    pub fn entries(&self) -> &[GazetteerEntry] {
        &self.entries
    }

    /// Every tag the dictionary can produce.
    pub fn tags(&self) -> &BTreeSet<String> {
        &self.tags
    }

    pub fn state_count(&self) -> usize {
        self.states.len()
    }

    pub fn failure(&self, state: usize) -> usize {
        self.states[state].fail
    }

    /// All occurrences of all patterns, sorted by start then longest first.
    pub fn find_matches<S: AsRef<str>>(&self, tokens: &[S]) -> Vec<EntityMatch> {
        self.find_matches_counted(tokens).0
    }

    /// Like [`find_matches`](Self::find_matches), also returning the number of
    /// state transitions taken (goto plus failure steps).
    pub fn find_matches_counted<S: AsRef<str>>(&self, tokens: &[S]) -> (Vec<EntityMatch>, usize) {
        let mut visits = 0usize;
        let mut found: Vec<(usize, usize, usize)> = Vec::new();
        let mut state = ROOT;
        for (i, token) in tokens.iter().enumerate() {
            let sym = self.symbols.get(&match_key(token.as_ref())).copied();
            state = match sym {
                None => {
                    visits += 1;
                    ROOT
                }
                Some(sym) => loop {
                    visits += 1;
                    if let Some(&next) = self.states[state].goto.get(&sym) {
                        break next;
                    }
                    if state == ROOT {
                        break ROOT;
                    }
                    state = self.states[state].fail;
                },
            };
            for o in &self.states[state].outputs {
                found.push((i + 1 - o.len, o.len, o.entry));
            }
        }
        found.sort_by(|a, b| a.0.cmp(&b.0).then(b.1.cmp(&a.1)).then(a.2.cmp(&b.2)));
        let matches = found
            .into_iter()
            .map(|(start, len, entry)| EntityMatch {
                tag: self.entries[entry].tag().to_string(),
                start,
                end: start + len,
                surface: join_tokens(&tokens[start..start + len]),
            })
            .collect();
        (matches, visits)
    }

    /// Tags `text` in one pass: split, match, resolve overlaps, replace.
    pub fn tag_text(&self, text: &str) -> TaggedText {
        let words = split_words(text);
        let originals: Vec<&str> = words.iter().map(|w| w.text).collect();
        let normalized: Vec<String> = originals.iter().map(|w| normalize_word(w)).collect();
        let kept = resolve_overlaps(self.find_matches(&originals));
        let (tokens, bindings) = apply_tags(&normalized, &originals, &kept);

        let mut rendered = String::with_capacity(text.len());
        let mut cursor = 0;
        for m in &kept {
            let (from, to) = (words[m.start].start, words[m.end - 1].end);
            rendered.push_str(&text[cursor..from]);
            rendered.push_str(&m.tag);
            cursor = to;
        }
        rendered.push_str(&text[cursor..]);

        TaggedText {
            tokens,
            bindings,
            matches: kept,
            rendered,
        }
    }
}

/// Result of [`Automaton::tag_text`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TaggedText {
    pub tokens: Vec<TaggedToken>,
    pub bindings: Vec<Binding>,
    /// Kept matches, with token spans over the original words.
    pub matches: Vec<EntityMatch>,
    /// The input text with each matched span replaced by its tag.
    pub rendered: String,
}

fn join_tokens<S: AsRef<str>>(tokens: &[S]) -> String {
    tokens
        .iter()
        .map(AsRef::as_ref)
        .collect::<Vec<_>>()
        .join(" ")
}

/// Leftmost-longest selection over matches sorted by (start, longest first).
pub fn resolve_overlaps(matches: Vec<EntityMatch>) -> Vec<EntityMatch> {
    let mut kept: Vec<EntityMatch> = Vec::with_capacity(matches.len());
    for m in matches {
        if kept.last().is_none_or(|prev| prev.end <= m.start) {
            kept.push(m);
        }
    }
    kept
}

/// Collapses each matched span to its tag. Bindings carry the original text
/// of the span, in left-to-right order.
pub fn apply_tags<S: AsRef<str>, O: AsRef<str>>(
    tokens: &[S],
    original: &[O],
    matches: &[EntityMatch],
) -> (Vec<TaggedToken>, Vec<Binding>) {
    let mut out = Vec::with_capacity(tokens.len());
    let mut bindings = Vec::with_capacity(matches.len());
    let mut i = 0;
    for m in matches {
        out.extend(
            tokens[i..m.start]
                .iter()
                .map(|t| TaggedToken::Word(t.as_ref().to_string())),
        );
        out.push(TaggedToken::Tag(m.tag.clone()));
        bindings.push(Binding {
            tag: m.tag.clone(),
            surface: join_tokens(&original[m.start..m.end]),
        });
        i = m.end;
    }
    out.extend(
        tokens[i..]
            .iter()
            .map(|t| TaggedToken::Word(t.as_ref().to_string())),
    );
    (out, bindings)
}
