//! Rule-based text preprocessing: tokenize, lemmatize, tag entities and
//! parts of speech, remove stop words.

mod entities;
mod lemma;
mod pos;
mod stopwords;
mod tokenize;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, Provision};

pub use entities::{tag_entities, Gazetteer};
pub use lemma::{lemma_of, lemmatize};
pub use pos::{pos_of, tag_pos};
pub use stopwords::StopList;
pub use tokenize::{is_pure_punctuation, tokenize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum PosTag {
    Noun,
    Verb,
    Adj,
    Adv,
    Other,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Entity {
    None,
    Money,
    DateDuration,
    LegalRef,
    Org,
    Percent,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    pub surface: String,
    pub lemma: String,
    pub pos: PosTag,
    pub entity: Entity,
}

impl Token {
    pub fn new(surface: impl Into<String>, lemma: impl Into<String>) -> Self {
        Self {
            surface: surface.into(),
            lemma: lemma.into(),
            pos: PosTag::Noun,
            entity: Entity::None,
        }
    }
}

/// Half-open token range `[start, end)` carrying one entity class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntitySpan {
    pub start: usize,
    pub end: usize,
    pub entity: Entity,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProcessedProvision {
    pub provision_id: String,
    pub tokens: Vec<Token>,
    pub entity_spans: Vec<EntitySpan>,
    /// Set when every token was filtered out.
    #[serde(default)]
    pub empty: bool,
}

impl ProcessedProvision {
    pub fn lemmas(&self) -> impl Iterator<Item = &str> {
        self.tokens.iter().map(|t| t.lemma.as_str())
    }
}

/// Drops stop-listed lemmas and pure punctuation.
pub fn remove_stopwords(tokens: &[(String, String)], stop: &StopList) -> Vec<(String, String)> {
    tokens
        .iter()
        .filter(|(surface, lemma)| keep(surface, lemma, stop))
        .cloned()
        .collect()
}

fn keep(surface: &str, lemma: &str, stop: &StopList) -> bool {
    !stop.contains(lemma) && !is_pure_punctuation(surface)
}

/// Filters tokens and shrinks entity spans onto the surviving indices.
/// Spans left with no surviving token are dropped.
fn filter_with_spans(
    tokens: Vec<Token>,
    spans: &[EntitySpan],
    stop: &StopList,
) -> (Vec<Token>, Vec<EntitySpan>) {
    // kept_before[i] = number of surviving tokens with index < i
    let mut kept_before = Vec::with_capacity(tokens.len() + 1);
    let mut kept = Vec::with_capacity(tokens.len());
    kept_before.push(0);
    for t in tokens {
        if keep(&t.surface, &t.lemma, stop) {
            kept.push(t);
        }
        kept_before.push(kept.len());
    }
    let spans = spans
        .iter()
        .filter_map(|s| {
            let start = kept_before[s.start];
            let end = kept_before[s.end];
            (start < end).then_some(EntitySpan {
                start,
                end,
                entity: s.entity,
            })
        })
        .collect();
    (kept, spans)
}

/// Preprocessing resources: stop list and organization gazetteer.
#[derive(Debug, Clone, Default)]
pub struct Preprocessor {
    pub stop_list: StopList,
    pub gazetteer: Gazetteer,
}

impl Preprocessor {
    pub fn new(stop_list: StopList, gazetteer: Gazetteer) -> Self {
        Self {
            stop_list,
            gazetteer,
        }
    }

    /// Runs the full pipeline on one text. Entities are tagged on the
    /// unfiltered token stream, then spans are remapped after filtering.
    pub fn process_text(&self, provision_id: &str, text: &str) -> ProcessedProvision {
        let mut tokens: Vec<Token> = lemmatize(&tokenize(text))
            .into_iter()
            .map(|(surface, lemma)| Token::new(surface, lemma))
            .collect();
        let spans = tag_entities(&mut tokens, &self.gazetteer);
        tag_pos(&mut tokens);
        let (tokens, entity_spans) = filter_with_spans(tokens, &spans, &self.stop_list);
        ProcessedProvision {
            provision_id: provision_id.to_string(),
            empty: tokens.is_empty(),
            tokens,
            entity_spans,
        }
    }

    pub fn process(&self, provision: &Provision) -> ProcessedProvision {
        self.process_text(&provision.id, &provision.text)
    }

    /// Output order equals input order regardless of thread count.
    pub fn preprocess_corpus(&self, corpus: &Corpus) -> Vec<ProcessedProvision> {
        self.preprocess_all(&corpus.provisions)
    }

    pub fn preprocess_all(&self, provisions: &[Provision]) -> Vec<ProcessedProvision> {
        provisions.par_iter().map(|p| self.process(p)).collect()
    }
}

pub fn preprocess_corpus(corpus: &Corpus) -> Vec<ProcessedProvision> {
    Preprocessor::default().preprocess_corpus(corpus)
}
