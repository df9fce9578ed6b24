//! Pattern and gazetteer entity tagging.

use std::path::Path;
use std::sync::LazyLock;

use regex::Regex;

use super::tokenize::tokenize;
use super::{Entity, EntitySpan, Token};
use crate::error::{Error, Result};

const BUILTIN_GAZETTEER: &str = include_str!("../../data/gazetteer.txt");

static NUMBER: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"^\d[\d,]*(\.\d+)?$").unwrap());
static MONEY: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"^[$€£¥₹]\d[\d,]*(\.\d+)?$").unwrap());
static PERCENT: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"^\d+(\.\d+)?%$").unwrap());
static STATUTE: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"^\d{4}\.\d+").unwrap());

const NUMBER_WORDS: [&str; 16] = [
    "one", "two", "three", "four", "five", "six", "seven", "eight", "nine", "ten", "eleven",
    "twelve", "fifteen", "twenty", "thirty", "ninety",
];
const SCALES: [&str; 3] = ["thousand", "million", "billion"];
const CURRENCY_WORDS: [&str; 6] = ["euro", "dollar", "eur", "usd", "pound", "gbp"];
const TIME_UNITS: [&str; 6] = ["minute", "hour", "day", "week", "month", "year"];
const DAY_QUALIFIERS: [&str; 3] = ["business", "calendar", "working"];
const REF_HEADS: [&str; 3] = ["article", "section", "recital"];

/// Multi-word organization names, matched case-insensitively.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Gazetteer {
    phrases: Vec<Vec<String>>,
}

impl Gazetteer {
    pub fn parse(text: &str) -> Self {
        let mut phrases: Vec<Vec<String>> = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(|l| tokenize(l).into_iter().map(|t| t.to_lowercase()).collect())
            .filter(|p: &Vec<String>| !p.is_empty())
            .collect();
        // longest phrase wins at a given position
        phrases.sort_by(|a, b| b.len().cmp(&a.len()).then_with(|| a.cmp(b)));
        phrases.dedup();
        Self { phrases }
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(Self::parse(&text))
    }

    fn match_at(&self, lower: &[String], at: usize) -> Option<usize> {
        self.phrases
            .iter()
            .find(|p| lower.len() - at >= p.len() && lower[at..at + p.len()] == p[..])
            .map(Vec::len)
    }
}

impl Default for Gazetteer {
    fn default() -> Self {
        Self::parse(BUILTIN_GAZETTEER)
    }
}

fn is_number(t: &Token) -> bool {
    NUMBER.is_match(&t.surface)
}

fn is_quantity(t: &Token) -> bool {
    is_number(t) || NUMBER_WORDS.contains(&t.lemma.as_str())
}

fn lemma_in(tokens: &[Token], at: usize, set: &[&str]) -> bool {
    tokens
        .get(at)
        .is_some_and(|t| set.contains(&t.lemma.as_str()))
}

fn scale_extends(tokens: &[Token], end: usize) -> usize {
    if lemma_in(tokens, end, &SCALES) {
        end + 1
    } else {
        end
    }
}

fn legal_ref(tokens: &[Token], i: usize) -> Option<usize> {
    let t = &tokens[i];
    if STATUTE.is_match(&t.surface) {
        return Some(i + 1);
    }
    let next_is_digit = tokens
        .get(i + 1)
        .is_some_and(|n| n.surface.starts_with(|c: char| c.is_ascii_digit()));
    (REF_HEADS.contains(&t.lemma.as_str()) && next_is_digit).then_some(i + 2)
}

fn money(tokens: &[Token], i: usize) -> Option<usize> {
    let t = &tokens[i];
    if MONEY.is_match(&t.surface) {
        return Some(scale_extends(tokens, i + 1));
    }
    let lone_symbol = t.surface.chars().count() == 1
        && t.surface.chars().all(super::tokenize::is_currency)
        && tokens.get(i + 1).is_some_and(is_number);
    if lone_symbol {
        return Some(scale_extends(tokens, i + 2));
    }
    if is_number(t) {
        let end = scale_extends(tokens, i + 1);
        if lemma_in(tokens, end, &CURRENCY_WORDS) {
            return Some(end + 1);
        }
    }
    None
}

fn percent(tokens: &[Token], i: usize) -> Option<usize> {
    let t = &tokens[i];
    if PERCENT.is_match(&t.surface) {
        return Some(i + 1);
    }
    let next_is_percent = tokens
        .get(i + 1)
        .is_some_and(|n| n.surface == "%" || n.lemma == "percent");
    (is_number(t) && next_is_percent).then_some(i + 2)
}

fn duration(tokens: &[Token], i: usize) -> Option<usize> {
    if !is_quantity(&tokens[i]) {
        return None;
    }
    let mut j = i + 1;
    if lemma_in(tokens, j, &DAY_QUALIFIERS) {
        j += 1;
    }
    lemma_in(tokens, j, &TIME_UNITS).then_some(j + 1)
}

/// Tags entities in place and returns non-overlapping half-open spans in
/// token order. Earlier rules take precedence at the same position:
/// legal reference, money, percent, duration, then gazetteer organizations.
pub fn tag_entities(tokens: &mut [Token], gazetteer: &Gazetteer) -> Vec<EntitySpan> {
    let lower: Vec<String> = tokens.iter().map(|t| t.surface.to_lowercase()).collect();
    let mut spans = Vec::new();
    let mut i = 0;
    while i < tokens.len() {
        let hit = legal_ref(tokens, i)
            .map(|end| (end, Entity::LegalRef))
            .or_else(|| money(tokens, i).map(|end| (end, Entity::Money)))
            .or_else(|| percent(tokens, i).map(|end| (end, Entity::Percent)))
            .or_else(|| duration(tokens, i).map(|end| (end, Entity::DateDuration)))
            .or_else(|| {
                gazetteer
                    .match_at(&lower, i)
                    .map(|len| (i + len, Entity::Org))
            });
        match hit {
            Some((end, entity)) => {
                for t in &mut tokens[i..end] {
                    t.entity = entity;
                }
                spans.push(EntitySpan {
                    start: i,
                    end,
                    entity,
                });
                i = end;
            }
            None => i += 1,
        }
    }
    spans
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::preprocess::lemma::lemma_of;

    fn tokens(text: &str) -> Vec<Token> {
        tokenize(text)
            .into_iter()
            .map(|s| {
                let lemma = lemma_of(&s);
                Token::new(s, lemma)
            })
            .collect()
    }

    fn spans(text: &str) -> Vec<(usize, usize, Entity)> {
        let mut toks = tokens(text);
        tag_entities(&mut toks, &Gazetteer::default())
            .into_iter()
            .map(|s| (s.start, s.end, s.entity))
            .collect()
    }

    #[test]
    fn money_span() {
        assert_eq!(spans("€20 million"), [(0, 2, Entity::Money)]);
        assert_eq!(spans("up to $7,500 per violation"), [(2, 3, Entity::Money)]);
        assert_eq!(spans("$ 100"), [(0, 2, Entity::Money)]);
        assert_eq!(spans("10 million euros"), [(0, 3, Entity::Money)]);
    }

    #[test]
    fn duration_span() {
        assert_eq!(spans("72 hours"), [(0, 2, Entity::DateDuration)]);
        assert_eq!(
            spans("within 45 calendar days"),
            [(1, 4, Entity::DateDuration)]
        );
        assert_eq!(spans("one month"), [(0, 2, Entity::DateDuration)]);
    }

    #[test]
    fn legal_reference_span() {
        assert_eq!(spans("Article 17"), [(0, 2, Entity::LegalRef)]);
        assert_eq!(spans("see Section 1798.105"), [(1, 3, Entity::LegalRef)]);
        assert_eq!(spans("1798.100"), [(0, 1, Entity::LegalRef)]);
    }

    #[test]
    fn percent_span() {
        assert_eq!(spans("4% of turnover"), [(0, 1, Entity::Percent)]);
        assert_eq!(spans("4 percent"), [(0, 2, Entity::Percent)]);
    }

    #[test]
    fn gazetteer_longest_match() {
        assert_eq!(
            spans("the California Attorney General may"),
            [(1, 4, Entity::Org)]
        );
        assert_eq!(spans("notify the EDPB"), [(2, 3, Entity::Org)]);
        let custom = Gazetteer::parse("Acme Corp\n");
        let mut toks = tokens("acme corp and EDPB");
        let s = tag_entities(&mut toks, &custom);
        assert_eq!(s.len(), 1);
        assert_eq!(toks[0].entity, Entity::Org);
        assert_eq!(toks[3].entity, Entity::None);
    }

    #[test]
    fn plain_text_has_no_entities() {
        assert!(spans("the controller shall notify").is_empty());
    }
}
