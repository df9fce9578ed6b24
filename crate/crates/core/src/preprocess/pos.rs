use super::{PosTag, Token};

const LEXICON: &[(&str, PosTag)] = &[
    // closed classes
    ("the", PosTag::Other),
    ("a", PosTag::Other),
    ("an", PosTag::Other),
    ("and", PosTag::Other),
    ("or", PosTag::Other),
    ("nor", PosTag::Other),
    ("of", PosTag::Other),
    ("to", PosTag::Other),
    ("in", PosTag::Other),
    ("on", PosTag::Other),
    ("by", PosTag::Other),
    ("for", PosTag::Other),
    ("with", PosTag::Other),
    ("from", PosTag::Other),
    ("within", PosTag::Other),
    ("without", PosTag::Other),
    ("under", PosTag::Other),
    ("upon", PosTag::Other),
    ("per", PosTag::Other),
    ("that", PosTag::Other),
    ("which", PosTag::Other),
    ("who", PosTag::Other),
    ("it", PosTag::Other),
    ("its", PosTag::Other),
    ("they", PosTag::Other),
    ("their", PosTag::Other),
    ("this", PosTag::Other),
    ("any", PosTag::Other),
    ("each", PosTag::Other),
    ("unless", PosTag::Other),
    ("where", PosTag::Other),
    ("whether", PosTag::Other),
    // modals and auxiliaries
    ("shall", PosTag::Verb),
    ("must", PosTag::Verb),
    ("may", PosTag::Verb),
    ("will", PosTag::Verb),
    ("be", PosTag::Verb),
    ("have", PosTag::Verb),
    ("do", PosTag::Verb),
    // legal vocabulary
    ("lawful", PosTag::Adj),
    ("unlawful", PosTag::Adj),
    ("explicit", PosTag::Adj),
    ("clear", PosTag::Adj),
    ("civil", PosTag::Adj),
    ("public", PosTag::Adj),
    ("specific", PosTag::Adj),
    ("appropriate", PosTag::Adj),
    ("necessary", PosTag::Adj),
    ("reasonable", PosTag::Adj),
    ("apply", PosTag::Verb),
    ("rely", PosTag::Verb),
    ("reply", PosTag::Verb),
    ("supply", PosTag::Verb),
    ("process", PosTag::Verb),
    ("collect", PosTag::Verb),
    ("delete", PosTag::Verb),
    ("erase", PosTag::Verb),
    ("request", PosTag::Verb),
    ("disclose", PosTag::Verb),
    ("sell", PosTag::Verb),
    ("provide", PosTag::Verb),
    ("require", PosTag::Verb),
    ("ensure", PosTag::Verb),
    ("obtain", PosTag::Verb),
    ("inform", PosTag::Verb),
    ("object", PosTag::Verb),
    ("restrict", PosTag::Verb),
    ("rectify", PosTag::Verb),
    ("family", PosTag::Noun),
    ("supervisory", PosTag::Adj),
    ("only", PosTag::Adv),
    ("also", PosTag::Adv),
    ("not", PosTag::Adv),
];

/// Lexicon lookup, then suffix heuristics, then NOUN.
pub fn pos_of(lemma: &str) -> PosTag {
    if let Some((_, tag)) = LEXICON.iter().find(|(w, _)| *w == lemma) {
        return *tag;
    }
    if lemma.chars().any(|c| c.is_ascii_digit()) || !lemma.chars().any(char::is_alphabetic) {
        return PosTag::Other;
    }
    if ["ify", "ize", "ise"].iter().any(|s| lemma.ends_with(s)) {
        return PosTag::Verb;
    }
    if lemma.ends_with("ly") {
        return PosTag::Adv;
    }
    if ["ous", "al", "ive", "ful", "able", "ible"]
        .iter()
        .any(|s| lemma.ends_with(s))
    {
        return PosTag::Adj;
    }
    PosTag::Noun
}

pub fn tag_pos(tokens: &mut [Token]) {
    for t in tokens {
        t.pos = pos_of(&t.lemma);
    }
}
