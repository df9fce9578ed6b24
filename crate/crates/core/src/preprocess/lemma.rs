//! Lexicon + suffix-rule lemmatizer.
//!
//! A word is lowercased, looked up in the exception lexicon, and otherwise
//! rewritten by the first suffix rule whose output is itself a fixed point
//! of the rule table. At most one rule fires, and lemmatizing a lemma
//! returns it unchanged.

const EXCEPTIONS: &[(&str, &str)] = &[
    ("am", "be"),
    ("are", "be"),
    ("is", "be"),
    ("was", "be"),
    ("were", "be"),
    ("been", "be"),
    ("being", "be"),
    ("has", "have"),
    ("had", "have"),
    ("having", "have"),
    ("does", "do"),
    ("did", "do"),
    ("done", "do"),
    ("doing", "do"),
    ("data", "data"),
    ("children", "child"),
    ("people", "person"),
    ("made", "make"),
    ("gave", "give"),
    ("given", "give"),
    ("took", "take"),
    ("taken", "take"),
    ("sold", "sell"),
    ("using", "use"),
    ("used", "use"),
    ("uses", "use"),
    ("including", "include"),
    ("included", "include"),
    ("includes", "include"),
    ("requiring", "require"),
    ("required", "require"),
    ("deleting", "delete"),
    ("deleted", "delete"),
    ("storing", "store"),
    ("stored", "store"),
    ("sharing", "share"),
    ("shared", "share"),
    ("receiving", "receive"),
    ("received", "receive"),
    ("providing", "provide"),
    ("provided", "provide"),
    ("disclosing", "disclose"),
    ("disclosed", "disclose"),
    ("relating", "relate"),
    ("related", "relate"),
    ("describing", "describe"),
    ("described", "describe"),
    ("ensuring", "ensure"),
    ("ensured", "ensure"),
    ("purposes", "purpose"),
    ("analyses", "analysis"),
    ("bases", "basis"),
    ("this", "this"),
    ("thus", "thus"),
    ("its", "its"),
    ("less", "less"),
    ("unless", "unless"),
    ("during", "during"),
    ("anything", "anything"),
    ("something", "something"),
    ("processing", "process"),
];

fn exception(word: &str) -> Option<&'static str> {
    EXCEPTIONS
        .iter()
        .find(|(form, _)| *form == word)
        .map(|(_, lemma)| *lemma)
}

fn is_vowel(c: u8) -> bool {
    matches!(c, b'a' | b'e' | b'i' | b'o' | b'u')
}

fn has_vowel(s: &str) -> bool {
    s.bytes().any(|b| is_vowel(b) || b == b'y')
}

/// Number of vowel→consonant transitions (Porter's measure) on ASCII stems.
fn measure(stem: &[u8]) -> usize {
    let mut m = 0;
    let mut prev_vowel = false;
    for &c in stem {
        let v = is_vowel(c);
        if prev_vowel && !v {
            m += 1;
        }
        prev_vowel = v;
    }
    m
}

/// Re-adds or removes letters after stripping `-ing` / `-ed`.
fn restore(stem: &str) -> String {
    let b = stem.as_bytes();
    let n = b.len();
    if stem.ends_with("at") || stem.ends_with("bl") || stem.ends_with("iz") {
        return format!("{stem}e");
    }
    if n >= 2
        && b[n - 1] == b[n - 2]
        && !is_vowel(b[n - 1])
        && !matches!(b[n - 1], b'l' | b's' | b'z')
    {
        return stem[..n - 1].to_string();
    }
    let cvc = n >= 3
        && !is_vowel(b[n - 3])
        && is_vowel(b[n - 2])
        && !is_vowel(b[n - 1])
        && !matches!(b[n - 1], b'w' | b'x' | b'y');
    if cvc && measure(b) == 1 {
        return format!("{stem}e");
    }
    stem.to_string()
}

/// Outputs of every rule whose guard matches `word`, in rule order.
fn raw_rules(word: &str) -> Vec<String> {
    let mut out = Vec::new();
    if !word.is_ascii() || word.len() <= 3 || !word.bytes().all(|b| b.is_ascii_lowercase()) {
        return out;
    }
    let n = word.len();
    if n > 4 && word.ends_with("ies") {
        out.push(format!("{}y", &word[..n - 3]));
    }
    if n > 4 && word.ends_with("ied") {
        out.push(format!("{}y", &word[..n - 3]));
    }
    if word.ends_with("sses") {
        out.push(word[..n - 2].to_string());
    }
    if ["ches", "shes", "xes", "zes"]
        .iter()
        .any(|s| word.ends_with(s))
    {
        out.push(word[..n - 2].to_string());
    }
    if let Some(stem) = word.strip_suffix("ing") {
        if stem.len() >= 3 && has_vowel(stem) {
            out.push(restore(stem));
        }
    }
    if let Some(stem) = word.strip_suffix("ed") {
        if stem.len() >= 3 && has_vowel(stem) {
            out.push(restore(stem));
        }
    }
    if word.ends_with('s') && !["ss", "us", "is"].iter().any(|s| word.ends_with(s)) {
        out.push(word[..n - 1].to_string());
    }
    out
}

fn is_fixed_point(word: &str) -> bool {
    match exception(word) {
        Some(lemma) => lemma == word,
        None => raw_rules(word).is_empty(),
    }
}

/// Lemma of a single surface form.
pub fn lemma_of(surface: &str) -> String {
    let word = surface.to_lowercase();
    if let Some(lemma) = exception(&word) {
        return lemma.to_string();
    }
    raw_rules(&word)
        .into_iter()
        .find(|candidate| candidate != &word && is_fixed_point(candidate))
        .unwrap_or(word)
}

pub fn lemmatize<S: AsRef<str>>(tokens: &[S]) -> Vec<(String, String)> {
    tokens
        .iter()
        .map(|t| (t.as_ref().to_string(), lemma_of(t.as_ref())))
        .collect()
}
