//! Provision loading, document segmentation and label attachment.

use std::collections::{BTreeMap, HashSet};
use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One addressable unit of regulation text.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provision {
    pub id: String,
    pub corpus_id: String,
    pub citation: String,
    pub text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Corpus {
    pub corpus_id: String,
    pub provisions: Vec<Provision>,
    pub source_path: String,
}

/// Ordered set of annotation classes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<String>", into = "Vec<String>")]
pub struct LabelSet {
    classes: Vec<String>,
}

/// Aspect rows of the GDPR/CCPA comparison table.
pub const DEFAULT_CLASSES: [&str; 6] = [
    "Rights for Individuals",
    "Consent",
    "Penalties",
    "Enforcement",
    "Scope",
    "Personal Data",
];

impl LabelSet {
    pub fn new<I, S>(classes: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let classes: Vec<String> = classes.into_iter().map(Into::into).collect();
        let mut seen = HashSet::new();
        for class in &classes {
            if class.trim().is_empty() {
                return Err(Error::InvalidParameter("empty class name".into()));
            }
            if !seen.insert(class.as_str()) {
                return Err(Error::InvalidParameter(format!(
                    "duplicate class `{class}`"
                )));
            }
        }
        Ok(Self { classes })
    }

    pub fn classes(&self) -> &[String] {
        &self.classes
    }

    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    pub fn index_of(&self, class: &str) -> Option<usize> {
        self.classes.iter().position(|c| c == class)
    }

    pub fn contains(&self, class: &str) -> bool {
        self.index_of(class).is_some()
    }

    /// Supervised evaluation needs at least two classes.
    pub fn require_supervised(&self) -> Result<()> {
        if self.classes.len() < 2 {
            return Err(Error::InvalidParameter(format!(
                "label set needs at least 2 classes, has {}",
                self.classes.len()
            )));
        }
        Ok(())
    }

    pub(crate) fn check(&self, class: &str) -> Result<usize> {
        self.index_of(class).ok_or_else(|| Error::UnknownClass {
            class: class.to_string(),
            allowed: self.classes.join(", "),
        })
    }
}

impl Default for LabelSet {
    fn default() -> Self {
        Self {
            classes: DEFAULT_CLASSES.iter().map(|s| s.to_string()).collect(),
        }
    }
}

impl TryFrom<Vec<String>> for LabelSet {
    type Error = Error;

    fn try_from(classes: Vec<String>) -> Result<Self> {
        LabelSet::new(classes)
    }
}

impl From<LabelSet> for Vec<String> {
    fn from(set: LabelSet) -> Self {
        set.classes
    }
}

/// On-disk JSONL record.
#[derive(Debug, Serialize, Deserialize)]
struct ProvisionRecord {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    citation: Option<String>,
    text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    label: Option<String>,
}

/// Reads a JSONL provision file. Record order is preserved; records without
/// an explicit id get the positional id `<corpus_id>:<index>`.
pub fn load_corpus(path: impl AsRef<Path>, corpus_id: &str) -> Result<Corpus> {
    let path = path.as_ref();
    if corpus_id.trim().is_empty() {
        return Err(Error::InvalidParameter(
            "corpus id must be non-empty".into(),
        ));
    }
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let reader = BufReader::new(file);

    let mut provisions = Vec::new();
    let mut seen = HashSet::new();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let malformed = |message: String| Error::Malformed {
            path: path.to_path_buf(),
            line: lineno + 1,
            message,
        };
        let record: ProvisionRecord =
            serde_json::from_str(&line).map_err(|e| malformed(e.to_string()))?;
        if record.text.trim().is_empty() {
            return Err(malformed("provision text is empty".into()));
        }
        let index = provisions.len();
        let id = record.id.unwrap_or_else(|| format!("{corpus_id}:{index}"));
        if !seen.insert(id.clone()) {
            return Err(Error::DuplicateId(id));
        }
        provisions.push(Provision {
            citation: record.citation.unwrap_or_else(|| id.clone()),
            id,
            corpus_id: corpus_id.to_string(),
            text: record.text,
            label: record.label,
        });
    }

    Ok(Corpus {
        corpus_id: corpus_id.to_string(),
        provisions,
        source_path: path.display().to_string(),
    })
}

/// Writes provisions in the JSONL record format read by [`load_corpus`].
pub fn write_corpus(corpus: &Corpus, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    for p in &corpus.provisions {
        let record = ProvisionRecord {
            id: Some(p.id.clone()),
            citation: Some(p.citation.clone()),
            text: p.text.clone(),
            label: p.label.clone(),
        };
        let line = serde_json::to_string(&record).expect("record serializes");
        writeln!(out, "{line}").map_err(|e| Error::io(path, e))?;
    }
    out.flush().map_err(|e| Error::io(path, e))
}

/// Ids must be unique across every corpus of a run.
pub fn check_unique_ids(corpora: &[Corpus]) -> Result<()> {
    let mut seen = HashSet::new();
    for p in corpora.iter().flat_map(|c| &c.provisions) {
        if !seen.insert(p.id.as_str()) {
            return Err(Error::DuplicateId(p.id.clone()));
        }
    }
    Ok(())
}

/// Line-start heading patterns used to split raw regulation text.
#[derive(Debug, Clone)]
pub struct HeadingRules {
    patterns: Vec<Regex>,
}

const DEFAULT_HEADINGS: [&str; 3] = [
    r"^(?P<citation>Article\s+\d+[a-z]?)[.:]?",
    r"^(?P<citation>Section\s+\d+[a-z]?)[.:]?",
    r"^(?P<citation>\d+\.\d+)\.",
];

impl HeadingRules {
    /// Compiles user patterns. Each is anchored at the line start; a named
    /// group `citation` selects the citation text, otherwise the whole match
    /// is used with trailing punctuation stripped.
    pub fn new<S: AsRef<str>>(patterns: &[S]) -> Result<Self> {
        let patterns = patterns
            .iter()
            .map(|p| {
                let p = p.as_ref();
                let anchored = if p.starts_with('^') {
                    p.to_string()
                } else {
                    format!("^(?:{p})")
                };
                Regex::new(&anchored)
                    .map_err(|e| Error::Config(format!("heading pattern `{p}`: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { patterns })
    }

    fn match_line<'a>(&self, line: &'a str) -> Option<(&'a str, String)> {
        self.patterns.iter().find_map(|re| {
            let caps = re.captures(line)?;
            let whole = caps.get(0)?;
            if whole.as_str().is_empty() {
                return None;
            }
            let citation = caps
                .name("citation")
                .map(|m| m.as_str().to_string())
                .unwrap_or_else(|| {
                    whole
                        .as_str()
                        .trim_end_matches(|c: char| c.is_ascii_punctuation())
                        .to_string()
                });
            let citation = citation.split_whitespace().collect::<Vec<_>>().join(" ");
            Some((whole.as_str(), citation))
        })
    }
}

impl Default for HeadingRules {
    fn default() -> Self {
        Self::new(&DEFAULT_HEADINGS).expect("built-in heading patterns compile")
    }
}

/// A heading (absent for the preamble) and the text that follows it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Segment {
    pub heading: Option<String>,
    pub citation: String,
    pub body: String,
}

/// Splits text at heading lines. Text before the first heading, if any,
/// becomes a `preamble` segment.
pub fn segment_text(text: &str, rules: &HeadingRules) -> Vec<Segment> {
    let mut segments = Vec::new();
    let mut current = Segment {
        heading: None,
        citation: "preamble".to_string(),
        body: String::new(),
    };

    for line in text.split_inclusive('\n') {
        let trimmed = line.trim_start();
        match rules.match_line(trimmed) {
            Some((heading, citation)) => {
                if current.heading.is_some() || !current.body.trim().is_empty() {
                    segments.push(current);
                }
                let indent = &line[..line.len() - trimmed.len()];
                current = Segment {
                    heading: Some(format!("{indent}{heading}")),
                    citation,
                    body: trimmed[heading.len()..].to_string(),
                };
            }
            None => current.body.push_str(line),
        }
    }
    if current.heading.is_some() || !current.body.trim().is_empty() {
        segments.push(current);
    }
    segments
}

/// Segments one document into provisions with positional ids.
pub fn segment_document(text: &str, corpus_id: &str) -> Vec<Provision> {
    segment_with(text, corpus_id, &HeadingRules::default())
}

pub fn segment_with(text: &str, corpus_id: &str, rules: &HeadingRules) -> Vec<Provision> {
    segment_text(text, rules)
        .into_iter()
        .enumerate()
        .map(|(i, seg)| {
            let body = seg.body.trim();
            let text = if body.is_empty() {
                seg.heading
                    .as_deref()
                    .unwrap_or_default()
                    .trim()
                    .to_string()
            } else {
                body.to_string()
            };
            Provision {
                id: format!("{corpus_id}:{i}"),
                corpus_id: corpus_id.to_string(),
                citation: seg.citation,
                text,
                label: None,
            }
        })
        .collect()
}

/// Reads a plain-text document and segments it into a corpus.
pub fn load_text_document(
    path: impl AsRef<Path>,
    corpus_id: &str,
    rules: &HeadingRules,
) -> Result<Corpus> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    if text.trim().is_empty() {
        return Err(Error::InvalidInput(format!("{} is empty", path.display())));
    }
    Ok(Corpus {
        corpus_id: corpus_id.to_string(),
        provisions: segment_with(&text, corpus_id, rules),
        source_path: path.display().to_string(),
    })
}

pub fn read_label_map(path: impl AsRef<Path>) -> Result<BTreeMap<String, String>> {
    let path = path.as_ref();
    let raw = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&raw).map_err(|e| Error::Malformed {
        path: path.to_path_buf(),
        line: e.line(),
        message: e.to_string(),
    })
}

/// Applies an id → class map. Ids not in the map keep their current label.
pub fn attach_label_map(
    mut corpus: Corpus,
    labels: &BTreeMap<String, String>,
    label_set: &LabelSet,
) -> Result<Corpus> {
    let index: BTreeMap<&str, usize> = corpus
        .provisions
        .iter()
        .enumerate()
        .map(|(i, p)| (p.id.as_str(), i))
        .collect();
    let mut updates = Vec::with_capacity(labels.len());
    for (id, class) in labels {
        let &row = index
            .get(id.as_str())
            .ok_or_else(|| Error::UnknownId(id.clone()))?;
        label_set.check(class)?;
        updates.push((row, class.clone()));
    }
    for (row, class) in updates {
        corpus.provisions[row].label = Some(class);
    }
    Ok(corpus)
}

pub fn attach_labels(
    corpus: Corpus,
    labels_path: impl AsRef<Path>,
    label_set: &LabelSet,
) -> Result<Corpus> {
    let labels = read_label_map(labels_path)?;
    attach_label_map(corpus, &labels, label_set)
}
