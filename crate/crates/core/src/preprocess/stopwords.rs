use std::collections::BTreeSet;
use std::path::Path;

use crate::error::{Error, Result};

const BUILTIN: &str = include_str!("../../data/stopwords.txt");

/// Lemma stop list. Lines starting with `#` are comments.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StopList {
    lemmas: BTreeSet<String>,
}

impl StopList {
    pub fn parse(text: &str) -> Self {
        let lemmas = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(str::to_lowercase)
            .collect();
        Self { lemmas }
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(Self::parse(&text))
    }

    pub fn contains(&self, lemma: &str) -> bool {
        self.lemmas.contains(lemma)
    }

    pub fn len(&self) -> usize {
        self.lemmas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lemmas.is_empty()
    }
}

impl Default for StopList {
    fn default() -> Self {
        Self::parse(BUILTIN)
    }
}
