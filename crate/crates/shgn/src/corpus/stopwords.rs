use std::collections::HashSet;
use std::fs;
use std::path::Path;

use crate::error::{Result, ShgnError};

/// Stopword set; tokens listed here never become word nodes and never
/// trigger concept retrieval. The default English list ships with the crate
/// and includes the detached punctuation tokens.
#[derive(Clone, Debug)]
pub struct Stopwords {
    set: HashSet<String>,
}

const DEFAULT_ENGLISH: &str = include_str!("../../assets/stopwords_en.txt");

impl Stopwords {
    pub fn default_english() -> Self {
        Self::from_text(DEFAULT_ENGLISH)
    }

    /// Loads a one-token-per-line file.
    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text =
            fs::read_to_string(path).map_err(|e| ShgnError::io(path.display().to_string(), e))?;
        Ok(Self::from_text(&text))
    }

    fn from_text(text: &str) -> Self {
        Stopwords {
            set: text
                .lines()
                .map(str::trim)
                .filter(|l| !l.is_empty())
                .map(str::to_lowercase)
                .collect(),
        }
    }

    pub fn contains(&self, token: &str) -> bool {
        self.set.contains(token)
    }

    pub fn len(&self) -> usize {
        self.set.len()
    }

    pub fn is_empty(&self) -> bool {
        self.set.is_empty()
    }
}
