use std::collections::HashMap;
use std::fs;
use std::path::Path;

use crate::error::{Result, ShgnError};

/// Token valence lexicon. Lookups of absent tokens yield valence 0.
#[derive(Clone, Debug, Default)]
pub struct SentimentLexicon {
    entries: HashMap<String, f64>,
}

impl SentimentLexicon {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn from_entries(entries: impl IntoIterator<Item = (String, f64)>) -> Self {
        SentimentLexicon {
            entries: entries.into_iter().collect(),
        }
    }

    pub fn valence(&self, token: &str) -> f64 {
        self.entries.get(token).copied().unwrap_or(0.0)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Loads a `token\tvalence` TSV; tokens are case-folded, duplicates rejected.
pub fn load_lexicon(path: impl AsRef<Path>) -> Result<SentimentLexicon> {
    let path = path.as_ref();
    let display = path.display().to_string();
    let text = fs::read_to_string(path).map_err(|e| ShgnError::io(display.clone(), e))?;
    let mut entries = HashMap::new();
    for (lineno, line) in text.lines().enumerate() {
        let lineno = lineno + 1;
        if line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 2 {
            return Err(ShgnError::parse(
                &display,
                lineno,
                format!("expected 2 tab-separated columns, got {}", cols.len()),
            ));
        }
        let token = cols[0].to_lowercase();
        let valence: f64 = cols[1].parse().map_err(|_| {
            ShgnError::parse(&display, lineno, format!("invalid valence {:?}", cols[1]))
        })?;
        if entries.insert(token.clone(), valence).is_some() {
            return Err(ShgnError::parse(
                &display,
                lineno,
                format!("duplicate token {token:?}"),
            ));
        }
    }
    Ok(SentimentLexicon { entries })
}
