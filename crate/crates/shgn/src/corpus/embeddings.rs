use std::collections::HashMap;
use std::fs;
use std::path::Path;

use crate::corpus::tokenize;
use crate::error::{Result, ShgnError};

/// Exported vector table keyed by text. Keys are canonicalized with the
/// corpus tokenizer so lookups are insensitive to case and spacing.
#[derive(Clone, Debug)]
pub struct EmbeddingTable {
    dimension: usize,
    entries: HashMap<String, Vec<f64>>,
}

impl EmbeddingTable {
    pub fn new(dimension: usize) -> Self {
        EmbeddingTable {
            dimension,
            entries: HashMap::new(),
        }
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn canonical_key(text: &str) -> String {
        tokenize(text).join(" ")
    }

    pub fn insert(&mut self, key: &str, vector: Vec<f64>) -> Result<()> {
        if vector.len() != self.dimension {
            return Err(ShgnError::Invalid(format!(
                "vector for key {:?} has length {}, table dimension is {}",
                key,
                vector.len(),
                self.dimension
            )));
        }
        let canonical = Self::canonical_key(key);
        if self.entries.insert(canonical, vector).is_some() {
            return Err(ShgnError::Invalid(format!(
                "duplicate key {key:?} after normalization"
            )));
        }
        Ok(())
    }

    pub fn lookup(&self, text: &str) -> Option<&[f64]> {
        self.entries
            .get(&Self::canonical_key(text))
            .map(Vec::as_slice)
    }
}

/// Loads a text table: first line `N d`, then N lines `key v1 ... vd`.
///
/// Keys may contain spaces (sentence keys), so each line is split from the
/// right: the last `d` whitespace-separated fields are the vector and the
/// remaining prefix is the key.
pub fn load_embeddings(path: impl AsRef<Path>) -> Result<EmbeddingTable> {
    let path = path.as_ref();
    let display = path.display().to_string();
    let text = fs::read_to_string(path).map_err(|e| ShgnError::io(display.clone(), e))?;
    let mut lines = text.lines().enumerate();

    let Some((_, header)) = lines.next() else {
        return Err(ShgnError::parse(&display, 1, "empty file"));
    };
    let header_fields: Vec<&str> = header.split_whitespace().collect();
    let [n, d] = header_fields.as_slice() else {
        return Err(ShgnError::parse(&display, 1, "header must be \"N d\""));
    };
    let n: usize = n
        .parse()
        .map_err(|_| ShgnError::parse(&display, 1, "invalid entry count"))?;
    let d: usize = d
        .parse()
        .map_err(|_| ShgnError::parse(&display, 1, "invalid dimension"))?;
    if d == 0 {
        return Err(ShgnError::parse(&display, 1, "dimension must be positive"));
    }

    let mut table = EmbeddingTable::new(d);
    let mut loaded = 0;
    for (lineno, line) in lines {
        let lineno = lineno + 1;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() < d + 1 {
            return Err(ShgnError::parse(
                &display,
                lineno,
                format!(
                    "key {:?}: expected {} vector components, found {}",
                    fields.first().copied().unwrap_or(""),
                    d,
                    fields.len().saturating_sub(1)
                ),
            ));
        }
        let split = fields.len() - d;
        let key = fields[..split].join(" ");
        let mut vector = Vec::with_capacity(d);
        for raw in &fields[split..] {
            let v: f64 = raw.parse().map_err(|_| {
                ShgnError::parse(
                    &display,
                    lineno,
                    format!("key {key:?}: invalid component {raw:?}"),
                )
            })?;
            vector.push(v);
        }
        table
            .insert(&key, vector)
            .map_err(|e| ShgnError::parse(&display, lineno, e.to_string()))?;
        loaded += 1;
    }
    if loaded != n {
        return Err(ShgnError::Invalid(format!(
            "{display}: header declares {n} entries, found {loaded}"
        )));
    }
    Ok(table)
}
