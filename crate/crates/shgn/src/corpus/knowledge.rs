use std::collections::HashSet;
use std::fs;
use std::path::Path;

use crate::error::{Result, ShgnError};

/// One commonsense triple. All fields are case-folded on load.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct KnowledgeEdge {
    pub head: String,
    pub relation: String,
    pub tail: String,
}

/// Loads a `head\trelation\ttail` TSV, case-folding fields and dropping exact
/// duplicates while preserving first-occurrence order.
pub fn load_knowledge(path: impl AsRef<Path>) -> Result<Vec<KnowledgeEdge>> {
    let path = path.as_ref();
    let display = path.display().to_string();
    let text = fs::read_to_string(path).map_err(|e| ShgnError::io(display.clone(), e))?;
    let mut edges = Vec::new();
    let mut seen = HashSet::new();
    for (lineno, line) in text.lines().enumerate() {
        let lineno = lineno + 1;
        if line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 3 {
            return Err(ShgnError::parse(
                &display,
                lineno,
                format!("expected 3 tab-separated columns, got {}", cols.len()),
            ));
        }
        let edge = KnowledgeEdge {
            head: cols[0].to_lowercase(),
            relation: cols[1].to_lowercase(),
            tail: cols[2].to_lowercase(),
        };
        if edge.head.is_empty() || edge.relation.is_empty() || edge.tail.is_empty() {
            return Err(ShgnError::parse(&display, lineno, "empty field"));
        }
        if edge.head == edge.tail {
            return Err(ShgnError::parse(
                &display,
                lineno,
                format!("self-loop edge on {:?}", edge.head),
            ));
        }
        if seen.insert(edge.clone()) {
            edges.push(edge);
        }
    }
    Ok(edges)
}
