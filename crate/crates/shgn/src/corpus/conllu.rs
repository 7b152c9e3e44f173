use std::collections::HashMap;
use std::fs;
use std::path::Path;

use crate::corpus::Story;
use crate::error::{Result, ShgnError};

/// Dependency parse of one sentence. `heads[i]` is the 1-based index of token
/// i's syntactic head, 0 for the root.
#[derive(Clone, Debug, PartialEq)]
pub struct DepTree {
    pub sentence_id: String,
    pub forms: Vec<String>,
    pub upos: Vec<String>,
    pub heads: Vec<usize>,
    pub relations: Vec<String>,
}

impl DepTree {
    pub fn len(&self) -> usize {
        self.heads.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heads.is_empty()
    }

    /// Undirected degree of token i: children count plus one if non-root.
    pub fn degree(&self, i: usize) -> usize {
        let children = self.heads.iter().filter(|&&h| h == i + 1).count();
        children + usize::from(self.heads[i] != 0)
    }

    fn validate(&self, path: &str, line: usize) -> Result<()> {
        let n = self.heads.len();
        let roots = self.heads.iter().filter(|&&h| h == 0).count();
        if roots != 1 {
            return Err(ShgnError::parse(
                path,
                line,
                format!("sentence {} has {} roots, expected exactly 1", self.sentence_id, roots),
            ));
        }
        for (i, &h) in self.heads.iter().enumerate() {
            if h > n {
                return Err(ShgnError::parse(
                    path,
                    line,
                    format!(
                        "sentence {}: token {} head {} out of range 0..={}",
                        self.sentence_id,
                        i + 1,
                        h,
                        n
                    ),
                ));
            }
        }
        // Every token must reach the root; a walk longer than n tokens means
        // a cycle.
        for start in 0..n {
            let mut cur = self.heads[start];
            let mut steps = 0;
            while cur != 0 {
                cur = self.heads[cur - 1];
                steps += 1;
                if steps > n {
                    return Err(ShgnError::parse(
                        path,
                        line,
                        format!("sentence {}: cyclic heads", self.sentence_id),
                    ));
                }
            }
        }
        Ok(())
    }
}

/// Reads a CoNLL-U file into one `DepTree` per sentence block, keyed by the
/// `# sent_id = <id>` comment. Multiword-token ranges (ids like `3-4`) and
/// empty nodes (ids like `3.1`) are skipped.
pub fn load_dep_trees(path: impl AsRef<Path>) -> Result<HashMap<String, DepTree>> {
    let path = path.as_ref();
    let display = path.display().to_string();
    let text = fs::read_to_string(path).map_err(|e| ShgnError::io(display.clone(), e))?;

    let mut trees = HashMap::new();
    let mut sent_id: Option<String> = None;
    let mut block_start = 1usize;
    let mut forms = Vec::new();
    let mut upos = Vec::new();
    let mut heads = Vec::new();
    let mut relations = Vec::new();

    let mut flush = |sent_id: &mut Option<String>,
                     forms: &mut Vec<String>,
                     upos: &mut Vec<String>,
                     heads: &mut Vec<usize>,
                     relations: &mut Vec<String>,
                     block_start: usize|
     -> Result<()> {
        if forms.is_empty() && sent_id.is_none() {
            return Ok(());
        }
        let Some(id) = sent_id.take() else {
            return Err(ShgnError::parse(
                &display,
                block_start,
                "sentence block has no sent_id comment",
            ));
        };
        if forms.is_empty() {
            return Err(ShgnError::parse(
                &display,
                block_start,
                format!("sentence {id} has no tokens"),
            ));
        }
        let tree = DepTree {
            sentence_id: id.clone(),
            forms: std::mem::take(forms),
            upos: std::mem::take(upos),
            heads: std::mem::take(heads),
            relations: std::mem::take(relations),
        };
        tree.validate(&display, block_start)?;
        if trees.insert(id.clone(), tree).is_some() {
            return Err(ShgnError::parse(
                &display,
                block_start,
                format!("duplicate sent_id {id}"),
            ));
        }
        Ok(())
    };

    for (lineno, line) in text.lines().enumerate() {
        let lineno = lineno + 1;
        if line.trim().is_empty() {
            flush(&mut sent_id, &mut forms, &mut upos, &mut heads, &mut relations, block_start)?;
            block_start = lineno + 1;
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            if let Some((key, value)) = comment.split_once('=') {
                if key.trim() == "sent_id" {
                    sent_id = Some(value.trim().to_string());
                }
            }
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 10 {
            return Err(ShgnError::parse(
                &display,
                lineno,
                format!("expected 10 tab-separated columns, got {}", cols.len()),
            ));
        }
        let Ok(id) = cols[0].parse::<usize>() else {
            // Multiword-token range or empty node: not part of the tree.
            continue;
        };
        if id != forms.len() + 1 {
            return Err(ShgnError::parse(
                &display,
                lineno,
                format!("token id {} out of sequence, expected {}", id, forms.len() + 1),
            ));
        }
        let head: usize = cols[6].parse().map_err(|_| {
            ShgnError::parse(&display, lineno, format!("invalid head field {:?}", cols[6]))
        })?;
        forms.push(cols[1].to_string());
        upos.push(cols[3].to_string());
        heads.push(head);
        relations.push(cols[7].to_string());
    }
    flush(&mut sent_id, &mut forms, &mut upos, &mut heads, &mut relations, block_start)?;
    Ok(trees)
}

/// Resolves the parse of every context sentence of a story under the
/// `<storyid>.<k>` naming convention (k is 1-based), checking token counts.
pub fn trees_for_story<'a>(
    story: &Story,
    trees: &'a HashMap<String, DepTree>,
) -> Result<Vec<&'a DepTree>> {
    let mut out = Vec::with_capacity(story.context.len());
    for (k, sentence) in story.context.iter().enumerate() {
        let key = format!("{}.{}", story.id, k + 1);
        let Some(tree) = trees.get(&key) else {
            return Err(ShgnError::Invalid(format!(
                "no dependency tree for sentence {key}"
            )));
        };
        if tree.len() != sentence.len() {
            return Err(ShgnError::Invalid(format!(
                "tree {key} has {} tokens but the sentence has {}",
                tree.len(),
                sentence.len()
            )));
        }
        out.push(tree);
    }
    Ok(out)
}
