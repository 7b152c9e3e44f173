//! Ingestion and validation of all external data: story corpora (JSONL),
//! dependency parses (CoNLL-U), knowledge triples (TSV), a sentiment lexicon
//! (TSV), pretrained embedding tables, and the label cache.
//!
//! Loaders are pure functions of file content and fail fast: a malformed
//! record aborts the whole load with a line number rather than being skipped.

mod conllu;
mod embeddings;
mod knowledge;
mod lexicon;
mod stopwords;

use std::collections::HashMap;
use std::fmt;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Result, ShgnError};

pub use conllu::{load_dep_trees, trees_for_story, DepTree};
pub use embeddings::{load_embeddings, EmbeddingTable};
pub use knowledge::{load_knowledge, KnowledgeEdge};
pub use lexicon::{load_lexicon, SentimentLexicon};
pub use stopwords::Stopwords;

/// Three-way sentiment label with fixed class indexing 0/1/2.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sentiment {
    Negative,
    Neutral,
    Positive,
}

impl Sentiment {
    pub fn class_index(self) -> usize {
        match self {
            Sentiment::Negative => 0,
            Sentiment::Neutral => 1,
            Sentiment::Positive => 2,
        }
    }
}

impl fmt::Display for Sentiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Sentiment::Negative => "negative",
            Sentiment::Neutral => "neutral",
            Sentiment::Positive => "positive",
        };
        f.write_str(s)
    }
}

/// One corpus record: a multi-sentence context, an optional gold ending, and
/// labels attached by the auxiliary-task labelers.
#[derive(Clone, Debug, PartialEq)]
pub struct Story {
    pub id: String,
    /// Tokenized context sentences, in order.
    pub context: Vec<Vec<String>>,
    /// Tokenized gold ending; absent for inference-only records.
    pub ending: Option<Vec<String>>,
    pub sentiment_label: Option<Sentiment>,
    /// Per context token, whether it is a clue word.
    pub clue_flags: Option<Vec<Vec<bool>>>,
}

impl Story {
    pub fn sentence_count(&self) -> usize {
        self.context.len()
    }

    /// Sentence text as stored on sentence nodes and used as embedding key.
    pub fn sentence_text(&self, k: usize) -> String {
        self.context[k].join(" ")
    }
}

/// Lowercases, splits on whitespace, and detaches terminal punctuation
/// (`. , ! ? ; :`) as separate tokens. Deterministic and idempotent over its
/// own output joined with spaces.
pub fn tokenize(text: &str) -> Vec<String> {
    const DETACH: [char; 6] = ['.', ',', '!', '?', ';', ':'];
    let mut tokens = Vec::new();
    for piece in text.to_lowercase().split_whitespace() {
        let mut core = piece;
        let mut tail = Vec::new();
        while let Some(last) = core.chars().last() {
            if DETACH.contains(&last) {
                core = &core[..core.len() - last.len_utf8()];
                tail.push(last.to_string());
            } else {
                break;
            }
        }
        if !core.is_empty() {
            tokens.push(core.to_string());
        }
        tokens.extend(tail.into_iter().rev());
    }
    tokens
}

/// On-disk story record: `{id, context: [str], ending?: str}` per JSONL line.
#[derive(Serialize, Deserialize)]
struct StoryRecord {
    id: String,
    context: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    ending: Option<String>,
}

/// Loads and tokenizes a JSONL story file, preserving record order.
pub fn load_stories(path: impl AsRef<Path>) -> Result<Vec<Story>> {
    let path = path.as_ref();
    let text =
        fs::read_to_string(path).map_err(|e| ShgnError::io(path.display().to_string(), e))?;
    let mut stories = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let lineno = lineno + 1;
        if line.trim().is_empty() {
            continue;
        }
        let record: StoryRecord = serde_json::from_str(line).map_err(|e| {
            ShgnError::parse(
                path.display().to_string(),
                lineno,
                format!("malformed record: {e}"),
            )
        })?;
        if record.context.is_empty() {
            return Err(ShgnError::parse(
                path.display().to_string(),
                lineno,
                format!("record {}: context is empty", record.id),
            ));
        }
        let mut context = Vec::with_capacity(record.context.len());
        for (k, sentence) in record.context.iter().enumerate() {
            let tokens = tokenize(sentence);
            if tokens.is_empty() {
                return Err(ShgnError::parse(
                    path.display().to_string(),
                    lineno,
                    format!("record {}: context sentence {} is empty", record.id, k + 1),
                ));
            }
            context.push(tokens);
        }
        let ending = match &record.ending {
            Some(e) => {
                let tokens = tokenize(e);
                if tokens.is_empty() {
                    return Err(ShgnError::parse(
                        path.display().to_string(),
                        lineno,
                        format!("record {}: ending is empty", record.id),
                    ));
                }
                Some(tokens)
            }
            None => None,
        };
        stories.push(Story {
            id: record.id,
            context,
            ending,
            sentiment_label: None,
            clue_flags: None,
        });
    }
    Ok(stories)
}

/// Serializes stories back to the JSONL story format (tokens joined with
/// single spaces). Reloading the output reproduces the same token lists.
pub fn save_stories(path: impl AsRef<Path>, stories: &[Story]) -> Result<()> {
    let path = path.as_ref();
    let mut out = String::new();
    for story in stories {
        let record = StoryRecord {
            id: story.id.clone(),
            context: story.context.iter().map(|s| s.join(" ")).collect(),
            ending: story.ending.as_ref().map(|e| e.join(" ")),
        };
        out.push_str(&serde_json::to_string(&record).expect("story record serializes"));
        out.push('\n');
    }
    fs::write(path, out).map_err(|e| ShgnError::io(path.display().to_string(), e))
}

/// Label-cache record: `{id, sentiment, clue_flags}` per JSONL line, so
/// labeling runs once and training re-ingests the result.
#[derive(Serialize, Deserialize)]
pub struct LabelRecord {
    pub id: String,
    pub sentiment: Sentiment,
    pub clue_flags: Vec<Vec<bool>>,
}

pub fn save_label_cache(path: impl AsRef<Path>, stories: &[Story]) -> Result<()> {
    let path = path.as_ref();
    let mut out = String::new();
    for story in stories {
        let (Some(sentiment), Some(clue_flags)) = (story.sentiment_label, &story.clue_flags)
        else {
            return Err(ShgnError::Invalid(format!(
                "story {} is not fully labeled",
                story.id
            )));
        };
        let record = LabelRecord {
            id: story.id.clone(),
            sentiment,
            clue_flags: clue_flags.clone(),
        };
        out.push_str(&serde_json::to_string(&record).expect("label record serializes"));
        out.push('\n');
    }
    fs::write(path, out).map_err(|e| ShgnError::io(path.display().to_string(), e))
}

pub fn load_label_cache(path: impl AsRef<Path>) -> Result<HashMap<String, LabelRecord>> {
    let path = path.as_ref();
    let text =
        fs::read_to_string(path).map_err(|e| ShgnError::io(path.display().to_string(), e))?;
    let mut cache = HashMap::new();
    for (lineno, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let record: LabelRecord = serde_json::from_str(line)
            .map_err(|e| ShgnError::parse(path.display().to_string(), lineno + 1, e.to_string()))?;
        cache.insert(record.id.clone(), record);
    }
    Ok(cache)
}

/// Attaches cached labels to stories; flag shapes must match the context.
pub fn apply_label_cache(
    stories: &mut [Story],
    cache: &HashMap<String, LabelRecord>,
) -> Result<()> {
    for story in stories.iter_mut() {
        let Some(record) = cache.get(&story.id) else {
            return Err(ShgnError::Invalid(format!(
                "label cache has no entry for story {}",
                story.id
            )));
        };
        let shapes_match = record.clue_flags.len() == story.context.len()
            && record
                .clue_flags
                .iter()
                .zip(story.context.iter())
                .all(|(f, s)| f.len() == s.len());
        if !shapes_match {
            return Err(ShgnError::Invalid(format!(
                "label cache clue flags for story {} do not match its context shape",
                story.id
            )));
        }
        story.sentiment_label = Some(record.sentiment);
        story.clue_flags = Some(record.clue_flags.clone());
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::io::Write;

    fn temp_jsonl(lines: &[&str]) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        for line in lines {
            writeln!(f, "{line}").unwrap();
        }
        f
    }

    #[test]
    fn tokenize_detaches_terminal_punctuation() {
        assert_eq!(
            tokenize("Keith lost his job."),
            vec!["keith", "lost", "his", "job", "."]
        );
        assert_eq!(tokenize("okay!?"), vec!["okay", "!", "?"]);
        assert_eq!(tokenize("u.s."), vec!["u.s", "."]);
        assert_eq!(tokenize("..."), vec![".", ".", "."]);
        assert_eq!(tokenize("don't stop"), vec!["don't", "stop"]);
    }

    #[test]
    fn load_story_with_ending_counts_tokens() {
        let f = temp_jsonl(&[
            r#"{"id":"a","context":["One day Keith worked","He got a quote","He kept cash","His boss found out"],"ending":"Keith lost his job."}"#,
        ]);
        let stories = load_stories(f.path()).unwrap();
        assert_eq!(stories.len(), 1);
        assert_eq!(stories[0].sentence_count(), 4);
        assert_eq!(stories[0].ending.as_ref().unwrap().len(), 5);
    }

    #[test]
    fn ending_absent_is_valid_for_inference() {
        let f = temp_jsonl(&[r#"{"id":"a","context":["Just one sentence"]}"#]);
        let stories = load_stories(f.path()).unwrap();
        assert!(stories[0].ending.is_none());
    }

    #[test]
    fn malformed_middle_line_fails_whole_load_naming_line() {
        let f = temp_jsonl(&[
            r#"{"id":"a","context":["ok"]}"#,
            r#"{"id":"b","context":"#,
            r#"{"id":"c","context":["ok"]}"#,
        ]);
        let err = load_stories(f.path()).unwrap_err();
        assert!(err.to_string().contains(":2:"), "{err}");
    }

    #[test]
    fn empty_context_rejected_with_diagnostic() {
        let f = temp_jsonl(&[r#"{"id":"a","context":[]}"#]);
        let err = load_stories(f.path()).unwrap_err();
        assert!(err.to_string().contains("context is empty"));
    }

    #[test]
    fn story_roundtrip_is_structurally_identical() {
        let f = temp_jsonl(&[
            r#"{"id":"a","context":["Anna went Home.","It was fine!"],"ending":"She slept well."}"#,
        ]);
        let stories = load_stories(f.path()).unwrap();
        let out = tempfile::NamedTempFile::new().unwrap();
        save_stories(out.path(), &stories).unwrap();
        let reloaded = load_stories(out.path()).unwrap();
        assert_eq!(stories, reloaded);
    }

    #[test]
    fn label_cache_roundtrip() {
        let mut story = Story {
            id: "a".into(),
            context: vec![tokenize("anna went home .")],
            ending: Some(tokenize("she slept .")),
            sentiment_label: Some(Sentiment::Neutral),
            clue_flags: Some(vec![vec![true, true, false, false]]),
        };
        let f = tempfile::NamedTempFile::new().unwrap();
        save_label_cache(f.path(), std::slice::from_ref(&story)).unwrap();
        story.sentiment_label = None;
        story.clue_flags = None;
        let cache = load_label_cache(f.path()).unwrap();
        let mut stories = vec![story];
        apply_label_cache(&mut stories, &cache).unwrap();
        assert_eq!(stories[0].sentiment_label, Some(Sentiment::Neutral));
        assert_eq!(
            stories[0].clue_flags,
            Some(vec![vec![true, true, false, false]])
        );
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        // Tokenization is deterministic and idempotent over joined output.
        #[test]
        fn tokenize_idempotent_over_join(s in "[ -~]{0,60}") {
            let once = tokenize(&s);
            let again = tokenize(&once.join(" "));
            prop_assert_eq!(once, again);
        }
    }
}
