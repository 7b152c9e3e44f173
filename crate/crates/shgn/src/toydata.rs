//! Deterministic desk-scale demo corpus: 32 templated four-sentence stories
//! with endings, matching dependency parses, a knowledge triple file, and a
//! small valence lexicon. The training and overfitting examples and the test
//! suite all run on this data; `examples/generate_toy_data.rs` writes it to
//! disk.

use std::fs;
use std::path::Path;

use crate::error::{Result, ShgnError};

const NAMES: [&str; 8] = [
    "anna", "ben", "carla", "david", "emma", "frank", "grace", "henry",
];
const PLACES: [&str; 4] = ["market", "park", "cafe", "library"];
const OBJECTS: [&str; 8] = [
    "cake", "book", "kite", "lamp", "scarf", "radio", "plant", "clock",
];
const CATEGORIES: [&str; 8] = [
    "dessert",
    "literature",
    "toy",
    "fixture",
    "clothing",
    "device",
    "greenery",
    "machine",
];
const ADJECTIVES: [&str; 4] = ["shiny", "heavy", "pretty", "dusty"];
const EMOTIONS: [&str; 4] = ["happy", "sad", "proud", "tired"];
const VERBS: [&str; 4] = ["keep", "sell", "toss", "share"];

pub const STORY_COUNT: usize = 32;

/// Raw text of story `i`: id, four context sentences, and the ending.
pub fn story_text(i: usize) -> (String, [String; 4], String) {
    let name = NAMES[i % 8];
    let object = OBJECTS[(i % 8 + i / 8) % 8];
    let place = PLACES[(i / 8) % 4];
    let adjective = ADJECTIVES[i % 4];
    let emotion = EMOTIONS[(i / 4) % 4];
    let verb = VERBS[(i / 8) % 4];
    (
        format!("toy{i:02}"),
        [
            format!("{name} went to the {place} ."),
            format!("{name} wanted the {object} ."),
            format!("the {object} was very {adjective} ."),
            format!("{name} felt {emotion} ."),
        ],
        format!("{name} decided to {verb} the {object} ."),
    )
}

pub fn stories_jsonl() -> String {
    let mut out = String::new();
    for i in 0..STORY_COUNT {
        let (id, context, ending) = story_text(i);
        let record = serde_json::json!({
            "id": id,
            "context": context,
            "ending": ending,
        });
        out.push_str(&record.to_string());
        out.push('\n');
    }
    out
}

pub fn knowledge_tsv() -> String {
    let mut out = String::new();
    for (object, category) in OBJECTS.iter().zip(CATEGORIES.iter()) {
        out.push_str(&format!("{object}\tIsA\t{category}\n"));
    }
    for name in NAMES {
        out.push_str(&format!("{name}\tIsA\tperson\n"));
    }
    out.push_str("dog\tDesires\tbone\n");
    out.push_str("sofa\tAtLocation\tliving room\n");
    out
}

pub fn lexicon_tsv() -> String {
    let entries = [
        ("keep", 1.8),
        ("sell", 0.0),
        ("toss", -1.6),
        ("share", 2.2),
        ("happy", 2.7),
        ("sad", -2.1),
        ("proud", 1.9),
        ("tired", -0.8),
    ];
    entries
        .iter()
        .map(|(t, v)| format!("{t}\t{v}\n"))
        .collect()
}

fn conllu_block(out: &mut String, sent_id: &str, rows: &[(&str, &str, usize, &str)]) {
    out.push_str(&format!("# sent_id = {sent_id}\n"));
    for (i, (form, upos, head, rel)) in rows.iter().enumerate() {
        out.push_str(&format!(
            "{}\t{form}\t_\t{upos}\t_\t_\t{head}\t{rel}\t_\t_\n",
            i + 1
        ));
    }
    out.push('\n');
}

pub fn parses_conllu() -> String {
    let mut out = String::new();
    for i in 0..STORY_COUNT {
        let (id, context, _) = story_text(i);
        let words: Vec<Vec<&str>> = context
            .iter()
            .map(|s| s.split_whitespace().collect())
            .collect();
        conllu_block(
            &mut out,
            &format!("{id}.1"),
            &[
                (words[0][0], "PROPN", 2, "nsubj"),
                (words[0][1], "VERB", 0, "root"),
                (words[0][2], "ADP", 5, "case"),
                (words[0][3], "DET", 5, "det"),
                (words[0][4], "NOUN", 2, "obl"),
                (words[0][5], "PUNCT", 2, "punct"),
            ],
        );
        conllu_block(
            &mut out,
            &format!("{id}.2"),
            &[
                (words[1][0], "PROPN", 2, "nsubj"),
                (words[1][1], "VERB", 0, "root"),
                (words[1][2], "DET", 4, "det"),
                (words[1][3], "NOUN", 2, "obj"),
                (words[1][4], "PUNCT", 2, "punct"),
            ],
        );
        conllu_block(
            &mut out,
            &format!("{id}.3"),
            &[
                (words[2][0], "DET", 2, "det"),
                (words[2][1], "NOUN", 5, "nsubj"),
                (words[2][2], "AUX", 5, "cop"),
                (words[2][3], "ADV", 5, "advmod"),
                (words[2][4], "ADJ", 0, "root"),
                (words[2][5], "PUNCT", 5, "punct"),
            ],
        );
        conllu_block(
            &mut out,
            &format!("{id}.4"),
            &[
                (words[3][0], "PROPN", 2, "nsubj"),
                (words[3][1], "VERB", 0, "root"),
                (words[3][2], "ADJ", 2, "xcomp"),
                (words[3][3], "PUNCT", 2, "punct"),
            ],
        );
    }
    out
}

/// Writes `stories.jsonl`, `knowledge.tsv`, `parses.conllu`, and
/// `lexicon.tsv` into `dir`.
pub fn write_all(dir: impl AsRef<Path>) -> Result<()> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| ShgnError::io(dir.display().to_string(), e))?;
    for (name, content) in [
        ("stories.jsonl", stories_jsonl()),
        ("knowledge.tsv", knowledge_tsv()),
        ("parses.conllu", parses_conllu()),
        ("lexicon.tsv", lexicon_tsv()),
    ] {
        let path = dir.join(name);
        fs::write(&path, content).map_err(|e| ShgnError::io(path.display().to_string(), e))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{load_dep_trees, load_knowledge, load_lexicon, load_stories};

    #[test]
    fn generated_corpus_loads_cleanly() {
        let dir = tempfile::tempdir().unwrap();
        write_all(dir.path()).unwrap();
        let stories = load_stories(dir.path().join("stories.jsonl")).unwrap();
        assert_eq!(stories.len(), STORY_COUNT);
        assert!(stories.iter().all(|s| s.sentence_count() == 4));
        let trees = load_dep_trees(dir.path().join("parses.conllu")).unwrap();
        assert_eq!(trees.len(), STORY_COUNT * 4);
        for story in &stories {
            crate::corpus::trees_for_story(story, &trees).unwrap();
        }
        let knowledge = load_knowledge(dir.path().join("knowledge.tsv")).unwrap();
        assert_eq!(knowledge.len(), 18);
        let lexicon = load_lexicon(dir.path().join("lexicon.tsv")).unwrap();
        assert_eq!(lexicon.len(), 8);
    }

    #[test]
    fn endings_are_pairwise_distinct() {
        let endings: std::collections::HashSet<String> =
            (0..STORY_COUNT).map(|i| story_text(i).2).collect();
        assert_eq!(endings.len(), STORY_COUNT);
    }
}
