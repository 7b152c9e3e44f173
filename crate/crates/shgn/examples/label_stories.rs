//! Runs both auxiliary-task labelers on the fixture story: ending sentiment
//! via the lexicon compound score, and clue words via dependency-tree
//! degrees.
//!
//! ```bash
//! cargo run -p shgn --example label_stories
//! ```

use shgn::auxtasks::{compound_score, label_stories, ClueRule};
use shgn::corpus::{load_dep_trees, load_lexicon, load_stories};

fn main() -> shgn::Result<()> {
    let fixtures = format!("{}/tests/fixtures", env!("CARGO_MANIFEST_DIR"));
    let mut stories = load_stories(format!("{fixtures}/story.jsonl"))?;
    let lexicon = load_lexicon(format!("{fixtures}/lexicon.tsv"))?;
    let trees = load_dep_trees(format!("{fixtures}/parses.conllu"))?;

    label_stories(&mut stories, &lexicon, &trees, ClueRule::TopDegreeClasses)?;

    for story in &stories {
        let ending = story.ending.as_ref().expect("fixture has endings");
        println!("story {}", story.id);
        println!(
            "  ending {:?} -> compound {:.4} -> {}",
            ending.join(" "),
            compound_score(ending, &lexicon),
            story.sentiment_label.expect("labeled")
        );
        let flags = story.clue_flags.as_ref().expect("labeled");
        for (sentence, sentence_flags) in story.context.iter().zip(flags.iter()) {
            let clues: Vec<&str> = sentence
                .iter()
                .zip(sentence_flags.iter())
                .filter(|(_, &f)| f)
                .map(|(t, _)| t.as_str())
                .collect();
            println!("  {:<45} clues: {}", sentence.join(" "), clues.join(", "));
        }
    }
    Ok(())
}
