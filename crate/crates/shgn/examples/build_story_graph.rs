//! Builds the heterogeneous graph of one story: one-hop concept retrieval
//! from the knowledge triples, filtering to concepts seen in more than one
//! sentence, and typed edge emission.
//!
//! ```bash
//! cargo run -p shgn --example build_story_graph
//! ```

use shgn::corpus::{load_dep_trees, load_knowledge, load_stories, Stopwords};
use shgn::graph::{build_graph, retrieve_concepts, GraphOptions};

fn main() -> shgn::Result<()> {
    let fixtures = format!("{}/tests/fixtures", env!("CARGO_MANIFEST_DIR"));
    let stories = load_stories(format!("{fixtures}/story.jsonl"))?;
    let knowledge = load_knowledge(format!("{fixtures}/knowledge.tsv"))?;
    let trees = load_dep_trees(format!("{fixtures}/parses.conllu"))?;
    let stopwords = Stopwords::default_english();

    let story = &stories[0];
    let hits = retrieve_concepts(story, &knowledge, Some(&trees), &stopwords);
    println!("retrieved {} concepts:", hits.len());
    for hit in &hits {
        let kept = hit.source_sentences.len() >= 2;
        println!(
            "  {:<12} sentences {:?} {}",
            hit.concept,
            hit.source_sentences,
            if kept { "(kept)" } else { "(dropped: single sentence)" }
        );
    }

    let graph = build_graph(story, &hits, Some(&trees), &stopwords, GraphOptions::default())?;
    println!(
        "\ngraph for {}: {} nodes, {} edges",
        story.id,
        graph.node_count(),
        graph.edges().len()
    );
    println!(
        "{}",
        serde_json::to_string_pretty(&graph.export()).expect("graph serializes")
    );
    Ok(())
}
