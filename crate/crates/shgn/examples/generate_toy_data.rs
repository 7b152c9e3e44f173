//! Writes the deterministic 32-story demo corpus (stories, parses,
//! knowledge triples, lexicon) into a directory.
//!
//! ```bash
//! cargo run -p shgn --example generate_toy_data -- toydata
//! ```

fn main() {
    let dir = std::env::args().nth(1).unwrap_or_else(|| "toydata".into());
    shgn::toydata::write_all(&dir).expect("write toy corpus");
    println!("wrote stories.jsonl, knowledge.tsv, parses.conllu, lexicon.tsv to {dir}/");
}
